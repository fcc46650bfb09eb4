//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` (after optional whitespace) are comments, as is
//! anything after a `#` on a value line. Every key is optional; missing keys
//! take the reference values listed in [`SimConfig::default`]. Unknown keys
//! are rejected.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::collisions::KsParams;
use crate::denoise::DenoiseParams;
use crate::domain::{GridSpec, PhaseDomain};
use crate::dynamics::{ForceSpec, Integrator, Streaming};
use crate::error::{Error, Result};
use crate::objective::{z_desired, DiagCov, ObjectiveParams, TargetOrbit};
use crate::sampling::InitialDensitySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Uniform,
    Gaussian,
}

/// Every physical and numerical parameter of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_t: usize,
    pub dt: f64,
    pub n_x: usize,
    pub n_v: usize,
    pub v_max: f64,
    pub p_max: f64,
    pub n_f: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub nu: f64,
    pub c_theta: f64,
    pub c_phi: f64,
    pub c_s: f64,
    /// Size of the terminal adjoint cloud.
    pub n_q_terminal: usize,
    /// Mean free-flight time; `None` means `dt / 10`.
    pub tau: Option<f64>,
    /// KS inverse variance; `None` means `1 / (2 (1 - gamma^2))`.
    pub beta: Option<f64>,
    pub sigma_theta: DiagCov,
    pub sigma_phi: DiagCov,
    /// Terminal target; `None` means `z_D(T)`.
    pub z_t: Option<(f64, f64)>,
    pub orbit_radius: f64,
    /// Period of the target orbit; `None` means the horizon `T`.
    pub orbit_period: Option<f64>,
    pub seed: u64,
    pub use_time_averaged_theta: bool,
    pub adjoint_streaming: Streaming,
    pub integrator: Integrator,
    /// Longest sub-step a free flight is integrated with in one go.
    pub max_substep: Option<f64>,
    pub max_adjoint_particles: Option<usize>,
    /// Adjoint value represented by one particle, so that `q = w * count`.
    /// Injecting `-theta` particles per cell and step makes `w = dt` the
    /// consistent choice; `w = 1` uses raw counts as the value.
    pub adjoint_count_weight: Option<f64>,
    /// Feed the extracted control back into the adjoint solve (gradient
    /// penalty in the source and control in the drift). Off gives the plain
    /// adjoint with `u = 0`, for debugging.
    pub adjoint_closure: bool,
    pub parallel: bool,
    pub initial_density: InitialKind,
    pub init_mean: (f64, f64),
    pub init_cov: DiagCov,
}

impl Default for SimConfig {
    /// Reference parameter set: 100 steps of 0.025 on a 50x50 mesh over
    /// `[0, 10] x [-5, 5]`, `10^4` particles, `gamma = 0.9999`,
    /// `alpha = 0.5`, `nu = 1`, `C_theta = C_phi = 10^3`, `c_s = 0.5`,
    /// 600 terminal adjoint particles.
    fn default() -> Self {
        Self {
            n_t: 100,
            dt: 0.025,
            n_x: 50,
            n_v: 50,
            v_max: 5.0,
            p_max: 10.0,
            n_f: 10_000,
            gamma: 0.9999,
            alpha: 0.5,
            nu: 1.0,
            c_theta: 1e3,
            c_phi: 1e3,
            c_s: 0.5,
            n_q_terminal: 600,
            tau: None,
            beta: None,
            sigma_theta: DiagCov::IDENTITY,
            sigma_phi: DiagCov::IDENTITY,
            z_t: None,
            orbit_radius: 2.5,
            orbit_period: None,
            seed: 0,
            use_time_averaged_theta: true,
            adjoint_streaming: Streaming::AdjointReversed,
            integrator: Integrator::VelocityVerlet,
            max_substep: None,
            max_adjoint_particles: None,
            adjoint_count_weight: None,
            adjoint_closure: true,
            parallel: true,
            initial_density: InitialKind::Uniform,
            init_mean: (8.0, 3.5),
            init_cov: DiagCov { xx: 0.15, vv: 0.15 },
        }
    }
}

impl SimConfig {
    /// Laptop-sized variant of the reference set: `10^3` particles, 200
    /// terminal adjoint particles, 25x25 mesh.
    pub fn desk() -> Self {
        Self {
            n_f: 1_000,
            n_q_terminal: 200,
            n_x: 25,
            n_v: 25,
            ..Self::default()
        }
    }

    /// Horizon `T = n_t dt`.
    pub fn horizon(&self) -> f64 {
        self.n_t as f64 * self.dt
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(self.dt / 10.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| KsParams::default_beta(self.gamma))
    }

    /// Adjoint value carried by one particle; `None` means `dt`.
    pub fn adjoint_weight(&self) -> f64 {
        self.adjoint_count_weight.unwrap_or(self.dt)
    }

    pub fn orbit(&self) -> TargetOrbit {
        TargetOrbit {
            omega: std::f64::consts::TAU / self.orbit_period.unwrap_or_else(|| self.horizon()),
            x0: self.p_max / 2.0,
            v0: 0.0,
            radius: self.orbit_radius,
        }
    }

    pub fn z_t(&self) -> (f64, f64) {
        self.z_t.unwrap_or_else(|| z_desired(self.horizon(), &self.orbit()))
    }

    pub fn domain(&self) -> Result<PhaseDomain> {
        PhaseDomain::new(self.p_max, self.v_max, self.alpha)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n_x, self.n_v, &self.domain()?)
    }

    pub fn ks_params(&self) -> Result<KsParams> {
        KsParams::new(self.gamma, self.beta(), self.tau())
    }

    pub fn objective(&self) -> ObjectiveParams {
        ObjectiveParams {
            c_theta: self.c_theta,
            c_phi: self.c_phi,
            sigma_theta: self.sigma_theta,
            sigma_phi: self.sigma_phi,
            nu: self.nu,
            z_t: self.z_t(),
            horizon: self.horizon(),
            use_time_averaged_theta: self.use_time_averaged_theta,
        }
    }

    pub fn force_spec(&self) -> ForceSpec {
        ForceSpec {
            omega: self.orbit().omega,
            center: self.p_max / 2.0,
        }
    }

    pub fn denoise(&self) -> Result<DenoiseParams> {
        DenoiseParams::new(self.c_s)
    }

    pub fn initial_density_spec(&self) -> InitialDensitySpec {
        match self.initial_density {
            InitialKind::Uniform => InitialDensitySpec::Uniform,
            InitialKind::Gaussian => InitialDensitySpec::Gaussian {
                mean: self.init_mean,
                cov: self.init_cov,
            },
        }
    }

    /// Checks every parameter range and cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::invalid("n_t", "need at least one step"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.n_f == 0 {
            return Err(Error::invalid("n_f", "need at least one particle"));
        }
        if self.n_q_terminal == 0 {
            return Err(Error::invalid("n_q_terminal", "need at least one particle"));
        }
        if !(self.orbit_radius >= 0.0) {
            return Err(Error::invalid("orbit_radius", "must be non-negative"));
        }
        if let Some(p) = self.orbit_period {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid("orbit_period", "must be positive"));
            }
        }
        if !(self.adjoint_weight() > 0.0 && self.adjoint_weight().is_finite()) {
            return Err(Error::invalid("adjoint_count_weight", "must be positive"));
        }
        if let Some(h) = self.max_substep {
            if !(h > 0.0) {
                return Err(Error::invalid("max_substep", "must be positive"));
            }
        }
        self.grid()?;
        self.ks_params()?;
        self.denoise()?;
        self.objective().validate()?;
        self.initial_density_spec().validate()?;
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses a configuration text, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut lines_of: HashMap<String, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if lines_of.insert(key.to_string(), line_no).is_some() {
                return Err(Error::ConfigSyntax {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value).map_err(|e| match e {
                SetError::Unknown => Error::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                },
                SetError::Value(message) => Error::ConfigSyntax {
                    line: line_no,
                    message: format!("`{key}`: {message}"),
                },
            })?;
        }
        // derived widths may be given, but only as a consistency check
        for (key, expected) in [
            ("dx", cfg.p_max / cfg.n_x as f64),
            ("dv", 2.0 * cfg.v_max / cfg.n_v as f64),
        ] {
            if let Some(&line) = lines_of.get(key) {
                let given: f64 = field_value(text, line);
                if (given - expected).abs() > 1e-9 * expected.abs() {
                    return Err(Error::ConfigSyntax {
                        line,
                        message: format!("`{key}` = {given} disagrees with the mesh ({expected})"),
                    });
                }
            }
        }
        cfg.validate().map_err(|e| match &e {
            Error::InvalidParameter { name, .. } => match lines_of.get(*name) {
                Some(&line) => Error::ConfigSyntax {
                    line,
                    message: e.to_string(),
                },
                None => e,
            },
            _ => e,
        })?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        match key {
            "n_t" => self.n_t = parse_num(value)?,
            "dt" => self.dt = parse_num(value)?,
            "n_x" => self.n_x = parse_num(value)?,
            "n_v" => self.n_v = parse_num(value)?,
            "v_max" => self.v_max = parse_num(value)?,
            "p_max" => self.p_max = parse_num(value)?,
            "dx" | "dv" => {
                parse_num::<f64>(value)?;
            }
            "n_f" => self.n_f = parse_num(value)?,
            "gamma" => self.gamma = parse_num(value)?,
            "alpha" => self.alpha = parse_num(value)?,
            "nu" => self.nu = parse_num(value)?,
            "c_theta" => self.c_theta = parse_num(value)?,
            "c_phi" => self.c_phi = parse_num(value)?,
            "c_s" => self.c_s = parse_num(value)?,
            "n_q_terminal" => self.n_q_terminal = parse_num(value)?,
            "tau" => self.tau = parse_optional(value)?,
            "beta" => self.beta = parse_optional(value)?,
            "sigma_theta_x" => self.sigma_theta.xx = parse_num(value)?,
            "sigma_theta_v" => self.sigma_theta.vv = parse_num(value)?,
            "sigma_phi_x" => self.sigma_phi.xx = parse_num(value)?,
            "sigma_phi_v" => self.sigma_phi.vv = parse_num(value)?,
            "z_t_x" => self.z_t = Some((parse_num(value)?, self.z_t.map_or(0.0, |z| z.1))),
            "z_t_v" => {
                let x = self
                    .z_t
                    .map_or_else(|| z_desired(self.horizon(), &self.orbit()).0, |z| z.0);
                self.z_t = Some((x, parse_num(value)?));
            }
            "orbit_radius" => self.orbit_radius = parse_num(value)?,
            "orbit_period" => self.orbit_period = parse_optional(value)?,
            "seed" => self.seed = parse_num(value)?,
            "use_time_averaged_theta" => self.use_time_averaged_theta = parse_bool(value)?,
            "adjoint_characteristics" => {
                self.adjoint_streaming = match value {
                    "negated-force" => Streaming::AdjointNegatedForce,
                    "reversed" => Streaming::AdjointReversed,
                    _ => return Err(SetError::Value("expected `negated-force` or `reversed`".into())),
                }
            }
            "integrator" => {
                self.integrator = match value {
                    "velocity-verlet" => Integrator::VelocityVerlet,
                    "previous-step" => Integrator::PreviousStep,
                    _ => return Err(SetError::Value("expected `velocity-verlet` or `previous-step`".into())),
                }
            }
            "max_substep" => self.max_substep = parse_optional(value)?,
            "max_adjoint_particles" => self.max_adjoint_particles = parse_optional(value)?,
            "adjoint_count_weight" => {
                self.adjoint_count_weight = match value {
                    "dt" => None,
                    "raw" => Some(1.0),
                    _ => Some(parse_num(value)?),
                }
            }
            "adjoint_closure" => self.adjoint_closure = parse_bool(value)?,
            "parallel" => self.parallel = parse_bool(value)?,
            "initial_density" => {
                self.initial_density = match value {
                    "uniform" => InitialKind::Uniform,
                    "gaussian" => InitialKind::Gaussian,
                    _ => return Err(SetError::Value("expected `uniform` or `gaussian`".into())),
                }
            }
            "init_mean_x" => self.init_mean.0 = parse_num(value)?,
            "init_mean_v" => self.init_mean.1 = parse_num(value)?,
            "init_var_x" => self.init_cov.xx = parse_num(value)?,
            "init_var_v" => self.init_cov.vv = parse_num(value)?,
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }

    /// Serializes every effective value (defaults resolved), such that
    /// parsing the output reproduces this configuration's behaviour exactly.
    pub fn to_config_string(&self) -> String {
        fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "none".to_string(), |v| v.to_string())
        }
        let z_t = self.z_t();
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_t", self.n_t.to_string());
        kv("dt", self.dt.to_string());
        kv("n_x", self.n_x.to_string());
        kv("n_v", self.n_v.to_string());
        kv("v_max", self.v_max.to_string());
        kv("p_max", self.p_max.to_string());
        kv("n_f", self.n_f.to_string());
        kv("gamma", self.gamma.to_string());
        kv("alpha", self.alpha.to_string());
        kv("nu", self.nu.to_string());
        kv("c_theta", self.c_theta.to_string());
        kv("c_phi", self.c_phi.to_string());
        kv("c_s", self.c_s.to_string());
        kv("n_q_terminal", self.n_q_terminal.to_string());
        kv("tau", self.tau().to_string());
        kv("beta", self.beta().to_string());
        kv("sigma_theta_x", self.sigma_theta.xx.to_string());
        kv("sigma_theta_v", self.sigma_theta.vv.to_string());
        kv("sigma_phi_x", self.sigma_phi.xx.to_string());
        kv("sigma_phi_v", self.sigma_phi.vv.to_string());
        kv("z_t_x", z_t.0.to_string());
        kv("z_t_v", z_t.1.to_string());
        kv("orbit_radius", self.orbit_radius.to_string());
        kv("orbit_period", opt(self.orbit_period));
        kv("seed", self.seed.to_string());
        kv("use_time_averaged_theta", self.use_time_averaged_theta.to_string());
        kv(
            "adjoint_characteristics",
            match self.adjoint_streaming {
                Streaming::AdjointNegatedForce | Streaming::Forward => "negated-force",
                Streaming::AdjointReversed => "reversed",
            }
            .to_string(),
        );
        kv(
            "integrator",
            match self.integrator {
                Integrator::VelocityVerlet => "velocity-verlet",
                Integrator::PreviousStep => "previous-step",
            }
            .to_string(),
        );
        kv("max_substep", opt(self.max_substep));
        kv("max_adjoint_particles", opt(self.max_adjoint_particles));
        kv("adjoint_count_weight", self.adjoint_weight().to_string());
        kv("adjoint_closure", self.adjoint_closure.to_string());
        kv("parallel", self.parallel.to_string());
        kv(
            "initial_density",
            match self.initial_density {
                InitialKind::Uniform => "uniform",
                InitialKind::Gaussian => "gaussian",
            }
            .to_string(),
        );
        kv("init_mean_x", self.init_mean.0.to_string());
        kv("init_mean_v", self.init_mean.1.to_string());
        kv("init_var_x", self.init_cov.xx.to_string());
        kv("init_var_v", self.init_cov.vv.to_string());
        s
    }
}

enum SetError {
    Unknown,
    Value(String),
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, SetError> {
    value
        .parse()
        .map_err(|_| SetError::Value(format!("cannot parse `{value}`")))
}

fn parse_optional<T: std::str::FromStr>(value: &str) -> Result<Option<T>, SetError> {
    if value == "none" {
        Ok(None)
    } else {
        parse_num(value).map(Some)
    }
}

fn parse_bool(value: &str) -> Result<bool, SetError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(SetError::Value(format!("expected a boolean, got `{value}`"))),
    }
}

fn field_value(text: &str, line: usize) -> f64 {
    text.lines()
        .nth(line - 1)
        .and_then(|l| l.split('#').next())
        .and_then(|l| l.split_once('='))
        .and_then(|(_, v)| v.trim().parse().ok())
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1: &str = "\
# reference parameters
n_t = 100
dt = 0.025
n_x = 50
n_v = 50
v_max = 5
p_max = 10.0
dv = 0.2
dx = 0.2
n_f = 10000
gamma = 0.9999
alpha = 0.5
nu = 1
c_theta = 1e3
c_phi = 1e3
c_s = 0.5
n_q_terminal = 600
";

    #[test]
    fn parses_reference_table() {
        let cfg = SimConfig::parse(TABLE1).unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.horizon(), 2.5);
        assert_eq!(cfg.grid().unwrap().dv(), 0.2);
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SimConfig::parse("").unwrap(), SimConfig::default());
        assert_eq!(SimConfig::parse("  # nothing\n\n").unwrap(), SimConfig::default());
    }

    #[test]
    fn default_derived_values() {
        let cfg = SimConfig::default();
        assert!((cfg.tau() - 0.0025).abs() < 1e-15);
        assert!((cfg.beta() - 1.0 / (2.0 * (1.0 - 0.9999f64.powi(2)))).abs() < 1e-9);
        let (x, v) = cfg.z_t();
        assert!((x - 7.5).abs() < 1e-12 && v.abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_alpha_with_line() {
        let err = SimConfig::parse("n_t = 10\nalpha = 1.5\n").unwrap_err();
        match err {
            Error::ConfigSyntax { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("alpha"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(
            SimConfig::parse("bogus = 1"),
            Err(Error::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            SimConfig::parse("n_t 100"),
            Err(Error::ConfigSyntax { line: 1, .. })
        ));
        assert!(matches!(
            SimConfig::parse("n_t = ten"),
            Err(Error::ConfigSyntax { line: 1, .. })
        ));
        assert!(matches!(
            SimConfig::parse("dv = 0.3"),
            Err(Error::ConfigSyntax { line: 1, .. })
        ));
        assert!(matches!(
            SimConfig::parse("n_t = 1\nn_t = 2"),
            Err(Error::ConfigSyntax { line: 2, .. })
        ));
        assert!(SimConfig::parse("gamma = 1").is_err());
        assert!(SimConfig::parse("n_x = 1").is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let mut cfg = SimConfig::desk();
        cfg.seed = 42;
        cfg.max_substep = Some(1e-3);
        cfg.initial_density = InitialKind::Gaussian;
        cfg.adjoint_streaming = Streaming::AdjointNegatedForce;
        let text = cfg.to_config_string();
        let back = SimConfig::parse(&text).unwrap();
        assert_eq!(back.to_config_string(), text);
        assert_eq!(back.tau(), cfg.tau());
        assert_eq!(back.beta(), cfg.beta());
        assert_eq!(back.z_t(), cfg.z_t());
        assert_eq!(back.max_substep, cfg.max_substep);
    }
}
