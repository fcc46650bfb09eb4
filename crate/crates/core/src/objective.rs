//! Tracking and terminal costs, the desired orbit, and Monte Carlo
//! evaluation of the ensemble cost functional.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::control::ControlField;
use crate::domain::{GridSpec, ParticleEnsemble, PhaseDomain};
use crate::error::{Error, Result};

/// Diagonal 2x2 covariance over (position, velocity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagCov {
    pub xx: f64,
    pub vv: f64,
}

impl DiagCov {
    pub const IDENTITY: DiagCov = DiagCov { xx: 1.0, vv: 1.0 };

    pub fn det(&self) -> f64 {
        self.xx * self.vv
    }
}

/// The closed harmonic-oscillator orbit particles should be driven onto:
/// `x = radius cos(wt) + x0`, `v = -radius w sin(wt) - v0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetOrbit {
    pub omega: f64,
    pub x0: f64,
    pub v0: f64,
    pub radius: f64,
}

impl TargetOrbit {
    /// Orbit of period `period` around the middle of the position box.
    pub fn centered(domain: &PhaseDomain, period: f64, radius: f64) -> Self {
        Self {
            omega: TAU / period,
            x0: domain.p_max() / 2.0,
            v0: 0.0,
            radius,
        }
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// Whether the whole orbit lies in the phase-space window. Not the case
    /// for the reference parameters, whose velocity amplitude `2.5 w`
    /// exceeds `v_max`.
    pub fn fits_in(&self, domain: &PhaseDomain) -> bool {
        let amp_v = self.radius * self.omega;
        self.x0 - self.radius >= 0.0
            && self.x0 + self.radius <= domain.p_max()
            && self.v0.abs() + amp_v <= domain.v_max()
    }
}

pub fn z_desired(t: f64, orbit: &TargetOrbit) -> (f64, f64) {
    let (s, c) = (orbit.omega * t).sin_cos();
    (orbit.radius * c + orbit.x0, -orbit.radius * orbit.omega * s - orbit.v0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParams {
    pub c_theta: f64,
    pub c_phi: f64,
    pub sigma_theta: DiagCov,
    pub sigma_phi: DiagCov,
    pub nu: f64,
    pub z_t: (f64, f64),
    /// Time horizon `T`.
    pub horizon: f64,
    /// Track the time-averaged valley instead of the moving target point.
    pub use_time_averaged_theta: bool,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        Self {
            c_theta: 1e3,
            c_phi: 1e3,
            sigma_theta: DiagCov::IDENTITY,
            sigma_phi: DiagCov::IDENTITY,
            nu: 1.0,
            z_t: (7.5, 0.0),
            horizon: 2.5,
            use_time_averaged_theta: true,
        }
    }
}

impl ObjectiveParams {
    pub fn validate(&self) -> Result<()> {
        // c_theta = 0 is allowed: it switches the tracking source off.
        if !(self.c_theta >= 0.0) {
            return Err(Error::invalid("c_theta", "must be non-negative"));
        }
        if !(self.c_phi >= 0.0) {
            return Err(Error::invalid("c_phi", "must be non-negative"));
        }
        for (name, cov) in [("sigma_theta", self.sigma_theta), ("sigma_phi", self.sigma_phi)] {
            if !(cov.xx > 0.0 && cov.vv > 0.0) {
                return Err(Error::invalid(name, "covariance entries must be positive"));
            }
        }
        if !(self.nu > 0.0) {
            return Err(Error::invalid("nu", "must be positive"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("horizon", "must be positive"));
        }
        Ok(())
    }
}

/// Negative Gaussian well of weight `c` with diagonal covariance.
fn gaussian_well(c: f64, cov: DiagCov, dx: f64, dv: f64) -> f64 {
    let norm = (2.0 * PI) * cov.det().sqrt();
    let quad = dx * dx / cov.xx + dv * dv / cov.vv;
    -c / norm * (-0.5 * quad).exp()
}

/// Running tracking cost around the moving target point `z_D(t)`.
pub fn theta(z: (f64, f64), t: f64, params: &ObjectiveParams, orbit: &TargetOrbit) -> f64 {
    let (xd, vd) = z_desired(t, orbit);
    gaussian_well(params.c_theta, params.sigma_theta, z.0 - xd, z.1 - vd)
}

/// Left Riemann average of `theta` over the `n_t` macro-step times in
/// `[0, T)`: a valley whose bottom line follows the whole orbit.
pub fn theta_bar(z: (f64, f64), params: &ObjectiveParams, orbit: &TargetOrbit, n_t: usize) -> f64 {
    assert!(n_t >= 1, "need at least one time sample");
    let dt = params.horizon / n_t as f64;
    (0..n_t).map(|k| theta(z, k as f64 * dt, params, orbit)).sum::<f64>() / n_t as f64
}

/// Terminal cost, a Gaussian well at `z_T`.
pub fn phi(z: (f64, f64), params: &ObjectiveParams) -> f64 {
    gaussian_well(params.c_phi, params.sigma_phi, z.0 - params.z_t.0, z.1 - params.z_t.1)
}

/// `theta` or `theta_bar` depending on the configuration.
pub fn running_cost(z: (f64, f64), t: f64, params: &ObjectiveParams, orbit: &TargetOrbit, n_t: usize) -> f64 {
    if params.use_time_averaged_theta {
        theta_bar(z, params, orbit, n_t)
    } else {
        theta(z, t, params, orbit)
    }
}

/// Monte Carlo estimate of the ensemble cost
///
/// `J = sum_k dt/N * sum_p [theta(z_p^k, t^k) + nu/2 |u(z_p^k, t^k)|^2]
///    + 1/N * sum_p phi(z_p^{N_t})`
///
/// with `N = n_initial` and `k` running over `0..N_t`. `history[k]` holds the
/// surviving particles at `t^k`, so absorbed particles stop contributing once
/// they leave. A missing control counts as zero.
pub fn cost_estimate(
    history: &[ParticleEnsemble],
    control: Option<&ControlField>,
    grid: &GridSpec,
    params: &ObjectiveParams,
    orbit: &TargetOrbit,
    n_initial: usize,
) -> f64 {
    assert!(history.len() >= 2, "cost needs at least one macro step of history");
    assert!(n_initial > 0, "cost needs a positive particle normalization");
    let n_t = history.len() - 1;
    if let Some(u) = control {
        assert_eq!(u.n_t(), n_t, "control spans {} steps, history {n_t}", u.n_t());
    }
    let dt = params.horizon / n_t as f64;
    let norm = n_initial as f64;

    let running: Vec<f64> = history[..n_t]
        .par_iter()
        .enumerate()
        .map(|(k, ensemble)| {
            let t = k as f64 * dt;
            let u_k = control.map(|u| u.step(k));
            ensemble
                .iter()
                .map(|p| {
                    let mut cost = running_cost((p.x, p.v), t, params, orbit, n_t);
                    if let Some(u_k) = u_k {
                        let u = u_k.lookup(grid, p.x, p.v);
                        cost += 0.5 * params.nu * u * u;
                    }
                    cost
                })
                .sum::<f64>()
        })
        .collect();
    let terminal: f64 = history[n_t].iter().map(|p| phi((p.x, p.v), params)).sum();
    running.iter().sum::<f64>() * dt / norm + terminal / norm
}

/// Per-particle distance to the nearest sampled orbit point
/// `{z_D(t^k) : k = 0..=n_t}`.
pub fn orbit_residuals(ensemble: &ParticleEnsemble, orbit: &TargetOrbit, n_t: usize) -> Vec<f64> {
    let dt = orbit.period() / n_t as f64;
    let samples: Vec<(f64, f64)> = (0..=n_t).map(|k| z_desired(k as f64 * dt, orbit)).collect();
    ensemble
        .iter()
        .map(|p| {
            samples
                .iter()
                .map(|&(x, v)| (p.x - x).hypot(p.v - v))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
