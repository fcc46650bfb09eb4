//! Distribution samplers and ensemble initialization.

use crate::domain::{EnsembleKind, Particle, ParticleEnsemble, PhaseDomain};
use crate::error::{Error, Result};
use crate::objective::{DiagCov, ObjectiveParams};
use crate::rng::{Purpose, RngStream};

const MAX_REJECTIONS: usize = 1_000_000;

/// Maps a unit draw `r ∈ [0, 1)` onto `[a, b)`.
pub fn uniform_from_unit(a: f64, b: f64, r: f64) -> f64 {
    let value = a + (b - a) * r;
    // rounding can land exactly on `b` for r close to 1
    if value >= b {
        b.next_down()
    } else {
        value
    }
}

/// Uniform draw on `[a, b)`.
///
/// # Panics
/// If `a >= b`.
pub fn sample_uniform(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    assert!(a < b, "empty interval [{a}, {b})");
    uniform_from_unit(a, b, rng.unit())
}

/// Normal draw with the given mean and variance (Box-Muller).
///
/// # Panics
/// If `variance < 0`.
pub fn sample_normal(mean: f64, variance: f64, rng: &mut RngStream) -> f64 {
    assert!(variance >= 0.0, "negative variance {variance}");
    mean + variance.sqrt() * rng.standard_normal()
}

/// `-tau * ln(r)` for `r ∈ (0, 1]`.
pub fn free_flight_from_unit(tau: f64, r: f64) -> f64 {
    -tau * r.ln()
}

/// Exponentially distributed time to the next collision, mean `tau`.
///
/// # Panics
/// If `tau <= 0`.
pub fn free_flight_time(tau: f64, rng: &mut RngStream) -> f64 {
    assert!(tau > 0.0, "mean free-flight time must be positive, got {tau}");
    free_flight_from_unit(tau, rng.unit_positive())
}

/// Law of the initial particle density `f_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDensitySpec {
    /// Uniform on `[0, p_max] x [-v_max, v_max]`.
    Uniform,
    /// Normal with the given mean and diagonal covariance, restricted to the
    /// phase-space window by rejection.
    Gaussian { mean: (f64, f64), cov: DiagCov },
}

impl InitialDensitySpec {
    pub fn validate(&self) -> Result<()> {
        if let InitialDensitySpec::Gaussian { cov, .. } = self {
            if !(cov.xx > 0.0 && cov.vv > 0.0) {
                return Err(Error::invalid("init_cov", "covariance entries must be positive"));
            }
        }
        Ok(())
    }
}

fn sample_gaussian_in_window(mean: (f64, f64), cov: DiagCov, domain: &PhaseDomain, rng: &mut RngStream) -> (f64, f64) {
    for _ in 0..MAX_REJECTIONS {
        let x = sample_normal(mean.0, cov.xx, rng);
        let v = sample_normal(mean.1, cov.vv, rng);
        if domain.contains(x, v) {
            return (x, v);
        }
    }
    panic!("gaussian centred at {mean:?} has no mass inside the phase-space window");
}

/// Draws `n_f` i.i.d. particles from `f_0`, each with a zeroed clock.
/// Particle `p` uses its own substream, so the result does not depend on
/// evaluation order.
pub fn init_forward_ensemble(
    spec: &InitialDensitySpec,
    n_f: usize,
    domain: &PhaseDomain,
    seed: u64,
) -> ParticleEnsemble {
    assert!(n_f >= 1, "need at least one forward particle");
    let particles = (0..n_f as u64)
        .map(|id| {
            let mut rng = RngStream::new(seed, Purpose::InitForward, 0, id);
            let (x, v) = match *spec {
                InitialDensitySpec::Uniform => (
                    sample_uniform(0.0, domain.p_max(), &mut rng),
                    sample_uniform(-domain.v_max(), domain.v_max(), &mut rng),
                ),
                InitialDensitySpec::Gaussian { mean, cov } => sample_gaussian_in_window(mean, cov, domain, &mut rng),
            };
            Particle::new(id, x, v)
        })
        .collect();
    ParticleEnsemble::new(EnsembleKind::Forward, particles)
}

/// Terminal adjoint cloud: `-phi` is a positive multiple of a Gaussian
/// centred at `z_T`, so it is sampled as that Gaussian with a fixed particle
/// count.
pub fn init_adjoint_ensemble(
    params: &ObjectiveParams,
    n_terminal: usize,
    domain: &PhaseDomain,
    seed: u64,
) -> ParticleEnsemble {
    assert!(n_terminal >= 1, "need at least one terminal adjoint particle");
    let particles = (0..n_terminal as u64)
        .map(|id| {
            let mut rng = RngStream::new(seed, Purpose::InitAdjoint, 0, id);
            let (x, v) = sample_gaussian_in_window(params.z_t, params.sigma_phi, domain, &mut rng);
            Particle::new(id, x, v)
        })
        .collect();
    ParticleEnsemble::new(EnsembleKind::Adjoint, particles)
}
