//! Keilson-Storer collisions.
//!
//! The forward kernel `A(v, w) = Gamma sqrt(beta/pi) exp(-beta |w - gamma v|^2)`
//! sends a particle with velocity `v` to `w ~ N(gamma v, 1/(2 beta))` at rate
//! `Gamma = 1/tau`. Its adjoint `A*(w, v) = A(v, w) / gamma` sends `v` to
//! `w ~ N(v/gamma, 1/(2 beta gamma^2))`; adjoint particles fly for
//! `tau_q = gamma tau` between collisions, and the adjoint equation gains
//! the linear reaction term `C*_0 q` with `C*_0 = Gamma (1 - gamma)/gamma`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampling::sample_normal;

/// Attempts before a forward post-collision draw falls back to the tail
/// approximation of the window-truncated normal.
const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsParams {
    gamma: f64,
    beta: f64,
    tau: f64,
}

impl KsParams {
    pub fn new(gamma: f64, beta: f64, tau: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
        }
        if !(beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
        }
        Ok(Self { gamma, beta, tau })
    }

    /// `beta = 1 / (2 (1 - gamma^2))`, i.e. unit `M / (k_B T_p)`.
    pub fn default_beta(gamma: f64) -> f64 {
        1.0 / (2.0 * (1.0 - gamma * gamma))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Collision frequency `Gamma = 1/tau` (equal to `sigma`).
    pub fn rate(&self) -> f64 {
        1.0 / self.tau
    }

    /// Mean free-flight time of adjoint particles.
    pub fn tau_q(&self) -> f64 {
        self.gamma * self.tau
    }

    pub fn forward_variance(&self) -> f64 {
        1.0 / (2.0 * self.beta)
    }

    pub fn adjoint_variance(&self) -> f64 {
        1.0 / (2.0 * self.beta * self.gamma * self.gamma)
    }
}

/// Forward kernel density `A(v, w)`.
pub fn ks_kernel(v: f64, w: f64, params: &KsParams) -> f64 {
    let d = w - params.gamma * v;
    params.rate() * (params.beta / PI).sqrt() * (-params.beta * d * d).exp()
}

/// Adjoint kernel density `A*(v, w)`, written as its own Gaussian: total
/// rate `Gamma/gamma^2` times the density of `N(v/gamma, 1/(2 beta gamma^2))`.
pub fn adjoint_kernel(v: f64, w: f64, params: &KsParams) -> f64 {
    let g = params.gamma;
    let var = params.adjoint_variance();
    let d = w - v / g;
    let density = (-(d * d) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    params.rate() / (g * g) * density
}

/// Reaction constant `C*_0 = int (A(w, v) - A(v, w)) dw`.
pub fn c_star_0(params: &KsParams) -> f64 {
    params.rate() * (1.0 - params.gamma) / params.gamma
}

/// Post-collision velocity of a physical particle. Draws that leave the
/// velocity window are redrawn from the same pre-collision velocity.
///
/// When the window holds almost no mass of the post-collision law (the
/// particle was pushed far outside it by the force field), rejection would
/// not terminate; after a bounded number of attempts the draw comes from the
/// exponential tail approximation of the truncated normal at the nearest
/// window edge instead.
pub fn forward_postcollision(v: f64, params: &KsParams, v_max: f64, rng: &mut RngStream) -> f64 {
    let mean = params.gamma * v;
    let var = params.forward_variance();
    for _ in 0..MAX_RESAMPLES {
        let w = sample_normal(mean, var, rng);
        if w.abs() <= v_max {
            return w;
        }
    }
    let edge = v_max.copysign(mean);
    let gap = (mean - edge).abs();
    let scale = if gap > 0.0 { var / gap } else { var.sqrt() };
    let inward = (-scale * rng.unit_positive().ln()).min(2.0 * v_max);
    edge - inward.copysign(mean)
}

/// Post-collision velocity of an adjoint particle, or `None` when the draw
/// leaves the velocity window and the particle must be removed.
pub fn adjoint_postcollision(v: f64, params: &KsParams, v_max: f64, rng: &mut RngStream) -> Option<f64> {
    let w = sample_normal(v / params.gamma, params.adjoint_variance(), rng);
    (w.abs() <= v_max).then_some(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;
    use approx::assert_relative_eq;

    fn table1() -> KsParams {
        let gamma = 0.9999;
        KsParams::new(gamma, KsParams::default_beta(gamma), 0.0025).unwrap()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn validation() {
        assert!(KsParams::new(1.0, 1.0, 1.0).is_err());
        assert!(KsParams::new(0.5, 0.0, 1.0).is_err());
        assert!(KsParams::new(0.5, 1.0, -1.0).is_err());
        let p = table1();
        assert_relative_eq!(p.rate(), 400.0, max_relative = 1e-12);
        assert_relative_eq!(p.tau_q(), 0.9999 * 0.0025, max_relative = 1e-12);
    }

    #[test]
    fn reaction_constant() {
        let p = table1();
        assert_relative_eq!(c_star_0(&p), 400.0 * 1e-4 / 0.9999, max_relative = 1e-9);
        assert!((c_star_0(&p) - 0.040004).abs() < 1e-6);
        let nearly_one = KsParams::new(1.0 - 1e-12, 1.0, 0.0025).unwrap();
        assert!(c_star_0(&nearly_one) < 400.0 * 1.1e-12);
    }

    #[test]
    fn degenerate_variance_gives_mean() {
        // beta so large that the variance underflows to zero
        let p = KsParams::new(0.9, f64::INFINITY, 0.01);
        assert!(p.is_ok());
        let p = p.unwrap();
        let mut rng = RngStream::new(0, Purpose::Scratch, 0, 0);
        assert_eq!(forward_postcollision(2.0, &p, 5.0, &mut rng), 0.9 * 2.0);
        assert_eq!(adjoint_postcollision(2.0, &p, 5.0, &mut rng), Some(2.0 / 0.9));
    }

    #[test]
    fn forward_moments() {
        let p = table1();
        let mut rng = RngStream::new(1, Purpose::Scratch, 0, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| forward_postcollision(2.0, &p, 5.0, &mut rng)).collect();
        let (m, v) = mean_var(&xs);
        let var = p.forward_variance();
        assert!((m - 0.9999 * 2.0).abs() < 3.0 * (var / n as f64).sqrt());
        assert!((v / var - 1.0).abs() < 0.05);
    }

    #[test]
    fn forward_draws_stay_in_window() {
        let p = KsParams::new(0.5, 0.05, 0.01).unwrap(); // variance 10
        let mut rng = RngStream::new(2, Purpose::Scratch, 0, 0);
        for _ in 0..10_000 {
            assert!(forward_postcollision(4.5, &p, 5.0, &mut rng).abs() <= 5.0);
        }
        // a particle far outside the window lands just inside the near edge
        let p = table1();
        for _ in 0..1000 {
            let w = forward_postcollision(6.2, &p, 5.0, &mut rng);
            assert!(w <= 5.0 && w > 4.99, "{w}");
            let w = forward_postcollision(-6.2, &p, 5.0, &mut rng);
            assert!((-5.0..-4.99).contains(&w), "{w}");
        }
    }

    #[test]
    fn adjoint_moments_and_removal() {
        let p = table1();
        let mut rng = RngStream::new(3, Purpose::Scratch, 0, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .filter_map(|_| adjoint_postcollision(1.0, &p, 5.0, &mut rng))
            .collect();
        assert_eq!(xs.len(), n);
        let (m, v) = mean_var(&xs);
        let var = p.adjoint_variance();
        assert!((m - 1.0 / 0.9999).abs() < 3.0 * (var / n as f64).sqrt());
        assert!((v / var - 1.0).abs() < 0.05);
    }

    #[test]
    fn adjoint_removal_matches_tail_mass() {
        // gamma = 0.8, variance 1/(2 beta gamma^2) = 1 with beta = 1/(2*0.64)
        let p = KsParams::new(0.8, 1.0 / 1.28, 0.01).unwrap();
        let mut rng = RngStream::new(4, Purpose::Scratch, 0, 0);
        let v = 4.0; // mean 5 sits on the window edge
        let n = 100_000;
        let removed = (0..n)
            .filter(|_| adjoint_postcollision(v, &p, 5.0, &mut rng).is_none())
            .count();
        // P(|w| > 5) for w ~ N(5, 1): 1/2 + P(w < -5), the latter negligible
        let expected = 0.5;
        let frac = removed as f64 / n as f64;
        assert!((frac - expected).abs() < 3.0 * (expected * (1.0 - expected) / n as f64).sqrt());
    }

    #[test]
    fn symmetric_kernel() {
        let p = table1();
        let mut a = RngStream::new(5, Purpose::Scratch, 0, 0);
        let mut b = RngStream::new(6, Purpose::Scratch, 0, 0);
        let n = 20_000;
        let plus: Vec<f64> = (0..n)
            .map(|_| forward_postcollision(1.5, &p, 5.0, &mut a) - 0.9999 * 1.5)
            .collect();
        let minus: Vec<f64> = (0..n)
            .map(|_| forward_postcollision(-1.5, &p, 5.0, &mut b) + 0.9999 * 1.5)
            .collect();
        let (m1, v1) = mean_var(&plus);
        let (m2, v2) = mean_var(&minus);
        let sd = p.forward_variance().sqrt();
        assert!((m1 - m2).abs() < 5.0 * sd * (2.0 / n as f64).sqrt());
        assert!((v1 / v2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn kernel_duality_pointwise() {
        let p = table1();
        for a in 0..20 {
            for b in 0..20 {
                let v = -2.0 + 0.2 * a as f64;
                let w = v + (b as f64 - 10.0) * 0.003;
                let lhs = p.gamma() * adjoint_kernel(w, v, &p);
                let rhs = ks_kernel(v, w, &p);
                assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300), "{v} {w}: {lhs} vs {rhs}");
            }
        }
    }
}
