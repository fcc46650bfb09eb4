//! Force field, Verlet sub-stepping, and partial specular reflection at the
//! walls of the position box.

use crate::domain::{GridField, GridSpec, PhaseDomain};
use crate::rng::RngStream;

/// Hooke force `-w^2 (x - center)` of the target oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSpec {
    pub omega: f64,
    pub center: f64,
}

pub fn base_force(x: f64, spec: &ForceSpec) -> f64 {
    -spec.omega * spec.omega * (x - spec.center)
}

/// `F_0(x) + u(x, v)` with `u` looked up in the cell containing `(x, v)`;
/// zero control outside the grid window.
pub fn total_force(x: f64, v: f64, control: Option<&GridField>, grid: &GridSpec, spec: &ForceSpec) -> f64 {
    base_force(x, spec) + control.map_or(0.0, |u| u.lookup(grid, x, v))
}

/// Discretization of the streaming step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Kick-drift-kick velocity Verlet; second order.
    #[default]
    VelocityVerlet,
    /// The variable-step update
    /// `x' = x + v h1 + a (h1 + h2)/2 h1`, `v' = v + a h1`, with `a` taken at
    /// the start of the sub-step and `h2` the previous sub-step length.
    /// First order in the velocity.
    PreviousStep,
}

/// Direction of the characteristics a particle follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Streaming {
    /// `dx/dt = v`, `dv/dt = a`.
    Forward,
    /// Adjoint particles as in the reference pseudocode: position still
    /// advances with `+v`, the force enters with a minus sign.
    AdjointNegatedForce,
    /// Adjoint particles running the forward characteristics backwards:
    /// `dx/ds = -v`, `dv/ds = -a`.
    AdjointReversed,
}

impl Streaming {
    /// Signs `(position, force)` of the phase-space velocity field.
    fn signs(self) -> (f64, f64) {
        match self {
            Streaming::Forward => (1.0, 1.0),
            Streaming::AdjointNegatedForce => (1.0, -1.0),
            Streaming::AdjointReversed => (-1.0, -1.0),
        }
    }
}

/// Advances `(x, v)` by one sub-step of length `dt1`. `dt2` is the length of
/// the previous sub-step (only used by [`Integrator::PreviousStep`]).
/// The returned position is tentative; walls are handled by
/// [`apply_boundary`].
pub fn verlet_substep(
    (x, v): (f64, f64),
    dt1: f64,
    dt2: f64,
    accel: impl Fn(f64, f64) -> f64,
    streaming: Streaming,
    integrator: Integrator,
) -> (f64, f64) {
    debug_assert!(dt1 >= 0.0 && dt2 >= 0.0);
    if dt1 == 0.0 {
        return (x, v);
    }
    let (sx, sa) = streaming.signs();
    match integrator {
        Integrator::VelocityVerlet => {
            let v_half = v + 0.5 * sa * accel(x, v) * dt1;
            let x_new = x + sx * v_half * dt1;
            let v_new = v_half + 0.5 * sa * accel(x_new, v_half) * dt1;
            (x_new, v_new)
        }
        Integrator::PreviousStep => {
            let a = accel(x, v);
            let x_new = x + sx * v * dt1 + sx * sa * a * 0.5 * (dt1 + dt2) * dt1;
            let v_new = v + sa * a * dt1;
            (x_new, v_new)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryOutcome {
    Reflected { x: f64, v: f64 },
    Absorbed,
}

/// Repeated mirror folding into `[0, p_max]`; every fold flips the velocity.
pub fn fold_into_domain(mut x: f64, mut v: f64, p_max: f64) -> (f64, f64) {
    let period = 2.0 * p_max;
    if x.abs() > 2.0 * period {
        // whole periods of the unfolded motion change nothing
        x -= period * (x / period).floor();
    }
    loop {
        if x < 0.0 {
            x = -x;
            v = -v;
        } else if x > p_max {
            x = period - x;
            v = -v;
        } else {
            return (x, v);
        }
    }
}

/// Partial specular reflection. A tentative position inside the box passes
/// unchanged. Otherwise a single uniform draw `xi ∈ (0, 1]` decides: the
/// particle is absorbed when `xi > alpha`, else folded back into the box.
pub fn apply_boundary(x_tilde: f64, v: f64, domain: &PhaseDomain, rng: &mut RngStream) -> BoundaryOutcome {
    if domain.contains_position(x_tilde) {
        return BoundaryOutcome::Reflected { x: x_tilde, v };
    }
    if !x_tilde.is_finite() {
        return BoundaryOutcome::Absorbed;
    }
    let xi = rng.unit_positive();
    if xi > domain.alpha() {
        return BoundaryOutcome::Absorbed;
    }
    let (x, v) = fold_into_domain(x_tilde, v, domain.p_max());
    BoundaryOutcome::Reflected { x, v }
}
