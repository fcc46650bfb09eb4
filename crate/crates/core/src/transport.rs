//! One macro step of collisional free flight for a single particle.
//!
//! Within a step a particle alternates exponential free flights with
//! collisions until its local clock passes `dt`. The overshoot is carried
//! into the next step.

use crate::collisions::{adjoint_postcollision, forward_postcollision, KsParams};
use crate::domain::{GridField, GridSpec, Particle, PhaseDomain};
use crate::dynamics::{apply_boundary, total_force, verlet_substep, BoundaryOutcome, ForceSpec, Integrator, Streaming};
use crate::rng::{Purpose, RngStream};
use crate::sampling::free_flight_time;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    Alive(Particle),
    /// Lost through a wall.
    Absorbed,
    /// Adjoint collision outside the velocity window.
    Removed,
}

/// Everything needed to move particles through one macro step.
#[derive(Debug, Clone, Copy)]
pub struct Mover<'a> {
    pub domain: &'a PhaseDomain,
    pub grid: &'a GridSpec,
    pub force: &'a ForceSpec,
    pub control: Option<&'a GridField>,
    pub ks: &'a KsParams,
    pub dt: f64,
    /// Mean free-flight time (`tau` forward, `gamma tau` adjoint).
    pub tau: f64,
    pub max_substep: Option<f64>,
    pub integrator: Integrator,
    pub streaming: Streaming,
    pub seed: u64,
    pub purpose: Purpose,
    pub step: u64,
}

impl Mover<'_> {
    /// Moves `p` through one macro step; also returns the number of
    /// collisions it underwent.
    pub fn advance(&self, mut p: Particle) -> (Fate, u32) {
        let mut rng = RngStream::new(self.seed, self.purpose, self.step, p.id);
        let accel = |x: f64, v: f64| total_force(x, v, self.control, self.grid, self.force);
        let v_max = self.domain.v_max();
        let mut collisions = 0;
        while p.t_elapsed < self.dt {
            let flight = free_flight_time(self.tau, &mut rng);
            if p.collision_due {
                collisions += 1;
                p.v = match self.streaming {
                    Streaming::Forward => forward_postcollision(p.v, self.ks, v_max, &mut rng),
                    _ => match adjoint_postcollision(p.v, self.ks, v_max, &mut rng) {
                        Some(w) => w,
                        None => return (Fate::Removed, collisions),
                    },
                };
            }
            let mut h = flight;
            p.collision_due = true;
            if let Some(cap) = self.max_substep {
                if flight > cap {
                    // memoryless: the rest of the flight is redrawn next time
                    h = cap.min(self.dt - p.t_elapsed);
                    p.collision_due = false;
                }
            }
            let (x_tilde, v) = verlet_substep((p.x, p.v), h, p.prev_dt, accel, self.streaming, self.integrator);
            match apply_boundary(x_tilde, v, self.domain, &mut rng) {
                BoundaryOutcome::Reflected { x, v } => {
                    p.x = x;
                    p.v = v;
                }
                BoundaryOutcome::Absorbed => return (Fate::Absorbed, collisions),
            }
            if !p.collision_due && h == self.dt - p.t_elapsed {
                p.t_elapsed = self.dt;
            } else {
                p.t_elapsed += h;
            }
            p.prev_dt = h;
        }
        p.t_elapsed %= self.dt;
        (Fate::Alive(p), collisions)
    }
}
