//! A single collisionless particle started on the target orbit stays on it.

use kinetic_control::domain::EnsembleKind;
use kinetic_control::objective::z_desired;
use kinetic_control::{run_forward, ControlField, Integrator, Particle, ParticleEnsemble, SimConfig};

fn main() {
    for integrator in [Integrator::VelocityVerlet, Integrator::PreviousStep] {
        let cfg = SimConfig {
            n_f: 1,
            tau: Some(1e9),
            max_substep: Some(1e-3),
            integrator,
            ..SimConfig::default()
        };
        let orbit = cfg.orbit();
        let (x0, v0) = z_desired(0.0, &orbit);
        let init = ParticleEnsemble::new(EnsembleKind::Forward, vec![Particle::new(0, x0, v0)]);
        let run = run_forward(&cfg, &ControlField::zeros(cfg.n_t, &cfg.grid().unwrap()), init).unwrap();
        let worst = run
            .ensembles
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let (x, v) = z_desired(k as f64 * cfg.dt, &orbit);
                (e.particles[0].x - x).hypot(e.particles[0].v - v)
            })
            .fold(0.0, f64::max);
        println!("{integrator:?}: max distance from the orbit {worst:.2e}");
    }
}
