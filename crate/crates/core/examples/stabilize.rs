//! Controlled against uncontrolled forward runs, from the uniform start
//! with the full control and from the Gaussian start with the averaged one.
//!
//! `cargo run --release --example stabilize -- 7.5` widens the velocity
//! window.

use kinetic_control::objective::{cost_estimate, mean, orbit_residuals};
use kinetic_control::{initial_ensemble, run_adjoint_oneshot, run_forward, ControlField, InitialKind, SimConfig};

fn evaluate(cfg: &SimConfig, u: &ControlField) -> kinetic_control::Result<(f64, f64)> {
    let run = run_forward(cfg, u, initial_ensemble(cfg)?)?;
    let j = cost_estimate(
        &run.ensembles,
        Some(u),
        &cfg.grid()?,
        &cfg.objective(),
        &cfg.orbit(),
        run.initial_count(),
    );
    Ok((j, mean(&orbit_residuals(run.last(), &cfg.orbit(), cfg.n_t))))
}

fn main() -> kinetic_control::Result<()> {
    let mut cfg = SimConfig::desk();
    if let Some(v_max) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        cfg.v_max = v_max;
    }
    let adjoint = run_adjoint_oneshot(&cfg)?;
    let zero = ControlField::zeros(cfg.n_t, &cfg.grid()?);

    let (j0, r0) = evaluate(&cfg, &zero)?;
    let (j1, r1) = evaluate(&cfg, &adjoint.control)?;
    println!("uniform start:  J {j0:.3} -> {j1:.3}, residual {r0:.3} -> {r1:.3}");

    let gauss = SimConfig {
        initial_density: InitialKind::Gaussian,
        ..cfg.clone()
    };
    let (j0, r0) = evaluate(&gauss, &zero)?;
    let (j1, r1) = evaluate(&gauss, &adjoint.control.averaged())?;
    println!("gaussian start: J {j0:.3} -> {j1:.3}, residual {r0:.3} -> {r1:.3}");
    Ok(())
}
