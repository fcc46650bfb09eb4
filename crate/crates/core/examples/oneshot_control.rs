//! Runs the backward adjoint solve once and summarizes the control field.

use std::time::Instant;

use kinetic_control::{run_adjoint_oneshot, SimConfig};

fn main() -> kinetic_control::Result<()> {
    let cfg = SimConfig::desk();
    let start = Instant::now();
    let run = run_adjoint_oneshot(&cfg)?;
    println!("solved {} levels in {:.1}s", cfg.n_t + 1, start.elapsed().as_secs_f64());
    for k in (0..=cfg.n_t).step_by(20) {
        let u = run.control.step(k);
        let peak = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("k = {k:3}: adjoint particles {:6}, max |u| {peak:.3}", run.counts[k]);
    }
    let mean = run.control.mean();
    println!(
        "time-averaged max |u| {:.3}",
        mean.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    );
    Ok(())
}
