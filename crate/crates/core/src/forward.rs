//! Forward Monte Carlo solver for the controlled collisional model.

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::control::ControlField;
use crate::domain::{deposit, EnsembleKind, GridField, ParticleEnsemble};
use crate::dynamics::Streaming;
use crate::error::{Error, Result};
use crate::rng::Purpose;
use crate::sampling::init_forward_ensemble;
use crate::transport::{Fate, Mover};

/// Particle clouds and histograms at every time level `0..=n_t`.
#[derive(Debug, Clone)]
pub struct ForwardRun {
    pub ensembles: Vec<ParticleEnsemble>,
    pub histograms: Vec<GridField>,
    /// Collisions during step `k -> k+1`.
    pub collisions: Vec<u64>,
    /// Particles absorbed at the walls during step `k -> k+1`.
    pub absorbed: Vec<usize>,
}

impl ForwardRun {
    pub fn counts(&self) -> Vec<usize> {
        self.ensembles.iter().map(ParticleEnsemble::len).collect()
    }

    pub fn initial_count(&self) -> usize {
        self.ensembles[0].len()
    }

    pub fn last(&self) -> &ParticleEnsemble {
        self.ensembles.last().expect("at least the initial level")
    }
}

/// Initial cloud described by the configuration.
pub fn initial_ensemble(cfg: &SimConfig) -> Result<ParticleEnsemble> {
    Ok(init_forward_ensemble(
        &cfg.initial_density_spec(),
        cfg.n_f,
        &cfg.domain()?,
        cfg.seed,
    ))
}

/// Simulates the forward model under `control` from `init`; step `k`
/// applies the control level `u[k]`.
pub fn run_forward(cfg: &SimConfig, control: &ControlField, init: ParticleEnsemble) -> Result<ForwardRun> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let grid = cfg.grid()?;
    let ks = cfg.ks_params()?;
    let force = cfg.force_spec();
    if !control.matches(&grid) || control.n_t() != cfg.n_t {
        return Err(Error::DimensionMismatch(format!(
            "control is {}x{} over {} steps, run needs {}x{} over {}",
            control.n_x(),
            control.n_v(),
            control.n_t(),
            grid.n_x(),
            grid.n_v(),
            cfg.n_t
        )));
    }
    let mut run = ForwardRun {
        histograms: vec![deposit(&init, &grid)],
        ensembles: vec![init],
        collisions: Vec::with_capacity(cfg.n_t),
        absorbed: Vec::with_capacity(cfg.n_t),
    };
    for k in 0..cfg.n_t {
        let mover = Mover {
            domain: &domain,
            grid: &grid,
            force: &force,
            control: Some(control.step(k)),
            ks: &ks,
            dt: cfg.dt,
            tau: ks.tau(),
            max_substep: cfg.max_substep,
            integrator: cfg.integrator,
            streaming: Streaming::Forward,
            seed: cfg.seed,
            purpose: Purpose::ForwardTransport,
            step: k as u64,
        };
        let current = &run.ensembles[k].particles;
        let moved: Vec<(Fate, u32)> = if cfg.parallel {
            current.par_iter().map(|&p| mover.advance(p)).collect()
        } else {
            current.iter().map(|&p| mover.advance(p)).collect()
        };
        let mut next = Vec::with_capacity(moved.len());
        let mut hits = 0u64;
        let mut lost = 0;
        for (fate, n) in moved {
            hits += u64::from(n);
            match fate {
                Fate::Alive(p) => next.push(p),
                _ => lost += 1,
            }
        }
        let next = ParticleEnsemble::new(EnsembleKind::Forward, next);
        run.histograms.push(deposit(&next, &grid));
        run.ensembles.push(next);
        run.collisions.push(hits);
        run.absorbed.push(lost);
    }
    Ok(run)
}
