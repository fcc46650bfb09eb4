//! One-shot backward Monte Carlo solve of the augmented adjoint model.
//!
//! The adjoint cloud starts from `-phi` at `T` and is moved backwards step
//! by step. At every level its histogram is smoothed, the feedback control
//! is read off the velocity gradient, and the same control closes the
//! adjoint equation for the next backward step.

use rayon::prelude::*;

use crate::collisions::c_star_0;
use crate::config::SimConfig;
use crate::control::{extract_control, velocity_gradient, ControlField};
use crate::denoise::denoise_field;
use crate::domain::{deposit, EnsembleKind, GridField, GridSpec, Particle, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::objective::{running_cost, ObjectiveParams, TargetOrbit};
use crate::rng::{Purpose, RngStream};
use crate::sampling::{init_adjoint_ensemble, sample_uniform};
use crate::transport::{Fate, Mover};

/// Output of the backward solve; every per-level vector is indexed by
/// `k = 0..=n_t`.
#[derive(Debug, Clone)]
pub struct AdjointRun {
    pub control: ControlField,
    /// Raw histograms `q^k`.
    pub q: Vec<GridField>,
    /// Smoothed histograms scaled to adjoint values, `q~^k = w * smooth(q^k)`;
    /// `u^k` is exactly `(1/nu) d_v q~^k` (zero with the closure off).
    pub q_tilde: Vec<GridField>,
    /// Particle count at the time `q^k` was deposited.
    pub counts: Vec<usize>,
    /// Particles injected by the source at level `k` (zero at `k = 0`).
    pub injected: Vec<usize>,
    /// Particles added by the reaction term at level `k`.
    pub reaction_added: Vec<usize>,
    /// Particles lost (walls or velocity window) while moving from `k` to
    /// `k - 1`.
    pub lost: Vec<usize>,
}

/// Source strength `N_theta = -theta` (or `-theta_bar`) at the cell centres
/// for level `k`.
pub fn source_field(grid: &GridSpec, params: &ObjectiveParams, orbit: &TargetOrbit, n_t: usize, k: usize) -> GridField {
    let t = params.horizon * k as f64 / n_t as f64;
    GridField::from_fn(grid, |x, v| -running_cost((x, v), t, params, orbit, n_t))
}

/// Adds `max(floor(N_theta - |d_v q~|^2 / (2 nu)), 0)` particles to every
/// cell, uniformly distributed inside it. Returns the number added.
///
/// New particles take consecutive ids starting at `*next_id`.
#[allow(clippy::too_many_arguments)]
pub fn source_injection(
    q: &mut ParticleEnsemble,
    q_tilde: &GridField,
    n_theta: &GridField,
    nu: f64,
    grid: &GridSpec,
    seed: u64,
    step: usize,
    next_id: &mut u64,
) -> usize {
    let grad = velocity_gradient(q_tilde, grid.dv());
    let before = q.len();
    for i in 0..grid.n_x() {
        for j in 0..grid.n_v() {
            let g = grad.get(i, j);
            let penalty = if nu.is_infinite() { 0.0 } else { g * g / (2.0 * nu) };
            let n_new = (n_theta.get(i, j) - penalty).floor().max(0.0) as usize;
            if n_new == 0 {
                continue;
            }
            let (x0, v0) = grid.cell_origin(i, j);
            let mut rng = RngStream::new(seed, Purpose::SourceInjection, step as u64, grid.index(i, j) as u64);
            for _ in 0..n_new {
                let x = sample_uniform(x0, x0 + grid.dx(), &mut rng);
                let v = sample_uniform(v0, v0 + grid.dv(), &mut rng);
                q.particles.push(Particle::new(*next_id, x, v));
                *next_id += 1;
            }
        }
    }
    q.len() - before
}

/// Linear reaction: with `dt c0 = N + eps`, every particle gets `N` copies
/// plus one more with probability `eps`. Copies keep the full state except
/// the id. Returns the number added.
pub fn reaction_amplify(q: &mut ParticleEnsemble, dt_c0: f64, seed: u64, step: usize, next_id: &mut u64) -> usize {
    assert!(
        dt_c0 >= 0.0 && dt_c0.is_finite(),
        "reaction factor must be non-negative"
    );
    let whole = dt_c0.floor();
    let eps = dt_c0 - whole;
    let whole = whole as usize;
    let existing = q.len();
    for idx in 0..existing {
        let parent = q.particles[idx];
        let mut copies = whole;
        if eps > 0.0 {
            let mut rng = RngStream::new(seed, Purpose::Reaction, step as u64, parent.id);
            if rng.unit() > 1.0 - eps {
                copies += 1;
            }
        }
        for _ in 0..copies {
            q.particles.push(Particle { id: *next_id, ..parent });
            *next_id += 1;
        }
    }
    q.len() - existing
}

fn smooth_and_extract(
    q: &ParticleEnsemble,
    cfg: &SimConfig,
    grid: &GridSpec,
) -> Result<(GridField, GridField, GridField)> {
    let hist = deposit(q, grid);
    let mut smooth = denoise_field(&hist, &cfg.denoise()?, grid.dv());
    let w = cfg.adjoint_weight();
    smooth.values_mut().iter_mut().for_each(|s| *s *= w);
    let u = if cfg.adjoint_closure {
        extract_control(&smooth, cfg.nu, grid.dv())
    } else {
        GridField::zeros_like(grid)
    };
    Ok((hist, smooth, u))
}

/// Solves the adjoint model once backwards in time and returns the
/// feedback control at every level together with its time average.
/// Never touches the forward density.
pub fn run_adjoint_oneshot(cfg: &SimConfig) -> Result<AdjointRun> {
    cfg.validate()?;
    let domain = cfg.domain()?;
    let grid = cfg.grid()?;
    let ks = cfg.ks_params()?;
    let force = cfg.force_spec();
    let objective = cfg.objective();
    let orbit = cfg.orbit();
    let dt_c0 = cfg.dt * c_star_0(&ks);
    let nu_penalty = if cfg.adjoint_closure { cfg.nu } else { f64::INFINITY };
    let stationary_source = cfg
        .use_time_averaged_theta
        .then(|| source_field(&grid, &objective, &orbit, cfg.n_t, 0));

    let mut q = init_adjoint_ensemble(&objective, cfg.n_q_terminal, &domain, cfg.seed);
    let mut next_id = q.next_id();
    let levels = cfg.n_t + 1;
    let mut out = AdjointRun {
        control: ControlField::zeros(cfg.n_t, &grid),
        q: Vec::with_capacity(levels),
        q_tilde: Vec::with_capacity(levels),
        counts: Vec::with_capacity(levels),
        injected: Vec::with_capacity(levels),
        reaction_added: Vec::with_capacity(levels),
        lost: Vec::with_capacity(levels),
    };
    let mut u_levels = Vec::with_capacity(levels);

    for k in (1..=cfg.n_t).rev() {
        let (hist, smooth, u) = smooth_and_extract(&q, cfg, &grid)?;
        out.counts.push(q.len());

        let n_theta = match &stationary_source {
            Some(field) => std::borrow::Cow::Borrowed(field),
            None => std::borrow::Cow::Owned(source_field(&grid, &objective, &orbit, cfg.n_t, k)),
        };
        let injected = source_injection(&mut q, &smooth, &n_theta, nu_penalty, &grid, cfg.seed, k, &mut next_id);
        let added = reaction_amplify(&mut q, dt_c0, cfg.seed, k, &mut next_id);
        if let Some(cap) = cfg.max_adjoint_particles {
            if q.len() > cap {
                return Err(Error::AdjointOverflow {
                    step: k,
                    count: q.len(),
                    cap,
                });
            }
        }
        if q.is_empty() {
            return Err(Error::AdjointCollapse { step: k });
        }

        let mover = Mover {
            domain: &domain,
            grid: &grid,
            force: &force,
            control: Some(&u),
            ks: &ks,
            dt: cfg.dt,
            tau: ks.tau_q(),
            max_substep: cfg.max_substep,
            integrator: cfg.integrator,
            streaming: cfg.adjoint_streaming,
            seed: cfg.seed,
            purpose: Purpose::AdjointTransport,
            step: k as u64,
        };
        let moved: Vec<Fate> = if cfg.parallel {
            q.particles.par_iter().map(|&p| mover.advance(p).0).collect()
        } else {
            q.particles.iter().map(|&p| mover.advance(p).0).collect()
        };
        let before = moved.len();
        let survivors: Vec<Particle> = moved
            .into_iter()
            .filter_map(|f| match f {
                Fate::Alive(p) => Some(p),
                _ => None,
            })
            .collect();
        out.lost.push(before - survivors.len());
        q = ParticleEnsemble::new(EnsembleKind::Adjoint, survivors);

        out.q.push(hist);
        out.q_tilde.push(smooth);
        out.injected.push(injected);
        out.reaction_added.push(added);
        u_levels.push(u);
    }

    let (hist, smooth, u) = smooth_and_extract(&q, cfg, &grid)?;
    out.counts.push(q.len());
    out.q.push(hist);
    out.q_tilde.push(smooth);
    out.injected.push(0);
    out.reaction_added.push(0);
    out.lost.push(0);
    u_levels.push(u);

    // collected from k = n_t down to 0
    for v in [&mut out.q, &mut out.q_tilde, &mut u_levels] {
        v.reverse();
    }
    for v in [
        &mut out.counts,
        &mut out.injected,
        &mut out.reaction_added,
        &mut out.lost,
    ] {
        v.reverse();
    }
    out.control = ControlField::from_steps(u_levels)?;
    Ok(out)
}
