//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use kinetic_control::adjoint::reaction_amplify;
use kinetic_control::collisions::{
    adjoint_kernel, adjoint_postcollision, c_star_0, forward_postcollision, ks_kernel, KsParams,
};
use kinetic_control::control::extract_control;
use kinetic_control::denoise::{denoise_field, DenoiseParams};
use kinetic_control::domain::EnsembleKind;
use kinetic_control::dynamics::{apply_boundary, fold_into_domain, BoundaryOutcome};
use kinetic_control::io::{encode_control, RunReport};
use kinetic_control::objective::{cost_estimate, mean, orbit_residuals, z_desired};
use kinetic_control::rng::{Purpose, RngStream};
use kinetic_control::sampling::{free_flight_time, sample_uniform};
use kinetic_control::{
    initial_ensemble, run_adjoint_oneshot, run_forward, ControlField, GridField, GridSpec, InitialKind, Particle,
    ParticleEnsemble, PhaseDomain, SimConfig,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn table1_ks() -> KsParams {
    let gamma = 0.9999;
    KsParams::new(gamma, KsParams::default_beta(gamma), 0.0025).unwrap()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn sampler_moments() -> Outcome {
    let start = Instant::now();
    let ks = table1_ks();
    let n = 100_000;
    let mut rng = RngStream::new(1, Purpose::Scratch, 0, 0);
    let flights: Vec<f64> = (0..n).map(|_| free_flight_time(ks.tau(), &mut rng)).collect();
    let (fm, _) = mean_var(&flights);
    // exponential: sd of the sample mean is tau / sqrt(n)
    let flight_ok = (fm - ks.tau()).abs() <= 3.0 * ks.tau() / (n as f64).sqrt();

    let v = 2.0;
    let fwd: Vec<f64> = (0..n).map(|_| forward_postcollision(v, &ks, 5.0, &mut rng)).collect();
    let (m1, v1) = mean_var(&fwd);
    let fwd_ok = (m1 / (ks.gamma() * v) - 1.0).abs() <= 0.05 && (v1 / ks.forward_variance() - 1.0).abs() <= 0.05;

    let adj: Vec<f64> = (0..n)
        .filter_map(|_| adjoint_postcollision(v, &ks, 5.0, &mut rng))
        .collect();
    let (m2, v2) = mean_var(&adj);
    let adj_ok = adj.len() == n
        && (m2 / (v / ks.gamma()) - 1.0).abs() <= 0.05
        && (v2 / ks.adjoint_variance() - 1.0).abs() <= 0.05;
    let secs = start.elapsed().as_secs_f64();
    check(
        flight_ok && fwd_ok && adj_ok && secs < 5.0,
        format!(
            "flight mean {fm:.6e} (tau {:.6e}); forward mean/var {m1:.5}/{v1:.4e}; adjoint mean/var {m2:.5}/{v2:.4e}; {secs:.2}s",
            ks.tau()
        ),
    )
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * h)).sum();
    h * (inner + 0.5 * (f(a) + f(b)))
}

fn kernel_identities() -> Outcome {
    let ks = table1_ks();
    let exact = c_star_0(&ks);
    let mut worst_c0 = 0.0f64;
    for idx in 0..10 {
        let v = -4.5 + idx as f64;
        let lo = (ks.gamma() * v).min(v / ks.gamma()) - 1.0;
        let hi = (ks.gamma() * v).max(v / ks.gamma()) + 1.0;
        let quad = trapezoid(|w| ks_kernel(w, v, &ks) - ks_kernel(v, w, &ks), lo, hi, 200_000);
        worst_c0 = worst_c0.max((quad - exact).abs() / exact);
    }
    let mut worst_dual = 0.0f64;
    for a in 0..20 {
        for b in 0..20 {
            let v = -3.0 + 0.3 * a as f64;
            let w = v + (b as f64 - 10.0) * 0.004;
            let lhs = ks.gamma() * adjoint_kernel(w, v, &ks);
            let rhs = ks_kernel(v, w, &ks);
            worst_dual = worst_dual.max((lhs - rhs).abs() / rhs);
        }
    }
    check(
        worst_c0 <= 1e-6 && worst_dual <= 1e-10,
        format!("C*0 = {exact:.9}, worst quadrature rel err {worst_c0:.2e}; worst duality rel err {worst_dual:.2e}"),
    )
}

fn reflection_suite() -> Outcome {
    let domain = PhaseDomain::new(10.0, 5.0, 1.0).unwrap();
    let mut rng = RngStream::new(3, Purpose::Scratch, 0, 0);
    let mut closure_ok = true;
    for _ in 0..10_000 {
        let x = sample_uniform(-25.0, 35.0, &mut rng);
        let v = sample_uniform(-5.0, 5.0, &mut rng);
        match apply_boundary(x, v, &domain, &mut rng) {
            BoundaryOutcome::Reflected { x: xr, v: vr } => {
                closure_ok &= (0.0..=10.0).contains(&xr) && vr.abs() == v.abs();
            }
            BoundaryOutcome::Absorbed => closure_ok = false,
        }
    }
    let folds_ok = fold_into_domain(-0.3, -2.0, 10.0) == (0.3, 2.0) && {
        let (x, v) = fold_into_domain(10.4, 3.0, 10.0);
        (x - 9.6).abs() < 1e-12 && v == -3.0
    };
    let alpha = 0.5;
    let half = PhaseDomain::new(10.0, 5.0, alpha).unwrap();
    let events = 100_000;
    let absorbed = (0..events)
        .filter(|_| matches!(apply_boundary(-0.1, -1.0, &half, &mut rng), BoundaryOutcome::Absorbed))
        .count();
    let frac = absorbed as f64 / events as f64;
    let sigma = (alpha * (1.0 - alpha) / events as f64).sqrt();
    let frac_ok = (frac - (1.0 - alpha)).abs() <= 3.0 * sigma;
    check(
        closure_ok && folds_ok && frac_ok,
        format!(
            "closure/speed {closure_ok}, single folds {folds_ok}, absorbed fraction {frac:.4} (expected 0.5 +- {:.4})",
            3.0 * sigma
        ),
    )
}

fn denoising() -> Outcome {
    let dv = 0.2;
    let mut rng = RngStream::new(4, Purpose::Scratch, 0, 0);
    let random = |rng: &mut RngStream| {
        GridField::from_values(5, 50, (0..250).map(|_| sample_uniform(0.0, 300.0, rng)).collect()).unwrap()
    };
    let q = random(&mut rng);
    let identity_ok = denoise_field(&q, &DenoiseParams::new(0.0).unwrap(), dv) == q;
    let constant = GridField::from_values(5, 50, vec![7.0; 250]).unwrap();
    let fixed_ok = denoise_field(&constant, &DenoiseParams::new(0.5).unwrap(), dv)
        .values()
        .iter()
        .all(|v| (v - 7.0).abs() < 1e-12);
    let energy = |row: &[f64]| row.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>();
    let mut worst_mass = 0.0f64;
    let mut principle_ok = true;
    for _ in 0..100 {
        let q = random(&mut rng);
        let c_s = sample_uniform(0.01, 2.0, &mut rng);
        let out = denoise_field(&q, &DenoiseParams::new(c_s).unwrap(), dv);
        for i in 0..5 {
            let (a, b) = (q.row(i), out.row(i));
            let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
            worst_mass = worst_mass.max((sa - sb).abs() / sa);
            let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            principle_ok &= b.iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9);
            principle_ok &= energy(b) <= energy(a);
        }
    }
    check(
        identity_ok && fixed_ok && worst_mass <= 1e-10 && principle_ok,
        format!("identity {identity_ok}, fixed point {fixed_ok}, worst row-mass rel err {worst_mass:.2e}, max principle + energy {principle_ok}"),
    )
}

fn control_extraction() -> Outcome {
    let grid = GridSpec::new(10, 25, &PhaseDomain::new(10.0, 5.0, 0.5).unwrap()).unwrap();
    let dv = grid.dv();
    let linear = GridField::from_fn(&grid, |_, v| 3.0 * v);
    let quad = GridField::from_fn(&grid, |_, v| v * v);
    let nu = 2.0;
    let ul = extract_control(&linear, nu, dv);
    let uq = extract_control(&quad, nu, dv);
    let mut lin_err = 0.0f64;
    let mut quad_err = 0.0f64;
    for i in 0..grid.n_x() {
        for j in 0..grid.n_v() {
            lin_err = lin_err.max((ul.get(i, j) - 1.5).abs());
            if j > 0 && j + 1 < grid.n_v() {
                let (_, v) = grid.cell_center(i, j);
                quad_err = quad_err.max((uq.get(i, j) - 2.0 * v / nu).abs());
            }
        }
    }
    let u1 = extract_control(&quad, 1.0, dv);
    let scaling_ok = u1.values().iter().zip(uq.values()).all(|(a, b)| *b == *a / 2.0);
    check(
        lin_err < 1e-12 && quad_err < 1e-11 && scaling_ok,
        format!("linear err {lin_err:.1e}, quadratic err {quad_err:.1e}, 1/nu scaling exact {scaling_ok}"),
    )
}

fn reaction() -> Outcome {
    let cloud = |n: u64| {
        ParticleEnsemble::new(
            EnsembleKind::Adjoint,
            (0..n).map(|i| Particle::new(i, 1.0, 0.5)).collect(),
        )
    };
    let mut q = cloud(1000);
    let mut next = 1000;
    reaction_amplify(&mut q, 2.0, 1, 1, &mut next);
    let tripled = q.len() == 3000;
    let n = 1_000_000u64;
    let mut q = cloud(n);
    let mut next = n;
    let added = reaction_amplify(&mut q, 0.001, 2, 1, &mut next) as f64;
    let growth = (n as f64 + added) / n as f64;
    let sigma = (n as f64 * 0.001 * 0.999).sqrt() / n as f64;
    let ok = tripled && (growth - 1.001).abs() <= 3.0 * sigma;
    check(
        ok,
        format!(
            "tripled {tripled}; growth {growth:.6} (expected 1.001 +- {:.6})",
            3.0 * sigma
        ),
    )
}

fn collisionless_orbit() -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig {
        n_f: 1,
        tau: Some(1e9),
        max_substep: Some(1e-3),
        alpha: 1.0,
        parallel: false,
        ..SimConfig::default()
    };
    let orbit = cfg.orbit();
    let (x0, v0) = z_desired(0.0, &orbit);
    let init = ParticleEnsemble::new(EnsembleKind::Forward, vec![Particle::new(0, x0, v0)]);
    let control = ControlField::zeros(cfg.n_t, &cfg.grid().unwrap());
    let run = run_forward(&cfg, &control, init).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (k, e) in run.ensembles.iter().enumerate() {
        let p = e.particles.first().ok_or("particle lost")?;
        let (x, v) = z_desired(k as f64 * cfg.dt, &orbit);
        worst = worst.max((p.x - x).hypot(p.v - v));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-3 && secs < 1.0,
        format!(
            "max deviation {worst:.3e} over one period, {} collisions, {secs:.3}s",
            run.collisions.iter().sum::<u64>()
        ),
    )
}

fn cost_and_residual(cfg: &SimConfig, control: &ControlField) -> Result<(f64, f64), String> {
    let run =
        run_forward(cfg, control, initial_ensemble(cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let grid = cfg.grid().map_err(|e| e.to_string())?;
    let j = cost_estimate(
        &run.ensembles,
        Some(control),
        &grid,
        &cfg.objective(),
        &cfg.orbit(),
        run.initial_count(),
    );
    let r = mean(&orbit_residuals(run.last(), &cfg.orbit(), cfg.n_t));
    Ok((j, r))
}

fn stabilization() -> Outcome {
    let cfg = SimConfig::desk();
    let start = Instant::now();
    let adjoint = run_adjoint_oneshot(&cfg).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let zero = ControlField::zeros(cfg.n_t, &cfg.grid().unwrap());
    let (j0, r0) = cost_and_residual(&cfg, &zero)?;
    let (j1, r1) = cost_and_residual(&cfg, &adjoint.control)?;
    let gauss = SimConfig {
        initial_density: InitialKind::Gaussian,
        ..cfg.clone()
    };
    let (_, g0) = cost_and_residual(&gauss, &zero)?;
    let (_, g1) = cost_and_residual(&gauss, &adjoint.control.averaged())?;
    let a = secs < 600.0;
    let b = j1 < j0;
    let c = r1 <= 0.5 * r0;
    let d = g1 < g0;
    check(
        a && b && c && d,
        format!(
            "(a) adjoint {secs:.1}s [{}]; (b) J {j1:.3} vs baseline {j0:.3} [{}]; (c) residual {r1:.3} vs half baseline {:.3} [{}]; (d) gaussian+ubar residual {g1:.3} vs {g0:.3} [{}]",
            ok(a),
            ok(b),
            0.5 * r0,
            ok(c),
            ok(d)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "fail"
    }
}

fn determinism() -> Outcome {
    let cfg = SimConfig {
        n_t: 30,
        orbit_period: Some(2.5),
        ..SimConfig::desk()
    };
    let serial = SimConfig {
        parallel: false,
        ..cfg.clone()
    };
    let a = run_adjoint_oneshot(&cfg).map_err(|e| e.to_string())?;
    let b = run_adjoint_oneshot(&serial).map_err(|e| e.to_string())?;
    let adjoint_same = encode_control(&a.control) == encode_control(&b.control);

    let report = |c: &SimConfig| -> Result<(String, Vec<ParticleEnsemble>), String> {
        let run =
            run_forward(c, &a.control, initial_ensemble(c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let mut rep = RunReport::from_run(c, &run, &a.control, 0.0).map_err(|e| e.to_string())?;
        rep.wall_clock_secs = 0.0;
        Ok((rep.to_text(), run.ensembles))
    };
    let (ra, ea) = report(&cfg)?;
    let (rb, eb) = report(&serial)?;
    let forward_same = ra == rb && ea == eb;
    check(
        adjoint_same && forward_same,
        format!("control bytes identical {adjoint_same}; forward ensembles + report identical {forward_same}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("sampler moments", sampler_moments),
        ("kernel identities", kernel_identities),
        ("reflection", reflection_suite),
        ("denoising", denoising),
        ("control extraction", control_extraction),
        ("reaction amplification", reaction),
        ("collisionless integrator", collisionless_orbit),
        ("end-to-end stabilization", stabilization),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS  {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL  {detail}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
