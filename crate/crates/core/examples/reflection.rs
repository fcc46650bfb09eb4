//! Boundary treatment: deterministic folds and the absorption rate of a
//! partially absorbing wall.

use kinetic_control::dynamics::{apply_boundary, fold_into_domain, BoundaryOutcome};
use kinetic_control::rng::{Purpose, RngStream};
use kinetic_control::PhaseDomain;

fn main() {
    for (x, v) in [(-0.3, -2.0), (10.4, 3.0), (23.0, 1.0)] {
        let (xr, vr) = fold_into_domain(x, v, 10.0);
        println!("({x}, {v}) -> ({xr:.3}, {vr})");
    }
    let mut rng = RngStream::new(1, Purpose::Scratch, 0, 0);
    for alpha in [0.0, 0.25, 0.5, 1.0] {
        let domain = PhaseDomain::new(10.0, 5.0, alpha).unwrap();
        let n = 20_000;
        let absorbed = (0..n)
            .filter(|_| matches!(apply_boundary(10.2, 1.0, &domain, &mut rng), BoundaryOutcome::Absorbed))
            .count();
        println!("alpha = {alpha}: absorbed {:.3}", absorbed as f64 / n as f64);
    }
}
