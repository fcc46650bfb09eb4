//! Draws free-flight times and post-collision velocities and prints their
//! sample moments next to the exact values.

use kinetic_control::collisions::{adjoint_postcollision, forward_postcollision, KsParams};
use kinetic_control::rng::{Purpose, RngStream};
use kinetic_control::sampling::free_flight_time;

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn main() {
    let gamma = 0.9999;
    let ks = KsParams::new(gamma, KsParams::default_beta(gamma), 0.0025).unwrap();
    let mut rng = RngStream::new(7, Purpose::Scratch, 0, 0);
    let n = 100_000;

    let flights: Vec<f64> = (0..n).map(|_| free_flight_time(ks.tau(), &mut rng)).collect();
    println!("free flight: mean {:.4e} (tau = {:.4e})", moments(&flights).0, ks.tau());

    let v = 1.5;
    let fwd: Vec<f64> = (0..n).map(|_| forward_postcollision(v, &ks, 5.0, &mut rng)).collect();
    let (m, s2) = moments(&fwd);
    println!(
        "forward:  mean {m:.5} (exact {:.5}), var {s2:.4e} (exact {:.4e})",
        gamma * v,
        ks.forward_variance()
    );

    let adj: Vec<f64> = (0..n)
        .filter_map(|_| adjoint_postcollision(v, &ks, 5.0, &mut rng))
        .collect();
    let (m, s2) = moments(&adj);
    println!(
        "adjoint:  mean {m:.5} (exact {:.5}), var {s2:.4e} (exact {:.4e})",
        v / gamma,
        ks.adjoint_variance()
    );
}
