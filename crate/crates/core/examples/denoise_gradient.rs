//! Smooths a noisy histogram row by row and extracts the control from it.

use kinetic_control::control::extract_control;
use kinetic_control::denoise::{denoise_field, DenoiseParams};
use kinetic_control::rng::{Purpose, RngStream};
use kinetic_control::sampling::sample_uniform;
use kinetic_control::{GridField, GridSpec, PhaseDomain};

fn roughness(f: &GridField, i: usize) -> f64 {
    f.row(i).windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
}

fn main() {
    let grid = GridSpec::new(4, 40, &PhaseDomain::new(10.0, 5.0, 0.5).unwrap()).unwrap();
    let mut rng = RngStream::new(2, Purpose::Scratch, 0, 0);
    let noisy = GridField::from_fn(&grid, |_, v| {
        100.0 * (-v * v / 4.0).exp() + sample_uniform(-10.0, 10.0, &mut rng)
    });
    for c_s in [0.0, 0.1, 1.0] {
        let smooth = denoise_field(&noisy, &DenoiseParams::new(c_s).unwrap(), grid.dv());
        let u = extract_control(&smooth, 0.5, grid.dv());
        println!(
            "c_s {c_s}: roughness {:.1}, mass {:.3} (raw {:.3}), u at v = {:.2}: {:.3}",
            roughness(&smooth, 0),
            smooth.row(0).iter().sum::<f64>(),
            noisy.row(0).iter().sum::<f64>(),
            grid.cell_center(0, 10).1,
            u.get(0, 10)
        );
    }
}
