//! Loss rate of the adjoint collision operator and the kernel duality.

use kinetic_control::collisions::{adjoint_kernel, c_star_0, ks_kernel, KsParams};

fn main() {
    for gamma in [0.9, 0.99, 0.9999] {
        let ks = KsParams::new(gamma, KsParams::default_beta(gamma), 0.0025).unwrap();
        let (v, w) = (1.0, 1.0 / gamma);
        println!(
            "gamma {gamma}: C*0 = {:.6}, gamma A*(w,v) = {:.6}, A(v,w) = {:.6}",
            c_star_0(&ks),
            gamma * adjoint_kernel(w, v, &ks),
            ks_kernel(v, w, &ks)
        );
    }
}
