//! The input-distortion matrix of the left-error dynamics has a closed
//! form; this compares it against the defining dexp series and checks the
//! determinant identity that drives the invariant-set analysis.

use loglin::se2::{left_jacobian_series, u_left, u_left_inv, AlgebraVec};

fn main() {
    let grid = |n: usize, lo: f64, hi: f64| {
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    };

    let mut max_gap = 0.0f64;
    let mut max_inv_gap = 0.0f64;
    let mut max_det_gap = 0.0f64;
    for zx in grid(10, -1.0, 1.0) {
        for zy in grid(10, -1.0, 1.0) {
            for zt in grid(10, -3.0, 3.0) {
                let zeta = AlgebraVec::new(zx, zy, zt);
                // U^{-1} has an everywhere-convergent series; U is its inverse.
                let series_inv = -left_jacobian_series(&zeta, 40);
                max_inv_gap = max_inv_gap.max((u_left_inv(&zeta) - series_inv).abs().max());
                let u = u_left(&zeta).unwrap();
                max_gap = max_gap.max((u - series_inv.try_inverse().unwrap()).abs().max());

                // det U^{-1} = 2 (cos zt - 1) / zt^2 = -(sin(zt/2)/(zt/2))^2
                let det = u_left_inv(&zeta).determinant();
                let h = 0.5 * zt;
                let sinc = if h.abs() < 1e-8 { 1.0 } else { h.sin() / h };
                max_det_gap = max_det_gap.max((det + sinc * sinc).abs());
            }
        }
    }
    println!("closed form vs 40-term series, 1000-point grid:");
    println!("  max entry gap, U inverse = {max_inv_gap:.3e}");
    println!("  max entry gap, U         = {max_gap:.3e}");
    println!("determinant identity: max gap = {max_det_gap:.3e}");

    // Near zero the determinant expands as -1 + zt^2/12 - zt^4/360 + ...
    for zt in [1e-1, 1e-2] {
        let det = u_left_inv(&AlgebraVec::new(0.3, -0.2, zt)).determinant();
        let taylor = -1.0 + zt * zt / 12.0 - zt.powi(4) / 360.0;
        println!("zt = {zt:5.0e}: det U^-1 = {det:.12}, Taylor = {taylor:.12}");
    }
}
