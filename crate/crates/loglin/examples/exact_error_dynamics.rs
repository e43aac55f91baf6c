//! The log of the tracking error follows a linear-plus-distortion ODE
//! *exactly*: integrating that ODE alongside the group simulation shows no
//! drift beyond integrator error, while freezing the distortion at its
//! zero-error value drifts visibly under the same disturbance.

use loglin::se2::{AlgebraVec, SE2};
use loglin::sim::{simulate, ClosedLoop, ConstantTwist, ControlLaw, SimConfig};
use nalgebra::Matrix3;

fn main() {
    let reference =
        ConstantTwist { start: SE2::identity(), rate: AlgebraVec::new(2.0, 0.0, 0.4) };
    let disturbance =
        |t: f64| AlgebraVec::new((3.0 * t).sin(), (2.0 * t).cos(), 0.1 * (5.0 * t).sin());
    let cl = ClosedLoop {
        reference: &reference,
        disturbance: &disturbance,
        gain: Matrix3::from_diagonal_element(-3.0),
        law: ControlLaw::Inversion,
    };
    let x0 = SE2::new(0.4, -0.3, 0.5);

    for dt in [1e-2, 5e-3, 2.5e-3] {
        let cfg = SimConfig { dt, t_end: 8.0, record_stride: 100, ..SimConfig::default() };
        let trace = simulate(&cl, &x0, &cfg).unwrap();
        println!(
            "dt = {dt:7.4}: exact model deviates {:.3e}, frozen -I model deviates {:.3e}",
            trace.max_model_dev, trace.max_naive_dev,
        );
    }
    println!("the exact deviation shrinks at fourth order; the frozen model's does not");
}
