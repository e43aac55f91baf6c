//! Plans a minimum-snap flat trajectory through waypoints and lifts it to
//! an SE(2) reference whose heading follows the velocity direction.

use loglin::sim::Reference;
use loglin::trajectory::{plan_min_snap, Boundary};
use nalgebra::Vector2;

fn main() {
    let waypoints = [
        (0.0, Vector2::new(0.0, 0.0)),
        (4.0, Vector2::new(6.0, 3.0)),
        (8.0, Vector2::new(12.0, 0.0)),
        (12.0, Vector2::new(18.0, 3.0)),
    ];
    let start = Boundary::cruising(Vector2::new(1.5, 0.75));
    let end = Boundary::cruising(Vector2::new(1.5, 0.75));
    let plan = plan_min_snap(&waypoints, &start, &end).unwrap();

    let (lo, hi) = plan.speed_range(400);
    println!("snap cost {:.3e}, speed range [{lo:.3}, {hi:.3}] m/s", plan.snap_cost());
    println!("  t     x       y       heading  speed   omega");
    for i in 0..=6 {
        let t = 12.0 * i as f64 / 6.0;
        let p = plan.position(t);
        let rate = plan.body_rate(t);
        println!(
            "{t:5.1} {:7.3} {:7.3} {:8.3} {:7.3} {:7.3}",
            p.x,
            p.y,
            plan.pose(t).angle(),
            rate.x,
            rate.z,
        );
    }
}
