//! Minimum-snap trajectory planning through planar waypoints, with flat
//! outputs driving the reference pose.
//!
//! Each segment is a degree-7 polynomial per axis in normalized time
//! `tau = (t - t_k)/dt_k`; the planner minimizes the integral of squared
//! snap subject to waypoint interpolation, continuity of the first four
//! derivatives at interior knots, and fixed velocity/acceleration/jerk at
//! both ends.  The equality-constrained quadratic program is solved as one
//! KKT system per axis.
//!
//! The planned curve doubles as a reference motion: heading follows the
//! velocity (`theta = atan2(ydot, xdot)`), so the body-frame rate is
//! `(speed, 0, curvature * speed)` — a unicycle-consistent reference with
//! no lateral velocity.

use nalgebra::{DMatrix, DVector, Vector2};
use thiserror::Error;

use crate::se2::{AlgebraVec, SE2};
use crate::sim::Reference;

/// Headings are undefined where the reference stops; plans whose speed
/// dips below this are rejected.
pub const V_MIN: f64 = 0.1;

/// Grid density (per segment) for the speed floor check.
const SPEED_CHECK_SAMPLES: usize = 200;

/// KKT condition-number limit before the solve is reported as unusable.
const COND_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("need at least two waypoints, got {0}")]
    NotEnoughWaypoints(usize),
    #[error("waypoint times must be strictly increasing (t[{index}] = {t})")]
    NonIncreasingTimes { index: usize, t: f64 },
    #[error("planning system is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("planned speed drops to {speed:.4} at t = {t:.3}, below the floor {V_MIN}")]
    SlowsBelowMinimum { t: f64, speed: f64 },
}

/// Endpoint derivative constraints for one end of the plan.
#[derive(Clone, Copy, Debug, Default)]
pub struct Boundary {
    pub vel: Vector2<f64>,
    pub acc: Vector2<f64>,
    pub jerk: Vector2<f64>,
}

impl Boundary {
    pub fn cruising(vel: Vector2<f64>) -> Self {
        Boundary { vel, ..Default::default() }
    }
}

/// Piecewise degree-7 plan; evaluation clamps to the planned interval.
#[derive(Clone, Debug)]
pub struct FlatTrajectory {
    times: Vec<f64>,
    coeffs_x: Vec<[f64; 8]>,
    coeffs_y: Vec<[f64; 8]>,
}

/// Falling factorial `j (j-1) ... (j-m+1)`: the coefficient of the m-th
/// derivative of `tau^j`.
fn falling(j: usize, m: usize) -> f64 {
    (j + 1 - m..=j).product::<usize>() as f64
}

/// Row of the m-th tau-derivative of the coefficient vector at `tau`.
fn deriv_row(tau: f64, m: usize) -> [f64; 8] {
    let mut row = [0.0; 8];
    for (j, r) in row.iter_mut().enumerate() {
        if j >= m {
            *r = falling(j, m) * tau.powi((j - m) as i32);
        }
    }
    row
}

fn eval_deriv(c: &[f64; 8], tau: f64, m: usize) -> f64 {
    // Horner on the m-th derivative coefficients.
    let mut acc = 0.0;
    for j in (m..8).rev() {
        acc = acc * tau + falling(j, m) * c[j];
    }
    acc
}

/// Minimum-snap plan through `(time, position)` waypoints with endpoint
/// derivatives pinned to `start` and `end`.
pub fn plan_min_snap(
    waypoints: &[(f64, Vector2<f64>)],
    start: &Boundary,
    end: &Boundary,
) -> Result<FlatTrajectory, TrajError> {
    if waypoints.len() < 2 {
        return Err(TrajError::NotEnoughWaypoints(waypoints.len()));
    }
    for (i, pair) in waypoints.windows(2).enumerate() {
        if pair[1].0 <= pair[0].0 {
            return Err(TrajError::NonIncreasingTimes { index: i + 1, t: pair[1].0 });
        }
    }
    let n = waypoints.len() - 1;
    let durations: Vec<f64> = waypoints.windows(2).map(|p| p[1].0 - p[0].0).collect();

    // Snap cost: H is block-diagonal, per segment
    // H[j][l] = falling(j,4) falling(l,4) / (j + l - 7) / dt^7, j,l >= 4.
    let nv = 8 * n;
    let mut h = DMatrix::<f64>::zeros(nv, nv);
    for (k, &dt) in durations.iter().enumerate() {
        let scale = dt.powi(7);
        for j in 4..8 {
            for l in 4..8 {
                h[(8 * k + j, 8 * k + l)] =
                    falling(j, 4) * falling(l, 4) / ((j + l - 7) as f64) / scale;
            }
        }
    }

    // Equality constraints, shared by both axes.
    let nc = 2 * n + 4 * (n - 1) + 6;
    let mut a = DMatrix::<f64>::zeros(nc, nv);
    let mut bx = DVector::<f64>::zeros(nc);
    let mut by = DVector::<f64>::zeros(nc);
    let mut row = 0;
    let push = |a: &mut DMatrix<f64>, bx: &mut DVector<f64>, by: &mut DVector<f64>,
                    row: &mut usize,
                    seg: usize,
                    tau: f64,
                    m: usize,
                    scale: f64,
                    rhs: Vector2<f64>| {
        let r = deriv_row(tau, m);
        for j in 0..8 {
            a[(*row, 8 * seg + j)] = scale * r[j];
        }
        bx[*row] = rhs.x;
        by[*row] = rhs.y;
        *row += 1;
    };

    for k in 0..n {
        push(&mut a, &mut bx, &mut by, &mut row, k, 0.0, 0, 1.0, waypoints[k].1);
        push(&mut a, &mut bx, &mut by, &mut row, k, 1.0, 0, 1.0, waypoints[k + 1].1);
    }
    // Interior continuity of derivatives 1..4 in physical time.
    for k in 0..n - 1 {
        for m in 1..=4 {
            let r_end = deriv_row(1.0, m);
            let r_start = deriv_row(0.0, m);
            let s_left = durations[k].powi(-(m as i32));
            let s_right = durations[k + 1].powi(-(m as i32));
            for j in 0..8 {
                a[(row, 8 * k + j)] = s_left * r_end[j];
                a[(row, 8 * (k + 1) + j)] = -s_right * r_start[j];
            }
            row += 1;
        }
    }
    // Endpoint derivatives in physical time.
    for (m, v) in [(1, start.vel), (2, start.acc), (3, start.jerk)] {
        push(&mut a, &mut bx, &mut by, &mut row, 0, 0.0, m, durations[0].powi(-(m as i32)), v);
    }
    for (m, v) in [(1, end.vel), (2, end.acc), (3, end.jerk)] {
        push(&mut a, &mut bx, &mut by, &mut row, n - 1, 1.0, m, durations[n - 1].powi(-(m as i32)), v);
    }
    debug_assert_eq!(row, nc);

    // KKT system [[H, A^T], [A, 0]]; H is only positive semidefinite but
    // the boundary constraints remove its null directions.
    let dim = nv + nc;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    kkt.view_mut((0, 0), (nv, nv)).copy_from(&h);
    kkt.view_mut((0, nv), (nv, nc)).copy_from(&a.transpose());
    kkt.view_mut((nv, 0), (nc, nv)).copy_from(&a);

    // Symmetric equilibration (Ruiz sweeps): the raw system mixes meters,
    // derivative scales and snap weights, which inflates the condition
    // number without making the solve any less accurate.  Conditioning is
    // judged on the system actually factorized.
    let mut d = DVector::<f64>::from_element(dim, 1.0);
    let mut scaled = kkt.clone();
    for _ in 0..3 {
        for i in 0..dim {
            let r = scaled.row(i).amax();
            if r > 0.0 {
                d[i] /= r.sqrt();
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                scaled[(i, j)] = kkt[(i, j)] * d[i] * d[j];
            }
        }
    }

    let svd = scaled.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin;
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(TrajError::IllConditioned { cond });
    }
    let lu = scaled.lu();
    let solve = |b: &DVector<f64>| -> DVector<f64> {
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(nv, nc).copy_from(b);
        let y = lu.solve(&rhs.component_mul(&d)).expect("condition number checked above");
        y.component_mul(&d)
    };
    let cx = solve(&bx);
    let cy = solve(&by);

    let unpack = |c: &DVector<f64>| -> Vec<[f64; 8]> {
        (0..n).map(|k| std::array::from_fn(|j| c[8 * k + j])).collect()
    };
    let traj = FlatTrajectory {
        times: waypoints.iter().map(|w| w.0).collect(),
        coeffs_x: unpack(&cx),
        coeffs_y: unpack(&cy),
    };

    // Well-defined heading everywhere: reject plans that stall.
    for (k, dur) in durations.iter().enumerate().take(n) {
        for i in 0..=SPEED_CHECK_SAMPLES {
            let t = traj.times[k] + dur * i as f64 / SPEED_CHECK_SAMPLES as f64;
            let speed = traj.velocity(t).norm();
            if speed < V_MIN {
                return Err(TrajError::SlowsBelowMinimum { t, speed });
            }
        }
    }
    Ok(traj)
}

impl FlatTrajectory {
    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Segment index and clamped normalized time for `t`.
    fn locate(&self, t: f64) -> (usize, f64, f64) {
        let t = t.clamp(self.start_time(), self.end_time());
        let k = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => i.min(self.times.len() - 2),
            Err(i) => i - 1,
        };
        let dt = self.times[k + 1] - self.times[k];
        ((k), (t - self.times[k]) / dt, dt)
    }

    /// m-th time derivative of the planned position.
    pub fn deriv(&self, t: f64, m: usize) -> Vector2<f64> {
        let (k, tau, dt) = self.locate(t);
        let scale = dt.powi(-(m as i32));
        Vector2::new(
            scale * eval_deriv(&self.coeffs_x[k], tau, m),
            scale * eval_deriv(&self.coeffs_y[k], tau, m),
        )
    }

    pub fn position(&self, t: f64) -> Vector2<f64> {
        self.deriv(t, 0)
    }

    pub fn velocity(&self, t: f64) -> Vector2<f64> {
        self.deriv(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> Vector2<f64> {
        self.deriv(t, 2)
    }

    pub fn heading(&self, t: f64) -> f64 {
        let v = self.velocity(t);
        v.y.atan2(v.x)
    }

    /// Total integral of squared snap over both axes.
    pub fn snap_cost(&self) -> f64 {
        let mut j = 0.0;
        for k in 0..self.coeffs_x.len() {
            let dt = self.times[k + 1] - self.times[k];
            for c in [&self.coeffs_x[k], &self.coeffs_y[k]] {
                for a in 4..8 {
                    for b in 4..8 {
                        j += falling(a, 4) * falling(b, 4) * c[a] * c[b]
                            / ((a + b - 7) as f64)
                            / dt.powi(7);
                    }
                }
            }
        }
        j
    }

    /// Min and max speed over a fine grid.
    pub fn speed_range(&self, samples: usize) -> (f64, f64) {
        let (t0, t1) = (self.start_time(), self.end_time());
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=samples {
            let s = self.velocity(t0 + (t1 - t0) * i as f64 / samples as f64).norm();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        (lo, hi)
    }
}

impl Reference for FlatTrajectory {
    fn pose(&self, t: f64) -> SE2 {
        let p = self.position(t);
        SE2::new(p.x, p.y, self.heading(t))
    }

    /// Flat-output body rate `(speed, 0, turn rate)`: with the heading
    /// locked to the velocity there is no lateral motion, and the turn
    /// rate is the angular rate of `atan2(ydot, xdot)`.
    fn body_rate(&self, t: f64) -> AlgebraVec {
        let v = self.velocity(t);
        let a = self.acceleration(t);
        let v2 = v.norm_squared();
        AlgebraVec::new(v2.sqrt(), 0.0, (v.x * a.y - v.y * a.x) / v2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn three_point_plan() -> FlatTrajectory {
        let wps = [
            (0.0, Vector2::new(0.0, 0.0)),
            (5.0, Vector2::new(95.0, 8.0)),
            (10.0, Vector2::new(190.0, 0.0)),
        ];
        plan_min_snap(
            &wps,
            &Boundary::cruising(Vector2::new(19.0, 0.0)),
            &Boundary::cruising(Vector2::new(19.0, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn straight_cruise_is_reproduced_exactly() {
        // Collinear waypoints at constant speed with matching endpoint
        // velocities: the unique snap-free feasible plan is the line.
        let wps = [
            (0.0, Vector2::new(1.0, 2.0)),
            (3.0, Vector2::new(7.0, 5.0)),
            (8.0, Vector2::new(17.0, 10.0)),
        ];
        let v = Vector2::new(2.0, 1.0);
        let traj = plan_min_snap(&wps, &Boundary::cruising(v), &Boundary::cruising(v)).unwrap();
        assert!(traj.snap_cost() < 1e-14);
        for &t in &[0.0, 0.7, 2.9, 3.0, 5.5, 8.0] {
            let expect = Vector2::new(1.0, 2.0) + t * v;
            assert_relative_eq!(traj.position(t), expect, epsilon = 1e-8);
            assert_relative_eq!(traj.velocity(t), v, epsilon = 1e-8);
        }
    }

    #[test]
    fn waypoints_and_boundaries_are_interpolated() {
        let traj = three_point_plan();
        assert_relative_eq!(traj.position(0.0), Vector2::new(0.0, 0.0), epsilon = 1e-9);
        assert_relative_eq!(traj.position(5.0), Vector2::new(95.0, 8.0), epsilon = 1e-9);
        assert_relative_eq!(traj.position(10.0), Vector2::new(190.0, 0.0), epsilon = 1e-9);
        assert_relative_eq!(traj.velocity(0.0), Vector2::new(19.0, 0.0), epsilon = 1e-9);
        assert_relative_eq!(traj.velocity(10.0), Vector2::new(19.0, 0.0), epsilon = 1e-9);
        assert!(traj.acceleration(0.0).norm() < 1e-9);
        assert!(traj.deriv(0.0, 3).norm() < 1e-8);
    }

    #[test]
    fn derivatives_are_continuous_at_interior_knots() {
        let traj = three_point_plan();
        for m in 1..=4 {
            let left = traj.deriv(5.0 - 1e-12, m);
            let right = traj.deriv(5.0 + 1e-12, m);
            assert_relative_eq!(left, right, epsilon = 1e-6, max_relative = 1e-6);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let traj = three_point_plan();
        let h = 1e-5;
        for &t in &[1.3, 4.9, 7.2] {
            let fd_v = (traj.position(t + h) - traj.position(t - h)) / (2.0 * h);
            assert_relative_eq!(fd_v, traj.velocity(t), epsilon = 1e-6, max_relative = 1e-6);
            let fd_a = (traj.velocity(t + h) - traj.velocity(t - h)) / (2.0 * h);
            assert_relative_eq!(fd_a, traj.acceleration(t), epsilon = 1e-5, max_relative = 1e-5);
        }
    }

    #[test]
    fn no_feasible_competitor_beats_the_plan() {
        // Perturbing along the constraint null space keeps feasibility;
        // optimality of the convex objective means no such move wins.
        let wps = [
            (0.0, Vector2::new(0.0, 0.0)),
            (4.0, Vector2::new(60.0, 10.0)),
            (10.0, Vector2::new(150.0, -5.0)),
        ];
        let start = Boundary::cruising(Vector2::new(15.0, 1.0));
        let end = Boundary::cruising(Vector2::new(15.0, -1.0));
        let traj = plan_min_snap(&wps, &start, &end).unwrap();
        let base = traj.snap_cost();

        // Competitors satisfying every constraint of the original problem:
        // re-plans forced through an extra interior waypoint (pinning a
        // point restricts the feasible set, so costs can only go up, and
        // pinning a point *on* the optimum must reproduce its cost).
        for trial in 0..16 {
            let t_mid = 2.0 + 0.35 * trial as f64;
            let off = Vector2::new(0.0, 0.3 + 0.1 * (trial % 5) as f64);
            let extra = (t_mid, traj.position(t_mid) + off);
            let mut wps2: Vec<(f64, Vector2<f64>)> = wps.to_vec();
            let pos = wps2.iter().position(|w| w.0 > t_mid).unwrap();
            wps2.insert(pos, extra);
            let competitor = plan_min_snap(&wps2, &start, &end).unwrap();
            assert!(
                competitor.snap_cost() >= base - 1e-9 * base.abs(),
                "competitor beat the optimum: {} < {}",
                competitor.snap_cost(),
                base
            );
        }
        let on_path = (3.0, traj.position(3.0));
        let mut wps3: Vec<(f64, Vector2<f64>)> = wps.to_vec();
        wps3.insert(1, on_path);
        let same = plan_min_snap(&wps3, &start, &end).unwrap();
        assert_relative_eq!(same.snap_cost(), base, max_relative = 1e-6);
    }

    #[test]
    fn pose_rate_matches_body_rate_through_the_exponential() {
        // d/dt pose = pose * wedge(body_rate): check with a log-domain
        // finite difference.
        let traj = three_point_plan();
        let h = 1e-6;
        for &t in &[0.8, 3.3, 6.1, 9.4] {
            let x0 = traj.pose(t);
            let x1 = traj.pose(t + h);
            let fd = (x0.inverse() * x1).log().unwrap() / h;
            let rate = traj.body_rate(t);
            assert_relative_eq!(fd, rate, epsilon = 1e-4, max_relative = 1e-4);
        }
    }

    #[test]
    fn cruise_plan_speed_stays_near_nominal() {
        let traj = three_point_plan();
        let (lo, hi) = traj.speed_range(2000);
        assert!(lo > 17.0 && hi < 21.0, "speed range [{lo:.2}, {hi:.2}]");
        assert!(lo > V_MIN);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let one = [(0.0, Vector2::new(0.0, 0.0))];
        assert!(matches!(
            plan_min_snap(&one, &Boundary::default(), &Boundary::default()),
            Err(TrajError::NotEnoughWaypoints(1))
        ));

        let bad_times = [
            (0.0, Vector2::new(0.0, 0.0)),
            (2.0, Vector2::new(1.0, 0.0)),
            (2.0, Vector2::new(2.0, 0.0)),
        ];
        assert!(matches!(
            plan_min_snap(&bad_times, &Boundary::default(), &Boundary::default()),
            Err(TrajError::NonIncreasingTimes { index: 2, .. })
        ));

        // Out-and-back with zero endpoint speeds must stall somewhere.
        let stall = [(0.0, Vector2::new(0.0, 0.0)), (4.0, Vector2::new(1.0, 0.0))];
        assert!(matches!(
            plan_min_snap(&stall, &Boundary::default(), &Boundary::default()),
            Err(TrajError::SlowsBelowMinimum { .. })
        ));
    }

    #[test]
    fn evaluation_clamps_outside_the_planned_window() {
        let traj = three_point_plan();
        assert_relative_eq!(traj.position(-1.0), traj.position(0.0), epsilon = 1e-12);
        assert_relative_eq!(traj.position(11.0), traj.position(10.0), epsilon = 1e-12);
    }
}
