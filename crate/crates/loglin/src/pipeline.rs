//! End-to-end chains gluing the pieces together: scenario -> feedback
//! gain -> invariant error set -> minimum-snap plan -> flow pipe ->
//! safety verdict.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::flowpipe::{
    build_flow_pipe, verify_safety, FlowError, FlowPipe, PipeConfig, RateBounds, SafetyReport,
};
use crate::scenario::Scenario;
use crate::se2::{ad, AlgebraVec};
use crate::sim::Reference;
use crate::synth::{
    distortion_bounded_ellipsoid, lqr_gain, no_inversion_ellipsoid, velocity_vertices,
    DistortionBound, FixedPointOptions, LqrSolution, SynthError,
};
use crate::trajectory::{FlatTrajectory, TrajError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Plan(#[from] TrajError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Pipe(#[from] FlowError),
    /// The plan leaves the velocity polytope the invariant set was
    /// certified for, so the certificate would not apply to it.
    #[error("plan leaves the certified velocity envelope at t = {t:.2}: {what} = {value:.3}")]
    EnvelopeViolation { t: f64, what: &'static str, value: f64 },
}

/// Verify that the planned body rates stay inside the scenario's velocity
/// polytope (the set the invariant certificate is issued for).
pub fn check_envelope(plan: &FlatTrajectory, sc: &Scenario) -> Result<(), PipelineError> {
    const SAMPLES: usize = 2000;
    const TOL: f64 = 1e-9;
    let (t0, t1) = (plan.start_time(), plan.end_time());
    for i in 0..=SAMPLES {
        let t = t0 + (t1 - t0) * i as f64 / SAMPLES as f64;
        let rate = plan.body_rate(t);
        if rate.x < sc.speed_bounds[0] - TOL || rate.x > sc.speed_bounds[1] + TOL {
            return Err(PipelineError::EnvelopeViolation { t, what: "speed", value: rate.x });
        }
        if rate.z.abs() > sc.omega_max + TOL {
            return Err(PipelineError::EnvelopeViolation { t, what: "|omega|", value: rate.z.abs() });
        }
    }
    Ok(())
}

/// LQR gain for the error dynamics linearized about forward cruise at the
/// centre of the scenario speed band.
pub fn design_gain(sc: &Scenario) -> Result<LqrSolution, SynthError> {
    let cruise = 0.5 * (sc.speed_bounds[0] + sc.speed_bounds[1]);
    let a = -ad(&AlgebraVec::new(cruise, 0.0, 0.0));
    lqr_gain(&a, &Matrix3::identity(), &sc.q(), &sc.r())
}

/// Gain plus certified invariant set for the scenario's velocity polytope
/// and disturbance level, under either control law.
pub fn synthesize(
    sc: &Scenario,
    no_inversion: bool,
) -> Result<(LqrSolution, DistortionBound), SynthError> {
    let lqr = design_gain(sc)?;
    let rates = velocity_vertices((sc.speed_bounds[0], sc.speed_bounds[1]), sc.omega_max);
    let opts = FixedPointOptions::default();
    let bound = if no_inversion {
        no_inversion_ellipsoid(&rates, &lqr.k, sc.w_max(), &opts)?
    } else {
        distortion_bounded_ellipsoid(&rates, &lqr.k, sc.w_max(), &opts)?
    };
    Ok((lqr, bound))
}

/// Sampled speed and turn-rate bounds along the plan, with a small
/// inflation for inter-sample variation.
pub fn reference_rate_bounds(plan: &FlatTrajectory) -> RateBounds {
    const SAMPLES: usize = 2000;
    let (t0, t1) = (plan.start_time(), plan.end_time());
    let mut turn = 0.0f64;
    for i in 0..=SAMPLES {
        let t = t0 + (t1 - t0) * i as f64 / SAMPLES as f64;
        turn = turn.max(plan.body_rate(t).z.abs());
    }
    let speed = plan.speed_range(SAMPLES).1;
    RateBounds { speed: 1.02 * speed, turn: 1.02 * turn + 1e-9 }
}

/// Everything produced on the way to a verdict.
pub struct Artifacts {
    pub lqr: LqrSolution,
    pub bound: DistortionBound,
    pub plan: FlatTrajectory,
    pub rates: RateBounds,
    pub pipe: FlowPipe,
    pub report: SafetyReport,
}

/// Full chain: synthesize the invariant set, plan through the waypoints,
/// build the pipe, and check it against the scenario obstacles.
pub fn verify_scenario(
    sc: &Scenario,
    no_inversion: bool,
    cfg: &PipeConfig,
) -> Result<Artifacts, PipelineError> {
    let (lqr, bound) = synthesize(sc, no_inversion)?;
    let plan = sc.plan()?;
    check_envelope(&plan, sc)?;
    let rates = reference_rate_bounds(&plan);
    let pipe = build_flow_pipe(
        &plan,
        &bound.ellipsoid,
        plan.start_time(),
        plan.end_time(),
        &rates,
        cfg,
    )?;
    let report = verify_safety(&pipe, &sc.obstacle_polygons());
    Ok(Artifacts { lqr, bound, plan, rates, pipe, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowpipe::Verdict;

    fn slow_corridor(obstacle_y: f64) -> Scenario {
        Scenario {
            name: "test".into(),
            waypoints: vec![[0.0, 0.0, 0.0], [5.0, 5.0, 0.0], [10.0, 10.0, 0.0]],
            speed_bounds: [0.8, 1.2],
            omega_max: 0.5,
            disturbance: [0.05, 0.05, 0.01],
            obstacles: vec![vec![
                [4.0, obstacle_y],
                [6.0, obstacle_y],
                [6.0, obstacle_y + 1.0],
                [4.0, obstacle_y + 1.0],
            ]],
            seed: 1,
            q_diag: [1.0, 1.0, 1.0],
            r_diag: [1.0, 1.0, 1.0],
        }
    }

    #[test]
    fn clear_corridor_passes_and_blocked_corridor_fails() {
        let cfg = PipeConfig::default();
        let far = verify_scenario(&slow_corridor(8.0), false, &cfg).unwrap();
        assert_eq!(far.report.verdict, Verdict::Safe);
        assert!(!far.pipe.windows.is_empty());

        // An obstacle straddling the path must be flagged.
        let near = verify_scenario(&slow_corridor(-0.5), false, &cfg).unwrap();
        assert_eq!(near.report.verdict, Verdict::Unsafe);
        assert!(!near.report.hits.is_empty());
    }

    #[test]
    fn skipping_the_inversion_grows_the_certified_set() {
        let sc = slow_corridor(8.0);
        let (_, with) = synthesize(&sc, false).unwrap();
        let (_, without) = synthesize(&sc, true).unwrap();
        assert_eq!(with.beta, 0.0);
        assert!(without.beta > 0.0);
        assert!(without.ellipsoid.mean_semi_axis() >= with.ellipsoid.mean_semi_axis());
    }
}
