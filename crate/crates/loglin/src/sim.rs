//! Closed-loop simulation on SE(2).
//!
//! The group state follows the mixed-invariant plant
//! `Xdot = X wedge(u_l) + wedge(u_r) X` and is integrated with a
//! fourth-order Runge-Kutta/Munthe-Kaas scheme in the exponential chart:
//! within a step the state is `X_n * exp(wedge(xi))` and the chart ODE is
//! `xidot = Jr(xi)^{-1} l_eff`, with `l_eff = u_l + Ad(X^{-1}) u_r` the
//! left-trivialized rate.  `Jr(xi)^{-1} = -u_left(-xi)` in closed form.
//!
//! The disturbance is a body-frame rate added to the control channel --
//! the same channel the invariant-set synthesis bounds.  (A world twist
//! `u_r` can still be driven through the open-loop integrator by folding
//! `Ad(X^{-1}) u_r` into the rate closure.)
//!
//! Alongside the group state the simulator integrates two predictions of
//! the log error with plain vector RK4 at the same stage times:
//!
//! * `zeta_model`: the exact log-linear dynamics (distortion included);
//! * `zeta_naive`: the linearization that freezes the distortion at its
//!   value for zero error, `U(0) = -I`.
//!
//! Both are self-contained, so the gap between them and the log of the
//! actual group error measures model fidelity, not integration coupling.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::error_dyn::{inversion_control, left_error, left_log_rhs};
use crate::se2::{ad, u_left, AlgebraVec, LieError, SE2};

/// Reference motion: a pose trajectory together with the body-frame rate
/// it follows, `Xbardot = Xbar wedge(body_rate)`.
pub trait Reference {
    fn pose(&self, t: f64) -> SE2;
    fn body_rate(&self, t: f64) -> AlgebraVec;
}

/// Reference moving with a constant body-frame twist from a start pose.
#[derive(Clone, Copy, Debug)]
pub struct ConstantTwist {
    pub start: SE2,
    pub rate: AlgebraVec,
}

impl Reference for ConstantTwist {
    fn pose(&self, t: f64) -> SE2 {
        self.start * SE2::exp(&(t * self.rate))
    }
    fn body_rate(&self, _t: f64) -> AlgebraVec {
        self.rate
    }
}

/// Feedback law applied on top of the reference body rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlLaw {
    /// Exact distortion inversion `u = u_left_inv(zeta) G zeta`.
    Inversion,
    /// Zeroth-order inversion: the distortion inverse is frozen at its
    /// zero-error value `u_left_inv(0) = -I`, giving `u = -G zeta`.
    NoInversion,
}

impl ControlLaw {
    pub fn correction(&self, zeta: &AlgebraVec, gain: &Matrix3<f64>) -> AlgebraVec {
        match self {
            ControlLaw::Inversion => inversion_control(zeta, gain),
            ControlLaw::NoInversion => -(gain * zeta),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("tracking error crossed the +-pi heading branch at t = {t:.4}")]
    AngleWrap { t: f64 },
    #[error("tracking error diverged at t = {t:.4} (|zeta| = {norm:.3e})")]
    Diverged { t: f64, norm: f64 },
}

pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Abort when the group log error exceeds this norm.
    pub abort_radius: f64,
    /// Keep every n-th sample in the trace (deviation maxima are still
    /// tracked at every step).
    pub record_stride: usize,
    /// Optional quadratic form; the maximum of `zeta^T P zeta` over all
    /// steps is reported, for containment checks against an ellipsoid.
    pub quad_form: Option<Matrix3<f64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-3, t_end: 10.0, abort_radius: 10.0, record_stride: 1, quad_form: None }
    }
}

/// Closed-loop problem: reference, body-frame disturbance `w(t)`, and the
/// feedback `gain` matrix applied through `law`.
pub struct ClosedLoop<'a> {
    pub reference: &'a dyn Reference,
    pub disturbance: &'a dyn Fn(f64) -> AlgebraVec,
    pub gain: Matrix3<f64>,
    pub law: ControlLaw,
}

pub struct Trace {
    pub t: Vec<f64>,
    pub pose: Vec<SE2>,
    pub ref_pose: Vec<SE2>,
    /// Log error recomputed from the group states at the saved instants.
    pub zeta_group: Vec<AlgebraVec>,
    pub zeta_model: Vec<AlgebraVec>,
    pub zeta_naive: Vec<AlgebraVec>,
    /// Body-frame input applied at the saved instants.
    pub control: Vec<AlgebraVec>,
    /// max over all steps of |zeta_model - zeta_group|.
    pub max_model_dev: f64,
    /// max over all steps of |zeta_naive - zeta_group|.
    pub max_naive_dev: f64,
    /// Componentwise max of |u_l - body_rate| over all steps.
    pub max_abs_control: AlgebraVec,
    /// max over all steps of zeta^T P zeta, when a form was supplied.
    pub max_quad: f64,
}

/// `Jr(xi)^{-1}`, the chart derivative of the exponential map.
fn dexpinv(xi: &AlgebraVec) -> Result<Matrix3<f64>, LieError> {
    Ok(-u_left(&-xi)?)
}

/// One RK4 step of `xdot = f(t, x)` for plain vectors.
fn rk4_vec<F>(t: f64, h: f64, x: &AlgebraVec, mut f: F) -> Result<AlgebraVec, LieError>
where
    F: FnMut(f64, &AlgebraVec) -> Result<AlgebraVec, LieError>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + h / 2.0, &(x + h / 2.0 * k1))?;
    let k3 = f(t + h / 2.0, &(x + h / 2.0 * k2))?;
    let k4 = f(t + h, &(x + h * k3))?;
    Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// One Runge-Kutta/Munthe-Kaas step for `Xdot = X wedge(rate(t, X))`.
///
/// `rate` returns the left-trivialized body rate at a stage state.
pub fn rkmk4_step<F>(t: f64, h: f64, x: &SE2, mut rate: F) -> Result<SE2, LieError>
where
    F: FnMut(f64, &SE2) -> Result<AlgebraVec, LieError>,
{
    let f = |tau: f64, xi: &AlgebraVec, rate: &mut F| -> Result<AlgebraVec, LieError> {
        let stage = *x * SE2::exp(xi);
        Ok(dexpinv(xi)? * rate(tau, &stage)?)
    };
    let zero = AlgebraVec::zeros();
    let k1 = f(t, &zero, &mut rate)?;
    let k2 = f(t + h / 2.0, &(h / 2.0 * k1), &mut rate)?;
    let k3 = f(t + h / 2.0, &(h / 2.0 * k2), &mut rate)?;
    let k4 = f(t + h, &(h * k3), &mut rate)?;
    let xi = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Ok(*x * SE2::exp(&xi))
}

/// Integrates the closed loop from the initial pose `x0`.
///
/// Both log-domain predictions start from the measured initial error and
/// evolve independently of the group state.
pub fn simulate(cl: &ClosedLoop, x0: &SE2, cfg: &SimConfig) -> Result<Trace, SimError> {
    let wrap = |e: LieError, t: f64| match e {
        LieError::BranchSingularity { .. } => SimError::AngleWrap { t },
        LieError::StructureViolation(_) => SimError::AngleWrap { t },
    };

    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut x = *x0;
    let zeta0 = left_error(&x, &cl.reference.pose(0.0)).map_err(|e| wrap(e, 0.0))?;
    let mut zeta_model = zeta0;
    let mut zeta_naive = zeta0;

    let cap = n_steps / cfg.record_stride.max(1) + 2;
    let mut trace = Trace {
        t: Vec::with_capacity(cap),
        pose: Vec::with_capacity(cap),
        ref_pose: Vec::with_capacity(cap),
        zeta_group: Vec::with_capacity(cap),
        zeta_model: Vec::with_capacity(cap),
        zeta_naive: Vec::with_capacity(cap),
        control: Vec::with_capacity(cap),
        max_model_dev: 0.0,
        max_naive_dev: 0.0,
        max_abs_control: AlgebraVec::zeros(),
        max_quad: 0.0,
    };

    // Left-trivialized plant rate under feedback, used by the group stages.
    let group_rate = |tau: f64, state: &SE2| -> Result<AlgebraVec, LieError> {
        let zeta = left_error(state, &cl.reference.pose(tau))?;
        let u_l = cl.reference.body_rate(tau) + cl.law.correction(&zeta, &cl.gain);
        Ok(u_l + (cl.disturbance)(tau))
    };
    // Exact log-domain dynamics.
    let model_rhs = |tau: f64, zeta: &AlgebraVec| -> Result<AlgebraVec, LieError> {
        let u = cl.law.correction(zeta, &cl.gain);
        left_log_rhs(zeta, &cl.reference.body_rate(tau), &u, &(cl.disturbance)(tau))
    };
    // Naive propagation: distortion frozen at U(0) = -I for feedback and
    // disturbance alike, leaving zetadot = (-ad(l) + G) zeta - w.
    let naive_rhs = |tau: f64, zeta: &AlgebraVec| -> Result<AlgebraVec, LieError> {
        Ok((-ad(&cl.reference.body_rate(tau)) + cl.gain) * zeta - (cl.disturbance)(tau))
    };

    let mut record =
        |step: usize, t: f64, x: &SE2, zg: &AlgebraVec, zm: &AlgebraVec, zn: &AlgebraVec, u: &AlgebraVec| {
            if step.is_multiple_of(cfg.record_stride.max(1)) {
                trace.t.push(t);
                trace.pose.push(*x);
                trace.ref_pose.push(cl.reference.pose(t));
                trace.zeta_group.push(*zg);
                trace.zeta_model.push(*zm);
                trace.zeta_naive.push(*zn);
                trace.control.push(*u);
            }
        };

    for step in 0..=n_steps {
        let t = step as f64 * cfg.dt;
        let zeta_group = left_error(&x, &cl.reference.pose(t)).map_err(|e| wrap(e, t))?;
        let norm = zeta_group.norm();
        if norm > cfg.abort_radius {
            return Err(SimError::Diverged { t, norm });
        }

        trace.max_model_dev = trace.max_model_dev.max((zeta_model - zeta_group).norm());
        trace.max_naive_dev = trace.max_naive_dev.max((zeta_naive - zeta_group).norm());
        let u_corr = cl.law.correction(&zeta_group, &cl.gain);
        trace.max_abs_control = trace.max_abs_control.sup(&u_corr.abs());
        if let Some(p) = &cfg.quad_form {
            trace.max_quad = trace.max_quad.max((zeta_group.transpose() * p * zeta_group)[0]);
        }
        record(step, t, &x, &zeta_group, &zeta_model, &zeta_naive, &u_corr);

        if step == n_steps {
            break;
        }
        x = rkmk4_step(t, cfg.dt, &x, group_rate).map_err(|e| wrap(e, t))?;
        zeta_model = rk4_vec(t, cfg.dt, &zeta_model, model_rhs).map_err(|e| wrap(e, t))?;
        zeta_naive = rk4_vec(t, cfg.dt, &zeta_naive, naive_rhs).map_err(|e| wrap(e, t))?;
    }
    Ok(trace)
}

/// Runs `jobs` independent simulations in parallel and returns the results
/// in index order.  Workers claim the next unstarted index, so the output
/// never depends on the thread count; determinism is the caller's business
/// (derive each run's seed from its index).
pub fn parallel_traces<F>(jobs: usize, run: F) -> Vec<Result<Trace, SimError>>
where
    F: Fn(usize) -> Result<Trace, SimError> + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.max(1));
    let next = AtomicUsize::new(0);
    let out = std::sync::Mutex::new((0..jobs).map(|_| None).collect::<Vec<_>>());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let r = run(i);
                out.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(|r| r.expect("every job index claimed")).collect()
}
