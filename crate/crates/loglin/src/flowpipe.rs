//! Flow pipes: convex over-approximations of every planar position the
//! vehicle can occupy while its tracking error stays inside a certified
//! invariant set.  Each time window combines an interval hull of the
//! reference positions (Lipschitz-inflated between samples), a rotation
//! sweep over the reference heading range, and the projected footprint of
//! the error set.  Safety against polygonal obstacles is then a
//! separating-axis check per window.

use nalgebra::{Rotation2, Vector2};
use thiserror::Error;

use crate::geom::{disk_cover, rect, Polygon};
use crate::se2::SE2;
use crate::sim::Reference;
use crate::synth::Ellipsoid;

type P2 = Vector2<f64>;

/// Floor on box inflation so a stationary reference still yields a
/// non-degenerate window polygon.
const EPS_BOX: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FlowError {
    /// The heading range inside one window reaches a half turn; the chord
    /// bound behind the rotation sweep no longer applies.  Shorten the
    /// window or slow the turn.
    #[error("heading span {span:.3} rad reaches a half turn inside one window")]
    SpanTooLarge { span: f64 },
    #[error("flow-pipe horizon is empty (t1 <= t0)")]
    EmptyHorizon,
}

/// Tuning knobs for pipe construction.  Defaults trade a few percent of
/// conservatism for speed.
#[derive(Clone, Copy, Debug)]
pub struct PipeConfig {
    /// Window length in seconds.
    pub window: f64,
    /// Reference samples per window for the translation/heading hulls.
    pub subsamples: usize,
    /// Ellipsoid boundary directions used for the footprint projection.
    pub boundary_dirs: usize,
    /// Rotation steps in the heading sweep.
    pub sweep_steps: usize,
    /// Dilation factor applied to the sampled footprint hull to cover
    /// boundary curvature between samples.
    pub dilation: f64,
}

impl Default for PipeConfig {
    fn default() -> Self {
        PipeConfig {
            window: 0.5,
            subsamples: 32,
            boundary_dirs: 256,
            sweep_steps: 32,
            dilation: 1.01,
        }
    }
}

/// Rates bounding how fast the reference can move, used for inter-sample
/// inflation: `speed` bounds the translational speed, `turn` the heading
/// rate.
#[derive(Clone, Copy, Debug)]
pub struct RateBounds {
    pub speed: f64,
    pub turn: f64,
}

/// One time window of the pipe with its occupancy polygon.
#[derive(Clone, Debug)]
pub struct PipeWindow {
    pub t0: f64,
    pub t1: f64,
    /// Unwrapped reference heading range covered by the rotation sweep.
    pub heading: (f64, f64),
    pub region: Polygon,
}

#[derive(Clone, Debug)]
pub struct FlowPipe {
    pub windows: Vec<PipeWindow>,
}

impl FlowPipe {
    /// Window whose span contains `t` (the final window is closed on the
    /// right).
    pub fn window_at(&self, t: f64) -> Option<&PipeWindow> {
        self.windows.iter().find(|w| t >= w.t0 && t <= w.t1)
    }

    /// True when some window spanning `t` contains the point.
    pub fn covers(&self, t: f64, p: &P2) -> bool {
        self.windows
            .iter()
            .filter(|w| t >= w.t0 - 1e-12 && t <= w.t1 + 1e-12)
            .any(|w| w.region.contains_point(p))
    }
}

/// Planar footprint of the poses `pose * exp(-zeta)` reachable while the
/// tracking error `zeta` stays inside `ell`: boundary samples are pushed
/// through the exponential, hulled, and dilated about an interior point.
pub fn project_invariant_set(ell: &Ellipsoid, pose: &SE2, n_dirs: usize, dilation: f64) -> Polygon {
    let pts: Vec<P2> = ell
        .boundary_points(n_dirs)
        .iter()
        .map(|zeta| (*pose * SE2::exp(&-zeta)).translation())
        .collect();
    let hull = Polygon::convex_hull(&pts);
    hull.scale_about(&hull.vertex_mean(), dilation)
}

/// Over-approximate the union of `R(theta) * poly` for `theta` in
/// `[lo, hi]`: hull the rotation samples and pad by the chord bound
/// `r * dtheta / 2` between consecutive samples.
pub fn sweep_rotation(poly: &Polygon, lo: f64, hi: f64, steps: usize) -> Result<Polygon, FlowError> {
    let span = hi - lo;
    if span >= std::f64::consts::PI {
        return Err(FlowError::SpanTooLarge { span });
    }
    let steps = steps.max(2);
    let mut pts = Vec::with_capacity(steps * poly.vertices().len());
    for k in 0..steps {
        let theta = lo + span * k as f64 / (steps - 1) as f64;
        let rot = Rotation2::new(theta);
        pts.extend(poly.vertices().iter().map(|v| rot * v));
    }
    let hull = Polygon::convex_hull(&pts);
    let radius = poly.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let pad = radius * span / (steps - 1) as f64 / 2.0;
    if pad < 1e-12 {
        return Ok(hull);
    }
    Ok(hull.minkowski_sum(&disk_cover(&P2::zeros(), pad, 16)))
}

/// Build the pipe over `[t0, t1]`.  Per window the reference positions are
/// boxed and inflated by `rates.speed * gap` (gap = sample spacing), the
/// heading range is inflated by `rates.turn * gap`, and the window region
/// is the box summed with the heading-swept error footprint.
pub fn build_flow_pipe(
    reference: &dyn Reference,
    ell: &Ellipsoid,
    t0: f64,
    t1: f64,
    rates: &RateBounds,
    cfg: &PipeConfig,
) -> Result<FlowPipe, FlowError> {
    if t1 <= t0 {
        return Err(FlowError::EmptyHorizon);
    }
    let footprint = project_invariant_set(ell, &SE2::identity(), cfg.boundary_dirs, cfg.dilation);
    let n_win = ((t1 - t0) / cfg.window).ceil() as usize;
    let m = cfg.subsamples.max(1);

    let mut windows = Vec::with_capacity(n_win);
    for k in 0..n_win {
        let wa = t0 + cfg.window * k as f64;
        let wb = (wa + cfg.window).min(t1);
        let gap = (wb - wa) / m as f64;

        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut th_prev = 0.0;
        let (mut th_min, mut th_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=m {
            let pose = reference.pose(wa + gap * i as f64);
            let p = pose.translation();
            xmin = xmin.min(p.x);
            xmax = xmax.max(p.x);
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
            // Unwrap the heading so the sweep sees a contiguous range.
            let mut th = pose.angle();
            if i > 0 {
                th += std::f64::consts::TAU * ((th_prev - th) / std::f64::consts::TAU).round();
            }
            th_prev = th;
            th_min = th_min.min(th);
            th_max = th_max.max(th);
        }

        let pad = rates.speed * gap + EPS_BOX;
        let boxed = rect(xmin - pad, xmax + pad, ymin - pad, ymax + pad);
        let th_pad = rates.turn * gap;
        let swept = sweep_rotation(&footprint, th_min - th_pad, th_max + th_pad, cfg.sweep_steps)?;
        windows.push(PipeWindow {
            t0: wa,
            t1: wb,
            heading: (th_min - th_pad, th_max + th_pad),
            region: boxed.minkowski_sum(&swept),
        });
    }
    Ok(FlowPipe { windows })
}

/// Outcome of checking a pipe against obstacles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unsafe,
}

/// A window/obstacle pair whose polygons intersect (touching counts).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hit {
    pub window: usize,
    pub obstacle: usize,
}

#[derive(Clone, Debug)]
pub struct SafetyReport {
    pub verdict: Verdict,
    pub hits: Vec<Hit>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }
}

/// Check every window against every obstacle; any contact makes the plan
/// unsafe.
pub fn verify_safety(pipe: &FlowPipe, obstacles: &[Polygon]) -> SafetyReport {
    let mut hits = Vec::new();
    for (wi, w) in pipe.windows.iter().enumerate() {
        for (oi, obs) in obstacles.iter().enumerate() {
            if w.region.intersects(obs) {
                hits.push(Hit { window: wi, obstacle: oi });
            }
        }
    }
    let verdict = if hits.is_empty() { Verdict::Safe } else { Verdict::Unsafe };
    SafetyReport { verdict, hits }
}
