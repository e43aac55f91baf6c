//! Scenario files: a JSON description of one planning-and-verification
//! task — timed waypoints, speed and turn-rate envelopes, disturbance
//! amplitudes, convex obstacles, and LQR weights.

use std::path::Path;

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Polygon;
use crate::se2::AlgebraVec;
use crate::trajectory::{plan_min_snap, Boundary, FlatTrajectory, TrajError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn default_seed() -> u64 {
    42
}

fn default_diag() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

/// One verification task.  All quantities are SI (metres, seconds,
/// radians); body-frame axes are (forward, left, heading).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Timed waypoints `[t, x, y]` with strictly increasing `t`.
    pub waypoints: Vec<[f64; 3]>,
    /// Admissible translational speed band `[lo, hi]` along the plan;
    /// also the forward-velocity interval of the synthesis polytope.
    pub speed_bounds: [f64; 2],
    /// Turn-rate bound for the synthesis polytope.
    pub omega_max: f64,
    /// Component-wise disturbance amplitudes `[vx, vy, omega]`.
    pub disturbance: [f64; 3],
    /// Convex obstacles as vertex lists (hulled on load).
    #[serde(default)]
    pub obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Diagonal LQR weights; identity when omitted.
    #[serde(default = "default_diag")]
    pub q_diag: [f64; 3],
    #[serde(default = "default_diag")]
    pub r_diag: [f64; 3],
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Invalid(msg));
        if self.waypoints.len() < 2 {
            return fail(format!("{} waypoints; need at least 2", self.waypoints.len()));
        }
        if self.waypoints[0][0] != 0.0 {
            return fail(format!("first waypoint must be at t = 0, got {}", self.waypoints[0][0]));
        }
        for pair in self.waypoints.windows(2) {
            if pair[1][0] <= pair[0][0] {
                return fail(format!("waypoint times not increasing at t = {}", pair[1][0]));
            }
        }
        let [lo, hi] = self.speed_bounds;
        if !(lo > 0.0 && hi >= lo) {
            return fail(format!("speed bounds [{lo}, {hi}] must satisfy 0 < lo <= hi"));
        }
        if self.omega_max <= 0.0 {
            return fail(format!("omega_max = {} must be positive", self.omega_max));
        }
        if self.disturbance.iter().any(|a| *a < 0.0) {
            return fail(format!("disturbance amplitudes {:?} must be >= 0", self.disturbance));
        }
        for (i, obs) in self.obstacles.iter().enumerate() {
            if obs.len() < 3 {
                return fail(format!("obstacle {i} has {} vertices; need >= 3", obs.len()));
            }
        }
        if self.q_diag.iter().any(|q| *q < 0.0) {
            return fail(format!("Q diagonal {:?} must be >= 0", self.q_diag));
        }
        if self.r_diag.iter().any(|r| *r <= 0.0) {
            return fail(format!("R diagonal {:?} must be > 0", self.r_diag));
        }
        Ok(())
    }

    pub fn waypoint_list(&self) -> Vec<(f64, Vector2<f64>)> {
        self.waypoints.iter().map(|w| (w[0], Vector2::new(w[1], w[2]))).collect()
    }

    pub fn obstacle_polygons(&self) -> Vec<Polygon> {
        self.obstacles
            .iter()
            .map(|obs| {
                Polygon::convex_hull(
                    &obs.iter().map(|p| Vector2::new(p[0], p[1])).collect::<Vec<_>>(),
                )
            })
            .collect()
    }

    /// Euclidean norm of the disturbance amplitude vector: the magnitude
    /// bound fed to the invariant-set synthesis.
    pub fn w_max(&self) -> f64 {
        Vector3::from(self.disturbance).norm()
    }

    pub fn q(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from(self.q_diag))
    }

    pub fn r(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from(self.r_diag))
    }

    /// Minimum-snap plan through the waypoints, entering and leaving at
    /// cruise velocity aligned with the adjacent leg.
    pub fn plan(&self) -> Result<FlatTrajectory, TrajError> {
        let wps = self.waypoint_list();
        let cruise = 0.5 * (self.speed_bounds[0] + self.speed_bounds[1]);
        let leg = |a: &(f64, Vector2<f64>), b: &(f64, Vector2<f64>)| {
            let d = b.1 - a.1;
            let n = d.norm();
            if n < 1e-9 {
                Vector2::new(cruise, 0.0)
            } else {
                cruise * d / n
            }
        };
        let start = Boundary::cruising(leg(&wps[0], &wps[1]));
        let end = Boundary::cruising(leg(&wps[wps.len() - 2], &wps[wps.len() - 1]));
        plan_min_snap(&wps, &start, &end)
    }
}

/// Deterministic bounded disturbance: per-component sinusoids whose
/// frequencies and phases are drawn from the seed.  `|w_i(t)| <=
/// amplitudes[i]` for all `t`.
pub fn seeded_disturbance(amplitudes: [f64; 3], seed: u64) -> impl Fn(f64) -> AlgebraVec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut freq = [0.0f64; 3];
    let mut phase = [0.0f64; 3];
    for i in 0..3 {
        freq[i] = rng.random_range(0.3..0.7);
        phase[i] = rng.random_range(0.0..std::f64::consts::TAU);
    }
    move |t: f64| {
        AlgebraVec::from_fn(|i, _| {
            amplitudes[i] * (std::f64::consts::TAU * freq[i] * t + phase[i]).sin()
        })
    }
}
