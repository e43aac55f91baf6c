//! Certificate synthesis: feedback gains, invariant ellipsoids, and the
//! distortion-bound fixed point that ties them together.
//!
//! The closed-loop error obeys `zetadot = (-ad(l) + G) zeta + U(zeta) w`
//! with `l` anywhere in a velocity polytope and `|w| <= w_max`.  Because
//! `ad` is linear in `l`, certifying the vertex matrices
//! `A_i = -ad(l_i) + G` against the disturbance gain `rho = sigma * w_max`
//! certifies the whole polytope, provided `sigma` bounds `|U(zeta)|_2` over
//! the certified set — which depends on the set itself, hence the fixed
//! point iteration in [`fixed_point`].

mod care;
mod fixed_point;
mod lmi;

pub use care::{lqr_gain, LqrSolution};
pub use fixed_point::{
    distortion_bounded_ellipsoid, no_inversion_ellipsoid, DistortionBound, FixedPointOptions,
};
pub use lmi::invariant_ellipsoid;

use nalgebra::Matrix3;
use thiserror::Error;

use crate::se2::{ad, AlgebraVec};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no stabilizing seed gain found; the pair (A, B) appears unstabilizable")]
    NotStabilizable,
    #[error("weight matrix is not positive definite: {0}")]
    IndefiniteWeight(&'static str),
    #[error("iteration stopped after {iters} iterations with defect {defect:.3e}")]
    NoConvergence { iters: usize, defect: f64 },
    #[error("vertex matrix inequalities are infeasible for every contraction rate tried")]
    Infeasible,
    #[error("certified set reaches the +-pi heading branch (extent {extent:.4})")]
    AngleWrap { extent: f64 },
}

/// The set `{ zeta : zeta^T P zeta <= 1 }` with `P` symmetric positive
/// definite.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    pub p: Matrix3<f64>,
}

impl Ellipsoid {
    pub fn quad(&self, zeta: &AlgebraVec) -> f64 {
        (zeta.transpose() * self.p * zeta)[0]
    }

    pub fn contains(&self, zeta: &AlgebraVec) -> bool {
        self.quad(zeta) <= 1.0
    }

    /// Semi-axis lengths `1/sqrt(lambda_i(P))`, descending.
    pub fn semi_axes(&self) -> [f64; 3] {
        let mut eig: Vec<f64> =
            self.p.symmetric_eigenvalues().iter().map(|l| 1.0 / l.sqrt()).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        [eig[0], eig[1], eig[2]]
    }

    /// `det(P)^{-1/6}`: the radius of the ball with the same volume.
    pub fn mean_semi_axis(&self) -> f64 {
        self.p.determinant().powf(-1.0 / 6.0)
    }

    /// Half-width of the set along the heading axis, `sqrt((P^{-1})_33)`.
    pub fn theta_extent(&self) -> f64 {
        self.p.try_inverse().expect("P is positive definite")[(2, 2)].sqrt()
    }

    /// Square root factor `P^{-1/2}` (symmetric), mapping the unit ball
    /// onto the ellipsoid.
    pub fn inv_sqrt(&self) -> Matrix3<f64> {
        let eig = self.p.symmetric_eigen();
        let d = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        eig.eigenvectors * d * eig.eigenvectors.transpose()
    }

    /// `n` near-uniform boundary points via a Fibonacci sphere pushed
    /// through `P^{-1/2}`.
    pub fn boundary_points(&self, n: usize) -> Vec<AlgebraVec> {
        let m = self.inv_sqrt();
        fibonacci_sphere(n).into_iter().map(|s| m * s).collect()
    }
}

/// Near-uniform unit-sphere samples (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<AlgebraVec> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            AlgebraVec::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Componentwise bound on the commanded correction input.
#[derive(Clone, Copy, Debug)]
pub struct SaturationBox {
    pub bound: AlgebraVec,
}

impl SaturationBox {
    pub fn contains(&self, u: &AlgebraVec) -> bool {
        u.x.abs() <= self.bound.x && u.y.abs() <= self.bound.y && u.z.abs() <= self.bound.z
    }

    /// Componentwise max of `|map(zeta)|` over sampled boundary points of
    /// the set, inflated by `margin`.
    pub fn from_boundary<F>(ell: &Ellipsoid, n: usize, margin: f64, mut map: F) -> Self
    where
        F: FnMut(&AlgebraVec) -> AlgebraVec,
    {
        let mut bound = AlgebraVec::zeros();
        for z in ell.boundary_points(n) {
            bound = bound.sup(&map(&z).abs());
        }
        SaturationBox { bound: margin * bound }
    }
}

/// Corner body rates of the box `speed in [lo, hi] x {lateral 0} x
/// |turn rate| <= omega_max`.
pub fn velocity_vertices(speed: (f64, f64), omega_max: f64) -> Vec<AlgebraVec> {
    let mut v = Vec::with_capacity(4);
    for &s in &[speed.0, speed.1] {
        for &w in &[-omega_max, omega_max] {
            v.push(AlgebraVec::new(s, 0.0, w));
        }
    }
    v
}

/// Closed-loop vertex matrices `A_i = -ad(l_i) + G`.
pub fn vertex_matrices(rates: &[AlgebraVec], gain: &Matrix3<f64>) -> Vec<Matrix3<f64>> {
    rates.iter().map(|l| -ad(l) + gain).collect()
}

/// Worst-case admissible disturbance direction at `zeta`: the unit vector
/// maximizing `d/dt (zeta^T P zeta)`, scaled to magnitude `rho`.
pub fn worst_disturbance(p: &Matrix3<f64>, zeta: &AlgebraVec, rho: f64) -> AlgebraVec {
    let g = p * zeta;
    let n = g.norm();
    if n < 1e-300 {
        AlgebraVec::zeros()
    } else {
        rho / n * g
    }
}

#[allow(unused_imports)]
pub(crate) use lmi::solve_fixed_alpha;
