//! Continuous-time algebraic Riccati equation via Kleinman's iteration.
//!
//! Starting from any stabilizing gain, each pass solves one Lyapunov
//! equation for the cost-to-go of the current policy and re-derives the
//! greedy gain; the sequence decreases monotonically and converges
//! quadratically to the stabilizing solution of
//! `A^T P + P A - P B R^{-1} B^T P + Q = 0`.

use nalgebra::{Matrix3, SMatrix, SVector};

use super::SynthError;

const MAX_ITERS: usize = 60;

#[derive(Clone, Debug)]
pub struct LqrSolution {
    /// Feedback gain for `u = K zeta` (already includes the minus sign).
    pub k: Matrix3<f64>,
    /// Stabilizing Riccati solution.
    pub p: Matrix3<f64>,
    /// Frobenius norm of the Riccati residual at exit.
    pub residual: f64,
    pub iterations: usize,
}

fn is_hurwitz(a: &Matrix3<f64>) -> bool {
    a.complex_eigenvalues().iter().all(|l| l.re < -1e-12)
}

/// Solves `Acl^T P + P Acl = C` by vectorization (9x9 linear system).
fn lyapunov(acl: &Matrix3<f64>, c: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let at = acl.transpose();
    let id = Matrix3::identity();
    let lhs: SMatrix<f64, 9, 9> = id.kronecker(&at) + at.kronecker(&id);
    let rhs = SVector::<f64, 9>::from_column_slice(c.as_slice());
    let vec_p = lhs.lu().solve(&rhs)?;
    let p = Matrix3::from_column_slice(vec_p.as_slice());
    Some(0.5 * (p + p.transpose()))
}

fn riccati_residual(
    a: &Matrix3<f64>,
    b: &Matrix3<f64>,
    q: &Matrix3<f64>,
    r_inv: &Matrix3<f64>,
    p: &Matrix3<f64>,
) -> f64 {
    (a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q).norm()
}

/// LQR synthesis for `zetadot = A zeta + B u`, cost `int zeta^T Q zeta +
/// u^T R u`.  Returns the gain with the convention `u = K zeta`.
pub fn lqr_gain(
    a: &Matrix3<f64>,
    b: &Matrix3<f64>,
    q: &Matrix3<f64>,
    r: &Matrix3<f64>,
) -> Result<LqrSolution, SynthError> {
    if r.cholesky().is_none() {
        return Err(SynthError::IndefiniteWeight("R"));
    }
    if q.symmetric_eigenvalues().min() < -1e-12 {
        return Err(SynthError::IndefiniteWeight("Q"));
    }
    let r_inv = r.try_inverse().expect("R is positive definite");

    // Seed: output feedback -c B^T with doubling strength until the loop
    // closes stably (c = 0 covers already-Hurwitz plants).
    let mut k = None;
    let mut c = 0.0;
    while c <= 1024.0 {
        let cand = -c * b.transpose();
        if is_hurwitz(&(a + b * cand)) {
            k = Some(cand);
            break;
        }
        c = if c == 0.0 { 1.0 } else { 2.0 * c };
    }
    let mut k = k.ok_or(SynthError::NotStabilizable)?;

    let mut defect = f64::INFINITY;
    for iter in 1..=MAX_ITERS {
        let acl = a + b * k;
        let rhs = -(q + k.transpose() * r * k);
        let p = lyapunov(&acl, &rhs)
            .ok_or(SynthError::NoConvergence { iters: iter, defect })?;
        defect = riccati_residual(a, b, q, &r_inv, &p);
        let k_next = -r_inv * b.transpose() * p;
        if defect <= 1e-12 * (1.0 + p.norm()) {
            return Ok(LqrSolution { k: k_next, p, residual: defect, iterations: iter });
        }
        k = k_next;
    }
    Err(SynthError::NoConvergence { iters: MAX_ITERS, defect })
}
