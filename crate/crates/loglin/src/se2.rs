//! The planar special Euclidean group SE(2) and its Lie algebra se(2).
//!
//! Algebra coordinates are ordered `(x, y, theta)`: translation components
//! first, rotation angle last.  `wedge`/`vee` move between coordinate
//! vectors and 3x3 algebra matrices, [`SE2::exp`]/[`SE2::log`] between the
//! algebra and the group.
//!
//! The distortion matrices `u_left`/`u_right` and their inverses relate
//! body-frame inputs to the rate of logarithmic tracking-error coordinates.
//! `u_left_inv` equals the negated left Jacobian of the exponential,
//! `-sum_k ad^k/(k+1)!`, and `u_right_inv` its alternating-sign twin; both
//! are provided in closed form where one exists and as truncated series
//! otherwise, with Taylor fallbacks near `theta = 0` where the closed forms
//! have removable 0/0 structure.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, UnitComplex, Vector2, Vector3};
use thiserror::Error;

/// Coordinates of an se(2) element, ordered `(x, y, theta)`.
pub type AlgebraVec = Vector3<f64>;

/// Below this rotation angle, closed forms with removable 0/0 structure
/// (`sin(theta)/theta` and friends) switch to Taylor expansions accurate to
/// `O(theta^6)`.
pub const TAU_SERIES: f64 = 1e-4;

/// Term count for the truncated operator series; at `|theta| <= pi` the
/// dropped tail is below 1e-15.
pub const N_SERIES: usize = 30;

/// Minimum distance from the `+-pi` branch cut accepted by [`SE2::log`]
/// and the distortion closed forms.
pub const TAU_BRANCH: f64 = 1e-6;

/// Tolerance for structural checks on raw matrices (algebra shape,
/// rotation orthonormality, homogeneous bottom row).
const STRUCTURE_TOL: f64 = 1e-9;

/// Condition-number limit above which matrix inversion of a distortion
/// matrix is refused.
const COND_LIMIT: f64 = 1e8;

/// Wider Taylor window for scalars that are genuine differences of
/// near-equal terms (`theta - sin(theta)` and the shear coefficient);
/// their closed forms lose ~eps/theta absolute accuracy, so the switch
/// sits where Taylor truncation and cancellation errors balance (~2e-15).
const TAU_DIFF: f64 = 0.05;

#[derive(Debug, Error)]
pub enum LieError {
    /// A raw matrix does not have the required structure (algebra shape or
    /// homogeneous rigid-transform shape).
    #[error("matrix violates required structure: {0}")]
    StructureViolation(String),
    /// An operation was evaluated too close to the `+-pi` branch cut of the
    /// logarithm, or a distortion inverse is numerically singular.
    #[error("rotation angle {angle} is too close to the +-pi branch cut")]
    BranchSingularity { angle: f64 },
}

/// `sin(theta)/theta`, `(1-cos)/theta`, `(1-cos)/theta^2`,
/// `(theta-sin)/theta^2`, with Taylor fallbacks below [`TAU_SERIES`].
fn trig_ratios(theta: f64) -> (f64, f64, f64, f64) {
    let s4 = if theta.abs() < TAU_DIFF {
        let t2 = theta * theta;
        theta * (1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0)
    } else {
        (theta - theta.sin()) / (theta * theta)
    };
    if theta.abs() < TAU_SERIES {
        let t2 = theta * theta;
        let s1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        let s3 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
        (s1, theta * s3, s3, s4)
    } else {
        // 1 - cos(theta) = 2 sin^2(theta/2), free of cancellation.
        let half = (theta / 2.0).sin();
        let omc = 2.0 * half * half;
        (theta.sin() / theta, omc / theta, omc / (theta * theta), s4)
    }
}

/// `theta*sin(theta) / (2(1-cos(theta)))`, i.e. `(theta/2)*cot(theta/2)`.
fn half_cot_half(theta: f64) -> f64 {
    if theta.abs() < TAU_SERIES {
        let t2 = theta * theta;
        1.0 - t2 / 12.0 - t2 * t2 / 720.0
    } else {
        let h = theta / 2.0;
        h * h.cos() / h.sin()
    }
}

/// `(theta*sin(theta) - 2(1-cos(theta))) / (2*theta*(1-cos(theta)))`, the
/// shear coefficient of the third column of `u_left`.
fn distortion_shear(theta: f64) -> f64 {
    if theta.abs() < TAU_DIFF {
        let t2 = theta * theta;
        -theta / 12.0 - t2 * theta / 720.0 - t2 * t2 * theta / 30240.0
    } else {
        let half = (theta / 2.0).sin();
        let omc = 2.0 * half * half;
        (theta * theta.sin() - 2.0 * omc) / (2.0 * theta * omc)
    }
}

/// Maps coordinates to the 3x3 algebra matrix
/// `[[0, -theta, x], [theta, 0, y], [0, 0, 0]]`.
pub fn wedge(z: &AlgebraVec) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -z.z, z.x, //
        z.z, 0.0, z.y, //
        0.0, 0.0, 0.0,
    )
}

/// Inverse of [`wedge`]; rejects matrices that are not in the algebra
/// (non-skew rotation block or nonzero bottom row) beyond 1e-9.
pub fn vee(m: &Matrix3<f64>) -> Result<AlgebraVec, LieError> {
    let bad = [m[(0, 0)], m[(1, 1)], m[(0, 1)] + m[(1, 0)], m[(2, 0)], m[(2, 1)], m[(2, 2)]];
    if bad.iter().any(|v| v.abs() > STRUCTURE_TOL) {
        return Err(LieError::StructureViolation(format!(
            "not an se(2) matrix (max structural residual {:.3e})",
            bad.iter().fold(0.0f64, |a, v| a.max(v.abs()))
        )));
    }
    Ok(AlgebraVec::new(m[(0, 2)], m[(1, 2)], m[(1, 0)]))
}

/// The algebra adjoint `ad(z)`, satisfying
/// `wedge(ad(a) b) = wedge(a) wedge(b) - wedge(b) wedge(a)`.
pub fn ad(z: &AlgebraVec) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -z.z, z.y, //
        z.z, 0.0, -z.x, //
        0.0, 0.0, 0.0,
    )
}

/// Left Jacobian of the exponential, `sum_{k<terms} ad(z)^k / (k+1)!`.
pub fn left_jacobian_series(z: &AlgebraVec, terms: usize) -> Matrix3<f64> {
    jacobian_series(&ad(z), terms)
}

/// Right Jacobian of the exponential, `sum_{k<terms} (-ad(z))^k / (k+1)!`.
/// This is the operator that transports coordinate rates through `exp`:
/// `d/dt exp(wedge(z)) = exp(wedge(z)) * wedge(right_jacobian(z) * zdot)`.
pub fn right_jacobian_series(z: &AlgebraVec, terms: usize) -> Matrix3<f64> {
    jacobian_series(&(-ad(z)), terms)
}

fn jacobian_series(a: &Matrix3<f64>, terms: usize) -> Matrix3<f64> {
    let mut sum = Matrix3::identity();
    let mut term = Matrix3::identity();
    for k in 1..terms {
        term = term * a / (k as f64 + 1.0);
        sum += term;
    }
    sum
}

/// Left distortion matrix inverse in closed form,
/// equal to `-sum_k ad(z)^k/(k+1)!` for all `z`.
pub fn u_left_inv(z: &AlgebraVec) -> Matrix3<f64> {
    let (s1, s2, s3, s4) = trig_ratios(z.z);
    Matrix3::new(
        -s1, s2, -(s4 * z.x + s3 * z.y), //
        -s2, -s1, s3 * z.x - s4 * z.y, //
        0.0, 0.0, -1.0,
    )
}

/// Left distortion matrix in closed form (inverse of [`u_left_inv`]).
///
/// Only defined for `|theta| <= pi - TAU_BRANCH`; `u_left(0) = -I`.
pub fn u_left(z: &AlgebraVec) -> Result<Matrix3<f64>, LieError> {
    if z.z.abs() > PI - TAU_BRANCH {
        return Err(LieError::BranchSingularity { angle: z.z });
    }
    let c = -half_cot_half(z.z);
    let d = z.z / 2.0;
    let k = distortion_shear(z.z);
    Ok(Matrix3::new(
        c, -d, k * z.x + z.y / 2.0, //
        d, c, -z.x / 2.0 + k * z.y, //
        0.0, 0.0, -1.0,
    ))
}

/// Right distortion matrix inverse as the truncated alternating series
/// `-sum_{k<N_SERIES} (-1)^k ad(z)^k/(k+1)!`; equals `u_left_inv(-z)`.
pub fn u_right_inv(z: &AlgebraVec) -> Matrix3<f64> {
    -right_jacobian_series(z, N_SERIES)
}

/// Right distortion matrix, computed by inverting [`u_right_inv`];
/// equals `u_left(-z)` on the common domain.
pub fn u_right(z: &AlgebraVec) -> Result<Matrix3<f64>, LieError> {
    let uinv = u_right_inv(z);
    let svd = uinv.svd(false, false);
    let smax = svd.singular_values[0];
    let smin = svd.singular_values[2];
    if !smin.is_finite() || smin <= 0.0 || smax / smin > COND_LIMIT {
        return Err(LieError::BranchSingularity { angle: z.z });
    }
    Ok(uinv.try_inverse().expect("condition number checked above"))
}

/// An element of SE(2), stored as a unit-complex rotation plus translation
/// so group structure is preserved exactly under composition.
#[derive(Clone, Copy, Debug)]
pub struct SE2 {
    rot: UnitComplex<f64>,
    trans: Vector2<f64>,
}

impl SE2 {
    pub fn identity() -> Self {
        SE2 { rot: UnitComplex::identity(), trans: Vector2::zeros() }
    }

    /// Pose from planar position and heading.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        SE2 { rot: UnitComplex::new(theta), trans: Vector2::new(x, y) }
    }

    pub fn from_parts(rot: UnitComplex<f64>, trans: Vector2<f64>) -> Self {
        SE2 { rot, trans }
    }

    /// Validates and imports a homogeneous 3x3 rigid transform.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self, LieError> {
        let bottom = [m[(2, 0)], m[(2, 1)], m[(2, 2)] - 1.0];
        if bottom.iter().any(|v| v.abs() > STRUCTURE_TOL) {
            return Err(LieError::StructureViolation("bottom row is not (0, 0, 1)".into()));
        }
        let r = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let defect = (r.transpose() * r - Matrix2::identity()).norm();
        if defect > STRUCTURE_TOL {
            return Err(LieError::StructureViolation(format!(
                "rotation block is not orthonormal (defect {defect:.3e})"
            )));
        }
        if r.determinant() <= 0.0 {
            return Err(LieError::StructureViolation("rotation block has negative determinant".into()));
        }
        let angle = m[(1, 0)].atan2(m[(0, 0)]);
        Ok(SE2 { rot: UnitComplex::new(angle), trans: Vector2::new(m[(0, 2)], m[(1, 2)]) })
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let r = self.rotation();
        Matrix3::new(
            r[(0, 0)], r[(0, 1)], self.trans.x, //
            r[(1, 0)], r[(1, 1)], self.trans.y, //
            0.0, 0.0, 1.0,
        )
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        *self.rot.to_rotation_matrix().matrix()
    }

    /// Heading angle in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        self.rot.angle()
    }

    pub fn translation(&self) -> Vector2<f64> {
        self.trans
    }

    pub fn inverse(&self) -> SE2 {
        let rinv = self.rot.inverse();
        SE2 { rot: rinv, trans: -(rinv * self.trans) }
    }

    /// Exponential map from algebra coordinates.
    pub fn exp(z: &AlgebraVec) -> SE2 {
        let (s1, s2, _, _) = trig_ratios(z.z);
        SE2 {
            rot: UnitComplex::new(z.z),
            trans: Vector2::new(s1 * z.x - s2 * z.y, s2 * z.x + s1 * z.y),
        }
    }

    /// Principal logarithm; the angle lies in `(-pi, pi)`.  Refuses poses
    /// within [`TAU_BRANCH`] of the branch cut.
    pub fn log(&self) -> Result<AlgebraVec, LieError> {
        let theta = self.rot.angle();
        if PI - theta.abs() < TAU_BRANCH {
            return Err(LieError::BranchSingularity { angle: theta });
        }
        let a = half_cot_half(theta);
        let b = theta / 2.0;
        Ok(AlgebraVec::new(
            a * self.trans.x + b * self.trans.y,
            -b * self.trans.x + a * self.trans.y,
            theta,
        ))
    }

    /// Group adjoint as a matrix on algebra coordinates:
    /// `wedge(adjoint(X) * z) = X * wedge(z) * X^{-1}`.
    pub fn adjoint(&self) -> Matrix3<f64> {
        let r = self.rotation();
        Matrix3::new(
            r[(0, 0)], r[(0, 1)], self.trans.y, //
            r[(1, 0)], r[(1, 1)], -self.trans.x, //
            0.0, 0.0, 1.0,
        )
    }
}

impl std::ops::Mul for SE2 {
    type Output = SE2;
    fn mul(self, rhs: SE2) -> SE2 {
        SE2 { rot: self.rot * rhs.rot, trans: self.rot * rhs.trans + self.trans }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Independent matrix-exponential oracle (Pade scaling and squaring).
    fn expm(m: &Matrix3<f64>) -> Matrix3<f64> {
        m.exp()
    }

    fn max_abs_diff(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn wedge_has_documented_layout() {
        let m = wedge(&AlgebraVec::new(1.0, 2.0, 0.5));
        #[rustfmt::skip]
        let expected = Matrix3::new(
            0.0, -0.5, 1.0,
            0.5,  0.0, 2.0,
            0.0,  0.0, 0.0,
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn vee_inverts_wedge_and_rejects_noise() {
        let z = AlgebraVec::new(-0.3, 1.7, 0.9);
        assert_eq!(vee(&wedge(&z)).unwrap(), z);

        let mut bad = wedge(&z);
        bad[(2, 0)] = 1e-6;
        assert!(matches!(vee(&bad), Err(LieError::StructureViolation(_))));
        let mut skewless = wedge(&z);
        skewless[(0, 1)] = skewless[(1, 0)]; // break skew-symmetry
        assert!(vee(&skewless).is_err());
    }

    #[test]
    fn ad_has_documented_layout() {
        let m = ad(&AlgebraVec::new(1.0, 2.0, 0.5));
        #[rustfmt::skip]
        let expected = Matrix3::new(
            0.0, -0.5,  2.0,
            0.5,  0.0, -1.0,
            0.0,  0.0,  0.0,
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn ad_is_the_matrix_commutator() {
        let a = AlgebraVec::new(0.4, -1.2, 0.8);
        let b = AlgebraVec::new(-0.9, 0.3, -1.1);
        let bracket = wedge(&a) * wedge(&b) - wedge(&b) * wedge(&a);
        assert_relative_eq!(ad(&a) * b, vee(&bracket).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn adjoint_of_pure_translation() {
        let x = SE2::new(1.0, 2.0, 0.0);
        #[rustfmt::skip]
        let expected = Matrix3::new(
            1.0, 0.0,  2.0,
            0.0, 1.0, -1.0,
            0.0, 0.0,  1.0,
        );
        assert_eq!(x.adjoint(), expected);
    }

    #[test]
    fn adjoint_satisfies_defining_relation() {
        let x = SE2::new(0.7, -1.9, 2.1);
        let z = AlgebraVec::new(-0.5, 0.2, 1.3);
        let lhs = wedge(&(x.adjoint() * z));
        let rhs = x.matrix() * wedge(&z) * x.inverse().matrix();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn exp_of_quarter_turn_matches_matrix_exponential() {
        let z = AlgebraVec::new(0.0, 0.0, PI / 2.0);
        let got = SE2::exp(&z).matrix();
        let want = expm(&wedge(&z));
        assert!(max_abs_diff(&got, &want) < 1e-12);
        assert_relative_eq!(got[(0, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(got[(1, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(got[(0, 2)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn exp_of_pure_translation_is_a_shift() {
        let x = SE2::exp(&AlgebraVec::new(1.0, 0.0, 0.0));
        assert_eq!(x.translation(), Vector2::new(1.0, 0.0));
        assert_eq!(x.angle(), 0.0);
    }

    #[test]
    fn exp_matches_matrix_exponential_on_grid() {
        for &theta in &[-3.0, -1.2, -1e-5, 0.0, 3e-5, 0.4, 2.9] {
            for &(x, y) in &[(0.0, 0.0), (1.0, -2.0), (-0.3, 0.7)] {
                let z = AlgebraVec::new(x, y, theta);
                let diff = max_abs_diff(&SE2::exp(&z).matrix(), &expm(&wedge(&z)));
                assert!(diff < 1e-12, "exp mismatch {diff:.3e} at {z:?}");
            }
        }
    }

    #[test]
    fn log_exp_roundtrip_on_grid() {
        for &theta in &[-3.1, -0.8, -1e-6, 0.0, 1e-7, 2e-4, 1.5, 3.13] {
            for &(x, y) in &[(0.0, 0.0), (5.0, -2.0), (-0.3, 0.7)] {
                let z = AlgebraVec::new(x, y, theta);
                let back = SE2::exp(&z).log().unwrap();
                assert_relative_eq!(back, z, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn log_refuses_branch_cut() {
        let x = SE2::new(1.0, 2.0, PI);
        assert!(matches!(x.log(), Err(LieError::BranchSingularity { .. })));
    }

    #[test]
    fn from_matrix_validates_structure() {
        let x = SE2::new(0.4, -0.2, 1.1);
        let back = SE2::from_matrix(&x.matrix()).unwrap();
        assert!(max_abs_diff(&back.matrix(), &x.matrix()) < 1e-15);

        let mut scaled = x.matrix();
        scaled[(0, 0)] *= 1.001; // not orthonormal
        assert!(SE2::from_matrix(&scaled).is_err());
        let mut affine = x.matrix();
        affine[(2, 0)] = 0.1;
        assert!(SE2::from_matrix(&affine).is_err());
    }

    #[test]
    fn right_jacobian_matches_directional_derivative_of_exp() {
        // d/dh exp(z + h*delta) at h=0  ==  exp(z) * wedge(Jr(z) * delta)
        let z = AlgebraVec::new(0.3, -0.8, 0.9);
        let delta = AlgebraVec::new(-0.4, 0.1, 0.6);
        let h = 1e-6;
        let fd = (SE2::exp(&(z + h * delta)).matrix() - SE2::exp(&(z - h * delta)).matrix()) / (2.0 * h);
        let jr = right_jacobian_series(&z, N_SERIES);
        let analytic = SE2::exp(&z).matrix() * wedge(&(jr * delta));
        assert!(max_abs_diff(&fd, &analytic) < 1e-8);
    }

    #[test]
    fn u_left_inv_at_zero_is_minus_identity() {
        assert!(max_abs_diff(&u_left_inv(&AlgebraVec::zeros()), &(-Matrix3::identity())) < 1e-15);
    }

    #[test]
    fn u_left_inv_rotation_block_at_quarter_turn() {
        let u = u_left_inv(&AlgebraVec::new(0.0, 0.0, PI / 2.0));
        let s = 2.0 / PI;
        assert_relative_eq!(u[(0, 0)], -s, epsilon = 1e-15);
        assert_relative_eq!(u[(0, 1)], s, epsilon = 1e-15);
        assert_relative_eq!(u[(1, 0)], -s, epsilon = 1e-15);
        assert_relative_eq!(u[(1, 1)], -s, epsilon = 1e-15);
        assert_eq!(u[(2, 2)], -1.0);
    }

    #[test]
    fn u_left_inv_matches_series_on_grid() {
        let mut worst = 0.0f64;
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let z = AlgebraVec::new(
                        -1.0 + 2.0 * i as f64 / 9.0,
                        -1.0 + 2.0 * j as f64 / 9.0,
                        -3.0 + 6.0 * k as f64 / 9.0,
                    );
                    let series = -left_jacobian_series(&z, N_SERIES);
                    worst = worst.max(max_abs_diff(&u_left_inv(&z), &series));
                }
            }
        }
        assert!(worst < 1e-10, "worst closed-vs-series gap {worst:.3e}");
    }

    #[test]
    fn u_left_inv_taylor_branch_matches_series() {
        for &theta in &[1e-5, -3e-5, 9.9e-5, 1.1e-4] {
            let z = AlgebraVec::new(0.7, -0.4, theta);
            let gap = max_abs_diff(&u_left_inv(&z), &(-left_jacobian_series(&z, N_SERIES)));
            assert!(gap < 1e-13, "gap {gap:.3e} at theta={theta}");
        }
    }

    #[test]
    fn u_left_frozen_quarter_turn_coefficients() {
        let u = u_left(&AlgebraVec::new(0.0, 0.0, PI / 2.0)).unwrap();
        assert_relative_eq!(u[(0, 0)], -PI / 4.0, epsilon = 1e-15); // c
        assert_relative_eq!(u[(1, 0)], PI / 4.0, epsilon = 1e-15); // d
        assert_relative_eq!(u[(0, 1)], -PI / 4.0, epsilon = 1e-15);
        assert_eq!((u[(2, 0)], u[(2, 1)], u[(2, 2)]), (0.0, 0.0, -1.0));
    }

    #[test]
    fn u_left_inverts_u_left_inv() {
        for &theta in &[-3.0, -0.9, -2e-5, 0.0, 1e-6, 0.3, 2.8] {
            for &(x, y) in &[(0.0, 0.0), (1.0, -2.0), (-0.4, 0.9)] {
                let z = AlgebraVec::new(x, y, theta);
                let prod = u_left(&z).unwrap() * u_left_inv(&z);
                let gap = max_abs_diff(&prod, &Matrix3::identity());
                assert!(gap < 1e-9, "gap {gap:.3e} at {z:?}");
            }
        }
    }

    #[test]
    fn u_left_refuses_branch_cut() {
        assert!(u_left(&AlgebraVec::new(0.1, 0.0, PI)).is_err());
        assert!(u_left(&AlgebraVec::new(0.1, 0.0, -PI + 1e-9)).is_err());
    }

    #[test]
    fn u_right_pair_matches_mirrored_left_pair() {
        for &theta in &[-2.2, -0.5, 0.0, 0.7, 3.0] {
            let z = AlgebraVec::new(0.8, -0.6, theta);
            let gap_inv = max_abs_diff(&u_right_inv(&z), &u_left_inv(&(-z)));
            assert!(gap_inv < 1e-12, "inverse mismatch {gap_inv:.3e}");
            let gap = max_abs_diff(&u_right(&z).unwrap(), &u_left(&(-z)).unwrap());
            assert!(gap < 1e-10, "distortion mismatch {gap:.3e}");
        }
    }

    #[test]
    fn u_left_inv_determinant_identity() {
        for &theta in &[-3.1, -1.0, -0.2, 0.05, 0.9, 2.5] {
            let z = AlgebraVec::new(0.3, -0.9, theta);
            let det = u_left_inv(&z).determinant();
            let formula = 2.0 * (theta.cos() - 1.0) / (theta * theta);
            assert_relative_eq!(det, formula, epsilon = 1e-10);
        }
        // Small-angle expansion -1 + theta^2/12 - theta^4/360.
        let theta = 0.05f64;
        let det = u_left_inv(&AlgebraVec::new(1.0, 1.0, theta)).determinant();
        let taylor = -1.0 + theta * theta / 12.0 - theta.powi(4) / 360.0;
        assert!((det - taylor).abs() < theta.powi(6));
    }

    #[test]
    fn u_left_singular_values_match_symmetric_eigen_oracle() {
        for &theta in &[-3.0, -1.5, 0.0, 1.0, 3.0] {
            let z = AlgebraVec::new(0.5, -1.0, theta);
            let u = u_left(&z).unwrap();
            let sigma = u.svd(false, false).singular_values[0];
            let gram = u.transpose() * u;
            let oracle = gram.symmetric_eigenvalues().max().sqrt();
            assert_relative_eq!(sigma, oracle, epsilon = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn prop_exp_log_roundtrip(
            x in -5.0f64..5.0,
            y in -5.0f64..5.0,
            theta in -3.13f64..3.13,
        ) {
            let z = AlgebraVec::new(x, y, theta);
            let back = SE2::exp(&z).log().unwrap();
            prop_assert!((back - z).norm() < 1e-9 * (1.0 + z.norm()));
        }

        #[test]
        fn prop_log_exp_roundtrip(
            x in -5.0f64..5.0,
            y in -5.0f64..5.0,
            theta in -3.13f64..3.13,
        ) {
            let pose = SE2::new(x, y, theta);
            let again = SE2::exp(&pose.log().unwrap());
            prop_assert!((again.matrix() - pose.matrix()).abs().max() < 1e-9);
        }

        #[test]
        fn prop_group_axioms(
            a in proptest::array::uniform3(-3.0f64..3.0),
            b in proptest::array::uniform3(-3.0f64..3.0),
            c in proptest::array::uniform3(-3.0f64..3.0),
        ) {
            let (x, y, z) = (SE2::new(a[0], a[1], a[2]), SE2::new(b[0], b[1], b[2]), SE2::new(c[0], c[1], c[2]));
            let assoc = ((x * y) * z).matrix() - (x * (y * z)).matrix();
            prop_assert!(assoc.abs().max() < 1e-12);
            let inv = (x * x.inverse()).matrix() - Matrix3::identity();
            prop_assert!(inv.abs().max() < 1e-12);
        }

        #[test]
        fn prop_adjoint_is_homomorphism(
            a in proptest::array::uniform3(-2.0f64..2.0),
            b in proptest::array::uniform3(-2.0f64..2.0),
        ) {
            let (x, y) = (SE2::new(a[0], a[1], a[2]), SE2::new(b[0], b[1], b[2]));
            let gap = ((x * y).adjoint() - x.adjoint() * y.adjoint()).abs().max();
            prop_assert!(gap < 1e-12);
        }

        #[test]
        fn prop_u_left_matches_series_inverse(
            x in -1.0f64..1.0,
            y in -1.0f64..1.0,
            theta in -3.0f64..3.0,
        ) {
            let z = AlgebraVec::new(x, y, theta);
            let prod = u_left(&z).unwrap() * (-left_jacobian_series(&z, N_SERIES));
            prop_assert!((prod - Matrix3::identity()).abs().max() < 1e-9);
        }
    }
}
