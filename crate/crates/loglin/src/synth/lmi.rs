//! Interior-point solver for the vertex invariance inequalities.
//!
//! For vertex matrices `A_i`, disturbance gain `rho` and contraction rate
//! `alpha`, the set `{zeta : zeta^T P zeta <= 1}` is invariant and decays
//! like `Vdot <= -alpha (V - 1)` under `zetadot = A zeta + d`, `|d| <= rho`,
//! whenever
//!
//! ```text
//! M_i(P) = [[A_i^T P + P A_i + alpha P,  rho P],
//!           [rho P,                     -alpha I]]  <=  0
//! ```
//!
//! (Schur complement of the worst-case disturbance term).  The tightest
//! such set maximizes `log det P`; this module solves that with a
//! log-barrier path-following method: dense Newton steps over the six free
//! entries of `P`, an eigenvalue-shift auxiliary problem to find a strictly
//! feasible start, and a coarse-to-fine search over `alpha`.

use nalgebra::{Cholesky, Const, Matrix3, Matrix6, SMatrix, SVector};

use super::{Ellipsoid, SynthError};

/// Barrier cap keeping `P` bounded when the inequalities do not (pure
/// Lyapunov case, `rho = 0`).
const CAP: f64 = 1e6;
const T_FINAL: f64 = 1e10;
const T_GROW: f64 = 10.0;
const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 60;
/// Contraction rates searched: log-spaced scan over this range, then
/// golden-section refinement around the best grid point.
const ALPHA_RANGE: (f64, f64) = (1e-3, 10.0);
const ALPHA_GRID: usize = 16;
const GOLDEN_ITERS: usize = 24;

/// Symmetric basis `E_k` for the parameter order
/// `(P11, P21, P22, P31, P32, P33)`.
fn sym_basis() -> [Matrix3<f64>; 6] {
    let idx = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)];
    std::array::from_fn(|k| {
        let (i, j) = idx[k];
        let mut e = Matrix3::zeros();
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        e
    })
}

fn logdet<const N: usize>(chol: &Cholesky<f64, Const<N>>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

struct Problem<'a> {
    verts: &'a [Matrix3<f64>],
    rho: f64,
    alpha: f64,
    basis: [Matrix3<f64>; 6],
    /// `F_ik = -dN_i/dp_k`, per vertex and parameter.
    fmats: Vec<[Matrix6<f64>; 6]>,
}

impl<'a> Problem<'a> {
    fn new(verts: &'a [Matrix3<f64>], rho: f64, alpha: f64) -> Self {
        let basis = sym_basis();
        let fmats = verts
            .iter()
            .map(|a| {
                std::array::from_fn(|k| {
                    let e = &basis[k];
                    let top = a.transpose() * e + e * a + alpha * e;
                    let mut f = Matrix6::zeros();
                    f.fixed_view_mut::<3, 3>(0, 0).copy_from(&top);
                    f.fixed_view_mut::<3, 3>(0, 3).copy_from(&(rho * e));
                    f.fixed_view_mut::<3, 3>(3, 0).copy_from(&(rho * e));
                    f
                })
            })
            .collect();
        Problem { verts, rho, alpha, basis, fmats }
    }

    fn p_of(&self, v: &SVector<f64, 6>) -> Matrix3<f64> {
        let mut p = Matrix3::zeros();
        for k in 0..6 {
            p += v[k] * self.basis[k];
        }
        p
    }

    /// `N_i(P) = -M_i(P)`; the inequality holds strictly iff this is
    /// positive definite.
    fn n_of(&self, p: &Matrix3<f64>, vi: usize) -> Matrix6<f64> {
        let a = &self.verts[vi];
        let top = -(a.transpose() * p + p * a + self.alpha * p);
        let mut n = Matrix6::zeros();
        n.fixed_view_mut::<3, 3>(0, 0).copy_from(&top);
        n.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-self.rho * p));
        n.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-self.rho * p));
        n.fixed_view_mut::<3, 3>(3, 3).copy_from(&(self.alpha * Matrix3::identity()));
        n
    }

    /// Cholesky factors of every barrier argument, or None outside the
    /// domain.  Order: P, CAP*I - P, then one per vertex.
    #[allow(clippy::type_complexity)]
    fn factors(
        &self,
        v: &SVector<f64, 6>,
        shift: f64,
    ) -> Option<(Cholesky<f64, Const<3>>, Cholesky<f64, Const<3>>, Vec<Cholesky<f64, Const<6>>>)> {
        let p = self.p_of(v);
        let cp = p.cholesky()?;
        let cc = (CAP * Matrix3::identity() - p).cholesky()?;
        let shift6 = shift * Matrix6::identity();
        let cn = (0..self.verts.len())
            .map(|vi| (self.n_of(&p, vi) + shift6).cholesky())
            .collect::<Option<Vec<_>>>()?;
        Some((cp, cc, cn))
    }
}

/// Barrier value for the volume problem at weight `t`.
fn phase2_value(prob: &Problem, v: &SVector<f64, 6>, t: f64) -> Option<f64> {
    let (cp, cc, cn) = prob.factors(v, 0.0)?;
    let mut f = -t * logdet(&cp) - logdet(&cc);
    for c in &cn {
        f -= logdet(c);
    }
    Some(f)
}

/// One centering solve: minimize `t (-log det P) + barriers` by damped
/// Newton from the strictly feasible `v`.
fn phase2_center(prob: &Problem, mut v: SVector<f64, 6>, t: f64) -> Option<SVector<f64, 6>> {
    for _ in 0..MAX_NEWTON {
        let (cp, cc, cn) = prob.factors(&v, 0.0)?;
        let p_inv = cp.inverse();
        let c_inv = cc.inverse();

        let mut g = SVector::<f64, 6>::zeros();
        let mut h = SMatrix::<f64, 6, 6>::zeros();
        let gp: [Matrix3<f64>; 6] = std::array::from_fn(|k| p_inv * prob.basis[k]);
        let gc: [Matrix3<f64>; 6] = std::array::from_fn(|k| c_inv * prob.basis[k]);
        for k in 0..6 {
            g[k] += -t * gp[k].trace() + gc[k].trace();
            for l in k..6 {
                h[(k, l)] += t * (gp[k] * gp[l]).trace() + (gc[k] * gc[l]).trace();
            }
        }
        for (vi, c) in cn.iter().enumerate() {
            let n_inv = c.inverse();
            let w: [Matrix6<f64>; 6] = std::array::from_fn(|k| n_inv * prob.fmats[vi][k]);
            for k in 0..6 {
                g[k] += w[k].trace();
                for l in k..6 {
                    h[(k, l)] += (w[k] * w[l]).trace();
                }
            }
        }
        for k in 0..6 {
            for l in 0..k {
                h[(k, l)] = h[(l, k)];
            }
        }

        let delta = h.cholesky().map(|c| c.solve(&-g)).or_else(|| h.lu().solve(&-g))?;
        let decrement = -g.dot(&delta);
        if !decrement.is_finite() {
            return None;
        }
        if decrement < NEWTON_TOL {
            return Some(v);
        }

        let f0 = phase2_value(prob, &v, t)?;
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = v + s * delta;
            if let Some(fc) = phase2_value(prob, &cand, t) {
                if fc <= f0 - 1e-4 * s * decrement {
                    v = cand;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            return Some(v); // stalled at numerical precision
        }
    }
    Some(v)
}

/// Path following from a strictly feasible point to the volume optimum.
fn maximize_logdet(prob: &Problem, mut v: SVector<f64, 6>) -> Option<SVector<f64, 6>> {
    let mut t = 1.0;
    while t <= T_FINAL {
        v = phase2_center(prob, v, t)?;
        t *= T_GROW;
    }
    Some(v)
}

fn phase1_value(prob: &Problem, v: &SVector<f64, 6>, s: f64, t: f64) -> Option<f64> {
    let (cp, cc, cn) = prob.factors(v, s)?;
    let mut f = t * s - logdet(&cp) - logdet(&cc);
    for c in &cn {
        f -= logdet(c);
    }
    Some(f)
}

/// Eigenvalue-shift feasibility phase: minimize `s` subject to
/// `N_i + s I > 0`; any iterate with `s < 0` is strictly feasible for the
/// volume problem.
fn find_feasible(prob: &Problem) -> Option<SVector<f64, 6>> {
    let mut v = SVector::<f64, 6>::zeros();
    v[0] = 1.0;
    v[2] = 1.0;
    v[5] = 1.0; // P = I

    let p0 = prob.p_of(&v);
    let worst = (0..prob.verts.len())
        .map(|vi| prob.n_of(&p0, vi).symmetric_eigenvalues().min())
        .fold(f64::INFINITY, f64::min);
    if worst > 1e-6 {
        return Some(v); // identity is already strictly feasible
    }
    let mut s = -worst + 1.0;

    let mut t = 1.0;
    while t <= T_FINAL {
        for _ in 0..MAX_NEWTON {
            let (cp, cc, cn) = prob.factors(&v, s)?;
            let p_inv = cp.inverse();
            let c_inv = cc.inverse();

            // Parameters: (p_0..p_5, s).
            let mut g = SVector::<f64, 7>::zeros();
            let mut h = SMatrix::<f64, 7, 7>::zeros();
            g[6] = t;

            let gp: [Matrix3<f64>; 6] = std::array::from_fn(|k| p_inv * prob.basis[k]);
            let gc: [Matrix3<f64>; 6] = std::array::from_fn(|k| c_inv * prob.basis[k]);
            for k in 0..6 {
                g[k] += -gp[k].trace() + gc[k].trace();
                for l in k..6 {
                    h[(k, l)] += (gp[k] * gp[l]).trace() + (gc[k] * gc[l]).trace();
                }
            }
            for (vi, c) in cn.iter().enumerate() {
                let n_inv = c.inverse();
                let w: [Matrix6<f64>; 6] = std::array::from_fn(|k| n_inv * prob.fmats[vi][k]);
                g[6] -= n_inv.trace();
                h[(6, 6)] += (n_inv * n_inv).trace();
                for k in 0..6 {
                    g[k] += w[k].trace();
                    h[(k, 6)] -= (w[k] * n_inv).trace();
                    for l in k..6 {
                        h[(k, l)] += (w[k] * w[l]).trace();
                    }
                }
            }
            for k in 0..7 {
                for l in 0..k {
                    h[(k, l)] = h[(l, k)];
                }
            }

            let delta = h.cholesky().map(|c| c.solve(&-g)).or_else(|| h.lu().solve(&-g))?;
            let decrement = -g.dot(&delta);
            if !decrement.is_finite() {
                return None;
            }
            if decrement < NEWTON_TOL {
                break;
            }

            let f0 = phase1_value(prob, &v, s, t)?;
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let vc = v + step * delta.fixed_rows::<6>(0);
                let sc = s + step * delta[6];
                if let Some(fc) = phase1_value(prob, &vc, sc, t) {
                    if fc <= f0 - 1e-4 * step * decrement {
                        v = vc;
                        s = sc;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            if s < -1e-3 {
                return Some(v);
            }
        }
        if s < -1e-3 {
            return Some(v);
        }
        t *= T_GROW;
    }
    if s < 0.0 {
        Some(v)
    } else {
        None
    }
}

/// Largest `log det P` over the feasible set at a fixed contraction rate,
/// with the maximizing parameters; None if infeasible.
pub(crate) fn solve_fixed_alpha(
    verts: &[Matrix3<f64>],
    rho: f64,
    alpha: f64,
) -> Option<(Matrix3<f64>, f64)> {
    let prob = Problem::new(verts, rho, alpha);
    let v0 = find_feasible(&prob)?;
    let v = maximize_logdet(&prob, v0)?;
    let p = prob.p_of(&v);
    let ld = logdet(&p.cholesky()?);
    Some((p, ld))
}

/// Minimum-volume invariant ellipsoid for the vertex systems
/// `zetadot = A_i zeta + d`, `|d|_2 <= rho`, over all contraction rates.
///
/// Returns the set and the certified rate `alpha` (the decay
/// `Vdot <= -alpha (V - 1)` holds for every vertex, hence on the hull).
pub fn invariant_ellipsoid(
    verts: &[Matrix3<f64>],
    rho: f64,
) -> Result<(Ellipsoid, f64), SynthError> {
    assert!(!verts.is_empty(), "at least one vertex matrix is required");
    let (lo, hi) = ALPHA_RANGE;
    let grid: Vec<f64> = (0..ALPHA_GRID)
        .map(|i| lo * (hi / lo).powf(i as f64 / (ALPHA_GRID - 1) as f64))
        .collect();
    let score =
        |alpha: f64| solve_fixed_alpha(verts, rho, alpha).map_or(f64::NEG_INFINITY, |(_, ld)| ld);

    let scores: Vec<f64> = grid.iter().map(|&a| score(a)).collect();
    let best = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    if scores[best] == f64::NEG_INFINITY {
        return Err(SynthError::Infeasible);
    }

    // Golden-section refinement in log(alpha) on the bracket around the
    // best grid point.
    let mut a = grid[best.saturating_sub(1)].ln();
    let mut b = grid[(best + 1).min(ALPHA_GRID - 1)].ln();
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = score(x1.exp());
    let mut f2 = score(x2.exp());
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = score(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = score(x2.exp());
        }
    }
    let alpha = if f1 >= f2 { x1.exp() } else { x2.exp() };
    let (p, _) = solve_fixed_alpha(verts, rho, alpha).ok_or(SynthError::Infeasible)?;
    Ok((Ellipsoid { p }, alpha))
}
