//! Convex polygon primitives for reachable-set bookkeeping: monotone-chain
//! hulls, Minkowski sums by edge merging, support functions, and
//! separating-axis intersection tests (touching counts as intersecting).

use nalgebra::Vector2;

type P2 = Vector2<f64>;

fn cross(o: &P2, a: &P2, b: &P2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex polygon, vertices in counter-clockwise order without repeats.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    verts: Vec<P2>,
}

impl Polygon {
    /// Convex hull (Andrew monotone chain); collinear points are dropped.
    pub fn convex_hull(points: &[P2]) -> Polygon {
        let mut pts: Vec<P2> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
        if pts.len() < 3 {
            return Polygon { verts: pts };
        }
        Polygon::monotone_chain(&pts)
    }

    fn monotone_chain(sorted: &[P2]) -> Polygon {
        let n = sorted.len();
        let mut lower: Vec<P2> = Vec::new();
        for p in sorted {
            while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(*p);
        }
        let mut upper: Vec<P2> = Vec::new();
        for p in sorted.iter().rev() {
            while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(*p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() < 3 {
            // Fully collinear input: keep the two extremes.
            let mut ends = vec![sorted[0]];
            if n > 1 {
                ends.push(sorted[n - 1]);
            }
            return Polygon { verts: ends };
        }
        Polygon { verts: lower }
    }

    pub fn vertices(&self) -> &[P2] {
        &self.verts
    }

    pub fn translate(&self, v: &P2) -> Polygon {
        Polygon { verts: self.verts.iter().map(|p| p + v).collect() }
    }

    /// Scale about `center` (a superset of `self` when `s >= 1` and the
    /// center lies inside).
    pub fn scale_about(&self, center: &P2, s: f64) -> Polygon {
        Polygon { verts: self.verts.iter().map(|p| center + s * (p - center)).collect() }
    }

    /// Mean of the vertices: always interior for a convex polygon.
    pub fn vertex_mean(&self) -> P2 {
        self.verts.iter().sum::<P2>() / self.verts.len() as f64
    }

    /// Support value `max_v <v, dir>`.
    pub fn support(&self, dir: &P2) -> f64 {
        self.verts.iter().map(|v| v.dot(dir)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when `p` lies inside or on the boundary.
    pub fn contains_point(&self, p: &P2) -> bool {
        if self.verts.len() < 3 {
            return false;
        }
        let n = self.verts.len();
        (0..n).all(|i| cross(&self.verts[i], &self.verts[(i + 1) % n], p) >= -1e-12)
    }

    fn lowest_then_leftmost_first(&self) -> Vec<P2> {
        let mut v = self.verts.clone();
        let start = v
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
            .map(|(i, _)| i)
            .unwrap();
        v.rotate_left(start);
        v
    }

    /// Minkowski sum by merging edge sequences in angular order.
    pub fn minkowski_sum(&self, other: &Polygon) -> Polygon {
        assert!(
            self.verts.len() >= 3 && other.verts.len() >= 3,
            "minkowski_sum needs non-degenerate polygons"
        );
        let mut p = self.lowest_then_leftmost_first();
        let mut q = other.lowest_then_leftmost_first();
        let (np, nq) = (p.len(), q.len());
        p.push(p[0]);
        p.push(p[1]);
        q.push(q[0]);
        q.push(q[1]);

        let mut sum: Vec<P2> = Vec::with_capacity(np + nq);
        let (mut i, mut j) = (0usize, 0usize);
        while i < np || j < nq {
            sum.push(p[i] + q[j]);
            let c = cross(&P2::zeros(), &(p[i + 1] - p[i]), &(q[j + 1] - q[j]));
            if c >= 0.0 && i < np {
                i += 1;
            }
            if c <= 0.0 && j < nq {
                j += 1;
            }
        }
        sum.dedup_by(|a, b| (*a - *b).norm() == 0.0);
        Polygon { verts: sum }
    }

    /// Separating-axis intersection test for convex polygons.  Touching
    /// boundaries count as intersecting: separation requires a strictly
    /// positive gap along some edge normal.
    pub fn intersects(&self, other: &Polygon) -> bool {
        !separated_on_normals_of(self, self, other)
            && !separated_on_normals_of(other, self, other)
    }
}

fn project(poly: &Polygon, axis: &P2) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in poly.vertices() {
        let d = v.dot(axis);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

fn separated_on_normals_of(edges_of: &Polygon, a: &Polygon, b: &Polygon) -> bool {
    let n = edges_of.verts.len();
    (0..n).any(|i| {
        let e = edges_of.verts[(i + 1) % n] - edges_of.verts[i];
        let normal = P2::new(-e.y, e.x);
        let (amin, amax) = project(a, &normal);
        let (bmin, bmax) = project(b, &normal);
        amax < bmin || bmax < amin
    })
}

/// Regular polygon circumscribing the disk of radius `r` (the disk is a
/// subset; used to over-approximate rotational smear).
pub fn disk_cover(center: &P2, r: f64, sides: usize) -> Polygon {
    let sides = sides.max(3);
    let rr = r / (std::f64::consts::PI / sides as f64).cos();
    let verts = (0..sides)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
            center + rr * P2::new(a.cos(), a.sin())
        })
        .collect();
    Polygon { verts }
}

/// Axis-aligned box as a polygon.
pub fn rect(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Polygon {
    Polygon {
        verts: vec![
            P2::new(xmin, ymin),
            P2::new(xmax, ymin),
            P2::new(xmax, ymax),
            P2::new(xmin, ymax),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_square() -> Polygon {
        rect(0.0, 1.0, 0.0, 1.0)
    }

    #[test]
    fn hull_of_noisy_square_keeps_corners() {
        let pts = [
            P2::new(0.0, 0.0),
            P2::new(1.0, 0.0),
            P2::new(1.0, 1.0),
            P2::new(0.0, 1.0),
            P2::new(0.5, 0.5),
            P2::new(0.5, 0.0), // collinear on an edge
            P2::new(0.25, 0.25),
        ];
        let hull = Polygon::convex_hull(&pts);
        assert_eq!(hull.vertices().len(), 4);
        for corner in unit_square().vertices() {
            assert!(hull.vertices().iter().any(|v| (v - corner).norm() < 1e-12));
        }
    }

    #[test]
    fn hull_orientation_is_counter_clockwise() {
        let hull = Polygon::convex_hull(&[
            P2::new(2.0, 0.0),
            P2::new(0.0, 0.0),
            P2::new(1.0, 2.0),
        ]);
        let v = hull.vertices();
        let n = v.len();
        let area2: f64 =
            (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum();
        assert!(area2 > 0.0);
    }

    #[test]
    fn minkowski_sum_of_squares_is_a_square() {
        let a = unit_square();
        let b = rect(-0.5, 0.5, -0.5, 0.5);
        let s = a.minkowski_sum(&b);
        let expect = rect(-0.5, 1.5, -0.5, 1.5);
        assert_eq!(s.vertices().len(), 4);
        for v in expect.vertices() {
            assert!(s.vertices().iter().any(|u| (u - v).norm() < 1e-12));
        }
    }

    #[test]
    fn support_of_sum_adds_supports() {
        let a = Polygon::convex_hull(&[
            P2::new(0.0, 0.0),
            P2::new(2.0, 0.3),
            P2::new(1.5, 1.8),
            P2::new(-0.4, 1.0),
        ]);
        let b = Polygon::convex_hull(&[
            P2::new(0.1, -0.2),
            P2::new(0.9, 0.0),
            P2::new(0.4, 0.7),
        ]);
        let s = a.minkowski_sum(&b);
        for k in 0..64 {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let d = P2::new(ang.cos(), ang.sin());
            assert_relative_eq!(s.support(&d), a.support(&d) + b.support(&d), epsilon = 1e-12);
        }
    }

    #[test]
    fn separation_test_on_known_cases() {
        let a = unit_square();
        let apart = a.translate(&P2::new(3.0, 0.0));
        let overlap = a.translate(&P2::new(0.5, 0.5));
        let touch_edge = a.translate(&P2::new(1.0, 0.25));
        let touch_corner = a.translate(&P2::new(1.0, 1.0));
        assert!(!a.intersects(&apart));
        assert!(a.intersects(&overlap));
        assert!(a.intersects(&touch_edge), "shared edge counts as contact");
        assert!(a.intersects(&touch_corner), "shared corner counts as contact");

        // Diamond vs square: corner regions disjoint even when boxes meet.
        let diamond = Polygon::convex_hull(&[
            P2::new(2.4, 0.5),
            P2::new(3.4, 1.5),
            P2::new(4.4, 0.5),
            P2::new(3.4, -0.5),
        ]);
        assert!(!a.intersects(&diamond));
    }

    #[test]
    fn containment_counts_boundary() {
        let a = unit_square();
        assert!(a.contains_point(&P2::new(0.5, 0.5)));
        assert!(a.contains_point(&P2::new(1.0, 0.5)));
        assert!(a.contains_point(&P2::new(0.0, 0.0)));
        assert!(!a.contains_point(&P2::new(1.0001, 0.5)));
    }

    #[test]
    fn disk_cover_contains_the_disk() {
        let c = P2::new(1.0, -2.0);
        let poly = disk_cover(&c, 0.7, 16);
        for k in 0..256 {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
            let p = c + 0.7 * P2::new(ang.cos(), ang.sin());
            assert!(poly.contains_point(&p), "disk point escaped at angle {ang:.3}");
        }
    }

    #[test]
    fn dilation_about_interior_point_is_a_superset() {
        let a = Polygon::convex_hull(&[
            P2::new(0.0, 0.0),
            P2::new(3.0, 0.5),
            P2::new(2.0, 2.5),
            P2::new(-0.5, 1.5),
        ]);
        let bigger = a.scale_about(&a.vertex_mean(), 1.01);
        for v in a.vertices() {
            assert!(bigger.contains_point(v));
        }
    }

    /// Brute-force intersection oracle: vertex containment or proper edge
    /// crossings (exact for polygons in general position).
    fn brute_intersects(a: &Polygon, b: &Polygon) -> bool {
        if a.vertices().iter().any(|v| b.contains_point(v)) {
            return true;
        }
        if b.vertices().iter().any(|v| a.contains_point(v)) {
            return true;
        }
        let (va, vb) = (a.vertices(), b.vertices());
        for i in 0..va.len() {
            for j in 0..vb.len() {
                let (p1, p2) = (va[i], va[(i + 1) % va.len()]);
                let (q1, q2) = (vb[j], vb[(j + 1) % vb.len()]);
                let d1 = cross(&p1, &p2, &q1);
                let d2 = cross(&p1, &p2, &q2);
                let d3 = cross(&q1, &q2, &p1);
                let d4 = cross(&q1, &q2, &p2);
                if ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0)) {
                    return true;
                }
            }
        }
        false
    }

    proptest! {
        #[test]
        fn prop_separation_matches_brute_force(
            pts_a in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..10),
            pts_b in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..10),
            shift in (-6.0f64..6.0, -6.0f64..6.0),
        ) {
            let a = Polygon::convex_hull(&pts_a.iter().map(|p| P2::new(p.0, p.1)).collect::<Vec<_>>());
            let b = Polygon::convex_hull(&pts_b.iter().map(|p| P2::new(p.0, p.1)).collect::<Vec<_>>())
                .translate(&P2::new(shift.0, shift.1));
            prop_assume!(a.vertices().len() >= 3 && b.vertices().len() >= 3);
            prop_assert_eq!(a.intersects(&b), brute_intersects(&a, &b));
        }

        #[test]
        fn prop_minkowski_support_identity(
            pts_a in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3..8),
            pts_b in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3..8),
            angle in 0.0f64..std::f64::consts::TAU,
        ) {
            let a = Polygon::convex_hull(&pts_a.iter().map(|p| P2::new(p.0, p.1)).collect::<Vec<_>>());
            let b = Polygon::convex_hull(&pts_b.iter().map(|p| P2::new(p.0, p.1)).collect::<Vec<_>>());
            prop_assume!(a.vertices().len() >= 3 && b.vertices().len() >= 3);
            let s = a.minkowski_sum(&b);
            let d = P2::new(angle.cos(), angle.sin());
            let lhs = s.support(&d);
            let rhs = a.support(&d) + b.support(&d);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
