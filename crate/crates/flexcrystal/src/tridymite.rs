//! Local deformation space of the ideal tridymite framework.
//!
//! Four regular unit tetrahedra are chained at corners `O`, `O1`, `O2` by
//! orientation-reversing orthogonal maps `R0`, `R1`, `R2`. The two integer
//! relations among the six marked periods reduce to
//! `(I - R0 - R1 + R2 R0) f_i = 0` on the plane `span(f1, f2)`. Substituting
//! `Q = -R0`, `Q1 = R1`, `Q2 = -R2 R0` turns this into
//! `e_i + Q e_i = Q1 e_i + Q2 e_i` for the in-plane frame vectors `e1, e2`,
//! a spherical four-bar problem: the four unit vectors `Q1 e_i`, `Q2 e_i`
//! pair up over the chord midpoints of `[e_i, Q e_i]`.
//!
//! For `Q` near the identity the closed form produces exactly four branches,
//! swapped by relabeling `Q1 <-> Q2` and by reflecting in the geodesic
//! through the two midpoints; the two involutions commute, giving a
//! `Z2 x Z2` action that fixes the aristotype (`R0 = -I`,
//! `R1 = R2 = reflection in span(f1, f2)`), where all branches coincide.
//!
//! Naming note: the fixed tetrahedron is `O D1 E1 O1` with `O1 = f0`,
//! `D1 = f1`, `E1 = f2`; its image under `R0` is `O D2 E2 O2` with
//! `E2 = R0 f2`.

use crate::framework::PeriodicRealization;
use crate::geom3::{
    chord_midpoint_circle, geodesic_reflection, reflection_across_plane, GeomError, Orthogonal3,
    Vec3, GEOM_TOL,
};
use crate::numfmt::sig17;
use crate::oracle::{
    fd_jacobian, grid_sign_scan, newton2, svd_rank, OracleError, ScalarSystem2,
};
use thiserror::Error;

/// Vertex orbits of the quotient graph.
pub const VERTEX_ORBITS: usize = 8;
/// Edge orbits of the quotient graph.
pub const EDGE_ORBITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TridymiteError {
    #[error("expected det sign {expected} for {name}, got {got}")]
    Orientation { name: &'static str, expected: i8, got: i8 },
    #[error("outside the solvable neighborhood: midpoint direction e{0} + Q e{0} vanishes")]
    VanishingMidpoint(usize),
    #[error("outside the solvable neighborhood: the two midpoint directions are collinear")]
    CollinearMidpoints,
    #[error("finite-difference step {0} outside [1e-8, 1e-3]")]
    StepOutOfRange(f64),
    #[error("numerical oracle failed: {0}")]
    Oracle(#[from] OracleError),
}

/// Fixed tetrahedron data: apex/corner vectors and the in-plane frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridymiteBase {
    /// Apex `O1`.
    pub f0: Vec3,
    /// Corner `D1`.
    pub f1: Vec3,
    /// Corner `E1`.
    pub f2: Vec3,
    /// Orthonormal frame with `span(e1, e2) = span(f1, f2)`.
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
    /// Reflection across `span(e1, e2)`.
    pub s: Orthogonal3,
}

/// Concrete coordinates: `f1 = (1,0,0)`, `f2 = (1/2, sqrt3/2, 0)`,
/// `f0 = (1/2, sqrt3/6, sqrt6/3)`; the frame is the standard basis and `S`
/// is `diag(1, 1, -1)`.
pub fn base() -> TridymiteBase {
    TridymiteBase {
        f0: Vec3::new(0.5, 3f64.sqrt() / 6.0, 6f64.sqrt() / 3.0),
        f1: Vec3::new(1.0, 0.0, 0.0),
        f2: Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0),
        e1: Vec3::EX,
        e2: Vec3::EY,
        e3: Vec3::EZ,
        s: reflection_across_plane(Vec3::EZ).expect("unit normal"),
    }
}

/// Which of the four branches a solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchLabel {
    /// Relabels `Q1 <-> Q2`.
    pub swap: bool,
    /// Composes with the reflection in the midpoint geodesic.
    pub reflect: bool,
}

/// One branch of the four-bar solution with the recovered framework maps and
/// the realized fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct TridymiteSolution {
    pub label: BranchLabel,
    pub q: Orthogonal3,
    pub q1: Orthogonal3,
    pub q2: Orthogonal3,
    pub r0: Orthogonal3,
    pub r1: Orthogonal3,
    pub r2: Orthogonal3,
    pub config: PeriodicRealization,
}

impl TridymiteSolution {
    /// Max residual of `e_i + Q e_i - Q1 e_i - Q2 e_i` over `i = 1, 2`.
    pub fn midpoint_residual(&self) -> f64 {
        midpoint_residual(&self.q, &self.q1, &self.q2)
    }

    /// Max residual of `(I - R0 - R1 + R2 R0) f_i` over `i = 1, 2`.
    pub fn period_relation_residual(&self) -> f64 {
        period_relation_residual(&self.r0, &self.r1, &self.r2)
    }
}

/// Residual of the in-plane constraint for a candidate `(Q1, Q2)`.
pub fn midpoint_residual(q: &Orthogonal3, q1: &Orthogonal3, q2: &Orthogonal3) -> f64 {
    let b = base();
    [b.e1, b.e2]
        .iter()
        .map(|&e| (e + q.apply(e) - q1.apply(e) - q2.apply(e)).norm())
        .fold(0.0f64, f64::max)
}

/// Residual of the period dependence for recovered `(R0, R1, R2)`.
pub fn period_relation_residual(r0: &Orthogonal3, r1: &Orthogonal3, r2: &Orthogonal3) -> f64 {
    let b = base();
    [b.f1, b.f2]
        .iter()
        .map(|&f| {
            (f - r0.apply(f) - r1.apply(f) + r2.apply(r0.apply(f))).norm()
        })
        .fold(0.0f64, f64::max)
}

/// Recovers the framework maps from a four-bar solution:
/// `R0 = -Q`, `R1 = Q1`, `R2 = Q2 Q^T`. All three come out orientation
/// reversing; input det signs are checked.
pub fn recover(
    q: &Orthogonal3,
    q1: &Orthogonal3,
    q2: &Orthogonal3,
) -> Result<(Orthogonal3, Orthogonal3, Orthogonal3), TridymiteError> {
    if q.det_sign() != 1 {
        return Err(TridymiteError::Orientation { name: "Q", expected: 1, got: q.det_sign() });
    }
    for (name, m) in [("Q1", q1), ("Q2", q2)] {
        if m.det_sign() != -1 {
            return Err(TridymiteError::Orientation { name, expected: -1, got: m.det_sign() });
        }
    }
    let r0 = -*q;
    let r1 = *q1;
    let r2 = *q2 * q.transpose();
    Ok((r0, r1, r2))
}

/// Assembles the 13-vertex, 24-edge fragment of four chained tetrahedra with
/// the six marked periods and their two integer relations.
pub fn realize(r0: &Orthogonal3, r1: &Orthogonal3, r2: &Orthogonal3) -> PeriodicRealization {
    let b = base();
    let o = Vec3::ZERO;
    let o1 = b.f0;
    let d1 = b.f1;
    let e1v = b.f2;
    let o2 = r0.apply(b.f0);
    let d2 = r0.apply(b.f1);
    let e2v = r0.apply(b.f2);
    // R1 acts with center O1; R2 acts with center O2 on the R0-image.
    let r2r0 = *r2 * *r0;
    let a1 = b.f0 + r1.apply(b.f1 - b.f0);
    let b1 = b.f0 + r1.apply(b.f2 - b.f0);
    let c1 = b.f0 - r1.apply(b.f0);
    let a2 = o2 + r2r0.apply(b.f1 - b.f0);
    let b2 = o2 + r2r0.apply(b.f2 - b.f0);
    let c2 = o2 - r2r0.apply(b.f0);

    let vertices = vec![
        ("O".to_string(), o),
        ("O1".to_string(), o1),
        ("O2".to_string(), o2),
        ("D1".to_string(), d1),
        ("D2".to_string(), d2),
        ("E1".to_string(), e1v),
        ("E2".to_string(), e2v),
        ("A1".to_string(), a1),
        ("A2".to_string(), a2),
        ("B1".to_string(), b1),
        ("B2".to_string(), b2),
        ("C1".to_string(), c1),
        ("C2".to_string(), c2),
    ];
    // indices: O=0 O1=1 O2=2 D1=3 D2=4 E1=5 E2=6 A1=7 A2=8 B1=9 B2=10 C1=11 C2=12
    let edges = vec![
        (0, 3),
        (0, 5),
        (0, 1),
        (3, 5),
        (3, 1),
        (5, 1), // fixed tetrahedron O D1 E1 O1
        (0, 4),
        (0, 6),
        (0, 2),
        (4, 6),
        (4, 2),
        (6, 2), // image tetrahedron O D2 E2 O2
        (1, 7),
        (1, 9),
        (1, 11),
        (7, 9),
        (7, 11),
        (9, 11), // tetrahedron at O1: A1 B1 C1
        (2, 8),
        (2, 10),
        (2, 12),
        (8, 10),
        (8, 12),
        (10, 12), // tetrahedron at O2: A2 B2 C2
    ];
    let generators = vec![
        ("A2-A1".to_string(), a2 - a1),
        ("B2-B1".to_string(), b2 - b1),
        ("C2-C1".to_string(), c2 - c1),
        ("D2-D1".to_string(), d2 - d1),
        ("E2-E1".to_string(), e2v - e1v),
        ("O2-O".to_string(), o2 - o),
    ];
    // (C2-C1) + (D2-D1) = (A2-A1) and (C2-C1) + (E2-E1) = (B2-B1)
    let relations = vec![vec![-1, 0, 1, 1, 0, 0], vec![0, -1, 1, 0, 1, 0]];

    PeriodicRealization { vertices, edges, generators, relations }
}

fn branch_from(
    label: BranchLabel,
    q: &Orthogonal3,
    q1: Orthogonal3,
    q2: Orthogonal3,
) -> TridymiteSolution {
    let (r0, r1, r2) = recover(q, &q1, &q2).expect("branch construction keeps det signs");
    let config = realize(&r0, &r1, &r2);
    TridymiteSolution { label, q: *q, q1, q2, r0, r1, r2, config }
}

/// Closed-form solution of the four-bar system for a rotation `Q`: the four
/// branches, in label order `(swap, reflect) = (0,0), (1,0), (0,1), (1,1)`.
///
/// With `S` the base reflection and `r` the reflection in the geodesic
/// through the two chord-midpoint directions, branches are `(S, QS)`,
/// `(QS, S)`, `(r, rQ)`, `(rQ, r)`. Coinciding branches are kept (and
/// reported by `ramification_defect`), not deduplicated.
pub fn solve(q: &Orthogonal3) -> Result<Vec<TridymiteSolution>, TridymiteError> {
    if q.det_sign() != 1 {
        return Err(TridymiteError::Orientation { name: "Q", expected: 1, got: q.det_sign() });
    }
    let b = base();
    let m1 = b.e1 + q.apply(b.e1);
    let m2 = b.e2 + q.apply(b.e2);
    if m1.norm() < GEOM_TOL {
        return Err(TridymiteError::VanishingMidpoint(1));
    }
    if m2.norm() < GEOM_TOL {
        return Err(TridymiteError::VanishingMidpoint(2));
    }
    let r = match geodesic_reflection(m1, m2) {
        Ok(r) => r,
        Err(GeomError::DegenerateGeodesic) => return Err(TridymiteError::CollinearMidpoints),
        Err(other) => panic!("unexpected geodesic failure: {other}"),
    };
    let s = b.s;
    Ok(vec![
        branch_from(BranchLabel { swap: false, reflect: false }, q, s, *q * s),
        branch_from(BranchLabel { swap: true, reflect: false }, q, *q * s, s),
        branch_from(BranchLabel { swap: false, reflect: true }, q, r, r * *q),
        branch_from(BranchLabel { swap: true, reflect: true }, q, r * *q, r),
    ])
}

/// The relabeling involution: exchanges `Q1` and `Q2`.
pub fn swap_branch(sol: &TridymiteSolution) -> TridymiteSolution {
    branch_from(
        BranchLabel { swap: !sol.label.swap, reflect: sol.label.reflect },
        &sol.q,
        sol.q2,
        sol.q1,
    )
}

/// The reflecting involution: conjugates the action on `e1, e2` by the
/// midpoint-geodesic reflection. On matrices this is `Qk -> r Qk S` (the
/// right factor `S` restores det -1 without touching the in-plane action).
pub fn reflect_branch(sol: &TridymiteSolution) -> Result<TridymiteSolution, TridymiteError> {
    let b = base();
    let m1 = b.e1 + sol.q.apply(b.e1);
    let m2 = b.e2 + sol.q.apply(b.e2);
    let r = match geodesic_reflection(m1, m2) {
        Ok(r) => r,
        Err(GeomError::DegenerateGeodesic) => return Err(TridymiteError::CollinearMidpoints),
        Err(other) => panic!("unexpected geodesic failure: {other}"),
    };
    Ok(branch_from(
        BranchLabel { swap: sol.label.swap, reflect: !sol.label.reflect },
        &sol.q,
        r * sol.q1 * b.s,
        r * sol.q2 * b.s,
    ))
}

/// Pairwise distances between branches (as actions on `e1, e2`) and the
/// count of distinct branches at threshold `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct RamificationReport {
    pub distances: Vec<Vec<f64>>,
    pub distinct: usize,
}

/// Distance between two branches: max over `i` and `k` of
/// `|Qk e_i - Qk' e_i|`.
pub fn branch_distance(a: &TridymiteSolution, b: &TridymiteSolution) -> f64 {
    let bb = base();
    let mut d = 0.0f64;
    for e in [bb.e1, bb.e2] {
        d = d.max((a.q1.apply(e) - b.q1.apply(e)).norm());
        d = d.max((a.q2.apply(e) - b.q2.apply(e)).norm());
    }
    d
}

/// How far the four sheets have separated: the pairwise branch distances and
/// the number of distinct branches at `tol` (1 at the aristotype, 2 on the
/// locus where the geodesic reflection commutes with `Q`, 4 generically).
#[allow(clippy::needless_range_loop)]
pub fn ramification_defect(solutions: &[TridymiteSolution], tol: f64) -> RamificationReport {
    let n = solutions.len();
    let mut distances = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = branch_distance(&solutions[i], &solutions[j]);
            distances[i][j] = d;
            distances[j][i] = d;
        }
    }
    // greedy clustering at tol
    let mut representative: Vec<usize> = Vec::new();
    for i in 0..n {
        if !representative.iter().any(|&r| distances[r][i] <= tol) {
            representative.push(i);
        }
    }
    RamificationReport { distances, distinct: representative.len() }
}

/// Outcome of the independent four-bar root count.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Number of distinct refined roots (or of distinct closed-form branches
    /// on the flagged degenerate path).
    pub count: usize,
    /// Refined roots as the point pairs `(Q1 e1, Q1 e2)`.
    pub roots: Vec<(Vec3, Vec3)>,
    /// Distance from each refined root to its nearest closed-form branch.
    pub match_distances: Vec<f64>,
    /// Set when `Q` fixes `e1` or `e2`, collapsing a circle to a point; the
    /// count then falls back to the closed-form branch set.
    pub degenerate: bool,
}

/// Counts four-bar solutions independently of the closed form: parametrizes
/// the two chord-midpoint circles, scans the orthogonality system
/// `{p1 . p2 = 0, (2 m1 - p1) . (2 m2 - p2) = 0}` for sign changes on a
/// `grid_n x grid_n` torus grid, refines candidates by Newton and dedupes at
/// `tol`. Every refined root is matched against the closed-form branches.
pub fn oracle_count(
    q: &Orthogonal3,
    grid_n: usize,
    tol: f64,
) -> Result<OracleReport, TridymiteError> {
    let b = base();
    let solutions = solve(q)?;

    let c1 = chord_midpoint_circle(b.e1, q.apply(b.e1)).expect("solve checked the midpoints");
    let c2 = chord_midpoint_circle(b.e2, q.apply(b.e2)).expect("solve checked the midpoints");
    if c1.degenerate || c2.degenerate {
        let ram = ramification_defect(&solutions, tol);
        return Ok(OracleReport {
            count: ram.distinct,
            roots: vec![],
            match_distances: vec![],
            degenerate: true,
        });
    }

    let (m1, m2) = (c1.m, c2.m);
    let system = ScalarSystem2::periodic_torus(move |alpha, beta| {
        let p1 = c1.point_at(alpha);
        let p2 = c2.point_at(beta);
        (p1.dot(p2), (m1 * 2.0 - p1).dot(m2 * 2.0 - p2))
    });

    let cells = grid_sign_scan(&system, grid_n);
    let mut roots: Vec<(Vec3, Vec3)> = Vec::new();
    let mut seed_cells: Vec<[f64; 2]> = cells
        .iter()
        .filter(|c| c.sign_change[0] && c.sign_change[1])
        .map(|c| c.center)
        .collect();
    if seed_cells.is_empty() {
        // fall back to every bracketing cell
        seed_cells = cells.iter().map(|c| c.center).collect();
    }
    for seed in seed_cells {
        let Ok(x) = newton2(&system, seed, 60, 1e-12) else { continue };
        let p1 = c1.point_at(x[0]);
        let p2 = c2.point_at(x[1]);
        let is_new = !roots
            .iter()
            .any(|&(a, bb)| (a - p1).norm().max((bb - p2).norm()) <= tol);
        if is_new {
            roots.push((p1, p2));
        }
    }

    let match_distances = roots
        .iter()
        .map(|&(p1, p2)| {
            solutions
                .iter()
                .map(|sol| {
                    let d1 = (sol.q1.apply(b.e1) - p1).norm();
                    let d2 = (sol.q1.apply(b.e2) - p2).norm();
                    let d3 = (sol.q2.apply(b.e1) - (m1 * 2.0 - p1)).norm();
                    let d4 = (sol.q2.apply(b.e2) - (m2 * 2.0 - p2)).norm();
                    d1.max(d2).max(d3).max(d4)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    Ok(OracleReport { count: roots.len(), roots, match_distances, degenerate: false })
}

/// Singular-value picture of the linearized constraint at the aristotype.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentReport {
    /// Dimension of the solution space of the linearized system (9 - rank).
    pub nullity: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Linearizes the constraint at the aristotype over the 9 parameters
/// `(X, Y1, Y2)` of `Q = exp(X)`, `Q1 = S exp(Y1)`, `Q2 = S exp(Y2)` (skew
/// matrices via their rotation vectors) and returns the nullity of the 6x9
/// finite-difference Jacobian at a relative singular-value threshold of
/// 1e-6. The step must lie in `[1e-8, 1e-3]`.
pub fn aristotype_tangent(h: f64) -> Result<TangentReport, TridymiteError> {
    if !(1e-8..=1e-3).contains(&h) {
        return Err(TridymiteError::StepOutOfRange(h));
    }
    let b = base();
    let constraint = move |p: &[f64]| -> Vec<f64> {
        let q = crate::geom3::rotation_from_rotvec(Vec3::new(p[0], p[1], p[2]));
        let q1 = b.s * crate::geom3::rotation_from_rotvec(Vec3::new(p[3], p[4], p[5]));
        let q2 = b.s * crate::geom3::rotation_from_rotvec(Vec3::new(p[6], p[7], p[8]));
        let g1 = b.e1 + q.apply(b.e1) - q1.apply(b.e1) - q2.apply(b.e1);
        let g2 = b.e2 + q.apply(b.e2) - q1.apply(b.e2) - q2.apply(b.e2);
        vec![g1.x, g1.y, g1.z, g2.x, g2.y, g2.z]
    };
    let jac = fd_jacobian(constraint, &[0.0; 9], h)?;
    let report = svd_rank(&jac, 1e-6);
    Ok(TangentReport {
        nullity: 9 - report.rank,
        rank: report.rank,
        singular_values: report.singular_values,
    })
}

/// Tangent-space dimension at the aristotype (the nullity above).
pub fn tangent_dimension_at_aristotype(h: f64) -> Result<usize, TridymiteError> {
    Ok(aristotype_tangent(h)?.nullity)
}

fn matrix_json(m: &Orthogonal3) -> String {
    let rows: Vec<String> = m
        .matrix()
        .iter()
        .map(|row| format!("[{},{},{}]", sig17(row[0]), sig17(row[1]), sig17(row[2])))
        .collect();
    format!("[{}]", rows.join(","))
}

/// JSON array of branches:
/// `{label:{swap,reflect}, Q1, Q2, R0, R1, R2, residual_eq4, residual_eq2,
/// config}` with matrices as row arrays and the framework document nested
/// under `config`.
pub fn solutions_to_json(solutions: &[TridymiteSolution]) -> String {
    let entries: Vec<String> = solutions
        .iter()
        .map(|sol| {
            format!(
                "{{\"label\":{{\"swap\":{},\"reflect\":{}}},\"Q1\":{},\"Q2\":{},\"R0\":{},\"R1\":{},\"R2\":{},\"residual_eq4\":{},\"residual_eq2\":{},\"config\":{}}}",
                sol.label.swap as u8,
                sol.label.reflect as u8,
                matrix_json(&sol.q1),
                matrix_json(&sol.q2),
                matrix_json(&sol.r0),
                matrix_json(&sol.r1),
                matrix_json(&sol.r2),
                sig17(sol.midpoint_residual()),
                sig17(sol.period_relation_residual()),
                sol.config.to_json(),
            )
        })
        .collect();
    format!("[{}]", entries.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3::rotation_from_axis_angle;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_axis(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    fn random_neighborhood_q(rng: &mut ChaCha8Rng) -> Orthogonal3 {
        rotation_from_axis_angle(random_axis(rng), rng.gen_range(0.05..0.5)).unwrap()
    }

    #[test]
    fn base_is_regular_with_matching_spans() {
        let b = base();
        let pts = [Vec3::ZERO, b.f0, b.f1, b.f2];
        for i in 0..4 {
            for j in (i + 1)..4 {
                assert_relative_eq!(pts[i].distance(pts[j]), 1.0, epsilon = 1e-15);
            }
        }
        // span(e1, e2) = span(f1, f2) = the z = 0 plane
        assert_eq!(b.f1.z, 0.0);
        assert_eq!(b.f2.z, 0.0);
        assert!((b.s.apply(b.f1) - b.f1).norm() < 1e-15);
        assert!((b.s.apply(b.f2) - b.f2).norm() < 1e-15);
        assert!((b.s.apply(b.f0) - b.f0).norm() > 0.5);
        assert!((b.s.apply(b.e3) + b.e3).norm() < 1e-15);
    }

    #[test]
    fn aristotype_branches_all_collapse_to_the_reflection() {
        let sols = solve(&Orthogonal3::IDENTITY).unwrap();
        assert_eq!(sols.len(), 4);
        let s = base().s;
        for sol in &sols {
            assert!(sol.q1.max_abs_diff(&s) < 1e-12);
            assert!(sol.q2.max_abs_diff(&s) < 1e-12);
            // recovered maps: R0 = -I, R1 = R2 = S
            assert!(sol.r0.max_abs_diff(&-Orthogonal3::IDENTITY) < 1e-12);
            assert!(sol.r1.max_abs_diff(&s) < 1e-12);
            assert!(sol.r2.max_abs_diff(&s) < 1e-12);
        }
        let ram = ramification_defect(&sols, 1e-9);
        assert_eq!(ram.distinct, 1);
        for row in &ram.distances {
            for &d in row {
                assert!(d < 1e-12);
            }
        }
    }

    #[test]
    fn e3_axis_rotations_collapse_to_two_branches() {
        // S commutes with e3-axis rotations, so r = S and branches pair up
        let b = base();
        let q = rotation_from_axis_angle(b.e3, 0.2).unwrap();
        assert!((q * b.s).max_abs_diff(&(b.s * q)) < 1e-12);
        let sols = solve(&q).unwrap();
        let ram = ramification_defect(&sols, 1e-9);
        assert_eq!(ram.distinct, 2);
    }

    #[test]
    fn generic_rotation_gives_four_distinct_branches() {
        let axis = Vec3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let q = rotation_from_axis_angle(axis, 0.3).unwrap();
        let sols = solve(&q).unwrap();
        let ram = ramification_defect(&sols, 1e-9);
        assert_eq!(ram.distinct, 4);
        for sol in &sols {
            assert!(sol.midpoint_residual() < 1e-9);
        }
    }

    #[test]
    fn branches_satisfy_both_constraints_and_det_bookkeeping() {
        let b = base();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let q = random_neighborhood_q(&mut rng);
            for sol in solve(&q).unwrap() {
                assert!(sol.midpoint_residual() < 1e-9);
                assert!(sol.period_relation_residual() < 1e-9);
                assert_eq!(sol.q1.det_sign(), -1);
                assert_eq!(sol.q2.det_sign(), -1);
                assert_eq!(sol.r0.det_sign(), -1);
                assert_eq!(sol.r1.det_sign(), -1);
                assert_eq!(sol.r2.det_sign(), -1);
                // the pi/2-arc condition: images of e1, e2 stay orthogonal
                assert!(sol.q1.apply(b.e1).dot(sol.q1.apply(b.e2)).abs() < 1e-12);
                assert!(sol.q2.apply(b.e1).dot(sol.q2.apply(b.e2)).abs() < 1e-12);
                // det -1 extension rule
                for m in [&sol.q1, &sol.q2] {
                    let expected = -(m.apply(b.e1).cross(m.apply(b.e2)));
                    assert!((m.apply(b.e3) - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn recover_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..100 {
            let q = random_neighborhood_q(&mut rng);
            for sol in solve(&q).unwrap() {
                let (r0, r1, r2) = (sol.r0, sol.r1, sol.r2);
                // (-R0, R1, -R2 R0) = (Q, Q1, Q2)
                assert!((-r0).max_abs_diff(&sol.q) < 1e-12);
                assert!(r1.max_abs_diff(&sol.q1) < 1e-12);
                assert!((-(r2 * r0)).max_abs_diff(&sol.q2) < 1e-12);
            }
        }
    }

    #[test]
    fn recover_rejects_wrong_det_signs() {
        let b = base();
        let q = Orthogonal3::IDENTITY;
        assert!(matches!(
            recover(&q, &q, &b.s),
            Err(TridymiteError::Orientation { name: "Q1", .. })
        ));
        assert!(matches!(
            recover(&b.s, &b.s, &b.s),
            Err(TridymiteError::Orientation { name: "Q", .. })
        ));
    }

    #[test]
    fn realize_aristotype_is_valid() {
        let s = base().s;
        let config = realize(&-Orthogonal3::IDENTITY, &s, &s);
        assert_eq!(config.vertices.len(), 13);
        assert_eq!(config.edges.len(), 24);
        let report = config.validate(1e-9).unwrap();
        assert!(report.pass, "{report}");
        assert!(report.max_edge_length_error < 1e-12);
        assert!(report.max_relation_residual < 1e-12);
    }

    #[test]
    fn relation_rows_match_matrix_identity() {
        // (C2-C1) + (D2-D1) - (A2-A1) computed from vertices equals
        // -(I - R0 - R1 + R2 R0) f1 computed from matrices
        let b = base();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let q = random_neighborhood_q(&mut rng);
            for sol in solve(&q).unwrap() {
                let pos = |label: &str| {
                    sol.config
                        .vertices
                        .iter()
                        .find(|(l, _)| l == label)
                        .map(|(_, p)| *p)
                        .unwrap()
                };
                let lhs = (pos("C2") - pos("C1")) + (pos("D2") - pos("D1"))
                    - (pos("A2") - pos("A1"));
                let f1 = b.f1;
                let rhs = -(f1 - sol.r0.apply(f1) - sol.r1.apply(f1)
                    + sol.r2.apply(sol.r0.apply(f1)));
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn breaking_the_constraint_shows_up_linearly_in_relations() {
        // perturbing R1 by delta makes the first relation residual
        // |delta f1| exactly
        let b = base();
        let s = b.s;
        let r0 = -Orthogonal3::IDENTITY;
        for eps in [1e-3f64, 1e-6] {
            let w = s.apply(b.f1);
            let axis = w.any_orthonormal().unwrap();
            let delta = 2.0 * (eps / 2.0).asin();
            let spoiled = rotation_from_axis_angle(axis, delta).unwrap() * s;
            let config = realize(&r0, &spoiled, &s);
            let report = config.validate(1e-12).unwrap();
            // residual row 1 is |(spoiled - S) f1| = eps by construction
            assert_relative_eq!(report.max_relation_residual, eps, max_relative = 1e-6);
        }
    }

    #[test]
    fn z2z2_action_squares_commutes_and_fixes_aristotype() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..50 {
            let q = random_neighborhood_q(&mut rng);
            let sols = solve(&q).unwrap();
            for sol in &sols {
                let twice_swapped = swap_branch(&swap_branch(sol));
                assert!(twice_swapped.q1.max_abs_diff(&sol.q1) < 1e-12);
                assert!(twice_swapped.q2.max_abs_diff(&sol.q2) < 1e-12);

                let twice_reflected = reflect_branch(&reflect_branch(sol).unwrap()).unwrap();
                assert!(twice_reflected.q1.max_abs_diff(&sol.q1) < 1e-12);
                assert!(twice_reflected.q2.max_abs_diff(&sol.q2) < 1e-12);

                let sr = swap_branch(&reflect_branch(sol).unwrap());
                let rs = reflect_branch(&swap_branch(sol)).unwrap();
                assert!(sr.q1.max_abs_diff(&rs.q1) < 1e-12);
                assert!(sr.q2.max_abs_diff(&rs.q2) < 1e-12);
                assert_eq!(sr.label, rs.label);
            }
            // the involutions permute the emitted branch list by label
            for sol in &sols {
                let swapped = swap_branch(sol);
                let partner = sols.iter().find(|s| s.label == swapped.label).unwrap();
                assert!(swapped.q1.max_abs_diff(&partner.q1) < 1e-12);
                let reflected = reflect_branch(sol).unwrap();
                let partner = sols.iter().find(|s| s.label == reflected.label).unwrap();
                assert!(reflected.q1.max_abs_diff(&partner.q1) < 1e-12);
            }
        }
        // at the aristotype both involutions fix the single branch
        let sols = solve(&Orthogonal3::IDENTITY).unwrap();
        for sol in &sols {
            assert!(swap_branch(sol).q1.max_abs_diff(&sol.q1) < 1e-12);
            assert!(reflect_branch(sol).unwrap().q1.max_abs_diff(&sol.q1) < 1e-12);
        }
    }

    #[test]
    fn oracle_agrees_with_branches_generic_and_degenerate() {
        let axis = Vec3::new(1.0, 1.0, 1.0).normalized().unwrap();
        let q = rotation_from_axis_angle(axis, 0.3).unwrap();
        let report = oracle_count(&q, 256, 1e-6).unwrap();
        assert!(!report.degenerate);
        assert_eq!(report.count, 4);
        for d in &report.match_distances {
            assert!(*d < 1e-7, "oracle root off the branches by {d}");
        }

        // Q = I: circles are points; flagged path counts the single branch
        let report = oracle_count(&Orthogonal3::IDENTITY, 64, 1e-6).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.count, 1);
    }

    #[test]
    fn two_branch_locus_roots_are_tangential() {
        // e3-axis rotations sit on the sheet-coalescence locus: the merged
        // branch pairs are second-order zeros of the four-bar system (the
        // Jacobian vanishes there), so the Newton oracle cannot refine them
        // and only the generic count is meaningful. The merged branch points
        // must still be exact zeros of the system.
        let b = base();
        let q = rotation_from_axis_angle(b.e3, 0.25).unwrap();
        let sols = solve(&q).unwrap();
        assert_eq!(ramification_defect(&sols, 1e-6).distinct, 2);

        let c1 = crate::geom3::chord_midpoint_circle(b.e1, q.apply(b.e1)).unwrap();
        let c2 = crate::geom3::chord_midpoint_circle(b.e2, q.apply(b.e2)).unwrap();
        for sol in &sols {
            let p1 = sol.q1.apply(b.e1);
            let p2 = sol.q1.apply(b.e2);
            assert!(c1.contains(p1, 1e-12));
            assert!(c2.contains(p2, 1e-12));
            let f1 = p1.dot(p2);
            let f2 = (c1.m * 2.0 - p1).dot(c2.m * 2.0 - p2);
            assert!(f1.abs() < 1e-12 && f2.abs() < 1e-12, "branch not a system zero");
        }

        // whatever the oracle finds off the merged pairs are genuine roots
        let report = oracle_count(&q, 256, 1e-6).unwrap();
        assert!(!report.degenerate);
        for &(p1, p2) in &report.roots {
            assert!(c1.contains(p1, 1e-9));
            assert!(c2.contains(p2, 1e-9));
            assert!(p1.dot(p2).abs() < 1e-10);
        }
    }

    #[test]
    fn out_of_neighborhood_inputs_are_rejected() {
        // a half-turn about e3 sends e1 to -e1: vanishing midpoint
        let q = rotation_from_axis_angle(base().e3, std::f64::consts::PI).unwrap();
        assert!(matches!(solve(&q), Err(TridymiteError::VanishingMidpoint(_))));

        let tilted = rotation_from_axis_angle(
            Vec3::new(1.0, 1.0, 0.0).normalized().unwrap(),
            std::f64::consts::PI,
        )
        .unwrap();
        // midpoints may instead become collinear for in-plane half-turns
        assert!(solve(&tilted).is_err());
    }

    #[test]
    fn tangent_dimension_is_six_with_rank_three() {
        for h in [1e-4, 1e-5, 1e-6] {
            let report = aristotype_tangent(h).unwrap();
            assert_eq!(report.nullity, 6, "step {h}");
            assert_eq!(report.rank, 3, "step {h}");
            assert_eq!(report.nullity + report.rank, 9);
        }
        assert_eq!(tangent_dimension_at_aristotype(1e-5).unwrap(), 6);
        assert!(matches!(
            aristotype_tangent(1e-2),
            Err(TridymiteError::StepOutOfRange(_))
        ));
    }

    #[test]
    fn solution_json_has_contract_fields() {
        let q = rotation_from_axis_angle(Vec3::new(1.0, 1.0, 1.0).normalized().unwrap(), 0.3)
            .unwrap();
        let sols = solve(&q).unwrap();
        let json = solutions_to_json(&sols);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let arr = parsed.as_array().unwrap();
        assert_eq!(arr.len(), 4);
        for entry in arr {
            for key in ["label", "Q1", "Q2", "R0", "R1", "R2", "residual_eq4", "residual_eq2", "config"]
            {
                assert!(entry.get(key).is_some(), "missing {key}");
            }
            assert!(entry["residual_eq4"].as_f64().unwrap() < 1e-9);
            assert!(entry["residual_eq2"].as_f64().unwrap() < 1e-9);
            let config = PeriodicRealization::from_json(
                entry["config"].to_string().as_bytes(),
            )
            .unwrap();
            assert_eq!(config.vertices.len(), 13);
        }
    }
}
