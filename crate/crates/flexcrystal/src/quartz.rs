//! Deformation chart of the ideal quartz framework.
//!
//! The fragment is three congruent regular unit tetrahedra: a fixed one
//! `A0 A1 A2 A3` and two neighbours attached at the shared corners `A0` and
//! `A1` by orientation-reversing orthogonal maps `R0` and `R1`. Closing the
//! periodicity lattice forces the four marked generators to sum to zero,
//! which pins `R1 v - R0 v = u` for `v = e1 - e2 - e3`, `u = e1 + e2 - e3`.
//! Since `|R0 v| = |v| = |u|`, the image `R0 v` stays on a fixed circle, and
//! the remaining freedom is one spin angle for each of `R0` and `R1`. The
//! resulting chart `(theta, phi0, phi1)` covers the deformation space as a
//! 3-torus; configurations whose generators drop below lattice rank 3 are
//! flagged as degenerate rather than excluded.

use crate::framework::{lattice_singular_values, PeriodicRealization};
use crate::geom3::{
    det3, reflection_across_plane, rotation_circle, Orthogonal3, Vec3,
};
use std::f64::consts::TAU;
use std::io::{self, Write};

/// Torus coordinates of a quartz configuration; each angle is reduced
/// mod 2pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartzChart {
    pub theta: f64,
    pub phi0: f64,
    pub phi1: f64,
}

impl QuartzChart {
    pub fn new(theta: f64, phi0: f64, phi1: f64) -> Self {
        QuartzChart {
            theta: theta.rem_euclid(TAU),
            phi0: phi0.rem_euclid(TAU),
            phi1: phi1.rem_euclid(TAU),
        }
    }
}

/// The fixed regular unit tetrahedron and its edge vectors `e_i = A_i - A0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartzBase {
    pub corners: [Vec3; 4],
    pub edge_vectors: [Vec3; 3],
}

/// Reference tetrahedron: `A0` at the origin, `A1` on the x-axis, `A2` in
/// the xy-plane, `A3` above. All pairwise distances are 1 and
/// `e_i . e_j = 1/2` for `i != j`.
pub fn base_tetrahedron() -> QuartzBase {
    let a0 = Vec3::ZERO;
    let a1 = Vec3::new(1.0, 0.0, 0.0);
    let a2 = Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0);
    let a3 = Vec3::new(0.5, 3f64.sqrt() / 6.0, 6f64.sqrt() / 3.0);
    QuartzBase { corners: [a0, a1, a2, a3], edge_vectors: [a1 - a0, a2 - a0, a3 - a0] }
}

/// The closure vectors `(v, u) = (e1 - e2 - e3, e1 + e2 - e3)` of the
/// reference tetrahedron. Both have norm sqrt(2) and are orthogonal.
pub fn closure_vectors() -> (Vec3, Vec3) {
    let e = base_tetrahedron().edge_vectors;
    (e[0] - e[1] - e[2], e[0] + e[1] - e[2])
}

/// Fixed data of the chart: the constraint circle for `R0 v` and the pinned
/// section making both maps orientation-reversing.
struct ChartFrame {
    v: Vec3,
    u: Vec3,
    /// Center of the constraint circle (`-u/2`).
    center: Vec3,
    /// Circle radius, sqrt(3/2).
    radius: f64,
    /// In-plane basis of the circle: `p` from the component of `e3`
    /// orthogonal to `u`, `q = u_hat x p`. Pinned so charts are reproducible.
    p: Vec3,
    q: Vec3,
    /// Reflection across the plane spanned by `v` and `u`; composing with it
    /// flips the determinant while fixing `v`.
    section: Orthogonal3,
}

fn chart_frame() -> ChartFrame {
    let base = base_tetrahedron();
    let e = base.edge_vectors;
    let v = e[0] - e[1] - e[2];
    let u = e[0] + e[1] - e[2];
    let u_hat = u.normalized().expect("u is nonzero");
    let center = u * -0.5;
    let radius = (v.norm_squared() - center.norm_squared()).sqrt();
    let p = (e[2] - u_hat * e[2].dot(u_hat)).normalized().expect("e3 not parallel to u");
    let q = u_hat.cross(p);
    let section = reflection_across_plane(v.cross(u).normalized().expect("v, u independent"))
        .expect("unit normal");
    ChartFrame { v, u, center, radius, p, q, section }
}

/// Point of the constraint circle at angle `theta`: where `R0 v` lands.
pub fn constraint_circle_point(theta: f64) -> Vec3 {
    let f = chart_frame();
    f.center + (f.p * theta.cos() + f.q * theta.sin()) * f.radius
}

/// Realized configuration: the two orientation-reversing maps and the
/// assembled fragment with its four generators.
#[derive(Debug, Clone, PartialEq)]
pub struct QuartzConfig {
    pub r0: Orthogonal3,
    pub r1: Orthogonal3,
    pub edge_vectors: [Vec3; 3],
    pub fragment: PeriodicRealization,
}

impl QuartzConfig {
    /// Sum of the four lattice generators, read off the assembled fragment.
    pub fn generator_sum(&self) -> Vec3 {
        self.fragment
            .generators
            .iter()
            .fold(Vec3::ZERO, |acc, (_, g)| acc + *g)
    }

    /// The closure residual `|R1 v - R0 v - u|` recomputed purely from
    /// vertex positions (no matrices involved): `R1 v` and `R0 v` are
    /// telescoped out of the attached tetrahedra.
    pub fn closure_residual(&self) -> f64 {
        let pos = |label: &str| {
            self.fragment
                .vertices
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, p)| *p)
                .expect("quartz fragment labels")
        };
        let (a0, a1, a2, a3) = (pos("A0"), pos("A1"), pos("A2"), pos("A3"));
        let (b1, b2, b3) = (pos("B1"), pos("B2"), pos("B3"));
        let (c0, c2, c3) = (pos("C0"), pos("C2"), pos("C3"));
        let r1v = c0 - c2 - c3 + a1;
        let r0v = b1 - b2 - b3 + a0;
        let u = a1 + a2 - a3 - a0;
        (r1v - r0v - u).norm()
    }

    /// Determinant of the generator triple `(g1, g2, g3)`. With the zero-sum
    /// relation in force all four triple minors agree up to sign, so this one
    /// number detects lattice degeneracy and its sign changes locate it.
    pub fn cell_det(&self) -> f64 {
        let g: Vec<Vec3> = self.fragment.generators.iter().map(|(_, v)| *v).collect();
        det3(g[0], g[1], g[2])
    }

    fn generator_vectors(&self) -> Vec<Vec3> {
        self.fragment.generators.iter().map(|(_, v)| *v).collect()
    }
}

/// Maps chart coordinates to the pair `(R0, R1)`, both orientation
/// reversing, with `R1 v - R0 v = u` holding by construction.
///
/// `R0 = rotation_circle(v, w0(theta), phi0) . section` and likewise for
/// `R1` with target `w1 = w0 + u`. The construction is total on the torus:
/// the circle stays away from `-v` because every circle point has
/// `w . u = -1` while `(-v) . u = 0`.
pub fn chart_to_rotations(chart: &QuartzChart) -> (Orthogonal3, Orthogonal3) {
    let f = chart_frame();
    let w0 = f.center + (f.p * chart.theta.cos() + f.q * chart.theta.sin()) * f.radius;
    let w1 = w0 + f.u;
    let r0 = rotation_circle(f.v, w0, chart.phi0)
        .expect("constraint circle never meets -v")
        * f.section;
    let r1 = rotation_circle(f.v, w1, chart.phi1)
        .expect("shifted circle never meets -v")
        * f.section;
    (r0, r1)
}

/// Assembles the three-tetrahedron fragment from arbitrary orthogonal maps
/// attached at `A0` and `A1`. Generators are read off the vertex positions.
pub fn assemble(r0: &Orthogonal3, r1: &Orthogonal3, base: &QuartzBase) -> QuartzConfig {
    let [a0, a1, a2, a3] = base.corners;
    let e = base.edge_vectors;

    // R0 fixes A0 and carries A_i to B_i; R1 fixes A1 and carries A_j to C_j.
    let b1 = a0 + r0.apply(e[0]);
    let b2 = a0 + r0.apply(e[1]);
    let b3 = a0 + r0.apply(e[2]);
    let c0 = a1 + r1.apply(a0 - a1);
    let c2 = a1 + r1.apply(a2 - a1);
    let c3 = a1 + r1.apply(a3 - a1);

    let vertices = vec![
        ("A0".to_string(), a0),
        ("A1".to_string(), a1),
        ("A2".to_string(), a2),
        ("A3".to_string(), a3),
        ("B1".to_string(), b1),
        ("B2".to_string(), b2),
        ("B3".to_string(), b3),
        ("C0".to_string(), c0),
        ("C2".to_string(), c2),
        ("C3".to_string(), c3),
    ];
    // indices: A0..A3 = 0..3, B1..B3 = 4..6, C0, C2, C3 = 7..9
    let edges = vec![
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 3), // fixed tetrahedron
        (0, 4),
        (0, 5),
        (0, 6),
        (4, 5),
        (4, 6),
        (5, 6), // tetrahedron at A0
        (1, 7),
        (1, 8),
        (1, 9),
        (7, 8),
        (7, 9),
        (8, 9), // tetrahedron at A1
    ];
    let generators = vec![
        ("g1".to_string(), b3 - c2),
        ("g2".to_string(), a3 - c3),
        ("g3".to_string(), b2 - a2),
        ("g4".to_string(), c0 - b1),
    ];
    let relations = vec![vec![1, 1, 1, 1]];

    QuartzConfig {
        r0: *r0,
        r1: *r1,
        edge_vectors: e,
        fragment: PeriodicRealization { vertices, edges, generators, relations },
    }
}

/// Realizes the fragment at a chart point. Total on the torus; degeneracy is
/// reported by `is_degenerate`/validation, never by exclusion here.
pub fn realize(chart: &QuartzChart) -> QuartzConfig {
    let (r0, r1) = chart_to_rotations(chart);
    assemble(&r0, &r1, &base_tetrahedron())
}

/// True when the four generators span less than rank 3 at threshold `tol`.
pub fn is_degenerate(config: &QuartzConfig, tol: f64) -> bool {
    let sv = lattice_singular_values(&config.generator_vectors());
    sv.iter().filter(|&&s| s > tol).count() < 3
}

/// Independently re-extracts `(theta, phi0, phi1)` from a configuration's
/// rotations: the circle angle from where `R0 v` lands and the two spin
/// angles from the maps' actions. Inverse of `chart_to_rotations` up to the
/// atan2 branch, and the observable map used by the chart-dimension tests.
pub fn chart_observables(r0: &Orthogonal3, r1: &Orthogonal3) -> [f64; 3] {
    let f = chart_frame();
    let w0 = r0.apply(f.v);
    let w1 = r1.apply(f.v);
    let rel = w0 - f.center;
    let theta = rel.dot(f.q).atan2(rel.dot(f.p)).rem_euclid(TAU);
    let spin0 = *r0 * f.section; // undoes the section: a pure rotation sending v to w0
    let spin1 = *r1 * f.section;
    let phi0 = crate::geom3::extract_circle_angle(&spin0, f.v, w0).expect("w0 off -v");
    let phi1 = crate::geom3::extract_circle_angle(&spin1, f.v, w1).expect("w1 off -v");
    [theta, phi0, phi1]
}

/// Writes the sweep CSV: header then one row per grid point, `theta` outer,
/// `phi1` inner, floats at 17 significant digits.
pub fn sweep<W: Write>(counts: [usize; 3], tol: f64, out: &mut W) -> io::Result<()> {
    use crate::numfmt::sig17;
    assert!(counts.iter().all(|&c| c >= 1), "sample counts must be at least 1");
    writeln!(out, "theta,phi0,phi1,rank,sigma_min,cell_det")?;
    for i in 0..counts[0] {
        let theta = TAU * i as f64 / counts[0] as f64;
        for j in 0..counts[1] {
            let phi0 = TAU * j as f64 / counts[1] as f64;
            for k in 0..counts[2] {
                let phi1 = TAU * k as f64 / counts[2] as f64;
                let config = realize(&QuartzChart::new(theta, phi0, phi1));
                let sv = lattice_singular_values(&config.generator_vectors());
                let rank = sv.iter().filter(|&&s| s > tol).count();
                let sigma_min = sv[2];
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    sig17(theta),
                    sig17(phi0),
                    sig17(phi1),
                    rank,
                    sig17(sigma_min),
                    sig17(config.cell_det())
                )?;
            }
        }
    }
    Ok(())
}

/// Locates a degenerate chart point by scanning `cell_det` for a sign change
/// along grid lines and bisecting it. Returns `None` only if no sign change
/// shows up at the given resolution.
pub fn find_degenerate_chart(grid_n: usize, tol: f64) -> Option<QuartzChart> {
    let det_at = |chart: &QuartzChart| realize(chart).cell_det();

    // scan lines along each axis in turn
    for axis in 0..3 {
        for a in 0..grid_n {
            for b in 0..grid_n {
                let fixed = [TAU * a as f64 / grid_n as f64, TAU * b as f64 / grid_n as f64];
                let make = |t: f64| -> QuartzChart {
                    match axis {
                        0 => QuartzChart::new(t, fixed[0], fixed[1]),
                        1 => QuartzChart::new(fixed[0], t, fixed[1]),
                        _ => QuartzChart::new(fixed[0], fixed[1], t),
                    }
                };
                let mut prev_t = 0.0;
                let mut prev_d = det_at(&make(prev_t));
                for s in 1..=grid_n {
                    let t = TAU * s as f64 / grid_n as f64;
                    let d = det_at(&make(t));
                    if prev_d == 0.0 {
                        return Some(make(prev_t));
                    }
                    if prev_d.signum() != d.signum() {
                        // bisect the bracket
                        let (mut lo, mut hi, mut flo) = (prev_t, t, prev_d);
                        for _ in 0..80 {
                            let mid = 0.5 * (lo + hi);
                            let fm = det_at(&make(mid));
                            if fm == 0.0 {
                                lo = mid;
                                break;
                            }
                            if fm.signum() == flo.signum() {
                                lo = mid;
                                flo = fm;
                            } else {
                                hi = mid;
                            }
                        }
                        let chart = make(0.5 * (lo + hi));
                        if is_degenerate(&realize(&chart), tol) {
                            return Some(chart);
                        }
                    }
                    prev_t = t;
                    prev_d = d;
                }
            }
        }
    }
    None
}
