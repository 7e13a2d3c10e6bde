//! Deformations of the ideal high cristobalite framework.
//!
//! Two regular unit tetrahedra share the corner `O`. Fixing one of them, a
//! configuration is a rotation `R` applied to the point-reflected partner:
//! `t_i = -R s_i`, so the lattice generators are `gamma_i = t_i - s_i =
//! -(R + I) s_i`. The identity is the aristotype. A configuration is
//! admissible while the three generators stay linearly independent, which
//! fails exactly at half-turns (`trace R = -1`), since
//! `det gamma = -det(R + I) det[s1 s2 s3]` and `det(R + I) = 2 (1 + trace R)`.

use crate::framework::PeriodicRealization;
use crate::geom3::{det3, Orthogonal3, Vec3};
use std::f64::consts::TAU;
use std::io::{self, Write};
use thiserror::Error;

/// Vertex orbits of the quotient graph.
pub const VERTEX_ORBITS: usize = 4;
/// Edge orbits of the quotient graph.
pub const EDGE_ORBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CristobaliteError {
    #[error("expected a rotation (det +1), got det sign {0}")]
    Orientation(i8),
}

/// One deformation state: the rotation, both tetrahedra and the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct CristobaliteConfig {
    pub r: Orthogonal3,
    pub s: [Vec3; 3],
    pub t: [Vec3; 3],
    pub gamma: [Vec3; 3],
    pub fragment: PeriodicRealization,
}

/// Non-origin corners of the fixed tetrahedron `O s1 s2 s3`; same coordinate
/// convention as the quartz base tetrahedron, relabeled.
pub fn fixed_tetrahedron() -> [Vec3; 3] {
    let base = crate::quartz::base_tetrahedron();
    base.edge_vectors
}

/// Realizes the configuration of a rotation: `t_i = -R s_i`,
/// `gamma_i = t_i - s_i`. Rejects orientation-reversing input.
pub fn realize(r: &Orthogonal3) -> Result<CristobaliteConfig, CristobaliteError> {
    if r.det_sign() != 1 {
        return Err(CristobaliteError::Orientation(r.det_sign()));
    }
    let s = fixed_tetrahedron();
    let t = [-r.apply(s[0]), -r.apply(s[1]), -r.apply(s[2])];
    let gamma = [t[0] - s[0], t[1] - s[1], t[2] - s[2]];

    let vertices = vec![
        ("O".to_string(), Vec3::ZERO),
        ("s1".to_string(), s[0]),
        ("s2".to_string(), s[1]),
        ("s3".to_string(), s[2]),
        ("t1".to_string(), t[0]),
        ("t2".to_string(), t[1]),
        ("t3".to_string(), t[2]),
    ];
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
        (5, 6), // rotated partner
    ];
    let generators = vec![
        ("gamma1".to_string(), gamma[0]),
        ("gamma2".to_string(), gamma[1]),
        ("gamma3".to_string(), gamma[2]),
    ];

    Ok(CristobaliteConfig {
        r: *r,
        s,
        t,
        gamma,
        fragment: PeriodicRealization { vertices, edges, generators, relations: vec![] },
    })
}

/// Determinant of the generator triple, read off the realized fragment.
pub fn generator_det(config: &CristobaliteConfig) -> f64 {
    det3(config.gamma[0], config.gamma[1], config.gamma[2])
}

/// Admissible while the generators stay independent: `|det gamma| > tol`.
pub fn is_admissible(config: &CristobaliteConfig, tol: f64) -> bool {
    generator_det(config).abs() > tol
}

/// Deterministic unit directions quasi-uniform on the sphere (Fibonacci
/// spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Writes the admissibility scan CSV over a Fibonacci-sphere x uniform-angle
/// grid: `axis_x,axis_y,axis_z,angle,det_gamma`, floats at 17 significant
/// digits, deterministic row order (axes outer).
pub fn admissibility_scan<W: Write>(
    axis_samples: usize,
    angle_samples: usize,
    out: &mut W,
) -> io::Result<()> {
    use crate::geom3::rotation_from_axis_angle;
    use crate::numfmt::sig17;
    assert!(axis_samples >= 1 && angle_samples >= 1, "sample counts must be at least 1");
    writeln!(out, "axis_x,axis_y,axis_z,angle,det_gamma")?;
    for axis in fibonacci_sphere(axis_samples) {
        let axis = axis.normalized().expect("fibonacci directions are unit");
        for j in 0..angle_samples {
            let angle = TAU * j as f64 / angle_samples as f64;
            let r = rotation_from_axis_angle(axis, angle).expect("unit axis");
            let config = realize(&r).expect("rotation input");
            writeln!(
                out,
                "{},{},{},{},{}",
                sig17(axis.x),
                sig17(axis.y),
                sig17(axis.z),
                sig17(angle),
                sig17(generator_det(&config))
            )?;
        }
    }
    Ok(())
}
