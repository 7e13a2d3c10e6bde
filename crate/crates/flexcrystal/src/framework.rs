//! Periodic framework fragments: labeled vertices, unit edges, lattice
//! generators with integer relations, plus validation and JSON/OBJ
//! interchange.
//!
//! JSON is the canonical lossless format; OBJ is export-only (labels are
//! dropped). All floats are written with 17 significant digits so that
//! export/import round-trips bit-for-bit.

use crate::geom3::Vec3;
use crate::numfmt::sig17;
use nalgebra::DMatrix;
use serde_json::Value;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameworkError {
    #[error("edge {edge} references vertex {index}, but only {len} vertices exist")]
    EdgeIndexOutOfRange { edge: usize, index: usize, len: usize },
    #[error("relation row {row} has {got} coefficients for {expected} generators")]
    RelationRowLength { row: usize, expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{path}: expected {expected}")]
    Schema { path: String, expected: String },
}

fn schema(path: impl Into<String>, expected: impl Into<String>) -> ImportError {
    ImportError::Schema { path: path.into(), expected: expected.into() }
}

/// A fragment of a periodic bar-and-joint framework: one representative per
/// vertex orbit plus the translated copies needed to draw the unit edges,
/// with the marked lattice generators and their integer dependences.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicRealization {
    /// Labeled vertex positions, order-preserving.
    pub vertices: Vec<(String, Vec3)>,
    /// Index pairs into `vertices`; every edge is expected to have length 1.
    pub edges: Vec<(usize, usize)>,
    /// Labeled lattice generators.
    pub generators: Vec<(String, Vec3)>,
    /// Integer coefficient rows, one per linear dependence among the
    /// generators.
    pub relations: Vec<Vec<i64>>,
}

/// Outcome of validating a realization at a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub max_edge_length_error: f64,
    pub max_relation_residual: f64,
    /// Number of lattice singular values above the tolerance (0..=3).
    pub lattice_rank: usize,
    /// Third singular value of the generator matrix (0 when fewer than three
    /// generators).
    pub smallest_lattice_singular_value: f64,
    pub pass: bool,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_edge_length_error: {:e}", self.max_edge_length_error)?;
        writeln!(f, "max_relation_residual: {:e}", self.max_relation_residual)?;
        writeln!(f, "lattice_rank: {}", self.lattice_rank)?;
        writeln!(
            f,
            "smallest_lattice_singular_value: {:e}",
            self.smallest_lattice_singular_value
        )?;
        write!(f, "pass: {}", self.pass)
    }
}

/// Singular values of the 3 x k generator matrix, descending, at most three.
pub fn lattice_singular_values(generators: &[Vec3]) -> Vec<f64> {
    if generators.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(3, generators.len(), |r, c| generators[c].component(r));
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    sv.truncate(3);
    sv
}

impl PeriodicRealization {
    /// Checks unit edges, relation residuals and lattice rank at `tol`.
    ///
    /// The report passes exactly when the edge error and relation residual
    /// are below `tol` and the generators span rank 3 at the same threshold.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport, FrameworkError> {
        let nv = self.vertices.len();
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            for index in [i, j] {
                if index >= nv {
                    return Err(FrameworkError::EdgeIndexOutOfRange { edge: k, index, len: nv });
                }
            }
        }
        let ng = self.generators.len();
        for (k, row) in self.relations.iter().enumerate() {
            if row.len() != ng {
                return Err(FrameworkError::RelationRowLength {
                    row: k,
                    expected: ng,
                    got: row.len(),
                });
            }
        }

        let max_edge_length_error = self
            .edges
            .iter()
            .map(|&(i, j)| ((self.vertices[i].1 - self.vertices[j].1).norm() - 1.0).abs())
            .fold(0.0f64, f64::max);

        let max_relation_residual = self
            .relations
            .iter()
            .map(|row| {
                row.iter()
                    .zip(self.generators.iter())
                    .fold(Vec3::ZERO, |acc, (&c, (_, g))| acc + *g * c as f64)
                    .norm()
            })
            .fold(0.0f64, f64::max);

        let gen_vecs: Vec<Vec3> = self.generators.iter().map(|(_, g)| *g).collect();
        let sv = lattice_singular_values(&gen_vecs);
        let lattice_rank = sv.iter().filter(|&&s| s > tol).count();
        let smallest_lattice_singular_value =
            if gen_vecs.len() >= 3 { sv[2] } else { 0.0 };

        Ok(ValidationReport {
            max_edge_length_error,
            max_relation_residual,
            lattice_rank,
            smallest_lattice_singular_value,
            pass: max_edge_length_error < tol && max_relation_residual < tol && lattice_rank == 3,
        })
    }

    /// Canonical JSON document; floats carry 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut s = String::with_capacity(256);
        s.push_str("{\"vertices\":[");
        for (i, (label, pos)) in self.vertices.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str("{\"label\":");
            s.push_str(&serde_json::to_string(label).expect("string serializes"));
            s.push_str(",\"pos\":[");
            s.push_str(&sig17(pos.x));
            s.push(',');
            s.push_str(&sig17(pos.y));
            s.push(',');
            s.push_str(&sig17(pos.z));
            s.push_str("]}");
        }
        s.push_str("],\"edges\":[");
        for (i, (a, b)) in self.edges.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format!("[{a},{b}]"));
        }
        s.push_str("],\"generators\":[");
        for (i, (label, vec)) in self.generators.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str("{\"label\":");
            s.push_str(&serde_json::to_string(label).expect("string serializes"));
            s.push_str(",\"vec\":[");
            s.push_str(&sig17(vec.x));
            s.push(',');
            s.push_str(&sig17(vec.y));
            s.push(',');
            s.push_str(&sig17(vec.z));
            s.push_str("]}");
        }
        s.push_str("],\"relations\":[");
        for (i, row) in self.relations.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&c.to_string());
            }
            s.push(']');
        }
        s.push_str("]}");
        s
    }

    /// Parses the canonical JSON document, reporting the offending field
    /// path on schema violations. Unknown keys are ignored.
    pub fn from_json(bytes: &[u8]) -> Result<Self, ImportError> {
        let value: Value = serde_json::from_slice(bytes)?;
        let obj = value.as_object().ok_or_else(|| schema("$", "object"))?;

        let vertices_val =
            obj.get("vertices").ok_or_else(|| schema("$", "field `vertices`"))?;
        let vertices_arr = vertices_val
            .as_array()
            .ok_or_else(|| schema("vertices", "array"))?;
        let mut vertices = Vec::with_capacity(vertices_arr.len());
        for (i, v) in vertices_arr.iter().enumerate() {
            let rec = v
                .as_object()
                .ok_or_else(|| schema(format!("vertices[{i}]"), "object"))?;
            let label = rec
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| schema(format!("vertices[{i}].label"), "string"))?;
            let pos = parse_vec3(rec.get("pos"), &format!("vertices[{i}].pos"))?;
            vertices.push((label.to_string(), pos));
        }

        let edges_val = obj.get("edges").ok_or_else(|| schema("$", "field `edges`"))?;
        let edges_arr = edges_val.as_array().ok_or_else(|| schema("edges", "array"))?;
        let mut edges = Vec::with_capacity(edges_arr.len());
        for (i, e) in edges_arr.iter().enumerate() {
            let pair = e
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| schema(format!("edges[{i}]"), "array of two indices"))?;
            let mut idx = [0usize; 2];
            for (k, entry) in pair.iter().enumerate() {
                let n = entry
                    .as_u64()
                    .ok_or_else(|| schema(format!("edges[{i}][{k}]"), "non-negative integer"))?;
                let n = usize::try_from(n)
                    .map_err(|_| schema(format!("edges[{i}][{k}]"), "index within range"))?;
                if n >= vertices.len() {
                    return Err(schema(
                        format!("edges[{i}][{k}]"),
                        format!("vertex index below {}", vertices.len()),
                    ));
                }
                idx[k] = n;
            }
            edges.push((idx[0], idx[1]));
        }

        let generators_val =
            obj.get("generators").ok_or_else(|| schema("$", "field `generators`"))?;
        let generators_arr = generators_val
            .as_array()
            .ok_or_else(|| schema("generators", "array"))?;
        let mut generators = Vec::with_capacity(generators_arr.len());
        for (i, g) in generators_arr.iter().enumerate() {
            let rec = g
                .as_object()
                .ok_or_else(|| schema(format!("generators[{i}]"), "object"))?;
            let label = rec
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| schema(format!("generators[{i}].label"), "string"))?;
            let vec = parse_vec3(rec.get("vec"), &format!("generators[{i}].vec"))?;
            generators.push((label.to_string(), vec));
        }

        let relations_val =
            obj.get("relations").ok_or_else(|| schema("$", "field `relations`"))?;
        let relations_arr = relations_val
            .as_array()
            .ok_or_else(|| schema("relations", "array"))?;
        let mut relations = Vec::with_capacity(relations_arr.len());
        for (i, row_val) in relations_arr.iter().enumerate() {
            let row_arr = row_val
                .as_array()
                .ok_or_else(|| schema(format!("relations[{i}]"), "array"))?;
            let mut row = Vec::with_capacity(row_arr.len());
            for (j, c) in row_arr.iter().enumerate() {
                let n = c
                    .as_i64()
                    .ok_or_else(|| schema(format!("relations[{i}][{j}]"), "integer"))?;
                row.push(n);
            }
            if row.len() != generators.len() {
                return Err(schema(
                    format!("relations[{i}]"),
                    format!("{} coefficients (one per generator)", generators.len()),
                ));
            }
            relations.push(row);
        }

        Ok(PeriodicRealization { vertices, edges, generators, relations })
    }

    /// Wavefront-style line export: `v x y z` per vertex and 1-based
    /// `l i j` per edge. Labels are dropped.
    pub fn to_obj(&self) -> String {
        let mut s = String::with_capacity(64 * self.vertices.len());
        for (_, p) in &self.vertices {
            s.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
        }
        for &(i, j) in &self.edges {
            s.push_str(&format!("l {} {}\n", i + 1, j + 1));
        }
        s
    }
}

fn parse_vec3(value: Option<&Value>, path: &str) -> Result<Vec3, ImportError> {
    let arr = value
        .and_then(Value::as_array)
        .filter(|a| a.len() == 3)
        .ok_or_else(|| schema(path, "array of three numbers"))?;
    let mut out = [0.0f64; 3];
    for (k, entry) in arr.iter().enumerate() {
        let x = entry
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| schema(format!("{path}[{k}]"), "finite number"))?;
        out[k] = x;
    }
    Ok(Vec3::new(out[0], out[1], out[2]))
}
