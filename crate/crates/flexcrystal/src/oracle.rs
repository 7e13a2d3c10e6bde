//! Independent numerical verification machinery: a 2D Newton solver, grid
//! sign scanning over periodic domains, finite-difference Jacobians and
//! singular-value rank reports.
//!
//! These routines deliberately avoid hand-derived derivatives so they can
//! cross-check the closed-form solvers.

use nalgebra::DMatrix;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("newton: {0} iterations exhausted without meeting the tolerance")]
    MaxIterations(usize),
    #[error("newton: singular finite-difference jacobian (|det| = {0:e})")]
    SingularJacobian(f64),
    #[error("newton: iterate left the domain box")]
    LeftDomain,
    #[error("newton: line search failed to reduce the residual after {0} halvings")]
    LineSearchStalled(usize),
    #[error("non-finite function evaluation")]
    NonFinite,
}

/// Rectangular domain for a two-variable system; `periodic` identifies
/// opposite edges (both axes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox2 {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub periodic: bool,
}

impl DomainBox2 {
    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k])
    }

    fn wrap(&self, x: [f64; 2]) -> [f64; 2] {
        let mut out = x;
        for k in 0..2 {
            let width = self.hi[k] - self.lo[k];
            out[k] = self.lo[k] + (x[k] - self.lo[k]).rem_euclid(width);
        }
        out
    }
}

/// A continuous map `R^2 -> R^2` restricted to a domain box.
pub struct ScalarSystem2<F>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    pub eval: F,
    pub domain: DomainBox2,
    /// Asserts the map is continuous on the domain, so that sign changes
    /// across grid cells bracket zero curves.
    pub continuous: bool,
}

impl<F> ScalarSystem2<F>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    /// System on the flat torus `[0, 2pi)^2`.
    pub fn periodic_torus(eval: F) -> Self {
        ScalarSystem2 {
            eval,
            domain: DomainBox2 { lo: [0.0, 0.0], hi: [TAU, TAU], periodic: true },
            continuous: true,
        }
    }

    fn eval_checked(&self, x: [f64; 2]) -> Result<(f64, f64), OracleError> {
        let (f1, f2) = (self.eval)(x[0], x[1]);
        if f1.is_finite() && f2.is_finite() {
            Ok((f1, f2))
        } else {
            Err(OracleError::NonFinite)
        }
    }
}

fn residual_norm(f: (f64, f64)) -> f64 {
    f.0.hypot(f.1)
}

/// Damped Newton iteration on a 2x2 system with central-difference Jacobian
/// (step 1e-7). Accepted steps must strictly reduce the residual; on an
/// increase the step is halved, up to 30 times.
pub fn newton2<F>(
    system: &ScalarSystem2<F>,
    x0: [f64; 2],
    max_iter: usize,
    tol: f64,
) -> Result<[f64; 2], OracleError>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    const FD_STEP: f64 = 1e-7;
    const MAX_HALVINGS: usize = 30;

    let normalize = |x: [f64; 2]| -> Result<[f64; 2], OracleError> {
        if system.domain.periodic {
            Ok(system.domain.wrap(x))
        } else if system.domain.contains(x) {
            Ok(x)
        } else {
            Err(OracleError::LeftDomain)
        }
    };

    let mut x = normalize(x0)?;
    let mut f = system.eval_checked(x)?;
    let mut res = residual_norm(f);

    for _ in 0..max_iter {
        if res < tol {
            return Ok(x);
        }

        let mut jac = [[0.0; 2]; 2];
        for col in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += FD_STEP;
            xm[col] -= FD_STEP;
            let fp = system.eval_checked(xp)?;
            let fm = system.eval_checked(xm)?;
            jac[0][col] = (fp.0 - fm.0) / (2.0 * FD_STEP);
            jac[1][col] = (fp.1 - fm.1) / (2.0 * FD_STEP);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            return Err(OracleError::SingularJacobian(det.abs()));
        }
        let dx = [
            (f.0 * jac[1][1] - f.1 * jac[0][1]) / det,
            (f.1 * jac[0][0] - f.0 * jac[1][0]) / det,
        ];

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let candidate = normalize([x[0] - step * dx[0], x[1] - step * dx[1]])?;
            let fc = system.eval_checked(candidate)?;
            let rc = residual_norm(fc);
            if rc < res {
                x = candidate;
                f = fc;
                res = rc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(OracleError::LineSearchStalled(MAX_HALVINGS));
        }
    }
    if res < tol {
        Ok(x)
    } else {
        Err(OracleError::MaxIterations(max_iter))
    }
}

/// One grid cell whose corner values bracket a zero of at least one
/// component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateCell {
    pub i: usize,
    pub j: usize,
    pub center: [f64; 2],
    /// Which components change sign (or vanish) across the cell corners.
    pub sign_change: [bool; 2],
}

/// Scans an `grid_n x grid_n` lattice over the system domain and reports
/// every cell where either component changes sign across the corners, in
/// row-major order (first axis outer). On periodic domains the seam cells
/// wrap around.
pub fn grid_sign_scan<F>(system: &ScalarSystem2<F>, grid_n: usize) -> Vec<CandidateCell>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    assert!(grid_n >= 8, "grid_n must be at least 8, got {grid_n}");
    debug_assert!(system.continuous, "sign scanning needs a continuous map");
    let n = grid_n;
    let dom = &system.domain;
    let step = [(dom.hi[0] - dom.lo[0]) / n as f64, (dom.hi[1] - dom.lo[1]) / n as f64];
    let nodes = if dom.periodic { n } else { n + 1 };

    let mut values = vec![(0.0f64, 0.0f64); nodes * nodes];
    for i in 0..nodes {
        for j in 0..nodes {
            let x = dom.lo[0] + step[0] * i as f64;
            let y = dom.lo[1] + step[1] * j as f64;
            values[i * nodes + j] = (system.eval)(x, y);
        }
    }
    let value = |i: usize, j: usize| values[(i % nodes) * nodes + (j % nodes)];

    let changes = |c: [f64; 4]| -> bool {
        let has_neg = c.iter().any(|&v| v < 0.0);
        let has_pos = c.iter().any(|&v| v > 0.0);
        let has_zero = c.contains(&0.0);
        (has_neg && has_pos) || has_zero
    };

    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [value(i, j), value(i + 1, j), value(i, j + 1), value(i + 1, j + 1)];
            let sign_change = [
                changes([corners[0].0, corners[1].0, corners[2].0, corners[3].0]),
                changes([corners[0].1, corners[1].1, corners[2].1, corners[3].1]),
            ];
            if sign_change[0] || sign_change[1] {
                cells.push(CandidateCell {
                    i,
                    j,
                    center: [
                        dom.lo[0] + step[0] * (i as f64 + 0.5),
                        dom.lo[1] + step[1] * (j as f64 + 0.5),
                    ],
                    sign_change,
                });
            }
        }
    }
    cells
}

/// Central-difference Jacobian of `f: R^n -> R^m` at `at`, column `k` being
/// `(f(x + h e_k) - f(x - h e_k)) / 2h`.
pub fn fd_jacobian<F>(f: F, at: &[f64], h: f64) -> Result<DMatrix<f64>, OracleError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let n = at.len();
    let m = f(at).len();
    let mut jac = DMatrix::zeros(m, n);
    let mut x = at.to_vec();
    for k in 0..n {
        x[k] = at[k] + h;
        let fp = f(&x);
        x[k] = at[k] - h;
        let fm = f(&x);
        x[k] = at[k];
        if fp.len() != m || fm.len() != m {
            panic!("map dimension changed between evaluations");
        }
        for r in 0..m {
            let d = (fp[r] - fm[r]) / (2.0 * h);
            if !d.is_finite() {
                return Err(OracleError::NonFinite);
            }
            jac[(r, k)] = d;
        }
    }
    Ok(jac)
}

/// Singular values (descending) with the rank at a relative threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Absolute cutoff actually used: `rel_threshold * sigma_max`.
    pub threshold: f64,
}

/// Rank as the number of singular values above `rel_threshold * sigma_max`;
/// the zero matrix has rank 0.
pub fn svd_rank(matrix: &DMatrix<f64>, rel_threshold: f64) -> RankReport {
    let mut sv: Vec<f64> = matrix.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = rel_threshold * sigma_max;
    let rank = if sigma_max == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > threshold).count()
    };
    RankReport { singular_values: sv, rank, threshold }
}
