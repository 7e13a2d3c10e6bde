//! `flexcrystal` — construct, solve and validate deformation states of the
//! ideal quartz, cristobalite and tridymite tetrahedral frameworks.
//!
//! Standard output carries only the requested artifact (JSON, OBJ or CSV);
//! all diagnostics go to standard error. Angles are radians everywhere.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation or degeneracy
//! failure, 3 geometry outside the solvable neighborhood.

use clap::{Parser, Subcommand, ValueEnum};
use flexcrystal::framework::PeriodicRealization;
use flexcrystal::geom3::{rotation_from_axis_angle, Vec3};
use flexcrystal::tridymite::TridymiteError;
use flexcrystal::{cristobalite, quartz, tridymite};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_GEOMETRY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flexcrystal",
    version,
    about = "Deformation charts and solvers for ideal tetrahedral crystal frameworks"
)]
struct Cli {
    /// Numeric tolerance for validation, degeneracy and admissibility
    /// checks (default 1e-9; the FLEXCRYSTAL_TOL environment variable
    /// overrides the default).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for sampling-based subcommands; the current grid-based commands
    /// are deterministic regardless.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the artifact to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quartz torus chart: realize a configuration or sweep the chart.
    Quartz {
        #[command(subcommand)]
        cmd: QuartzCmd,
    },
    /// Cristobalite rotations: realize a configuration or scan
    /// admissibility.
    Cristobalite {
        #[command(subcommand)]
        cmd: CristobaliteCmd,
    },
    /// Tridymite four-bar system: solve branches, tangent dimension, or the
    /// independent root-count oracle.
    Tridymite {
        #[command(subcommand)]
        cmd: TridymiteCmd,
    },
    /// Validate a framework JSON document (unit edges, relations, lattice
    /// rank).
    Validate { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Obj,
}

#[derive(Subcommand)]
enum QuartzCmd {
    /// Realize the fragment at chart point (theta, phi0, phi1).
    Realize {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        phi0: f64,
        #[arg(long)]
        phi1: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Fail (exit 2) instead of warning when the lattice is degenerate.
        #[arg(long)]
        strict: bool,
    },
    /// Sweep the torus on an N,M,K grid and emit rank/determinant CSV rows.
    Sweep {
        /// Per-axis sample counts, e.g. 8,8,8.
        #[arg(long, value_parser = parse_grid3)]
        grid: [usize; 3],
    },
}

#[derive(Subcommand)]
enum CristobaliteCmd {
    /// Realize the configuration of the rotation about `axis` by `angle`.
    Realize {
        /// Rotation axis as x,y,z (normalized internally; must be nonzero).
        #[arg(long, value_parser = parse_axis)]
        axis: Vec3,
        /// Rotation angle in radians.
        #[arg(long)]
        angle: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Fail (exit 2) instead of warning when the generators are
        /// dependent (half-turn locus).
        #[arg(long)]
        strict: bool,
    },
    /// Scan generator determinants over a Fibonacci-sphere x angle grid.
    Scan {
        /// Number of axis samples.
        #[arg(long)]
        axes: usize,
        /// Number of angle samples on [0, 2pi).
        #[arg(long)]
        angles: usize,
    },
}

#[derive(Subcommand)]
enum TridymiteCmd {
    /// Emit the four solution branches for the rotation Q as JSON.
    Solve {
        #[arg(long, value_parser = parse_axis)]
        axis: Vec3,
        #[arg(long)]
        angle: f64,
    },
    /// Tangent-space dimension of the linearized system at the aristotype.
    Tangent {
        /// Central-difference step, within [1e-8, 1e-3].
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Independent four-bar root count (grid scan + Newton refinement).
    Oracle {
        #[arg(long, value_parser = parse_axis)]
        axis: Vec3,
        #[arg(long)]
        angle: f64,
        /// Scan resolution per axis.
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
    fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }
    fn geometry(message: impl Into<String>) -> Self {
        Failure { code: EXIT_GEOMETRY, message: message.into() }
    }
}

fn parse_axis(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got `{s}`"));
    }
    let mut v = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("component {} of `{s}`: {e}", i + 1))?;
    }
    let axis = Vec3::new(v[0], v[1], v[2]);
    if axis.norm() < 1e-12 {
        return Err("axis must be nonzero".to_string());
    }
    Ok(axis)
}

fn parse_grid3(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected N,M,K, got `{s}`"));
    }
    let mut out = [0usize; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("component {} of `{s}`: {e}", i + 1))?;
        if out[i] == 0 {
            return Err("grid counts must be at least 1".to_string());
        }
    }
    Ok(out)
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("FLEXCRYSTAL_TOL") {
            Ok(raw) => raw.parse::<f64>().map_err(|e| {
                Failure::usage(format!("FLEXCRYSTAL_TOL: cannot parse `{raw}`: {e}"))
            })?,
            Err(_) => 1e-9,
        },
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::usage(format!("--tol must be positive and finite, got {tol}")));
    }
    Ok(tol)
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    let mut text = content.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn realization_artifact(fragment: &PeriodicRealization, format: Format) -> String {
    match format {
        Format::Json => fragment.to_json(),
        Format::Obj => fragment.to_obj(),
    }
}

fn rotation_for(axis: Vec3, angle: f64) -> Result<flexcrystal::Orthogonal3, Failure> {
    let unit = axis
        .normalized()
        .map_err(|_| Failure::usage("axis must be nonzero"))?;
    rotation_from_axis_angle(unit, angle)
        .map_err(|e| Failure::usage(format!("invalid rotation: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tol = resolve_tol(cli.tol)?;
    let output = cli.output;

    match cli.command {
        Command::Quartz { cmd } => match cmd {
            QuartzCmd::Realize { theta, phi0, phi1, format, strict } => {
                let chart = quartz::QuartzChart::new(theta, phi0, phi1);
                let config = quartz::realize(&chart);
                let report = config
                    .fragment
                    .validate(tol)
                    .expect("assembled fragments are structurally sound");
                eprintln!(
                    "validation: pass={} edge_err={:e} relation_err={:e} rank={} sigma_min={:e}",
                    report.pass,
                    report.max_edge_length_error,
                    report.max_relation_residual,
                    report.lattice_rank,
                    report.smallest_lattice_singular_value
                );
                if quartz::is_degenerate(&config, tol) {
                    if strict {
                        return Err(Failure::validation(format!(
                            "degenerate lattice (rank {}) at theta={theta} phi0={phi0} phi1={phi1}",
                            report.lattice_rank
                        )));
                    }
                    eprintln!("warning: degenerate lattice (rank {})", report.lattice_rank);
                }
                emit(&output, &realization_artifact(&config.fragment, format))
            }
            QuartzCmd::Sweep { grid } => {
                let mut buf = Vec::new();
                quartz::sweep(grid, tol, &mut buf)
                    .map_err(|e| Failure::usage(format!("sweep failed: {e}")))?;
                emit(&output, &String::from_utf8(buf).expect("CSV is UTF-8"))
            }
        },
        Command::Cristobalite { cmd } => match cmd {
            CristobaliteCmd::Realize { axis, angle, format, strict } => {
                let r = rotation_for(axis, angle)?;
                let config = cristobalite::realize(&r)
                    .expect("axis-angle rotations are orientation preserving");
                let det = cristobalite::generator_det(&config);
                eprintln!("det_gamma={det:e}");
                if !cristobalite::is_admissible(&config, tol) {
                    if strict {
                        return Err(Failure::validation(format!(
                            "inadmissible configuration: |det gamma| = {:e} <= {tol:e}",
                            det.abs()
                        )));
                    }
                    eprintln!("warning: generators are linearly dependent at this rotation");
                }
                emit(&output, &realization_artifact(&config.fragment, format))
            }
            CristobaliteCmd::Scan { axes, angles } => {
                if axes == 0 || angles == 0 {
                    return Err(Failure::usage("--axes and --angles must be at least 1"));
                }
                let mut buf = Vec::new();
                cristobalite::admissibility_scan(axes, angles, &mut buf)
                    .map_err(|e| Failure::usage(format!("scan failed: {e}")))?;
                emit(&output, &String::from_utf8(buf).expect("CSV is UTF-8"))
            }
        },
        Command::Tridymite { cmd } => match cmd {
            TridymiteCmd::Solve { axis, angle } => {
                let q = rotation_for(axis, angle)?;
                let solutions = tridymite::solve(&q).map_err(map_tridymite)?;
                let distinct = tridymite::ramification_defect(&solutions, tol).distinct;
                eprintln!("distinct branches: {distinct}");
                for sol in &solutions {
                    eprintln!(
                        "branch swap={} reflect={}: residual_eq4={:e} residual_eq2={:e}",
                        sol.label.swap as u8,
                        sol.label.reflect as u8,
                        sol.midpoint_residual(),
                        sol.period_relation_residual()
                    );
                }
                emit(&output, &tridymite::solutions_to_json(&solutions))
            }
            TridymiteCmd::Tangent { step } => {
                let report = tridymite::aristotype_tangent(step).map_err(map_tridymite)?;
                eprintln!(
                    "rank={} singular_values={:?}",
                    report.rank, report.singular_values
                );
                emit(&output, &report.nullity.to_string())
            }
            TridymiteCmd::Oracle { axis, angle, grid } => {
                if grid < 8 {
                    return Err(Failure::usage("--grid must be at least 8"));
                }
                let q = rotation_for(axis, angle)?;
                let report = tridymite::oracle_count(&q, grid, tol).map_err(map_tridymite)?;
                if report.degenerate {
                    eprintln!(
                        "note: a chord circle is a point; counting closed-form branches instead"
                    );
                }
                for (i, d) in report.match_distances.iter().enumerate() {
                    eprintln!("root {i}: distance to nearest branch {d:e}");
                }
                emit(&output, &report.count.to_string())
            }
        },
        Command::Validate { path } => {
            let bytes = fs::read(&path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            let realization = PeriodicRealization::from_json(&bytes)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let report = realization
                .validate(tol)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            emit(&output, &report.to_string())?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::validation("validation failed".to_string()))
            }
        }
    }
}

fn map_tridymite(err: TridymiteError) -> Failure {
    match err {
        TridymiteError::VanishingMidpoint(_) | TridymiteError::CollinearMidpoints => {
            Failure::geometry(err.to_string())
        }
        TridymiteError::StepOutOfRange(_) => Failure::usage(err.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
