//! Deformation spaces of ideal tetrahedral crystal frameworks.
//!
//! The crate builds, solves and certifies the closure constraints of three
//! periodic unit-edge tetrahedral frameworks:
//!
//! * [`quartz`] — a three-angle torus chart for the two orientation-reversing
//!   maps attaching the neighbouring tetrahedra, with degeneracy detection
//!   for the four-generator lattice.
//! * [`cristobalite`] — the rotation-parametrized deformations of two
//!   corner-sharing tetrahedra and the linear-independence (admissibility)
//!   criterion for its three generators.
//! * [`tridymite`] — the local four-branch solution of the four-tetrahedron
//!   closure system via a spherical four-bar construction, its `Z2 x Z2`
//!   branch symmetry, an independent grid+Newton root-counting oracle and
//!   the tangent-space dimension at the maximally symmetric configuration.
//!
//! Shared infrastructure: exact-convention 3D primitives ([`geom3`]), the
//! periodic-fragment data model with JSON/OBJ interchange ([`framework`]),
//! and numerical verification tools ([`oracle`]).

pub mod cristobalite;
pub mod framework;
pub mod geom3;
pub mod numfmt;
pub mod oracle;
pub mod quartz;
pub mod tridymite;

pub use framework::{PeriodicRealization, ValidationReport};
pub use geom3::{GeomError, Orthogonal3, SphericalCircle, Vec3};
pub use quartz::{QuartzChart, QuartzConfig};
pub use tridymite::{BranchLabel, TridymiteSolution};
