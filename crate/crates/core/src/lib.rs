//! Heat flow and Brownian motion on strip complexes.
//!
//! A strip complex is a metric graph whose edges are thickened by a common
//! low-dimensional fiber (a point, a circle or a reflecting interval). Each
//! edge carries a geometry profile `phi` and a measure profile `psi`; after
//! reduction these become an energy density `a` and a mass density `m`, and
//! the weighted Dirichlet form
//!
//! ```text
//! E(f, f) = sum_e  ∬ a_e(s) (|∂_s f|² + |∇_x f|²) ds dx,     dμ = m_e(s) ds dx
//! ```
//!
//! is discretized into a lumped mass vector and a symmetric stiffness matrix.
//! Shared degrees of freedom on every bifurcation manifold give continuity
//! across strips, and the weak form yields the Kirchhoff flux balance.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric_graph`]: graphs, coefficient profiles, horocyclic trees, exhaustion on Γ¹.
//! * [`strip_complex`]: fibers, treebolic spaces, measure, distance, exhaustion functions.
//! * [`assembly`]: grids, lumped masses, stiffness matrices, generator application.
//! * [`heat_engine`]: heat semigroup, kernels, harmonic solves, spectral bottom, checks.
//! * [`brownian`]: exact jump-chain and Euler–Maruyama/Walsh Monte Carlo.
//! * [`quotients`]: fiber collapse, plane slicing, horocyclic collapse, weight certificates.
//! * [`subordination`]: fiber heat kernels, the resolvent of `1 + sqrt(-Δ)`, Poisson extension.
//! * [`acceptance`]: the end-to-end verification suite shared by tests and the CLI.

pub mod acceptance;
pub mod assembly;
pub mod brownian;
pub mod error;
pub mod heat_engine;
pub mod metric_graph;
pub mod oracle;
pub mod quotients;
pub mod serial;
pub mod strip_complex;
pub mod subordination;

pub(crate) mod quadrature;

pub use assembly::{assemble, build_grid, BoundaryPolicy, Discretization, Grid, NodeLocation, SpacingRule};
pub use error::{Error, Result};
pub use heat_engine::{Field, HeatKernelSlice, Scheme};
pub use metric_graph::{build_tree, Edge, EdgeCoefficients, GraphPoint, MetricGraph, Profile, ProfileKind, Vertex};
pub use strip_complex::{build_treebolic, Fiber, PointOnComplex, StripComplex, TreebolicParams};
