//! Personalized PageRank local clustering on r-neighborhood graphs.
//!
//! The crate covers the full pipeline from synthetic point clouds to cluster
//! estimates and their diagnostics:
//!
//! - [`synthetic`]: samplers and analytic densities (rectangle mixture, ribbon, two moons).
//! - [`graph`]: exact r-neighborhood graphs and cut/volume functionals.
//! - [`ppr`]: exact and push-based PPR vectors, sweep cuts, and the clustering pipelines.
//! - [`diagnostics`]: mixing time, local spread, conductance and the Lovász–Simonovits curve.
//! - [`bounds`]: closed-form theoretical quantities and P-weighted volumes.
//! - [`evaluation`]: recovery metrics and baseline clusterers.
//! - [`experiments`]: the reproducible experiment harness behind the `pprls` binary.

pub mod bounds;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod ppr;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{NeighborhoodGraph, VertexSet};
pub use ppr::{PprVector, SweepCut};
pub use synthetic::{LabeledPointCloud, Model, PointCloud, Region};
