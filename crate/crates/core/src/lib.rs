//! Convex displacement interpolation (CDI) for parametric fields.
//!
//! Given a small dataset of solution snapshots tagged with parameter values,
//! this crate extracts coherent-structure point clouds with scalar sensors,
//! matches them against a template through the closed-form optimal-transport
//! map between fitted Gaussians, regresses the sorted clouds over parameter
//! space, builds boundary-preserving deformation maps, and combines mapped
//! neighbor snapshots into a nonlinear interpolant.
//!
//! The crate also ships a 1D Poisson testbed (`rom1d`) with POD-Galerkin
//! reduction and CDI-based data augmentation, plus analytic 2D field families
//! (`synthetic`) with known structure locations for end-to-end validation.

pub mod cdi;
pub mod error;
pub mod field;
pub mod linalg;
pub mod mesh;
pub mod persist;
pub mod psr;
pub mod regression;
pub mod registration;
pub mod rom1d;
pub mod sensors;
pub mod synthetic;

pub use error::{Error, Result};
pub use field::{PointCloud, Points, Snapshot, SortedPointCloud, TrainingDataset};
pub use mesh::{Domain, Grid};
