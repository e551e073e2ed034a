//! Discrete nets of constant negative Gauss curvature.
//!
//! The crate builds circular K-nets (cK-nets) and their associated families
//! from a 2x2 transition-matrix representation over the biquaternions,
//! applies single and double Backlund transformations, evaluates the
//! closed-form surface families (pseudosphere, Dini, breather, Kuen), and
//! verifies the defining geometric properties: the edge constraint,
//! per-quad Gauss curvature, circularity, and planarity.
//!
//! Modules follow the pipeline:
//!
//! - [`quat`]: biquaternion algebra over the Pauli basis and the R^3 embedding
//! - [`lattice`]: quad-net windows, Lax fields, JSON and OBJ formats
//! - [`knet`]: asymptotic K-net transitions, Hirota equation, frame integration
//! - [`cklax`]: cK-net transitions, evolution, integration, quad reconstruction
//! - [`backlund`]: single/double Backlund transformations, permutability
//! - [`explicit`]: closed-form generators for all surface families
//! - [`validate`]: geometric residuals, curvatures, congruence
//! - [`cli`]: command-line pipelines over the file formats

pub mod backlund;
pub mod cklax;
pub mod cli;
pub mod error;
pub mod explicit;
pub mod knet;
pub mod lattice;
pub mod quat;
pub mod tol;
pub mod validate;

pub use error::{Error, Result};
pub use lattice::{CknetLaxField, FrameState, KnetField, QuadNet};
pub use quat::{Biquat, Vec3};
