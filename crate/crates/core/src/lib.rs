//! Distorted Fourier transform for the linearized Gross–Pitaevskii vortex on
//! the hyperbolic plane of curvature −1/2.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod connection;
pub mod dft;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod ode_engine;
pub mod oracle;
pub mod profile;
pub mod quadrature;

pub use connection::ConnectionData;
pub use dft::{DistortedBasis, FieldPair};
pub use dispersion::{Limit, Side, SpectralPoint, THRESHOLD};
pub use error::{Error, Result};
pub use grid::RadialGrid;
pub use ode_engine::{FreePotential, HalfPlane, Label, Potential, SolutionBranch, StateVector};
pub use profile::VortexProfile;
