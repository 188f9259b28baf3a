//! Continuous-variable teleportation and cloning toolkit.
//!
//! Gaussian states are handled as covariance matrices (vacuum variance 1/2,
//! quadrature ordering `x1, p1, x2, p2, …`); non-Gaussian states live in a
//! truncated Fock basis.

// Negated comparisons in this crate reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloning;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod io;
pub mod network;
pub mod nongaussian;
pub mod optimize;
pub mod quadrature;
pub mod teleport;
pub mod verify;

pub use error::{Error, Result};
pub use gaussian::{
    build_symplectic, network_symmetric_cm, three_mode_standard_cm, tmsv_cm, GaussianGate, GaussianState, SqueezeAxis,
    SymplecticTransform, ThreeModeStandardForm,
};
