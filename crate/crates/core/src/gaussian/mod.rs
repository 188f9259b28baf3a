//! Covariance-matrix description of Gaussian states and Gaussian unitaries.

mod builders;
mod state;
mod symplectic;

pub use builders::{
    network_mixer, network_symmetric_cm, standard_form_from_ratios, three_mode_standard_cm, tmsv_cm, triangle_feasible,
    ThreeModeStandardForm,
};
pub use state::{GaussianState, GaussianStateJson, Physicality, Quadrature, PHYSICAL_TOL};
pub use symplectic::{build_symplectic, symplectic_form, GaussianGate, SqueezeAxis, SymplecticTransform};
