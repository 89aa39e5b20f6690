//! First and second shape variations, the one-dimensional Neumann solution
//! and its Bochner identity, and the functions alpha and beta.

mod onedim;
mod variation;

pub use onedim::{alpha, beta, bochner_residual_1d, gaussian_mass, ode_u1, ode_u2, BochnerReport, OdeProfile};
pub use variation::{
    boundary_measure, boundary_weights, first_variation_2d, first_variation_formula, local_c_estimate,
    mean_curvature, sample_psi, second_variation_2d, second_variation_formula, LocalCReport, VariationReport,
    FIRST_STEP, LOCAL_C_CAP, SECOND_STEP,
};
