//! Closed-form and integral SIR expressions.

pub mod ccdf;
pub mod quadrature;
pub mod special;

pub use ccdf::{
    cellular_ccdf, cellular_ccdf_with, conditional_ccdf, coordinated_ccdf, coordination_integral,
    interferer_densities, unconditional_ccdf, uncoordinated_ccdf, AnalyticParams, CellApprox,
    InterfererDensities,
};
pub use quadrature::{integrate, integrate_fn, Integral, QuadratureSpec};
pub use special::{kappa, ln_regularized_upper_gamma, regularized_upper_gamma};
