//! Quadrature, special functions, fitting, sampling and 1-D minimization.

pub mod fit;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use fit::{fit_power_law, PowerLawFit};
pub use optimize::{golden_section, grid, minimize_on_grid, minimize_sampled, Minimum};
pub use quadrature::{gauss_legendre_nodes, integrate, integrate_oscillatory, integrate_panels, integrate_semi_infinite, QuadratureSpec};
pub use rng::{sample_standard_normals, RngStream};
pub use special::{gamma, hyp1f1, hyp2f1, ln_gamma, normal_quantile, special_value, SpecialKind};
