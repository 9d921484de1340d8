//! Bol's isoperimetric inequality on level sets, the conical
//! counterexample, and symmetrization against the bubble metric.

mod bol;
mod bubble;
mod level;
mod symmetrize;

pub use bol::{
    bol_check, bol_check_field, bol_metric, counterexample_metrics, counterexample_quadrature, BolReport, BolRow,
    Counterexample, BOL_TOLERANCE_FACTOR,
};
pub use bubble::{
    bubble_eigen, bubble_mass, bubble_mass_quadrature, bubble_radius, bubble_residual, bubble_u, bubble_u_radial,
    bubble_z, z_residual, BubbleEigen, BUBBLE_ZERO,
};
pub use level::{contour_segments, level_set_metrics, region_metrics, LevelSetMetrics, PLATEAU_TOLERANCE};
pub use symmetrize::{symmetrize, RadialProfile, SymmetrizationReport};
