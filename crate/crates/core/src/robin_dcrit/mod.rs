//! Maximizers of `log h + 4πγ` and the solvability integral `D`.

mod dcrit;
mod maxpoint;
mod weight;

pub use dcrit::{compute_d, compute_d_with, fit_regular_part, stationarity, AngularRule, DBreakdown, DOptions};
pub use maxpoint::{classify, classify_with, find_max_point, DCritReport, Kind, MaxPoint, STATIONARITY_TOLERANCE};
pub use weight::{Monomial, WeightSpec};
