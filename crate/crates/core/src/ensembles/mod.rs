//! Canonical and microcanonical thermodynamics along a solution branch.

mod table;
mod verdict;

pub use table::{canonical_table, ensemble_grid, legendre_check, EnsembleRow, EnsembleTable, LegendreReport, MIN_ROWS};
pub use verdict::{kind_verdict, KindVerdict, GAP_THRESHOLD};
