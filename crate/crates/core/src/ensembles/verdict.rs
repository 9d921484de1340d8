use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::table::EnsembleTable;
use crate::mfe_solver::{Branch, Termination};
use crate::robin_dcrit::{DCritReport, Kind, WeightSpec};

/// Gaps above this count as strict inequality.
pub const GAP_THRESHOLD: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindVerdict {
    /// `None` when the continuation stalled.
    pub branch: Option<Kind>,
    pub d_sign: Kind,
    /// `−1 − log π − sup(log h + 4πγ) − I/ρ` at the last branch point.
    pub gap: f64,
    pub gap_kind: Kind,
    pub table: Kind,
    pub disagreements: Vec<String>,
}

impl KindVerdict {
    pub fn agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

pub fn kind_verdict(table: &EnsembleTable, branch: &Branch, dcrit: &DCritReport, weight: &WeightSpec) -> KindVerdict {
    let from_branch = match branch.termination {
        Termination::ConvergedAt8pi => Some(Kind::SecondKind),
        Termination::BlowupDetected { .. } => Some(Kind::FirstKind),
        Termination::StepUnderflow => None,
    };
    let d_sign = if dcrit.d_value > 0.0 { Kind::SecondKind } else { Kind::FirstKind };
    let sup = weight.log_h(dcrit.q) + 4.0 * PI * dcrit.gamma_q;
    let gap = match branch.last() {
        Some(p) => -1.0 - PI.ln() - sup - p.i_value / p.rho,
        None => f64::NAN,
    };
    let gap_kind = if gap > GAP_THRESHOLD { Kind::SecondKind } else { Kind::FirstKind };

    let mut disagreements = Vec::new();
    match from_branch {
        None => disagreements.push("continuation stalled before a verdict".to_string()),
        Some(k) if k != d_sign => disagreements.push(format!("branch says {k:?}, sign of D says {d_sign:?}")),
        _ => {}
    }
    if gap_kind != d_sign {
        disagreements.push(format!("gap {gap:.3e} says {gap_kind:?}, sign of D says {d_sign:?}"));
    }
    if table.kind != d_sign {
        disagreements.push(format!("table says {:?}, sign of D says {d_sign:?}", table.kind));
    }
    KindVerdict { branch: from_branch, d_sign, gap, gap_kind, table: table.kind, disagreements }
}
