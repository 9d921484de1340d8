//! Run configuration: command-line flags, optionally overridden by a TOML
//! file, and a hash of the settings that determine the numbers.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use mfelab::geometry::{BoundaryCurve, DomainSpec, Grading};
use mfelab::robin_dcrit::WeightSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Disk,
    Annulus,
    Rectangle,
    Ellipse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    One,
    /// `exp(ε(x₁² − x₂²))`.
    Saddle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(long, value_enum, default_value = "disk")]
    pub domain: DomainKind,
    /// Hole of an annulus as `x,y,r`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole: Option<Vec<f64>>,
    /// Width and height of a rectangle, or semi-axes of an ellipse.
    #[arg(long, value_delimiter = ',', default_value = "4,0.5")]
    pub size: Vec<f64>,
    #[arg(long, value_enum, default_value = "one")]
    pub weight: WeightKind,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub weight_eps: f64,
    #[arg(long, default_value_t = 0.03)]
    pub target_h: f64,
    /// Refine towards the maximizer of the Robin function for branch runs.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub graded: bool,
    /// Mass for single-solution commands.
    #[arg(long, default_value_t = 4.0 * PI)]
    pub rho: f64,
    /// Masses the branch must pass through exactly.
    #[arg(long, value_delimiter = ',')]
    pub rho_hints: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub lambda_cap: f64,
    #[arg(long, default_value_t = 32)]
    pub thresholds: usize,
    #[arg(long, default_value_t = 16)]
    pub ensemble_rows: usize,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainKind::Disk,
            hole: None,
            size: vec![4.0, 0.5],
            weight: WeightKind::One,
            weight_eps: 0.5,
            target_h: 0.03,
            graded: true,
            rho: 4.0 * PI,
            rho_hints: vec![],
            lambda_cap: 10.0,
            thresholds: 32,
            ensemble_rows: 16,
            alpha: -0.5,
            output_dir: PathBuf::from("out"),
            seed: 2024,
        }
    }
}

impl RunConfig {
    /// Keys present in the TOML file at `path` replace the current values.
    pub fn overridden_by(&self, path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let file: toml::Table = text.parse().map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let mut merged = toml::Table::try_from(self).map_err(|e| CliError::Invalid(e.to_string()))?;
        merged.extend(file);
        merged.try_into().map_err(|e: toml::de::Error| CliError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [("target_h", self.target_h), ("rho", self.rho), ("lambda_cap", self.lambda_cap)];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::Invalid(format!("{name} must be positive, got {x}")));
            }
        }
        if self.thresholds == 0 {
            return Err(CliError::Invalid("thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> mfelab::Result<DomainSpec> {
        let invalid = |m: String| mfelab::Error::InvalidDomain(m);
        let size = |n: usize| -> mfelab::Result<&[f64]> {
            if self.size.len() != n || self.size.iter().any(|x| !(*x > 0.0)) {
                return Err(invalid(format!("size needs {n} positive values, got {:?}", self.size)));
            }
            Ok(&self.size)
        };
        match self.domain {
            DomainKind::Disk => Ok(DomainSpec::unit_disk()),
            DomainKind::Annulus => match self.hole.as_deref() {
                Some([x, y, r]) => DomainSpec::annulus([*x, *y], *r),
                Some(h) => Err(invalid(format!("hole needs x,y,r; got {h:?}"))),
                None => Err(invalid("annulus needs --hole x,y,r".into())),
            },
            DomainKind::Rectangle => {
                let s = size(2)?;
                DomainSpec::new(BoundaryCurve::rectangle(s[0], s[1]), vec![])
            }
            DomainKind::Ellipse => {
                let s = size(2)?;
                DomainSpec::new(BoundaryCurve::ellipse(s[0], s[1]), vec![])
            }
        }
    }

    pub fn weight_spec(&self) -> mfelab::Result<WeightSpec> {
        match self.weight {
            WeightKind::One => Ok(WeightSpec::ConstantOne),
            WeightKind::Saddle => {
                WeightSpec::exp_harmonic(WeightSpec::saddle_perturbation(self.weight_eps, [0.0, 0.0]))
            }
        }
    }

    pub fn grading(&self, center: [f64; 2]) -> Grading {
        Grading { center, h_min: 1e-6, ratio: 0.1 }
    }

    /// SHA-256 of the settings that affect results; the output directory
    /// is left out so that reruns elsewhere hash identically.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let text = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
