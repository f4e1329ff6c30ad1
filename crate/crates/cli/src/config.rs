//! Job configuration files.

use serde::{Deserialize, Serialize};

use psop_core::classify::{GridParams, Property};
use psop_core::laurent::HoloSymbol;
use psop_core::verify::Suite;
use psop_core::{DualCertificate, Scalar, SpaceSpec, Symbol};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorConfig>,
    pub task: Task,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    Hat {
        theta: Symbol,
    },
    Check {
        beta: Symbol,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cert: Option<DualCertificate>,
    },
    Toeplitz {
        theta: Symbol,
        beta: Symbol,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cert: Option<DualCertificate>,
    },
    /// Toeplitz operator whose symbols are read off the Laurent series of a
    /// holomorphic function on |z| = r, over the window [−window, window].
    Function {
        symbol: HoloSymbol,
        r: f64,
        window: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Classify {
        modes: Vec<Property>,
    },
    Orbit {
        x: Vec<Scalar>,
        k: usize,
        grades: Vec<u32>,
    },
    /// Mean-ergodic probe over K = k powers and grades 1..=p.
    Cesaro {
        x: Vec<Scalar>,
        k: usize,
        p: u32,
    },
    Laurent {
        symbol: HoloSymbol,
        r: f64,
        /// Inclusive index range [n_min, n_max].
        window: [i64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
    },
    Verify {
        suite: Suite,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Classify { .. } => "classify",
            Task::Orbit { .. } => "orbit",
            Task::Cesaro { .. } => "cesaro",
            Task::Laurent { .. } => "laurent",
            Task::Verify { .. } => "verify",
        }
    }

    fn needs_operator(&self) -> bool {
        matches!(
            self,
            Task::Classify { .. } | Task::Orbit { .. } | Task::Cesaro { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub formats: Vec<Format>,
    /// Output directory; `--out` takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            formats: vec![Format::Json, Format::Csv],
            dir: None,
        }
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural checks that need no numerical work. Space/operator
    /// compatibility is checked when the operator is built.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.grid
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.task.needs_operator() {
            if self.space.is_none() {
                return bad(format!("task `{}` needs a space", self.task.name()));
            }
            if self.operator.is_none() {
                return bad(format!("task `{}` needs an operator", self.task.name()));
            }
        }
        if let Some(OperatorConfig::Function { symbol, r, .. }) = &self.operator {
            symbol
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            if !(r.is_finite() && *r > 0.0) {
                return bad(format!(
                    "contour radius must be positive and finite, got {r}"
                ));
            }
        }
        match &self.task {
            Task::Classify { modes } if modes.is_empty() => {
                bad("classify needs at least one mode".into())
            }
            Task::Orbit { k, grades, .. } => {
                if *k == 0 {
                    return bad("orbit needs k ≥ 1".into());
                }
                if grades.is_empty() || grades.contains(&0) {
                    return bad("orbit grades must be a non-empty list of integers ≥ 1".into());
                }
                Ok(())
            }
            Task::Cesaro { k, p, .. } if *k == 0 || *p == 0 => {
                bad("cesaro needs k ≥ 1 and p ≥ 1".into())
            }
            Task::Laurent {
                symbol, r, window, ..
            } => {
                symbol
                    .validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                if window[0] > window[1] {
                    return bad(format!("empty window [{}, {}]", window[0], window[1]));
                }
                if !(r.is_finite() && *r > 0.0) {
                    return bad(format!(
                        "contour radius must be positive and finite, got {r}"
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
