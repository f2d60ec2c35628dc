//! Report documents printed by the CLI with `--json`.

use serde::{Deserialize, Serialize};
use witness_resolve::{ConstraintState, Model, OverPart, WellPart};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub label: String,
    pub over: bool,
    pub under: bool,
    pub over_dim: usize,
    pub under_dim: usize,
}

impl From<ConstraintState> for StateReport {
    fn from(s: ConstraintState) -> Self {
        StateReport {
            label: s.label().to_owned(),
            over: s.over,
            under: s.under,
            over_dim: s.over_dim,
            under_dim: s.under_dim,
        }
    }
}

impl std::fmt::Display for StateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}, over_dim={}, under_dim={}",
            self.label, self.over_dim, self.under_dim
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub entities: usize,
    pub constraints: usize,
    pub witness_residual: f64,
}

/// Parts as plain id lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parts {
    pub over: Vec<Vec<String>>,
    pub well: Vec<Vec<String>>,
}

impl Parts {
    pub fn from_over(parts: &[OverPart]) -> Vec<Vec<String>> {
        parts
            .iter()
            .map(|p| p.constraints.iter().map(|c| c.0.clone()).collect())
            .collect()
    }

    pub fn from_well(parts: &[WellPart]) -> Vec<Vec<String>> {
        parts
            .iter()
            .map(|p| p.entities.iter().map(|e| e.0.clone()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub state: StateReport,
    pub parts: Parts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub state: StateReport,
    pub optimal: Parts,
    pub greedy: Parts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolveReport {
    pub before: StateReport,
    pub after: StateReport,
    pub accepted: usize,
    pub rejected: usize,
    pub undone: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Hex SHA-256 of a document.
pub fn fingerprint(document: &str) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(document.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn summary(m: &Model) -> String {
    format!(
        "{} entities, {} constraints",
        m.entities().len(),
        m.constraints().len()
    )
}
