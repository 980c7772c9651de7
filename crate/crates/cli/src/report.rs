//! The top-level JSON document written by every command.

use std::path::Path;

use equidist_core::discrepancy::DiscrepancyReport;
use equidist_core::ensembles::{HeightMode, OrbitEnsemble};
use serde::Serialize;
use serde_json::{Map, Value};

pub const VERSION: &str = "report_v1";

#[derive(Debug, Clone, Serialize)]
pub struct NamedCheck {
    pub name: String,
    #[serde(flatten)]
    pub report: DiscrepancyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub label: String,
    pub sets: usize,
    #[serde(rename = "card_S")]
    pub card_s: usize,
    #[serde(rename = "m_S")]
    pub m_s: f64,
    #[serde(rename = "m_S_mode")]
    pub mode: HeightMode,
    #[serde(rename = "h_S")]
    pub h_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WrittenCsv {
    pub kind: String,
    pub path: String,
}

impl WrittenCsv {
    pub fn new(kind: &str, path: &Path) -> Self {
        WrittenCsv {
            kind: kind.to_string(),
            path: path.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: String,
    pub params: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSummary>,
    pub checks: Vec<NamedCheck>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub csv: Vec<WrittenCsv>,
    pub all_hold: bool,
    pub violations: Vec<String>,
}

impl Default for Report {
    fn default() -> Self {
        Report {
            version: VERSION,
            command: String::new(),
            params: Map::new(),
            ensemble: None,
            checks: Vec::new(),
            details: Value::Null,
            csv: Vec::new(),
            all_hold: true,
            violations: Vec::new(),
        }
    }
}

impl Report {
    pub fn for_ensemble(ens: &OrbitEnsemble) -> Self {
        Report {
            ensemble: Some(EnsembleSummary {
                label: ens.label().to_string(),
                sets: ens.len(),
                card_s: ens.card_s(),
                m_s: ens.m_s(),
                mode: ens.mode(),
                h_s: ens.h_s(),
                warnings: ens.heights().warnings.clone(),
            }),
            ..Report::default()
        }
    }

    pub fn push(&mut self, name: impl Into<String>, report: DiscrepancyReport) {
        self.checks.push(NamedCheck {
            name: name.into(),
            report,
        });
    }

    /// Collects the names of violated checks with their numbers.
    pub fn finish(&mut self) {
        self.violations = self
            .checks
            .iter()
            .filter(|c| !c.report.holds)
            .map(|c| {
                format!(
                    "{}: statistic {} > bound {}",
                    c.name, c.report.statistic, c.report.bound
                )
            })
            .collect();
        self.all_hold = self.violations.is_empty();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
