//! Exact correctness and security measurement for protocol objects.

pub mod classical;
pub mod lp;
pub mod quantum;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::protocol::types::{CostReport, ProtocolKind};

pub use classical::{cds_secret_radius, cds_secret_radius_lp, cds_verify, cds_verify_with, psm_verify, psm_verify_with};
pub use lp::{chebyshev_center_l1, solve, LinearProgram, LpSolution};
pub use quantum::{cdqs_verify, cdqs_verify_with, productness_check, spanning_secrets, ProductnessEntry};

/// Default pass/fail budget for both errors.
pub const DEFAULT_BUDGET: f64 = 0.09;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDiagnostic {
    pub x: u64,
    pub y: u64,
    pub f: bool,
    /// Set when one row stands for a whole class of inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub distances: BTreeMap<String, f64>,
}

impl InputDiagnostic {
    pub fn new(x: u64, y: u64, f: bool) -> Self {
        InputDiagnostic {
            x,
            y,
            f,
            class: None,
            distances: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.distances.insert(key.to_string(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub protocol: String,
    pub kind: ProtocolKind,
    pub function: String,
    pub n: usize,
    pub epsilon_hat: f64,
    pub delta_hat_lower: f64,
    pub delta_hat_upper: f64,
    pub inputs: Vec<InputDiagnostic>,
    pub cost: CostReport,
    pub seed: Option<u64>,
    pub wall_time_ms: Option<u64>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(protocol: &str, kind: ProtocolKind, function: &str, n: usize, cost: CostReport) -> Self {
        VerificationReport {
            protocol: protocol.to_string(),
            kind,
            function: function.to_string(),
            n,
            epsilon_hat: 0.0,
            delta_hat_lower: 0.0,
            delta_hat_upper: 0.0,
            inputs: Vec::new(),
            cost,
            seed: None,
            wall_time_ms: None,
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    /// True when ε̂ and the upper end of δ̂ fit the given budgets.
    pub fn within(&self, eps: f64, delta: f64) -> bool {
        self.epsilon_hat <= eps && self.delta_hat_upper <= delta
    }

    pub fn within_default_budget(&self) -> bool {
        self.within(DEFAULT_BUDGET, DEFAULT_BUDGET)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
