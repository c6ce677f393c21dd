//! The JSON document written by `compute --report`.

use pifix_core::{ConvergenceReport, IterationTrace, StepRecord};
use serde::{Deserialize, Serialize};

/// A delta magnitude `leading × 10^exponent`; far too small for `f64`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Magnitude {
    pub leading: String,
    pub exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub index: usize,
    pub working_digits: usize,
    /// `None` when the step reproduced its input exactly.
    pub delta: Option<Magnitude>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEntry {
    pub step: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub order: usize,
    pub x0: String,
    pub target_digits: usize,
    pub epsilon_exponent: usize,
    pub ladder: Vec<usize>,
    pub terminated_by: String,
    pub steps: Vec<StepEntry>,
    pub order_estimates: Vec<OrderEntry>,
    pub error_constant_estimate: Option<f64>,
    /// Exact, as `numerator/denominator` in lowest terms.
    pub error_constant_exact: String,
    pub matched_digits: Option<usize>,
    pub theorem_check_passed: bool,
    pub total_wall_ms: f64,
}

impl ReportDocument {
    pub fn new(trace: &IterationTrace, x0_text: &str, report: &ConvergenceReport) -> Self {
        ReportDocument {
            order: trace.config.order,
            x0: x0_text.to_string(),
            target_digits: trace.config.target_digits,
            epsilon_exponent: trace.config.epsilon_exponent,
            ladder: trace.ladder.iter().map(|p| p.digits()).collect(),
            terminated_by: trace.terminated_by.to_string(),
            steps: trace.steps.iter().map(step_entry).collect(),
            order_estimates: report
                .order_estimates
                .iter()
                .map(|e| OrderEntry {
                    step: e.step,
                    value: e.value,
                })
                .collect(),
            error_constant_estimate: report.error_constant_estimate,
            error_constant_exact: report.error_constant_exact.to_string(),
            matched_digits: report.matched_digits,
            theorem_check_passed: report.theorem_check_passed,
            total_wall_ms: millis(trace.total_wall_time()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

fn step_entry(step: &StepRecord) -> StepEntry {
    StepEntry {
        index: step.index,
        working_digits: step.working_digits.digits(),
        delta: step.delta_exponent.map(|exponent| Magnitude {
            leading: step.delta_leading.clone(),
            exponent,
        }),
        wall_ms: millis(step.wall_time),
    }
}

pub(crate) fn millis(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
