//! Calibration reports as key-value text and JSON.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::mre::BucketMre;
use super::CalibrationResult;
use crate::model::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model: ModelKind,
    /// `None` when the stage failed.
    pub parameters: Option<Vec<(String, f64)>>,
    pub kappa: Option<f64>,
    pub objective: Option<f64>,
    pub init_objective: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub stop_reason: Option<String>,
    pub mre: Vec<BucketMre>,
    pub error: Option<String>,
}

impl CalibrationReport {
    pub fn from_result(r: &CalibrationResult, mre: Vec<BucketMre>) -> Self {
        Self {
            model: r.params.model,
            parameters: Some(
                r.params
                    .named()
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
            ),
            kappa: Some(r.kappa),
            objective: Some(r.objective),
            init_objective: Some(r.init_objective),
            iterations: Some(r.iterations),
            converged: r.converged,
            stop_reason: Some(format!("{:?}", r.stop_reason)),
            mre,
            error: None,
        }
    }

    pub fn failed(model: ModelKind, error: impl ToString) -> Self {
        Self {
            model,
            parameters: None,
            kappa: None,
            objective: None,
            init_objective: None,
            iterations: None,
            converged: false,
            stop_reason: None,
            mre: Vec::new(),
            error: Some(error.to_string()),
        }
    }

    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        writeln!(s, "model = {}", self.model).unwrap();
        if let Some(e) = &self.error {
            writeln!(s, "status = failed").unwrap();
            writeln!(s, "error = {e}").unwrap();
            return s;
        }
        writeln!(s, "status = ok").unwrap();
        for (k, v) in self.parameters.iter().flatten() {
            writeln!(s, "{k} = {v:e}").unwrap();
        }
        if let Some(k) = self.kappa {
            writeln!(s, "kappa = {k:e}").unwrap();
        }
        if let Some(o) = self.objective {
            writeln!(s, "objective = {o:e}").unwrap();
        }
        if let Some(o) = self.init_objective {
            writeln!(s, "init_objective = {o:e}").unwrap();
        }
        if let Some(i) = self.iterations {
            writeln!(s, "iterations = {i}").unwrap();
        }
        writeln!(s, "converged = {}", self.converged).unwrap();
        if let Some(r) = &self.stop_reason {
            writeln!(s, "stop_reason = {r}").unwrap();
        }
        for b in &self.mre {
            writeln!(s, "mre_{}d = {:.6} (n = {})", b.days, b.mre, b.count).unwrap();
        }
        s
    }
}
