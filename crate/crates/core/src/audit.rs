//! Pass/fail records for dimension bounds and counting identities.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditStatus {
    Pass,
    Fail,
    /// The implication's hypothesis does not hold, so there is nothing to check.
    Vacuous,
    /// Preconditions of the audit itself are not met.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub name: String,
    pub status: AuditStatus,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub note: String,
}

impl AuditRecord {
    pub fn new(
        name: &str,
        status: AuditStatus,
        lhs: Option<f64>,
        rhs: Option<f64>,
        note: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            status,
            lhs,
            rhs,
            note: note.into(),
        }
    }

    pub fn check(name: &str, ok: bool, lhs: f64, rhs: f64, note: impl Into<String>) -> Self {
        let status = if ok {
            AuditStatus::Pass
        } else {
            AuditStatus::Fail
        };
        Self::new(name, status, Some(lhs), Some(rhs), note)
    }

    pub fn failed(&self) -> bool {
        self.status == AuditStatus::Fail
    }
}
