//! Uniform outcome record for every inequality check.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Which side is expected to dominate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `lhs >= rhs`
    Ge,
    /// `lhs <= rhs`
    Le,
    /// `lhs == rhs`, slack `-|lhs - rhs|`
    Eq,
}

/// One verifier outcome.
///
/// `slack` is oriented so that a nonnegative value means the inequality holds.
/// The check passes when `slack >= -rel_tolerance * max(|lhs|, |rhs|, 1e-12)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IneqReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub orientation: Orientation,
    pub slack: f64,
    pub rel_tolerance: f64,
    pub pass: bool,
    pub witness: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Recorded for information only; a failing diagnostic is not a violation.
    #[serde(default, skip_serializing_if = "is_false")]
    pub diagnostic: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

pub(crate) const SLACK_FLOOR: f64 = 1e-12;

impl IneqReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, orientation: Orientation, rel_tolerance: f64) -> Self {
        let (big, small) = match orientation {
            Orientation::Ge => (lhs, rhs),
            Orientation::Le => (rhs, lhs),
            Orientation::Eq => {
                if lhs == rhs {
                    (lhs, rhs)
                } else if lhs > rhs {
                    (rhs, lhs)
                } else {
                    (lhs, rhs)
                }
            }
        };
        let slack = if big == small { 0.0 } else { big - small };
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        let scale = lhs.abs().max(rhs.abs()).max(SLACK_FLOOR);
        // an infinite dominating side passes trivially, an infinite dominated side fails
        let pass = if orientation == Orientation::Eq && lhs == rhs {
            true
        } else if orientation == Orientation::Eq && (lhs.is_infinite() || rhs.is_infinite()) {
            false
        } else if big == f64::INFINITY {
            true
        } else if small == f64::INFINITY || slack.is_nan() {
            false
        } else {
            slack >= -rel_tolerance * scale
        };
        IneqReport {
            name: name.into(),
            lhs,
            rhs,
            orientation,
            slack,
            rel_tolerance,
            pass,
            witness: String::new(),
            warnings: Vec::new(),
            diagnostic: false,
        }
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = witness.into();
        self
    }

    pub fn with_warning(mut self, warning: impl Into<String>) -> Self {
        self.warnings.push(warning.into());
        self
    }

    pub fn as_diagnostic(mut self) -> Self {
        self.diagnostic = true;
        self
    }

    /// Re-evaluates the pass rule at another relative tolerance.
    pub fn with_tolerance(self, rel_tolerance: f64) -> Self {
        let fresh = IneqReport::new(self.name, self.lhs, self.rhs, self.orientation, rel_tolerance);
        IneqReport { witness: self.witness, warnings: self.warnings, diagnostic: self.diagnostic, ..fresh }
    }

    /// Slack divided by the scale used in the pass rule.
    pub fn relative_slack(&self) -> f64 {
        self.slack / self.lhs.abs().max(self.rhs.abs()).max(SLACK_FLOOR)
    }

    /// Relative distance between the two sides, ignoring orientation.
    pub fn relative_gap(&self) -> f64 {
        if self.lhs == self.rhs {
            return 0.0;
        }
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(self.rhs.abs()).max(SLACK_FLOOR)
    }
}
