use serde::Serialize;

use crate::integrals::Estimate;

/// Slack granted to deterministic estimates, which have zero stderr but
/// still carry quadrature and truncation error.
pub const DETERMINISTIC_FLOOR: f64 = 1e-9;
pub const HOLDS_SIGMAS: f64 = 3.0;
pub const VIOLATION_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Inconclusive,
    Violated,
}

impl Verdict {
    /// Verdict on an estimated margin that the inequality asserts is `>= 0`.
    pub fn from_margin(margin: &Estimate) -> Self {
        let floor = if margin.is_deterministic() { DETERMINISTIC_FLOOR } else { 0.0 };
        Self::classify(margin.value, margin.stderr, floor)
    }

    pub fn classify(value: f64, stderr: f64, floor: f64) -> Self {
        if value.is_nan() {
            return Self::Inconclusive;
        }
        let threshold = -HOLDS_SIGMAS * stderr - floor;
        if value >= threshold {
            Self::Holds
        } else if value.abs() > VIOLATION_SIGMAS * stderr {
            Self::Violated
        } else {
            Self::Inconclusive
        }
    }

    /// Worst of several verdicts.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Self {
        verdicts.into_iter().max().unwrap_or(Self::Holds)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Holds => "holds",
            Self::Inconclusive => "inconclusive",
            Self::Violated => "violated",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
