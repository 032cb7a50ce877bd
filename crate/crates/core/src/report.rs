//! Structured pass/fail results shared by every verifier.

use serde::Serialize;

use crate::coeff::LaurentPoly;
use crate::scalar::Scalar;

/// Witness lists are truncated to this many items; the full count is kept.
pub const MAX_WITNESSES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Nonzero residual entry. Indices are `[component, site]` pairs.
    Entry { row: Vec<[u32; 2]>, col: Vec<[u32; 2]>, value: String },
    /// A word whose two reductions disagree.
    Word { word: String, left: String, right: String },
    /// Expected/actual pair for anything else.
    Mismatch { item: String, expected: String, actual: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
    /// Number of failures before truncation.
    pub witness_count: usize,
    /// Number of cases examined (entries, words, ...).
    pub checked: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(identity: impl Into<String>) -> Self {
        VerificationReport {
            identity: identity.into(),
            passed: true,
            witnesses: Vec::new(),
            witness_count: 0,
            checked: 0,
            checks: Vec::new(),
            verdict: None,
            notes: Vec::new(),
        }
    }

    pub fn fail(&mut self, w: Witness) {
        self.passed = false;
        self.witness_count += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w);
        }
    }

    /// Records a failure without a witness (e.g. a sub-check failed).
    pub fn mark_failed(&mut self) {
        self.passed = false;
    }

    /// Compares two coefficients, recording a mismatch witness.
    pub fn expect_eq<S: Scalar>(&mut self, item: impl Into<String>, expected: &LaurentPoly<S>, actual: &LaurentPoly<S>) {
        self.checked += 1;
        if expected != actual {
            self.fail(Witness::Mismatch { item: item.into(), expected: expected.to_string(), actual: actual.to_string() });
        }
    }

    pub fn push_check(&mut self, sub: VerificationReport) {
        if !sub.passed {
            self.passed = false;
        }
        self.checked += sub.checked;
        self.checks.push(sub);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Finds a sub-check by identity name.
    pub fn check(&self, identity: &str) -> Option<&VerificationReport> {
        self.checks.iter().find(|c| c.identity == identity)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}
