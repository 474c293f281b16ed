//! Structured outcomes of checks and conjecture harnesses.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// The checked statement held on everything examined.
    Pass,
    /// A search over a universally quantified statement found nothing up to
    /// `cap`. Never upgraded to "proved".
    NoCounterexample { cap: u64 },
    /// A counterexample or a violated identity; see the report's witnesses.
    Fail,
    /// The statement's hypotheses do not apply to the input.
    Skipped { reason: String },
}

impl Verdict {
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub group: String,
    pub verdict: Verdict,
    /// Number of cases (sequences, pairs, subgroups) actually evaluated.
    pub examined: u64,
    /// Cases skipped because a hypothesis did not hold.
    pub skipped: u64,
    /// False when a budget cut the sweep short.
    pub exhaustive: bool,
    pub witnesses: Vec<String>,
    pub notes: Vec<String>,
    /// Check-specific tallies (extremal counts, maximum lengths, ...).
    pub metrics: BTreeMap<String, u64>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, group: impl ToString) -> Self {
        VerificationReport {
            check: check.into(),
            group: group.to_string(),
            verdict: Verdict::Pass,
            examined: 0,
            skipped: 0,
            exhaustive: true,
            witnesses: Vec::new(),
            notes: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn skipped(check: impl Into<String>, group: impl ToString, reason: impl Into<String>) -> Self {
        let mut r = Self::new(check, group);
        r.verdict = Verdict::Skipped { reason: reason.into() };
        r
    }

    pub fn fail(&mut self, witness: impl Into<String>) {
        self.verdict = Verdict::Fail;
        self.witnesses.push(witness.into());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass | Verdict::NoCounterexample { .. })
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.verdict, Verdict::Skipped { .. })
    }

    /// Converts a passing sweep into the bounded "no counterexample" form.
    pub(crate) fn bounded(mut self, cap: u64) -> Self {
        if self.verdict == Verdict::Pass {
            self.verdict = Verdict::NoCounterexample { cap };
        }
        self
    }
}
