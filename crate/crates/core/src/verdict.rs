//! Rule evaluation results: computed bound, exact object when the class is
//! closed under the operation, an inclusion certificate, and the provenance
//! of every hypothesis that backed the application.

use crate::rat::Vector;
use crate::union::UnionSet;

/// Where a hypothesis came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Checked,
    AssertedByCaller,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QcOutcome {
    Holds,
    /// Multipliers witnessing failure; they re-verify under exact arithmetic.
    FailsWithWitness(Vec<Vector>),
    NotComputable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcStatus {
    pub name: String,
    pub outcome: QcOutcome,
    pub provenance: Provenance,
}

impl QcStatus {
    pub fn checked(name: &str, outcome: QcOutcome) -> Self {
        QcStatus { name: name.to_string(), outcome, provenance: Provenance::Checked }
    }

    pub fn asserted(name: &str) -> Self {
        QcStatus {
            name: name.to_string(),
            outcome: QcOutcome::Holds,
            provenance: Provenance::AssertedByCaller,
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self.outcome, QcOutcome::Holds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InclusionCert {
    /// `exact` is a subset of `bound` under the exact union-inclusion test.
    Certified,
    /// A point of `exact` outside `bound`.
    FailsWithWitness(Vector),
    /// No exact object is available on this instance.
    NotComputable,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub bound: UnionSet,
    pub exact: Option<UnionSet>,
    pub inclusion: InclusionCert,
    pub qc: Vec<QcStatus>,
    /// Tighter union-rule estimate, when the rule defines one.
    pub refined_bound: Option<UnionSet>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(bound: UnionSet, exact: Option<UnionSet>) -> Self {
        let inclusion = match &exact {
            None => InclusionCert::NotComputable,
            Some(e) => match e.uncovered_witness(&bound) {
                None => InclusionCert::Certified,
                Some(w) => InclusionCert::FailsWithWitness(w),
            },
        };
        Verdict { bound, exact, inclusion, qc: Vec::new(), refined_bound: None, notes: Vec::new() }
    }

    pub fn with_qc(mut self, qc: QcStatus) -> Self {
        self.qc.push(qc);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn qc_all_hold(&self) -> bool {
        self.qc.iter().all(|q| q.holds())
    }

    pub fn inclusion_certified(&self) -> bool {
        matches!(self.inclusion, InclusionCert::Certified)
    }
}
