//! Verification study service: assigns claims to participants under the
//! RANKING (incremental reveal) and SELECTION (everything at once)
//! conditions, records reveals and decisions as append-only event logs, and
//! analyzes outcomes per condition.

pub mod analysis;
mod error;
pub mod http;
pub mod plan;
pub mod store;
pub mod trial;

pub use analysis::{analyze, classify, over_read, ConditionReport, Outcome, StudyReport};
pub use error::{ErrorEnvelope, StudyError};
pub use plan::{assign, AssignmentMode, Condition, StudyPlan};
pub use store::{
    analyze_dir, Clock, DecisionResponse, NextTrial, RevealResponse, SelectionRecord, ShownSentence, StepClock,
    StudyManifest, StudyMaterials, StudyService, SystemClock, TrialView,
};
pub use trial::{Decision, EventKind, TrialDef, TrialEvent, TrialState};
