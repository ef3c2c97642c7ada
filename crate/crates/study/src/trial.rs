use serde::{Deserialize, Serialize};

use crate::error::StudyError;
use crate::plan::Condition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Supported,
    Refuted,
    CantDecide,
    Pending,
}

/// One served trial. `shown` lists candidate indices in display order: the
/// full ranking for RANKING, the selected sentences in reading order for
/// SELECTION.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialDef {
    pub trial_id: String,
    pub instance_id: String,
    pub condition: Condition,
    pub shown: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Reveal { position: usize },
    Decide { decision: Decision, revealed_count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialEvent {
    pub seq: usize,
    pub at_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RevealOutcome {
    /// 1-based display position and the candidate index shown there.
    Sentence { position: usize, index: usize },
    EndOfEvidence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialState {
    pub revealed_count: usize,
    pub decision: Decision,
    pub events: Vec<TrialEvent>,
}

impl TrialState {
    /// State before any participant action. A RANKING trial starts with the
    /// top sentence revealed, logged as the first event.
    pub fn start(def: &TrialDef, at_ms: u64) -> Self {
        match def.condition {
            Condition::Ranking => TrialState {
                revealed_count: 1,
                decision: Decision::Pending,
                events: vec![TrialEvent { seq: 0, at_ms, kind: EventKind::Reveal { position: 1 } }],
            },
            Condition::Selection => {
                TrialState { revealed_count: def.shown.len(), decision: Decision::Pending, events: Vec::new() }
            }
        }
    }

    pub fn is_decided(&self) -> bool {
        self.decision != Decision::Pending
    }

    /// Checks a reveal and returns the event to persist, if any. The state
    /// is unchanged until [`apply`](Self::apply).
    pub fn plan_reveal(&self, def: &TrialDef, at_ms: u64) -> Result<(RevealOutcome, Option<TrialEvent>), StudyError> {
        if def.condition == Condition::Selection {
            return Err(StudyError::MethodNotAllowed(format!(
                "trial {} shows its evidence all at once; reveal is not available",
                def.trial_id
            )));
        }
        if self.is_decided() {
            return Err(StudyError::Conflict(format!("trial {} is already decided", def.trial_id)));
        }
        if self.revealed_count >= def.shown.len() {
            return Ok((RevealOutcome::EndOfEvidence, None));
        }
        let position = self.revealed_count + 1;
        let ev = TrialEvent { seq: self.events.len(), at_ms, kind: EventKind::Reveal { position } };
        Ok((RevealOutcome::Sentence { position, index: def.shown[position - 1] }, Some(ev)))
    }

    pub fn plan_decision(&self, def: &TrialDef, decision: Decision, at_ms: u64) -> Result<TrialEvent, StudyError> {
        if decision == Decision::Pending {
            return Err(StudyError::BadRequest("PENDING is not a decision".into()));
        }
        if self.is_decided() {
            return Err(StudyError::Conflict(format!("trial {} is already decided", def.trial_id)));
        }
        Ok(TrialEvent {
            seq: self.events.len(),
            at_ms,
            kind: EventKind::Decide { decision, revealed_count: self.revealed_count },
        })
    }

    pub fn apply(&mut self, ev: TrialEvent) {
        match &ev.kind {
            EventKind::Reveal { position } => self.revealed_count = *position,
            EventKind::Decide { decision, .. } => self.decision = *decision,
        }
        self.events.push(ev);
    }

    /// Rebuilds state from a persisted log, rejecting any log that breaks
    /// the reveal and decision rules.
    pub fn replay(def: &TrialDef, events: &[TrialEvent]) -> Result<Self, String> {
        let mut st = match def.condition {
            Condition::Ranking => TrialState { revealed_count: 0, decision: Decision::Pending, events: Vec::new() },
            Condition::Selection => {
                TrialState { revealed_count: def.shown.len(), decision: Decision::Pending, events: Vec::new() }
            }
        };
        for (i, ev) in events.iter().enumerate() {
            if ev.seq != i {
                return Err(format!("{}: event {i} has seq {}", def.trial_id, ev.seq));
            }
            if st.is_decided() {
                return Err(format!("{}: event {i} follows the decision", def.trial_id));
            }
            match &ev.kind {
                EventKind::Reveal { position } => {
                    if def.condition != Condition::Ranking {
                        return Err(format!("{}: reveal in a selection trial", def.trial_id));
                    }
                    if *position != st.revealed_count + 1 || *position > def.shown.len() {
                        return Err(format!("{}: reveal of position {position} after {}", def.trial_id, st.revealed_count));
                    }
                }
                EventKind::Decide { decision, revealed_count } => {
                    if *decision == Decision::Pending || *revealed_count != st.revealed_count {
                        return Err(format!("{}: inconsistent decision event", def.trial_id));
                    }
                    if def.condition == Condition::Ranking && st.revealed_count == 0 {
                        return Err(format!("{}: decision before the first sentence", def.trial_id));
                    }
                }
            }
            st.apply(ev.clone());
        }
        Ok(st)
    }
}
