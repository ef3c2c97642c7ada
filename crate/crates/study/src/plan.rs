//! Study plans and trial assignment.
//!
//! The claim pool is shuffled with the plan seed and cut into one subset per
//! participant. Under [`AssignmentMode::Rotation`] participant `p` sees
//! subset `p` ranked and subset `p + 1` (mod P) selected, so nobody meets a
//! claim twice and every claim is served once per condition across the
//! study. [`AssignmentMode::Paired`] serves a participant's own subset under
//! both conditions, keeping participants' claims fully disjoint.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::StudyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    Ranking,
    Selection,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Ranking, Condition::Selection];

    pub fn label(self) -> &'static str {
        match self {
            Condition::Ranking => "Evidence Ranking",
            Condition::Selection => "Evidence Selection",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    #[default]
    Rotation,
    Paired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyPlan {
    #[serde(default = "default_pool_size")]
    pub claim_pool_size: usize,
    #[serde(default = "default_participants")]
    pub participants: usize,
    #[serde(default = "default_trials")]
    pub trials_per_participant: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub assignment: AssignmentMode,
    /// Explicit claim pool. When absent, `claim_pool_size` ids are drawn
    /// from the service's materials with the plan seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim_ids: Option<Vec<String>>,
}

fn default_pool_size() -> usize {
    100
}
fn default_participants() -> usize {
    5
}
fn default_trials() -> usize {
    40
}

impl Default for StudyPlan {
    fn default() -> Self {
        StudyPlan {
            claim_pool_size: default_pool_size(),
            participants: default_participants(),
            trials_per_participant: default_trials(),
            seed: 0,
            assignment: AssignmentMode::Rotation,
            claim_ids: None,
        }
    }
}

impl StudyPlan {
    pub fn per_condition(&self) -> usize {
        self.trials_per_participant / 2
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        if self.participants == 0 {
            return Err(StudyError::Infeasible("at least one participant is required".into()));
        }
        if self.trials_per_participant == 0 || self.trials_per_participant % 2 != 0 {
            return Err(StudyError::Infeasible(format!(
                "{} trials per participant cannot be split evenly between two conditions",
                self.trials_per_participant
            )));
        }
        if self.assignment == AssignmentMode::Rotation && self.participants < 2 {
            return Err(StudyError::Infeasible("rotation needs at least two participants".into()));
        }
        let need = self.participants * self.per_condition();
        if self.claim_pool_size != need {
            return Err(StudyError::Infeasible(format!(
                "{} claims cannot be split into {} disjoint subsets of {}",
                self.claim_pool_size,
                self.participants,
                self.per_condition()
            )));
        }
        if let Some(ids) = &self.claim_ids {
            let distinct: BTreeSet<&String> = ids.iter().collect();
            if distinct.len() != ids.len() {
                return Err(StudyError::BadRequest("claim_ids contains duplicates".into()));
            }
            if ids.len() != self.claim_pool_size {
                return Err(StudyError::Infeasible(format!(
                    "claim_ids lists {} claims but the plan needs {}",
                    ids.len(),
                    self.claim_pool_size
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTrial {
    pub instance_id: String,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantPlan {
    pub index: usize,
    pub subset_ranking: usize,
    pub subset_selection: usize,
    pub trials: Vec<PlannedTrial>,
}

/// Draws `k` ids from `available` (sorted first) with the plan seed.
pub fn draw_pool(available: &[String], k: usize, seed: u64) -> Result<Vec<String>, StudyError> {
    if available.len() < k {
        return Err(StudyError::Infeasible(format!("{k} claims requested but only {} are usable", available.len())));
    }
    let mut ids = available.to_vec();
    ids.sort();
    ids.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    ids.truncate(k);
    ids.sort();
    Ok(ids)
}

/// Partitions `pool` and lays out every participant's interleaved trials.
pub fn assign(plan: &StudyPlan, pool: &[String]) -> Result<(Vec<Vec<String>>, Vec<ParticipantPlan>), StudyError> {
    plan.validate()?;
    if pool.len() != plan.claim_pool_size {
        return Err(StudyError::Infeasible(format!("pool has {} claims, plan needs {}", pool.len(), plan.claim_pool_size)));
    }
    // Separate streams for the partition and each participant's order.
    let mut ids = pool.to_vec();
    ids.sort();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(stream_seed(plan.seed, "partition")));
    let subsets: Vec<Vec<String>> = ids.chunks(plan.per_condition()).map(|c| c.to_vec()).collect();

    let p = plan.participants;
    let mut out = Vec::with_capacity(p);
    for i in 0..p {
        let sel = match plan.assignment {
            AssignmentMode::Rotation => (i + 1) % p,
            AssignmentMode::Paired => i,
        };
        let mut trials: Vec<PlannedTrial> = subsets[i]
            .iter()
            .map(|id| PlannedTrial { instance_id: id.clone(), condition: Condition::Ranking })
            .chain(subsets[sel].iter().map(|id| PlannedTrial { instance_id: id.clone(), condition: Condition::Selection }))
            .collect();
        trials.shuffle(&mut ChaCha8Rng::seed_from_u64(stream_seed(plan.seed, &format!("participant-{i}"))));
        out.push(ParticipantPlan { index: i, subset_ranking: i, subset_selection: sel, trials });
    }
    Ok((subsets, out))
}

fn stream_seed(seed: u64, label: &str) -> u64 {
    let d = Sha256::new().chain_update(seed.to_le_bytes()).chain_update(label.as_bytes()).finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Opaque participant token, stable for a given study and index.
pub fn participant_token(study_id: &str, seed: u64, index: usize) -> String {
    let d = Sha256::new()
        .chain_update(study_id.as_bytes())
        .chain_update(seed.to_le_bytes())
        .chain_update((index as u64).to_le_bytes())
        .finalize();
    hex::encode(&d[..8])
}
