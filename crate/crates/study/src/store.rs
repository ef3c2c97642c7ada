//! Study state: creation, per-trial operations and on-disk persistence.
//!
//! Layout under the data directory:
//!
//! ```text
//! studies/<study_id>/study.json           plan, partition and trial definitions
//! studies/<study_id>/instances.ldrec      snapshot of every served instance
//! studies/<study_id>/events/<trial>.ldrec append-only event log per trial
//! ```
//!
//! In-memory state is rebuilt by replaying the event logs on open.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use evirank_core::io::{append_records, read_records, read_records_lenient, write_records};
use evirank_core::model::check_permutation;
use evirank_core::{read_benchmark, write_benchmark, ClaimInstance, RankingRecord};
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, StudyReport};
use crate::error::StudyError;
use crate::plan::{assign, draw_pool, participant_token, Condition, StudyPlan};
use crate::trial::{Decision, RevealOutcome, TrialDef, TrialEvent, TrialState};

pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
    }
}

/// Returns 0, 1, 2, ... on successive calls.
#[derive(Default)]
pub struct StepClock(AtomicU64);

impl Clock for StepClock {
    fn now_ms(&self) -> u64 {
        self.0.fetch_add(1, Ordering::SeqCst)
    }
}

/// The sentences a SELECTION trial shows for one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub instance_id: String,
    pub selected: Vec<usize>,
}

/// Everything a new study can draw from: instances, the ranking served in
/// the RANKING condition and the selected set served in SELECTION.
#[derive(Debug, Clone, Default)]
pub struct StudyMaterials {
    instances: BTreeMap<String, ClaimInstance>,
    rankings: BTreeMap<String, Vec<usize>>,
    selections: BTreeMap<String, Vec<usize>>,
}

impl StudyMaterials {
    pub fn new(
        instances: Vec<ClaimInstance>,
        rankings: Vec<RankingRecord>,
        selections: Vec<SelectionRecord>,
    ) -> Result<Self, StudyError> {
        let instances: BTreeMap<String, ClaimInstance> =
            instances.into_iter().map(|i| (i.id().to_string(), i)).collect();
        let mut m = StudyMaterials { instances, ..Default::default() };
        for r in rankings {
            let Some(inst) = m.instances.get(&r.instance_id) else { continue };
            check_permutation(&r.instance_id, &r.order, inst.candidate_count())
                .map_err(|e| StudyError::BadRequest(e.to_string()))?;
            m.rankings.insert(r.instance_id, r.order);
        }
        for s in selections {
            let Some(inst) = m.instances.get(&s.instance_id) else { continue };
            let mut sel = s.selected;
            sel.sort_unstable();
            sel.dedup();
            if sel.is_empty() || sel.iter().any(|&i| i >= inst.candidate_count()) {
                return Err(StudyError::BadRequest(format!("selection for {} is empty or out of range", s.instance_id)));
            }
            m.selections.insert(s.instance_id, sel);
        }
        Ok(m)
    }

    pub fn load(benchmark: &Path, rankings: &Path, selections: &Path) -> Result<Self, StudyError> {
        let instances = read_benchmark(benchmark).map_err(|e| StudyError::BadRequest(e.to_string()))?;
        let r: Vec<RankingRecord> = read_records(rankings).map_err(|e| StudyError::BadRequest(e.to_string()))?;
        let s: Vec<SelectionRecord> = read_records(selections).map_err(|e| StudyError::BadRequest(e.to_string()))?;
        Self::new(instances, r, s)
    }

    /// Ids that have an instance, a ranking and a selection.
    pub fn usable_ids(&self) -> Vec<String> {
        self.instances
            .keys()
            .filter(|id| self.rankings.contains_key(*id) && self.selections.contains_key(*id))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantManifest {
    pub index: usize,
    pub token: String,
    pub subset_ranking: usize,
    pub subset_selection: usize,
    pub trials: Vec<TrialDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyManifest {
    pub study_id: String,
    pub plan: StudyPlan,
    pub subsets: Vec<Vec<String>>,
    pub participants: Vec<ParticipantManifest>,
}

impl StudyManifest {
    pub fn trials(&self) -> impl Iterator<Item = &TrialDef> {
        self.participants.iter().flat_map(|p| &p.trials)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShownSentence {
    pub position: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialView {
    pub trial_id: String,
    pub study_id: String,
    pub participant: String,
    /// 1-based place of this trial in the participant's sequence.
    pub number: usize,
    pub total: usize,
    pub condition: Condition,
    pub claim: String,
    pub sentences: Vec<ShownSentence>,
    pub revealed_count: usize,
    pub can_reveal: bool,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealResponse {
    pub trial_id: String,
    pub end_of_evidence: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<ShownSentence>,
    pub revealed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub trial_id: String,
    pub decision: Decision,
    pub revealed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextTrial {
    pub participant: String,
    pub completed: usize,
    pub total: usize,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<TrialView>,
}

struct LiveStudy {
    manifest: StudyManifest,
    dir: PathBuf,
    instances: BTreeMap<String, ClaimInstance>,
    states: HashMap<String, Mutex<TrialState>>,
}

#[derive(Clone, Copy)]
struct TrialRef {
    participant: usize,
    number: usize,
}

#[derive(Default)]
struct Registry {
    studies: BTreeMap<String, Arc<LiveStudy>>,
    tokens: HashMap<String, (String, usize)>,
    trials: HashMap<String, (String, TrialRef)>,
}

pub struct StudyService {
    data_dir: PathBuf,
    materials: StudyMaterials,
    clock: Arc<dyn Clock>,
    registry: RwLock<Registry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StudyError + '_ {
    move |source| StudyError::Io { path: path.to_path_buf(), source }
}

fn record_err(e: evirank_core::io::RecordError) -> StudyError {
    StudyError::Corrupt(e.to_string())
}

impl StudyService {
    /// Opens `data_dir`, replaying every persisted study.
    pub fn open(data_dir: &Path, materials: StudyMaterials, clock: Arc<dyn Clock>) -> Result<Self, StudyError> {
        let studies_dir = data_dir.join("studies");
        fs::create_dir_all(&studies_dir).map_err(io_err(&studies_dir))?;
        let svc = StudyService {
            data_dir: data_dir.to_path_buf(),
            materials,
            clock,
            registry: RwLock::new(Registry::default()),
        };
        let mut dirs: Vec<PathBuf> = fs::read_dir(&studies_dir)
            .map_err(io_err(&studies_dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir() && p.extension().is_none())
            .collect();
        dirs.sort();
        let mut reg = svc.registry.write().expect("registry lock");
        for dir in dirs {
            let live = load_study(&dir)?;
            tracing::info!(study = live.manifest.study_id.as_str(), "study restored");
            register(&mut reg, Arc::new(live));
        }
        drop(reg);
        Ok(svc)
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    pub fn create_study(&self, plan: StudyPlan) -> Result<StudyManifest, StudyError> {
        plan.validate()?;
        let usable = self.materials.usable_ids();
        let pool = match &plan.claim_ids {
            Some(ids) => {
                let mut ids = ids.clone();
                ids.sort();
                if let Some(bad) = ids.iter().find(|id| !usable.contains(id)) {
                    return Err(StudyError::Infeasible(format!("claim {bad} has no instance, ranking or selection")));
                }
                ids
            }
            None => draw_pool(&usable, plan.claim_pool_size, plan.seed)?,
        };
        let (subsets, parts) = assign(&plan, &pool)?;

        let mut reg = self.registry.write().expect("registry lock");
        let mut n = reg.studies.len() + 1;
        let study_id = loop {
            let id = format!("study-{n:04}");
            if !reg.studies.contains_key(&id) && !self.data_dir.join("studies").join(&id).exists() {
                break id;
            }
            n += 1;
        };

        let participants: Vec<ParticipantManifest> = parts
            .into_iter()
            .map(|p| {
                let trials = p
                    .trials
                    .iter()
                    .enumerate()
                    .map(|(k, t)| TrialDef {
                        trial_id: format!("{study_id}-p{}-t{:02}", p.index + 1, k + 1),
                        instance_id: t.instance_id.clone(),
                        condition: t.condition,
                        shown: match t.condition {
                            Condition::Ranking => self.materials.rankings[&t.instance_id].clone(),
                            Condition::Selection => self.materials.selections[&t.instance_id].clone(),
                        },
                    })
                    .collect();
                ParticipantManifest {
                    index: p.index,
                    token: participant_token(&study_id, plan.seed, p.index),
                    subset_ranking: p.subset_ranking,
                    subset_selection: p.subset_selection,
                    trials,
                }
            })
            .collect();
        let manifest = StudyManifest { study_id: study_id.clone(), plan, subsets, participants };
        let instances: BTreeMap<String, ClaimInstance> =
            pool.iter().map(|id| (id.clone(), self.materials.instances[id].clone())).collect();

        let now = self.clock.now_ms();
        let states: HashMap<String, Mutex<TrialState>> =
            manifest.trials().map(|d| (d.trial_id.clone(), Mutex::new(TrialState::start(d, now)))).collect();

        // Build the directory under a temporary name, then rename it in.
        let dir = self.data_dir.join("studies").join(&study_id);
        let tmp = dir.with_extension("tmp");
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
        }
        let events_dir = tmp.join("events");
        fs::create_dir_all(&events_dir).map_err(io_err(&events_dir))?;
        let json = serde_json::to_vec_pretty(&manifest).map_err(|e| StudyError::Corrupt(e.to_string()))?;
        let mpath = tmp.join("study.json");
        fs::write(&mpath, json).map_err(io_err(&mpath))?;
        let snapshot: Vec<ClaimInstance> = instances.values().cloned().collect();
        write_benchmark(&snapshot, &tmp.join("instances.ldrec")).map_err(|e| StudyError::Corrupt(e.to_string()))?;
        for def in manifest.trials() {
            let st = states[&def.trial_id].lock().expect("fresh lock");
            write_records(&events_dir.join(format!("{}.ldrec", def.trial_id)), &st.events).map_err(record_err)?;
        }
        fs::rename(&tmp, &dir).map_err(io_err(&dir))?;

        tracing::info!(study = study_id.as_str(), trials = states.len(), "study created");
        register(&mut reg, Arc::new(LiveStudy { manifest: manifest.clone(), dir, instances, states }));
        Ok(manifest)
    }

    pub fn study_ids(&self) -> Vec<String> {
        self.registry.read().expect("registry lock").studies.keys().cloned().collect()
    }

    pub fn manifest(&self, study_id: &str) -> Result<StudyManifest, StudyError> {
        Ok(self.study(study_id)?.manifest.clone())
    }

    fn study(&self, study_id: &str) -> Result<Arc<LiveStudy>, StudyError> {
        let reg = self.registry.read().expect("registry lock");
        reg.studies.get(study_id).cloned().ok_or_else(|| StudyError::NotFound(format!("study {study_id}")))
    }

    fn locate(&self, trial_id: &str) -> Result<(Arc<LiveStudy>, TrialRef), StudyError> {
        let reg = self.registry.read().expect("registry lock");
        let (sid, r) = reg.trials.get(trial_id).ok_or_else(|| StudyError::NotFound(format!("trial {trial_id}")))?;
        Ok((reg.studies[sid].clone(), *r))
    }

    pub fn trial_view(&self, trial_id: &str) -> Result<TrialView, StudyError> {
        let (study, r) = self.locate(trial_id)?;
        let st = study.states[trial_id].lock().expect("trial lock").clone();
        Ok(view(&study, r, &st))
    }

    pub fn next_trial(&self, token: &str) -> Result<NextTrial, StudyError> {
        let (sid, p) = {
            let reg = self.registry.read().expect("registry lock");
            reg.tokens.get(token).cloned().ok_or_else(|| StudyError::NotFound(format!("participant {token}")))?
        };
        let study = self.study(&sid)?;
        let part = &study.manifest.participants[p];
        let mut completed = 0;
        let mut next = None;
        for (k, def) in part.trials.iter().enumerate() {
            let st = study.states[&def.trial_id].lock().expect("trial lock").clone();
            if st.is_decided() {
                completed += 1;
            } else if next.is_none() {
                next = Some(view(&study, TrialRef { participant: p, number: k + 1 }, &st));
            }
        }
        Ok(NextTrial {
            participant: token.to_string(),
            completed,
            total: part.trials.len(),
            complete: next.is_none(),
            trial: next,
        })
    }

    pub fn reveal(&self, trial_id: &str) -> Result<RevealResponse, StudyError> {
        let (study, r) = self.locate(trial_id)?;
        let def = &study.manifest.participants[r.participant].trials[r.number - 1];
        let mut st = study.states[trial_id].lock().expect("trial lock");
        let (outcome, ev) = st.plan_reveal(def, self.clock.now_ms())?;
        if let Some(ev) = ev {
            persist(&study, trial_id, &ev)?;
            st.apply(ev);
        }
        let inst = &study.instances[&def.instance_id];
        Ok(match outcome {
            RevealOutcome::Sentence { position, index } => RevealResponse {
                trial_id: trial_id.to_string(),
                end_of_evidence: false,
                sentence: Some(ShownSentence { position, text: inst.candidates()[index].text.clone() }),
                revealed_count: st.revealed_count,
            },
            RevealOutcome::EndOfEvidence => RevealResponse {
                trial_id: trial_id.to_string(),
                end_of_evidence: true,
                sentence: None,
                revealed_count: st.revealed_count,
            },
        })
    }

    pub fn decide(&self, trial_id: &str, decision: Decision) -> Result<DecisionResponse, StudyError> {
        let (study, r) = self.locate(trial_id)?;
        let def = &study.manifest.participants[r.participant].trials[r.number - 1];
        let mut st = study.states[trial_id].lock().expect("trial lock");
        let ev = st.plan_decision(def, decision, self.clock.now_ms())?;
        persist(&study, trial_id, &ev)?;
        st.apply(ev);
        Ok(DecisionResponse { trial_id: trial_id.to_string(), decision, revealed_count: st.revealed_count })
    }

    /// The persisted log of one trial, read from disk.
    pub fn events(&self, trial_id: &str) -> Result<Vec<TrialEvent>, StudyError> {
        let (study, _) = self.locate(trial_id)?;
        read_records(&events_path(&study.dir, trial_id)).map_err(record_err)
    }

    /// Analysis over the persisted study directory.
    pub fn report(&self, study_id: &str) -> Result<StudyReport, StudyError> {
        let study = self.study(study_id)?;
        analyze_dir(&study.dir)
    }
}

fn register(reg: &mut Registry, live: Arc<LiveStudy>) {
    let sid = live.manifest.study_id.clone();
    for p in &live.manifest.participants {
        reg.tokens.insert(p.token.clone(), (sid.clone(), p.index));
        for (k, t) in p.trials.iter().enumerate() {
            reg.trials.insert(t.trial_id.clone(), (sid.clone(), TrialRef { participant: p.index, number: k + 1 }));
        }
    }
    reg.studies.insert(sid, live);
}

fn view(study: &LiveStudy, r: TrialRef, st: &TrialState) -> TrialView {
    let part = &study.manifest.participants[r.participant];
    let def = &part.trials[r.number - 1];
    let inst = &study.instances[&def.instance_id];
    let sentences = def.shown[..st.revealed_count]
        .iter()
        .enumerate()
        .map(|(k, &i)| ShownSentence { position: k + 1, text: inst.candidates()[i].text.clone() })
        .collect();
    TrialView {
        trial_id: def.trial_id.clone(),
        study_id: study.manifest.study_id.clone(),
        participant: part.token.clone(),
        number: r.number,
        total: part.trials.len(),
        condition: def.condition,
        claim: inst.claim().to_string(),
        sentences,
        revealed_count: st.revealed_count,
        can_reveal: def.condition == Condition::Ranking && !st.is_decided() && st.revealed_count < def.shown.len(),
        decision: st.decision,
    }
}

fn events_path(dir: &Path, trial_id: &str) -> PathBuf {
    dir.join("events").join(format!("{trial_id}.ldrec"))
}

fn persist(study: &LiveStudy, trial_id: &str, ev: &TrialEvent) -> Result<(), StudyError> {
    append_records(&events_path(&study.dir, trial_id), std::iter::once(ev)).map_err(record_err)
}

fn read_manifest(dir: &Path) -> Result<StudyManifest, StudyError> {
    let path = dir.join("study.json");
    let text = fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&text).map_err(|e| StudyError::Corrupt(format!("{}: {e}", path.display())))
}

fn read_instances(dir: &Path) -> Result<BTreeMap<String, ClaimInstance>, StudyError> {
    let v = read_benchmark(&dir.join("instances.ldrec")).map_err(|e| StudyError::Corrupt(e.to_string()))?;
    Ok(v.into_iter().map(|i| (i.id().to_string(), i)).collect())
}

fn load_study(dir: &Path) -> Result<LiveStudy, StudyError> {
    let manifest = read_manifest(dir)?;
    let instances = read_instances(dir)?;
    let mut states = HashMap::new();
    for def in manifest.trials() {
        let path = events_path(dir, &def.trial_id);
        let events: Vec<TrialEvent> = read_records_lenient(&path).map_err(record_err)?;
        let lines = fs::read_to_string(&path).map(|t| t.lines().filter(|l| !l.trim().is_empty()).count()).unwrap_or(0);
        if lines != events.len() {
            // A torn final append; keep the complete prefix.
            tracing::warn!(trial = def.trial_id.as_str(), "truncating torn event log");
            write_records(&path, &events).map_err(record_err)?;
        }
        let st = TrialState::replay(def, &events).map_err(StudyError::Corrupt)?;
        states.insert(def.trial_id.clone(), Mutex::new(st));
    }
    Ok(LiveStudy { manifest, dir: dir.to_path_buf(), instances, states })
}

/// Analyzes a study directory without a running service.
pub fn analyze_dir(dir: &Path) -> Result<StudyReport, StudyError> {
    let manifest = read_manifest(dir)?;
    let instances = read_instances(dir)?;
    let mut logs = BTreeMap::new();
    for def in manifest.trials() {
        let events: Vec<TrialEvent> = read_records(&events_path(dir, &def.trial_id)).map_err(record_err)?;
        logs.insert(def.trial_id.clone(), events);
    }
    let defs: Vec<TrialDef> = manifest.trials().cloned().collect();
    analyze(&manifest.study_id, &defs, &instances, &logs)
}
