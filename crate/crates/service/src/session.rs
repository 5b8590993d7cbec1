use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use ccb_core::bridge::PolicyLabel;
use ccb_core::experiment::{read_records, summarize, ChoiceRecord, CohortSummary, RecordLog, Source};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{ProblemStore, ServiceError};

/// Milliseconds since the Unix epoch.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// Clock that only moves when told to.
#[derive(Debug, Default, Clone)]
pub struct ManualClock(Arc<AtomicU64>);

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        Self(Arc::new(AtomicU64::new(start_ms)))
    }

    pub fn advance(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PresentedProblem,
    PresentedStateGoal,
    AwaitingChoice,
    Completed,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PresentedProblem => "presented_problem",
            Phase::PresentedStateGoal => "presented_state_goal",
            Phase::AwaitingChoice => "awaiting_choice",
            Phase::Completed => "completed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyOption {
    pub label: PolicyLabel,
    pub text: String,
}

/// What the participant sees in the current phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseContent {
    Problem { description: String },
    StateGoal { current_state: String, goal: String },
    Policies { policies: Vec<PolicyOption> },
    Done { choice: PolicyLabel },
}

/// Public view of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub problem_id: String,
    pub phase: Phase,
    pub created_at: u64,
    pub choice: Option<PolicyLabel>,
    pub content: PhaseContent,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    #[serde(default)]
    pub occupation: Option<String>,
    #[serde(default)]
    pub education: Option<String>,
}

#[derive(Debug)]
struct Session {
    id: String,
    problem_id: String,
    phase: Phase,
    /// Entry time of each phase reached so far.
    entered: Vec<u64>,
    display_order: [PolicyLabel; 4],
    choice: Option<PolicyLabel>,
    participant: Participant,
}

/// Hosts live sessions and appends completed choices to the record log.
///
/// Each session sits behind its own lock, so calls on one session are
/// serialized while different sessions proceed in parallel. Log appends go
/// through a single writer.
pub struct SessionService {
    problems: ProblemStore,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    log: Mutex<RecordLog>,
    clock: Arc<dyn Clock>,
}

/// Cohort id used for live sessions of a problem.
pub fn live_cohort_id(problem_id: &str) -> String {
    format!("live:{problem_id}")
}

fn new_token() -> String {
    let bits: u128 = rand::rng().random();
    let mut s = String::with_capacity(32);
    let _ = write!(s, "{bits:032x}");
    s
}

impl SessionService {
    pub fn new(problems: ProblemStore, log_path: impl AsRef<Path>, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let log = RecordLog::open(log_path).map_err(|e| ServiceError::Storage(e.to_string()))?;
        Ok(Self { problems, sessions: RwLock::new(HashMap::new()), log: Mutex::new(log), clock })
    }

    pub fn problems(&self) -> &ProblemStore {
        &self.problems
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Entry time for the next phase, forced past the previous entry so the
    /// recorded timestamps are strictly increasing even on a coarse clock.
    fn stamp(&self, after: Option<u64>) -> u64 {
        let now = self.clock.now_ms();
        after.map_or(now, |t| now.max(t + 1))
    }

    fn view(&self, s: &Session) -> SessionView {
        let problem = self.problems.get(&s.problem_id).expect("sessions reference stored problems");
        let content = match s.phase {
            Phase::PresentedProblem => PhaseContent::Problem { description: problem.description.clone() },
            Phase::PresentedStateGoal => PhaseContent::StateGoal {
                current_state: problem.current_label().to_string(),
                goal: problem.goal_text.clone().unwrap_or_else(|| {
                    problem.goal_states().iter().map(|&g| problem.state_label(g)).collect::<Vec<_>>().join(" or ")
                }),
            },
            Phase::AwaitingChoice => PhaseContent::Policies {
                policies: s
                    .display_order
                    .iter()
                    .map(|&label| PolicyOption { label, text: problem.policy(label).text.clone() })
                    .collect(),
            },
            Phase::Completed => PhaseContent::Done { choice: s.choice.expect("completed sessions have a choice") },
        };
        SessionView {
            session_id: s.id.clone(),
            problem_id: s.problem_id.clone(),
            phase: s.phase,
            created_at: s.entered[0],
            choice: s.choice,
            content,
        }
    }

    pub fn create_session(&self, problem_id: &str, participant: Participant) -> Result<SessionView, ServiceError> {
        self.problems.get(problem_id)?;
        let mut display_order = PolicyLabel::ALL;
        display_order.shuffle(&mut rand::rng());
        let session = Session {
            id: new_token(),
            problem_id: problem_id.to_string(),
            phase: Phase::PresentedProblem,
            entered: vec![self.stamp(None)],
            display_order,
            choice: None,
            participant,
        };
        let view = self.view(&session);
        self.sessions.write().expect("session map poisoned").insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(view)
    }

    pub fn get_session(&self, id: &str) -> Result<SessionView, ServiceError> {
        let session = self.session(id)?;
        let s = session.lock().expect("session poisoned");
        Ok(self.view(&s))
    }

    pub fn advance_phase(&self, id: &str) -> Result<SessionView, ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session poisoned");
        let next = match s.phase {
            Phase::PresentedProblem => Phase::PresentedStateGoal,
            Phase::PresentedStateGoal => Phase::AwaitingChoice,
            phase => return Err(ServiceError::PhaseOrderViolation { phase, action: "advance" }),
        };
        let t = self.stamp(s.entered.last().copied());
        s.entered.push(t);
        s.phase = next;
        Ok(self.view(&s))
    }

    /// Records the participant's choice. The label is canonical, independent
    /// of where the policy was displayed.
    pub fn submit_choice(&self, id: &str, label: &str) -> Result<ChoiceRecord, ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session poisoned");
        match s.phase {
            Phase::AwaitingChoice => {}
            Phase::Completed => return Err(ServiceError::DuplicateSubmission),
            phase => return Err(ServiceError::PhaseOrderViolation { phase, action: "submit a choice" }),
        }
        let chosen: PolicyLabel = label.parse().map_err(|_| ServiceError::InvalidLabel(label.to_string()))?;
        let awaiting_since = s.entered[2];
        let latency_ms = self.clock.now_ms().saturating_sub(awaiting_since);
        let record = ChoiceRecord {
            problem_id: s.problem_id.clone(),
            subject_id: s.id.clone(),
            cohort_id: live_cohort_id(&s.problem_id),
            phase_timestamps: [s.entered[0], s.entered[1], s.entered[2]],
            chosen,
            latency_ms,
            source: Source::Human,
            session_id: Some(s.id.clone()),
            occupation: s.participant.occupation.clone(),
            education: s.participant.education.clone(),
        };
        self.log
            .lock()
            .expect("log poisoned")
            .append(&record)
            .map_err(|e| ServiceError::Storage(e.to_string()))?;
        s.phase = Phase::Completed;
        s.choice = Some(chosen);
        Ok(record)
    }

    /// Summary of every logged record in `cohort_id`.
    pub fn cohort_summary(&self, cohort_id: &str) -> Result<CohortSummary, ServiceError> {
        let path = self.log.lock().expect("log poisoned").path().to_path_buf();
        let records: Vec<ChoiceRecord> = read_records(&path)
            .map_err(|e| ServiceError::Storage(e.to_string()))?
            .into_iter()
            .filter(|r| r.cohort_id == cohort_id)
            .collect();
        let first = records.first().ok_or_else(|| ServiceError::UnknownCohort(cohort_id.to_string()))?;
        let problem = self.problems.get(&first.problem_id)?;
        summarize(&records, problem).map_err(|e| ServiceError::Summary(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn service(dir: &tempfile::TempDir) -> (SessionService, ManualClock) {
        let clock = ManualClock::new(1_000);
        let svc = SessionService::new(ProblemStore::bundled(), dir.path().join("log.jsonl"), Arc::new(clock.clone())).unwrap();
        (svc, clock)
    }

    #[test]
    fn happy_path() {
        let dir = tempfile::tempdir().unwrap();
        let (svc, clock) = service(&dir);
        let s = svc.create_session("student", Participant::default()).unwrap();
        assert_eq!(s.phase, Phase::PresentedProblem);
        assert_eq!(s.session_id.len(), 32);
        assert!(matches!(s.content, PhaseContent::Problem { .. }));

        let s = svc.advance_phase(&s.session_id).unwrap();
        assert_eq!(
            s.content,
            PhaseContent::StateGoal { current_state: "Behind on credits".into(), goal: "Graduate on time".into() }
        );
        clock.advance(5);
        let s = svc.advance_phase(&s.session_id).unwrap();
        let PhaseContent::Policies { policies } = &s.content else { panic!("expected policies") };
        assert_eq!(policies.len(), 4);
        assert_eq!(svc.get_session(&s.session_id).unwrap().content, s.content);

        clock.advance(1_234);
        let r = svc.submit_choice(&s.session_id, "B").unwrap();
        assert_eq!(r.latency_ms, 1_234);
        assert_eq!(r.phase_timestamps, [1_000, 1_001, 1_005]);
        assert_eq!(r.cohort_id, "live:student");
        let s = svc.get_session(&s.session_id).unwrap();
        assert_eq!((s.phase, s.choice), (Phase::Completed, Some(PolicyLabel::B)));
        assert_eq!(read_records(dir.path().join("log.jsonl")).unwrap(), vec![r]);
    }

    #[test]
    fn guards() {
        let dir = tempfile::tempdir().unwrap();
        let (svc, _) = service(&dir);
        assert_eq!(svc.create_session("nope", Participant::default()).unwrap_err(), ServiceError::UnknownProblem("nope".into()));
        assert_eq!(svc.advance_phase("zzz").unwrap_err(), ServiceError::UnknownSession("zzz".into()));

        let id = svc.create_session("student", Participant::default()).unwrap().session_id;
        assert!(matches!(svc.submit_choice(&id, "A"), Err(ServiceError::PhaseOrderViolation { .. })));
        svc.advance_phase(&id).unwrap();
        svc.advance_phase(&id).unwrap();
        assert!(matches!(
            svc.advance_phase(&id),
            Err(ServiceError::PhaseOrderViolation { phase: Phase::AwaitingChoice, .. })
        ));
        assert_eq!(svc.submit_choice(&id, "E").unwrap_err(), ServiceError::InvalidLabel("E".into()));
        svc.submit_choice(&id, "A").unwrap();
        let before = std::fs::read(dir.path().join("log.jsonl")).unwrap();
        assert_eq!(svc.submit_choice(&id, "C").unwrap_err(), ServiceError::DuplicateSubmission);
        assert_eq!(std::fs::read(dir.path().join("log.jsonl")).unwrap(), before);
        assert!(matches!(svc.advance_phase(&id), Err(ServiceError::PhaseOrderViolation { phase: Phase::Completed, .. })));
    }

    #[test]
    fn distinct_tokens_and_cohort_summary() {
        let dir = tempfile::tempdir().unwrap();
        let (svc, _) = service(&dir);
        let a = svc.create_session("war_on_drugs", Participant::default()).unwrap();
        let b = svc.create_session("war_on_drugs", Participant::default()).unwrap();
        assert_ne!(a.session_id, b.session_id);
        assert_eq!(svc.cohort_summary("live:war_on_drugs").unwrap_err(), ServiceError::UnknownCohort("live:war_on_drugs".into()));
        for (s, label) in [(a, "B"), (b, "B")] {
            svc.advance_phase(&s.session_id).unwrap();
            svc.advance_phase(&s.session_id).unwrap();
            svc.submit_choice(&s.session_id, label).unwrap();
        }
        let summary = svc.cohort_summary("live:war_on_drugs").unwrap();
        assert_eq!(summary.n, 2);
        assert_eq!(summary.ccb_rate, 1.0);
    }

    #[test]
    fn participant_metadata_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let (svc, _) = service(&dir);
        let who = Participant { occupation: Some("carpenter".into()), education: None };
        let id = svc.create_session("student", who).unwrap().session_id;
        svc.advance_phase(&id).unwrap();
        svc.advance_phase(&id).unwrap();
        let r = svc.submit_choice(&id, "D").unwrap();
        assert_eq!(r.occupation.as_deref(), Some("carpenter"));
    }
}
