//! The learner-facing service: accounts and sessions, questionnaire
//! intake, personalized pages, behavior-event ingestion, agent-platform
//! administration and the evaluation survey.
//!
//! [`Service`] holds the logic; [`http::router`] exposes it as JSON over HTTP.

mod accounts;
mod event_log;
pub mod http;
mod session;
mod survey;

use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, PoisonError};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::Serialize;
use thiserror::Error;

pub use accounts::{AccountTable, Role, UserAccount};
pub use event_log::{EventLog, EventLogEntry};
pub use session::{Session, SessionStore};
pub use survey::{summarize, DimensionAverage, EvaluationDimension, SurveyResponse, SurveyStore, SurveySummary, SURVEY_QUESTIONS};

use crate::adaptation::{self, monitor_name, AdaptationConfig, AdaptationError};
use crate::agents::{AgentError, AgentId, Clock, Platform};
use crate::store::{self, KnowledgeStore, ModuleEntry, ResourceEntry, ResourceKind, StoreError, TripleGraph, ONTO_NS};
use crate::style::{
    apply_event, compose_page, score_ils, BehaviorEventKind, Dimension, DimensionScore, IlsAnswerSheet, LearnerStyleProfile, Medium,
    PerDimension, PresentationPlan, StyleError,
};

/// Course ontology shipped with the service.
pub const COURSE_FIXTURE: &str = include_str!("../../fixtures/course.owl.ttl");

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("authentication required")]
    Unauthenticated,
    #[error("invalid user name or password")]
    BadCredentials,
    #[error("admin privileges required")]
    Forbidden,
    #[error("{0}")]
    Conflict(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("no learning-style profile yet: submit the questionnaire at POST /ils first")]
    ProfileRequired,
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound { kind, id } => ServiceError::NotFound(format!("{kind} {id}")),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl From<StyleError> for ServiceError {
    fn from(e: StyleError) -> Self {
        ServiceError::Validation(e.to_string())
    }
}

impl From<AgentError> for ServiceError {
    fn from(e: AgentError) -> Self {
        ServiceError::Internal(e.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Directory for `user.owl.ttl`, `course.owl.ttl`, `accounts.tsv`,
    /// `events.log` and `survey.jsonl`. `None` keeps everything in memory.
    pub data_dir: Option<PathBuf>,
    pub adaptation: AdaptationConfig,
    pub session_ttl: Duration,
    /// Accounts registered under these names get the admin role.
    pub admins: Vec<String>,
    pub simulated_clock: bool,
    pub platform_name: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            adaptation: AdaptationConfig::default(),
            session_ttl: Duration::from_secs(8 * 3600),
            admins: Vec::new(),
            simulated_clock: false,
            platform_name: "adaptalearn".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileView {
    pub user_id: String,
    pub scores: PerDimension<DimensionScore>,
    pub accumulators: PerDimension<i32>,
    pub plan: PresentationPlan,
}

#[derive(Debug, Clone, Serialize)]
pub struct PageView {
    pub module: String,
    pub plan: PresentationPlan,
    /// Resources to render, in order.
    pub resources: Vec<ResourceEntry>,
    /// Resources in the non-primary medium, reachable through the medium toggle.
    pub alternates: Vec<ResourceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EventOutcome {
    pub dimension: Dimension,
    pub delta: i32,
    pub accumulator_after: i32,
}

/// Empty user ontology: prefixes plus the `Learner` class.
pub fn empty_user_graph() -> TripleGraph {
    let mut g = TripleGraph::with_standard_prefixes();
    let class = |local: &str| g.name_in(ONTO_NS, local);
    let learner = class("Learner").expect("vocabulary namespace declared");
    let rdf_type = g.name_in(store::RDF_NS, "type").expect("rdf declared");
    let rdfs_class = g.name_in(store::RDFS_NS, "Class").expect("rdfs declared");
    g.insert(store::Triple::new(learner, rdf_type, rdfs_class)).expect("prefixes declared");
    g
}

/// Splits module resources according to the plan: challenges and quizzes
/// only when shown, the video/text pair collapsed to the primary medium.
pub fn filter_resources(plan: &PresentationPlan, resources: Vec<ResourceEntry>) -> (Vec<ResourceEntry>, Vec<ResourceEntry>) {
    let alternate = match plan.primary_medium {
        Medium::Video => ResourceKind::Text,
        Medium::Text => ResourceKind::Video,
    };
    let (alternates, rest): (Vec<_>, Vec<_>) = resources.into_iter().partition(|r| r.kind == alternate);
    let shown = rest
        .into_iter()
        .filter(|r| match r.kind {
            ResourceKind::Challenge => plan.show_challenges,
            ResourceKind::Quiz => plan.show_quizzes,
            ResourceKind::Video | ResourceKind::Text => true,
        })
        .collect();
    (shown, alternates)
}

pub struct Service {
    config: ServiceConfig,
    platform: Arc<Platform>,
    users: Arc<KnowledgeStore>,
    courses: Arc<KnowledgeStore>,
    accounts: AccountTable,
    sessions: Mutex<SessionStore>,
    events: EventLog,
    surveys: SurveyStore,
}

impl Service {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        let course_seed = || store::parse(COURSE_FIXTURE).expect("bundled course ontology parses");
        let (users, courses, accounts, events, surveys) = match &config.data_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                (
                    KnowledgeStore::open(dir.join("user.owl.ttl"), empty_user_graph)?,
                    KnowledgeStore::open(dir.join("course.owl.ttl"), course_seed)?,
                    AccountTable::open(dir.join("accounts.tsv"))?,
                    EventLog::open(dir.join("events.log"))?,
                    SurveyStore::open(dir.join("survey.jsonl"))?,
                )
            }
            None => (
                KnowledgeStore::in_memory(empty_user_graph()),
                KnowledgeStore::in_memory(course_seed()),
                AccountTable::in_memory(),
                EventLog::in_memory(),
                SurveyStore::in_memory(),
            ),
        };
        let clock = if config.simulated_clock { Clock::simulated() } else { Clock::wall() };
        let platform = Arc::new(Platform::new(config.platform_name.clone(), clock));
        let users = Arc::new(users);
        adaptation::spawn_update(&platform, users.clone(), config.adaptation)?;
        Ok(Service {
            config,
            platform,
            users,
            courses: Arc::new(courses),
            accounts,
            sessions: Mutex::new(SessionStore::default()),
            events,
            surveys,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn platform(&self) -> &Arc<Platform> {
        &self.platform
    }

    pub fn user_store(&self) -> &Arc<KnowledgeStore> {
        &self.users
    }

    pub fn course_store(&self) -> &Arc<KnowledgeStore> {
        &self.courses
    }

    pub fn event_log(&self) -> &EventLog {
        &self.events
    }

    fn now(&self) -> DateTime<Utc> {
        self.platform.timestamp()
    }

    fn sessions(&self) -> MutexGuard<'_, SessionStore> {
        self.sessions.lock().unwrap_or_else(PoisonError::into_inner)
    }

    pub fn register(&self, name: &str, password: &str, display_name: Option<&str>) -> Result<String, ServiceError> {
        let role = if self.config.admins.iter().any(|a| a == name) { Role::Admin } else { Role::Learner };
        let account = self.accounts.register(name, display_name.unwrap_or(name), password, role, self.now())?;
        log::info!("registered {} ({:?})", account.user_id, account.role);
        Ok(account.user_id)
    }

    /// Opens a session, spawns the learner's Monitor if needed and tells it
    /// the user id through the gateway.
    pub fn login(&self, name: &str, password: &str) -> Result<Session, ServiceError> {
        let account = self.accounts.verify(name, password)?;
        let session = self.sessions().create(&account.user_id, account.role, self.now(), self.config.session_ttl);
        let monitor = self.platform.agent_id(&monitor_name(&account.user_id));
        if !self.platform.is_registered(&monitor) {
            let (id, _) = adaptation::spawn_monitor(&self.platform, self.users.clone(), self.config.adaptation, &monitor.local_name)?;
            self.platform.gateway_send(&id, format!("user_id={}", account.user_id))?;
            self.platform.run_until_idle();
        }
        Ok(session)
    }

    /// Ends a session; the learner's Monitor stops with their last session.
    pub fn logout(&self, token: &str) -> Result<(), ServiceError> {
        let mut sessions = self.sessions();
        let session = sessions.remove(token).ok_or(ServiceError::Unauthenticated)?;
        if !sessions.has_user(&session.user_id, self.now()) {
            self.platform.kill(&self.platform.agent_id(&monitor_name(&session.user_id)));
        }
        Ok(())
    }

    pub fn authenticate(&self, token: &str) -> Result<Session, ServiceError> {
        let now = self.now();
        self.sessions().validate(token, now)
    }

    fn profile_of(&self, user_id: &str) -> Result<LearnerStyleProfile, ServiceError> {
        match store::read_profile(&self.users.snapshot(), user_id) {
            Ok(p) => Ok(p),
            Err(StoreError::NotFound { .. }) => Err(ServiceError::ProfileRequired),
            Err(e) => Err(e.into()),
        }
    }

    /// Scores the questionnaire and stores the scores with zeroed accumulators.
    pub fn submit_ils(&self, session: &Session, sheet: &IlsAnswerSheet) -> Result<PerDimension<DimensionScore>, ServiceError> {
        let scores = score_ils(sheet);
        let display_name = self.accounts.get(&session.user_id).map_or_else(|| session.user_id.clone(), |a| a.display_name);
        let profile = LearnerStyleProfile::new(session.user_id.clone(), scores);
        self.users.update(|g| {
            store::ensure_learner(g, &session.user_id, &display_name)?;
            store::write_profile(g, &profile)
        })?;
        Ok(scores)
    }

    /// Replaces a learner's stored profile, creating the learner if needed.
    pub fn put_profile(&self, profile: &LearnerStyleProfile) -> Result<(), ServiceError> {
        self.users.update(|g| {
            store::ensure_learner(g, &profile.learner_id, &profile.learner_id)?;
            store::write_profile(g, profile)
        })?;
        Ok(())
    }

    pub fn profile(&self, session: &Session) -> Result<ProfileView, ServiceError> {
        let p = self.profile_of(&session.user_id)?;
        Ok(ProfileView { plan: compose_page(&p), user_id: p.learner_id, scores: p.scores, accumulators: p.accumulators.map(|a| a.0) })
    }

    pub fn modules(&self) -> Result<Vec<ModuleEntry>, ServiceError> {
        Ok(store::list_modules(&self.courses.snapshot())?)
    }

    pub fn get_page(&self, session: &Session, module_id: &str) -> Result<PageView, ServiceError> {
        let profile = self.profile_of(&session.user_id)?;
        let plan = compose_page(&profile);
        let courses = self.courses.snapshot();
        let module = courses.name_in(ONTO_NS, module_id).map_err(|_| ServiceError::NotFound(format!("module {module_id}")))?;
        let resources = store::list_module_resources(&courses, &module)?;
        let (resources, alternates) = filter_resources(&plan, resources);
        Ok(PageView { module: module.local, plan, resources, alternates })
    }

    /// Applies a click to the stored accumulators and logs it.
    pub fn post_event(&self, session: &Session, kind: BehaviorEventKind) -> Result<EventOutcome, ServiceError> {
        let mut log = self.events.lock();
        let profile = self.users.update(|g| -> Result<LearnerStyleProfile, ServiceError> {
            let current = match store::read_profile(g, &session.user_id) {
                Err(StoreError::NotFound { .. }) => return Err(ServiceError::ProfileRequired),
                other => other?,
            };
            let next = apply_event(&current, kind);
            store::write_profile(g, &next)?;
            Ok(next)
        })?;
        let dimension = kind.dimension();
        let outcome = EventOutcome { dimension, delta: kind.delta(), accumulator_after: profile.accumulators[dimension].0 };
        log.append(&EventLogEntry {
            timestamp: self.now(),
            user_id: session.user_id.clone(),
            event_kind: kind,
            dimension,
            delta: outcome.delta,
            accumulator_after: outcome.accumulator_after,
        })?;
        Ok(outcome)
    }

    pub fn survey_submit(&self, response: SurveyResponse) -> Result<(), ServiceError> {
        self.surveys.submit(response)
    }

    pub fn survey_summary(&self) -> SurveySummary {
        self.surveys.summary()
    }

    fn require_admin(session: &Session) -> Result<(), ServiceError> {
        match session.role {
            Role::Admin => Ok(()),
            Role::Learner => Err(ServiceError::Forbidden),
        }
    }

    pub fn admin_agents(&self, session: &Session) -> Result<Vec<AgentId>, ServiceError> {
        Self::require_admin(session)?;
        Ok(self.platform.agents())
    }

    pub fn admin_trace(&self, session: &Session) -> Result<String, ServiceError> {
        Self::require_admin(session)?;
        Ok(self.platform.sniffer_trace().export())
    }

    /// Advances a simulated clock, letting Monitors tick and the Update
    /// agent answer. Returns the number of ticker firings.
    pub fn advance(&self, delta: Duration) -> Result<usize, ServiceError> {
        Ok(self.platform.advance_clock(delta)?)
    }
}

impl From<AdaptationError> for ServiceError {
    fn from(e: AdaptationError) -> Self {
        ServiceError::Internal(e.to_string())
    }
}
