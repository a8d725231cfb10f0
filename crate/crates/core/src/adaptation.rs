//! Monitor and Update agents.
//!
//! A Monitor waits for the gateway to tell it which learner is in session,
//! then periodically reads that learner's change accumulators. When any
//! accumulator crosses the threshold it INFORMs the Update agent, which
//! settles the profile in the store and replies with a CONFIRM.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, PoisonError};
use std::time::Duration;

use thiserror::Error;

use crate::agents::{cyclic, ticker, AclMessage, AgentError, AgentId, Flow, Performative, Platform};
use crate::store::{self, KnowledgeStore, StoreError};
use crate::style::{Dimension, DimensionChange, LearnerStyleProfile, SettleRule, StyleError};

/// Local name of the platform-wide Update agent.
pub const UPDATE_AGENT: &str = "update";

/// Local name of the Monitor bound to one learner session.
pub fn monitor_name(user_id: &str) -> String {
    format!("monitor-{user_id}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptationConfig {
    pub ticker_period: Duration,
    pub rule: SettleRule,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        AdaptationConfig { ticker_period: Duration::from_secs(30), rule: SettleRule::default() }
    }
}

#[derive(Debug, Error)]
pub enum AdaptationError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("malformed notice: {0}")]
    MalformedNotice(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonitorPhase {
    AwaitingUserId,
    Active(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorState {
    pub phase: MonitorPhase,
    pub ticker_period: Duration,
    /// Conversations opened so far, used to number conversation ids.
    pub notices_sent: u64,
}

impl MonitorState {
    pub fn new(ticker_period: Duration) -> Self {
        MonitorState { phase: MonitorPhase::AwaitingUserId, ticker_period, notices_sent: 0 }
    }

    pub fn user_id(&self) -> Option<&str> {
        match &self.phase {
            MonitorPhase::Active(id) => Some(id),
            MonitorPhase::AwaitingUserId => None,
        }
    }
}

/// Accepts `user_id=<id>` where `<id>` is a non-empty name token.
pub fn parse_user_id(content: &str) -> Option<String> {
    let id = content.trim().strip_prefix("user_id=")?;
    store::Name::new("", id).ok().map(|_| id.to_owned())
}

/// Applies a gateway message to a waiting Monitor. Returns true when the
/// Monitor became active; malformed content leaves the state unchanged.
pub fn monitor_on_gateway_message(state: &mut MonitorState, content: &str) -> bool {
    if state.phase != MonitorPhase::AwaitingUserId {
        return false;
    }
    match parse_user_id(content) {
        Some(id) => {
            state.phase = MonitorPhase::Active(id);
            true
        }
        None => {
            log::warn!("monitor ignored malformed gateway content {content:?}");
            false
        }
    }
}

/// The dimensions whose accumulators crossed the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimChangeNotice {
    pub user_id: String,
    pub entries: Vec<(Dimension, i32)>,
}

impl DimChangeNotice {
    /// `None` when no accumulator crosses the threshold.
    pub fn detect(profile: &LearnerStyleProfile, rule: &SettleRule) -> Option<Self> {
        let entries: Vec<(Dimension, i32)> =
            profile.accumulators.iter().filter(|(_, acc)| rule.triggers(acc.0)).map(|(dim, acc)| (dim, acc.0)).collect();
        (!entries.is_empty()).then(|| DimChangeNotice { user_id: profile.learner_id.clone(), entries })
    }
}

/// `update-dims user=<id> AR=<int> SI=<int> VV=<int> SG=<int>`, absent dimensions omitted.
impl fmt::Display for DimChangeNotice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "update-dims user={}", self.user_id)?;
        for (dim, value) in &self.entries {
            write!(f, " {dim}={value}")?;
        }
        Ok(())
    }
}

impl FromStr for DimChangeNotice {
    type Err = AdaptationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| AdaptationError::MalformedNotice(format!("{why}: {s:?}"));
        let mut words = s.split(' ');
        if words.next() != Some("update-dims") {
            return Err(bad("missing update-dims header"));
        }
        let user_id = words
            .next()
            .and_then(|w| w.strip_prefix("user="))
            .filter(|id| store::Name::new("", *id).is_ok())
            .ok_or_else(|| bad("missing user"))?
            .to_owned();
        let mut entries: Vec<(Dimension, i32)> = Vec::new();
        for word in words {
            let (dim, value) = word.split_once('=').ok_or_else(|| bad("expected DIM=<int>"))?;
            let dim: Dimension = dim.parse().map_err(|_| bad("unknown dimension"))?;
            let value: i32 = value.parse().map_err(|_| bad("non-integer value"))?;
            if entries.last().is_some_and(|(prev, _)| *prev >= dim) {
                return Err(bad("dimensions must be unique and in AR, SI, VV, SG order"));
            }
            entries.push((dim, value));
        }
        if entries.is_empty() {
            return Err(bad("no dimensions"));
        }
        Ok(DimChangeNotice { user_id, entries })
    }
}

/// `updated user=<id> <DIM>:<old>-><new> ...`
pub fn confirm_content(user_id: &str, changes: &[DimensionChange]) -> String {
    let mut out = format!("updated user={user_id}");
    for c in changes {
        out.push_str(&format!(" {}:{}->{}", c.dimension, c.old_score, c.new_score));
    }
    out
}

/// Loads, settles and writes back the notice's learner in one store transaction.
pub fn update_on_inform(
    store: &KnowledgeStore,
    notice: &DimChangeNotice,
    rule: &SettleRule,
) -> Result<Vec<DimensionChange>, AdaptationError> {
    store.update(|graph| {
        let profile = store::read_profile(graph, &notice.user_id)?;
        let (next, changes) = rule.apply(&profile)?;
        if !changes.is_empty() {
            store::write_profile(graph, &next)?;
        }
        Ok(changes)
    })
}

/// Spawns a Monitor for one session. The returned state handle reflects the
/// Monitor's phase as it evolves.
pub fn spawn_monitor(
    platform: &Platform,
    store: Arc<KnowledgeStore>,
    config: AdaptationConfig,
    local_name: &str,
) -> Result<(AgentId, Arc<Mutex<MonitorState>>), AgentError> {
    let state = Arc::new(Mutex::new(MonitorState::new(config.ticker_period)));
    let waiting_state = state.clone();
    let await_user = cyclic("await-user-id", move |ctx| {
        let Some(msg) = ctx.take_message() else {
            return Flow::Continue;
        };
        let mut st = waiting_state.lock().unwrap_or_else(PoisonError::into_inner);
        if !monitor_on_gateway_message(&mut st, &msg.content) {
            return Flow::Continue;
        }
        let scan_state = waiting_state.clone();
        let scan_store = store.clone();
        ctx.add_behavior(ticker("scan-profile", st.ticker_period, move |ctx| {
            let mut st = scan_state.lock().unwrap_or_else(PoisonError::into_inner);
            let Some(user_id) = st.user_id().map(str::to_owned) else {
                return Flow::Continue;
            };
            let profile = match store::read_profile(&scan_store.snapshot(), &user_id) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("monitor for {user_id}: cannot read profile: {e}");
                    return Flow::Continue;
                }
            };
            if let Some(notice) = DimChangeNotice::detect(&profile, &config.rule) {
                st.notices_sent += 1;
                let to = ctx.agent_id(UPDATE_AGENT);
                let msg = AclMessage::new(Performative::Inform, ctx.aid(), to, notice.to_string())
                    .with_conversation(format!("dims-{user_id}-{}", st.notices_sent));
                if let Err(e) = ctx.send(msg) {
                    log::warn!("monitor for {user_id}: {e}");
                }
            }
            Flow::Continue
        }));
        // Replies from the Update agent and any later gateway messages.
        ctx.add_behavior(cyclic("drain-replies", |ctx| {
            if let Some(msg) = ctx.take_message() {
                log::debug!("monitor {} consumed {}", ctx.aid(), msg.trace_line());
            }
            Flow::Continue
        }));
        Flow::Kill
    });
    let id = platform.spawn(local_name, vec![await_user])?;
    Ok((id, state))
}

/// Spawns the Update agent, which answers every INFORM with CONFIRM or FAILURE.
pub fn spawn_update(platform: &Platform, store: Arc<KnowledgeStore>, config: AdaptationConfig) -> Result<AgentId, AgentError> {
    let behavior = cyclic("apply-changes", move |ctx| {
        let Some(msg) = ctx.take_message() else {
            return Flow::Continue;
        };
        if msg.performative != Performative::Inform {
            log::debug!("update agent ignored {}", msg.trace_line());
            return Flow::Continue;
        }
        let reply = match msg.content.parse::<DimChangeNotice>() {
            Ok(notice) => match update_on_inform(&store, &notice, &config.rule) {
                Ok(changes) => msg.reply(Performative::Confirm, confirm_content(&notice.user_id, &changes)),
                Err(e) => msg.reply(Performative::Failure, format!("failed user={} reason={e}", notice.user_id)),
            },
            Err(e) => msg.reply(Performative::Failure, e.to_string()),
        };
        if let Err(e) = ctx.send(reply) {
            log::warn!("update agent could not reply: {e}");
        }
        Flow::Continue
    });
    platform.spawn(UPDATE_AGENT, vec![behavior])
}
