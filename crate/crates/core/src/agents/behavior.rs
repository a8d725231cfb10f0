use std::time::Duration;

use chrono::{DateTime, Utc};

use super::platform::Inner;
use super::{AclMessage, AgentError, AgentId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BehaviorKind {
    /// Runs once, on the first scheduling pass after it is added.
    OneShot,
    /// Runs once per message taken from the agent's mailbox.
    Cyclic,
    /// Runs every `period` of platform time, starting one period after it is added.
    Ticker(Duration),
}

/// Returned by a behavior to stay alive or terminate itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Kill,
}

pub trait Behavior: Send {
    fn name(&self) -> &str;
    fn kind(&self) -> BehaviorKind;
    fn action(&mut self, ctx: &mut AgentContext<'_>) -> Flow;
}

/// What a running behavior can see and do.
pub struct AgentContext<'a> {
    pub(super) inner: &'a mut Inner,
    pub(super) agent: usize,
    pub(super) message: Option<AclMessage>,
    pub(super) added: Vec<Box<dyn Behavior>>,
}

impl AgentContext<'_> {
    pub fn aid(&self) -> AgentId {
        self.inner.agents[self.agent].id.clone()
    }

    /// Builds the id of another agent on this platform.
    pub fn agent_id(&self, local_name: &str) -> AgentId {
        AgentId::new(local_name, self.inner.name.clone())
    }

    pub fn now(&self) -> Duration {
        self.inner.clock.now()
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.inner.clock.timestamp()
    }

    /// The message that activated a cyclic behavior.
    pub fn message(&self) -> Option<&AclMessage> {
        self.message.as_ref()
    }

    pub fn take_message(&mut self) -> Option<AclMessage> {
        self.message.take()
    }

    /// Pops the next queued message without blocking.
    pub fn receive(&mut self) -> Option<AclMessage> {
        self.inner.agents[self.agent].mailbox.pop_front()
    }

    /// Sends from this agent. The sender field is overwritten.
    pub fn send(&mut self, mut msg: AclMessage) -> Result<u64, AgentError> {
        msg.sender = self.aid();
        self.inner.route(msg)
    }

    /// Schedules a new behavior on this agent once the current one returns.
    pub fn add_behavior(&mut self, behavior: Box<dyn Behavior>) {
        self.added.push(behavior);
    }
}

struct FnBehavior<F> {
    name: String,
    kind: BehaviorKind,
    f: F,
}

impl<F> Behavior for FnBehavior<F>
where
    F: FnMut(&mut AgentContext<'_>) -> Flow + Send,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> BehaviorKind {
        self.kind
    }

    fn action(&mut self, ctx: &mut AgentContext<'_>) -> Flow {
        (self.f)(ctx)
    }
}

pub fn cyclic<F>(name: impl Into<String>, f: F) -> Box<dyn Behavior>
where
    F: FnMut(&mut AgentContext<'_>) -> Flow + Send + 'static,
{
    Box::new(FnBehavior { name: name.into(), kind: BehaviorKind::Cyclic, f })
}

pub fn ticker<F>(name: impl Into<String>, period: Duration, f: F) -> Box<dyn Behavior>
where
    F: FnMut(&mut AgentContext<'_>) -> Flow + Send + 'static,
{
    Box::new(FnBehavior { name: name.into(), kind: BehaviorKind::Ticker(period), f })
}

pub fn one_shot<F>(name: impl Into<String>, mut f: F) -> Box<dyn Behavior>
where
    F: FnMut(&mut AgentContext<'_>) + Send + 'static,
{
    Box::new(FnBehavior {
        name: name.into(),
        kind: BehaviorKind::OneShot,
        f: move |ctx: &mut AgentContext<'_>| {
            f(ctx);
            Flow::Kill
        },
    })
}
