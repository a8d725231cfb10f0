use std::collections::{BTreeMap, VecDeque};
use std::sync::{Condvar, Mutex, MutexGuard, PoisonError};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};

use super::behavior::{AgentContext, Behavior, BehaviorKind, Flow};
use super::{AclMessage, AgentError, AgentId, Clock, Performative, SnifferTrace};

/// Local name of the synthetic sender used by [`Platform::gateway_send`].
pub const GATEWAY_NAME: &str = "gateway";
/// Local name of the platform's own management identity (sender of FAILUREs).
pub const AMS_NAME: &str = "ams";

pub(super) struct BehaviorSlot {
    behavior: Option<Box<dyn Behavior>>,
    kind: BehaviorKind,
    next_deadline: Option<Duration>,
    killed: bool,
}

pub(super) struct AgentSlot {
    pub(super) id: AgentId,
    pub(super) mailbox: VecDeque<AclMessage>,
    behaviors: Vec<BehaviorSlot>,
    alive: bool,
}

impl AgentSlot {
    fn has_live_cyclic(&self) -> bool {
        self.behaviors.iter().any(|b| !b.killed && b.kind == BehaviorKind::Cyclic)
    }
}

pub(super) struct Inner {
    pub(super) name: String,
    pub(super) clock: Clock,
    pub(super) agents: Vec<AgentSlot>,
    index: BTreeMap<String, usize>,
    next_seq: u64,
    trace: Vec<AclMessage>,
    gateway_conversations: u64,
    /// Round-robin cursor over agents for mailbox activations.
    cursor: usize,
}

impl Inner {
    fn lookup(&self, id: &AgentId) -> Option<usize> {
        self.index.get(&id.guid()).copied().filter(|&i| self.agents[i].alive)
    }

    fn ams(&self) -> AgentId {
        AgentId::new(AMS_NAME, self.name.clone())
    }

    fn enqueue(&mut self, idx: usize, mut msg: AclMessage) -> u64 {
        self.next_seq += 1;
        msg.sequence_no = self.next_seq;
        log::debug!("deliver {}", msg.trace_line());
        self.trace.push(msg.clone());
        self.agents[idx].mailbox.push_back(msg);
        self.next_seq
    }

    /// Delivers `msg`, or bounces a FAILURE to its sender.
    pub(super) fn route(&mut self, msg: AclMessage) -> Result<u64, AgentError> {
        if let Some(idx) = self.lookup(&msg.receiver) {
            return Ok(self.enqueue(idx, msg));
        }
        let receiver = msg.receiver.guid();
        let failure_seq = self.lookup(&msg.sender).map(|sender_idx| {
            let failure =
                AclMessage::new(Performative::Failure, self.ams(), msg.sender.clone(), format!("undeliverable receiver={receiver}"))
                    .with_conversation(msg.conversation_id.clone());
            self.enqueue(sender_idx, failure)
        });
        Err(AgentError::Undeliverable { receiver, failure_seq })
    }

    fn attach(&mut self, agent: usize, behavior: Box<dyn Behavior>) {
        let kind = behavior.kind();
        let next_deadline = match kind {
            BehaviorKind::Ticker(period) => Some(self.clock.now() + period),
            _ => None,
        };
        self.agents[agent].behaviors.push(BehaviorSlot { behavior: Some(behavior), kind, next_deadline, killed: false });
    }

    /// Runs one behavior of one agent and applies its outcome.
    fn activate(&mut self, agent: usize, slot: usize, message: Option<AclMessage>) {
        let Some(mut behavior) = self.agents[agent].behaviors[slot].behavior.take() else {
            return;
        };
        let mut ctx = AgentContext { inner: self, agent, message, added: Vec::new() };
        let flow = behavior.action(&mut ctx);
        let added = std::mem::take(&mut ctx.added);
        let b = &mut self.agents[agent].behaviors[slot];
        b.behavior = Some(behavior);
        if flow == Flow::Kill || b.kind == BehaviorKind::OneShot {
            b.killed = true;
            b.behavior = None;
        }
        for nb in added {
            self.attach(agent, nb);
        }
    }

    fn step(&mut self) -> bool {
        // pending one-shots first, in spawn order
        for a in 0..self.agents.len() {
            if !self.agents[a].alive {
                continue;
            }
            let pending = self.agents[a].behaviors.iter().position(|b| !b.killed && b.kind == BehaviorKind::OneShot);
            if let Some(slot) = pending {
                self.activate(a, slot, None);
                return true;
            }
        }
        let n = self.agents.len();
        for offset in 0..n {
            let a = (self.cursor + offset) % n;
            let agent = &self.agents[a];
            if !agent.alive || agent.mailbox.is_empty() || !agent.has_live_cyclic() {
                continue;
            }
            let slot = agent.behaviors.iter().position(|b| !b.killed && b.kind == BehaviorKind::Cyclic).expect("checked above");
            let msg = self.agents[a].mailbox.pop_front();
            self.cursor = (a + 1) % n;
            self.activate(a, slot, msg);
            return true;
        }
        false
    }

    fn run_until_idle(&mut self) -> usize {
        let mut n = 0;
        while self.step() {
            n += 1;
        }
        n
    }

    /// Earliest live ticker due at or before `limit`, by (deadline, agent, slot).
    fn next_due(&self, limit: Duration) -> Option<(Duration, usize, usize)> {
        let mut best: Option<(Duration, usize, usize)> = None;
        for (a, agent) in self.agents.iter().enumerate().filter(|(_, a)| a.alive) {
            for (s, b) in agent.behaviors.iter().enumerate() {
                if b.killed {
                    continue;
                }
                if let Some(d) = b.next_deadline.filter(|d| *d <= limit) {
                    if best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, a, s));
                    }
                }
            }
        }
        best
    }

    /// Fires every ticker due up to `limit` in deadline order, draining
    /// mailboxes after each firing. Returns the number of firings.
    fn fire_due(&mut self, limit: Duration) -> usize {
        let mut fired = 0;
        while let Some((deadline, a, s)) = self.next_due(limit) {
            self.clock.set(deadline);
            if let BehaviorKind::Ticker(period) = self.agents[a].behaviors[s].kind {
                self.agents[a].behaviors[s].next_deadline = Some(deadline + period);
            }
            self.activate(a, s, None);
            fired += 1;
            self.run_until_idle();
        }
        self.clock.set(limit);
        fired
    }
}

/// The agent platform. All methods take `&self`; internal state is guarded
/// by one mutex, so behaviors of one agent never run concurrently.
pub struct Platform {
    inner: Mutex<Inner>,
    arrived: Condvar,
}

impl Platform {
    pub fn new(name: impl Into<String>, clock: Clock) -> Self {
        Platform {
            inner: Mutex::new(Inner {
                name: name.into(),
                clock,
                agents: Vec::new(),
                index: BTreeMap::new(),
                next_seq: 0,
                trace: Vec::new(),
                gateway_conversations: 0,
                cursor: 0,
            }),
            arrived: Condvar::new(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(PoisonError::into_inner)
    }

    /// Runs `f` and wakes blocked receivers afterwards.
    fn mutate<T>(&self, f: impl FnOnce(&mut Inner) -> T) -> T {
        let out = f(&mut self.lock());
        self.arrived.notify_all();
        out
    }

    pub fn name(&self) -> String {
        self.lock().name.clone()
    }

    pub fn now(&self) -> Duration {
        self.lock().clock.now()
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.lock().clock.timestamp()
    }

    pub fn agent_id(&self, local_name: &str) -> AgentId {
        AgentId::new(local_name, self.name())
    }

    pub fn gateway_id(&self) -> AgentId {
        self.agent_id(GATEWAY_NAME)
    }

    /// Registers an agent. Ticker behaviors are scheduled from now.
    pub fn spawn(&self, local_name: &str, behaviors: Vec<Box<dyn Behavior>>) -> Result<AgentId, AgentError> {
        let valid =
            !local_name.is_empty() && !local_name.contains(['@', ' ', '\n']) && local_name != GATEWAY_NAME && local_name != AMS_NAME;
        if !valid {
            return Err(AgentError::InvalidName(local_name.to_owned()));
        }
        for b in &behaviors {
            if b.kind() == BehaviorKind::Ticker(Duration::ZERO) {
                return Err(AgentError::InvalidBehavior { name: b.name().to_owned(), reason: "ticker period must be positive".into() });
            }
        }
        self.mutate(|inner| {
            let id = AgentId::new(local_name, inner.name.clone());
            if inner.lookup(&id).is_some() {
                return Err(AgentError::DuplicateName(id.guid()));
            }
            inner.agents.push(AgentSlot { id: id.clone(), mailbox: VecDeque::new(), behaviors: Vec::new(), alive: true });
            let idx = inner.agents.len() - 1;
            inner.index.insert(id.guid(), idx);
            for b in behaviors {
                inner.attach(idx, b);
            }
            log::debug!("spawned {id}");
            Ok(id)
        })
    }

    /// Deregisters an agent; its queued messages are discarded.
    pub fn kill(&self, id: &AgentId) -> bool {
        self.mutate(|inner| match inner.lookup(id) {
            Some(idx) => {
                let agent = &mut inner.agents[idx];
                agent.alive = false;
                agent.mailbox.clear();
                agent.behaviors.clear();
                inner.index.remove(&id.guid());
                true
            }
            None => false,
        })
    }

    /// Live agents in spawn order.
    pub fn agents(&self) -> Vec<AgentId> {
        self.lock().agents.iter().filter(|a| a.alive).map(|a| a.id.clone()).collect()
    }

    pub fn is_registered(&self, id: &AgentId) -> bool {
        self.lock().lookup(id).is_some()
    }

    /// Routes a message. Unknown receivers bounce a FAILURE to the sender.
    pub fn send(&self, msg: AclMessage) -> Result<u64, AgentError> {
        self.mutate(|inner| inner.route(msg))
    }

    /// Injects an INFORM from the synthetic gateway identity.
    pub fn gateway_send(&self, receiver: &AgentId, content: impl Into<String>) -> Result<u64, AgentError> {
        let content = content.into();
        self.mutate(|inner| {
            let idx = inner.lookup(receiver).ok_or_else(|| AgentError::UnknownAgent(receiver.guid()))?;
            inner.gateway_conversations += 1;
            let msg = AclMessage::new(Performative::Inform, AgentId::new(GATEWAY_NAME, inner.name.clone()), receiver.clone(), content)
                .with_conversation(format!("gw-{}", inner.gateway_conversations));
            Ok(inner.enqueue(idx, msg))
        })
    }

    /// Removes the oldest queued message. A blocking call waits until one
    /// arrives; unknown agents yield `None`.
    pub fn receive(&self, id: &AgentId, blocking: bool) -> Option<AclMessage> {
        let mut inner = self.lock();
        loop {
            let idx = inner.lookup(id)?;
            if let Some(m) = inner.agents[idx].mailbox.pop_front() {
                return Some(m);
            }
            if !blocking {
                return None;
            }
            inner = self.arrived.wait(inner).unwrap_or_else(PoisonError::into_inner);
        }
    }

    /// Like a blocking [`Platform::receive`] but gives up after `timeout`.
    pub fn receive_timeout(&self, id: &AgentId, timeout: Duration) -> Option<AclMessage> {
        let deadline = Instant::now() + timeout;
        let mut inner = self.lock();
        loop {
            let idx = inner.lookup(id)?;
            if let Some(m) = inner.agents[idx].mailbox.pop_front() {
                return Some(m);
            }
            let left = deadline.checked_duration_since(Instant::now())?;
            inner = self.arrived.wait_timeout(inner, left).unwrap_or_else(PoisonError::into_inner).0;
        }
    }

    pub fn queue_len(&self, id: &AgentId) -> usize {
        let inner = self.lock();
        inner.lookup(id).map_or(0, |i| inner.agents[i].mailbox.len())
    }

    /// Runs a single activation: a pending one-shot, or one cyclic behavior
    /// on one queued message. Returns false when nothing was runnable.
    pub fn step(&self) -> bool {
        self.mutate(Inner::step)
    }

    /// Steps until no one-shot is pending and no agent with a live cyclic
    /// behavior has queued messages. Returns the number of activations.
    pub fn run_until_idle(&self) -> usize {
        self.mutate(Inner::run_until_idle)
    }

    /// Advances a simulated clock by `delta`, firing due tickers in
    /// (deadline, spawn order) order and draining mailboxes after each.
    pub fn advance_clock(&self, delta: Duration) -> Result<usize, AgentError> {
        self.mutate(|inner| {
            if !inner.clock.is_simulated() {
                return Err(AgentError::WallClock);
            }
            inner.run_until_idle();
            let limit = inner.clock.now() + delta;
            Ok(inner.fire_due(limit))
        })
    }

    /// Fires tickers due by the current clock reading and drains mailboxes.
    pub fn run_due(&self) -> usize {
        self.mutate(|inner| {
            inner.run_until_idle();
            let now = inner.clock.now();
            inner.fire_due(now)
        })
    }

    /// Snapshot of every message delivered so far.
    pub fn sniffer_trace(&self) -> SnifferTrace {
        SnifferTrace { messages: self.lock().trace.clone() }
    }
}

impl std::fmt::Debug for Platform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let inner = self.lock();
        f.debug_struct("Platform")
            .field("name", &inner.name)
            .field("agents", &inner.agents.iter().filter(|a| a.alive).map(|a| a.id.guid()).collect::<Vec<_>>())
            .field("delivered", &inner.trace.len())
            .finish()
    }
}
