//! In-process agent platform with FIPA-style ACL messaging.
//!
//! Agents are registered under a GUID (`local@platform`) and own a FIFO
//! mailbox plus a list of behaviors. A router assigns a platform-wide
//! sequence number to every delivered message and copies it into the
//! sniffer trace. Under a [`Clock::simulated`] clock every scenario is
//! fully deterministic.

mod behavior;
mod clock;
mod platform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use behavior::{cyclic, one_shot, ticker, AgentContext, Behavior, BehaviorKind, Flow};
pub use clock::Clock;
pub use platform::Platform;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    #[error("agent name {0:?} is already registered")]
    DuplicateName(String),
    #[error("invalid agent name {0:?}")]
    InvalidName(String),
    #[error("no agent {0} is registered")]
    UnknownAgent(String),
    #[error("message to {receiver} could not be delivered")]
    Undeliverable {
        receiver: String,
        /// Sequence number of the FAILURE returned to the sender, if the
        /// sender itself is a registered agent.
        failure_seq: Option<u64>,
    },
    #[error("invalid behavior {name:?}: {reason}")]
    InvalidBehavior { name: String, reason: String },
    #[error("the wall clock cannot be advanced manually")]
    WallClock,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId {
    pub local_name: String,
    pub platform: String,
}

impl AgentId {
    pub fn new(local_name: impl Into<String>, platform: impl Into<String>) -> Self {
        AgentId { local_name: local_name.into(), platform: platform.into() }
    }

    pub fn guid(&self) -> String {
        format!("{}@{}", self.local_name, self.platform)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.local_name, self.platform)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Performative {
    Inform,
    Request,
    Confirm,
    Failure,
}

impl Performative {
    pub const fn as_str(self) -> &'static str {
        match self {
            Performative::Inform => "INFORM",
            Performative::Request => "REQUEST",
            Performative::Confirm => "CONFIRM",
            Performative::Failure => "FAILURE",
        }
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Performative {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "INFORM" => Ok(Performative::Inform),
            "REQUEST" => Ok(Performative::Request),
            "CONFIRM" => Ok(Performative::Confirm),
            "FAILURE" => Ok(Performative::Failure),
            other => Err(format!("unknown performative {other:?}")),
        }
    }
}

/// An agent-communication-language envelope.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AclMessage {
    pub performative: Performative,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub content: String,
    pub conversation_id: String,
    /// Assigned by the router on delivery; zero before that.
    pub sequence_no: u64,
}

impl AclMessage {
    pub fn new(performative: Performative, sender: AgentId, receiver: AgentId, content: impl Into<String>) -> Self {
        AclMessage { performative, sender, receiver, content: content.into(), conversation_id: String::new(), sequence_no: 0 }
    }

    pub fn with_conversation(mut self, conversation_id: impl Into<String>) -> Self {
        self.conversation_id = conversation_id.into();
        self
    }

    /// A reply to `self` on the same conversation.
    pub fn reply(&self, performative: Performative, content: impl Into<String>) -> AclMessage {
        AclMessage::new(performative, self.receiver.clone(), self.sender.clone(), content).with_conversation(self.conversation_id.clone())
    }

    /// `<seq> <performative> <sender-guid> -> <receiver-guid> [<conversation_id>] <content>`
    pub fn trace_line(&self) -> String {
        format!(
            "{} {} {} -> {} [{}] {}",
            self.sequence_no,
            self.performative,
            self.sender,
            self.receiver,
            self.conversation_id,
            self.content.replace('\\', "\\\\").replace('\n', "\\n")
        )
    }
}

/// Delivered messages in delivery (= sequence number) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SnifferTrace {
    pub messages: Vec<AclMessage>,
}

impl SnifferTrace {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn performatives(&self) -> Vec<Performative> {
        self.messages.iter().map(|m| m.performative).collect()
    }

    /// One line per message, newline-terminated.
    pub fn export(&self) -> String {
        self.messages.iter().map(|m| m.trace_line() + "\n").collect()
    }
}
