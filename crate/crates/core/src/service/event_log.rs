//! Append-only behavior-event log.
//!
//! Line format: `<RFC3339 timestamp> <user_id> <event_kind> <DIM> <+2|-2> <accumulator_after>`.

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Mutex, MutexGuard, PoisonError};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use super::ServiceError;
use crate::style::{BehaviorEventKind, Dimension};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventLogEntry {
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
    pub event_kind: BehaviorEventKind,
    pub dimension: Dimension,
    pub delta: i32,
    pub accumulator_after: i32,
}

impl fmt::Display for EventLogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {:+} {}",
            self.timestamp.to_rfc3339_opts(SecondsFormat::Millis, true),
            self.user_id,
            self.event_kind,
            self.dimension,
            self.delta,
            self.accumulator_after
        )
    }
}

impl FromStr for EventLogEntry {
    type Err = ServiceError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let bad = || ServiceError::Internal(format!("malformed event log line {line:?}"));
        let f: Vec<&str> = line.split(' ').collect();
        let [ts, user, kind, dim, delta, acc] = f.as_slice() else {
            return Err(bad());
        };
        let entry = EventLogEntry {
            timestamp: DateTime::parse_from_rfc3339(ts).map_err(|_| bad())?.with_timezone(&Utc),
            user_id: (*user).to_owned(),
            event_kind: kind.parse().map_err(|_| bad())?,
            dimension: dim.parse().map_err(|_| bad())?,
            delta: delta.parse().map_err(|_| bad())?,
            accumulator_after: acc.parse().map_err(|_| bad())?,
        };
        if !delta.starts_with(['+', '-']) || entry.event_kind.dimension() != entry.dimension || entry.event_kind.delta() != entry.delta {
            return Err(bad());
        }
        Ok(entry)
    }
}

/// Dedicated appender. Holding the guard returned by [`EventLog::lock`]
/// serializes a store mutation with its log line.
#[derive(Debug)]
pub struct EventLog {
    path: Option<PathBuf>,
    lines: Mutex<Vec<String>>,
}

pub struct EventLogGuard<'a> {
    path: Option<&'a PathBuf>,
    lines: MutexGuard<'a, Vec<String>>,
}

impl EventLogGuard<'_> {
    pub fn append(&mut self, entry: &EventLogEntry) -> Result<(), ServiceError> {
        let line = entry.to_string();
        if let Some(path) = self.path {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(file, "{line}")?;
            file.flush()?;
        }
        self.lines.push(line);
        Ok(())
    }
}

impl EventLog {
    pub fn in_memory() -> Self {
        EventLog { path: None, lines: Mutex::new(Vec::new()) }
    }

    pub fn open(path: PathBuf) -> Result<Self, ServiceError> {
        let lines = if path.exists() { fs::read_to_string(&path)?.lines().map(str::to_owned).collect() } else { Vec::new() };
        Ok(EventLog { path: Some(path), lines: Mutex::new(lines) })
    }

    pub fn lock(&self) -> EventLogGuard<'_> {
        EventLogGuard { path: self.path.as_ref(), lines: self.lines.lock().unwrap_or_else(PoisonError::into_inner) }
    }

    pub fn lines(&self) -> Vec<String> {
        self.lines.lock().unwrap_or_else(PoisonError::into_inner).clone()
    }

    pub fn entries(&self) -> Result<Vec<EventLogEntry>, ServiceError> {
        self.lines().iter().map(|l| l.parse()).collect()
    }
}
