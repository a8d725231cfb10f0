use std::time::{Duration, Instant};

use chrono::{DateTime, TimeZone, Utc};

/// Platform time source. Time is measured from platform start.
#[derive(Debug, Clone)]
pub enum Clock {
    /// Advanced explicitly; never moves backward.
    Simulated {
        now: Duration,
        epoch: DateTime<Utc>,
    },
    Wall {
        started: Instant,
        epoch: DateTime<Utc>,
    },
}

impl Clock {
    /// Simulated clock starting at 2024-01-01T00:00:00Z.
    pub fn simulated() -> Self {
        Clock::Simulated { now: Duration::ZERO, epoch: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).single().expect("valid epoch") }
    }

    pub fn wall() -> Self {
        Clock::Wall { started: Instant::now(), epoch: Utc::now() }
    }

    pub fn is_simulated(&self) -> bool {
        matches!(self, Clock::Simulated { .. })
    }

    pub fn now(&self) -> Duration {
        match self {
            Clock::Simulated { now, .. } => *now,
            Clock::Wall { started, .. } => started.elapsed(),
        }
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        let (epoch, elapsed) = match self {
            Clock::Simulated { now, epoch } => (*epoch, *now),
            Clock::Wall { started, epoch } => (*epoch, started.elapsed()),
        };
        epoch + chrono::Duration::from_std(elapsed).unwrap_or(chrono::Duration::MAX)
    }

    /// Moves simulated time forward to `to`; earlier instants are ignored.
    pub(crate) fn set(&mut self, to: Duration) {
        if let Clock::Simulated { now, .. } = self {
            if to > *now {
                *now = to;
            }
        }
    }
}
