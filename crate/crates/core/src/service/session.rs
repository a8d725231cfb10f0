use std::collections::HashMap;
use std::time::Duration;

use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::Serialize;

use super::accounts::Role;
use super::ServiceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    /// 256 random bits, hex-encoded.
    pub token: String,
    pub user_id: String,
    pub role: Role,
    pub expiry: DateTime<Utc>,
}

#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: HashMap<String, Session>,
}

impl SessionStore {
    pub fn create(&mut self, user_id: &str, role: Role, now: DateTime<Utc>, ttl: Duration) -> Session {
        let mut bytes = [0u8; 32];
        rand::thread_rng().fill_bytes(&mut bytes);
        let session = Session {
            token: hex::encode(bytes),
            user_id: user_id.to_owned(),
            role,
            expiry: now + chrono::Duration::from_std(ttl).unwrap_or(chrono::Duration::MAX),
        };
        self.sessions.insert(session.token.clone(), session.clone());
        session
    }

    /// Expired sessions are dropped and rejected.
    pub fn validate(&mut self, token: &str, now: DateTime<Utc>) -> Result<Session, ServiceError> {
        match self.sessions.get(token) {
            Some(s) if s.expiry > now => Ok(s.clone()),
            Some(_) => {
                self.sessions.remove(token);
                Err(ServiceError::Unauthenticated)
            }
            None => Err(ServiceError::Unauthenticated),
        }
    }

    pub fn remove(&mut self, token: &str) -> Option<Session> {
        self.sessions.remove(token)
    }

    pub fn has_user(&self, user_id: &str, now: DateTime<Utc>) -> bool {
        self.sessions.values().any(|s| s.user_id == user_id && s.expiry > now)
    }
}
