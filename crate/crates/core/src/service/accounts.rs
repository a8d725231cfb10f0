//! File-backed account table, one tab-separated record per line:
//! `user_id  display_name  role  created_at  salt_hex  digest_hex`.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Mutex, PoisonError};

use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Learner,
    Admin,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Learner => "learner",
            Role::Admin => "admin",
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PasswordDigest {
    salt: [u8; 16],
    hash: [u8; 32],
}

impl PasswordDigest {
    pub fn new(password: &str) -> Self {
        let mut salt = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut salt);
        PasswordDigest { salt, hash: Self::hash(&salt, password) }
    }

    fn hash(salt: &[u8; 16], password: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(salt);
        h.update(password.as_bytes());
        h.finalize().into()
    }

    pub fn verify(&self, password: &str) -> bool {
        let candidate = Self::hash(&self.salt, password);
        candidate.iter().zip(self.hash.iter()).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
    }
}

impl std::fmt::Debug for PasswordDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PasswordDigest(..)")
    }
}

/// The digest is deliberately not serializable.
#[derive(Debug, Clone)]
pub struct UserAccount {
    pub user_id: String,
    pub display_name: String,
    pub role: Role,
    pub created_at: DateTime<Utc>,
    pub(crate) password_digest: PasswordDigest,
}

impl UserAccount {
    fn to_record(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.user_id,
            self.display_name,
            self.role.as_str(),
            self.created_at.to_rfc3339(),
            hex::encode(self.password_digest.salt),
            hex::encode(self.password_digest.hash)
        )
    }

    fn from_record(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        let [user_id, display_name, role, created_at, salt, hash] = f.as_slice() else {
            return None;
        };
        let role = match *role {
            "learner" => Role::Learner,
            "admin" => Role::Admin,
            _ => return None,
        };
        Some(UserAccount {
            user_id: (*user_id).to_owned(),
            display_name: (*display_name).to_owned(),
            role,
            created_at: DateTime::parse_from_rfc3339(created_at).ok()?.with_timezone(&Utc),
            password_digest: PasswordDigest {
                salt: hex::decode(salt).ok()?.try_into().ok()?,
                hash: hex::decode(hash).ok()?.try_into().ok()?,
            },
        })
    }
}

pub fn valid_user_id(name: &str) -> bool {
    (1..=64).contains(&name.len()) && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug)]
pub struct AccountTable {
    path: Option<PathBuf>,
    accounts: Mutex<Vec<UserAccount>>,
}

impl AccountTable {
    pub fn in_memory() -> Self {
        AccountTable { path: None, accounts: Mutex::new(Vec::new()) }
    }

    pub fn open(path: PathBuf) -> Result<Self, ServiceError> {
        let mut accounts = Vec::new();
        if path.exists() {
            for (i, line) in fs::read_to_string(&path)?.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
                let account = UserAccount::from_record(line)
                    .ok_or_else(|| ServiceError::Internal(format!("{}:{}: corrupt account record", path.display(), i + 1)))?;
                accounts.push(account);
            }
        }
        Ok(AccountTable { path: Some(path), accounts: Mutex::new(accounts) })
    }

    pub fn register(
        &self,
        user_id: &str,
        display_name: &str,
        password: &str,
        role: Role,
        now: DateTime<Utc>,
    ) -> Result<UserAccount, ServiceError> {
        if !valid_user_id(user_id) {
            return Err(ServiceError::Validation("name must be 1-64 characters from [A-Za-z0-9_-]".into()));
        }
        if display_name.is_empty() || display_name.contains(['\t', '\n', '\r']) {
            return Err(ServiceError::Validation("display name must be non-empty single-line text without tabs".into()));
        }
        if password.is_empty() {
            return Err(ServiceError::Validation("password must not be empty".into()));
        }
        let mut accounts = self.accounts.lock().unwrap_or_else(PoisonError::into_inner);
        if accounts.iter().any(|a| a.user_id == user_id) {
            return Err(ServiceError::Conflict(format!("user {user_id:?} already exists")));
        }
        let account = UserAccount {
            user_id: user_id.to_owned(),
            display_name: display_name.to_owned(),
            role,
            created_at: now,
            password_digest: PasswordDigest::new(password),
        };
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(file, "{}", account.to_record())?;
            file.flush()?;
        }
        accounts.push(account.clone());
        Ok(account)
    }

    /// Same error for an unknown name and a wrong password.
    pub fn verify(&self, user_id: &str, password: &str) -> Result<UserAccount, ServiceError> {
        let accounts = self.accounts.lock().unwrap_or_else(PoisonError::into_inner);
        accounts.iter().find(|a| a.user_id == user_id && a.password_digest.verify(password)).cloned().ok_or(ServiceError::BadCredentials)
    }

    pub fn get(&self, user_id: &str) -> Option<UserAccount> {
        let accounts = self.accounts.lock().unwrap_or_else(PoisonError::into_inner);
        accounts.iter().find(|a| a.user_id == user_id).cloned()
    }
}
