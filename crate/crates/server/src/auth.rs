//! Bearer tokens.
//!
//! `tokens.json` in the data directory maps tokens to user ids, either as
//! `"token": "user"` or `"token": {"user_id": "...", "admin": true}`. The
//! token given by `LAVA_ADMIN_TOKEN` belongs to the user `admin`. Tokens are
//! kept only as SHA-256 hashes.

use std::collections::HashMap;

use lava_core::catalog::Actor;
use serde::Deserialize;
use sha2::{Digest, Sha256};

pub const ADMIN_USER: &str = "admin";

#[derive(Debug, Default, Clone)]
pub struct Tokens {
    by_hash: HashMap<[u8; 32], Actor>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    User(String),
    Actor(Actor),
}

fn hash(token: &str) -> [u8; 32] {
    Sha256::digest(token.as_bytes()).into()
}

impl Tokens {
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        let entries: HashMap<String, Entry> = serde_json::from_slice(bytes)?;
        let mut tokens = Self::default();
        for (token, entry) in entries {
            let actor = match entry {
                Entry::User(user_id) => Actor::user(user_id),
                Entry::Actor(actor) => actor,
            };
            tokens.insert(&token, actor);
        }
        Ok(tokens)
    }

    pub fn insert(&mut self, token: &str, actor: Actor) {
        self.by_hash.insert(hash(token), actor);
    }

    pub fn set_admin(&mut self, token: &str) {
        self.insert(token, Actor::admin(ADMIN_USER));
    }

    pub fn lookup(&self, token: &str) -> Option<&Actor> {
        if token.is_empty() {
            return None;
        }
        self.by_hash.get(&hash(token))
    }

    /// Resolves an `Authorization` header value.
    pub fn authenticate(&self, header: &str) -> Option<&Actor> {
        let (scheme, token) = header.trim().split_once(' ')?;
        if !scheme.eq_ignore_ascii_case("bearer") {
            return None;
        }
        self.lookup(token.trim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_file_forms() {
        let mut tokens = Tokens::from_json(br#"{"t-1": "teacher", "t-2": {"user_id": "ops", "admin": true}}"#).unwrap();
        tokens.set_admin("root-token");
        assert_eq!(tokens.authenticate("Bearer t-1"), Some(&Actor::user("teacher")));
        assert_eq!(tokens.authenticate("bearer t-2").map(|a| a.admin), Some(true));
        assert_eq!(tokens.authenticate("Bearer root-token"), Some(&Actor::admin(ADMIN_USER)));
        assert_eq!(tokens.authenticate("Basic t-1"), None);
        assert_eq!(tokens.authenticate("Bearer nope"), None);
        assert_eq!(tokens.authenticate("Bearer "), None);
    }
}
