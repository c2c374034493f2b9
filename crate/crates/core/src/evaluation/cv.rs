//! Leave-one-user-out rounds with a session-level train/validation split.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validation takes `ceil(n / VALIDATION_DIVISOR)` of each training user's sessions.
pub const VALIDATION_DIVISOR: usize = 8;
/// Default rounds per user.
pub const DEFAULT_REPEATS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvRound {
    pub index: usize,
    pub test_user: String,
    pub train_sessions: Vec<String>,
    pub validation_sessions: Vec<String>,
    pub test_sessions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub seed: u64,
    pub rounds: Vec<CvRound>,
}

/// Builds `n_rounds` rounds cycling through the users (sorted by id) as the
/// test user. `users` lists each user's session ids in order.
pub fn make_cv_plan(users: &[(String, Vec<String>)], n_rounds: usize, seed: u64) -> Result<CvPlan> {
    if users.len() < 2 {
        return Err(Error::Config("cross-validation needs at least two users".into()));
    }
    if let Some((u, _)) = users.iter().find(|(_, s)| s.is_empty()) {
        return Err(Error::Config(format!("user {u} has no sessions")));
    }
    let mut sorted: Vec<&(String, Vec<String>)> = users.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = Vec::with_capacity(n_rounds);
    for index in 0..n_rounds {
        let test = sorted[index % sorted.len()];
        let mut train_sessions = Vec::new();
        let mut validation_sessions = Vec::new();
        for (user, sessions) in &sorted {
            if user == &test.0 {
                continue;
            }
            let n_val = sessions.len().div_ceil(VALIDATION_DIVISOR);
            let mut is_val = vec![false; sessions.len()];
            for i in sample(&mut rng, sessions.len(), n_val) {
                is_val[i] = true;
            }
            for (s, v) in sessions.iter().zip(is_val) {
                if v {
                    validation_sessions.push(s.clone());
                } else {
                    train_sessions.push(s.clone());
                }
            }
        }
        rounds.push(CvRound {
            index,
            test_user: test.0.clone(),
            train_sessions,
            validation_sessions,
            test_sessions: test.1.clone(),
        });
    }
    Ok(CvPlan { seed, rounds })
}

/// Default round count: every user is the test user [`DEFAULT_REPEATS`] times.
pub fn default_rounds(n_users: usize) -> usize {
    n_users * DEFAULT_REPEATS
}
