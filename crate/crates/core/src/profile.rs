//! Constant profiles for the randomized algorithms.

use serde::{Deserialize, Serialize};

use crate::ceil_log2;

/// `Paper` uses the constants the correctness proofs need; `Desk` shrinks the
/// repetition constant and degree threshold for desk-scale runs. Failure
/// budgets are identical in both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Paper,
    Desk,
}

impl Profile {
    /// Multiplier in the number of majority tests per round of approximate counting.
    pub fn repetition(self) -> u64 {
        match self {
            Profile::Paper => 200,
            Profile::Desk => 20,
        }
    }

    /// Multiplier of `ln n` in the superdegree bounds of the high-degree
    /// reductions: three times the hitting-set intersection constant.
    pub fn probe_constant(self) -> f64 {
        match self {
            Profile::Paper => 192.0,
            Profile::Desk => 48.0,
        }
    }

    /// Degree threshold separating low from high supervertices.
    pub fn degree_threshold(self, n: usize) -> f64 {
        let lg = ceil_log2(n as u64) as f64;
        let d = match self {
            Profile::Paper => 1024.0 * lg * lg,
            Profile::Desk => 8.0 * lg,
        };
        d.max(1.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(Profile::Paper),
            "desk" => Some(Profile::Desk),
            _ => None,
        }
    }
}
