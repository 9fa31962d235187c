//! Isomorphism classes of weighted voting games and bounded enumeration.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::game::{Quota, WeightedVotingGame};

/// Default ceiling on the number of weight vectors an enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 200_000_000;

/// Minimal winning coalitions after relabeling players by non-increasing
/// weight, as sorted bitmasks. Equal for two games exactly when their
/// winning families agree up to a permutation of players.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalGameSignature {
    players: usize,
    minimal_winning: Vec<u64>,
}

impl CanonicalGameSignature {
    pub fn players(&self) -> usize {
        self.players
    }

    pub fn minimal_winning(&self) -> &[u64] {
        &self.minimal_winning
    }
}

/// Bitmasks of the minimal winning coalitions of `game`, in its own labels.
///
/// Visits all `2^m` coalitions.
pub fn minimal_winning_coalitions(game: &WeightedVotingGame) -> Vec<u64> {
    minimal_winning_of(game.weights(), |w| game.weight_wins(w))
}

fn minimal_winning_of(weights: &[u64], wins: impl Fn(u64) -> bool) -> Vec<u64> {
    let m = weights.len();
    let size = 1usize << m;
    let mut sums = vec![0u64; size];
    let mut win = vec![false; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + weights[low];
        win[mask] = wins(sums[mask]);
    }
    (1..size)
        .filter(|&mask| {
            win[mask] && {
                let mut bits = mask;
                let mut minimal = true;
                while bits != 0 {
                    let b = bits & bits.wrapping_neg();
                    if win[mask ^ b] {
                        minimal = false;
                        break;
                    }
                    bits ^= b;
                }
                minimal
            }
        })
        .map(|mask| mask as u64)
        .collect()
}

pub fn canonicalize(game: &WeightedVotingGame) -> CanonicalGameSignature {
    let sorted: Vec<u64> = game.weight_order().into_iter().map(|i| game.weights()[i]).collect();
    let total = game.total_weight();
    let quota = game.quota();
    let mut minimal_winning = minimal_winning_of(&sorted, |w| quota.is_exceeded(w, total));
    minimal_winning.sort_unstable();
    CanonicalGameSignature { players: game.players(), minimal_winning }
}

/// One isomorphism class found by enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameClass {
    pub signature: CanonicalGameSignature,
    /// Non-increasing weights realizing the class: smallest weight sum
    /// first, then lexicographically smallest.
    pub representative: Vec<u64>,
}

impl GameClass {
    pub fn game(&self, quota: Quota) -> WeightedVotingGame {
        WeightedVotingGame::new(self.representative.clone(), quota)
            .expect("representatives always carry a positive weight")
    }
}

/// Calls `visit` on every non-increasing vector of length `m` with entries in
/// `0..=max_entry`, sum in `1..=max_sum`. Order is lexicographic descending
/// by first entry, which is deterministic.
pub fn for_each_sorted_weights(m: usize, max_entry: u64, max_sum: u64, mut visit: impl FnMut(&[u64])) {
    fn rec(
        buf: &mut Vec<u64>,
        m: usize,
        cap: u64,
        remaining: u64,
        visit: &mut dyn FnMut(&[u64]),
    ) {
        if buf.len() == m {
            if buf.iter().any(|&w| w > 0) {
                visit(buf);
            }
            return;
        }
        for w in 0..=cap.min(remaining) {
            buf.push(w);
            rec(buf, m, w, remaining - w, visit);
            buf.pop();
        }
    }
    if m == 0 {
        return;
    }
    let mut buf = Vec::with_capacity(m);
    rec(&mut buf, m, max_entry, max_sum, &mut visit);
}

/// Number of non-increasing vectors visited by [`for_each_sorted_weights`]
/// (including the all-zero vector, which is skipped by the visitor).
pub fn count_sorted_weights(m: usize, max_entry: u64, max_sum: u64) -> u128 {
    // ways[c][s]: non-increasing sequences of the current length with
    // entries <= c and sum <= s, extended one position at a time
    let cap = max_entry.min(max_sum) as usize;
    let smax = max_sum as usize;
    let mut ways = vec![vec![1u128; smax + 1]; cap + 1];
    for _ in 0..m {
        let mut next = vec![vec![0u128; smax + 1]; cap + 1];
        for c in 0..=cap {
            for s in 0..=smax {
                let mut acc = 0u128;
                for w in 0..=c.min(s) {
                    acc = acc.saturating_add(ways[w][s - w]);
                }
                next[c][s] = acc;
            }
        }
        ways = next;
    }
    ways[cap][smax]
}

#[derive(Debug, Clone)]
pub struct GameClassCatalog {
    pub players: usize,
    pub quota: Quota,
    pub weight_bound: u64,
    /// Sorted by (weight sum, representative).
    pub classes: Vec<GameClass>,
}

impl GameClassCatalog {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

pub fn enumerate_game_classes(m: usize, quota: Quota, weight_bound: u64) -> Result<GameClassCatalog> {
    enumerate_game_classes_with_budget(m, quota, weight_bound, DEFAULT_ENUMERATION_BUDGET)
}

/// All distinct classes over weight vectors in `{0..=weight_bound}^m`.
///
/// Only non-increasing vectors are visited since signatures ignore labels;
/// the budget still applies to the full `(weight_bound + 1)^m` grid.
pub fn enumerate_game_classes_with_budget(
    m: usize,
    quota: Quota,
    weight_bound: u64,
    budget: u128,
) -> Result<GameClassCatalog> {
    if m == 0 || m > 24 {
        return Err(Error::InvalidArgument(format!("player count {m} must be in 1..=24")));
    }
    if weight_bound == 0 {
        return Err(Error::InvalidArgument("weight bound must be at least 1".into()));
    }
    let needed = (weight_bound as u128 + 1)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "weight grid", needed, budget });
    }

    let mut best: BTreeMap<Vec<u64>, Vec<u64>> = BTreeMap::new();
    for_each_sorted_weights(m, weight_bound, weight_bound.saturating_mul(m as u64), |w| {
        let total: u64 = w.iter().sum();
        let mut mwc = minimal_winning_of(w, |s| quota.is_exceeded(s, total));
        mwc.sort_unstable();
        match best.get_mut(&mwc) {
            Some(rep) => {
                if representative_key(w) < representative_key(rep) {
                    *rep = w.to_vec();
                }
            }
            None => {
                best.insert(mwc, w.to_vec());
            }
        }
    });

    let mut classes: Vec<GameClass> = best
        .into_iter()
        .map(|(minimal_winning, representative)| GameClass {
            signature: CanonicalGameSignature { players: m, minimal_winning },
            representative,
        })
        .collect();
    classes.sort_by(|a, b| representative_key(&a.representative).cmp(&representative_key(&b.representative)));
    Ok(GameClassCatalog { players: m, quota, weight_bound, classes })
}

fn representative_key(w: &[u64]) -> (u64, &[u64]) {
    (w.iter().sum(), w)
}
