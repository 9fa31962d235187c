//! Weighted voting games `[q; w_1, ..., w_m]` with an exact relative quota.
//!
//! A coalition wins iff its weight is strictly above `q * sum(w)`. The
//! comparison is done in integer arithmetic, so a coalition sitting exactly
//! on the quota always loses.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};

/// Largest supported number of players; coalitions are 64-bit masks.
pub const MAX_PLAYERS: usize = 64;

/// Relative quota `q` with `1/2 <= q < 1`, kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quota(Ratio<u64>);

impl Quota {
    pub const SIMPLE_MAJORITY: Quota = Quota(Ratio::new_raw(1, 2));

    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidQuota(format!("{numer}/{denom}")));
        }
        let r = Ratio::new(numer, denom);
        // 1/2 <= n/d < 1  <=>  2n >= d && n < d
        let (n, d) = (*r.numer() as u128, *r.denom() as u128);
        if 2 * n < d || n >= d {
            return Err(Error::InvalidQuota(format!("{numer}/{denom}")));
        }
        Ok(Quota(r))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `weight > q * total`, exactly.
    #[inline]
    pub fn is_exceeded(&self, weight: u64, total: u64) -> bool {
        weight as u128 * self.denom() as u128 > self.numer() as u128 * total as u128
    }

    /// Largest integer weight that does not exceed `q * total`.
    pub fn floor_of(&self, total: u64) -> u64 {
        (self.numer() as u128 * total as u128 / self.denom() as u128) as u64
    }
}

impl fmt::Display for Quota {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// Accepts `n/d` or a finite decimal such as `0.74` (read as `74/100`).
impl FromStr for Quota {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidQuota(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Quota::new(n, d).map_err(|_| bad());
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        if frac_part.len() > 18
            || !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || (int_part.is_empty() && frac_part.is_empty())
        {
            return Err(bad());
        }
        let denom = 10u64.pow(frac_part.len() as u32);
        let int: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
        let numer = int
            .checked_mul(denom)
            .and_then(|x| x.checked_add(frac))
            .ok_or_else(bad)?;
        Quota::new(numer, denom).map_err(|_| bad())
    }
}

/// A set of players, one bit per player (bit `i` is player `i`, 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(pub u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn grand(players: usize) -> Self {
        if players >= 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << players) - 1)
        }
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        Coalition(members.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    #[inline]
    pub fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    #[inline]
    pub fn with(self, player: usize) -> Self {
        Coalition(self.0 | (1u64 << player))
    }

    #[inline]
    pub fn without(self, player: usize) -> Self {
        Coalition(self.0 & !(1u64 << player))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Highest player index in the coalition, if any.
    fn max_member(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

/// `[q; w_1, ..., w_m]`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedVotingGame {
    weights: Vec<u64>,
    quota: Quota,
    total: u64,
}

impl WeightedVotingGame {
    pub fn new(weights: Vec<u64>, quota: Quota) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidGame("no players".into()));
        }
        if weights.len() > MAX_PLAYERS {
            return Err(Error::InvalidGame(format!(
                "{} players, at most {MAX_PLAYERS} supported",
                weights.len()
            )));
        }
        let total = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or_else(|| Error::InvalidGame("weight sum overflows".into()))?;
        if total == 0 {
            return Err(Error::InvalidGame("all weights are zero".into()));
        }
        Ok(WeightedVotingGame { weights, quota, total })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn quota(&self) -> Quota {
        self.quota
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.total
    }

    /// `q * sum(w)` as an exact fraction.
    pub fn absolute_quota(&self) -> Ratio<u128> {
        Ratio::new(
            self.quota.numer() as u128 * self.total as u128,
            self.quota.denom() as u128,
        )
    }

    /// Whether a raw weight clears the absolute quota.
    #[inline]
    pub fn weight_wins(&self, weight: u64) -> bool {
        self.quota.is_exceeded(weight, self.total)
    }

    pub fn coalition_weight(&self, s: Coalition) -> u64 {
        s.members().map(|i| self.weights[i]).sum()
    }

    pub fn is_winning(&self, s: Coalition) -> Result<bool> {
        if let Some(i) = s.max_member() {
            if i >= self.players() {
                return Err(Error::PlayerOutOfRange { index: i, players: self.players() });
            }
        }
        Ok(self.weight_wins(self.coalition_weight(s)))
    }

    /// Same game with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let weights = self
            .weights
            .iter()
            .map(|&w| w.checked_mul(factor))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidGame("scaled weights overflow".into()))?;
        WeightedVotingGame::new(weights, self.quota)
    }

    /// Player indices ordered by non-increasing weight, ties by index.
    pub fn weight_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.players()).collect();
        order.sort_by(|&a, &b| self.weights[b].cmp(&self.weights[a]).then(a.cmp(&b)));
        order
    }

    /// Weights divided by their greatest common divisor.
    pub fn reduced_weights(&self) -> Vec<u64> {
        let g = self.weights.iter().fold(0u64, |g, &w| g.gcd(&w));
        self.weights.iter().map(|&w| w / g).collect()
    }
}

/// Text record `q_num/q_den; w1,w2,...,wm`.
impl fmt::Display for WeightedVotingGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}; ", self.quota)?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

impl FromStr for WeightedVotingGame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::GameFormat { input: s.to_string(), reason: reason.to_string() };
        let (q, ws) = s.split_once(';').ok_or_else(|| fail("missing ';' between quota and weights"))?;
        let quota: Quota = q.parse().map_err(|_| fail("bad quota"))?;
        let weights = ws
            .split(',')
            .map(|w| w.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| fail("weights must be non-negative integers"))?;
        WeightedVotingGame::new(weights, quota)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> WeightedVotingGame {
        s.parse().unwrap()
    }

    // Spec examples index players from 1.
    fn c(members: &[usize]) -> Coalition {
        Coalition::from_members(members.iter().map(|i| i - 1))
    }

    #[test]
    fn winning_examples() {
        let eu = g("1/2; 42,25,24,9");
        assert!(!eu.is_winning(c(&[2, 3])).unwrap());
        assert!(eu.is_winning(c(&[1, 4])).unwrap());
        assert!(!eu.is_winning(Coalition::EMPTY).unwrap());
        assert!(eu.is_winning(Coalition::grand(4)).unwrap());

        // 50 is not strictly above 50
        let alt = g("1/2; 40,25,25,10");
        assert!(!alt.is_winning(c(&[1, 4])).unwrap());
    }

    #[test]
    fn out_of_range_member() {
        let eu = g("1/2; 42,25,24,9");
        assert!(matches!(
            eu.is_winning(c(&[5])),
            Err(Error::PlayerOutOfRange { index: 4, players: 4 })
        ));
    }

    #[test]
    fn quota_parsing() {
        assert_eq!("0.74".parse::<Quota>().unwrap(), Quota::new(37, 50).unwrap());
        assert_eq!("2/4".parse::<Quota>().unwrap(), Quota::SIMPLE_MAJORITY);
        assert_eq!(".5".parse::<Quota>().unwrap(), Quota::SIMPLE_MAJORITY);
        assert!("0.49".parse::<Quota>().is_err());
        assert!("1".parse::<Quota>().is_err());
        assert!("1/0".parse::<Quota>().is_err());
        assert!("x".parse::<Quota>().is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(WeightedVotingGame::new(vec![], Quota::SIMPLE_MAJORITY).is_err());
        assert!(WeightedVotingGame::new(vec![0, 0], Quota::SIMPLE_MAJORITY).is_err());
        assert!(WeightedVotingGame::new(vec![1; 65], Quota::SIMPLE_MAJORITY).is_err());
        assert!("1/2 42,25".parse::<WeightedVotingGame>().is_err());
        assert!("1/2; 4,-1".parse::<WeightedVotingGame>().is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let game = g(" 1/2 ;42, 25,24 ,9");
        assert_eq!(game.to_string(), "1/2; 42,25,24,9");
        assert_eq!(g(&game.to_string()), game);
        assert_eq!(g("0.74; 3,2").to_string(), "37/50; 3,2");
    }

    #[test]
    fn absolute_quota_is_derived() {
        let game = g("37/50; 29,29,29,29,27,27,14,13,12,12,12,12,12,10,10,10,7,7,7,7,7,7,4,4,4,4,4,3");
        assert_eq!(game.total_weight(), 352);
        assert_eq!(game.absolute_quota(), Ratio::new(37 * 352, 50));
        assert!(!game.weight_wins(260));
        assert!(game.weight_wins(261));
    }
}
