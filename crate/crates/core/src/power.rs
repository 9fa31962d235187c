//! Exact power indices of weighted voting games.
//!
//! The Shapley-Shubik index is computed from counts of coalitions indexed by
//! (size, weight). Counts for the game without player `i` are peeled off the
//! full table in `O(m * q~)`, so the whole vector costs `O(m^2 * q~)`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::game::WeightedVotingGame;

/// Default ceiling on `m * sum(w)` for the counting tables.
pub const DEFAULT_DP_BUDGET: u128 = 100_000_000;

/// Largest player count accepted by [`shapley_permutation_oracle`].
pub const ORACLE_MAX_PLAYERS: usize = 10;

/// Exact power vector, one rational per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PowerVector(Vec<BigRational>);

impl PowerVector {
    pub fn new(values: Vec<BigRational>) -> Self {
        PowerVector(values)
    }

    pub fn values(&self) -> &[BigRational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, v| acc + v)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }
}

impl fmt::Display for PowerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn ratio(numer: BigUint, denom: BigUint) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

fn check_budget(game: &WeightedVotingGame, budget: u128) -> Result<()> {
    let needed = game.players() as u128 * game.total_weight() as u128;
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "power index table (m * sum w)", needed, budget });
    }
    Ok(())
}

/// `counts[k][w]`: coalitions of size `k` and weight `w <= cap` among `weights`.
fn size_weight_counts(weights: &[u64], cap: usize) -> Vec<Vec<u64>> {
    let m = weights.len();
    let mut counts = vec![vec![0u64; cap + 1]; m + 1];
    counts[0][0] = 1;
    for (seen, &w) in weights.iter().enumerate() {
        let w = w as usize;
        if w > cap {
            continue;
        }
        for k in (1..=seen + 1).rev() {
            let (lower, upper) = counts.split_at_mut(k);
            let (src, dst) = (&lower[k - 1], &mut upper[0]);
            for x in (w..=cap).rev() {
                dst[x] += src[x - w];
            }
        }
    }
    counts
}

/// Undo one player of weight `w` from a size/weight table.
fn remove_player(full: &[Vec<u64>], w: u64) -> Vec<Vec<u64>> {
    let cap = full[0].len() - 1;
    let w = w as usize;
    if w > cap {
        return full.to_vec();
    }
    let mut out = full.to_vec();
    for k in 1..out.len() {
        for x in w..=cap {
            let sub = out[k - 1][x - w];
            out[k][x] -= sub;
        }
    }
    out
}

/// Per player, per coalition size: number of coalitions of the others for
/// which the player swings.
fn swing_counts_by_size(game: &WeightedVotingGame) -> Vec<Vec<u64>> {
    let floor = game.quota().floor_of(game.total_weight()) as usize;
    let full = size_weight_counts(game.weights(), floor);
    game.weights()
        .iter()
        .map(|&wi| {
            if wi == 0 {
                return vec![0; game.players()];
            }
            let others = remove_player(&full, wi);
            let lo = (floor + 1).saturating_sub(wi as usize);
            (0..game.players())
                .map(|k| others[k][lo..=floor].iter().sum())
                .collect()
        })
        .collect()
}

pub fn shapley_shubik(game: &WeightedVotingGame) -> Result<PowerVector> {
    shapley_shubik_with_budget(game, DEFAULT_DP_BUDGET)
}

pub fn shapley_shubik_with_budget(game: &WeightedVotingGame, budget: u128) -> Result<PowerVector> {
    check_budget(game, budget)?;
    let m = game.players();
    // k! (m-1-k)!
    let coeff: Vec<BigUint> = (0..m).map(|k| factorial(k) * factorial(m - 1 - k)).collect();
    let denom = factorial(m);
    let values = swing_counts_by_size(game)
        .into_iter()
        .map(|by_size| {
            let numer = by_size
                .iter()
                .zip(&coeff)
                .filter(|(&c, _)| c > 0)
                .fold(BigUint::zero(), |acc, (&c, f)| acc + f * c);
            ratio(numer, denom.clone())
        })
        .collect();
    Ok(PowerVector(values))
}

/// Shapley-Shubik index by walking all `m!` orderings.
pub fn shapley_permutation_oracle(game: &WeightedVotingGame) -> Result<PowerVector> {
    let m = game.players();
    if m > ORACLE_MAX_PLAYERS {
        return Err(Error::InvalidArgument(format!(
            "permutation oracle limited to {ORACLE_MAX_PLAYERS} players, got {m}"
        )));
    }
    let weights = game.weights();
    let mut pivots = vec![0u64; m];
    let mut credit = |order: &[usize]| {
        let mut acc = 0u64;
        for &p in order {
            acc += weights[p];
            if game.weight_wins(acc) {
                pivots[p] += 1;
                return;
            }
        }
        unreachable!("grand coalition always wins");
    };

    // Heap's algorithm
    let mut order: Vec<usize> = (0..m).collect();
    let mut c = vec![0usize; m];
    credit(&order);
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            credit(&order);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    let denom = factorial(m);
    Ok(PowerVector(pivots.into_iter().map(|p| ratio(BigUint::from(p), denom.clone())).collect()))
}

/// Raw Banzhaf measure: swings of player `i` divided by `2^(m-1)`.
pub fn banzhaf(game: &WeightedVotingGame) -> Result<Vec<BigRational>> {
    banzhaf_with_budget(game, DEFAULT_DP_BUDGET)
}

pub fn banzhaf_with_budget(game: &WeightedVotingGame, budget: u128) -> Result<Vec<BigRational>> {
    check_budget(game, budget)?;
    let denom = BigUint::one() << (game.players() - 1);
    Ok(swing_counts_by_size(game)
        .into_iter()
        .map(|by_size| {
            let swings = by_size.iter().fold(BigUint::zero(), |acc, &c| acc + c);
            ratio(swings, denom.clone())
        })
        .collect())
}

/// Probability that a single voter is decisive among `n` fair coin voters.
#[derive(Debug, Clone, PartialEq)]
pub struct PenroseDecisiveness {
    /// `C(2k, k) / 4^k` for `n = 2k + 1`.
    pub exact: BigRational,
    /// `sqrt(2 / (pi * n))`.
    pub approx: f64,
}

impl PenroseDecisiveness {
    pub fn exact_f64(&self) -> f64 {
        rational_to_f64(&self.exact)
    }

    pub fn relative_gap(&self) -> f64 {
        let exact = self.exact_f64();
        (exact - self.approx).abs() / exact
    }
}

pub fn penrose_decisiveness(n: u64) -> Result<PenroseDecisiveness> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "decisiveness is defined for odd population sizes, got {n}"
        )));
    }
    let k = (n - 1) / 2;
    // C(2k, k) built incrementally: C(2j, j) = C(2j-2, j-1) * (2j)(2j-1) / j^2
    let mut central = BigUint::one();
    for j in 1..=k {
        central = central * (2 * j) * (2 * j - 1) / (j * j);
    }
    let exact = ratio(central, BigUint::one() << (2 * k));
    let approx = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
    Ok(PenroseDecisiveness { exact, approx })
}
