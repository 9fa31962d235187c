//! Monte Carlo engine for the two-tier median-voter model.
//!
//! Delegate `i` sits at `t * mu_i + median shock of n_i voters`. The
//! assembly outcome is the ideal point of the first delegate, in ascending
//! order, whose cumulative weight clears the quota. Replication `r` draws
//! from its own ChaCha stream `(seed, r)`, so estimates do not depend on how
//! replications are split across threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::federation::FederationSpec;
use crate::game::WeightedVotingGame;
use crate::power::PowerVector;
use crate::shock::{MedianShock, ShockDistribution};

/// Similarity parameter `t` plus the idiosyncratic (`G`) and
/// constituency-level (`H`) shock distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferenceModel {
    t: f64,
    pub idiosyncratic: ShockDistribution,
    pub constituency: ShockDistribution,
}

impl PreferenceModel {
    /// `G = U[-0.5, 0.5]`, `H = N(0, 1e-8)`.
    pub fn with_defaults(t: f64) -> Result<Self> {
        Self::new(t, ShockDistribution::Uniform { low: -0.5, high: 0.5 }, ShockDistribution::Normal { mean: 0.0, sd: 1e-4 })
    }

    pub fn new(t: f64, idiosyncratic: ShockDistribution, constituency: ShockDistribution) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t must be a non-negative number, got {t}")));
        }
        Ok(PreferenceModel { t, idiosyncratic, constituency })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_t(self, t: f64) -> Result<Self> {
        Self::new(t, self.idiosyncratic, self.constituency)
    }
}

/// Per-federation sampler of delegate ideal points.
#[derive(Debug, Clone)]
pub struct DelegateSampler {
    model: PreferenceModel,
    shocks: Vec<MedianShock>,
}

impl DelegateSampler {
    pub fn new(fed: &FederationSpec, model: PreferenceModel) -> Result<Self> {
        let shocks = fed
            .constituencies()
            .iter()
            .map(|c| MedianShock::new(c.population, model.idiosyncratic))
            .collect::<Result<_>>()?;
        Ok(DelegateSampler { model, shocks })
    }

    pub fn players(&self) -> usize {
        self.shocks.len()
    }

    /// Fills `mu` with constituency shocks and `lambda` with ideal points.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, mu: &mut [f64], lambda: &mut [f64]) {
        for (i, shock) in self.shocks.iter().enumerate() {
            mu[i] = self.model.constituency.sample(rng);
            lambda[i] = self.model.t * mu[i] + shock.sample(rng);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut mu = vec![0.0; self.players()];
        let mut lambda = vec![0.0; self.players()];
        self.sample_into(rng, &mut mu, &mut lambda);
        lambda
    }
}

pub fn sample_delegate_ideals<R: Rng + ?Sized>(
    fed: &FederationSpec,
    model: &PreferenceModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(DelegateSampler::new(fed, *model)?.sample(rng))
}

/// Generator for replication `index` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn ascending_order(lambda: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..lambda.len());
    order.sort_unstable_by(|&a, &b| lambda[a].total_cmp(&lambda[b]).then(a.cmp(&b)));
}

fn pivot_in_order(order: &[usize], game: &WeightedVotingGame) -> usize {
    let weights = game.weights();
    let mut acc = 0u64;
    for &i in order {
        acc += weights[i];
        if game.weight_wins(acc) {
            return i;
        }
    }
    unreachable!("the grand coalition clears any quota below 1")
}

/// Index of the pivotal delegate. Ties in `lambda` go to the lower index.
pub fn pivotal_index(lambda: &[f64], game: &WeightedVotingGame) -> Result<usize> {
    if lambda.len() != game.players() {
        return Err(Error::LengthMismatch { expected: game.players(), actual: lambda.len() });
    }
    let mut order = Vec::with_capacity(lambda.len());
    ascending_order(lambda, &mut order);
    Ok(pivot_in_order(&order, game))
}

/// One simulated assembly decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub lambda: Vec<f64>,
    pub pivot_index: usize,
    /// Ideal point of the pivotal delegate.
    pub outcome: f64,
}

pub fn simulate_replication(
    sampler: &DelegateSampler,
    game: &WeightedVotingGame,
    seed: u64,
    index: u64,
) -> Result<ReplicationOutcome> {
    let mut rng = replication_rng(seed, index);
    let lambda = sampler.sample(&mut rng);
    let pivot_index = pivotal_index(&lambda, game)?;
    Ok(ReplicationOutcome { outcome: lambda[pivot_index], pivot_index, lambda })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotEstimate {
    /// Replications in which each delegate was pivotal; sums to `replications`.
    pub counts: Vec<u64>,
    pub pi_hat: Vec<f64>,
    pub std_err: Vec<f64>,
    pub replications: u64,
    pub seed: u64,
}

impl PivotEstimate {
    fn from_counts(counts: Vec<u64>, replications: u64, seed: u64) -> Self {
        let r = replications as f64;
        let pi_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
        let std_err = pi_hat.iter().map(|p| (p * (1.0 - p) / r).sqrt()).collect();
        PivotEstimate { counts, pi_hat, std_err, replications, seed }
    }

    pub fn max_std_err(&self) -> f64 {
        self.std_err.iter().copied().fold(0.0, f64::max)
    }

    /// Sum of per-component standard errors, an upper bound for the noise in
    /// any L1 distance built from `pi_hat`.
    pub fn l1_noise_proxy(&self) -> f64 {
        self.std_err.iter().sum()
    }
}

pub fn estimate_pivot_probabilities(
    fed: &FederationSpec,
    game: &WeightedVotingGame,
    model: &PreferenceModel,
    replications: u64,
    seed: u64,
) -> Result<PivotEstimate> {
    if replications == 0 {
        return Err(Error::InvalidArgument("at least one replication is required".into()));
    }
    let m = fed.len();
    if game.players() != m {
        return Err(Error::LengthMismatch { expected: m, actual: game.players() });
    }
    let sampler = DelegateSampler::new(fed, *model)?;
    let counts = (0..replications)
        .into_par_iter()
        .fold(
            || (vec![0u64; m], vec![0.0; m], vec![0.0; m], Vec::with_capacity(m)),
            |(mut counts, mut mu, mut lambda, mut order), r| {
                let mut rng = replication_rng(seed, r);
                sampler.sample_into(&mut rng, &mut mu, &mut lambda);
                ascending_order(&lambda, &mut order);
                counts[pivot_in_order(&order, game)] += 1;
                (counts, mu, lambda, order)
            },
        )
        .map(|(counts, ..)| counts)
        .reduce(|| vec![0u64; m], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    Ok(PivotEstimate::from_counts(counts, replications, seed))
}

/// Per-voter probability of determining the outcome: `pi_i / n_i`.
pub fn voter_influence(pi: &[f64], fed: &FederationSpec) -> Result<Vec<f64>> {
    if pi.len() != fed.len() {
        return Err(Error::LengthMismatch { expected: fed.len(), actual: pi.len() });
    }
    Ok(pi
        .iter()
        .zip(fed.constituencies())
        .map(|(p, c)| p / c.population as f64)
        .collect())
}

pub fn voter_influence_exact(pi: &PowerVector, fed: &FederationSpec) -> Result<Vec<BigRational>> {
    if pi.len() != fed.len() {
        return Err(Error::LengthMismatch { expected: fed.len(), actual: pi.len() });
    }
    Ok(pi
        .values()
        .iter()
        .zip(fed.constituencies())
        .map(|(p, c)| p / BigRational::from_integer(BigInt::from(c.population)))
        .collect())
}

/// L1 distance between voter-level influence and the egalitarian `1/n`,
/// evaluated as `sum_i |pi_i - n_i / n|`.
pub fn fairness_deviation(pi: &[f64], fed: &FederationSpec) -> Result<f64> {
    if pi.len() != fed.len() {
        return Err(Error::LengthMismatch { expected: fed.len(), actual: pi.len() });
    }
    Ok(pi
        .iter()
        .zip(fed.relative_sizes())
        .map(|(p, share)| (p - share).abs())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRate {
    pub rate: f64,
    pub std_err: f64,
    pub replications: u64,
}

/// Fraction of replications in which delegates' ideal points are ordered
/// exactly like the constituency shocks `mu`.
pub fn ordering_match_rate(
    fed: &FederationSpec,
    model: &PreferenceModel,
    replications: u64,
    seed: u64,
) -> Result<MatchRate> {
    if model.t() <= 0.0 {
        return Err(Error::InvalidArgument("ordering match rate requires t > 0".into()));
    }
    if replications == 0 {
        return Err(Error::InvalidArgument("at least one replication is required".into()));
    }
    let m = fed.len();
    let sampler = DelegateSampler::new(fed, *model)?;
    let matches: u64 = (0..replications)
        .into_par_iter()
        .fold(
            || (0u64, vec![0.0; m], vec![0.0; m], Vec::with_capacity(m)),
            |(hits, mut mu, mut lambda, mut order), r| {
                let mut rng = replication_rng(seed, r);
                sampler.sample_into(&mut rng, &mut mu, &mut lambda);
                ascending_order(&mu, &mut order);
                let same = order.windows(2).all(|w| lambda[w[0]] < lambda[w[1]]);
                (hits + same as u64, mu, lambda, order)
            },
        )
        .map(|(hits, ..)| hits)
        .sum();
    let rate = matches as f64 / replications as f64;
    Ok(MatchRate { rate, std_err: (rate * (1.0 - rate) / replications as f64).sqrt(), replications })
}
