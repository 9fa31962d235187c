//! Inverse power-index problem: find integer weights whose exact
//! Shapley-Shubik index is as close as possible to a target vector.
//!
//! Two solvers share one contract. [`solve_exhaustive`] enumerates every
//! isomorphism class on the weight grid and certifies its answer;
//! [`solve_local_search`] is a seeded multi-restart hill climber for
//! assemblies too large to enumerate.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::canonical::{count_sorted_weights, for_each_sorted_weights, minimal_winning_coalitions};
use crate::error::{Error, Result};
use crate::game::{Quota, WeightedVotingGame};
use crate::power::{shapley_shubik, PowerVector};

/// Distances closer than this are treated as ties.
pub const DISTANCE_TIE_TOLERANCE: f64 = 1e-12;

/// Tolerance on the target's sum before it is renormalized.
pub const TARGET_SUM_TOLERANCE: f64 = 1e-9;

/// Largest assembly accepted by [`solve_exhaustive`].
pub const EXHAUSTIVE_MAX_PLAYERS: usize = 6;

/// Default ceiling on sorted weight vectors visited by [`solve_exhaustive`].
pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Norm {
    #[default]
    L1,
    L2,
    Linf,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "max" => Ok(Norm::Linf),
            other => Err(Error::InvalidArgument(format!("unknown norm {other:?}"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "L1",
            Norm::L2 => "L2",
            Norm::Linf => "Linf",
        })
    }
}

pub fn distance(v: &[f64], target: &[f64], norm: Norm) -> Result<f64> {
    if v.len() != target.len() {
        return Err(Error::LengthMismatch { expected: target.len(), actual: v.len() });
    }
    let diffs = v.iter().zip(target).map(|(a, b)| (a - b).abs());
    Ok(match norm {
        Norm::L1 => diffs.sum(),
        Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Norm::Linf => diffs.fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseProblemSpec {
    target: Vec<f64>,
    pub quota: Quota,
    pub norm: Norm,
    pub weight_sum_bound: u64,
    pub restarts: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl InverseProblemSpec {
    /// Validates `target` (non-negative, summing to 1 within
    /// [`TARGET_SUM_TOLERANCE`]) and renormalizes it.
    pub fn new(target: Vec<f64>, quota: Quota) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::InvalidArgument("empty target".into()));
        }
        if target.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument("target entries must be finite and non-negative".into()));
        }
        let sum: f64 = target.iter().sum();
        if (sum - 1.0).abs() > TARGET_SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("target sums to {sum}, expected 1")));
        }
        Ok(InverseProblemSpec {
            target: target.iter().map(|x| x / sum).collect(),
            quota,
            norm: Norm::L1,
            weight_sum_bound: 100,
            restarts: 20,
            max_steps: 10_000,
            seed: 0,
        })
    }

    /// Target `n_i / n` from population sizes.
    pub fn from_populations(populations: &[u64], quota: Quota) -> Result<Self> {
        let n: u128 = populations.iter().map(|&p| p as u128).sum();
        if n == 0 {
            return Err(Error::InvalidArgument("populations sum to zero".into()));
        }
        Self::new(populations.iter().map(|&p| p as f64 / n as f64).collect(), quota)
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn players(&self) -> usize {
        self.target.len()
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_weight_sum_bound(mut self, bound: u64) -> Self {
        self.weight_sum_bound = bound;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.weight_sum_bound == 0 {
            return Err(Error::InvalidArgument("weight sum bound must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    LocalSearch,
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMethod::Exhaustive => "exhaustive",
            SearchMethod::LocalSearch => "local_search",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverDiagnostics {
    /// Accepted moves (local search) or weight vectors visited (exhaustive).
    pub steps: u64,
    pub restarts_used: usize,
    /// Distinct isomorphism classes scored (exhaustive only).
    pub classes_examined: usize,
    pub optimality_certified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseSolution {
    pub game: WeightedVotingGame,
    pub ssi: PowerVector,
    pub distance: f64,
    pub method: SearchMethod,
    pub diagnostics: SolverDiagnostics,
}

impl InverseSolution {
    fn build(
        game: WeightedVotingGame,
        ssi: PowerVector,
        spec: &InverseProblemSpec,
        method: SearchMethod,
        diagnostics: SolverDiagnostics,
    ) -> Result<Self> {
        let distance = distance(&ssi.to_f64(), spec.target(), spec.norm)?;
        Ok(InverseSolution { game, ssi, distance, method, diagnostics })
    }
}

/// `(distance, weight sum, sorted weights, weights)`, compared with ties on
/// distance up to [`DISTANCE_TIE_TOLERANCE`].
fn candidate_cmp(a: (f64, &[u64]), b: (f64, &[u64])) -> Ordering {
    if (a.0 - b.0).abs() > DISTANCE_TIE_TOLERANCE {
        return a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal);
    }
    let key = |w: &[u64]| {
        let mut sorted = w.to_vec();
        sorted.sort_unstable_by(|x, y| y.cmp(x));
        (w.iter().sum::<u64>(), sorted)
    };
    key(a.1).cmp(&key(b.1)).then_with(|| a.1.cmp(b.1))
}

/// Global optimum over all weight vectors with `sum(w) <= weight_sum_bound`.
pub fn solve_exhaustive(spec: &InverseProblemSpec) -> Result<InverseSolution> {
    solve_exhaustive_with_budget(spec, DEFAULT_EXHAUSTIVE_BUDGET)
}

pub fn solve_exhaustive_with_budget(spec: &InverseProblemSpec, budget: u128) -> Result<InverseSolution> {
    spec.validate()?;
    let m = spec.players();
    if m > EXHAUSTIVE_MAX_PLAYERS {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search supports at most {EXHAUSTIVE_MAX_PLAYERS} players, got {m}"
        )));
    }
    let bound = spec.weight_sum_bound;
    let needed = count_sorted_weights(m, bound, bound);
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "sorted weight grid", needed, budget });
    }

    // one representative per class: smallest sum, then lexicographically smallest
    let mut classes: BTreeMap<Vec<u64>, Vec<u64>> = BTreeMap::new();
    let mut visited = 0u64;
    for_each_sorted_weights(m, bound, bound, |w| {
        visited += 1;
        let game = WeightedVotingGame::new(w.to_vec(), spec.quota).expect("non-zero weights");
        let mut mwc = minimal_winning_coalitions(&game);
        mwc.sort_unstable();
        let key = |v: &[u64]| (v.iter().sum::<u64>(), v.to_vec());
        classes
            .entry(mwc)
            .and_modify(|rep| {
                if key(w) < key(rep) {
                    *rep = w.to_vec();
                }
            })
            .or_insert_with(|| w.to_vec());
    });

    let perms = permutations(m);
    let classes_examined = classes.len();
    let scored: Vec<(f64, Vec<u64>)> = classes
        .into_values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|rep| -> Result<(f64, Vec<u64>)> {
            let game = WeightedVotingGame::new(rep.clone(), spec.quota)?;
            let ssi = shapley_shubik(&game)?.to_f64();
            let mut best: Option<(f64, Vec<u64>)> = None;
            let mut assigned = vec![0.0; m];
            let mut weights = vec![0u64; m];
            for perm in &perms {
                // sorted player j lands at position perm[j]
                for (j, &p) in perm.iter().enumerate() {
                    assigned[p] = ssi[j];
                    weights[p] = rep[j];
                }
                let d = distance(&assigned, spec.target(), spec.norm)?;
                let better = match &best {
                    None => true,
                    Some((bd, bw)) => candidate_cmp((d, &weights), (*bd, bw)) == Ordering::Less,
                };
                if better {
                    best = Some((d, weights.clone()));
                }
            }
            Ok(best.expect("at least one permutation"))
        })
        .collect::<Result<_>>()?;

    let (_, weights) = scored
        .into_iter()
        .min_by(|a, b| candidate_cmp((a.0, &a.1), (b.0, &b.1)))
        .expect("grid contains at least one game");
    let game = WeightedVotingGame::new(weights, spec.quota)?;
    let ssi = shapley_shubik(&game)?;
    InverseSolution::build(
        game,
        ssi,
        spec,
        SearchMethod::Exhaustive,
        SolverDiagnostics {
            steps: visited,
            restarts_used: 0,
            classes_examined,
            optimality_certified: true,
        },
    )
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

/// Integer vector with the given total, proportional to `shares`, rounded by
/// largest remainder (ties to the lower index).
pub fn largest_remainder(shares: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = shares.iter().sum();
    if shares.is_empty() || sum <= 0.0 {
        return vec![0; shares.len()];
    }
    let exact: Vec<f64> = shares.iter().map(|s| s / sum * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

struct Point {
    weights: Vec<u64>,
    ssi: PowerVector,
    distance: f64,
}

impl Point {
    fn evaluate(weights: Vec<u64>, spec: &InverseProblemSpec) -> Result<Self> {
        let game = WeightedVotingGame::new(weights, spec.quota)?;
        let ssi = shapley_shubik(&game)?;
        let distance = distance(&ssi.to_f64(), spec.target(), spec.norm)?;
        Ok(Point { weights: game.weights().to_vec(), ssi, distance })
    }
}

fn restart_start(spec: &InverseProblemSpec, restart: usize) -> Vec<u64> {
    let bound = spec.weight_sum_bound;
    if restart == 0 {
        return largest_remainder(spec.target(), bound);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(restart as u64);
    let shares: Vec<f64> = if restart % 2 == 1 {
        // multiplicative jitter around the target
        spec.target()
            .iter()
            .map(|&t| {
                let z: f64 = rng.sample(StandardNormal);
                t * (0.5 * z).exp()
            })
            .collect()
    } else {
        // uniform point on the simplex
        (0..spec.players()).map(|_| Exp1.sample(&mut rng)).collect()
    };
    let total = if restart % 4 == 2 { rng.random_range(1..=bound) } else { bound };
    let mut start = largest_remainder(&shares, total);
    if start.iter().all(|&w| w == 0) {
        start[0] = 1;
    }
    start
}

/// Best improving move along `player` in direction `up`: step by one until
/// the index changes (plateaus are crossed), or the grid edge is reached.
fn line_move(current: &Point, player: usize, up: bool, spec: &InverseProblemSpec) -> Result<Option<Point>> {
    let mut weights = current.weights.clone();
    let mut sum: u64 = weights.iter().sum();
    loop {
        if up {
            if sum >= spec.weight_sum_bound {
                return Ok(None);
            }
            weights[player] += 1;
            sum += 1;
        } else {
            if weights[player] == 0 || sum == 1 {
                return Ok(None);
            }
            weights[player] -= 1;
            sum -= 1;
        }
        let candidate = Point::evaluate(weights.clone(), spec)?;
        if candidate.ssi != current.ssi {
            return Ok(Some(candidate));
        }
    }
}

fn climb(spec: &InverseProblemSpec, start: Vec<u64>) -> Result<(Point, u64)> {
    let mut current = Point::evaluate(start, spec)?;
    let mut steps = 0u64;
    while steps < spec.max_steps as u64 && current.distance > 0.0 {
        let mut best: Option<Point> = None;
        for player in 0..spec.players() {
            for up in [true, false] {
                if let Some(candidate) = line_move(&current, player, up, spec)? {
                    let beats_best = best
                        .as_ref()
                        .is_none_or(|b| candidate.distance < b.distance - DISTANCE_TIE_TOLERANCE);
                    if candidate.distance < current.distance - DISTANCE_TIE_TOLERANCE && beats_best {
                        best = Some(candidate);
                    }
                }
            }
        }
        match best {
            Some(next) => {
                current = next;
                steps += 1;
            }
            None => break,
        }
    }
    Ok((current, steps))
}

/// Seeded multi-restart hill climbing over integer weights with
/// `sum(w) <= weight_sum_bound`. Restart 0 starts from proportional weights.
pub fn solve_local_search(spec: &InverseProblemSpec) -> Result<InverseSolution> {
    spec.validate()?;
    let restarts = spec.restarts.max(1);
    let results: Vec<(Point, u64)> = (0..restarts)
        .into_par_iter()
        .map(|r| climb(spec, restart_start(spec, r)))
        .collect::<Result<_>>()?;
    let steps = results.iter().map(|(_, s)| s).sum();
    let best = results
        .into_iter()
        .map(|(p, _)| p)
        .min_by(|a, b| candidate_cmp((a.distance, &a.weights), (b.distance, &b.weights)))
        .expect("at least one restart");
    let game = WeightedVotingGame::new(best.weights, spec.quota)?;
    InverseSolution::build(
        game,
        best.ssi,
        spec,
        SearchMethod::LocalSearch,
        SolverDiagnostics {
            steps,
            restarts_used: restarts,
            classes_examined: 0,
            optimality_certified: false,
        },
    )
}
