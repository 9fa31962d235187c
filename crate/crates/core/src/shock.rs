//! Preference shock distributions and the sample-median sampler.
//!
//! The median of `n` i.i.d. draws from a continuous `G` is `G^-1` of the
//! corresponding uniform order statistic, which is Beta distributed. Drawing
//! one Beta variate replaces `n` individual draws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal, Uniform};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use crate::error::{Error, Result};

/// A continuous univariate distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShockDistribution {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
}

impl ShockDistribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::InvalidArgument(format!("uniform bounds [{low}, {high}] are invalid")));
        }
        Ok(ShockDistribution::Uniform { low, high })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(Error::InvalidArgument(format!("normal({mean}, sd {sd}) is invalid")));
        }
        Ok(ShockDistribution::Normal { mean, sd })
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ShockDistribution::Uniform { low, high } => (high - low).powi(2) / 12.0,
            ShockDistribution::Normal { sd, .. } => sd * sd,
        }
    }

    pub fn median(&self) -> f64 {
        match *self {
            ShockDistribution::Uniform { low, high } => 0.5 * (low + high),
            ShockDistribution::Normal { mean, .. } => mean,
        }
    }

    /// Density at the median.
    pub fn median_density(&self) -> f64 {
        match *self {
            ShockDistribution::Uniform { low, high } => 1.0 / (high - low),
            ShockDistribution::Normal { sd, .. } => 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt()),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            ShockDistribution::Uniform { low, high } => low + u * (high - low),
            ShockDistribution::Normal { mean, sd } => {
                let u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
                StatNormal::new(mean, sd).expect("validated parameters").inverse_cdf(u)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ShockDistribution::Uniform { low, high } => {
                Uniform::new(low, high).expect("validated bounds").sample(rng)
            }
            ShockDistribution::Normal { mean, sd } => {
                Normal::new(mean, sd).expect("validated parameters").sample(rng)
            }
        }
    }
}

impl fmt::Display for ShockDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ShockDistribution::Uniform { low, high } => write!(f, "uniform({low},{high})"),
            ShockDistribution::Normal { mean, sd } => write!(f, "normal({mean},{})", sd * sd),
        }
    }
}

/// `uniform(low,high)` or `normal(mean,variance)`.
impl FromStr for ShockDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse distribution {s:?}"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (name.trim().to_ascii_lowercase().as_str(), args.as_slice()) {
            ("uniform", &[low, high]) => Self::uniform(low, high),
            ("normal", &[mean, var]) if var > 0.0 => Self::normal(mean, var.sqrt()),
            _ => Err(bad()),
        }
    }
}

/// Draws the sample median of `n` i.i.d. draws from a fixed distribution.
#[derive(Debug, Clone)]
pub struct MedianShock {
    dist: ShockDistribution,
    kind: MedianKind,
}

#[derive(Debug, Clone)]
enum MedianKind {
    /// `n = 2k + 1`: the `(k+1)`-th order statistic, `Beta(k+1, k+1)`.
    Odd(Beta<f64>),
    /// `n = 2k`: `U_(k+1) ~ Beta(k+1, k)`, then `U_(k) = U_(k+1) * V^(1/k)`.
    Even { upper: Beta<f64>, k: f64 },
}

impl MedianShock {
    pub fn new(n: u64, dist: ShockDistribution) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("median of zero draws".into()));
        }
        let k = (n / 2) as f64;
        let beta = |a: f64, b: f64| {
            Beta::new(a, b).map_err(|e| Error::InvalidArgument(format!("beta({a}, {b}): {e}")))
        };
        let kind = if n % 2 == 1 {
            MedianKind::Odd(beta(k + 1.0, k + 1.0)?)
        } else {
            MedianKind::Even { upper: beta(k + 1.0, k)?, k }
        };
        Ok(MedianShock { dist, kind })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            MedianKind::Odd(beta) => self.dist.inverse_cdf(beta.sample(rng)),
            MedianKind::Even { upper, k } => {
                let hi = upper.sample(rng);
                let v: f64 = rng.random();
                let lo = hi * v.powf(1.0 / k);
                0.5 * (self.dist.inverse_cdf(lo) + self.dist.inverse_cdf(hi))
            }
        }
    }
}

pub fn sample_median_shock<R: Rng + ?Sized>(n: u64, dist: ShockDistribution, rng: &mut R) -> Result<f64> {
    Ok(MedianShock::new(n, dist)?.sample(rng))
}

/// Median of `n` explicit draws; the reference the shortcut is tested against.
pub fn brute_force_median<R: Rng + ?Sized>(n: usize, dist: ShockDistribution, rng: &mut R) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("median of zero draws".into()));
    }
    let mut draws: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
    let mid = n / 2;
    let (below, upper, _) = draws.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Ok(upper)
    } else {
        let lower = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (lower + upper))
    }
}
