//! Weight rules, experiment configuration and the fairness sweep over `t`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::canonical::count_sorted_weights;
use crate::error::{Error, Result};
use crate::federation::{load_federation, FederationSpec};
use crate::game::{Quota, WeightedVotingGame};
use crate::inverse::{
    largest_remainder, solve_exhaustive, solve_local_search, InverseProblemSpec, InverseSolution, Norm,
    DEFAULT_EXHAUSTIVE_BUDGET, EXHAUSTIVE_MAX_PLAYERS,
};
use crate::power::{shapley_shubik, PowerVector};
use crate::shock::ShockDistribution;
use crate::simulate::{estimate_pivot_probabilities, fairness_deviation, PivotEstimate, PreferenceModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightRule {
    Proportional,
    SquareRoot,
    ShapleyInverse,
}

impl WeightRule {
    pub const ALL: [WeightRule; 3] = [WeightRule::Proportional, WeightRule::SquareRoot, WeightRule::ShapleyInverse];
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightRule::Proportional => "proportional",
            WeightRule::SquareRoot => "square_root",
            WeightRule::ShapleyInverse => "shapley_inverse",
        })
    }
}

impl FromStr for WeightRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proportional" => Ok(WeightRule::Proportional),
            "square_root" | "sqrt" => Ok(WeightRule::SquareRoot),
            "shapley_inverse" | "shapley" => Ok(WeightRule::ShapleyInverse),
            other => Err(Error::InvalidArgument(format!("unknown weight rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Exhaustive when the grid fits the budget, local search otherwise.
    #[default]
    Auto,
    Exhaustive,
    LocalSearch,
}

impl FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(SolverMethod::Auto),
            "exhaustive" => Ok(SolverMethod::Exhaustive),
            "local" | "local_search" => Ok(SolverMethod::LocalSearch),
            other => Err(Error::InvalidArgument(format!("unknown solver method {other:?}"))),
        }
    }
}

/// Settings shared by the three weight rules.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSettings {
    /// Weight total for the proportional and square-root rules.
    pub weight_total: u64,
    pub method: SolverMethod,
    pub norm: Norm,
    pub weight_sum_bound: u64,
    pub restarts: usize,
    pub max_steps: usize,
    pub solver_seed: u64,
}

impl Default for WeightSettings {
    fn default() -> Self {
        WeightSettings {
            weight_total: 10_000,
            method: SolverMethod::Auto,
            norm: Norm::L1,
            weight_sum_bound: 500,
            restarts: 4,
            max_steps: 10_000,
            solver_seed: 0,
        }
    }
}

impl WeightSettings {
    pub fn inverse_spec(&self, fed: &FederationSpec, quota: Quota) -> Result<InverseProblemSpec> {
        Ok(InverseProblemSpec::from_populations(&fed.sizes(), quota)?
            .with_norm(self.norm)
            .with_weight_sum_bound(self.weight_sum_bound)
            .with_restarts(self.restarts)
            .with_max_steps(self.max_steps)
            .with_seed(self.solver_seed))
    }
}

/// Exact largest-remainder apportionment of `total` seats to `sizes`.
pub fn apportion(sizes: &[u64], total: u64) -> Vec<u64> {
    let n: u128 = sizes.iter().map(|&s| s as u128).sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let scaled: Vec<u128> = sizes.iter().map(|&s| s as u128 * total as u128).collect();
    let mut out: Vec<u64> = scaled.iter().map(|x| (x / n) as u64).collect();
    let left = total - out.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| (scaled[b] % n).cmp(&(scaled[a] % n)).then(a.cmp(&b)));
    for &i in order.iter().take(left as usize) {
        out[i] += 1;
    }
    out
}

pub fn solve_inverse(spec: &InverseProblemSpec, method: SolverMethod) -> Result<InverseSolution> {
    match method {
        SolverMethod::Exhaustive => solve_exhaustive(spec),
        SolverMethod::LocalSearch => solve_local_search(spec),
        SolverMethod::Auto => {
            let m = spec.players();
            let fits = m <= EXHAUSTIVE_MAX_PLAYERS
                && count_sorted_weights(m, spec.weight_sum_bound, spec.weight_sum_bound) <= DEFAULT_EXHAUSTIVE_BUDGET;
            if fits {
                solve_exhaustive(spec)
            } else {
                solve_local_search(spec)
            }
        }
    }
}

pub fn build_weights(
    fed: &FederationSpec,
    rule: WeightRule,
    quota: Quota,
    settings: &WeightSettings,
) -> Result<WeightedVotingGame> {
    let weights = match rule {
        WeightRule::Proportional => apportion(&fed.sizes(), settings.weight_total),
        WeightRule::SquareRoot => {
            let roots: Vec<f64> = fed.sizes().iter().map(|&n| (n as f64).sqrt()).collect();
            largest_remainder(&roots, settings.weight_total)
        }
        WeightRule::ShapleyInverse => {
            let spec = settings.inverse_spec(fed, quota)?;
            return Ok(solve_inverse(&spec, settings.method)?.game);
        }
    };
    WeightedVotingGame::new(weights, quota)
}

/// Splits `key = value` lines; `#` starts a comment.
fn key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config { line: i + 1, reason: format!("expected `key = value`, got {line:?}") })?;
        out.push((i + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config { line, reason: format!("invalid value {value:?} for `{key}`") })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(line, key, s.trim()))
        .collect()
}

fn resolve(base: Option<&Path>, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

/// Settings recognised in both config kinds.
fn apply_common(
    key: &str,
    line: usize,
    value: &str,
    weights: &mut WeightSettings,
    idiosyncratic: &mut ShockDistribution,
    constituency: &mut ShockDistribution,
) -> Result<bool> {
    match key {
        "weight_total" => weights.weight_total = parse_value(line, key, value)?,
        "solver" => weights.method = parse_value(line, key, value)?,
        "norm" => weights.norm = parse_value(line, key, value)?,
        "weight_sum_bound" => weights.weight_sum_bound = parse_value(line, key, value)?,
        "restarts" => weights.restarts = parse_value(line, key, value)?,
        "max_steps" => weights.max_steps = parse_value(line, key, value)?,
        "solver_seed" => weights.solver_seed = parse_value(line, key, value)?,
        "idiosyncratic" | "g" => *idiosyncratic = parse_value(line, key, value)?,
        "constituency" | "h" => *constituency = parse_value(line, key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn default_shocks() -> (ShockDistribution, ShockDistribution) {
    let model = PreferenceModel::with_defaults(0.0).expect("defaults are valid");
    (model.idiosyncratic, model.constituency)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub federation: PathBuf,
    pub quota: Quota,
    pub t_grid: Vec<f64>,
    pub replications: u64,
    pub seed: u64,
    pub rules: Vec<WeightRule>,
    pub weights: WeightSettings,
    pub idiosyncratic: ShockDistribution,
    pub constituency: ShockDistribution,
    pub output: PathBuf,
}

impl ExperimentConfig {
    /// Defaults: `t` in 0, 1, ..., 20 with 100 000 replications per point.
    pub fn new(federation: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        let (idiosyncratic, constituency) = default_shocks();
        ExperimentConfig {
            federation: federation.into(),
            quota: Quota::SIMPLE_MAJORITY,
            t_grid: (0..=20).map(f64::from).collect(),
            replications: 100_000,
            seed: 1,
            rules: vec![WeightRule::Proportional, WeightRule::ShapleyInverse],
            weights: WeightSettings::default(),
            idiosyncratic,
            constituency,
            output: output.into(),
        }
    }

    /// Relative paths are taken relative to `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut federation = None;
        let mut output = None;
        let mut cfg = ExperimentConfig::new("", "");
        for (line, key, value) in key_values(text)? {
            if apply_common(&key, line, &value, &mut cfg.weights, &mut cfg.idiosyncratic, &mut cfg.constituency)? {
                continue;
            }
            match key.as_str() {
                "federation" => federation = Some(resolve(base, &value)),
                "output" => output = Some(resolve(base, &value)),
                "quota" => cfg.quota = parse_value(line, &key, &value)?,
                "t_grid" => cfg.t_grid = parse_list(line, &key, &value)?,
                "replications" => cfg.replications = parse_value(line, &key, &value)?,
                "seed" => cfg.seed = parse_value(line, &key, &value)?,
                "rules" => cfg.rules = parse_list(line, &key, &value)?,
                _ => return Err(Error::Config { line, reason: format!("unknown key `{key}`") }),
            }
        }
        cfg.federation = federation.ok_or(Error::Config { line: 0, reason: "missing `federation`".into() })?;
        cfg.output = output.ok_or(Error::Config { line: 0, reason: "missing `output`".into() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path)?, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidArgument(reason.to_string()));
        if self.t_grid.is_empty() {
            return bad("t_grid is empty");
        }
        if self.t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("t_grid entries must be non-negative");
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("t_grid must be strictly increasing");
        }
        if self.replications == 0 {
            return bad("replications must be positive");
        }
        if self.rules.is_empty() {
            return bad("no weight rules selected");
        }
        Ok(())
    }

    pub fn games_path(&self) -> PathBuf {
        companion_path(&self.output)
    }
}

/// `results.csv` -> `results.games.csv`.
pub fn companion_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.games.csv"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub t: f64,
    pub rule: WeightRule,
    pub deviation: f64,
    /// Sum of per-component standard errors of `pi_hat`.
    pub noise: f64,
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleGame {
    pub rule: WeightRule,
    pub game: WeightedVotingGame,
    pub ssi: PowerVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub games: Vec<RuleGame>,
}

impl ExperimentResult {
    pub fn row(&self, t: f64, rule: WeightRule) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.t == t && r.rule == rule)
    }

    pub fn write_rows<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["t", "rule", "deviation", "std_err_proxy", "replications", "seed"])?;
        for r in &self.rows {
            wtr.write_record([
                r.t.to_string(),
                r.rule.to_string(),
                r.deviation.to_string(),
                r.noise.to_string(),
                r.replications.to_string(),
                r.seed.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_games<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["rule", "game", "ssi", "ssi_decimal"])?;
        for g in &self.games {
            let exact: Vec<String> = g.ssi.values().iter().map(|v| v.to_string()).collect();
            let decimal: Vec<String> = g.ssi.to_f64().iter().map(|v| format!("{v:.6}")).collect();
            wtr.write_record([g.rule.to_string(), g.game.to_string(), exact.join(" "), decimal.join(" ")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Runs every `(t, rule)` pair. All pairs share the configured seed, so the
/// rules are compared on common random numbers.
pub fn run_experiment_on(config: &ExperimentConfig, fed: &FederationSpec) -> Result<ExperimentResult> {
    config.validate()?;
    let mut games = Vec::with_capacity(config.rules.len());
    for &rule in &config.rules {
        let game = build_weights(fed, rule, config.quota, &config.weights)?;
        let ssi = shapley_shubik(&game)?;
        games.push(RuleGame { rule, game, ssi });
    }
    let mut rows = Vec::with_capacity(config.t_grid.len() * games.len());
    for &t in &config.t_grid {
        let model = PreferenceModel::new(t, config.idiosyncratic, config.constituency)?;
        for g in &games {
            let est: PivotEstimate =
                estimate_pivot_probabilities(fed, &g.game, &model, config.replications, config.seed)?;
            rows.push(ExperimentRow {
                t,
                rule: g.rule,
                deviation: fairness_deviation(&est.pi_hat, fed)?,
                noise: est.l1_noise_proxy(),
                replications: config.replications,
                seed: config.seed,
            });
        }
    }
    Ok(ExperimentResult { rows, games })
}

/// Loads the federation, runs the sweep, and writes the results CSV plus its
/// companion games file. Nothing is left behind on failure.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let fed = load_federation(&config.federation)?;
    let result = run_experiment_on(config, &fed)?;
    let games_path = config.games_path();
    let written = write_atomically(&config.output, |w| result.write_rows(w))
        .and_then(|_| write_atomically(&games_path, |w| result.write_games(w)));
    if let Err(e) = written {
        let _ = fs::remove_file(&config.output);
        let _ = fs::remove_file(&games_path);
        return Err(e);
    }
    Ok(result)
}

fn write_atomically(path: &Path, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    let outcome = fs::File::create(&tmp)
        .map_err(Error::from)
        .and_then(|mut f| write(&mut f).and_then(|_| f.sync_all().map_err(Error::from)))
        .and_then(|_| fs::rename(&tmp, path).map_err(Error::from));
    if outcome.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    outcome
}

/// Single pivot-probability estimate for one federation and one game.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub federation: PathBuf,
    pub quota: Quota,
    /// Explicit game; when absent the game is built with `rule`.
    pub game: Option<WeightedVotingGame>,
    pub rule: WeightRule,
    pub t: f64,
    pub replications: u64,
    pub seed: u64,
    pub weights: WeightSettings,
    pub idiosyncratic: ShockDistribution,
    pub constituency: ShockDistribution,
}

impl SimulationConfig {
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let (idiosyncratic, constituency) = default_shocks();
        let mut cfg = SimulationConfig {
            federation: PathBuf::new(),
            quota: Quota::SIMPLE_MAJORITY,
            game: None,
            rule: WeightRule::Proportional,
            t: 0.0,
            replications: 100_000,
            seed: 1,
            weights: WeightSettings::default(),
            idiosyncratic,
            constituency,
        };
        let mut federation = None;
        for (line, key, value) in key_values(text)? {
            if apply_common(&key, line, &value, &mut cfg.weights, &mut cfg.idiosyncratic, &mut cfg.constituency)? {
                continue;
            }
            match key.as_str() {
                "federation" => federation = Some(resolve(base, &value)),
                "quota" => cfg.quota = parse_value(line, &key, &value)?,
                "game" => cfg.game = Some(parse_value(line, &key, &value)?),
                "rule" => cfg.rule = parse_value(line, &key, &value)?,
                "t" => cfg.t = parse_value(line, &key, &value)?,
                "replications" => cfg.replications = parse_value(line, &key, &value)?,
                "seed" => cfg.seed = parse_value(line, &key, &value)?,
                _ => return Err(Error::Config { line, reason: format!("unknown key `{key}`") }),
            }
        }
        cfg.federation = federation.ok_or(Error::Config { line: 0, reason: "missing `federation`".into() })?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path)?, path.parent())
    }
}
