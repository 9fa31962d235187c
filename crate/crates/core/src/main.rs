use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twotier::canonical::enumerate_game_classes;
use twotier::experiment::{build_weights, run_experiment, solve_inverse, ExperimentConfig, SimulationConfig, SolverMethod};
use twotier::inverse::{InverseProblemSpec, Norm};
use twotier::power::{banzhaf, penrose_decisiveness, rational_to_f64, shapley_shubik};
use twotier::simulate::{estimate_pivot_probabilities, fairness_deviation, PreferenceModel};
use twotier::{load_federation, Error, Quota, Result, WeightedVotingGame};

#[derive(Parser)]
#[command(name = "twotier", version, about = "Power indices and fair weights for two-tier voting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Shapley-Shubik and Banzhaf indices of a game such as "1/2; 42,25,24,9".
    Power { game: String },
    /// Weights whose Shapley-Shubik index best matches a target vector.
    Inverse {
        /// Comma-separated shares summing to 1; omit when --federation is given.
        target: Option<String>,
        /// Use population shares from a `name,population` CSV as the target.
        #[arg(long)]
        federation: Option<PathBuf>,
        #[arg(long, default_value = "1/2")]
        quota: String,
        #[arg(long, default_value = "L1")]
        norm: String,
        /// Upper bound on the weight sum.
        #[arg(long, default_value_t = 100)]
        bound: u64,
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List isomorphism classes of m-player games at quota q.
    Enumerate {
        m: usize,
        q: String,
        /// Largest individual weight tried.
        #[arg(long, default_value_t = 8)]
        bound: u64,
    },
    /// Estimate pivot probabilities for one configuration.
    Simulate { config: PathBuf },
    /// Run a fairness sweep over t and weight rules; writes CSV.
    Experiment { config: PathBuf },
    /// Decisiveness of a voter among n fair-coin voters (n odd).
    Penrose { n: u64 },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Power { game } => power(&game.parse()?),
        Command::Inverse { target, federation, quota, norm, bound, method, restarts, max_steps, seed } => {
            let quota: Quota = quota.parse()?;
            let mut spec = match (target, federation) {
                (Some(t), None) => {
                    let shares = t
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| Error::InvalidArgument(format!("cannot parse target {t:?}")))?;
                    InverseProblemSpec::new(shares, quota)?
                }
                (None, Some(path)) => InverseProblemSpec::from_populations(&load_federation(path)?.sizes(), quota)?,
                _ => return Err(Error::InvalidArgument("give either a target vector or --federation".into())),
            };
            spec = spec
                .with_norm(norm.parse::<Norm>()?)
                .with_weight_sum_bound(bound)
                .with_restarts(restarts)
                .with_max_steps(max_steps)
                .with_seed(seed);
            inverse(&spec, method.parse()?)
        }
        Command::Enumerate { m, q, bound } => enumerate(m, q.parse()?, bound),
        Command::Simulate { config } => simulate(&SimulationConfig::from_file(config)?),
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(config)?;
            let result = run_experiment(&cfg)?;
            println!("t,rule,deviation,std_err_proxy");
            for r in &result.rows {
                println!("{},{},{:.6},{:.6}", r.t, r.rule, r.deviation, r.noise);
            }
            println!("wrote {} and {}", cfg.output.display(), cfg.games_path().display());
            Ok(())
        }
        Command::Penrose { n } => {
            let d = penrose_decisiveness(n)?;
            println!("exact  = {} ~ {:.8}", d.exact, d.exact_f64());
            println!("approx = {:.8}  (relative gap {:.4}%)", d.approx, 100.0 * d.relative_gap());
            Ok(())
        }
    }
}

fn power(game: &WeightedVotingGame) -> Result<()> {
    let ssi = shapley_shubik(game)?;
    let bz = banzhaf(game)?;
    println!("game: {game}");
    println!("{:>6} {:>8} {:>14} {:>10} {:>14} {:>10}", "player", "weight", "ssi", "", "banzhaf", "");
    for (i, w) in game.weights().iter().enumerate() {
        let s = &ssi.values()[i];
        println!(
            "{:>6} {:>8} {:>14} {:>10.6} {:>14} {:>10.6}",
            i + 1,
            w,
            s.to_string(),
            rational_to_f64(s),
            bz[i].to_string(),
            rational_to_f64(&bz[i])
        );
    }
    Ok(())
}

fn inverse(spec: &InverseProblemSpec, method: SolverMethod) -> Result<()> {
    let sol = solve_inverse(spec, method)?;
    println!("{}", sol.game);
    println!("{:>6} {:>8} {:>10} {:>10} {:>14}", "player", "weight", "target", "ssi", "ssi_exact");
    let achieved = sol.ssi.to_f64();
    for i in 0..spec.players() {
        println!(
            "{:>6} {:>8} {:>10.6} {:>10.6} {:>14}",
            i + 1,
            sol.game.weights()[i],
            spec.target()[i],
            achieved[i],
            sol.ssi.values()[i].to_string()
        );
    }
    let d = &sol.diagnostics;
    println!(
        "distance ({}) = {:.12}; method = {}; certified = {}; steps = {}; restarts = {}",
        spec.norm, sol.distance, sol.method, d.optimality_certified, d.steps, d.restarts_used
    );
    Ok(())
}

fn enumerate(m: usize, quota: Quota, bound: u64) -> Result<()> {
    let catalog = enumerate_game_classes(m, quota, bound)?;
    println!("{} classes (m = {m}, q = {quota}, weights 0..={bound})", catalog.len());
    for class in &catalog.classes {
        let game = class.game(quota);
        println!("{game}    ssi = {}", shapley_shubik(&game)?);
    }
    Ok(())
}

fn simulate(cfg: &SimulationConfig) -> Result<()> {
    let fed = load_federation(&cfg.federation)?;
    let game = match &cfg.game {
        Some(g) => g.clone(),
        None => build_weights(&fed, cfg.rule, cfg.quota, &cfg.weights)?,
    };
    let model = PreferenceModel::new(cfg.t, cfg.idiosyncratic, cfg.constituency)?;
    let est = estimate_pivot_probabilities(&fed, &game, &model, cfg.replications, cfg.seed)?;
    let ssi = shapley_shubik(&game)?.to_f64();
    let shares = fed.relative_sizes();
    println!("game: {game}");
    println!("t = {}, replications = {}, seed = {}", cfg.t, est.replications, est.seed);
    println!("{:<20} {:>8} {:>10} {:>10} {:>10} {:>10}", "constituency", "weight", "share", "ssi", "pi_hat", "std_err");
    for (i, c) in fed.constituencies().iter().enumerate() {
        println!(
            "{:<20} {:>8} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            c.name,
            game.weights()[i],
            shares[i],
            ssi[i],
            est.pi_hat[i],
            est.std_err[i]
        );
    }
    println!(
        "fairness deviation = {:.6} (noise proxy {:.6})",
        fairness_deviation(&est.pi_hat, &fed)?,
        est.l1_noise_proxy()
    );
    Ok(())
}
