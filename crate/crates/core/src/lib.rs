//! Power indices, inverse weight design and a Monte Carlo median-voter
//! simulator for two-tier voting systems.

pub mod canonical;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod game;
pub mod inverse;
pub mod power;
pub mod shock;
pub mod simulate;

pub use canonical::{canonicalize, enumerate_game_classes, CanonicalGameSignature, GameClass, GameClassCatalog};
pub use error::{Error, Result};
pub use inverse::{distance, solve_exhaustive, solve_local_search, InverseProblemSpec, InverseSolution, Norm};
pub use game::{Coalition, Quota, WeightedVotingGame};
pub use power::{banzhaf, penrose_decisiveness, shapley_permutation_oracle, shapley_shubik, PowerVector};
pub use federation::{load_federation, Constituency, FederationSpec};
pub use shock::{sample_median_shock, ShockDistribution};
pub use simulate::{
    estimate_pivot_probabilities, fairness_deviation, ordering_match_rate, pivotal_index, sample_delegate_ideals,
    voter_influence, PivotEstimate, PreferenceModel,
};
pub use experiment::{build_weights, run_experiment, ExperimentConfig, ExperimentResult, WeightRule, WeightSettings};
