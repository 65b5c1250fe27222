//! Coordination under vagueness-driven uncertainty, and how hedged assertions
//! ("might φ") improve it.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! * [`worlds`]: forced-march series, their pooling into three uber-states,
//!   per-agent partitions and the doxastic operators (thinks, common belief).
//! * [`semantics`]: the four signals `phi`, `not phi`, `might phi`,
//!   `might not phi`, with three-valued atoms and frame checks.
//! * [`game`]: coordination payoffs, the (δ, γ) prior, expected utilities and
//!   confidence-threshold regions.
//! * [`assertion`]: common ground, assertion as elimination, truthful signal
//!   choice and the listener's posterior.
//! * [`hedging`]: the alternating propensity recurrence and step-indexed
//!   expected utilities.
//! * [`scenario`], [`report`], [`cli`]: scenario files, end-to-end runs and
//!   CSV/JSON output.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the common
//! choices.

pub mod assertion;
pub mod cli;
pub mod game;
pub mod hedging;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod semantics;
pub mod worlds;

pub use assertion::{
    base_rate, listener_posterior, speaker_signal, AssertionError, CommonGround, Distribution,
    SignalLikelihoods,
};
pub use game::{
    brute_force_eu, equilibrium_region, expected_utility, threshold_sweep, world_priors, Action,
    ConfigError, Equilibrium, GameConfig, PayoffMatrix, Player, Region, SweepRow, WorldPrior,
};
pub use hedging::{
    propensities_at_step, propensity, run_hedging, stepwise_eu, HedgingError, HedgingOptions,
    HedgingStep, HedgingSummary, HedgingTrace, Propensities, PropensityRecurrence,
};
pub use scalar::Scalar;
pub use scenario::{parse_scenario, run_scenario, RunReport, Scenario, ScenarioError};
pub use semantics::{check_frame, evaluate, extension, Formula, FrameReport, TruthValue};
pub use worlds::{
    build_forced_march, pool_states, Agent, Polarity, SoritesSeries, World, WorldError, WorldModel,
    WorldSet,
};

/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;

pub type Config = GameConfig<f64>;
pub type Config32 = GameConfig<f32>;
pub type ExactConfig = GameConfig<Rational>;

pub type Trace = HedgingTrace<f64>;
pub type ExactTrace = HedgingTrace<Rational>;

pub type Posterior = Distribution<f64>;
pub type ExactPosterior = Distribution<Rational>;

pub type Likelihoods = SignalLikelihoods<f64>;
pub type ExactLikelihoods = SignalLikelihoods<Rational>;
