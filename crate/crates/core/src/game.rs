//! Coordination payoffs, the three-point prior over pooled worlds, expected
//! utilities and the confidence-threshold classification.
//!
//! The doxastic structure is the canonical two-player one: the speaker judges
//! q on `{w1, w2}`, the listener only on `{w1}`. Joint events therefore read
//! off directly: `q_S ∧ q_L = {w1}`, `q_S ∧ q̄_L = {w2}`, `q̄_S ∧ q̄_L = {w3}`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::worlds::{Agent, Polarity, World, WorldModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Action {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

impl Action {
    pub const BOTH: [Action; 2] = [Action::A, Action::B];

    pub fn other(self) -> Action {
        match self {
            Action::A => Action::B,
            Action::B => Action::A,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::A => "a",
            Action::B => "b",
        })
    }
}

/// The two roles of the canonical game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Player {
    /// Judges q on the borderline world too (the later flipper, `S`).
    Speaker,
    /// Judges q̄ on the borderline world (the earlier flipper, `L`).
    Listener,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::Speaker, Player::Listener];

    pub fn opponent(self) -> Player {
        match self {
            Player::Speaker => Player::Listener,
            Player::Listener => Player::Speaker,
        }
    }

    /// Agent label this role has in [`WorldModel::canonical`].
    pub fn canonical_agent(self) -> Agent {
        match self {
            Player::Speaker => Agent::new("S"),
            Player::Listener => Agent::new("L"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Player::Speaker => "S",
            Player::Listener => "L",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    Delta(f64),
    #[error("gamma must lie in [0, 1), got {0}")]
    Gamma(f64),
    #[error("tau must lie strictly between 0 and 1, got {0}")]
    Tau(f64),
    #[error("epsilon must lie in [0, 0.5), got {0}")]
    Epsilon(f64),
    #[error("payoff u({player:?}, {own}, {other}) is negative: {value}")]
    NegativePayoff {
        player: Player,
        own: Action,
        other: Action,
        value: f64,
    },
}

/// `u(player, own action, other's action)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffMatrix<T> {
    values: [[[T; 2]; 2]; 2],
}

impl<T: Scalar> PayoffMatrix<T> {
    /// 1 for matching actions, 0 otherwise, for both players.
    pub fn coordination() -> Self {
        let row = [[T::one(), T::zero()], [T::zero(), T::one()]];
        PayoffMatrix { values: [row, row] }
    }

    pub fn get(&self, player: Player, own: Action, other: Action) -> T {
        self.values[player.index()][own.index()][other.index()]
    }

    pub fn set(&mut self, player: Player, own: Action, other: Action, value: T) {
        self.values[player.index()][own.index()][other.index()] = value;
    }

    pub fn with(mut self, player: Player, own: Action, other: Action, value: T) -> Self {
        self.set(player, own, other, value);
        self
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for player in Player::BOTH {
            for own in Action::BOTH {
                for other in Action::BOTH {
                    let v = self.get(player, own, other);
                    if v < T::zero() {
                        return Err(ConfigError::NegativePayoff {
                            player,
                            own,
                            other,
                            value: v.to_f64_lossy(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Default for PayoffMatrix<T> {
    fn default() -> Self {
        Self::coordination()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameConfig<T> {
    delta: T,
    gamma: T,
    tau: T,
    epsilon: T,
    payoffs: PayoffMatrix<T>,
}

impl<T: Scalar> GameConfig<T> {
    /// `tau` defaults to 1/2, `epsilon` to 1/100, payoffs to the coordination table.
    pub fn new(delta: T, gamma: T) -> Result<Self, ConfigError> {
        Self::build(
            delta,
            gamma,
            T::half(),
            T::ratio(1, 100),
            PayoffMatrix::coordination(),
        )
    }

    pub fn build(
        delta: T,
        gamma: T,
        tau: T,
        epsilon: T,
        payoffs: PayoffMatrix<T>,
    ) -> Result<Self, ConfigError> {
        let (zero, one) = (T::zero(), T::one());
        if !(delta > zero && delta < one) {
            return Err(ConfigError::Delta(delta.to_f64_lossy()));
        }
        if !(gamma >= zero && gamma < one) {
            return Err(ConfigError::Gamma(gamma.to_f64_lossy()));
        }
        if !(tau > zero && tau < one) {
            return Err(ConfigError::Tau(tau.to_f64_lossy()));
        }
        if !(epsilon >= zero && epsilon < T::half()) {
            return Err(ConfigError::Epsilon(epsilon.to_f64_lossy()));
        }
        payoffs.validate()?;
        Ok(GameConfig {
            delta,
            gamma,
            tau,
            epsilon,
            payoffs,
        })
    }

    pub fn with_tau(self, tau: T) -> Result<Self, ConfigError> {
        Self::build(self.delta, self.gamma, tau, self.epsilon, self.payoffs)
    }

    pub fn with_epsilon(self, epsilon: T) -> Result<Self, ConfigError> {
        Self::build(self.delta, self.gamma, self.tau, epsilon, self.payoffs)
    }

    pub fn with_payoffs(self, payoffs: PayoffMatrix<T>) -> Result<Self, ConfigError> {
        Self::build(self.delta, self.gamma, self.tau, self.epsilon, payoffs)
    }

    pub fn delta(&self) -> T {
        self.delta
    }
    pub fn gamma(&self) -> T {
        self.gamma
    }
    pub fn tau(&self) -> T {
        self.tau
    }
    pub fn epsilon(&self) -> T {
        self.epsilon
    }
    pub fn payoffs(&self) -> &PayoffMatrix<T> {
        &self.payoffs
    }
}

/// Prior over `w1, w2, w3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldPrior<T> {
    probabilities: [T; 3],
}

impl<T: Scalar> WorldPrior<T> {
    pub fn get(&self, w: World) -> T {
        self.probabilities.get(w.0).copied().unwrap_or_else(T::zero)
    }

    pub fn as_array(&self) -> [T; 3] {
        self.probabilities
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().fold(T::zero(), |acc, &p| acc + p)
    }
}

/// `p(w1) = δ(1−γ)`, `p(w2) = γ`, `p(w3) = (1−δ)(1−γ)`.
pub fn world_priors<T: Scalar>(config: &GameConfig<T>) -> WorldPrior<T> {
    let (d, g) = (config.delta, config.gamma);
    let one = T::one();
    WorldPrior {
        probabilities: [d * (one - g), g, (one - d) * (one - g)],
    }
}

/// Closed-form expected utility of `action` for `player`:
/// `p(x_i ∧ x_j)·u_i(x,x) + p(x_i ∧ y_j)·u_i(x,y)`, where `x_i` is the event
/// that `i` judges in favour of `x`.
pub fn expected_utility<T: Scalar>(config: &GameConfig<T>, player: Player, action: Action) -> T {
    let prior = world_priors(config);
    let (p1, p2, p3) = (
        prior.get(World::W1),
        prior.get(World::W2),
        prior.get(World::W3),
    );
    let u = |own, other| config.payoffs.get(player, own, other);
    match (player, action) {
        // S plays a on {w1, w2}; L agrees only on w1.
        (Player::Speaker, Action::A) => p1 * u(Action::A, Action::A) + p2 * u(Action::A, Action::B),
        (Player::Speaker, Action::B) => p3 * u(Action::B, Action::B),
        (Player::Listener, Action::A) => p1 * u(Action::A, Action::A),
        // L plays b on {w2, w3}; S agrees only on w3.
        (Player::Listener, Action::B) => {
            p3 * u(Action::B, Action::B) + p2 * u(Action::B, Action::A)
        }
    }
}

/// Enumerates the canonical model's worlds. At each one both players act on
/// their own judgment (a iff they think q) and `player`'s payoff is accumulated,
/// prior-weighted, over the worlds where it plays `action`.
pub fn brute_force_eu<T: Scalar>(config: &GameConfig<T>, player: Player, action: Action) -> T {
    let model = WorldModel::canonical();
    let prior = world_priors(config);
    let choice = |who: Player, w: World| {
        let agent = who.canonical_agent();
        let q = model
            .judgment(&agent, Polarity::Positive)
            .expect("canonical model carries judgments")
            .extension;
        if model.thinks(&agent, &q, w).expect("canonical world") {
            Action::A
        } else {
            Action::B
        }
    };
    model
        .worlds()
        .into_iter()
        .filter(|&w| choice(player, w) == action)
        .fold(T::zero(), |acc, w| {
            let other = choice(player.opponent(), w);
            acc + prior.get(w) * config.payoffs.get(player, action, other)
        })
}

/// `p(q_L | q_S) = δ(1−γ) / (δ(1−γ) + γ)`.
pub fn listener_agrees_given_speaker<T: Scalar>(config: &GameConfig<T>) -> T {
    let prior = world_priors(config);
    let p1 = prior.get(World::W1);
    p1 / (p1 + prior.get(World::W2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    #[serde(rename = "AA")]
    CoordinateA,
    #[serde(rename = "BB")]
    CoordinateB,
    #[serde(rename = "None")]
    Neither,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::CoordinateA => "AA",
            Region::CoordinateB => "BB",
            Region::Neither => "None",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equilibrium<T> {
    pub region: Region,
    /// Speaker's expected utilities; identical for both players under the
    /// coordination table.
    pub eu_a: T,
    pub eu_b: T,
    /// `1 − τ/δ`: `(a,a)` is actionable below this γ.
    pub gamma_bound_a: T,
    /// `1 − τ/(1−δ)`.
    pub gamma_bound_b: T,
}

pub fn equilibrium_region<T: Scalar>(config: &GameConfig<T>) -> Equilibrium<T> {
    let one = T::one();
    let (d, g, tau) = (config.delta, config.gamma, config.tau);
    let gamma_bound_a = one - tau / d;
    let gamma_bound_b = one - tau / (one - d);
    let region = if d > one - d && g < gamma_bound_a {
        Region::CoordinateA
    } else if one - d > d && g < gamma_bound_b {
        Region::CoordinateB
    } else {
        Region::Neither
    };
    Equilibrium {
        region,
        eu_a: expected_utility(config, Player::Speaker, Action::A),
        eu_b: expected_utility(config, Player::Speaker, Action::B),
        gamma_bound_a,
        gamma_bound_b,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub delta: T,
    pub gamma: T,
    pub prior: [T; 3],
    pub eu_a: T,
    pub eu_b: T,
    pub listener_given_speaker: T,
    pub region: Region,
}

/// `k` values `i/(k+1)`, strictly inside (0, 1).
pub fn delta_grid<T: Scalar>(k: u32) -> Vec<T> {
    (1..=k).map(|i| T::ratio(i, k + 1)).collect()
}

/// `k` values `j/k` for `j = 0..k`, covering [0, 1).
pub fn gamma_grid<T: Scalar>(k: u32) -> Vec<T> {
    (0..k).map(|j| T::ratio(j, k)).collect()
}

/// Classifies every `(δ, γ)` pair under the coordination table. Rows come out
/// δ-major in grid order; cells are evaluated in parallel.
pub fn threshold_sweep<T: Scalar>(
    deltas: &[T],
    gammas: &[T],
    tau: T,
) -> Result<Vec<SweepRow<T>>, ConfigError> {
    let cells: Vec<(T, T)> = deltas
        .iter()
        .flat_map(|&d| gammas.iter().map(move |&g| (d, g)))
        .collect();
    cells
        .par_iter()
        .map(|&(delta, gamma)| {
            let config = GameConfig::new(delta, gamma)?.with_tau(tau)?;
            let eq = equilibrium_region(&config);
            Ok(SweepRow {
                delta,
                gamma,
                prior: world_priors(&config).as_array(),
                eu_a: eq.eu_a,
                eu_b: eq.eu_b,
                listener_given_speaker: listener_agrees_given_speaker(&config),
                region: eq.region,
            })
        })
        .collect()
}
