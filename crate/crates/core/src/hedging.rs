//! Iterated expectation building after a hedged assertion.
//!
//! Speaker and listener take turns renormalising their propensity to play `a`
//! against the other's latest value:
//!
//! ```text
//! f(0) = 1,  f(1) = h,  f(n) = f(n-2) / (f(n-1) + f(n-2))
//! ```
//!
//! with hesitation prior `h = 1/2` by default. Even indices are the speaker's
//! propensities, odd indices the listener's. Propensities for `b` are the
//! complements.

use serde::Serialize;
use thiserror::Error;

use crate::game::{expected_utility, Action, GameConfig, Player};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HedgingError {
    #[error("hesitation prior must lie in (0, 1], got {0}")]
    Hesitation(f64),
    #[error("a hedging run needs at least 4 steps, got {0}")]
    TooFewSteps(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropensityRecurrence<T> {
    hesitation: T,
}

impl<T: Scalar> Default for PropensityRecurrence<T> {
    fn default() -> Self {
        PropensityRecurrence {
            hesitation: T::half(),
        }
    }
}

impl<T: Scalar> PropensityRecurrence<T> {
    pub fn new(hesitation: T) -> Result<Self, HedgingError> {
        if hesitation > T::zero() && hesitation <= T::one() {
            Ok(PropensityRecurrence { hesitation })
        } else {
            Err(HedgingError::Hesitation(hesitation.to_f64_lossy()))
        }
    }

    pub fn hesitation(&self) -> T {
        self.hesitation
    }

    /// `f(0..=last)`.
    pub fn values(&self, last: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(last + 1);
        out.push(T::one());
        if last >= 1 {
            out.push(self.hesitation);
        }
        for n in 2..=last {
            let (prev2, prev1) = (out[n - 2], out[n - 1]);
            out.push(prev2 / (prev1 + prev2));
        }
        out
    }

    pub fn value(&self, n: usize) -> T {
        let (mut prev2, mut prev1) = (T::one(), self.hesitation);
        match n {
            0 => prev2,
            1 => prev1,
            _ => {
                for _ in 2..=n {
                    let next = prev2 / (prev1 + prev2);
                    prev2 = prev1;
                    prev1 = next;
                }
                prev1
            }
        }
    }
}

/// `f(n)` with the default hesitation prior.
pub fn propensity(n: usize) -> f64 {
    PropensityRecurrence::default().value(n)
}

/// Probability each role plays `a` at a step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Propensities<T> {
    pub speaker_a: T,
    pub listener_a: T,
}

impl<T: Scalar> Propensities<T> {
    pub fn for_action(&self, action: Action) -> (T, T) {
        match action {
            Action::A => (self.speaker_a, self.listener_a),
            Action::B => (T::one() - self.speaker_a, T::one() - self.listener_a),
        }
    }
}

fn step_propensities<T: Scalar>(values: &[T], n: usize) -> Propensities<T> {
    if n == 0 {
        return Propensities {
            speaker_a: T::one(),
            listener_a: T::zero(),
        };
    }
    let even = n - n % 2;
    let odd = if n % 2 == 1 { n } else { n - 1 };
    Propensities {
        speaker_a: values[even],
        listener_a: values[odd],
    }
}

/// Step 0 is `(1, 0)`: before the hedge the listener never plays `a`. From
/// step 1 on, the speaker holds the latest even-indexed value and the listener
/// the latest odd-indexed one.
pub fn propensities_at_step<T: Scalar>(
    recurrence: &PropensityRecurrence<T>,
    n: usize,
) -> Propensities<T> {
    step_propensities(&recurrence.values(n), n)
}

/// `eu(x) + γ · p_S(x) · p_L(x) · u(x, x)`.
pub fn stepwise_eu_from<T: Scalar>(
    config: &GameConfig<T>,
    player: Player,
    action: Action,
    propensities: &Propensities<T>,
) -> T {
    let (ps, pl) = propensities.for_action(action);
    expected_utility(config, player, action)
        + config.gamma() * ps * pl * config.payoffs().get(player, action, action)
}

/// Expected utility of `action` after `n` rounds of expectation building, with
/// the default hesitation prior.
pub fn stepwise_eu<T: Scalar>(
    config: &GameConfig<T>,
    player: Player,
    n: usize,
    action: Action,
) -> T {
    let props = propensities_at_step(&PropensityRecurrence::default(), n);
    stepwise_eu_from(config, player, action, &props)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HedgingOptions<T> {
    pub max_steps: usize,
    pub tolerance: T,
    pub recurrence: PropensityRecurrence<T>,
    /// Whose utilities the trace records.
    pub player: Player,
}

impl<T: Scalar> HedgingOptions<T> {
    pub fn new(max_steps: usize, tolerance: T) -> Self {
        HedgingOptions {
            max_steps,
            tolerance,
            recurrence: PropensityRecurrence::default(),
            player: Player::Speaker,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HedgingStep<T> {
    pub n: usize,
    pub p_speaker_a: T,
    pub p_listener_a: T,
    pub eu_a: T,
    pub eu_b: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HedgingSummary<T> {
    /// `f` at the last even index of the run.
    pub even_tail: T,
    /// `f` at the last odd index of the run.
    pub odd_tail: T,
    /// `f(N-1) + f(N)` at the end of the run.
    pub last_pair_sum: T,
    /// `|last_pair_sum − 1| ≤ tolerance`.
    pub pair_sums_converged: bool,
    /// `f(n) + f(n+1) ≥ 1` for every `n ≥ 2` in the run.
    pub pair_sums_at_least_one: bool,
    /// The pair sums never increase from `n = 2` on.
    pub pair_sums_non_increasing: bool,
    /// `eu⁰(x) ≤ euⁿ(x)` for both actions at every recorded step.
    pub dominates_step_zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HedgingTrace<T> {
    pub config: GameConfig<T>,
    pub steps: Vec<HedgingStep<T>>,
    pub summary: HedgingSummary<T>,
}

pub fn run_hedging<T: Scalar>(
    config: &GameConfig<T>,
    options: &HedgingOptions<T>,
) -> Result<HedgingTrace<T>, HedgingError> {
    let last = options.max_steps;
    if last < 4 {
        return Err(HedgingError::TooFewSteps(last));
    }
    let values = options.recurrence.values(last);
    let steps: Vec<HedgingStep<T>> = (0..=last)
        .map(|n| {
            let props = step_propensities(&values, n);
            HedgingStep {
                n,
                p_speaker_a: props.speaker_a,
                p_listener_a: props.listener_a,
                eu_a: stepwise_eu_from(config, options.player, Action::A, &props),
                eu_b: stepwise_eu_from(config, options.player, Action::B, &props),
            }
        })
        .collect();

    let pair_sums: Vec<T> = (2..last).map(|n| values[n] + values[n + 1]).collect();
    let last_pair_sum = values[last - 1] + values[last];
    let gap = if last_pair_sum > T::one() {
        last_pair_sum - T::one()
    } else {
        T::one() - last_pair_sum
    };
    let first = steps[0];
    let summary = HedgingSummary {
        even_tail: values[last - last % 2],
        odd_tail: values[if last % 2 == 1 { last } else { last - 1 }],
        last_pair_sum,
        pair_sums_converged: gap <= options.tolerance,
        pair_sums_at_least_one: pair_sums.iter().all(|&s| s >= T::one()),
        pair_sums_non_increasing: pair_sums.windows(2).all(|w| w[1] <= w[0]),
        dominates_step_zero: steps
            .iter()
            .all(|s| first.eu_a <= s.eu_a && first.eu_b <= s.eu_b),
    };
    Ok(HedgingTrace {
        config: *config,
        steps,
        summary,
    })
}
