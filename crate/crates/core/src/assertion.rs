//! Common-ground dynamics: uniform base rates, assertion as elimination,
//! truthful signal choice and the listener's Bayesian posterior.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::semantics::{evaluate_within, extension, true_throughout, Formula, TruthValue};
use crate::worlds::{format_set, Agent, Polarity, World, WorldError, WorldModel, WorldSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssertionError {
    #[error("asserting `{formula}` in common ground {live} leaves no world")]
    AbsurdUpdate { formula: String, live: String },
    #[error("agent {agent} has no assertable formula at {world}")]
    NoAssertableFormula { agent: Agent, world: World },
    #[error("signal `{0}` has zero probability in this common ground")]
    UnexpectedSignal(Formula),
    #[error("agent {0} has no recorded judgment in this model")]
    MissingJudgment(Agent),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// The live worlds at conversation time `time`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonGround<'m> {
    time: usize,
    live: WorldSet,
    model: &'m WorldModel,
}

impl<'m> CommonGround<'m> {
    /// `cg(0)`: every world of the model.
    pub fn initial(model: &'m WorldModel) -> Self {
        CommonGround {
            time: 0,
            live: model.worlds(),
            model,
        }
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn live(&self) -> &WorldSet {
        &self.live
    }

    pub fn model(&self) -> &'m WorldModel {
        self.model
    }

    /// Eliminates the worlds where `formula` is not True.
    pub fn update(&self, formula: Formula) -> Result<CommonGround<'m>, AssertionError> {
        let ext = extension(self.model, formula);
        self.narrow(&ext)
            .ok_or_else(|| AssertionError::AbsurdUpdate {
                formula: formula.to_string(),
                live: format_set(&self.live),
            })
    }

    /// Intersects the live set with `prop`; `None` if nothing survives.
    pub fn narrow(&self, prop: &WorldSet) -> Option<CommonGround<'m>> {
        let live: WorldSet = self.live.intersection(prop).copied().collect();
        if live.is_empty() {
            return None;
        }
        Some(CommonGround {
            time: self.time + 1,
            live,
            model: self.model,
        })
    }
}

/// Probability distribution over worlds.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution<T>(BTreeMap<World, T>);

impl<T: Scalar> Distribution<T> {
    pub fn get(&self, w: World) -> T {
        self.0.get(&w).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (World, T)> + '_ {
        self.0.iter().map(|(w, p)| (*w, *p))
    }

    pub fn total(&self) -> T {
        self.0.values().fold(T::zero(), |acc, &p| acc + p)
    }

    /// Worlds with non-zero mass.
    pub fn support(&self) -> WorldSet {
        self.0
            .iter()
            .filter(|(_, p)| **p != T::zero())
            .map(|(w, _)| *w)
            .collect()
    }
}

/// `p(w) = 1/|cg(t)|` for every live world.
pub fn base_rate<T: Scalar>(cg: &CommonGround<'_>) -> Distribution<T> {
    let n = T::from_usize(cg.live.len()).expect("world count fits");
    Distribution(cg.live.iter().map(|&w| (w, T::one() / n)).collect())
}

/// The strongest formula True throughout the speaker's cell at `w`.
pub fn speaker_signal(
    model: &WorldModel,
    speaker: &Agent,
    w: World,
) -> Result<Formula, AssertionError> {
    let cell = model.cell(speaker, w)?;
    Formula::BY_STRENGTH
        .into_iter()
        .find(|&f| true_throughout(model, f, cell))
        .ok_or_else(|| AssertionError::NoAssertableFormula {
            agent: speaker.clone(),
            world: w,
        })
}

/// The strongest formula True at `w` itself, evaluated within the live worlds
/// `context`: what a speaker who could single out `w` would send.
pub fn world_signal(model: &WorldModel, context: &WorldSet, w: World) -> Option<Formula> {
    Formula::BY_STRENGTH
        .into_iter()
        .find(|&f| evaluate_within(model, context, f, w) == TruthValue::True)
}

/// The bare atom a speaker sends when only `phi`/`not phi` are available: the
/// one matching her own judgment at `w`.
pub fn bare_signal(
    model: &WorldModel,
    speaker: &Agent,
    w: World,
) -> Result<Formula, AssertionError> {
    let q = model
        .judgment(speaker, Polarity::Positive)
        .ok_or_else(|| AssertionError::MissingJudgment(speaker.clone()))?;
    if !model.contains(w) {
        return Err(WorldError::UnknownWorld(w).into());
    }
    Ok(if q.extension.contains(&w) {
        Formula::PHI
    } else {
        Formula::NOT_PHI
    })
}

/// Update after a bare atom: the listener keeps the worlds where the speaker
/// would have judged that way.
pub fn bare_update<'m>(
    cg: &CommonGround<'m>,
    speaker: &Agent,
    signal: Formula,
) -> Result<CommonGround<'m>, AssertionError> {
    let polarity = match signal {
        Formula::Atom(p) => p,
        Formula::Might(_) => return Err(AssertionError::UnexpectedSignal(signal)),
    };
    let revealed = cg
        .model
        .judgment(speaker, polarity)
        .ok_or_else(|| AssertionError::MissingJudgment(speaker.clone()))?;
    cg.narrow(&revealed.extension)
        .ok_or_else(|| AssertionError::AbsurdUpdate {
            formula: signal.to_string(),
            live: format_set(&cg.live),
        })
}

/// `p(signal | world)` over the signals live in a common ground.
///
/// A signal is live when it is the [`world_signal`] of some live world, with
/// accessibility confined to the common ground. Each
/// world sends its own signal with probability `1 − ε` and spreads `ε` evenly
/// over the other live signals; with a single live signal it is sent with
/// certainty. A world with no signal of its own spreads its mass uniformly.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalLikelihoods<T> {
    signals: Vec<Formula>,
    rows: BTreeMap<(Formula, World), T>,
    epsilon: T,
}

impl<T: Scalar> SignalLikelihoods<T> {
    pub fn build(cg: &CommonGround<'_>, epsilon: T) -> Self {
        let own: BTreeMap<World, Option<Formula>> = cg
            .live
            .iter()
            .map(|&w| (w, world_signal(cg.model, &cg.live, w)))
            .collect();
        let mut signals: Vec<Formula> = own.values().flatten().copied().collect();
        signals.sort();
        signals.dedup();

        let k = T::from_usize(signals.len()).expect("signal count fits");
        let mut rows = BTreeMap::new();
        for (&w, mine) in &own {
            for &s in &signals {
                let p = match mine {
                    _ if signals.len() == 1 && mine.is_some() => T::one(),
                    Some(m) if *m == s => T::one() - epsilon,
                    Some(_) => epsilon / (k - T::one()),
                    None => T::one() / k,
                };
                rows.insert((s, w), p);
            }
        }
        SignalLikelihoods {
            signals,
            rows,
            epsilon,
        }
    }

    pub fn signals(&self) -> &[Formula] {
        &self.signals
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn get(&self, signal: Formula, w: World) -> T {
        self.rows.get(&(signal, w)).copied().unwrap_or_else(T::zero)
    }

    /// Sum of each world's row.
    pub fn row_totals(&self) -> BTreeMap<World, T> {
        let mut totals = BTreeMap::new();
        for (&(_, w), &p) in &self.rows {
            let e = totals.entry(w).or_insert_with(T::zero);
            *e = *e + p;
        }
        totals
    }
}

/// Bayes rule with the uniform base rate of `cg` as prior.
pub fn listener_posterior<T: Scalar>(
    cg: &CommonGround<'_>,
    observed: Formula,
    likelihoods: &SignalLikelihoods<T>,
) -> Result<Distribution<T>, AssertionError> {
    let prior = base_rate::<T>(cg);
    let joint: BTreeMap<World, T> = prior
        .iter()
        .map(|(w, p)| (w, likelihoods.get(observed, w) * p))
        .collect();
    let marginal = joint.values().fold(T::zero(), |acc, &p| acc + p);
    if marginal == T::zero() {
        return Err(AssertionError::UnexpectedSignal(observed));
    }
    Ok(Distribution(
        joint.into_iter().map(|(w, p)| (w, p / marginal)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::{build_forced_march, pool_states, world_set};
    use crate::Rational;
    use World as Wd;

    fn s() -> Agent {
        Agent::new("S")
    }
    fn l() -> Agent {
        Agent::new("L")
    }

    #[test]
    fn base_rates() {
        let m = WorldModel::canonical();
        let cg0 = CommonGround::initial(&m);
        let p = base_rate::<Rational>(&cg0);
        for w in m.worlds() {
            assert_eq!(p.get(w), Rational::new(1, 3));
        }
        let cg1 = cg0.update(Formula::MIGHT_PHI).unwrap();
        let p = base_rate::<Rational>(&cg1);
        assert_eq!(p.get(Wd::W1), Rational::new(1, 2));
        assert_eq!(p.get(Wd::W3), Rational::from_integer(0));
        let single = cg0.update(Formula::NOT_PHI).unwrap();
        assert_eq!(base_rate::<f64>(&single).get(Wd::W3), 1.0);
    }

    #[test]
    fn updates() {
        let m = WorldModel::canonical();
        let cg0 = CommonGround::initial(&m);
        let cg1 = cg0.update(Formula::MIGHT_PHI).unwrap();
        assert_eq!(cg1.live(), &world_set([Wd::W1, Wd::W2]));
        assert_eq!(cg1.time(), 1);
        assert_eq!(
            cg0.update(Formula::NOT_PHI).unwrap().live(),
            &world_set([Wd::W3])
        );
        let twice = cg1.update(Formula::MIGHT_PHI).unwrap();
        assert_eq!(twice.live(), cg1.live());
        assert_eq!(twice.time(), 2);
    }

    #[test]
    fn absurd_update_is_an_error() {
        let m = WorldModel::canonical();
        let cg = CommonGround::initial(&m).update(Formula::PHI).unwrap();
        let err = cg.update(Formula::NOT_PHI).unwrap_err();
        assert_eq!(
            err,
            AssertionError::AbsurdUpdate {
                formula: "not phi".into(),
                live: "{w1}".into()
            }
        );
    }

    #[test]
    fn speaker_signals() {
        let m = WorldModel::canonical();
        assert_eq!(
            speaker_signal(&m, &s(), Wd::W2).unwrap(),
            Formula::MIGHT_PHI
        );
        assert_eq!(
            speaker_signal(&m, &s(), Wd::W1).unwrap(),
            Formula::MIGHT_PHI
        );
        assert_eq!(speaker_signal(&m, &s(), Wd::W3).unwrap(), Formula::NOT_PHI);
        assert_eq!(speaker_signal(&m, &l(), Wd::W1).unwrap(), Formula::PHI);
        assert_eq!(
            speaker_signal(&m, &l(), Wd::W2).unwrap(),
            Formula::MIGHT_NOT_PHI
        );
        assert!(matches!(
            speaker_signal(&m, &Agent::new("X"), Wd::W1),
            Err(AssertionError::World(WorldError::UnknownAgent(_)))
        ));
    }

    #[test]
    fn borderline_world_with_identical_flips_has_nothing_to_say() {
        let m = pool_states(&build_forced_march(3, [("S", 2), ("L", 2)]).unwrap());
        assert_eq!(
            speaker_signal(&m, &s(), Wd::W2).unwrap_err(),
            AssertionError::NoAssertableFormula {
                agent: s(),
                world: Wd::W2
            }
        );
    }

    #[test]
    fn posterior_examples() {
        let m = WorldModel::canonical();
        let cg1 = CommonGround::initial(&m)
            .update(Formula::MIGHT_PHI)
            .unwrap();

        let lik = SignalLikelihoods::build(&cg1, Rational::from_integer(0));
        assert_eq!(lik.signals(), &[Formula::PHI, Formula::MIGHT_PHI]);
        let post = listener_posterior(&cg1, Formula::MIGHT_PHI, &lik).unwrap();
        assert_eq!(post.get(Wd::W2), Rational::from_integer(1));
        let post = listener_posterior(&cg1, Formula::PHI, &lik).unwrap();
        assert_eq!(post.get(Wd::W1), Rational::from_integer(1));

        let lik = SignalLikelihoods::build(&cg1, 0.01_f64);
        let post = listener_posterior(&cg1, Formula::MIGHT_PHI, &lik).unwrap();
        assert!((post.get(Wd::W2) - 0.99).abs() <= 1e-12);
        assert!((post.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn likelihood_rows_sum_to_one() {
        let m = WorldModel::canonical();
        let cg0 = CommonGround::initial(&m);
        let lik = SignalLikelihoods::build(&cg0, Rational::new(1, 10));
        assert_eq!(lik.signals().len(), 3);
        for (_, total) in lik.row_totals() {
            assert_eq!(total, Rational::from_integer(1));
        }
        let single = cg0.update(Formula::NOT_PHI).unwrap();
        let lik = SignalLikelihoods::build(&single, 0.01);
        assert_eq!(lik.get(Formula::NOT_PHI, Wd::W3), 1.0);
    }

    #[test]
    fn hedging_the_other_way() {
        let m = WorldModel::canonical();
        let cg1 = CommonGround::initial(&m)
            .update(Formula::MIGHT_NOT_PHI)
            .unwrap();
        assert_eq!(cg1.live(), &world_set([Wd::W2, Wd::W3]));
        let lik = SignalLikelihoods::build(&cg1, Rational::from_integer(0));
        assert_eq!(lik.signals(), &[Formula::NOT_PHI, Formula::MIGHT_NOT_PHI]);
        let post = listener_posterior(&cg1, Formula::MIGHT_NOT_PHI, &lik).unwrap();
        assert_eq!(post.get(Wd::W2), Rational::from_integer(1));
    }

    #[test]
    fn unexpected_signal() {
        let m = WorldModel::canonical();
        let cg1 = CommonGround::initial(&m)
            .update(Formula::MIGHT_PHI)
            .unwrap();
        let lik = SignalLikelihoods::build(&cg1, 0.01);
        assert_eq!(
            listener_posterior(&cg1, Formula::NOT_PHI, &lik).unwrap_err(),
            AssertionError::UnexpectedSignal(Formula::NOT_PHI)
        );
    }

    #[test]
    fn bare_protocol() {
        let m = WorldModel::canonical();
        assert_eq!(bare_signal(&m, &s(), Wd::W2).unwrap(), Formula::PHI);
        assert_eq!(bare_signal(&m, &s(), Wd::W3).unwrap(), Formula::NOT_PHI);
        let cg0 = CommonGround::initial(&m);
        let cg1 = bare_update(&cg0, &s(), Formula::PHI).unwrap();
        assert_eq!(cg1.live(), &world_set([Wd::W1, Wd::W2]));
        assert!(matches!(
            bare_update(&cg0, &s(), Formula::MIGHT_PHI),
            Err(AssertionError::UnexpectedSignal(_))
        ));
    }
}
