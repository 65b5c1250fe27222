//! The four-sentence signal language and its evaluation over a [`WorldModel`].

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::worlds::{Polarity, World, WorldModel, WorldSet};

/// `phi`, `not phi`, `might phi`, `might not phi`.
///
/// The derived order runs from strongest to weakest signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Polarity),
    Might(Polarity),
}

impl Formula {
    pub const PHI: Formula = Formula::Atom(Polarity::Positive);
    pub const NOT_PHI: Formula = Formula::Atom(Polarity::Negative);
    pub const MIGHT_PHI: Formula = Formula::Might(Polarity::Positive);
    pub const MIGHT_NOT_PHI: Formula = Formula::Might(Polarity::Negative);

    /// Strongest first.
    pub const BY_STRENGTH: [Formula; 4] = [
        Formula::PHI,
        Formula::NOT_PHI,
        Formula::MIGHT_PHI,
        Formula::MIGHT_NOT_PHI,
    ];

    pub fn is_modal(self) -> bool {
        matches!(self, Formula::Might(_))
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Formula::Atom(Polarity::Positive) => "φ",
            Formula::Atom(Polarity::Negative) => "¬φ",
            Formula::Might(Polarity::Positive) => "◇φ",
            Formula::Might(Polarity::Negative) => "◇¬φ",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formula::Atom(Polarity::Positive) => "phi",
            Formula::Atom(Polarity::Negative) => "not phi",
            Formula::Might(Polarity::Positive) => "might phi",
            Formula::Might(Polarity::Negative) => "might not phi",
        })
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse formula {0:?}; expected `phi`, `not phi`, `might phi` or `might not phi`")]
pub struct FormulaParseError(pub String);

impl FromStr for Formula {
    type Err = FormulaParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let tokens: Vec<&str> = lower.split(' ').collect();
        match tokens.as_slice() {
            ["phi"] => Ok(Formula::PHI),
            ["not", "phi"] => Ok(Formula::NOT_PHI),
            ["might", "phi"] => Ok(Formula::MIGHT_PHI),
            ["might", "not", "phi"] => Ok(Formula::MIGHT_NOT_PHI),
            _ => Err(FormulaParseError(s.to_string())),
        }
    }
}

/// Atoms get a gap at borderline worlds; modal formulas are always bivalent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TruthValue {
    True,
    False,
    Gap,
}

pub fn evaluate(model: &WorldModel, formula: Formula, w: World) -> TruthValue {
    evaluate_within(model, &model.worlds(), formula, w)
}

/// Evaluation with accessibility confined to `context`, the live worlds of a
/// conversation.
pub fn evaluate_within(
    model: &WorldModel,
    context: &WorldSet,
    formula: Formula,
    w: World,
) -> TruthValue {
    match formula {
        Formula::Atom(p) => {
            if model.atom_extension(p).contains(&w) {
                TruthValue::True
            } else if model.atom_extension(p.flip()).contains(&w) {
                TruthValue::False
            } else {
                TruthValue::Gap
            }
        }
        Formula::Might(p) => {
            let witnessed = model
                .accessible_from(w)
                .into_iter()
                .filter(|v| context.contains(v))
                .any(|v| evaluate_within(model, context, Formula::Atom(p), v) == TruthValue::True);
            if witnessed {
                TruthValue::True
            } else {
                TruthValue::False
            }
        }
    }
}

/// `{w : evaluate(f, w) = True}`.
pub fn extension(model: &WorldModel, formula: Formula) -> WorldSet {
    model
        .worlds()
        .into_iter()
        .filter(|&w| evaluate(model, formula, w) == TruthValue::True)
        .collect()
}

/// Whether `formula` is True at every world of `worlds`.
pub fn true_throughout(model: &WorldModel, formula: Formula, worlds: &WorldSet) -> bool {
    worlds
        .iter()
        .all(|&w| evaluate(model, formula, w) == TruthValue::True)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameReport {
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    /// First `(x, y, z)` with `xRy`, `yRz` and not `xRz`.
    pub witness: Option<(World, World, World)>,
}

impl fmt::Display for FrameReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |ok: bool, name: &str| {
            if ok {
                name.to_string()
            } else {
                format!("non-{name}")
            }
        };
        write!(
            f,
            "{} {} {}",
            word(self.reflexive, "reflexive"),
            word(self.symmetric, "symmetric"),
            word(self.transitive, "transitive")
        )?;
        if let Some((x, y, z)) = self.witness {
            write!(f, ", witness ({x},{y},{z})")?;
        }
        Ok(())
    }
}

/// Checks the accessibility relation by exhaustive enumeration.
pub fn check_frame(model: &WorldModel) -> FrameReport {
    let worlds: Vec<World> = model.worlds().into_iter().collect();
    let reflexive = worlds.iter().all(|&w| model.accessible(w, w));
    let symmetric = worlds.iter().all(|&x| {
        worlds
            .iter()
            .all(|&y| !model.accessible(x, y) || model.accessible(y, x))
    });
    let mut witness = None;
    'outer: for &x in &worlds {
        for &y in &worlds {
            if !model.accessible(x, y) {
                continue;
            }
            for &z in &worlds {
                if model.accessible(y, z) && !model.accessible(x, z) {
                    witness = Some((x, y, z));
                    break 'outer;
                }
            }
        }
    }
    FrameReport {
        reflexive,
        symmetric,
        transitive: witness.is_none(),
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::{build_forced_march, pool_states, world_set, Agent};
    use std::collections::BTreeMap;
    use World as Wd;

    #[test]
    fn might_phi_on_canonical_model() {
        let m = WorldModel::canonical();
        assert_eq!(evaluate(&m, Formula::MIGHT_PHI, Wd::W1), TruthValue::True);
        assert_eq!(evaluate(&m, Formula::MIGHT_PHI, Wd::W2), TruthValue::True);
        assert_eq!(evaluate(&m, Formula::MIGHT_PHI, Wd::W3), TruthValue::False);
        assert_eq!(evaluate(&m, Formula::PHI, Wd::W2), TruthValue::Gap);
        assert_eq!(evaluate(&m, Formula::NOT_PHI, Wd::W1), TruthValue::False);
    }

    #[test]
    fn extensions_on_canonical_model() {
        let m = WorldModel::canonical();
        assert_eq!(
            extension(&m, Formula::MIGHT_PHI),
            world_set([Wd::W1, Wd::W2])
        );
        assert_eq!(extension(&m, Formula::PHI), world_set([Wd::W1]));
        assert_eq!(extension(&m, Formula::NOT_PHI), world_set([Wd::W3]));
        assert_eq!(
            extension(&m, Formula::MIGHT_NOT_PHI),
            world_set([Wd::W2, Wd::W3])
        );
    }

    #[test]
    fn frame_of_canonical_model() {
        let report = check_frame(&WorldModel::canonical());
        assert!(report.reflexive && report.symmetric && !report.transitive);
        assert_eq!(report.witness, Some((Wd::W1, Wd::W2, Wd::W3)));
        assert_eq!(
            report.to_string(),
            "reflexive symmetric non-transitive, witness (w1,w2,w3)"
        );
    }

    #[test]
    fn frame_of_single_world() {
        let s = Agent::new("S");
        let mut parts = BTreeMap::new();
        parts.insert(s.clone(), vec![world_set([Wd::W1])]);
        let m = WorldModel::new(vec![s], 1, parts, world_set([Wd::W1]), WorldSet::new()).unwrap();
        let r = check_frame(&m);
        assert!(r.reflexive && r.symmetric && r.transitive);
        assert_eq!(r.witness, None);
    }

    #[test]
    fn frame_of_identical_flips() {
        let m = pool_states(&build_forced_march(3, [("S", 2), ("L", 2)]).unwrap());
        let r = check_frame(&m);
        assert!(r.transitive);
        assert_eq!(r.to_string(), "reflexive symmetric transitive");
    }

    #[test]
    fn context_confines_accessibility() {
        let m = WorldModel::canonical();
        let cg1 = world_set([Wd::W1, Wd::W2]);
        assert_eq!(
            evaluate(&m, Formula::MIGHT_NOT_PHI, Wd::W2),
            TruthValue::True
        );
        assert_eq!(
            evaluate_within(&m, &cg1, Formula::MIGHT_NOT_PHI, Wd::W2),
            TruthValue::False
        );
        assert_eq!(
            evaluate_within(&m, &cg1, Formula::MIGHT_PHI, Wd::W2),
            TruthValue::True
        );
    }

    #[test]
    fn formula_syntax() {
        for f in Formula::BY_STRENGTH {
            assert_eq!(f.to_string().parse::<Formula>().unwrap(), f);
        }
        assert_eq!(
            "Might Not PHI".parse::<Formula>().unwrap(),
            Formula::MIGHT_NOT_PHI
        );
        assert!("might  phi".parse::<Formula>().is_err());
        assert!("might might phi".parse::<Formula>().is_err());
        assert!("not might phi".parse::<Formula>().is_err());
    }

    #[test]
    fn strength_order_matches_derived_order() {
        let mut sorted = Formula::BY_STRENGTH;
        sorted.sort();
        assert_eq!(sorted, Formula::BY_STRENGTH);
    }
}
