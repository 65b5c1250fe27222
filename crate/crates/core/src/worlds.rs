//! Forced-march scenarios, their pooling into three uber-states, and the
//! doxastic operators over per-agent partitions.
//!
//! Sorites states are numbered from 1. Worlds are numbered from 0 internally
//! and displayed as `w1`, `w2`, `w3`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub usize);

impl World {
    /// All agents judge q.
    pub const W1: World = World(0);
    /// Borderline pool.
    pub const W2: World = World(1);
    /// All agents judge q̄.
    pub const W3: World = World(2);
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0 + 1)
    }
}

impl Serialize for World {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for World {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let digits = t
            .strip_prefix('w')
            .or_else(|| t.strip_prefix('W'))
            .ok_or_else(|| WorldError::BadWorldName(s.to_string()))?;
        match digits.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(World(n - 1)),
            _ => Err(WorldError::BadWorldName(s.to_string())),
        }
    }
}

pub type WorldSet = BTreeSet<World>;

pub fn world_set<I: IntoIterator<Item = World>>(worlds: I) -> WorldSet {
    worlds.into_iter().collect()
}

/// Renders a world set as `{w1,w2}`.
pub fn format_set(set: &WorldSet) -> String {
    let inner: Vec<String> = set.iter().map(World::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

/// Opaque agent label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Agent(String);

impl Agent {
    pub fn new(label: impl Into<String>) -> Self {
        Agent(label.into())
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Agent {
    fn from(s: &str) -> Self {
        Agent::new(s)
    }
}

impl From<String> for Agent {
    fn from(s: String) -> Self {
        Agent(s)
    }
}

/// q / q̄ for judgments, φ / ¬φ for atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("a forced march needs at least 3 states, got {0}")]
    TooFewStates(usize),
    #[error("a forced march needs at least one agent")]
    NoAgents,
    #[error("flip index {flip} for agent {agent} is outside [2, {n}]")]
    FlipOutOfRange { agent: Agent, flip: usize, n: usize },
    #[error("unknown agent {0}")]
    UnknownAgent(Agent),
    #[error("unknown world {0}")]
    UnknownWorld(World),
    #[error("not a world name: {0:?}")]
    BadWorldName(String),
    #[error("partition of agent {agent} is invalid: {reason}")]
    InvalidPartition { agent: Agent, reason: String },
    #[error("invalid valuation: {0}")]
    InvalidValuation(String),
    #[error("invalid judgment for agent {0}: extension outside the world set")]
    InvalidJudgment(Agent),
}

/// A forced march over states `t1..tn`, with one flip index per agent.
///
/// An agent judges q strictly before its flip and q̄ from the flip onwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoritesSeries {
    len: usize,
    flips: BTreeMap<Agent, usize>,
}

impl SoritesSeries {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flips(&self) -> &BTreeMap<Agent, usize> {
        &self.flips
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.flips.keys()
    }

    pub fn min_flip(&self) -> usize {
        *self.flips.values().min().expect("series has agents")
    }

    pub fn max_flip(&self) -> usize {
        *self.flips.values().max().expect("series has agents")
    }

    /// Judgment of `agent` at state `t` (1-based).
    pub fn judgment(&self, agent: &Agent, t: usize) -> Result<Polarity, WorldError> {
        let flip = self
            .flips
            .get(agent)
            .ok_or_else(|| WorldError::UnknownAgent(agent.clone()))?;
        Ok(if t < *flip {
            Polarity::Positive
        } else {
            Polarity::Negative
        })
    }

    /// Judgments of every agent at `t`, in agent order.
    pub fn judgment_vector(&self, t: usize) -> Vec<Polarity> {
        self.flips
            .values()
            .map(|&flip| {
                if t < flip {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                }
            })
            .collect()
    }

    /// States at which agents do not all agree.
    pub fn disagreement_states(&self) -> Vec<usize> {
        (1..=self.len)
            .filter(|&t| {
                let v = self.judgment_vector(t);
                v.iter().any(|&p| p != v[0])
            })
            .collect()
    }

    /// Uber-state a Sorites state is pooled into.
    pub fn uber_state(&self, t: usize) -> World {
        let (lo, hi) = (self.min_flip(), self.max_flip());
        if t < lo {
            World::W1
        } else if t <= hi {
            World::W2
        } else {
            World::W3
        }
    }
}

pub fn build_forced_march<A, I>(n: usize, flips: I) -> Result<SoritesSeries, WorldError>
where
    A: Into<Agent>,
    I: IntoIterator<Item = (A, usize)>,
{
    if n < 3 {
        return Err(WorldError::TooFewStates(n));
    }
    let mut map = BTreeMap::new();
    for (agent, flip) in flips {
        let agent = agent.into();
        if !(2..=n).contains(&flip) {
            return Err(WorldError::FlipOutOfRange { agent, flip, n });
        }
        map.insert(agent, flip);
    }
    if map.is_empty() {
        return Err(WorldError::NoAgents);
    }
    Ok(SoritesSeries { len: n, flips: map })
}

/// The worlds where one agent judges q (or q̄).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JudgmentProposition {
    pub agent: Agent,
    pub polarity: Polarity,
    pub extension: WorldSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldModel {
    agents: Vec<Agent>,
    world_count: usize,
    partitions: BTreeMap<Agent, Vec<WorldSet>>,
    phi: WorldSet,
    not_phi: WorldSet,
    /// Per agent, the worlds where it judges q.
    judgments: BTreeMap<Agent, WorldSet>,
    /// Sorites states behind each world, for pooled models.
    members: Option<Vec<Vec<usize>>>,
}

impl WorldModel {
    /// Builds and validates a model. Partition cells must be disjoint and
    /// cover `0..world_count`; the φ and ¬φ extensions may leave a gap but
    /// must not overlap.
    pub fn new(
        agents: Vec<Agent>,
        world_count: usize,
        partitions: BTreeMap<Agent, Vec<WorldSet>>,
        phi: WorldSet,
        not_phi: WorldSet,
    ) -> Result<Self, WorldError> {
        if agents.is_empty() {
            return Err(WorldError::NoAgents);
        }
        let all: WorldSet = (0..world_count).map(World).collect();
        for agent in &agents {
            let cells = partitions
                .get(agent)
                .ok_or_else(|| WorldError::InvalidPartition {
                    agent: agent.clone(),
                    reason: "missing".into(),
                })?;
            let mut seen = WorldSet::new();
            for cell in cells {
                if cell.is_empty() {
                    return Err(WorldError::InvalidPartition {
                        agent: agent.clone(),
                        reason: "empty cell".into(),
                    });
                }
                for w in cell {
                    if !all.contains(w) {
                        return Err(WorldError::UnknownWorld(*w));
                    }
                    if !seen.insert(*w) {
                        return Err(WorldError::InvalidPartition {
                            agent: agent.clone(),
                            reason: format!("{w} appears in two cells"),
                        });
                    }
                }
            }
            if seen != all {
                return Err(WorldError::InvalidPartition {
                    agent: agent.clone(),
                    reason: "cells do not cover the world set".into(),
                });
            }
        }
        if !phi.is_subset(&all) || !not_phi.is_subset(&all) {
            return Err(WorldError::InvalidValuation(
                "atom extension outside the world set".into(),
            ));
        }
        if !phi.is_disjoint(&not_phi) {
            return Err(WorldError::InvalidValuation(
                "phi and not-phi overlap".into(),
            ));
        }
        Ok(WorldModel {
            agents,
            world_count,
            partitions,
            phi,
            not_phi,
            judgments: BTreeMap::new(),
            members: None,
        })
    }

    /// Attaches per-agent q-extensions.
    pub fn with_judgments(
        mut self,
        q_extensions: BTreeMap<Agent, WorldSet>,
    ) -> Result<Self, WorldError> {
        let all = self.worlds();
        for (agent, ext) in &q_extensions {
            if !self.agents.contains(agent) {
                return Err(WorldError::UnknownAgent(agent.clone()));
            }
            if !ext.is_subset(&all) {
                return Err(WorldError::InvalidJudgment(agent.clone()));
            }
        }
        self.judgments = q_extensions;
        Ok(self)
    }

    /// The two-agent model of the forced march `n=5, S flips at 4, L at 2`:
    /// `Π_S = {{w1,w2},{w3}}`, `Π_L = {{w1},{w2,w3}}`.
    pub fn canonical() -> Self {
        let series = build_forced_march(5, [("S", 4), ("L", 2)]).expect("canonical series");
        pool_states(&series)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn world_count(&self) -> usize {
        self.world_count
    }

    pub fn worlds(&self) -> WorldSet {
        (0..self.world_count).map(World).collect()
    }

    pub fn contains(&self, w: World) -> bool {
        w.0 < self.world_count
    }

    pub fn partition(&self, agent: &Agent) -> Result<&[WorldSet], WorldError> {
        self.partitions
            .get(agent)
            .map(Vec::as_slice)
            .ok_or_else(|| WorldError::UnknownAgent(agent.clone()))
    }

    pub fn atom_extension(&self, polarity: Polarity) -> &WorldSet {
        match polarity {
            Polarity::Positive => &self.phi,
            Polarity::Negative => &self.not_phi,
        }
    }

    /// Sorites states pooled into `w`, when the model came from a forced march.
    pub fn members(&self, w: World) -> Option<&[usize]> {
        self.members
            .as_ref()
            .and_then(|m| m.get(w.0))
            .map(Vec::as_slice)
    }

    fn check_world(&self, w: World) -> Result<(), WorldError> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(WorldError::UnknownWorld(w))
        }
    }

    /// `π_i(w)`.
    pub fn cell(&self, agent: &Agent, w: World) -> Result<&WorldSet, WorldError> {
        self.check_world(w)?;
        self.partition(agent)?
            .iter()
            .find(|cell| cell.contains(&w))
            .ok_or(WorldError::UnknownWorld(w))
    }

    /// `i` thinks `prop` at `w` iff `π_i(w) ⊆ prop`.
    pub fn thinks(&self, agent: &Agent, prop: &WorldSet, w: World) -> Result<bool, WorldError> {
        Ok(self.cell(agent, w)?.is_subset(prop))
    }

    /// One application of the everyone-thinks operator within `restriction`:
    /// `{w ∈ R : ∀i, π_i(w) ∩ R ⊆ X}`.
    pub fn everyone_thinks(&self, prop: &WorldSet, restriction: &WorldSet) -> WorldSet {
        restriction
            .iter()
            .copied()
            .filter(|w| self.contains(*w))
            .filter(|&w| {
                self.agents.iter().all(|agent| {
                    let cell = self.cell(agent, w).expect("world checked");
                    cell.intersection(restriction).all(|v| prop.contains(v))
                })
            })
            .collect()
    }

    /// Worlds of `restriction` where `prop` is public: the greatest fixpoint
    /// reached by iterating [`Self::everyone_thinks`] from `prop ∩ restriction`.
    pub fn common_belief(&self, prop: &WorldSet, restriction: &WorldSet) -> WorldSet {
        let mut current: WorldSet = prop.intersection(restriction).copied().collect();
        loop {
            let next = self.everyone_thinks(&current, restriction);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    /// `w'` is accessible from `w` iff some agent's cell at `w` contains `w'`.
    pub fn accessible(&self, w: World, w2: World) -> bool {
        self.agents.iter().any(|agent| {
            self.cell(agent, w)
                .map(|cell| cell.contains(&w2))
                .unwrap_or(false)
        })
    }

    pub fn accessible_from(&self, w: World) -> WorldSet {
        self.worlds()
            .into_iter()
            .filter(|&v| self.accessible(w, v))
            .collect()
    }

    pub fn judgment(&self, agent: &Agent, polarity: Polarity) -> Option<JudgmentProposition> {
        let q = self.judgments.get(agent)?;
        let extension = match polarity {
            Polarity::Positive => q.clone(),
            Polarity::Negative => self.worlds().difference(q).copied().collect(),
        };
        Some(JudgmentProposition {
            agent: agent.clone(),
            polarity,
            extension,
        })
    }

    /// Worlds where every agent with a recorded judgment judges `polarity`.
    pub fn all_judge(&self, polarity: Polarity) -> WorldSet {
        let mut acc = self.worlds();
        for agent in self.judgments.keys() {
            let ext = self.judgment(agent, polarity).expect("present").extension;
            acc = acc.intersection(&ext).copied().collect();
        }
        acc
    }

    /// Worlds where at least one agent judges `polarity`.
    pub fn some_judge(&self, polarity: Polarity) -> WorldSet {
        self.judgments
            .keys()
            .flat_map(|agent| self.judgment(agent, polarity).expect("present").extension)
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Signature {
    Judged(Polarity),
    Alone(World),
}

/// Pools a forced march into the uber-states
/// `w1 = {t < min}`, `w2 = {min ≤ t ≤ max}`, `w3 = {t > max}` over the flip indices.
///
/// Each agent's partition groups the uber-states on which it issues the same
/// judgment. On `w2` that judgment is read off the disagreement core
/// `[min, max)` at its first state `t = min`: agents flipping at `min` judge q̄
/// there, all others q. When every agent flips at the same state the core is
/// empty and `w2` sits in a cell of its own for everyone.
///
/// `w3` may pool no states at all when the last flip is at `tn`; it is still a
/// world of the model.
pub fn pool_states(series: &SoritesSeries) -> WorldModel {
    let (lo, hi) = (series.min_flip(), series.max_flip());
    let members = vec![
        (1..lo).collect::<Vec<_>>(),
        (lo..=hi).collect(),
        (hi + 1..=series.len()).collect(),
    ];
    let core_empty = lo == hi;

    let mut partitions = BTreeMap::new();
    let mut judgments = BTreeMap::new();
    for (agent, &flip) in series.flips() {
        let borderline = if flip > lo {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        let signatures = [
            Signature::Judged(Polarity::Positive),
            if core_empty {
                Signature::Alone(World::W2)
            } else {
                Signature::Judged(borderline)
            },
            Signature::Judged(Polarity::Negative),
        ];
        let mut cells: BTreeMap<Signature, WorldSet> = BTreeMap::new();
        for (i, sig) in signatures.into_iter().enumerate() {
            cells.entry(sig).or_default().insert(World(i));
        }
        let mut cells: Vec<WorldSet> = cells.into_values().collect();
        cells.sort();
        partitions.insert(agent.clone(), cells);

        let mut q = world_set([World::W1]);
        if borderline == Polarity::Positive && !core_empty {
            q.insert(World::W2);
        }
        judgments.insert(agent.clone(), q);
    }

    let agents: Vec<Agent> = series.agents().cloned().collect();
    let mut model = WorldModel::new(
        agents,
        3,
        partitions,
        world_set([World::W1]),
        world_set([World::W3]),
    )
    .expect("pooled partitions are valid by construction")
    .with_judgments(judgments)
    .expect("pooled judgments are valid by construction");
    model.members = Some(members);
    model
}
