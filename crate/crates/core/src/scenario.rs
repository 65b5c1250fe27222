//! Scenario files and end-to-end runs.
//!
//! A scenario is a line-oriented `key = value` file with three sections:
//!
//! ```text
//! # comments start with '#'
//! [series]
//! n = 5
//! flip.S = 4
//! flip.L = 2
//!
//! [game]
//! delta = 0.7
//! gamma = 0.2
//!
//! [run]
//! speaker = S
//! world = w2
//! ```
//!
//! `[series]` takes either `canonical = true` or `n` plus one `flip.<agent>`
//! per agent. `[game]` requires `delta` and `gamma`; `tau` (0.5), `epsilon`
//! (0.01) and `payoff.<S|L>.<aa|ab|ba|bb>` (coordination table) are optional.
//! `[run]` requires `speaker` and `world`; `steps` (50), `tolerance` (1e-6) and
//! `hesitation` (0.5) are optional.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::assertion::{
    base_rate, listener_posterior, speaker_signal, AssertionError, CommonGround, Distribution,
    SignalLikelihoods,
};
use crate::game::{
    equilibrium_region, Action, ConfigError, Equilibrium, GameConfig, PayoffMatrix, Player,
};
use crate::hedging::{
    run_hedging, HedgingError, HedgingOptions, HedgingSummary, PropensityRecurrence,
};
use crate::semantics::{evaluate, extension, Formula, TruthValue};
use crate::worlds::{
    build_forced_march, pool_states, Agent, Polarity, World, WorldError, WorldModel, WorldSet,
};

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_STEPS: usize = 50;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_HESITATION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("`{key}` out of range: {message}")]
    Range { key: String, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesSpec {
    Canonical,
    ForcedMarch {
        n: usize,
        flips: BTreeMap<Agent, usize>,
    },
}

impl SeriesSpec {
    pub fn build_model(&self) -> Result<WorldModel, WorldError> {
        match self {
            SeriesSpec::Canonical => Ok(WorldModel::canonical()),
            SeriesSpec::ForcedMarch { n, flips } => {
                let series = build_forced_march(*n, flips.iter().map(|(a, f)| (a.clone(), *f)))?;
                Ok(pool_states(&series))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub speaker: Agent,
    pub world: World,
    pub steps: usize,
    pub tolerance: f64,
    pub hesitation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub series: SeriesSpec,
    pub game: GameConfig<f64>,
    pub run: RunSpec,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Series,
    Game,
    Run,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Series => "series",
            Section::Game => "game",
            Section::Run => "run",
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Tokenises `text` into per-section key/value entries.
fn read_sections(text: &str) -> Result<BTreeMap<(u8, String), Entry>, ScenarioError> {
    let mut section: Option<Section> = None;
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::Syntax {
                    line,
                    message: "unterminated section header".into(),
                })?;
            let name = name.trim();
            section = Some(match name {
                "series" => Section::Series,
                "game" => Section::Game,
                "run" => Section::Run,
                _ => {
                    return Err(ScenarioError::UnknownSection {
                        line,
                        name: name.to_string(),
                    })
                }
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ScenarioError::Syntax {
                line,
                message: format!("expected `key = value`, found {content:?}"),
            })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("malformed key {key:?}"),
            });
        }
        if value.is_empty() {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        let sec = section.ok_or_else(|| ScenarioError::Syntax {
            line,
            message: format!("`{key}` appears before any section header"),
        })?;
        if !key_allowed(sec, key) {
            return Err(ScenarioError::UnknownKey {
                line,
                section: sec.name().to_string(),
                key: key.to_string(),
            });
        }
        let slot = (sec as u8, key.to_string());
        if entries.contains_key(&slot) {
            return Err(ScenarioError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        entries.insert(
            slot,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(entries)
}

fn payoff_key(key: &str) -> Option<(Player, Action, Action)> {
    let rest = key.strip_prefix("payoff.")?;
    let (role, acts) = rest.split_once('.')?;
    let player = match role {
        "S" => Player::Speaker,
        "L" => Player::Listener,
        _ => return None,
    };
    let action = |c| match c {
        'a' => Some(Action::A),
        'b' => Some(Action::B),
        _ => None,
    };
    let mut chars = acts.chars();
    let own = action(chars.next()?)?;
    let other = action(chars.next()?)?;
    if chars.next().is_some() {
        return None;
    }
    Some((player, own, other))
}

fn key_allowed(section: Section, key: &str) -> bool {
    match section {
        Section::Series => {
            matches!(key, "n" | "canonical")
                || key
                    .strip_prefix("flip.")
                    .is_some_and(|agent| !agent.is_empty())
        }
        Section::Game => {
            matches!(key, "delta" | "gamma" | "tau" | "epsilon") || payoff_key(key).is_some()
        }
        Section::Run => matches!(
            key,
            "speaker" | "world" | "steps" | "tolerance" | "hesitation"
        ),
    }
}

struct Fields {
    entries: BTreeMap<(u8, String), Entry>,
}

impl Fields {
    fn raw(&self, section: Section, key: &str) -> Option<&Entry> {
        self.entries.get(&(section as u8, key.to_string()))
    }

    fn parse<T: std::str::FromStr>(
        &self,
        section: Section,
        key: &str,
    ) -> Result<Option<T>, ScenarioError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| ScenarioError::BadValue {
                    line: e.line,
                    key: key.to_string(),
                    value: e.value.clone(),
                }),
        }
    }

    fn required<T: std::str::FromStr>(
        &self,
        section: Section,
        key: &str,
    ) -> Result<T, ScenarioError> {
        self.parse(section, key)?
            .ok_or_else(|| ScenarioError::Missing(key.to_string()))
    }

    fn number(&self, section: Section, key: &str) -> Result<Option<f64>, ScenarioError> {
        let v: Option<f64> = self.parse(section, key)?;
        match (v, self.raw(section, key)) {
            (Some(x), Some(e)) if !x.is_finite() => Err(ScenarioError::BadValue {
                line: e.line,
                key: key.to_string(),
                value: e.value.clone(),
            }),
            _ => Ok(v),
        }
    }
}

fn range(key: &str, err: impl fmt::Display) -> ScenarioError {
    ScenarioError::Range {
        key: key.to_string(),
        message: err.to_string(),
    }
}

fn config_key(err: &ConfigError) -> String {
    match err {
        ConfigError::Delta(_) => "delta".into(),
        ConfigError::Gamma(_) => "gamma".into(),
        ConfigError::Tau(_) => "tau".into(),
        ConfigError::Epsilon(_) => "epsilon".into(),
        ConfigError::NegativePayoff {
            player, own, other, ..
        } => format!("payoff.{}.{own}{other}", player.label()),
    }
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let fields = Fields {
        entries: read_sections(text)?,
    };

    let canonical: bool = fields.parse(Section::Series, "canonical")?.unwrap_or(false);
    let flips: BTreeMap<Agent, usize> = fields
        .entries
        .iter()
        .filter(|((sec, key), _)| *sec == Section::Series as u8 && key.starts_with("flip."))
        .map(|((_, key), e)| {
            let flip = e.value.parse().map_err(|_| ScenarioError::BadValue {
                line: e.line,
                key: key.clone(),
                value: e.value.clone(),
            })?;
            Ok((Agent::new(&key["flip.".len()..]), flip))
        })
        .collect::<Result<_, ScenarioError>>()?;
    let series = if canonical {
        if let Some(e) = fields.raw(Section::Series, "n") {
            return Err(ScenarioError::Syntax {
                line: e.line,
                message: "`n` cannot be combined with `canonical = true`".into(),
            });
        }
        if let Some(((_, key), e)) = fields
            .entries
            .iter()
            .find(|((sec, key), _)| *sec == Section::Series as u8 && key.starts_with("flip."))
        {
            return Err(ScenarioError::Syntax {
                line: e.line,
                message: format!("`{key}` cannot be combined with `canonical = true`"),
            });
        }
        SeriesSpec::Canonical
    } else {
        let n: usize = fields.required(Section::Series, "n")?;
        if flips.is_empty() {
            return Err(ScenarioError::Missing("flip.<agent>".into()));
        }
        SeriesSpec::ForcedMarch { n, flips }
    };
    let model = series.build_model().map_err(|e| match &e {
        WorldError::TooFewStates(_) => range("n", e),
        WorldError::FlipOutOfRange { agent, .. } => range(&format!("flip.{agent}"), e),
        _ => range("series", e),
    })?;

    let delta = fields
        .number(Section::Game, "delta")?
        .ok_or_else(|| ScenarioError::Missing("delta".into()))?;
    let gamma = fields
        .number(Section::Game, "gamma")?
        .ok_or_else(|| ScenarioError::Missing("gamma".into()))?;
    let tau = fields.number(Section::Game, "tau")?.unwrap_or(DEFAULT_TAU);
    let epsilon = fields
        .number(Section::Game, "epsilon")?
        .unwrap_or(DEFAULT_EPSILON);
    let mut payoffs = PayoffMatrix::coordination();
    for player in Player::BOTH {
        for own in Action::BOTH {
            for other in Action::BOTH {
                let key = format!("payoff.{}.{own}{other}", player.label());
                if let Some(v) = fields.number(Section::Game, &key)? {
                    payoffs.set(player, own, other, v);
                }
            }
        }
    }
    let game = GameConfig::build(delta, gamma, tau, epsilon, payoffs)
        .map_err(|e| range(&config_key(&e), e))?;

    let speaker = Agent::new(fields.required::<String>(Section::Run, "speaker")?);
    if !model.agents().contains(&speaker) {
        return Err(range(
            "speaker",
            format!("agent {speaker} is not in the model"),
        ));
    }
    let world: World = fields.required(Section::Run, "world")?;
    if !model.contains(world) {
        return Err(range(
            "world",
            format!("{world} is not a world of the model"),
        ));
    }
    let steps = fields
        .parse(Section::Run, "steps")?
        .unwrap_or(DEFAULT_STEPS);
    if steps < 4 {
        return Err(range("steps", HedgingError::TooFewSteps(steps)));
    }
    let tolerance = fields
        .number(Section::Run, "tolerance")?
        .unwrap_or(DEFAULT_TOLERANCE);
    if tolerance < 0.0 {
        return Err(range("tolerance", "must be non-negative"));
    }
    let hesitation = fields
        .number(Section::Run, "hesitation")?
        .unwrap_or(DEFAULT_HESITATION);
    PropensityRecurrence::new(hesitation).map_err(|e| range("hesitation", e))?;

    Ok(Scenario {
        series,
        game,
        run: RunSpec {
            speaker,
            world,
            steps,
            tolerance,
            hesitation,
        },
    })
}

impl fmt::Display for Scenario {
    /// Renders the scenario in the file format; parsing the output gives back
    /// an identical scenario.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::from("[series]\n");
        match &self.series {
            SeriesSpec::Canonical => out.push_str("canonical = true\n"),
            SeriesSpec::ForcedMarch { n, flips } => {
                writeln!(out, "n = {n}")?;
                for (agent, flip) in flips {
                    writeln!(out, "flip.{agent} = {flip}")?;
                }
            }
        }
        let g = &self.game;
        write!(
            out,
            "\n[game]\ndelta = {}\ngamma = {}\ntau = {}\nepsilon = {}\n",
            g.delta(),
            g.gamma(),
            g.tau(),
            g.epsilon()
        )?;
        let table = PayoffMatrix::<f64>::coordination();
        for player in Player::BOTH {
            for own in Action::BOTH {
                for other in Action::BOTH {
                    let v = g.payoffs().get(player, own, other);
                    if v != table.get(player, own, other) {
                        writeln!(out, "payoff.{}.{own}{other} = {v}", player.label())?;
                    }
                }
            }
        }
        let r = &self.run;
        write!(
            out,
            "\n[run]\nspeaker = {}\nworld = {}\nsteps = {}\ntolerance = {}\nhesitation = {}\n",
            r.speaker, r.world, r.steps, r.tolerance, r.hesitation
        )?;
        f.write_str(&out)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("building the model: {0}")]
    Model(#[from] WorldError),
    #[error("dialogue: {0}")]
    Dialogue(#[from] AssertionError),
    #[error("hedging: {0}")]
    Hedging(#[from] HedgingError),
}

/// One step of the conversation.
#[derive(Clone, Debug, PartialEq)]
pub struct DialogueStep {
    pub time: usize,
    /// Signal applied to reach this step; `None` at time 0.
    pub signal: Option<Formula>,
    pub live: WorldSet,
    /// Listener's credence over the live worlds.
    pub posterior: Distribution<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub model: WorldModel,
    pub signal: Formula,
    pub dialogue: Vec<DialogueStep>,
    /// Whether, at the actual world, agreement in q or in q̄ is common belief
    /// within the initial common ground.
    pub public_belief_before: bool,
    /// The same after the signal's update.
    pub public_belief_after: bool,
    pub equilibrium: Equilibrium<f64>,
    pub hedging: HedgingSummary<f64>,
}

impl RunReport {
    pub fn trajectory(&self) -> Vec<WorldSet> {
        self.dialogue.iter().map(|s| s.live.clone()).collect()
    }

    pub fn final_step(&self) -> &DialogueStep {
        self.dialogue.last().expect("dialogue has an initial step")
    }

    pub fn posterior(&self) -> &Distribution<f64> {
        &self.final_step().posterior
    }

    /// Self-consistency: the signal holds at the actual world and across the
    /// worlds that survive its update, and the posterior lives inside the final
    /// common ground.
    pub fn audit(&self) -> Result<(), String> {
        let actual = self.scenario.run.world;
        if evaluate(&self.model, self.signal, actual) != TruthValue::True {
            return Err(format!("signal `{}` is not true at {actual}", self.signal));
        }
        let ext = extension(&self.model, self.signal);
        for step in &self.dialogue {
            if let Some(sig) = step.signal {
                let sig_ext = extension(&self.model, sig);
                if !step.live.is_subset(&sig_ext) {
                    return Err(format!(
                        "step {} keeps worlds where `{sig}` fails",
                        step.time
                    ));
                }
            }
        }
        let last = self.final_step();
        if !last.posterior.support().is_subset(&last.live) {
            return Err("posterior puts mass outside the common ground".into());
        }
        if !last.live.is_subset(&ext) {
            return Err("final common ground not contained in the signal's extension".into());
        }
        Ok(())
    }
}

fn public_at(model: &WorldModel, live: &WorldSet, w: World) -> bool {
    [Polarity::Positive, Polarity::Negative]
        .into_iter()
        .any(|p| model.common_belief(&model.all_judge(p), live).contains(&w))
}

/// Pools the model, lets the speaker assert at the actual world, updates the
/// common ground, computes the listener's posterior, classifies the
/// equilibrium region and runs the hedging process.
pub fn run_scenario(scenario: &Scenario) -> Result<RunReport, RunError> {
    let model = scenario.series.build_model()?;
    let run = &scenario.run;
    let game = &scenario.game;

    let cg0 = CommonGround::initial(&model);
    let signal = speaker_signal(&model, &run.speaker, run.world)?;
    let cg1 = cg0.update(signal)?;
    let likelihoods = SignalLikelihoods::build(&cg1, game.epsilon());
    let posterior = listener_posterior(&cg1, signal, &likelihoods)?;

    let dialogue = vec![
        DialogueStep {
            time: cg0.time(),
            signal: None,
            live: cg0.live().clone(),
            posterior: base_rate(&cg0),
        },
        DialogueStep {
            time: cg1.time(),
            signal: Some(signal),
            live: cg1.live().clone(),
            posterior,
        },
    ];

    let public_belief_before = public_at(&model, cg0.live(), run.world);
    let public_belief_after = public_at(&model, cg1.live(), run.world);

    let mut options = HedgingOptions::new(run.steps, run.tolerance);
    options.recurrence = PropensityRecurrence::new(run.hesitation)?;
    let hedging = run_hedging(game, &options)?.summary;

    Ok(RunReport {
        scenario: scenario.clone(),
        signal,
        dialogue,
        public_belief_before,
        public_belief_after,
        equilibrium: equilibrium_region(game),
        hedging,
        model,
    })
}
