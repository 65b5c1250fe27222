//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use modal_hedge::assertion::{bare_signal, bare_update};
use modal_hedge::cli::dispatch;
use modal_hedge::game::{delta_grid, equilibrium_region, gamma_grid};
use modal_hedge::worlds::world_set;
use modal_hedge::*;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn samples<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| {
            strategy
                .new_tree(&mut runner)
                .expect("strategy generates")
                .current()
        })
        .collect()
}

/// Plain iteration of the recurrence, kept apart from the library's.
fn reference_recurrence(last: usize) -> Vec<f64> {
    let mut f = vec![1.0, 0.5];
    while f.len() <= last {
        let n = f.len();
        f.push(f[n - 2] / (f[n - 1] + f[n - 2]));
    }
    f
}

fn recurrence_reproduction() -> Outcome {
    let f = PropensityRecurrence::<f64>::default().values(3);
    ensure!(
        f[0] == 1.0 && f[1] == 0.5,
        "f(0), f(1) = {}, {}",
        f[0],
        f[1]
    );
    ensure!((f[2] - 0.666).abs() <= 1e-3, "f(2) = {}", f[2]);
    ensure!((f[3] - 0.428).abs() <= 1e-3, "f(3) = {}", f[3]);
    let exact = PropensityRecurrence::<Rational>::default().values(3);
    ensure!(
        exact[2] == Rational::new(2, 3) && exact[3] == Rational::new(3, 7),
        "exact values {:?}",
        exact
    );
    Ok(format!("f(2) = {:.6}, f(3) = {:.6}", f[2], f[3]))
}

fn oscillation_bands() -> Outcome {
    let f = PropensityRecurrence::<f64>::default().values(201);
    let reference = reference_recurrence(201);
    for (n, (x, y)) in f.iter().zip(&reference).enumerate() {
        ensure!(
            (x - y).abs() <= 1e-15,
            "f({n}) disagrees with reference iteration"
        );
    }
    for (n, x) in f.iter().enumerate().take(201).skip(4) {
        let band = if n % 2 == 0 { 0.55..=0.70 } else { 0.35..=0.50 };
        ensure!(band.contains(x), "f({n}) = {x} outside {band:?}");
    }
    let mut worst: f64 = 0.0;
    for n in 40..=200 {
        let gap = (f[n] + f[n + 1] - 1.0).abs();
        ensure!(gap <= 1e-2, "f({n}) + f({}) = {}", n + 1, f[n] + f[n + 1]);
        worst = worst.max(gap);
    }
    Ok(format!(
        "even tail {:.6}, odd tail {:.6}, max pair-sum gap for n >= 40 {worst:.2e}",
        f[200], f[201]
    ))
}

fn posterior_reproduction() -> Outcome {
    let model = WorldModel::canonical();
    let cg1 = CommonGround::initial(&model)
        .update(Formula::MIGHT_PHI)
        .map_err(|e| e.to_string())?;
    ensure!(
        cg1.live() == &world_set([World::W1, World::W2]),
        "cg(1) = {:?}",
        cg1.live()
    );
    let lik = SignalLikelihoods::build(&cg1, Rational::from_integer(0));
    let exact = listener_posterior(&cg1, Formula::MIGHT_PHI, &lik).map_err(|e| e.to_string())?;
    ensure!(
        exact.get(World::W2) == Rational::from_integer(1),
        "eps = 0: p'(w2) = {}",
        exact.get(World::W2)
    );
    let lik = SignalLikelihoods::build(&cg1, 0.0_f64);
    let p0 = listener_posterior(&cg1, Formula::MIGHT_PHI, &lik).map_err(|e| e.to_string())?;
    ensure!(
        p0.get(World::W2) == 1.0,
        "eps = 0 (f64): p'(w2) = {}",
        p0.get(World::W2)
    );
    let lik = SignalLikelihoods::build(&cg1, 0.01_f64);
    let p = listener_posterior(&cg1, Formula::MIGHT_PHI, &lik).map_err(|e| e.to_string())?;
    ensure!(
        (p.get(World::W2) - 0.99).abs() <= 1e-12,
        "eps = 0.01: p'(w2) = {}",
        p.get(World::W2)
    );
    Ok(format!(
        "p'(w2) = 1 at eps = 0, {} at eps = 0.01",
        p.get(World::W2)
    ))
}

fn oracle_agreement() -> Outcome {
    let configs = samples(common::config(), 1000);
    let mut worst: f64 = 0.0;
    for cfg in &configs {
        for player in [Player::Speaker, Player::Listener] {
            for action in [Action::A, Action::B] {
                let gap = (expected_utility(cfg, player, action)
                    - brute_force_eu(cfg, player, action))
                .abs();
                ensure!(gap <= 1e-12, "{cfg:?} {player:?} {action:?}: gap {gap:e}");
                worst = worst.max(gap);
            }
        }
    }
    for (d, g) in [(7, 2), (1, 3), (9, 0), (1, 2)] {
        let (d, g) = (Rational::new(d, 10), Rational::new(g, 10));
        let cfg = GameConfig::new(d, g).map_err(|e| e.to_string())?;
        let one = Rational::from_integer(1);
        for player in [Player::Speaker, Player::Listener] {
            ensure!(
                expected_utility(&cfg, player, Action::A) == d * (one - g),
                "eu(a) at {d}, {g}"
            );
            ensure!(
                expected_utility(&cfg, player, Action::B) == (one - d) * (one - g),
                "eu(b) at {d}, {g}"
            );
            ensure!(
                brute_force_eu(&cfg, player, Action::A) == d * (one - g),
                "oracle eu(a) at {d}, {g}"
            );
        }
    }
    Ok(format!(
        "1000 configs x 2 players x 2 actions, max gap {worst:.1e}"
    ))
}

fn threshold_frontier() -> Outcome {
    let deltas: Vec<f64> = delta_grid(99);
    let gammas: Vec<f64> = gamma_grid(99);
    let rows = threshold_sweep(&deltas, &gammas, 0.5).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 99 * 99, "{} rows", rows.len());
    let mut aa = 0;
    for (idx, row) in rows.iter().enumerate() {
        let (d, g) = (deltas[idx / 99], gammas[idx % 99]);
        ensure!(
            row.delta == d && row.gamma == g,
            "row {idx} out of grid order"
        );
        let expected = d > 0.5 && g < 1.0 - 1.0 / (2.0 * d);
        ensure!(
            (row.region == Region::CoordinateA) == expected,
            "delta {d}, gamma {g}: {}",
            row.region
        );
        aa += usize::from(expected);
    }
    let mut probes = 0;
    for &d in deltas.iter().filter(|&&d| d > 0.5) {
        let bound = 1.0 - 1.0 / (2.0 * d);
        for (g, want) in [
            (bound - 1e-9, Region::CoordinateA),
            (bound + 1e-9, Region::Neither),
        ] {
            if !(0.0..1.0).contains(&g) {
                continue;
            }
            let cfg = GameConfig::new(d, g).map_err(|e| e.to_string())?;
            let got = equilibrium_region(&cfg).region;
            ensure!(got == want, "delta {d}, gamma bound {bound} {g:+e}: {got}");
            probes += 1;
        }
    }
    Ok(format!(
        "{aa} AA cells of {}, {probes} boundary probes",
        rows.len()
    ))
}

fn monotonicity_claim() -> Outcome {
    let deltas: Vec<f64> = delta_grid(20);
    let gammas: Vec<f64> = gamma_grid(20);
    let mut worst_n3: f64 = 0.0;
    for &d in &deltas {
        for &g in &gammas {
            let cfg = GameConfig::new(d, g).map_err(|e| e.to_string())?;
            for player in [Player::Speaker, Player::Listener] {
                for action in [Action::A, Action::B] {
                    let base = stepwise_eu(&cfg, player, 0, action);
                    for n in 1..=100 {
                        let eu = stepwise_eu(&cfg, player, n, action);
                        ensure!(
                            eu >= base,
                            "delta {d}, gamma {g}, {player:?} {action:?}, n {n}: {eu} < {base}"
                        );
                    }
                }
                let n3 = stepwise_eu(&cfg, player, 3, Action::A);
                let gap = (n3 - (d * (1.0 - g) + g * 0.285)).abs();
                ensure!(gap <= 2e-3, "n = 3 at delta {d}, gamma {g}: {n3}");
                worst_n3 = worst_n3.max(gap);
            }
        }
    }
    Ok(format!(
        "20x20 grid, n <= 100; n = 3 max deviation {worst_n3:.2e}"
    ))
}

fn frame_properties() -> Outcome {
    let report = check_frame(&WorldModel::canonical());
    ensure!(report.reflexive && report.symmetric, "{report}");
    ensure!(!report.transitive, "{report}");
    ensure!(
        report.witness == Some((World::W1, World::W2, World::W3)),
        "{report}"
    );
    Ok(report.to_string())
}

fn public_belief_dynamics() -> Outcome {
    let model = WorldModel::canonical();
    let speaker = Agent::new("S");
    let all_not_q = model.all_judge(Polarity::Negative);
    let cg0 = CommonGround::initial(&model);
    let before = model.common_belief(&all_not_q, cg0.live());
    ensure!(before.is_empty(), "before any signal: {before:?}");

    let signal = speaker_signal(&model, &speaker, World::W3).map_err(|e| e.to_string())?;
    ensure!(signal == Formula::NOT_PHI, "speaker at w3 sends {signal}");
    let cg1 = cg0.update(signal).map_err(|e| e.to_string())?;
    let after = model.common_belief(&all_not_q, cg1.live());
    ensure!(after.contains(&World::W3), "after `not phi`: {after:?}");

    // Without modals, the speaker at w2 can only say `phi`; nothing becomes public.
    let bare = bare_signal(&model, &speaker, World::W2).map_err(|e| e.to_string())?;
    let cg_bare = bare_update(&cg0, &speaker, bare).map_err(|e| e.to_string())?;
    let all_q = model.all_judge(Polarity::Positive);
    ensure!(
        model.common_belief(&all_q, cg_bare.live()).is_empty()
            && model.common_belief(&all_not_q, cg_bare.live()).is_empty(),
        "bare `{bare}` from w2 made a belief public"
    );
    Ok(format!(
        "empty before; {} after `not phi` from w3",
        worlds::format_set(&after)
    ))
}

fn pooling_soundness() -> Outcome {
    let marches = samples(common::forced_march(), 1000);
    for series in &marches {
        let model = pool_states(series);
        let hi = series.max_flip();
        let vectors: Vec<_> = (0..=series.len())
            .map(|t| series.judgment_vector(t))
            .collect();
        for s in 1..=series.len() {
            for t in 1..=series.len() {
                if s == hi || t == hi {
                    continue;
                }
                let same_vector = vectors[s] == vectors[t];
                let same_world = series.uber_state(s) == series.uber_state(t);
                let borderline = series.uber_state(s) == World::W2;
                // Outside the borderline pool, grouping is exactly by vector.
                ensure!(
                    !same_vector || same_world,
                    "{series:?}: states {s}, {t} agree but are split"
                );
                ensure!(
                    borderline || !same_world || same_vector,
                    "{series:?}: states {s}, {t} pooled despite differing"
                );
            }
        }
        ensure!(
            vectors[hi].iter().all(|&p| p == Polarity::Negative),
            "{series:?}: closing state is not all q-bar"
        );
        let oracle: WorldSet = model
            .worlds()
            .into_iter()
            .filter(|&w| {
                model.members(w).unwrap().iter().any(|&t| {
                    t != hi
                        && series
                            .agents()
                            .any(|a| series.judgment(a, t).unwrap() == Polarity::Positive)
                })
            })
            .collect();
        let might = extension(&model, Formula::MIGHT_PHI);
        ensure!(
            might == oracle,
            "{series:?}: might-phi {might:?} vs {oracle:?}"
        );
    }
    Ok(format!("{} random forced marches", marches.len()))
}

fn cli_golden() -> Outcome {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let scenario = golden.join("canonical.scenario");
    let expected =
        fs::read_to_string(golden.join("simulate_canonical.jsonl")).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = dispatch(
            ["modal-hedge", "simulate", scenario.to_str().unwrap()],
            &mut out,
            &mut err,
        );
        ensure!(code == 0, "exit {code}: {}", String::from_utf8_lossy(&err));
        outputs.push(String::from_utf8(out).map_err(|e| e.to_string())?);
    }
    ensure!(outputs[0] == outputs[1], "output differs between runs");
    ensure!(outputs[0] == expected, "output differs from golden file");

    let records: Vec<serde_json::Value> = outputs[0]
        .lines()
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let summary = records.last().unwrap();
    ensure!(
        summary["signal"] == "might phi",
        "signal {}",
        summary["signal"]
    );
    ensure!(
        summary["trajectory"] == serde_json::json!([["w1", "w2", "w3"], ["w1", "w2"]]),
        "trajectory {}",
        summary["trajectory"]
    );
    let p = records[1]["posterior"]["w2"].as_f64().unwrap_or(f64::NAN);
    ensure!((p - (1.0 - 0.01)).abs() <= 1e-12, "posterior at w2 {p}");
    Ok("simulate output byte-identical to golden file".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("recurrence reproduction", recurrence_reproduction),
        ("oscillation bands", oscillation_bands),
        ("posterior reproduction", posterior_reproduction),
        ("closed form vs oracle", oracle_agreement),
        ("threshold frontier", threshold_frontier),
        ("step-zero dominance", monotonicity_claim),
        ("frame properties", frame_properties),
        ("public-belief dynamics", public_belief_dynamics),
        ("pooling soundness", pooling_soundness),
        ("CLI golden files", cli_golden),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
