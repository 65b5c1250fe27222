//! CSV and JSON renderings of runs, sweeps, hedging traces and frame checks.
//!
//! Numbers are rounded to 12 significant digits and printed with a `.`
//! decimal separator and no exponent in CSV; JSON carries the same rounded
//! values.

use serde_json::{json, Value};

use crate::game::SweepRow;
use crate::hedging::{HedgingSummary, HedgingTrace};
use crate::scenario::{DialogueStep, RunReport};
use crate::semantics::FrameReport;
use crate::worlds::{World, WorldSet};

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn fmt_num(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn num(x: f64) -> Value {
    json!(round_sig(x))
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn worlds_json(set: &WorldSet) -> Value {
    Value::Array(set.iter().map(|w| json!(w.to_string())).collect())
}

fn worlds_text(set: &WorldSet) -> String {
    set.iter()
        .map(World::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub const SWEEP_COLUMNS: [&str; 8] = [
    "delta", "gamma", "p_w1", "p_w2", "p_w3", "eu_a", "eu_b", "region",
];

pub fn sweep_csv(rows: &[SweepRow<f64>]) -> String {
    csv_string(
        &SWEEP_COLUMNS,
        rows.iter().map(|r| {
            vec![
                fmt_num(r.delta),
                fmt_num(r.gamma),
                fmt_num(r.prior[0]),
                fmt_num(r.prior[1]),
                fmt_num(r.prior[2]),
                fmt_num(r.eu_a),
                fmt_num(r.eu_b),
                r.region.to_string(),
            ]
        }),
    )
}

/// One JSON object per row; also carries `p(q_L | q_S)`.
pub fn sweep_json(rows: &[SweepRow<f64>]) -> String {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "delta": num(r.delta),
                "gamma": num(r.gamma),
                "p_w1": num(r.prior[0]),
                "p_w2": num(r.prior[1]),
                "p_w3": num(r.prior[2]),
                "eu_a": num(r.eu_a),
                "eu_b": num(r.eu_b),
                "listener_given_speaker": num(r.listener_given_speaker),
                "region": r.region.to_string(),
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&rows).expect("json");
    out.push('\n');
    out
}

pub const HEDGE_COLUMNS: [&str; 5] = ["n", "p_speaker_a", "p_listener_a", "eu_a", "eu_b"];

pub fn hedging_csv(trace: &HedgingTrace<f64>) -> String {
    csv_string(
        &HEDGE_COLUMNS,
        trace.steps.iter().map(|s| {
            vec![
                s.n.to_string(),
                fmt_num(s.p_speaker_a),
                fmt_num(s.p_listener_a),
                fmt_num(s.eu_a),
                fmt_num(s.eu_b),
            ]
        }),
    )
}

fn summary_json(s: &HedgingSummary<f64>) -> Value {
    json!({
        "even_tail": num(s.even_tail),
        "odd_tail": num(s.odd_tail),
        "last_pair_sum": num(s.last_pair_sum),
        "pair_sums_converged": s.pair_sums_converged,
        "pair_sums_at_least_one": s.pair_sums_at_least_one,
        "pair_sums_non_increasing": s.pair_sums_non_increasing,
        "dominates_step_zero": s.dominates_step_zero,
    })
}

pub fn hedging_json(trace: &HedgingTrace<f64>) -> String {
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "n": s.n,
                "p_speaker_a": num(s.p_speaker_a),
                "p_listener_a": num(s.p_listener_a),
                "eu_a": num(s.eu_a),
                "eu_b": num(s.eu_b),
            })
        })
        .collect();
    let doc = json!({
        "delta": num(trace.config.delta()),
        "gamma": num(trace.config.gamma()),
        "steps": steps,
        "summary": summary_json(&trace.summary),
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("json");
    out.push('\n');
    out
}

fn dialogue_record(step: &DialogueStep) -> Value {
    let posterior: serde_json::Map<String, Value> = step
        .posterior
        .iter()
        .map(|(w, p)| (w.to_string(), num(p)))
        .collect();
    json!({
        "kind": "step",
        "time": step.time,
        "signal": step.signal.map(|f| f.to_string()),
        "live": worlds_json(&step.live),
        "posterior": posterior,
    })
}

fn run_summary(report: &RunReport) -> Value {
    let model = &report.model;
    let partitions: serde_json::Map<String, Value> = model
        .agents()
        .iter()
        .map(|a| {
            let cells = model
                .partition(a)
                .expect("model agent")
                .iter()
                .map(worlds_json)
                .collect();
            (a.to_string(), Value::Array(cells))
        })
        .collect();
    let eq = &report.equilibrium;
    json!({
        "kind": "summary",
        "speaker": report.scenario.run.speaker.to_string(),
        "world": report.scenario.run.world.to_string(),
        "signal": report.signal.to_string(),
        "model": {
            "worlds": worlds_json(&model.worlds()),
            "partitions": partitions,
            "phi": worlds_json(model.atom_extension(crate::worlds::Polarity::Positive)),
            "not_phi": worlds_json(model.atom_extension(crate::worlds::Polarity::Negative)),
        },
        "trajectory": report.trajectory().iter().map(worlds_json).collect::<Vec<_>>(),
        "public_belief_before": report.public_belief_before,
        "public_belief_after": report.public_belief_after,
        "equilibrium": {
            "region": eq.region.to_string(),
            "eu_a": num(eq.eu_a),
            "eu_b": num(eq.eu_b),
            "gamma_bound_a": num(eq.gamma_bound_a),
            "gamma_bound_b": num(eq.gamma_bound_b),
        },
        "hedging": summary_json(&report.hedging),
    })
}

/// JSON lines: one `step` record per dialogue step, then one `summary` record.
pub fn run_jsonl(report: &RunReport) -> String {
    let mut out = String::new();
    for step in &report.dialogue {
        out.push_str(&dialogue_record(step).to_string());
        out.push('\n');
    }
    out.push_str(&run_summary(report).to_string());
    out.push('\n');
    out
}

/// The dialogue as CSV; `live` is space-separated and `posterior` holds
/// `world=probability` pairs.
pub fn run_csv(report: &RunReport) -> String {
    csv_string(
        &["time", "signal", "live", "posterior"],
        report.dialogue.iter().map(|s| {
            let posterior = s
                .posterior
                .iter()
                .map(|(w, p)| format!("{w}={}", fmt_num(p)))
                .collect::<Vec<_>>()
                .join(" ");
            vec![
                s.time.to_string(),
                s.signal.map(|f| f.to_string()).unwrap_or_default(),
                worlds_text(&s.live),
                posterior,
            ]
        }),
    )
}

pub fn frame_text(report: &FrameReport) -> String {
    format!("{report}\n")
}

pub fn frame_json(report: &FrameReport) -> String {
    let witness = report
        .witness
        .map(|(x, y, z)| json!([x.to_string(), y.to_string(), z.to_string()]));
    let doc = json!({
        "reflexive": report.reflexive,
        "symmetric": report.symmetric,
        "transitive": report.transitive,
        "witness": witness,
    });
    format!("{doc}\n")
}

pub fn frame_csv(report: &FrameReport) -> String {
    let witness = report
        .witness
        .map(|(x, y, z)| format!("{x} {y} {z}"))
        .unwrap_or_default();
    csv_string(
        &["reflexive", "symmetric", "transitive", "witness"],
        [vec![
            report.reflexive.to_string(),
            report.symmetric.to_string(),
            report.transitive.to_string(),
            witness,
        ]],
    )
}
