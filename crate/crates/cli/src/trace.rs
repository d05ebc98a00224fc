//! JSONL traces: record 0 is the starting configuration, each later record
//! the step that produced it.

use std::io::{self, BufRead, Write};

use rand::Rng;
use rsx_core::congruence::canonicalize;
use rsx_core::semantics::{apply, enumerate, find_redex, Direction, LabelView, Redex, Rule};
use rsx_core::surface::load_config;
use rsx_core::Configuration;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub direction: Option<Direction>,
    pub rule: Option<Rule>,
    pub label: Option<LabelView>,
    pub redex: Option<String>,
    pub config: String,
}

impl TraceRecord {
    pub fn start(m: &Configuration) -> Self {
        TraceRecord { step: 0, direction: None, rule: None, label: None, redex: None, config: canonicalize(m).text() }
    }

    pub fn step(step: usize, r: &Redex, after: &Configuration) -> Self {
        TraceRecord {
            step,
            direction: Some(r.direction()),
            rule: Some(r.rule),
            label: Some(LabelView::from(&r.label())),
            redex: Some(r.key()),
            config: canonicalize(after).text(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    First,
    Random,
}

/// Takes up to `steps` steps in `dir`, choosing among enabled redexes by
/// `policy`. Returns the trace and the final configuration.
pub fn walk(
    start: Configuration,
    dir: Direction,
    steps: usize,
    policy: Policy,
    rng: &mut impl Rng,
) -> (Vec<TraceRecord>, Configuration) {
    let mut trace = vec![TraceRecord::start(&start)];
    let mut cur = start;
    for i in 1..=steps {
        let (fw, bw) = enumerate(&cur);
        let options = if dir == Direction::Forward { fw } else { bw };
        if options.is_empty() {
            break;
        }
        let pick = match policy {
            Policy::First => 0,
            Policy::Random => rng.gen_range(0..options.len()),
        };
        let r = &options[pick];
        cur = apply(&cur, r).expect("enumerated redexes apply");
        trace.push(TraceRecord::step(i, r, &cur));
    }
    (trace, cur)
}

pub fn write_trace(out: &mut impl Write, trace: &[TraceRecord]) -> io::Result<()> {
    for rec in trace {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_trace(input: impl BufRead) -> Result<Vec<TraceRecord>, String> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", n + 1))?);
    }
    if out.is_empty() {
        return Err("empty trace".into());
    }
    Ok(out)
}

/// Re-runs a trace from its first record, checking every configuration
/// byte for byte. Returns the final configuration.
pub fn replay_trace(trace: &[TraceRecord]) -> Result<Configuration, String> {
    let mut cur = load_config(&trace[0].config).map_err(|e| format!("step 0: {e}"))?;
    if canonicalize(&cur).text() != trace[0].config {
        return Err("step 0: configuration is not in canonical form".into());
    }
    for rec in &trace[1..] {
        let key = rec.redex.as_deref().ok_or_else(|| format!("step {}: missing redex", rec.step))?;
        let r = find_redex(&cur, key).map_err(|e| format!("step {}: {e}", rec.step))?;
        cur = apply(&cur, &r).map_err(|e| format!("step {}: {e}", rec.step))?;
        let got = canonicalize(&cur).text();
        if got != rec.config {
            return Err(format!("step {}: expected\n  {}\ngot\n  {got}", rec.step, rec.config));
        }
    }
    Ok(cur)
}
