//! Deterministic replay of behavior traces against the full stack.
//!
//! A script is plain text, one step per line:
//!
//! ```text
//! # comment
//! learner monika123
//! init scores 1 1 -1 1 accs -7 -6 3 -8
//! event GalleryView
//! tick
//! expect scores -1 -1 -1 -1
//! expect accs -2 -1 3 -3
//! ```
//!
//! `learner` is optional and `init` is required before any other step.
//! `tick` advances the simulated clock by one Monitor period; the platform
//! drains all mailboxes before the clock moves on.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::adaptation::AdaptationConfig;
use crate::service::{Service, ServiceConfig, ServiceError};
use crate::style::{BehaviorEventKind, Dimension, LearnerStyleProfile, SettleRule, StyleError};

pub const DEFAULT_LEARNER: &str = "learner";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error(transparent)]
    Service(#[from] ServiceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Event(BehaviorEventKind),
    Tick,
    ExpectScores([i32; 4]),
    ExpectAccs([i32; 4]),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Event(k) => write!(f, "event {k}"),
            Step::Tick => f.write_str("tick"),
            Step::ExpectScores(v) => write!(f, "expect scores {}", join(v)),
            Step::ExpectAccs(v) => write!(f, "expect accs {}", join(v)),
        }
    }
}

fn join(v: &[i32; 4]) -> String {
    v.iter().map(i32::to_string).collect::<Vec<_>>().join(" ")
}

fn dims(v: &[i32; 4]) -> String {
    Dimension::ALL.iter().zip(v).map(|(d, x)| format!("{d}={x}")).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceScript {
    pub learner_id: String,
    pub initial_scores: [i32; 4],
    pub initial_accs: [i32; 4],
    /// Steps with the 1-based script line they came from.
    pub steps: Vec<(usize, Step)>,
}

impl TraceScript {
    pub fn new(learner_id: impl Into<String>, scores: [i32; 4], accs: [i32; 4]) -> Result<Self, StyleError> {
        let script = TraceScript { learner_id: learner_id.into(), initial_scores: scores, initial_accs: accs, steps: Vec::new() };
        script.initial_profile()?;
        Ok(script)
    }

    pub fn push(&mut self, step: Step) {
        let line = self.steps.last().map_or(3, |(l, _)| l + 1);
        self.steps.push((line, step));
    }

    pub fn initial_profile(&self) -> Result<LearnerStyleProfile, StyleError> {
        LearnerStyleProfile::from_raw(self.learner_id.clone(), self.initial_scores, self.initial_accs)
    }
}

/// Canonical text form; parsing it yields the same script with line numbers
/// renumbered.
impl fmt::Display for TraceScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "learner {}", self.learner_id)?;
        writeln!(f, "init scores {} accs {}", join(&self.initial_scores), join(&self.initial_accs))?;
        for (_, step) in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

fn parse_four<'a>(words: &mut impl Iterator<Item = &'a str>) -> Result<[i32; 4], String> {
    let mut out = [0; 4];
    for slot in &mut out {
        let w = words.next().ok_or("expected 4 integers")?;
        *slot = w.parse().map_err(|_| format!("{w:?} is not an integer"))?;
    }
    Ok(out)
}

impl FromStr for TraceScript {
    type Err = SimError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut learner: Option<String> = None;
        let mut init: Option<([i32; 4], [i32; 4])> = None;
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| SimError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let head = words.next().unwrap_or_default();
            let step = match head {
                "learner" => {
                    if learner.is_some() || init.is_some() {
                        return Err(err("`learner` must come once, before `init`".into()));
                    }
                    let id = words.next().ok_or_else(|| err("expected a learner id".into()))?;
                    learner = Some(id.to_owned());
                    None
                }
                "init" => {
                    if init.is_some() {
                        return Err(err("duplicate `init`".into()));
                    }
                    if words.next() != Some("scores") {
                        return Err(err("expected `init scores a b c d accs a b c d`".into()));
                    }
                    let scores = parse_four(&mut words).map_err(err)?;
                    if words.next() != Some("accs") {
                        return Err(err("expected `accs` after the scores".into()));
                    }
                    let accs = parse_four(&mut words).map_err(err)?;
                    if let Some(&bad) = scores.iter().find(|s| crate::style::DimensionScore::new(**s).is_err()) {
                        return Err(err(format!("initial score {bad} is not odd in [-11, 11]")));
                    }
                    init = Some((scores, accs));
                    None
                }
                _ if init.is_none() => return Err(err(format!("`{head}` before `init`"))),
                "event" => {
                    let kind = words.next().ok_or_else(|| err("expected an event kind".into()))?;
                    Some(Step::Event(kind.parse().map_err(|e: StyleError| err(e.to_string()))?))
                }
                "tick" => Some(Step::Tick),
                "expect" => match words.next() {
                    Some("scores") => Some(Step::ExpectScores(parse_four(&mut words).map_err(err)?)),
                    Some("accs") => Some(Step::ExpectAccs(parse_four(&mut words).map_err(err)?)),
                    _ => return Err(err("expected `expect scores` or `expect accs`".into())),
                },
                other => return Err(err(format!("unknown step `{other}`"))),
            };
            if let Some(extra) = words.next() {
                return Err(err(format!("unexpected trailing `{extra}`")));
            }
            if let Some(step) = step {
                steps.push((line, step));
            }
        }
        let (initial_scores, initial_accs) =
            init.ok_or(SimError::Parse { line: text.lines().count().max(1), message: "missing `init` line".into() })?;
        Ok(TraceScript { learner_id: learner.unwrap_or_else(|| DEFAULT_LEARNER.into()), initial_scores, initial_accs, steps })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationResult {
    pub line: usize,
    pub step: Step,
    pub actual: [i32; 4],
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub steps_executed: usize,
    pub expectations: Vec<ExpectationResult>,
    pub final_scores: [i32; 4],
    pub final_accs: [i32; 4],
    pub trace: String,
}

impl ReplayReport {
    pub fn failures(&self) -> usize {
        self.expectations.iter().filter(|e| !e.passed).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps: {}, expectations: {}, failed: {}", self.steps_executed, self.expectations.len(), self.failures())?;
        for e in &self.expectations {
            if e.passed {
                writeln!(f, "line {}: {}: ok", e.line, e.step)?;
            } else {
                writeln!(f, "line {}: {}: FAILED, actual {}", e.line, e.step, join(&e.actual))?;
            }
        }
        writeln!(f, "final scores {}", dims(&self.final_scores))?;
        writeln!(f, "final accs {}", dims(&self.final_accs))?;
        writeln!(f, "trace:")?;
        f.write_str(&self.trace)
    }
}

/// Replays with the default Monitor period and settle rule.
pub fn replay(script: &TraceScript) -> Result<ReplayReport, SimError> {
    replay_with(script, AdaptationConfig::default())
}

/// Replays through the service facade: events go through `post_event`,
/// ticks through the Monitor and Update agents on a simulated clock.
pub fn replay_with(script: &TraceScript, adaptation: AdaptationConfig) -> Result<ReplayReport, SimError> {
    let service =
        Service::new(ServiceConfig { adaptation, simulated_clock: true, platform_name: "sim".into(), ..ServiceConfig::default() })?;
    let initial = script.initial_profile()?;
    service.put_profile(&initial)?;
    service.register(&script.learner_id, "sim", None)?;
    let session = service.login(&script.learner_id, "sim")?;
    let current = |service: &Service| -> Result<LearnerStyleProfile, SimError> {
        Ok(crate::store::read_profile(&service.user_store().snapshot(), &script.learner_id).map_err(ServiceError::from)?)
    };

    let mut expectations = Vec::new();
    for &(line, step) in &script.steps {
        match step {
            Step::Event(kind) => {
                service.post_event(&session, kind)?;
            }
            Step::Tick => {
                service.advance(adaptation.ticker_period)?;
            }
            Step::ExpectScores(expected) | Step::ExpectAccs(expected) => {
                let p = current(&service)?;
                let actual = match step {
                    Step::ExpectScores(_) => p.raw_scores(),
                    _ => p.raw_accumulators(),
                };
                expectations.push(ExpectationResult { line, step, actual, passed: actual == expected });
            }
        }
    }
    let last = current(&service)?;
    Ok(ReplayReport {
        steps_executed: script.steps.len(),
        expectations,
        final_scores: last.raw_scores(),
        final_accs: last.raw_accumulators(),
        trace: service.platform().sniffer_trace().export(),
    })
}

/// Golden scripts, numbered as rows 2 to 5 of the reference settlement table.
pub const TABLE1_ROWS: [(u8, &str); 4] = [
    (2, "learner monika123\ninit scores 1 1 -1 1 accs -7 -6 3 -8\ntick\nexpect scores -1 -1 -1 -1\nexpect accs -2 -1 3 -3\n"),
    (3, "learner monika123\ninit scores -1 -1 -1 -1 accs 11 12 16 18\ntick\nexpect scores 3 3 5 5\nexpect accs 1 2 1 3\n"),
    (4, "learner monika123\ninit scores 3 3 5 5 accs 0 0 -4 -1\ntick\nexpect scores 3 3 5 5\nexpect accs 0 0 -4 -1\n"),
    (5, "learner monika123\ninit scores 3 3 5 5 accs -6 -4 -8 -7\ntick\nexpect scores 1 3 3 3\nexpect accs -1 -4 -3 -2\n"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table1Report {
    pub rows: Vec<(u8, ReplayReport)>,
}

impl Table1Report {
    pub fn failed_rows(&self) -> Vec<u8> {
        self.rows.iter().filter(|(_, r)| !r.passed()).map(|(n, _)| *n).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed_rows().is_empty() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for Table1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (row, report) in &self.rows {
            let status = if report.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "row {row}: {status}")?;
            for e in report.expectations.iter().filter(|e| !e.passed) {
                writeln!(f, "  {}: actual {}", e.step, join(&e.actual))?;
            }
        }
        let passed = self.rows.len() - self.failed_rows().len();
        writeln!(f, "{passed}/{} rows pass", self.rows.len())
    }
}

pub fn verify_table1() -> Result<Table1Report, SimError> {
    verify_table1_with(SettleRule::default())
}

/// Runs the golden rows under an arbitrary rule, e.g. to check that a
/// mutated threshold is caught.
pub fn verify_table1_with(rule: SettleRule) -> Result<Table1Report, SimError> {
    let config = AdaptationConfig { rule, ..AdaptationConfig::default() };
    let rows = TABLE1_ROWS.iter().map(|&(row, text)| Ok((row, replay_with(&text.parse()?, config)?))).collect::<Result<_, SimError>>()?;
    Ok(Table1Report { rows })
}

/// Deterministic random script: random odd scores, accumulators in
/// [-4, 4], `n_events` uniformly drawn events with a tick after roughly
/// every eighth one. No expectations are emitted.
pub fn gen_trace(seed: u64, n_events: usize) -> TraceScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores = std::array::from_fn(|_| 2 * rng.gen_range(-6..=5) + 1);
    let accs = std::array::from_fn(|_| rng.gen_range(-4..=4));
    let mut script = TraceScript::new(DEFAULT_LEARNER, scores, accs).expect("generated scores are odd and in range");
    for _ in 0..n_events {
        let kind = BehaviorEventKind::ALL[rng.gen_range(0..BehaviorEventKind::ALL.len())];
        script.push(Step::Event(kind));
        if rng.gen_ratio(1, 8) {
            script.push(Step::Tick);
        }
    }
    script
}

/// Script text with a header comment naming the generator inputs.
pub fn gen_trace_text(seed: u64, n_events: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# gen seed={seed} events={n_events}");
    out.push_str(&gen_trace(seed, n_events).to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "# row\ninit scores 1 1 -1 1 accs -7 -6 3 -8\ntick   # settle\nexpect scores -1 -1 -1 -1\n";
        let s: TraceScript = text.parse().unwrap();
        assert_eq!(s.learner_id, DEFAULT_LEARNER);
        assert_eq!(s.steps, vec![(3, Step::Tick), (4, Step::ExpectScores([-1, -1, -1, -1]))]);
        let again: TraceScript = s.to_string().parse().unwrap();
        assert_eq!(again.to_string(), s.to_string());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("init scores 1 1 -1 1 accs 0 0 0 0\nevent Jump\n", 2),
            ("tick\n", 1),
            ("init scores 2 1 1 1 accs 0 0 0 0\n", 1),
            ("init scores 1 1 1 1 accs 0 0 0\n", 1),
            ("init scores 1 1 1 1 accs 0 0 0 0\nexpect scores 1 1 1 1 1\n", 2),
            ("init scores 1 1 1 1 accs 0 0 0 0\nlearner x\n", 2),
            ("\n# nothing\n", 2),
        ];
        for (text, line) in cases {
            match text.parse::<TraceScript>() {
                Err(SimError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn even_expectation_fails_rather_than_errors() {
        let s: TraceScript = "init scores 1 1 1 1 accs 0 0 0 0\nexpect scores 0 0 0 0\n".parse().unwrap();
        let r = replay(&s).unwrap();
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.expectations[0].actual, [1, 1, 1, 1]);
    }

    #[test]
    fn gen_is_deterministic() {
        assert!(gen_trace(1, 0).steps.is_empty());
        assert_eq!(gen_trace_text(1, 50), gen_trace_text(1, 50));
        assert_ne!(gen_trace_text(1, 50), gen_trace_text(2, 50));
        let s = gen_trace(7, 100);
        assert_eq!(s.steps.iter().filter(|(_, st)| matches!(st, Step::Event(_))).count(), 100);
    }
}
