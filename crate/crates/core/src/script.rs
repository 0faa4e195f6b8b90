//! Line-oriented gate scripts for a qubit chain.
//!
//! ```text
//! # comment
//! RESET q v            v = +1 | -1
//! GATE q name          I X Y Z H S SDG T TDG
//! LINK i j ON|OFF [J]  neighbours only; optional strength J (default 1)
//! XCHG i j theta       exchange pulse area; `pi`, `pi/2`, `3*pi/4` accepted
//! CNOT c t
//! RF q amp duration    global RF pulse at qubit q's resonance
//! MEASURE q
//! ```
//!
//! Keywords are case-insensitive. Everything after `#` is ignored.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::kspace::Chirality;
use crate::linalg::Mat2;
use crate::register::{named_gate, CouplingLink, FieldProfile, RegisterError, RegisterState, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("line {line}: {source}")]
    Register {
        line: usize,
        #[source]
        source: RegisterError,
    },
    #[error("invalid chain setup: {0}")]
    Setup(String),
}

impl RunError {
    pub fn register_error(&self) -> Option<&RegisterError> {
        match self {
            RunError::Register { source, .. } => Some(source),
            RunError::Setup(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Reset {
        q: usize,
        value: Chirality,
    },
    Gate {
        q: usize,
        name: String,
        matrix: Mat2,
    },
    Link {
        i: usize,
        j: usize,
        on: bool,
        strength: f64,
    },
    Xchg {
        i: usize,
        j: usize,
        theta: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Rf {
        q: usize,
        amp: f64,
        duration: f64,
    },
    Measure {
        q: usize,
    },
}

impl Instruction {
    fn max_index(&self) -> usize {
        match *self {
            Instruction::Reset { q, .. }
            | Instruction::Gate { q, .. }
            | Instruction::Rf { q, .. }
            | Instruction::Measure { q } => q,
            Instruction::Link { i, j, .. } | Instruction::Xchg { i, j, .. } => i.max(j),
            Instruction::Cnot { control, target } => control.max(target),
        }
    }
}

impl std::fmt::Display for Instruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Instruction::Reset { q, value } => write!(f, "RESET {q} {value}"),
            Instruction::Gate { q, name, .. } => write!(f, "GATE {q} {name}"),
            Instruction::Link { i, j, on, strength } => {
                write!(f, "LINK {i} {j} {} {strength}", if *on { "ON" } else { "OFF" })
            }
            Instruction::Xchg { i, j, theta } => write!(f, "XCHG {i} {j} {theta}"),
            Instruction::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Instruction::Rf { q, amp, duration } => write!(f, "RF {q} {amp} {duration}"),
            Instruction::Measure { q } => write!(f, "MEASURE {q}"),
        }
    }
}

/// A parsed script: instructions with their 1-based source line numbers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Script {
    pub instructions: Vec<(usize, Instruction)>,
}

impl Script {
    /// Qubits needed to run the script (at least 1).
    pub fn min_qubits(&self) -> usize {
        self.instructions
            .iter()
            .map(|(_, ins)| ins.max_index() + 1)
            .max()
            .unwrap_or(1)
    }

    pub fn measurement_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|(_, ins)| matches!(ins, Instruction::Measure { .. }))
            .count()
    }
}

pub fn parse(text: &str) -> Result<Script, ParseError> {
    let mut instructions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let err = |message: String| ParseError { line, message };
        let arity = |lo: usize, hi: usize| -> Result<(), ParseError> {
            let got = tokens.len() - 1;
            if got < lo || got > hi {
                Err(err(format!("{} expects {lo}..={hi} arguments, got {got}", tokens[0])))
            } else {
                Ok(())
            }
        };
        let index = |s: &str| -> Result<usize, ParseError> {
            let q: usize = s.parse().map_err(|_| err(format!("invalid qubit index `{s}`")))?;
            if q >= MAX_QUBITS {
                return Err(err(format!("qubit index {q} exceeds the {MAX_QUBITS}-qubit limit")));
            }
            Ok(q)
        };
        let number =
            |s: &str| -> Result<f64, ParseError> { parse_angle(s).ok_or_else(|| err(format!("invalid number `{s}`"))) };
        let ins = match tokens[0].to_ascii_uppercase().as_str() {
            "RESET" => {
                arity(2, 2)?;
                let value =
                    parse_chirality(tokens[2]).ok_or_else(|| err(format!("invalid chirality `{}`", tokens[2])))?;
                Instruction::Reset {
                    q: index(tokens[1])?,
                    value,
                }
            }
            "GATE" => {
                arity(2, 2)?;
                let name = tokens[2].to_ascii_uppercase();
                let matrix = named_gate(&name).ok_or_else(|| err(format!("unknown gate `{}`", tokens[2])))?;
                Instruction::Gate {
                    q: index(tokens[1])?,
                    name,
                    matrix,
                }
            }
            "LINK" => {
                arity(3, 4)?;
                let (i, j) = (index(tokens[1])?, index(tokens[2])?);
                if i.abs_diff(j) != 1 {
                    return Err(err(format!("qubits {i} and {j} are not neighbours")));
                }
                let on = match tokens[3].to_ascii_uppercase().as_str() {
                    "ON" => true,
                    "OFF" => false,
                    other => return Err(err(format!("expected ON or OFF, got `{other}`"))),
                };
                let strength = match tokens.get(4) {
                    Some(s) => number(s)?,
                    None => 1.0,
                };
                if !(strength > 0.0) {
                    return Err(err(format!("link strength must be > 0, got {strength}")));
                }
                Instruction::Link { i, j, on, strength }
            }
            "XCHG" => {
                arity(3, 3)?;
                let theta = number(tokens[3])?;
                if !(theta >= 0.0) {
                    return Err(err(format!("pulse area must be >= 0, got {theta}")));
                }
                Instruction::Xchg {
                    i: index(tokens[1])?,
                    j: index(tokens[2])?,
                    theta,
                }
            }
            "CNOT" => {
                arity(2, 2)?;
                let (control, target) = (index(tokens[1])?, index(tokens[2])?);
                if control == target {
                    return Err(err("control and target must differ".into()));
                }
                Instruction::Cnot { control, target }
            }
            "RF" => {
                arity(3, 3)?;
                let (amp, duration) = (number(tokens[2])?, number(tokens[3])?);
                if !(amp >= 0.0) || !(duration >= 0.0) {
                    return Err(err("RF amplitude and duration must be >= 0".into()));
                }
                Instruction::Rf {
                    q: index(tokens[1])?,
                    amp,
                    duration,
                }
            }
            "MEASURE" => {
                arity(1, 1)?;
                Instruction::Measure { q: index(tokens[1])? }
            }
            other => return Err(err(format!("unknown instruction `{other}`"))),
        };
        instructions.push((line, ins));
    }
    Ok(Script { instructions })
}

fn parse_chirality(s: &str) -> Option<Chirality> {
    match s.replace('\u{2212}', "-").as_str() {
        "+1" | "1" | "+" => Some(Chirality::Plus),
        "-1" | "-" => Some(Chirality::Minus),
        _ => None,
    }
}

/// A finite number, optionally written with `pi`: `pi`, `pi/2`, `3*pi/4`, `0.5*pi`.
fn parse_angle(s: &str) -> Option<f64> {
    let s = s.replace('\u{2212}', "-");
    let lower = s.to_ascii_lowercase();
    let value = if let Some(pos) = lower.find("pi") {
        let (before, after) = (&lower[..pos], &lower[pos + 2..]);
        let factor = match before {
            "" => 1.0,
            "-" => -1.0,
            b => b.strip_suffix('*')?.parse::<f64>().ok()?,
        };
        let divisor = match after {
            "" => 1.0,
            a => a.strip_prefix('/')?.parse::<f64>().ok()?,
        };
        factor * PI / divisor
    } else {
        lower.parse::<f64>().ok()?
    };
    value.is_finite().then_some(value)
}

/// Settings of the chain a script runs on.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSetup {
    /// Register size; defaults to the script's [`Script::min_qubits`].
    pub qubits: Option<usize>,
    /// Per-qubit biases; defaults to `ε_i = 1 + 0.5·i`.
    pub field: Option<FieldProfile>,
    /// Time step of RF integration.
    pub rf_dt: f64,
}

impl Default for ChainSetup {
    fn default() -> Self {
        ChainSetup {
            qubits: None,
            field: None,
            rf_dt: 0.01,
        }
    }
}

/// A register with its weak links, one per neighbouring pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub state: RegisterState,
    pub links: Vec<CouplingLink>,
    pub field: FieldProfile,
    pub rf_dt: f64,
}

impl Chain {
    pub fn new(n: usize, field: FieldProfile, rf_dt: f64) -> Result<Self, RegisterError> {
        let state = RegisterState::new(n)?;
        if field.eps.len() != n {
            return Err(RegisterError::InvalidParameter(format!(
                "field profile has {} entries for {n} qubits",
                field.eps.len()
            )));
        }
        let links = (0..n.saturating_sub(1))
            .map(|i| CouplingLink::new(i, i + 1, 1.0))
            .collect::<Result<_, _>>()?;
        Ok(Chain {
            state,
            links,
            field,
            rf_dt,
        })
    }

    fn link(&self, i: usize, j: usize) -> Result<&CouplingLink, RegisterError> {
        if i.abs_diff(j) != 1 {
            return Err(RegisterError::NotAdjacent { i, j });
        }
        self.links.get(i.min(j)).ok_or(RegisterError::IndexOutOfRange {
            index: i.max(j),
            n: self.state.n(),
        })
    }

    /// Runs one instruction; returns the outcome of a measurement.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        ins: &Instruction,
        rng: &mut R,
    ) -> Result<Option<Chirality>, RegisterError> {
        match ins {
            Instruction::Reset { q, value } => {
                self.state = self.state.initialize_reset(*q, *value)?;
            }
            Instruction::Gate { q, matrix, .. } => {
                self.state = self.state.apply_single_gate(*q, matrix)?;
            }
            Instruction::Link { i, j, on, strength } => {
                let n = self.state.n();
                if i.max(j) >= &n {
                    return Err(RegisterError::IndexOutOfRange { index: *i.max(j), n });
                }
                self.links[*i.min(j)] = CouplingLink::new(*i, *j, *strength)?.switched(*on);
            }
            Instruction::Xchg { i, j, theta } => {
                let link = *self.link(*i, *j)?;
                self.state = self.state.exchange_pulse(&link, *theta)?;
            }
            Instruction::Cnot { control, target } => {
                let link = *self.link(*control, *target)?;
                self.state = self.state.cnot_composed(&link, *control, *target)?;
            }
            Instruction::Rf { q, amp, duration } => {
                if let Some(l) = self.links.iter().find(|l| l.on) {
                    return Err(RegisterError::InvalidParameter(format!(
                        "RF pulse requires all links off (link {}-{} is on)",
                        l.i, l.j
                    )));
                }
                self.state = self
                    .state
                    .selective_rf_pulse(&self.field, *q, *amp, *duration, self.rf_dt)?;
            }
            Instruction::Measure { q } => {
                let (outcome, next) = self.state.measure(*q, rng)?;
                self.state = next;
                return Ok(Some(outcome));
            }
        }
        Ok(None)
    }
}

/// Result of one pass through a script.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotRecord {
    /// `(qubit, outcome)` for each measurement, in program order.
    pub outcomes: Vec<(usize, Chirality)>,
    /// One line per instruction.
    pub trace: Vec<String>,
    pub final_state: RegisterState,
}

fn build_chain(script: &Script, setup: &ChainSetup) -> Result<Chain, RunError> {
    let n = match setup.qubits {
        Some(n) => {
            if n < script.min_qubits() {
                return Err(RunError::Setup(format!(
                    "script addresses {} qubits but the chain has {n}",
                    script.min_qubits()
                )));
            }
            n
        }
        None => script.min_qubits(),
    };
    let field = setup.field.clone().unwrap_or_else(|| FieldProfile::linear(n, 1.0, 0.5));
    Chain::new(n, field, setup.rf_dt).map_err(|e| RunError::Setup(e.to_string()))
}

/// Executes `script` once from the all-`|−1⟩` state.
pub fn run_once<R: Rng + ?Sized>(script: &Script, setup: &ChainSetup, rng: &mut R) -> Result<ShotRecord, RunError> {
    let mut chain = build_chain(script, setup)?;
    let mut outcomes = Vec::new();
    let mut trace = Vec::with_capacity(script.instructions.len());
    for (line, ins) in &script.instructions {
        let outcome = chain
            .step(ins, rng)
            .map_err(|source| RunError::Register { line: *line, source })?;
        match outcome {
            Some(o) => {
                if let Instruction::Measure { q } = ins {
                    outcomes.push((*q, o));
                }
                trace.push(format!("{line}: {ins} -> {o}"));
            }
            None => trace.push(format!("{line}: {ins}")),
        }
    }
    Ok(ShotRecord {
        outcomes,
        trace,
        final_state: chain.state,
    })
}

/// Label `|v0,v1,…⟩` of a basis index, qubit 0 first.
pub fn basis_label(idx: usize, n: usize) -> String {
    let parts: Vec<&str> = (0..n).map(|q| if (idx >> q) & 1 == 1 { "+1" } else { "-1" }).collect();
    format!("|{}>", parts.join(","))
}

/// Human-readable log of a single shot.
pub fn format_shot(record: &ShotRecord, seed: u64) -> String {
    let n = record.final_state.n();
    let mut out = String::new();
    let _ = writeln!(out, "# chain qubits={n} seed={seed}");
    for line in &record.trace {
        let _ = writeln!(out, "{line}");
    }
    let outcomes: Vec<String> = record.outcomes.iter().map(|(q, o)| format!("q{q}={o}")).collect();
    let _ = writeln!(
        out,
        "outcomes: {}",
        if outcomes.is_empty() {
            "none".to_string()
        } else {
            outcomes.join(" ")
        }
    );
    for q in 0..n {
        let p = record.final_state.prob_plus(q).unwrap_or(f64::NAN);
        let _ = writeln!(out, "final P(q{q}=+1) = {p:.12}");
    }
    let _ = writeln!(out, "final basis probabilities:");
    for (idx, p) in record.final_state.probabilities().iter().enumerate() {
        if *p > 1e-15 {
            let _ = writeln!(out, "{} {p:.12}", basis_label(idx, n));
        }
    }
    out
}

/// Outcome histogram over many shots.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotHistogram {
    pub shots: usize,
    /// Keyed by the outcome sequence, e.g. `"-1,+1"`.
    pub counts: BTreeMap<String, usize>,
}

impl ShotHistogram {
    pub fn frequency(&self, key: &str) -> f64 {
        *self.counts.get(key).unwrap_or(&0) as f64 / self.shots as f64
    }
}

/// Runs `shots` independent passes sharing one generator.
pub fn run_shots<R: Rng + ?Sized>(
    script: &Script,
    setup: &ChainSetup,
    shots: usize,
    rng: &mut R,
) -> Result<ShotHistogram, RunError> {
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let record = run_once(script, setup, rng)?;
        let key: Vec<String> = record.outcomes.iter().map(|(_, o)| o.to_string()).collect();
        *counts.entry(key.join(",")).or_insert(0) += 1;
    }
    Ok(ShotHistogram { shots, counts })
}

pub fn format_histogram(hist: &ShotHistogram, script: &Script, seed: u64) -> String {
    let mut out = String::new();
    let measured: Vec<String> = script
        .instructions
        .iter()
        .filter_map(|(_, ins)| match ins {
            Instruction::Measure { q } => Some(format!("q{q}")),
            _ => None,
        })
        .collect();
    let _ = writeln!(
        out,
        "# chain shots={} seed={seed} measured={}",
        hist.shots,
        measured.join(",")
    );
    let _ = writeln!(out, "outcomes,count,frequency");
    for (key, count) in &hist.counts {
        let label = if key.is_empty() { "none" } else { key };
        let _ = writeln!(out, "{label},{count},{:.6}", *count as f64 / hist.shots as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::measurement_rng;

    #[test]
    fn parses_all_instructions() {
        let text = "# demo\nRESET 0 +1\nreset 1 \u{2212}1\nGATE 0 h\nLINK 0 1 ON 2.5\nXCHG 0 1 pi/2\nCNOT 0 1\nLINK 1 0 off\nRF 1 0.05 62.8\nMEASURE 0  # trailing\n\n";
        let s = parse(text).unwrap();
        assert_eq!(s.instructions.len(), 9);
        assert_eq!(
            s.instructions[0],
            (
                2,
                Instruction::Reset {
                    q: 0,
                    value: Chirality::Plus
                }
            )
        );
        assert_eq!(
            s.instructions[1].1,
            Instruction::Reset {
                q: 1,
                value: Chirality::Minus
            }
        );
        assert!(matches!(s.instructions[3].1, Instruction::Link { on: true, strength, .. } if strength == 2.5));
        assert!(matches!(s.instructions[4].1, Instruction::Xchg { theta, .. } if (theta - PI / 2.0).abs() < 1e-15));
        assert_eq!(s.min_qubits(), 2);
        assert_eq!(s.measurement_count(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("RESET 0 +1\nFOO 1\n", 2),
            ("GATE 0 W\n", 1),
            ("\n\nLINK 0 2 ON\n", 3),
            ("XCHG 0 1\n", 1),
            ("RESET 0 0\n", 1),
            ("MEASURE 12\n", 1),
            ("LINK 0 1 MAYBE\n", 1),
            ("CNOT 1 1\n", 1),
            ("XCHG 0 1 -1\n", 1),
        ];
        for (text, line) in cases {
            let e = parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
        }
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("PI/4"), Some(PI / 4.0));
        assert_eq!(parse_angle("3*pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_angle("1.25"), Some(1.25));
        assert_eq!(parse_angle("2pi"), None);
        assert_eq!(parse_angle("nan"), None);
    }

    #[test]
    fn swap_script() {
        let s =
            parse("RESET 0 +1\nRESET 1 -1\nLINK 0 1 ON\nXCHG 0 1 3.141592653589793\nMEASURE 0\nMEASURE 1\n").unwrap();
        for seed in 0..10 {
            let r = run_once(&s, &ChainSetup::default(), &mut measurement_rng(seed)).unwrap();
            assert_eq!(r.outcomes, vec![(0, Chirality::Minus), (1, Chirality::Plus)]);
        }
    }

    #[test]
    fn empty_script_reports_initial_register() {
        let s = parse("").unwrap();
        let r = run_once(&s, &ChainSetup::default(), &mut measurement_rng(0)).unwrap();
        assert_eq!(r.final_state, RegisterState::new(1).unwrap());
        let log = format_shot(&r, 0);
        assert!(log.contains("|-1> 1.000000000000"), "{log}");
    }

    #[test]
    fn exchange_through_closed_link_fails() {
        let s = parse("XCHG 0 1 pi\n").unwrap();
        let e = run_once(&s, &ChainSetup::default(), &mut measurement_rng(0)).unwrap_err();
        assert!(matches!(e.register_error(), Some(RegisterError::LinkOff { .. })), "{e}");
        let s = parse("LINK 0 1 ON\nLINK 0 1 OFF\nCNOT 0 1\n").unwrap();
        let e = run_once(&s, &ChainSetup::default(), &mut measurement_rng(0)).unwrap_err();
        assert!(matches!(
            e,
            RunError::Register {
                line: 3,
                source: RegisterError::LinkOff { .. }
            }
        ));
    }

    #[test]
    fn rf_with_link_on_is_rejected() {
        let s = parse("LINK 0 1 ON\nRF 0 0.05 10\n").unwrap();
        assert!(run_once(&s, &ChainSetup::default(), &mut measurement_rng(0)).is_err());
    }

    #[test]
    fn too_small_chain() {
        let s = parse("MEASURE 3\n").unwrap();
        let setup = ChainSetup {
            qubits: Some(2),
            ..Default::default()
        };
        assert!(matches!(
            run_once(&s, &setup, &mut measurement_rng(0)),
            Err(RunError::Setup(_))
        ));
    }

    #[test]
    fn bell_histogram() {
        let s =
            parse("RESET 0 +1\nLINK 0 1 ON\nXCHG 0 1 pi/2\nLINK 0 1 OFF\nGATE 1 X\nMEASURE 0\nMEASURE 1\n").unwrap();
        let h = run_shots(&s, &ChainSetup::default(), 2000, &mut measurement_rng(3)).unwrap();
        assert_eq!(h.counts.len(), 2, "{:?}", h.counts);
        assert!((h.frequency("+1,+1") - 0.5).abs() < 0.05);
        assert!((h.frequency("-1,-1") - 0.5).abs() < 0.05);
    }
}
