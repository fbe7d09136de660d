//! Scenario files: one directive per line.
//!
//! ```text
//! stages 100
//! assign 0 S 0
//! ce 0 10 0101
//! phi 0 4 3 3
//! phi-honest 0 delay 1
//! mi 0 2 01 5 6
//! copier 0 delay 0
//! large include-nodes
//! check all
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::machine::CopierConfig;
use crate::strategy::{Assignment, Requirement};

pub const CHECK_NAMES: &[&str] = &[
    "shapes",
    "ab_isomorphic",
    "unique_challenger",
    "use_discipline",
    "param_monotonicity",
    "waiting_lemma",
    "requirements_at_horizon",
    "delta2",
];

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CeDirective {
    pub index: usize,
    pub stage: usize,
    pub string: Bits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiDirective {
    pub index: usize,
    pub stage: usize,
    pub a: u32,
    pub b: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HonestPhi {
    pub index: usize,
    pub delay: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiDirective {
    pub index: usize,
    pub stage: usize,
    pub oracle: Bits,
    pub x: u32,
    pub y: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scenario {
    pub stages: Option<usize>,
    pub assignment: Assignment,
    pub ce: Vec<CeDirective>,
    pub phi: Vec<PhiDirective>,
    pub phi_honest: Vec<HonestPhi>,
    pub mi: Vec<MiDirective>,
    pub copiers: Vec<CopierConfig>,
    pub include_node_ids: bool,
    pub checks: Vec<String>,
}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, what: &str, tok: &str) -> Result<T, ScenarioError> {
    tok.parse()
        .map_err(|_| err(line, format!("expected {what}, found `{tok}`")))
}

fn bits(line: usize, tok: &str) -> Result<Bits, ScenarioError> {
    tok.parse()
        .map_err(|_| err(line, format!("expected a bit string, found `{tok}`")))
}

fn arity(line: usize, toks: &[&str], n: usize) -> Result<(), ScenarioError> {
    if toks.len() != n {
        return Err(err(
            line,
            format!("`{}` takes {} argument(s), found {}", toks[0], n - 1, toks.len() - 1),
        ));
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut sc = Scenario::default();
    let mut phi_seen: BTreeMap<(usize, u32), u32> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "stages" => {
                arity(line, &toks, 2)?;
                if sc.stages.is_some() {
                    return Err(err(line, "duplicate `stages`"));
                }
                let n: usize = num(line, "a stage count", toks[1])?;
                if n == 0 {
                    return Err(err(line, "`stages` must be at least 1"));
                }
                sc.stages = Some(n);
            }
            "assign" => {
                arity(line, &toks, 4)?;
                let level: usize = num(line, "a level", toks[1])?;
                let index: usize = num(line, "an index", toks[3])?;
                let req = match toks[2] {
                    "R" => Requirement::R(index),
                    "P" => Requirement::P(index),
                    "S" => Requirement::S(index),
                    other => return Err(err(line, format!("unknown requirement `{other}`"))),
                };
                if sc.assignment.overrides.insert(level, req).is_some() {
                    return Err(err(line, format!("level {level} assigned twice")));
                }
            }
            "ce" => {
                arity(line, &toks, 4)?;
                sc.ce.push(CeDirective {
                    index: num(line, "an index", toks[1])?,
                    stage: num(line, "a stage", toks[2])?,
                    string: bits(line, toks[3])?,
                });
            }
            "phi" => {
                arity(line, &toks, 5)?;
                let d = PhiDirective {
                    index: num(line, "an index", toks[1])?,
                    stage: num(line, "a stage", toks[2])?,
                    a: num(line, "a node id", toks[3])?,
                    b: num(line, "a node id", toks[4])?,
                };
                if let Some(prev) = phi_seen.insert((d.index, d.a), d.b) {
                    if prev != d.b {
                        return Err(err(line, format!("phi {} maps node {} twice", d.index, d.a)));
                    }
                }
                sc.phi.push(d);
            }
            "phi-honest" => {
                arity(line, &toks, 4)?;
                if toks[2] != "delay" {
                    return Err(err(line, "expected `phi-honest <e> delay <d>`"));
                }
                sc.phi_honest.push(HonestPhi {
                    index: num(line, "an index", toks[1])?,
                    delay: num(line, "a delay", toks[3])?,
                });
            }
            "mi" => {
                arity(line, &toks, 6)?;
                sc.mi.push(MiDirective {
                    index: num(line, "an index", toks[1])?,
                    stage: num(line, "a stage", toks[2])?,
                    oracle: bits(line, toks[3])?,
                    x: num(line, "a node id", toks[4])?,
                    y: num(line, "a node id", toks[5])?,
                });
            }
            "copier" => {
                arity(line, &toks, 4)?;
                if toks[2] != "delay" {
                    return Err(err(line, "expected `copier <i> delay <d>`"));
                }
                sc.copiers.push(CopierConfig {
                    machine: num(line, "an index", toks[1])?,
                    delay: num(line, "a delay", toks[3])?,
                });
            }
            "large" => {
                arity(line, &toks, 2)?;
                if toks[1] != "include-nodes" {
                    return Err(err(line, "expected `large include-nodes`"));
                }
                sc.include_node_ids = true;
            }
            "check" => {
                arity(line, &toks, 2)?;
                let name = toks[1];
                if name != "all" && !CHECK_NAMES.contains(&name) {
                    return Err(err(line, format!("unknown check `{name}`")));
                }
                sc.checks.push(name.to_string());
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    Ok(sc)
}

impl Scenario {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(n) = self.stages {
            writeln!(s, "stages {n}").unwrap();
        }
        for (level, req) in &self.assignment.overrides {
            writeln!(s, "assign {level} {} {}", req.letter(), req.index()).unwrap();
        }
        for d in &self.ce {
            let bits = if d.string.is_empty() { "-".to_string() } else { d.string.to_string() };
            writeln!(s, "ce {} {} {}", d.index, d.stage, bits).unwrap();
        }
        for d in &self.phi {
            writeln!(s, "phi {} {} {} {}", d.index, d.stage, d.a, d.b).unwrap();
        }
        for d in &self.phi_honest {
            writeln!(s, "phi-honest {} delay {}", d.index, d.delay).unwrap();
        }
        for d in &self.mi {
            let bits = if d.oracle.is_empty() { "-".to_string() } else { d.oracle.to_string() };
            writeln!(s, "mi {} {} {} {} {}", d.index, d.stage, bits, d.x, d.y).unwrap();
        }
        for c in &self.copiers {
            writeln!(s, "copier {} delay {}", c.machine, c.delay).unwrap();
        }
        if self.include_node_ids {
            writeln!(s, "large include-nodes").unwrap();
        }
        for c in &self.checks {
            writeln!(s, "check {c}").unwrap();
        }
        s
    }

    /// Requested checks with `all` expanded, in canonical order.
    pub fn expanded_checks(&self) -> Vec<String> {
        expand_checks(self.checks.iter().map(String::as_str))
    }

    /// A random scenario exercising every directive kind.
    pub fn random(seed: u64, stages: usize) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sc = Scenario {
            stages: Some(stages),
            ..Default::default()
        };
        let kinds = ['R', 'P', 'S'];
        for level in 0..rng.gen_range(0..6) {
            if rng.gen_bool(0.6) {
                let idx = rng.gen_range(0..2);
                let req = match kinds.choose(&mut rng).unwrap() {
                    'R' => Requirement::R(idx),
                    'P' => Requirement::P(idx),
                    _ => Requirement::S(idx),
                };
                sc.assignment.overrides.insert(level, req);
            }
        }
        for _ in 0..rng.gen_range(0..6) {
            let len = rng.gen_range(0..12);
            let string = Bits::from_bools((0..len).map(|_| rng.gen_bool(0.3)).collect());
            sc.ce.push(CeDirective {
                index: rng.gen_range(0..2),
                stage: rng.gen_range(1..=stages),
                string,
            });
        }
        for e in 0..2 {
            if rng.gen_bool(0.6) {
                sc.phi_honest.push(HonestPhi {
                    index: e,
                    delay: rng.gen_range(0..4),
                });
            }
        }
        let mut used: BTreeMap<(usize, u32), u32> = BTreeMap::new();
        for _ in 0..rng.gen_range(0..5) {
            let d = PhiDirective {
                index: rng.gen_range(2..4),
                stage: rng.gen_range(1..=stages),
                a: rng.gen_range(0..40),
                b: rng.gen_range(0..40),
            };
            if used.insert((d.index, d.a), d.b).is_none() {
                sc.phi.push(d);
            }
        }
        for i in 0..2 {
            if rng.gen_bool(0.6) {
                sc.copiers.push(CopierConfig {
                    machine: i,
                    delay: rng.gen_range(0..3),
                });
            }
        }
        for _ in 0..rng.gen_range(0..8) {
            let len = rng.gen_range(0..4);
            sc.mi.push(MiDirective {
                index: rng.gen_range(0..2),
                stage: rng.gen_range(1..=stages),
                oracle: Bits::from_bools((0..len).map(|_| rng.gen_bool(0.2)).collect()),
                x: rng.gen_range(10_000..10_012),
                y: rng.gen_range(10_000..10_012),
            });
        }
        sc.checks.push("all".into());
        sc
    }
}

pub fn expand_checks<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut want: Vec<&str> = Vec::new();
    for n in names {
        if n == "all" {
            want.extend_from_slice(CHECK_NAMES);
        } else {
            want.push(n);
        }
    }
    CHECK_NAMES
        .iter()
        .filter(|c| want.contains(c))
        .map(|c| c.to_string())
        .collect()
}

pub const CANNED_NAMES: &[&str] = &["DIAG", "GEN-MEET", "GEN-AVOID", "INTERACT"];

/// The built-in acceptance scenarios, by name.
pub fn canned_scenario(name: &str) -> Option<Scenario> {
    let text = match name {
        // honest Φ_0 one stage behind each pair; nothing for R to meet
        "DIAG" => "stages 200\nphi-honest 0 delay 1\ncheck all\n",
        "GEN-MEET" => return Some(gen_meet()),
        "GEN-AVOID" => "stages 200\ncheck all\n",
        "INTERACT" => {
            "stages 300\n\
             assign 0 S 0\nassign 1 R 0\nassign 2 P 0\n\
             copier 0 delay 0\nphi-honest 0 delay 1\n\
             ce 0 40 0000000000\n\
             check all\n"
        }
        _ => return None,
    };
    Some(parse_scenario(text).expect("canned scenarios parse"))
}

/// `GEN-MEET`: `W_0` enumerates every length-8 string at stage 10.
fn gen_meet() -> Scenario {
    let mut sc = parse_scenario("stages 200\ncheck all\n").expect("static text");
    for v in 0..256u32 {
        let string = Bits::from_bools((0..8).rev().map(|b| v >> b & 1 == 1).collect());
        sc.ce.push(CeDirective {
            index: 0,
            stage: 10,
            string,
        });
    }
    sc
}
