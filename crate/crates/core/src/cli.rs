//! The `prisim` command line: run, check, diff, sweep and the coding
//! utilities.
//!
//! Exit codes: 0 when every requested check passes, 1 on a check failure
//! (or a non-empty diff), 2 on usage or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::codings::{decode, encode, parse_graph, TextGraph};
use crate::engine::Engine;
use crate::scenario::{canned_scenario, parse_scenario, Scenario, CANNED_NAMES};
use crate::trace::{parse_trace, trace_to_string, TraceEvent};
use crate::verifier::{render_json, render_text, run_checks, CheckReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "prisim", version, about = "Priority-tree construction simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the engine on a scenario and optionally check the trace.
    Run(RunArgs),
    /// Check an existing trace.
    Check(CheckArgs),
    /// Structural diff of two traces.
    Diff { a: PathBuf, b: PathBuf },
    /// Run every check on a range of seeded random scenarios.
    Sweep(SweepArgs),
    /// Encode a digraph file into a symmetric graph.
    Encode {
        input: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Decode a symmetric graph file back into a digraph.
    Decode { input: PathBuf },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Scenario file.
    #[arg(long, conflicts_with_all = ["canned", "seed"])]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario (DIAG, GEN-MEET, GEN-AVOID, INTERACT).
    #[arg(long, conflicts_with = "seed")]
    pub canned: Option<String>,
    /// Seed for a random scenario.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stage limit; overrides the scenario's.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Where to write the trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Comma-separated checks, or `all`; overrides the scenario's.
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
    /// Directory for per-stage DOT snapshots of A and B.
    #[arg(long)]
    pub dot_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub check: Vec<String>,
    /// Scenario the trace came from; some checks need it.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario the trace came from.
    #[arg(long, conflicts_with = "scenario")]
    pub canned: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    #[arg(long, default_value_t = 150)]
    pub stages: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Run(a) => cmd_run(&a, out),
        Command::Check(a) => cmd_check(&a, out),
        Command::Diff { a, b } => {
            let ta = load_trace(&a)?;
            let tb = load_trace(&b)?;
            let d = diff_traces(&ta, &tb);
            write!(out, "{}", d.render())?;
            Ok(if d.is_empty() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Encode { input, dot } => {
            let TextGraph::Digraph(d) = parse_graph(&read(&input)?)? else {
                bail!("{}: expected a digraph", input.display());
            };
            let (s, _) = encode(&d)?;
            write!(out, "{}", if dot { s.to_dot("encoded") } else { s.to_text() })?;
            Ok(EXIT_PASS)
        }
        Command::Decode { input } => {
            let TextGraph::SymGraph(s) = parse_graph(&read(&input)?)? else {
                bail!("{}: expected a symgraph", input.display());
            };
            match decode(&s) {
                Ok(d) => {
                    write!(out, "{}", d.digraph.compact().0.to_text())?;
                    Ok(EXIT_PASS)
                }
                Err(e) => {
                    writeln!(out, "{e}")?;
                    Ok(EXIT_FAIL)
                }
            }
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_trace(path: &Path) -> anyhow::Result<Vec<TraceEvent>> {
    parse_trace(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_scenario(file: Option<&Path>, canned: Option<&str>) -> anyhow::Result<Option<Scenario>> {
    if let Some(name) = canned {
        let sc = canned_scenario(name)
            .with_context(|| format!("unknown canned scenario `{name}` (have {})", CANNED_NAMES.join(", ")))?;
        return Ok(Some(sc));
    }
    match file {
        Some(p) => {
            let sc = parse_scenario(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
            Ok(Some(sc))
        }
        None => Ok(None),
    }
}

fn report(reports: &[CheckReport], json: bool, out: &mut dyn Write) -> anyhow::Result<i32> {
    out.write_all(if json { render_json(reports) } else { render_text(reports) }.as_bytes())?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let mut sc = match (load_scenario(a.scenario.as_deref(), a.canned.as_deref())?, a.seed) {
        (Some(sc), _) => sc,
        (None, Some(seed)) => Scenario::random(seed, a.stages.unwrap_or(150)),
        (None, None) => bail!("one of --scenario, --canned or --seed is required"),
    };
    if let Some(n) = a.stages {
        sc.stages = Some(n);
    }
    let stages = match sc.stages {
        Some(0) => bail!("--stages must be at least 1"),
        Some(n) => n,
        None => bail!("no stage limit: pass --stages or add `stages N` to the scenario"),
    };
    if !a.check.is_empty() {
        sc.checks = a.check.clone();
    }
    if let Some(dir) = &a.dot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut engine = Engine::new(&sc);
    for _ in 0..stages {
        engine.run_stage();
        if let Some(dir) = &a.dot_dir {
            let s = engine.stage;
            for (g, name) in [(&engine.a, "A"), (&engine.b, "B")] {
                let p = dir.join(format!("stage{s:04}_{name}.dot"));
                fs::write(&p, g.to_dot(name)).with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    if let Some(p) = &a.trace {
        fs::write(p, trace_to_string(&engine.trace)).with_context(|| format!("writing {}", p.display()))?;
    }
    let path = engine.paths.last().map(|p| p.to_string()).unwrap_or_default();
    writeln!(out, "ran {stages} stages, {} events, final path {path}", engine.trace.len())?;
    let reports = run_checks(&sc.checks, &engine.trace, Some(&sc))?;
    report(&reports, a.json, out)
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let events = load_trace(&a.trace)?;
    let sc = load_scenario(a.scenario.as_deref(), a.canned.as_deref())?;
    let reports = run_checks(&a.check, &events, sc.as_ref())?;
    report(&reports, a.json, out)
}

/// One sweep run.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub seed: u64,
    pub elapsed: Duration,
    pub reports: Vec<CheckReport>,
}

impl SweepResult {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs `Scenario::random(seed, stages)` with every check for each seed,
/// on `jobs` threads. Results come back in seed order.
pub fn run_sweep(seeds: std::ops::Range<u64>, stages: usize, jobs: usize) -> Vec<SweepResult> {
    let next = AtomicU64::new(seeds.start);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1) {
            scope.spawn(|| loop {
                let seed = next.fetch_add(1, Ordering::Relaxed);
                if seed >= seeds.end {
                    break;
                }
                let t = Instant::now();
                let sc = Scenario::random(seed, stages);
                let mut e = Engine::new(&sc);
                e.run(stages);
                let reports = run_checks(&["all"], &e.trace, Some(&sc)).expect("all is a known check list");
                let r = SweepResult {
                    seed,
                    elapsed: t.elapsed(),
                    reports,
                };
                results.lock().expect("no worker panics while holding the lock").push(r);
            });
        }
    });
    let mut v = results.into_inner().expect("workers joined");
    v.sort_by_key(|r| r.seed);
    v
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    if a.stages == 0 {
        bail!("--stages must be at least 1");
    }
    let t = Instant::now();
    let results = run_sweep(a.first_seed..a.first_seed + a.seeds, a.stages, a.jobs);
    let mut failed = 0;
    for r in &results {
        for rep in r.reports.iter().filter(|rep| !rep.pass) {
            writeln!(out, "seed {}: {rep}", r.seed)?;
        }
        failed += usize::from(!r.pass());
    }
    writeln!(
        out,
        "{} scenarios x {} stages, {failed} failed, {:.2?}",
        results.len(),
        a.stages,
        t.elapsed()
    )?;
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_FAIL })
}

/// Events of one kind at one stage that differ between two traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffEntry {
    pub stage: usize,
    pub kind: &'static str,
    pub left: Vec<String>,
    pub right: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceDiff {
    Identical,
    /// The left trace is the right one cut off after `left_horizon`.
    LeftPrefix { left_horizon: usize, right_horizon: usize },
    RightPrefix { left_horizon: usize, right_horizon: usize },
    Diverged { first_stage: usize, entries: Vec<DiffEntry> },
}

impl TraceDiff {
    pub fn is_empty(&self) -> bool {
        *self == TraceDiff::Identical
    }

    /// Empty for identical traces.
    pub fn render(&self) -> String {
        match self {
            TraceDiff::Identical => String::new(),
            TraceDiff::LeftPrefix {
                left_horizon,
                right_horizon,
            } => format!("prefix: A (stage {left_horizon}) is a prefix of B (stage {right_horizon})\n"),
            TraceDiff::RightPrefix {
                left_horizon,
                right_horizon,
            } => format!("prefix: B (stage {right_horizon}) is a prefix of A (stage {left_horizon})\n"),
            TraceDiff::Diverged { first_stage, entries } => {
                let mut s = format!("first divergent stage: {first_stage}\n");
                for e in entries {
                    s.push_str(&format!("@ stage {} {}\n", e.stage, e.kind));
                    for l in &e.left {
                        s.push_str(&format!("- {l}\n"));
                    }
                    for l in &e.right {
                        s.push_str(&format!("+ {l}\n"));
                    }
                }
                s
            }
        }
    }
}

/// Compares two traces grouped by (stage, event kind). A trace ending where
/// the other still continues, with everything before agreeing, is reported
/// as a prefix.
pub fn diff_traces(a: &[TraceEvent], b: &[TraceEvent]) -> TraceDiff {
    use std::collections::BTreeMap;
    let group = |t: &[TraceEvent]| {
        let mut m: BTreeMap<(usize, &'static str), Vec<String>> = BTreeMap::new();
        for e in t {
            m.entry((e.stage, e.kind.name()))
                .or_default()
                .push(crate::trace::event_to_line(e));
        }
        m
    };
    let (ga, gb) = (group(a), group(b));
    let (ha, hb) = (crate::trace::horizon(a), crate::trace::horizon(b));
    let keys: std::collections::BTreeSet<_> = ga.keys().chain(gb.keys()).copied().collect();
    let empty = Vec::new();
    let mut entries = Vec::new();
    for k in keys {
        let (l, r) = (ga.get(&k).unwrap_or(&empty), gb.get(&k).unwrap_or(&empty));
        // stages beyond the shorter trace only count once both have them
        if l == r || k.0 > ha.min(hb) {
            continue;
        }
        entries.push(DiffEntry {
            stage: k.0,
            kind: k.1,
            left: l.iter().filter(|x| !r.contains(x)).cloned().collect(),
            right: r.iter().filter(|x| !l.contains(x)).cloned().collect(),
        });
    }
    if let Some(first) = entries.first().map(|e| e.stage) {
        let entries = entries.into_iter().filter(|e| e.stage == first).collect();
        return TraceDiff::Diverged {
            first_stage: first,
            entries,
        };
    }
    match ha.cmp(&hb) {
        std::cmp::Ordering::Equal => TraceDiff::Identical,
        std::cmp::Ordering::Less => TraceDiff::LeftPrefix {
            left_horizon: ha,
            right_horizon: hb,
        },
        std::cmp::Ordering::Greater => TraceDiff::RightPrefix {
            left_horizon: ha,
            right_horizon: hb,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_scenario;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("prisim").chain(args.iter().copied()).map(OsString::from);
        let code = main_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn zero_stages_is_usage_error() {
        let (code, _, err) = run(&["run", "--canned", "DIAG", "--stages", "0"]);
        assert_eq!(code, EXIT_USAGE, "{err}");
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["run"]).0, EXIT_USAGE);
    }

    #[test]
    fn diff_kinds() {
        let sc = crate::scenario::canned_scenario("GEN-AVOID").unwrap();
        let t10 = run_scenario(&sc, Some(10)).trace;
        let t20 = run_scenario(&sc, Some(20)).trace;
        assert_eq!(diff_traces(&t10, &t10), TraceDiff::Identical);
        assert_eq!(diff_traces(&t10, &t10).render(), "");
        assert!(matches!(
            diff_traces(&t10, &t20),
            TraceDiff::LeftPrefix {
                left_horizon: 10,
                right_horizon: 20
            }
        ));
        assert!(matches!(diff_traces(&t20, &t10), TraceDiff::RightPrefix { .. }));
    }
}
