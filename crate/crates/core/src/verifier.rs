//! Invariant checks over a finished trace.
//!
//! Every check is a pure function of the events (plus the scenario where
//! the adversary matters) and only speaks about the recorded horizon.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::engine::stable_prefix;
use crate::graph::{add_stage_components, pair_isomorphic, BuiltGraph, Parity, Side};
use crate::machine::MEdge;
use crate::replay::{ReplayNode, Replayer};
use crate::scenario::{Scenario, CHECK_NAMES};
use crate::strategy::{Outcome, Requirement, TreeAddress};
use crate::trace::{horizon, EventKind, Param, TraceEvent};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub stage: usize,
    pub explanation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    pub horizon: usize,
    pub first_violation: Option<Violation>,
    pub stats: BTreeMap<String, u64>,
}

impl CheckReport {
    fn new(check: &str, events: &[TraceEvent]) -> Self {
        CheckReport {
            check: check.to_string(),
            pass: true,
            horizon: horizon(events),
            first_violation: None,
            stats: BTreeMap::new(),
        }
    }

    /// Records a violation; only the first one is kept.
    fn violate(&mut self, stage: usize, explanation: impl Into<String>) {
        if self.pass {
            self.pass = false;
            self.first_violation = Some(Violation {
                stage,
                explanation: explanation.into(),
            });
        }
    }

    fn stat(&mut self, key: &str, v: u64) {
        self.stats.insert(key.to_string(), v);
    }

    fn bump(&mut self, key: &str) {
        *self.stats.entry(key.to_string()).or_insert(0) += 1;
    }

    /// One JSON object on one line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} (horizon {})", self.check, self.horizon)?;
        if let Some(v) = &self.first_violation {
            write!(f, ": stage {}: {}", v.stage, v.explanation)?;
        }
        if !self.stats.is_empty() {
            let parts: Vec<String> = self.stats.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, " [{}]", parts.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("check `{0}` needs the scenario")]
    NeedsScenario(String),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum When {
    Before,
    After,
}

/// Replays `events`, calling `hook` just before and just after applying
/// each one. A replay failure becomes a violation. The adversaries are
/// replayed only when `world` is set.
fn fold(
    report: &mut CheckReport,
    events: &[TraceEvent],
    scenario: Option<&Scenario>,
    world: bool,
    mut hook: impl FnMut(&mut CheckReport, &Replayer, &TraceEvent, When),
) -> Replayer {
    let mut r = if world {
        Replayer::new(scenario)
    } else {
        Replayer::bare(scenario.map(|s| s.assignment.clone()).unwrap_or_default())
    };
    for e in events {
        hook(report, &r, e, When::Before);
        if let Err(x) = r.apply(e) {
            report.violate(x.stage, format!("trace does not replay: {}", x.message));
            break;
        }
        hook(report, &r, e, When::After);
    }
    r
}

/// S nodes `γ` with `γ⌢∞ ⊆ addr`, top-down.
fn s_inf_ancestors<'a>(r: &'a Replayer, addr: &TreeAddress) -> Vec<(TreeAddress, &'a ReplayNode)> {
    (0..addr.level())
        .filter(|l| addr.0[*l] == Outcome::Inf)
        .filter_map(|l| {
            let gamma = addr.prefix(l);
            let rec = r.nodes.get(&gamma)?;
            rec.requirement.is_s().then_some((gamma, rec))
        })
        .collect()
}

/// Every component of both graphs is in a legal configuration, and pairs
/// only move base → diagonalized → homogenized.
pub fn check_shapes(events: &[TraceEvent]) -> CheckReport {
    let mut rep = CheckReport::new("shapes", events);
    let mut a = BuiltGraph::new(Side::A);
    let mut b = BuiltGraph::new(Side::B);
    for e in events {
        let (side, pair) = match &e.kind {
            EventKind::ComponentAdded { pair } => {
                if let Err(x) = add_stage_components(&mut a, &mut b, *pair) {
                    rep.violate(e.stage, x.to_string());
                }
                rep.bump("components_added");
                continue;
            }
            EventKind::Diagonalized { graph, pair } => {
                let g = if *graph == Side::A { &mut a } else { &mut b };
                let state = describe(g, *pair);
                if g.diagonalize(*pair).is_err() {
                    rep.violate(e.stage, format!("pair {pair} of {graph} diagonalized while {state}"));
                }
                rep.bump("diagonalized");
                (*graph, *pair)
            }
            EventKind::Homogenized { graph, pair } => {
                let g = if *graph == Side::A { &mut a } else { &mut b };
                let state = describe(g, *pair);
                if !g.is_diagonalized_only(*pair) {
                    rep.violate(e.stage, format!("pair {pair} of {graph} homogenized while {state}"));
                }
                let _ = g.homogenize(*pair);
                rep.bump("homogenized");
                (*graph, *pair)
            }
            _ => continue,
        };
        let g = if side == Side::A { &a } else { &b };
        for parity in Parity::BOTH {
            if let Ok(c) = g.component(pair, parity) {
                if c.kind().is_none() {
                    rep.violate(
                        e.stage,
                        format!("{} has illegal shape {:?}", c.label(), c.shape().lengths()),
                    );
                }
            }
        }
    }
    rep
}

fn describe(g: &BuiltGraph, pair: usize) -> &'static str {
    match g.component(pair, Parity::Even).ok().and_then(|c| c.kind()) {
        None if !g.has_pair(pair) => "missing",
        None => "illegal",
        Some(crate::graph::ShapeKind::Base) => "base",
        Some(crate::graph::ShapeKind::Diagonalized) => "diagonalized",
        Some(crate::graph::ShapeKind::Homogenized) => "homogenized",
    }
}

/// `A ≅ B` at every stage end, compared pair by pair.
pub fn check_ab_isomorphic(events: &[TraceEvent]) -> CheckReport {
    let mut rep = CheckReport::new("ab_isomorphic", events);
    let mut a = BuiltGraph::new(Side::A);
    let mut b = BuiltGraph::new(Side::B);
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for e in events {
        match &e.kind {
            EventKind::ComponentAdded { pair } => {
                let _ = a.add_pair(*pair);
                let _ = b.add_pair(*pair);
                touched.insert(*pair);
            }
            EventKind::Diagonalized { graph, pair } => {
                let _ = if *graph == Side::A { a.diagonalize(*pair) } else { b.diagonalize(*pair) };
                touched.insert(*pair);
            }
            EventKind::Homogenized { graph, pair } => {
                let _ = if *graph == Side::A { a.homogenize(*pair) } else { b.homogenize(*pair) };
                touched.insert(*pair);
            }
            EventKind::PathComputed { .. } => {
                rep.bump("stage_ends");
                for n in std::mem::take(&mut touched) {
                    if !pair_isomorphic(&a, &b, n) {
                        rep.violate(e.stage, format!("pair {n} differs between A and B"));
                    }
                }
            }
            _ => {}
        }
    }
    rep
}

/// No S node is challenged by a second P node while a challenge is held.
pub fn check_unique_challenger(events: &[TraceEvent]) -> CheckReport {
    let mut rep = CheckReport::new("unique_challenger", events);
    let mut held: HashMap<TreeAddress, TreeAddress> = HashMap::new();
    for e in events {
        match &e.kind {
            EventKind::ChallengeIssued { challenger, target, .. } => {
                rep.bump("issued");
                if let Some(c0) = held.get(target) {
                    rep.violate(
                        e.stage,
                        format!("{target} challenged by {challenger} while held by {c0}"),
                    );
                }
                held.insert(target.clone(), challenger.clone());
            }
            EventKind::ChallengeCleared { target, .. } => {
                rep.bump("cleared");
                held.remove(target);
            }
            EventKind::Initialized { node } => {
                held.remove(node);
            }
            _ => {}
        }
    }
    rep
}

/// Snapshots outlast the image edges they certify, enumerated uses were 0
/// at every earlier stage end, and computation uses are pairwise distinct.
pub fn check_use_discipline(events: &[TraceEvent]) -> CheckReport {
    let mut rep = CheckReport::new("use_discipline", events);
    let mut uses: HashSet<usize> = HashSet::new();
    let mut ever_one: BTreeSet<usize> = BTreeSet::new();
    let mut r = Replayer::bare(Default::default());
    for e in events {
        match &e.kind {
            EventKind::ComputationDefined {
                node,
                pair,
                snapshot,
                image_edge_use_max,
                ..
            } => {
                rep.bump("computations");
                if snapshot.len <= *image_edge_use_max {
                    rep.violate(
                        e.stage,
                        format!(
                            "{node} on pair {pair}: snapshot length {} does not exceed image use {image_edge_use_max}",
                            snapshot.len
                        ),
                    );
                }
                let u = snapshot.len.saturating_sub(1);
                if !uses.insert(u) {
                    rep.violate(e.stage, format!("{node} on pair {pair} reuses use {u}"));
                }
            }
            EventKind::GBitSet { node, pos } => {
                rep.bump("enumerations");
                if ever_one.contains(pos) {
                    rep.violate(e.stage, format!("{node} enumerates {pos}, which was 1 at an earlier stage end"));
                }
            }
            _ => {}
        }
        if let Err(x) = r.apply(e) {
            rep.violate(x.stage, format!("trace does not replay: {}", x.message));
            break;
        }
        if matches!(e.kind, EventKind::PathComputed { .. }) {
            ever_one.extend(r.g.ones());
        }
    }
    rep
}

/// For S `α` and R/P `β ⊋ α⌢∞` with `m_β` defined: once `n_α ≥ m_β` at a
/// stage end, it stays so at every later stage end until either node is
/// initialized.
pub fn check_param_monotonicity(events: &[TraceEvent], scenario: Option<&Scenario>) -> CheckReport {
    let mut rep = CheckReport::new("param_monotonicity", events);
    // (id of α, id of β) whose window is open
    let mut open: HashSet<(u64, u64)> = HashSet::new();
    let mut dirty_s: BTreeSet<TreeAddress> = BTreeSet::new();
    let mut dirty_rp: BTreeSet<TreeAddress> = BTreeSet::new();
    let mut last_n: HashMap<u64, usize> = HashMap::new();
    let mut g_changed = false;
    let hook = |rep: &mut CheckReport, r: &Replayer, e: &TraceEvent, when: When| match &e.kind {
        _ if when == When::Before => {}
        EventKind::ParamDefined { node, param, .. } => {
            if let Some(rec) = r.nodes.get(node) {
                if rec.requirement.is_s() {
                    dirty_s.insert(node.clone());
                } else if *param == Param::M {
                    dirty_rp.insert(node.clone());
                }
            }
        }
        EventKind::GTailSet { .. } | EventKind::GBitSet { .. } => g_changed = true,
        EventKind::PathComputed { .. } => {
            let mut check = |rep: &mut CheckReport, alpha: &TreeAddress, sa: &ReplayNode, beta: &TreeAddress, rb: &ReplayNode| {
                let (Some(na), Some(mb)) = (sa.n, rb.m) else { return };
                let key = (sa.id, rb.id);
                if na >= mb {
                    open.insert(key);
                } else if open.contains(&key) {
                    rep.violate(e.stage, format!("n of {alpha} dropped to {na}, below m = {mb} of {beta}"));
                }
            };
            for alpha in std::mem::take(&mut dirty_s) {
                let Some(sa) = r.nodes.get(&alpha) else { continue };
                if let Some(prev) = last_n.insert(sa.id, sa.n.unwrap_or(0)) {
                    if sa.n.unwrap_or(0) < prev {
                        rep.bump(if g_changed { "n_drops_with_g_change" } else { "n_drops_without_g_change" });
                    }
                }
                let below = alpha.child(Outcome::Inf);
                let mut betas: Vec<_> = r
                    .nodes
                    .iter()
                    .filter(|(beta, rb)| !rb.requirement.is_s() && below.is_prefix_of(beta))
                    .collect();
                betas.sort_by(|x, y| x.0.cmp(y.0));
                for (beta, rb) in betas {
                    check(rep, &alpha, sa, beta, rb);
                }
            }
            for beta in std::mem::take(&mut dirty_rp) {
                let Some(rb) = r.nodes.get(&beta) else { continue };
                for (alpha, sa) in s_inf_ancestors(r, &beta) {
                    check(rep, &alpha, sa, &beta, rb);
                }
            }
            rep.stat("open_windows", open.len() as u64);
            g_changed = false;
        }
        _ => {}
    };
    fold(&mut rep, events, scenario, false, hook);
    rep
}

/// When an R node sets a tail of `G`, the computations of its S-∞
/// ancestors on the pairs `n_δ` of its R/P ancestors `δ` stay valid.
pub fn check_waiting_lemma(events: &[TraceEvent], scenario: Option<&Scenario>) -> CheckReport {
    let mut rep = CheckReport::new("waiting_lemma", events);
    // (γ, pair, computation index, δ) valid just before the current event
    let mut protected: Vec<(TreeAddress, usize, usize, TreeAddress)> = Vec::new();
    let hook = |rep: &mut CheckReport, r: &Replayer, e: &TraceEvent, when: When| {
        let EventKind::GTailSet { node, .. } = &e.kind else { return };
        if when == When::After {
            for (gamma, pair, k, delta) in &protected {
                rep.bump("protected_computations");
                let c = &r.nodes[gamma].computations[*k];
                if !r.g.snapshot_matches(&c.snapshot) {
                    rep.violate(
                        e.stage,
                        format!("tail set by {node} voids {gamma}'s computation on pair {pair} (n of {delta})"),
                    );
                }
            }
            return;
        }
        protected.clear();
        rep.bump("tails_set");
        let pairs: Vec<(TreeAddress, usize)> = (0..node.level())
            .map(|l| node.prefix(l))
            .filter_map(|d| {
                let rec = r.nodes.get(&d)?;
                let n = rec.n?;
                (!rec.requirement.is_s()).then_some((d, n))
            })
            .collect();
        for (gamma, rec) in s_inf_ancestors(r, node) {
            for (delta, pair) in &pairs {
                let found = rec
                    .computations
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(_, c)| c.pair == *pair && r.g.snapshot_matches(&c.snapshot));
                if let Some((k, _)) = found {
                    protected.push((gamma.clone(), *pair, k, delta.clone()));
                }
            }
        }
    };
    fold(&mut rep, events, scenario, false, hook);
    rep
}

/// The finite-horizon content of "every node on the true path satisfies its
/// requirement", read off the stable prefix.
pub fn check_requirements_at_horizon(events: &[TraceEvent], scenario: &Scenario) -> CheckReport {
    let mut rep = CheckReport::new("requirements_at_horizon", events);
    let r = fold(&mut rep, events, Some(scenario), true, |_, _, _, _| {});
    if !rep.pass {
        return rep;
    }
    let world = r.world().expect("replayed with a scenario");
    let n_h = r.stage;
    let stable = stable_prefix(&r.paths);
    let last_on_path = |alpha: &TreeAddress| {
        r.paths
            .iter()
            .enumerate()
            .rev()
            .find(|(_, p)| alpha.level() < p.level() && alpha.is_prefix_of(p))
            .map_or(n_h, |(i, _)| i + 1)
    };
    for level in 0..=stable.level() {
        let alpha = stable.prefix(level);
        let Some(rec) = r.nodes.get(&alpha) else { continue };
        match (rec.requirement, rec.last_outcome) {
            (Requirement::R(j), Some(Outcome::Succ)) => {
                rep.bump("r_meet");
                let met = world.ce.get(&j).is_some_and(|w| {
                    w.members_at(n_h)
                        .any(|sigma| r.g.prefix_bits(sigma.len()) == *sigma)
                });
                if !met {
                    rep.violate(n_h, format!("{alpha} (R{j}) succeeded but no prefix of G is in W{j}"));
                }
            }
            (Requirement::R(j), Some(Outcome::Wait(1))) => {
                rep.bump("r_avoid");
                let Some(n) = rec.n else {
                    rep.violate(n_h, format!("{alpha} (R{j}) waits at 1 without n"));
                    continue;
                };
                let sigma = r.g.prefix_bits(n);
                let t = last_on_path(&alpha);
                let meets = world
                    .ce
                    .get(&j)
                    .and_then(|w| w.members_at(t).find(|tau| sigma.is_prefix_of(tau)).cloned());
                if let Some(tau) = meets {
                    rep.violate(n_h, format!("{alpha} (R{j}) parked but {tau} in W{j} extends G|{n}"));
                }
            }
            (Requirement::P(e), Some(Outcome::Succ)) => {
                rep.bump("p_diagonalized");
                let Some(n) = rec.n else {
                    rep.violate(n_h, format!("{alpha} (P{e}) succeeded without n"));
                    continue;
                };
                let (Ok(ca), Ok(cb)) = (r.a.component(n, Parity::Even), r.b.component(n, Parity::Even)) else {
                    rep.violate(n_h, format!("pair {n} of {alpha} (P{e}) is missing"));
                    continue;
                };
                let maps = world.phi.get(&e).and_then(|phi| phi.value_at(ca.root, n_h)) == Some(cb.root);
                if !maps {
                    rep.violate(n_h, format!("Phi{e} does not send a{} to b{}", 2 * n, 2 * n));
                } else if ca.shape() == cb.shape() {
                    rep.violate(n_h, format!("pair {n} of {alpha} (P{e}) is no longer diagonalized"));
                }
            }
            (Requirement::S(i), _) => {
                let Some(slot) = world.machines.get(&i).filter(|s| s.copier.is_some()) else { continue };
                rep.bump("s_copied");
                let edges: HashSet<MEdge> = slot.machine.edges_at(&r.g, n_h).into_iter().collect();
                let n = rec.n.unwrap_or(1);
                for pair in 1..n {
                    if rec.valid_computation(pair, &r.g).is_none() {
                        rep.violate(n_h, format!("{alpha} (S{i}) has n = {n} but pair {pair} is unmapped"));
                    }
                }
                let pairs: BTreeSet<usize> = rec.computations.iter().map(|c| c.pair).collect();
                for pair in pairs {
                    let Some(c) = rec.valid_computation(pair, &r.g) else { continue };
                    rep.bump("s_computations_checked");
                    if let Err(why) = embeds(&r.a, pair, &c.node_map, &edges) {
                        rep.violate(n_h, format!("{alpha} (S{i}) pair {pair}: {why}"));
                    }
                }
            }
            _ => {}
        }
    }
    rep
}

/// Whether `map` is an injective, edge-preserving map of the pair-`pair`
/// components of `a` (restricted to its domain) into `edges`.
fn embeds(a: &BuiltGraph, pair: usize, map: &[(crate::graph::NodeId, u32)], edges: &HashSet<MEdge>) -> Result<(), String> {
    let f: HashMap<_, _> = map.iter().copied().collect();
    let image: HashSet<u32> = f.values().copied().collect();
    if image.len() != f.len() || f.len() != map.len() {
        return Err("map is not injective".into());
    }
    for parity in Parity::BOTH {
        let c = a.component(pair, parity).map_err(|x| x.to_string())?;
        if !f.contains_key(&c.root) {
            return Err(format!("root {} unmapped", c.label()));
        }
        for (x, y) in c.edges() {
            if let (Some(fx), Some(fy)) = (f.get(&x), f.get(&y)) {
                if !edges.contains(&(*fx, *fy)) {
                    return Err(format!("edge {x}->{y} maps to missing {fx}->{fy}"));
                }
            }
        }
    }
    Ok(())
}

/// Change counts of `G`, plus stability below R parameters: `G↾n_α` is
/// fixed at stage ends while R node `α` holds `n_α`, `G↾|τ| = τ` while it
/// holds a found `τ`, and no position below the `n` of an R node on the
/// stable prefix changes after `n` was defined.
pub fn check_delta2(events: &[TraceEvent], scenario: Option<&Scenario>) -> CheckReport {
    let mut rep = CheckReport::new("delta2", events);
    // R node → (record id, n, change-log length when n was defined)
    let mut r_params: BTreeMap<TreeAddress, (u64, usize, usize)> = BTreeMap::new();
    let mut log_seen = 0usize;
    let hook = |rep: &mut CheckReport, r: &Replayer, e: &TraceEvent, when: When| match &e.kind {
        _ if when == When::Before => {}
        EventKind::ParamDefined { node, param: Param::N, value: Some(n) } => {
            if let Some(rec) = r.nodes.get(node) {
                if matches!(rec.requirement, Requirement::R(_)) {
                    r_params.insert(node.clone(), (rec.id, *n, r.g.change_log().len()));
                }
            }
        }
        EventKind::PathComputed { .. } => {
            let log = r.g.change_log();
            r_params.retain(|addr, (id, _, _)| r.nodes.get(addr).is_some_and(|rec| rec.id == *id));
            for (addr, (_, n, since)) in &r_params {
                let from = (*since).max(log_seen);
                if let Some(c) = log[from..].iter().find(|c| c.pos < *n) {
                    rep.violate(e.stage, format!("position {} changed below n = {n} of {addr}", c.pos));
                }
            }
            if log.len() > log_seen {
                let broken = r
                    .nodes
                    .iter()
                    .filter_map(|(addr, rec)| Some((addr, rec.found_tau.as_ref()?)))
                    .filter(|(_, tau)| r.g.prefix_bits(tau.len()) != **tau)
                    .min();
                if let Some((addr, tau)) = broken {
                    rep.violate(e.stage, format!("G no longer extends the tau {tau} found by {addr}"));
                }
            }
            log_seen = log.len();
        }
        _ => {}
    };
    let r = fold(&mut rep, events, scenario, false, hook);
    let counts = r.g.change_counts();
    rep.stat("changes", r.g.change_log().len() as u64);
    rep.stat("positions_changed", counts.len() as u64);
    rep.stat("max_changes_per_position", counts.values().copied().max().unwrap_or(0) as u64);
    let stable = stable_prefix(&r.paths);
    for (addr, (_, n, since)) in &r_params {
        if !addr.is_prefix_of(&stable) || addr == &stable {
            continue;
        }
        rep.bump("stable_r_params");
        if let Some(c) = r.g.change_log()[*since..].iter().find(|c| c.pos < *n) {
            rep.violate(c.stage, format!("position {} changed below stable n = {n} of {addr}", c.pos));
        }
    }
    rep
}

/// Runs one named check.
pub fn run_check(name: &str, events: &[TraceEvent], scenario: Option<&Scenario>) -> Result<CheckReport, VerifyError> {
    Ok(match name {
        "shapes" => check_shapes(events),
        "ab_isomorphic" => check_ab_isomorphic(events),
        "unique_challenger" => check_unique_challenger(events),
        "use_discipline" => check_use_discipline(events),
        "param_monotonicity" => check_param_monotonicity(events, scenario),
        "waiting_lemma" => check_waiting_lemma(events, scenario),
        "requirements_at_horizon" => {
            let sc = scenario.ok_or_else(|| VerifyError::NeedsScenario(name.into()))?;
            check_requirements_at_horizon(events, sc)
        }
        "delta2" => check_delta2(events, scenario),
        _ => return Err(VerifyError::UnknownCheck(name.into())),
    })
}

/// Runs the named checks (`all` expands to every check) in canonical order.
pub fn run_checks<S: AsRef<str>>(
    names: &[S],
    events: &[TraceEvent],
    scenario: Option<&Scenario>,
) -> Result<Vec<CheckReport>, VerifyError> {
    let mut want: BTreeSet<&str> = BTreeSet::new();
    for n in names {
        let n = n.as_ref();
        if n == "all" {
            want.extend(CHECK_NAMES.iter().copied());
        } else if CHECK_NAMES.contains(&n) {
            want.insert(n);
        } else {
            return Err(VerifyError::UnknownCheck(n.into()));
        }
    }
    CHECK_NAMES
        .iter()
        .filter(|c| want.contains(*c))
        .map(|c| run_check(c, events, scenario))
        .collect()
}

/// Text rendering, one report per line.
pub fn render_text(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| format!("{r}\n")).collect()
}

/// Line-delimited JSON rendering.
pub fn render_json(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| format!("{}\n", r.to_json_line())).collect()
}
