//! Finite-horizon acceptance run. Prints one PASS/FAIL line per criterion
//! and fails if any criterion does.
//!
//! Runs without the libtest harness so the lines always reach stdout, and
//! criteria run one after another so wall-clock budgets are not shared.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use priority_tree::bits::Bits;
use priority_tree::cli::run_sweep;
use priority_tree::codings::{
    canonical_iso_roundtrip, decode, encode, transport_iso, Digraph, Item, StreamingEncoder, SymGraph,
};
use priority_tree::engine::{run_scenario, stable_prefix, Engine};
use priority_tree::graph::{BuiltGraph, NodeId, Parity, Side};
use priority_tree::machine::{find_oldest_lexleast_pair, MNode};
use priority_tree::replay::replay;
use priority_tree::scenario::{canned_scenario, Scenario};
use priority_tree::strategy::{NodeState, Outcome, Requirement, TreeAddress};
use priority_tree::trace::{trace_to_string, EventKind, Param, TraceEvent};
use priority_tree::verifier::{run_check, CheckReport};
use rand::seq::SliceRandom;

use common::{brute_ages, brute_iso, brute_pair, is_digraph_iso, random_digraph, random_history, rng};

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn addr(s: &str) -> TreeAddress {
    s.parse().unwrap()
}

fn within(t: Instant, budget: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    if e < budget {
        Ok(e)
    } else {
        Err(format!("took {e:?}, budget {budget:?}"))
    }
}

fn check(name: &str, e: &Engine) -> Result<CheckReport, String> {
    let rep = run_check(name, &e.trace, Some(&e.scenario)).map_err(|x| x.to_string())?;
    if rep.pass {
        Ok(rep)
    } else {
        Err(rep.to_string())
    }
}

fn last_outcome(trace: &[TraceEvent], node: &TreeAddress) -> Option<(usize, Outcome)> {
    trace.iter().rev().find_map(|ev| match &ev.kind {
        EventKind::OutcomeTaken { node: n, outcome } if n == node => Some((ev.stage, *outcome)),
        _ => None,
    })
}

/// The node at `level` on the stable prefix.
fn stable_node(e: &Engine, level: usize) -> Result<TreeAddress, String> {
    let stable = stable_prefix(&e.paths);
    ensure!(stable.0.len() > level, "stable prefix {stable} has no level {level}");
    Ok(TreeAddress(stable.0[..level].to_vec()))
}

fn shape_of(g: &BuiltGraph, n: usize, p: Parity) -> Result<Vec<usize>, String> {
    g.component_shape(n, p).map(|s| s.0).map_err(|x| x.to_string())
}

fn diag_scenario() -> Verdict {
    let sc = canned_scenario("DIAG").unwrap();
    let t = Instant::now();
    let e = run_scenario(&sc, Some(200));
    let p0 = stable_node(&e, 1)?;
    ensure!(e.nodes.get(&p0).map(|r| r.requirement) == Some(Requirement::P(0)), "{p0} is not P0");
    let (at, o) = last_outcome(&e.trace, &p0).ok_or("P0 never acted")?;
    ensure!(o == Outcome::Succ, "P0 at {p0} ends in {o} (stage {at})");
    let n = e
        .trace
        .iter()
        .find_map(|ev| match ev.kind {
            EventKind::Diagonalized { pair, .. } => Some(pair),
            _ => None,
        })
        .ok_or("nothing diagonalized")?;
    let (k3, k4) = (vec![2, 5 * n + 1, 5 * n + 2, 5 * n + 3], vec![2, 5 * n + 1, 5 * n + 2, 5 * n + 4]);
    for (g, p, want) in [
        (&e.a, Parity::Even, &k3),
        (&e.a, Parity::Odd, &k4),
        (&e.b, Parity::Even, &k4),
        (&e.b, Parity::Odd, &k3),
    ] {
        let got = shape_of(g, n, p)?;
        ensure!(&got == want, "{:?} {p:?} pair {n}: {got:?}, want {want:?}", g.side());
    }
    let req = check("requirements_at_horizon", &e)?;
    ensure!(req.stats.get("p_diagonalized") >= Some(&1), "P clause not exercised: {req}");
    let el = within(t, Duration::from_secs(1))?;
    Ok(format!("P0 {p0} Succ since stage {at}, pair {n} diagonalized crosswise, {el:.2?}"))
}

fn gen_meet() -> Verdict {
    let sc = canned_scenario("GEN-MEET").unwrap();
    let t = Instant::now();
    let e = run_scenario(&sc, Some(200));
    let r0 = stable_node(&e, 2)?;
    ensure!(e.nodes.get(&r0).map(|r| r.requirement) == Some(Requirement::R(0)), "{r0} is not R0");
    let fired = e
        .trace
        .iter()
        .find(|ev| matches!(&ev.kind, EventKind::GTailSet { node, .. } if *node == r0))
        .ok_or(format!("{r0} never fired"))?
        .stage;
    let after: Vec<Outcome> = e
        .trace
        .iter()
        .filter(|ev| ev.stage > fired)
        .filter_map(|ev| match &ev.kind {
            EventKind::OutcomeTaken { node, outcome } if *node == r0 => Some(*outcome),
            _ => None,
        })
        .collect();
    ensure!(after.first() == Some(&Outcome::Succ), "after firing: {after:?}");
    ensure!(after.iter().all(|o| *o == Outcome::Succ), "Succ does not persist: {after:?}");
    // W_0 from the scenario text, independently of the engine
    let w0: BTreeSet<Bits> = sc
        .ce
        .iter()
        .filter(|d| d.index == 0 && d.stage <= 200)
        .map(|d| d.string.clone())
        .collect();
    let prefix = e.g.prefix_bits(8);
    ensure!(w0.contains(&prefix), "G prefix {prefix} not in W_0");
    check("waiting_lemma", &e)?;
    let el = within(t, Duration::from_secs(1))?;
    Ok(format!("R0 {r0} fired at stage {fired}, G starts {prefix}, {el:.2?}"))
}

fn gen_avoid() -> Verdict {
    let sc = canned_scenario("GEN-AVOID").unwrap();
    let t = Instant::now();
    let e = run_scenario(&sc, Some(200));
    let r0 = stable_node(&e, 2)?;
    ensure!(e.nodes.get(&r0).map(|r| r.requirement) == Some(Requirement::R(0)), "{r0} is not R0");
    let (at, o) = last_outcome(&e.trace, &r0).ok_or("R0 never acted")?;
    ensure!(o == Outcome::Wait(1), "R0 ends in {o}");
    let req = check("requirements_at_horizon", &e)?;
    ensure!(req.stats.get("r_avoid") >= Some(&1), "avoid clause not exercised: {req}");
    let el = within(t, Duration::from_secs(1))?;
    Ok(format!("R0 {r0} parked at w1 since stage {at}, {el:.2?}"))
}

/// Injective and edge-preserving on the mapped part of both components of
/// `pair`, with both roots mapped.
fn genuine_embedding(a: &BuiltGraph, pair: usize, map: &[(NodeId, MNode)], edges: &BTreeSet<(MNode, MNode)>) -> bool {
    let f: BTreeMap<NodeId, MNode> = map.iter().copied().collect();
    let image: BTreeSet<MNode> = f.values().copied().collect();
    if f.len() != map.len() || image.len() != f.len() {
        return false;
    }
    Parity::BOTH.iter().all(|p| {
        let Ok(c) = a.component(pair, *p) else { return false };
        f.contains_key(&c.root)
            && c.edges().all(|(x, y)| match (f.get(&x), f.get(&y)) {
                (Some(fx), Some(fy)) => edges.contains(&(*fx, *fy)),
                _ => true,
            })
    })
}

fn interact() -> Verdict {
    let sc = canned_scenario("INTERACT").unwrap();
    let t = Instant::now();
    let e = run_scenario(&sc, Some(300));
    let el = within(t, Duration::from_secs(2))?;
    let (beta, gamma) = (addr("inf"), addr("inf.w1"));
    let tr = &e.trace;
    let fired = tr
        .iter()
        .position(|ev| matches!(&ev.kind, EventKind::GTailSet { node, .. } if *node == beta))
        .ok_or("beta never fired")?;
    let s_fire = tr[fired].stage;
    let n = tr[..fired]
        .iter()
        .rev()
        .find_map(|ev| match &ev.kind {
            EventKind::ParamDefined {
                node,
                param: Param::N,
                value: Some(n),
            } if *node == gamma => Some(*n),
            _ => None,
        })
        .ok_or("gamma has no pair")?;
    let diag = tr[..fired]
        .iter()
        .find(|ev| matches!(ev.kind, EventKind::Diagonalized { pair, .. } if pair == n))
        .ok_or(format!("gamma's pair {n} not diagonalized before beta fired"))?
        .stage;
    let homog: Vec<Side> = tr[fired..]
        .iter()
        .take_while(|ev| ev.stage == s_fire)
        .filter_map(|ev| match ev.kind {
            EventKind::Homogenized { graph, pair } if pair == n => Some(graph),
            _ => None,
        })
        .collect();
    ensure!(homog == [Side::A, Side::B], "homogenized at stage {s_fire}: {homog:?}");
    let full = vec![2, 5 * n + 1, 5 * n + 2, 5 * n + 3, 5 * n + 4];
    for g in [&e.a, &e.b] {
        for p in Parity::BOTH {
            let got = shape_of(g, n, p)?;
            ensure!(got == full, "{:?} {p:?} pair {n}: {got:?}", g.side());
        }
    }
    // challenge ledger: gamma issues, then gets initialized when beta fires
    let issued = tr
        .iter()
        .position(|ev| matches!(&ev.kind, EventKind::ChallengeIssued { challenger, .. } if *challenger == gamma))
        .ok_or("gamma never challenged")?;
    let init = tr
        .iter()
        .position(|ev| matches!(&ev.kind, EventKind::Initialized { node } if *node == gamma))
        .ok_or("gamma never initialized")?;
    ensure!(issued < init && tr[init].stage == s_fire, "issue at {issued}, initialize at {init}");
    // every valid S computation embeds into the machine's current edges
    let mut checked = 0;
    for rec in e.nodes.values() {
        let (Requirement::S(i), NodeState::S(st)) = (rec.requirement, &rec.state) else { continue };
        let Some(slot) = e.world.machines.get(&i) else { continue };
        let edges = slot.machine.edges_at(&e.g, e.stage);
        for c in st.computations.iter().filter(|c| e.g.snapshot_matches(&c.snapshot)) {
            ensure!(genuine_embedding(&e.a, c.pair, &c.node_map, &edges), "S{i} pair {} is not an embedding", c.pair);
            checked += 1;
        }
    }
    ensure!(checked > 0, "no valid S computation at horizon");
    check("requirements_at_horizon", &e)?;
    Ok(format!(
        "pair {n} diagonalized at {diag}, homogenized in A and B at {s_fire}, {checked} embeddings, {el:.2?}"
    ))
}

fn sweep() -> Verdict {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let t = Instant::now();
    let results = run_sweep(0..100, 150, jobs);
    let el = within(t, Duration::from_secs(60))?;
    ensure!(results.len() == 100, "{} results", results.len());
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.pass())
        .map(|r| {
            let bad: Vec<&str> = r.reports.iter().filter(|x| !x.pass).map(|x| x.check.as_str()).collect();
            format!("seed {}: {}", r.seed, bad.join(","))
        })
        .collect();
    ensure!(failed.is_empty(), "{}", failed.join("; "));
    Ok(format!("100 seeds x 150 stages, all checks pass, {el:.2?} on {jobs} thread(s)"))
}

/// Stability of G below stable-path R parameters, recomputed from the change
/// log and the trace.
fn delta2_oracle(e: &Engine) -> Result<(usize, usize), String> {
    let counts = e.g.change_counts();
    let stages = e.stage;
    if let Some((pos, c)) = counts.iter().find(|(_, c)| **c > stages) {
        return Err(format!("position {pos} changed {c} times in {stages} stages"));
    }
    let stable = stable_prefix(&e.paths);
    let mut params = 0;
    for level in 0..=stable.0.len() {
        let alpha = TreeAddress(stable.0[..level].to_vec());
        if !matches!(e.nodes.get(&alpha).map(|r| r.requirement), Some(Requirement::R(_))) {
            continue;
        }
        // the newest definition of n not undone by an initialization
        let mut def = None;
        for ev in &e.trace {
            match &ev.kind {
                EventKind::ParamDefined {
                    node,
                    param: Param::N,
                    value,
                } if *node == alpha => def = value.map(|n| (ev.stage, n)),
                EventKind::Initialized { node } if *node == alpha => def = None,
                _ => {}
            }
        }
        let Some((since, n)) = def else { continue };
        params += 1;
        if let Some(c) = e.g.change_log().iter().find(|c| c.stage > since && c.pos < n) {
            return Err(format!("{alpha}: n = {n} since stage {since}, position {} changed at {}", c.pos, c.stage));
        }
    }
    Ok((params, counts.values().copied().max().unwrap_or(0)))
}

fn delta2_stats() -> Verdict {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let next = AtomicU64::new(0);
    let out = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let seed = next.fetch_add(1, Ordering::Relaxed);
                if seed >= 100 {
                    break;
                }
                let e = run_scenario(&Scenario::random(seed, 150), Some(150));
                let lib = run_check("delta2", &e.trace, Some(&e.scenario)).unwrap();
                out.lock().unwrap().push((seed, delta2_oracle(&e), lib.pass));
            });
        }
    });
    let mut rows = out.into_inner().unwrap();
    rows.sort_by_key(|r| r.0);
    let (mut params, mut max_changes) = (0, 0);
    for (seed, oracle, lib) in rows {
        let (p, m) = oracle.map_err(|why| format!("seed {seed}: {why}"))?;
        ensure!(lib, "seed {seed}: delta2 check fails");
        params += p;
        max_changes = max_changes.max(m);
    }
    Ok(format!(
        "100 runs, {params} stable R parameters, no change below any; max changes at one position {max_changes}"
    ))
}

fn copy_search() -> Verdict {
    let t = Instant::now();
    let (mut found, mut none) = (0, 0);
    for seed in 0..500 {
        let h = random_history(seed);
        ensure!(h.nodes <= 30, "history with {} nodes", h.nodes);
        let s = h.last_stage();
        let ages = brute_ages(&h.per_stage);
        let pattern = (&h.pattern.0, &h.pattern.1);
        let want = brute_pair(&h.per_stage[s - 1], &ages, pattern, &BTreeSet::new());
        let got = find_oldest_lexleast_pair(&h.machine, &h.idx, &h.g, s, pattern, &HashSet::new());
        ensure!(got == want, "seed {seed}: {got:?} vs {want:?}");
        if want.is_some() {
            found += 1;
        } else {
            none += 1;
        }
    }
    let el = within(t, Duration::from_secs(10))?;
    Ok(format!("500 histories ({found} with a pair, {none} without), {el:.2?}"))
}

fn items(d: &Digraph) -> Vec<Item> {
    d.vertices
        .iter()
        .map(|v| Item::Vertex(*v))
        .chain(d.edges.iter().map(|(u, v)| Item::Edge(*u, *v)))
        .collect()
}

/// Bijective on vertices and preserving edges in both directions.
fn sym_iso(h: &BTreeMap<u32, u32>, s0: &SymGraph, s1: &SymGraph) -> bool {
    let dom: BTreeSet<u32> = h.keys().copied().collect();
    let img: BTreeSet<u32> = h.values().copied().collect();
    let norm = |(u, v): (u32, u32)| (u.min(v), u.max(v));
    dom == s0.vertices
        && img == s1.vertices
        && s0.edges.len() == s1.edges.len()
        && s0.edges.iter().all(|(u, v)| s1.edges.contains(&norm((h[u], h[v]))))
}

fn codings() -> Verdict {
    let t = Instant::now();
    let mut r = rng(2024);
    for case in 0..100 {
        let d = random_digraph(&mut r, 8);
        // round trip
        let (s, _) = encode(&d).map_err(|x| x.to_string())?;
        let dec = decode(&s).map_err(|x| format!("case {case}: {x}"))?;
        let iso = canonical_iso_roundtrip(&d).map_err(|x| x.to_string())?;
        ensure!(is_digraph_iso(&iso, &dec.digraph, &d), "case {case}: round trip map is not an iso");
        ensure!(brute_iso(&dec.digraph, &d).is_some(), "case {case}: brute force finds no iso");
        // transport along a random relabelling
        let mut perm: Vec<u32> = d.vertices.iter().copied().collect();
        perm.shuffle(&mut r);
        let h: BTreeMap<u32, u32> = d.vertices.iter().copied().zip(perm).collect();
        let d1 = Digraph {
            vertices: d.vertices.clone(),
            edges: d.edges.iter().map(|(u, v)| (h[u], h[v])).collect(),
        };
        let (s1, reg1) = encode(&d1).map_err(|x| x.to_string())?;
        let (_, reg0) = encode(&d).map_err(|x| x.to_string())?;
        let hat = transport_iso(&h, &d, &d1).map_err(|x| format!("case {case}: {x}"))?;
        ensure!(sym_iso(&hat, &s, &s1), "case {case}: transported map is not an iso");
        for (v, b) in &reg0.vertices {
            ensure!(hat[&b.n] == reg1.vertices[&h[v]].n, "case {case}: transport moves vertex {v} wrongly");
        }
        // streaming under 10 orders
        for _ in 0..10 {
            let mut order = items(&d);
            order.shuffle(&mut r);
            let mut enc = StreamingEncoder::new();
            let mut prev = SymGraph::new();
            for it in &order {
                enc.add_item(*it).map_err(|x| x.to_string())?;
                let now = enc.output();
                ensure!(
                    prev.vertices.is_subset(&now.vertices) && prev.edges.is_subset(&now.edges),
                    "case {case}: output shrank"
                );
                prev = now.clone();
            }
            let (out, _) = enc.finish();
            let back = decode(&out).map_err(|x| x.to_string())?;
            ensure!(brute_iso(&back.digraph, &d).is_some(), "case {case}: streamed output decodes wrongly");
        }
    }
    let el = within(t, Duration::from_secs(30))?;
    Ok(format!("100 digraphs, transport and 10 streaming orders each, {el:.2?}"))
}

fn determinism() -> Verdict {
    let mut names = Vec::new();
    for name in ["DIAG", "GEN-MEET", "GEN-AVOID", "INTERACT"] {
        let sc = canned_scenario(name).unwrap();
        let e1 = run_scenario(&sc, None);
        let e2 = run_scenario(&sc, None);
        ensure!(trace_to_string(&e1.trace) == trace_to_string(&e2.trace), "{name}: traces differ");
        let r = replay(&e1.trace, Some(&sc)).map_err(|x| format!("{name}: {x}"))?;
        ensure!(r.summary() == e1.summary(), "{name}: replay state differs");
        names.push(format!("{name} ({} events)", e1.trace.len()));
    }
    Ok(format!("byte-identical reruns and exact replay: {}", names.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("1 DIAG", diag_scenario),
        ("2 GEN-MEET", gen_meet),
        ("2 GEN-AVOID", gen_avoid),
        ("3 INTERACT", interact),
        ("4 sweep", sweep),
        ("5 delta2", delta2_stats),
        ("6 copy search", copy_search),
        ("7 codings", codings),
        ("8 determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
