//! Trace events and their line-delimited JSON form.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bits::{Bits, OracleSnapshot};
use crate::graph::{NodeId, Side};
use crate::machine::MNode;
use crate::strategy::{Outcome, TreeAddress};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    M,
    N,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    ComponentAdded {
        pair: usize,
    },
    Diagonalized {
        graph: Side,
        pair: usize,
    },
    Homogenized {
        graph: Side,
        pair: usize,
    },
    GTailSet {
        node: TreeAddress,
        tau: Bits,
    },
    GBitSet {
        node: TreeAddress,
        pos: usize,
    },
    ParamDefined {
        node: TreeAddress,
        param: Param,
        value: Option<usize>,
    },
    OutcomeTaken {
        node: TreeAddress,
        outcome: Outcome,
    },
    ComputationDefined {
        node: TreeAddress,
        pair: usize,
        snapshot: OracleSnapshot,
        image_edge_use_max: usize,
        map: Vec<(NodeId, MNode)>,
    },
    ChallengeIssued {
        challenger: TreeAddress,
        target: TreeAddress,
        bound: usize,
        #[serde(rename = "use")]
        use_: usize,
    },
    ChallengeCleared {
        target: TreeAddress,
        reason: String,
    },
    Initialized {
        node: TreeAddress,
    },
    CopierEmitted {
        machine: usize,
        use_len: usize,
        count: usize,
    },
    Warning {
        message: String,
    },
    PathComputed {
        path: TreeAddress,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::ComponentAdded { .. } => "ComponentAdded",
            EventKind::Diagonalized { .. } => "Diagonalized",
            EventKind::Homogenized { .. } => "Homogenized",
            EventKind::GTailSet { .. } => "GTailSet",
            EventKind::GBitSet { .. } => "GBitSet",
            EventKind::ParamDefined { .. } => "ParamDefined",
            EventKind::OutcomeTaken { .. } => "OutcomeTaken",
            EventKind::ComputationDefined { .. } => "ComputationDefined",
            EventKind::ChallengeIssued { .. } => "ChallengeIssued",
            EventKind::ChallengeCleared { .. } => "ChallengeCleared",
            EventKind::Initialized { .. } => "Initialized",
            EventKind::CopierEmitted { .. } => "CopierEmitted",
            EventKind::Warning { .. } => "Warning",
            EventKind::PathComputed { .. } => "PathComputed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub stage: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn event_to_line(e: &TraceEvent) -> String {
    serde_json::to_string(e).expect("trace events always serialize")
}

pub fn write_trace<W: Write>(mut w: W, events: &[TraceEvent]) -> std::io::Result<()> {
    for e in events {
        writeln!(w, "{}", event_to_line(e))?;
    }
    w.flush()
}

pub fn trace_to_string(events: &[TraceEvent]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&event_to_line(e));
        s.push('\n');
    }
    s
}

pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<TraceEvent>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|source| TraceError::Parse { line: i + 1, source })?;
        out.push(e);
    }
    Ok(out)
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>, TraceError> {
    read_trace(text.as_bytes())
}

/// The recorded paths `π_1, π_2, …` in stage order.
pub fn paths(events: &[TraceEvent]) -> Vec<(usize, TreeAddress)> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::PathComputed { path } => Some((e.stage, path.clone())),
            _ => None,
        })
        .collect()
}

/// Last stage mentioned in the trace.
pub fn horizon(events: &[TraceEvent]) -> usize {
    events.last().map_or(0, |e| e.stage)
}
