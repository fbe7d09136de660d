//! The stagewise approximation `G[s]` of the generic set.
//!
//! `G` always has finite support. Every bit flip is written to a change log
//! and the working value is snapshotted at the end of every stage.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::{Bits, OracleSnapshot};

/// One recorded bit flip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitChange {
    pub stage: usize,
    pub pos: usize,
    pub old: bool,
    pub new: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenericApprox {
    ones: BTreeSet<usize>,
    stage: usize,
    /// `history[s]` holds the one-positions at the end of stage `s`.
    history: Vec<Vec<usize>>,
    change_log: Vec<BitChange>,
}

impl GenericApprox {
    pub fn new() -> Self {
        GenericApprox {
            ones: BTreeSet::new(),
            stage: 0,
            history: vec![Vec::new()],
            change_log: Vec::new(),
        }
    }

    /// Stage number stamped on subsequent change-log entries.
    pub fn begin_stage(&mut self, stage: usize) {
        self.stage = stage;
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn get(&self, pos: usize) -> bool {
        self.ones.contains(&pos)
    }

    /// One past the largest position holding a 1 (0 for the empty set).
    pub fn support(&self) -> usize {
        self.ones.iter().next_back().map_or(0, |p| p + 1)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.ones.iter().copied()
    }

    /// `G↾len` as an explicit string.
    pub fn prefix_bits(&self, len: usize) -> Bits {
        let mut v = vec![false; len];
        for p in self.ones.range(..len) {
            v[*p] = true;
        }
        Bits::from_bools(v)
    }

    pub fn prefix_snapshot(&self, len: usize) -> OracleSnapshot {
        OracleSnapshot {
            len,
            ones: self.ones.range(..len).copied().collect(),
        }
    }

    /// Whether the current approximation agrees with `snap` on `[0, snap.len)`.
    pub fn snapshot_matches(&self, snap: &OracleSnapshot) -> bool {
        self.ones.range(..snap.len).copied().eq(snap.ones.iter().copied())
    }

    /// Sets `G := tau ⌢ 0^ω`, returning the logged flips in position order.
    pub fn set_tail(&mut self, tau: &Bits) -> Vec<BitChange> {
        let mut changes = Vec::new();
        let stale: Vec<usize> = self.ones.range(tau.len()..).copied().collect();
        for pos in 0..tau.len() {
            let new = tau.get(pos);
            if self.get(pos) != new {
                changes.push(self.flip(pos, new));
            }
        }
        for pos in stale {
            changes.push(self.flip(pos, false));
        }
        changes
    }

    /// Puts `pos` into `G`. Returns the logged flip, if the bit was 0.
    pub fn enumerate(&mut self, pos: usize) -> Option<BitChange> {
        if self.get(pos) {
            None
        } else {
            Some(self.flip(pos, true))
        }
    }

    fn flip(&mut self, pos: usize, new: bool) -> BitChange {
        let old = self.get(pos);
        if new {
            self.ones.insert(pos);
        } else {
            self.ones.remove(&pos);
        }
        let change = BitChange {
            stage: self.stage,
            pos,
            old,
            new,
        };
        self.change_log.push(change);
        change
    }

    /// Records the working value as `G[stage]`. Stages with no call inherit
    /// the previous snapshot.
    pub fn end_stage(&mut self, stage: usize) {
        let current: Vec<usize> = self.ones.iter().copied().collect();
        while self.history.len() < stage {
            let last = self.history.last().cloned().unwrap_or_default();
            self.history.push(last);
        }
        if self.history.len() == stage {
            self.history.push(current);
        } else {
            self.history[stage] = current;
        }
    }

    pub fn history(&self) -> &[Vec<usize>] {
        &self.history
    }

    pub fn history_at(&self, stage: usize) -> Option<&[usize]> {
        self.history.get(stage).map(|v| v.as_slice())
    }

    pub fn change_log(&self) -> &[BitChange] {
        &self.change_log
    }

    /// Number of logged flips per position.
    pub fn change_counts(&self) -> std::collections::BTreeMap<usize, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for c in &self.change_log {
            *counts.entry(c.pos).or_insert(0) += 1;
        }
        counts
    }
}

/// Rebuilds per-stage snapshots from a change log alone, starting from the
/// empty set, for stages `0..=last_stage`.
pub fn replay_change_log(log: &[BitChange], last_stage: usize) -> Vec<Vec<usize>> {
    let mut ones = BTreeSet::new();
    let mut out = Vec::with_capacity(last_stage + 1);
    let mut i = 0;
    for stage in 0..=last_stage {
        while i < log.len() && log[i].stage <= stage {
            if log[i].new {
                ones.insert(log[i].pos);
            } else {
                ones.remove(&log[i].pos);
            }
            i += 1;
        }
        out.push(ones.iter().copied().collect());
    }
    out
}
