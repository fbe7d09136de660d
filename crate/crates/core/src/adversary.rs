//! Scripted stand-ins for the c.e. sets `W_j` and the computable functionals
//! `Φ_e` the construction diagonalizes against.
//!
//! Oracle graph machines and their copiers live in [`crate::machine`].

use std::collections::{BTreeMap, BTreeSet};

use crate::bits::Bits;
use crate::graph::{BuiltGraph, NodeId, Parity};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("functional {index} already maps node {node} to {existing}, refusing {requested}")]
    NotSingleValued {
        index: usize,
        node: NodeId,
        existing: NodeId,
        requested: NodeId,
    },
}

/// A c.e. set of binary strings, given by the stage at which each string is
/// enumerated.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CeSet {
    pub index: usize,
    entries: BTreeSet<(usize, Bits)>,
}

impl CeSet {
    pub fn new(index: usize) -> Self {
        CeSet {
            index,
            entries: BTreeSet::new(),
        }
    }

    pub fn enumerate_at(&mut self, stage: usize, string: Bits) {
        self.entries.insert((stage, string));
    }

    pub fn entries(&self) -> impl Iterator<Item = &(usize, Bits)> + '_ {
        self.entries.iter()
    }

    /// `W_j[s]`.
    pub fn members_at(&self, stage: usize) -> impl Iterator<Item = &Bits> + '_ {
        self.entries
            .iter()
            .filter(move |(t, _)| *t <= stage)
            .map(|(_, b)| b)
    }

    /// The least member of `W_j[s]` extending `sigma`, ordered by length and
    /// then lexicographically.
    pub fn find_extension(&self, stage: usize, sigma: &Bits) -> Option<Bits> {
        self.members_at(stage)
            .filter(|tau| sigma.is_prefix_of(tau))
            .min_by(|x, y| x.length_lex_cmp(y))
            .cloned()
    }
}

/// A partial map `A → B` converging node by node over stages.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionalScript {
    pub index: usize,
    axioms: BTreeMap<NodeId, (usize, NodeId)>,
}

impl FunctionalScript {
    pub fn new(index: usize) -> Self {
        FunctionalScript {
            index,
            axioms: BTreeMap::new(),
        }
    }

    /// Adds `Φ(a) = b` converging at `stage`. Re-adding the same value keeps
    /// the earliest stage.
    pub fn add_axiom(&mut self, stage: usize, a: NodeId, b: NodeId) -> Result<(), AdversaryError> {
        match self.axioms.get_mut(&a) {
            Some((t, existing)) if *existing == b => {
                *t = (*t).min(stage);
                Ok(())
            }
            Some((_, existing)) => Err(AdversaryError::NotSingleValued {
                index: self.index,
                node: a,
                existing: *existing,
                requested: b,
            }),
            None => {
                self.axioms.insert(a, (stage, b));
                Ok(())
            }
        }
    }

    pub fn axioms(&self) -> impl Iterator<Item = (NodeId, usize, NodeId)> + '_ {
        self.axioms.iter().map(|(a, (t, b))| (*a, *t, *b))
    }

    /// `Φ_e[s](a)`.
    pub fn value_at(&self, a: NodeId, stage: usize) -> Option<NodeId> {
        self.axioms
            .get(&a)
            .filter(|(t, _)| *t <= stage)
            .map(|(_, b)| *b)
    }

    /// Scripts the honest copy of pair `n`: root to root, each loop of `A`
    /// onto the `B` loop of equal length, interior nodes in cycle order.
    /// Loops without a partner of equal length are left unmapped.
    pub fn add_honest_pair(
        &mut self,
        a: &BuiltGraph,
        b: &BuiltGraph,
        n: usize,
        stage: usize,
    ) -> Result<(), AdversaryError> {
        for parity in Parity::BOTH {
            let (Ok(ca), Ok(cb)) = (a.component(n, parity), b.component(n, parity)) else {
                continue;
            };
            self.add_axiom(stage, ca.root, cb.root)?;
            let mut used = vec![false; cb.loops.len()];
            for la in &ca.loops {
                let partner = cb
                    .loops
                    .iter()
                    .enumerate()
                    .find(|(i, lb)| !used[*i] && lb.length == la.length);
                if let Some((i, lb)) = partner {
                    used[i] = true;
                    for (x, y) in la.interior.iter().zip(&lb.interior) {
                        self.add_axiom(stage, *x, *y)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether `Φ_e[s]` maps the pair-`n` components of `A` isomorphically
    /// into the pair-`n` components of `B`, even root to even root and odd
    /// root to odd root.
    pub fn check_pair(&self, stage: usize, a: &BuiltGraph, b: &BuiltGraph, n: usize) -> bool {
        let mut image = BTreeMap::new();
        let mut b_edges = BTreeSet::new();
        for parity in Parity::BOTH {
            let (Ok(ca), Ok(cb)) = (a.component(n, parity), b.component(n, parity)) else {
                return false;
            };
            if self.value_at(ca.root, stage) != Some(cb.root) {
                return false;
            }
            for node in ca.nodes() {
                match self.value_at(node, stage) {
                    Some(v) => {
                        image.insert(node, v);
                    }
                    None => return false,
                }
            }
            b_edges.extend(cb.edges());
        }
        let distinct: BTreeSet<_> = image.values().collect();
        if distinct.len() != image.len() {
            return false;
        }
        Parity::BOTH.iter().all(|p| {
            a.component(n, *p)
                .unwrap()
                .edges()
                .all(|(x, y)| b_edges.contains(&(image[&x], image[&y])))
        })
    }
}

/// `phi_check_pair` in free-function form.
pub fn phi_check_pair(phi: &FunctionalScript, stage: usize, a: &BuiltGraph, b: &BuiltGraph, n: usize) -> bool {
    phi.check_pair(stage, a, b, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{add_stage_components, Side};

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn find_extension_respects_stage() {
        let mut w = CeSet::new(0);
        w.enumerate_at(3, bits("0101"));
        assert_eq!(w.find_extension(5, &bits("01")), Some(bits("0101")));
        assert_eq!(w.find_extension(2, &bits("01")), None);
    }

    #[test]
    fn find_extension_tie_break_matches_brute_force() {
        let mut w = CeSet::new(0);
        w.enumerate_at(1, bits("010"));
        w.enumerate_at(1, bits("0100"));
        w.enumerate_at(1, bits("011"));
        w.enumerate_at(1, bits("1"));
        let sigma = bits("01");
        // brute force: collect members extending sigma, sort by (len, string)
        let mut cands: Vec<Bits> = w
            .members_at(1)
            .filter(|t| t.len() >= 2 && t.as_slice()[..2] == sigma.as_slice()[..])
            .cloned()
            .collect();
        cands.sort_by_key(|t| (t.len(), t.to_string()));
        assert_eq!(cands[0], bits("010"));
        assert_eq!(w.find_extension(1, &sigma), Some(cands[0].clone()));
    }

    #[test]
    fn ce_sets_are_monotone() {
        let mut w = CeSet::new(0);
        w.enumerate_at(2, bits("1"));
        w.enumerate_at(5, bits("00"));
        for s in 0..8 {
            let now: BTreeSet<_> = w.members_at(s).collect();
            let next: BTreeSet<_> = w.members_at(s + 1).collect();
            assert!(now.is_subset(&next));
        }
    }

    fn pair_one() -> (BuiltGraph, BuiltGraph) {
        let mut a = BuiltGraph::new(Side::A);
        let mut b = BuiltGraph::new(Side::B);
        add_stage_components(&mut a, &mut b, 1).unwrap();
        (a, b)
    }

    #[test]
    fn honest_copy_checks_after_convergence() {
        let (a, b) = pair_one();
        let mut phi = FunctionalScript::new(0);
        phi.add_honest_pair(&a, &b, 1, 4).unwrap();
        // independent edge-preservation check by enumeration
        for p in Parity::BOTH {
            let ca = a.component(1, p).unwrap();
            let b_edges: BTreeSet<_> = b.component(1, p).unwrap().edges().collect();
            for (x, y) in ca.edges() {
                let fx = phi.value_at(x, 5).unwrap();
                let fy = phi.value_at(y, 5).unwrap();
                assert!(b_edges.contains(&(fx, fy)));
            }
        }
        assert!(phi.check_pair(5, &a, &b, 1));
        assert!(!phi.check_pair(3, &a, &b, 1));
    }

    #[test]
    fn root_mismatch_fails() {
        let (a, b) = pair_one();
        let mut phi = FunctionalScript::new(0);
        let a2 = a.component(1, Parity::Even).unwrap().root;
        let b3 = b.component(1, Parity::Odd).unwrap().root;
        phi.add_axiom(1, a2, b3).unwrap();
        assert!(!phi.check_pair(5, &a, &b, 1));
    }

    #[test]
    fn single_valued() {
        let mut phi = FunctionalScript::new(0);
        phi.add_axiom(1, NodeId(0), NodeId(3)).unwrap();
        phi.add_axiom(0, NodeId(0), NodeId(3)).unwrap();
        assert_eq!(phi.value_at(NodeId(0), 0), Some(NodeId(3)));
        assert!(phi.add_axiom(2, NodeId(0), NodeId(4)).is_err());
    }
}
