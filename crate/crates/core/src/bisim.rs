//! Strong and convex bisimilarity by partition refinement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::lifting::{block_masses, lift_related_partition, mix};
use crate::model::{Dist, Label, Pa, Rational, StateId};
use crate::ratlp::{feasible, LinSystem};

/// Partition of a state set. Blocks are sorted and listed in order of their
/// least member, which also serves as the block id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
    #[serde(skip)]
    index: BTreeMap<StateId, usize>,
}

impl Partition {
    /// Empty blocks are discarded. Blocks must be disjoint.
    pub fn from_blocks(blocks: Vec<Vec<StateId>>) -> Self {
        let mut blocks: Vec<Vec<StateId>> = blocks
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|mut b| {
                b.sort();
                b.dedup();
                b
            })
            .collect();
        blocks.sort();
        let mut index = BTreeMap::new();
        for (i, b) in blocks.iter().enumerate() {
            for s in b {
                let prev = index.insert(s.clone(), i);
                assert!(prev.is_none(), "state {s} in two blocks");
            }
        }
        Partition { blocks, index }
    }

    pub fn single_block(states: &BTreeSet<StateId>) -> Self {
        Partition::from_blocks(vec![states.iter().cloned().collect()])
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    /// Representative (least member) of the block containing `s`.
    pub fn block_of(&self, s: &StateId) -> Option<&StateId> {
        self.index.get(s).map(|&i| &self.blocks[i][0])
    }

    pub fn same_block(&self, s: &StateId, t: &StateId) -> bool {
        match (self.index.get(s), self.index.get(t)) {
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }

    /// True iff every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|s| coarser.same_block(&b[0], s)))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str("{")?;
            for (j, s) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    /// Matching by a single listed transition.
    Strong,
    /// Matching by a convex combination of listed transitions.
    Convex,
}

/// A defender response from `t` to the move `xi` with equal block masses, if
/// one exists.
pub fn find_match(
    pa: &Pa,
    semantics: Semantics,
    partition: &Partition,
    xi: &Dist,
    t: &StateId,
    a: &Label,
) -> Option<Dist> {
    let responses = pa.successors(t, a);
    match semantics {
        Semantics::Strong => responses
            .iter()
            .find(|r| lift_related_partition(partition, xi, r))
            .cloned(),
        Semantics::Convex => {
            if responses.is_empty() {
                return None;
            }
            let target = block_masses(partition, xi);
            let masses: Vec<BTreeMap<StateId, Rational>> =
                responses.iter().map(|r| block_masses(partition, r)).collect();
            let keys: BTreeSet<&StateId> = target.keys().chain(masses.iter().flat_map(|m| m.keys())).collect();
            let mut sys = LinSystem::new(responses.len());
            for key in keys {
                sys.push_sparse(
                    masses
                        .iter()
                        .enumerate()
                        .filter_map(|(j, m)| m.get(key).map(|w| (j, w.clone()))),
                    target.get(key).cloned().unwrap_or_else(Rational::zero),
                );
            }
            sys.push_sparse((0..responses.len()).map(|j| (j, Rational::one())), Rational::one());
            let mu = feasible(&sys).expect("well-formed system").witness()?;
            Some(mix(responses, &mu))
        }
    }
}

fn matches_one_way(pa: &Pa, semantics: Semantics, partition: &Partition, s: &StateId, t: &StateId) -> bool {
    pa.labels().iter().all(|a| {
        pa.successors(s, a)
            .iter()
            .all(|xi| find_match(pa, semantics, partition, xi, t, a).is_some())
    })
}

/// Mutual one-step matchability of `s` and `t` relative to `partition`.
pub fn mutually_match(pa: &Pa, semantics: Semantics, partition: &Partition, s: &StateId, t: &StateId) -> bool {
    pa.enabled(s) == pa.enabled(t)
        && matches_one_way(pa, semantics, partition, s, t)
        && matches_one_way(pa, semantics, partition, t, s)
}

// Matchability relative to a fixed partition is an equivalence, so a block
// splits into the classes of its members.
fn split_block(pa: &Pa, semantics: Semantics, partition: &Partition, block: &[StateId]) -> Vec<Vec<StateId>> {
    let mut classes: Vec<Vec<StateId>> = Vec::new();
    for s in block {
        match classes
            .iter_mut()
            .find(|c| mutually_match(pa, semantics, partition, &c[0], s))
        {
            Some(c) => c.push(s.clone()),
            None => classes.push(vec![s.clone()]),
        }
    }
    classes
}

fn enabledness_partition(pa: &Pa) -> Partition {
    let mut groups: BTreeMap<BTreeSet<Label>, Vec<StateId>> = BTreeMap::new();
    for s in pa.states() {
        groups.entry(pa.enabled(s)).or_default().push(s.clone());
    }
    Partition::from_blocks(groups.into_values().collect())
}

/// One refinement pass: every block is split by matchability relative to
/// `partition`.
pub fn refine_once(pa: &Pa, semantics: Semantics, partition: &Partition) -> Partition {
    let blocks = partition
        .blocks()
        .iter()
        .flat_map(|b| split_block(pa, semantics, partition, b))
        .collect();
    Partition::from_blocks(blocks)
}

/// Coarsest partition whose blocks are mutually matchable. Starts from the
/// split by enabled labels and repeatedly splits the first block (in
/// canonical order) that contains non-matchable members.
pub fn bisimilarity(pa: &Pa, semantics: Semantics) -> Partition {
    let mut partition = enabledness_partition(pa);
    'outer: loop {
        for (i, block) in partition.blocks().iter().enumerate() {
            if block.len() < 2 {
                continue;
            }
            let classes = split_block(pa, semantics, &partition, block);
            if classes.len() > 1 {
                let mut blocks: Vec<Vec<StateId>> = partition.blocks().to_vec();
                blocks.remove(i);
                blocks.extend(classes);
                partition = Partition::from_blocks(blocks);
                continue 'outer;
            }
        }
        return partition;
    }
}

pub fn strong_bisimilarity(pa: &Pa) -> Partition {
    bisimilarity(pa, Semantics::Strong)
}

pub fn convex_bisimilarity(pa: &Pa) -> Partition {
    bisimilarity(pa, Semantics::Convex)
}
