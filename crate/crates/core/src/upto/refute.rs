//! Sound, incomplete refutation of distribution bisimilarity.
//!
//! A distribution can perform a word `w` in the belief-state transformer iff
//! every state in its support can, so each word defines a state set `S_w`
//! and the predicate "can perform `w`" is `supp ⊆ S_w`. That predicate is
//! preserved under mixing, which makes two rules sound:
//!
//! * the two sides disagree on some word of length ≤ depth;
//! * after a common label, the spoiler reaches a successor that cannot
//!   perform `w` (length ≤ depth − 1) while every successor of the other
//!   side can.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{accumulate, Dist, Label, Pa, StateId};
use crate::transformer::can_step;

use super::Side;

/// Upper bound on distinct word predicates explored.
const MAX_PREDICATES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Trace {
    /// Exactly one side can perform `word`.
    Word { word: Vec<Label>, left: bool, right: bool },
    /// On `label` the spoiler moves to `generator`, which cannot perform
    /// `word`, while every response of the other side can.
    Move {
        label: Label,
        spoiler: Side,
        generator: Dist,
        word: Vec<Label>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefuteOutcome {
    Refuted(Trace),
    Unknown,
}

impl RefuteOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, RefuteOutcome::Refuted(_))
    }
}

fn fmt_word(word: &[Label]) -> String {
    word.iter().map(Label::as_str).collect::<Vec<_>>().join(".")
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trace::Word { word, left, right } => write!(
                f,
                "word {}: left {}, right {}",
                fmt_word(word),
                if *left { "can" } else { "cannot" },
                if *right { "can" } else { "cannot" }
            ),
            Trace::Move {
                label,
                spoiler,
                generator,
                word,
            } => write!(
                f,
                "{spoiler} plays {label} to {generator}, which cannot do {}; every response can",
                fmt_word(word)
            ),
        }
    }
}

fn step_set(pa: &Pa, a: &Label, target: &BTreeSet<StateId>) -> BTreeSet<StateId> {
    pa.states()
        .iter()
        .filter(|s| {
            pa.successors(s, a)
                .iter()
                .any(|mu| mu.support().all(|t| target.contains(t)))
        })
        .cloned()
        .collect()
}

/// States whose Dirac distribution can perform `word`.
pub fn word_set(pa: &Pa, word: &[Label]) -> BTreeSet<StateId> {
    word.iter()
        .rev()
        .fold(pa.states().clone(), |acc, a| step_set(pa, a, &acc))
}

pub fn can_perform(pa: &Pa, xi: &Dist, word: &[Label]) -> bool {
    let set = word_set(pa, word);
    xi.support().all(|s| set.contains(s))
}

/// Distinct nonempty word sets for words of length 1..=max_len, each with the
/// shortest word found (breadth first, labels in order).
fn word_predicates(pa: &Pa, max_len: usize) -> Vec<(Vec<Label>, BTreeSet<StateId>)> {
    let mut seen: BTreeSet<BTreeSet<StateId>> = BTreeSet::new();
    seen.insert(pa.states().clone());
    let mut level: Vec<(Vec<Label>, BTreeSet<StateId>)> = vec![(Vec::new(), pa.states().clone())];
    let mut out = Vec::new();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, set) in &level {
            for a in pa.labels() {
                let pre = step_set(pa, a, set);
                if pre.is_empty() || !seen.insert(pre.clone()) {
                    continue;
                }
                let mut w = Vec::with_capacity(word.len() + 1);
                w.push(a.clone());
                w.extend(word.iter().cloned());
                out.push((w.clone(), pre.clone()));
                next.push((w, pre));
            }
        }
        if next.is_empty() || out.len() >= MAX_PREDICATES {
            break;
        }
        level = next;
    }
    out
}

fn within(d: &Dist, set: &BTreeSet<StateId>) -> bool {
    d.support().all(|s| set.contains(s))
}

/// A successor of `xi` on `a` (a choice tuple) that leaves `set`, if any.
fn escaping_successor(pa: &Pa, xi: &Dist, a: &Label, set: &BTreeSet<StateId>) -> Option<Dist> {
    let (pivot, bad) = xi.support().find_map(|s| {
        pa.successors(s, a)
            .iter()
            .find(|mu| !within(mu, set))
            .map(|mu| (s.clone(), mu.clone()))
    })?;
    let mut acc = BTreeMap::new();
    for (s, w) in xi.iter() {
        let choice = if *s == pivot { &bad } else { &pa.successors(s, a)[0] };
        accumulate(&mut acc, w, choice);
    }
    Dist::normalized(&acc)
}

fn all_successors_within(pa: &Pa, xi: &Dist, a: &Label, set: &BTreeSet<StateId>) -> bool {
    xi.support()
        .all(|s| pa.successors(s, a).iter().all(|mu| within(mu, set)))
}

/// Tries to show `left ≁ right` with strategies of length at most `depth`.
/// `Refuted` is always correct; `Unknown` claims nothing.
pub fn refute_bounded(pa: &Pa, left: &Dist, right: &Dist, depth: usize) -> RefuteOutcome {
    if depth == 0 {
        return RefuteOutcome::Unknown;
    }
    let preds = word_predicates(pa, depth);
    for (word, set) in &preds {
        let (l, r) = (within(left, set), within(right, set));
        if l != r {
            return RefuteOutcome::Refuted(Trace::Word {
                word: word.clone(),
                left: l,
                right: r,
            });
        }
    }
    if depth < 2 {
        return RefuteOutcome::Unknown;
    }
    for a in pa.labels() {
        if !(can_step(pa, left, a) && can_step(pa, right, a)) {
            continue;
        }
        for (side, spoiler, defender) in [(Side::Left, left, right), (Side::Right, right, left)] {
            for (word, set) in preds.iter().filter(|(w, _)| w.len() < depth) {
                if !all_successors_within(pa, defender, a, set) {
                    continue;
                }
                if let Some(g) = escaping_successor(pa, spoiler, a, set) {
                    return RefuteOutcome::Refuted(Trace::Move {
                        label: a.clone(),
                        spoiler: side,
                        generator: g,
                        word: word.clone(),
                    });
                }
            }
        }
    }
    RefuteOutcome::Unknown
}

impl Trace {
    /// Re-checks the claim a trace makes against the automaton.
    pub fn recheck(&self, pa: &Pa, left: &Dist, right: &Dist) -> bool {
        match self {
            Trace::Word { word, left: l, right: r } => {
                l != r && can_perform(pa, left, word) == *l && can_perform(pa, right, word) == *r
            }
            Trace::Move {
                label,
                spoiler,
                generator,
                word,
            } => {
                let (sp, df) = match spoiler {
                    Side::Left => (left, right),
                    Side::Right => (right, left),
                };
                let set = word_set(pa, word);
                let reachable = crate::transformer::successors(pa, sp, label)
                    .ok()
                    .and_then(|s| s.as_set().map(|p| p.contains(generator)))
                    .unwrap_or(false);
                reachable
                    && can_step(pa, df, label)
                    && !within(generator, &set)
                    && all_successors_within(pa, df, label, &set)
            }
        }
    }
}
