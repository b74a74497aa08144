use std::collections::{BTreeMap, BTreeSet};

use super::{Dist, Label, ModelError, StateId};

/// A probabilistic automaton: states, labels and a finite transition relation
/// `state × label → list of distributions`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pa {
    states: BTreeSet<StateId>,
    labels: BTreeSet<Label>,
    transitions: BTreeMap<(StateId, Label), Vec<Dist>>,
}

impl Pa {
    /// Transition lists keep their given order; repeated distributions for the
    /// same `(state, label)` are dropped after their first occurrence.
    pub fn new(
        states: BTreeSet<StateId>,
        labels: BTreeSet<Label>,
        transitions: BTreeMap<(StateId, Label), Vec<Dist>>,
    ) -> Result<Self, ModelError> {
        if states.is_empty() {
            return Err(ModelError::Invalid("automaton has no states".into()));
        }
        if labels.is_empty() {
            return Err(ModelError::Invalid("automaton has no labels".into()));
        }
        let mut cleaned = BTreeMap::new();
        for ((s, a), dists) in transitions {
            if !states.contains(&s) {
                return Err(ModelError::Invalid(format!("unknown source state {s}")));
            }
            if !labels.contains(&a) {
                return Err(ModelError::Invalid(format!("unknown label {a}")));
            }
            let mut list: Vec<Dist> = Vec::with_capacity(dists.len());
            for d in dists {
                if let Some(t) = d.support().find(|t| !states.contains(*t)) {
                    return Err(ModelError::Invalid(format!("unknown target state {t}")));
                }
                if !list.contains(&d) {
                    list.push(d);
                }
            }
            if !list.is_empty() {
                cleaned.insert((s, a), list);
            }
        }
        Ok(Pa {
            states,
            labels,
            transitions: cleaned,
        })
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn state(&self, name: &str) -> Option<&StateId> {
        self.states.iter().find(|s| s.as_str() == name)
    }

    pub fn label(&self, name: &str) -> Option<&Label> {
        self.labels.iter().find(|l| l.as_str() == name)
    }

    /// Listed `a`-successors of `s`, in source order. Empty if none.
    pub fn successors(&self, s: &StateId, a: &Label) -> &[Dist] {
        self.transitions
            .get(&(s.clone(), a.clone()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn can_step(&self, s: &StateId, a: &Label) -> bool {
        !self.successors(s, a).is_empty()
    }

    /// Labels on which `s` has at least one transition.
    pub fn enabled(&self, s: &StateId) -> BTreeSet<Label> {
        self.labels.iter().filter(|a| self.can_step(s, a)).cloned().collect()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&StateId, &Label, &Dist)> + '_ {
        self.transitions
            .iter()
            .flat_map(|((s, a), ds)| ds.iter().map(move |d| (s, a, d)))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.values().map(Vec::len).sum()
    }

    pub(crate) fn transition_map(&self) -> &BTreeMap<(StateId, Label), Vec<Dist>> {
        &self.transitions
    }

    /// True iff every support state of `d` belongs to this automaton.
    pub fn supports(&self, d: &Dist) -> bool {
        d.support().all(|s| self.states.contains(s))
    }
}
