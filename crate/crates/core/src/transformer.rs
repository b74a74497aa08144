//! Belief-state transformer: transitions between distributions, with
//! successor sets kept as finite generator lists.
//!
//! A distribution steps on `a` only if every state in its support does; its
//! successors are the support-weighted mixtures of per-state convex
//! transitions.

use std::collections::BTreeMap;

use crate::algebra::{blackhole_combine, Lifted};
use crate::lifting::{conv_reduce, Polytope};
use crate::model::{accumulate, check_convex, Dist, Label, ModelError, Pa, Rational, StateId};

/// Default bound on the number of raw choice tuples enumerated per call.
pub const DEFAULT_GENERATOR_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformerError {
    #[error("successor enumeration needs {needed} generators, cap is {cap}")]
    Capacity { needed: usize, cap: usize },
    #[error(transparent)]
    Coefficient(#[from] ModelError),
    #[error("no choice given for support state {0}")]
    Choice(StateId),
    #[error("distribution mentions state {0} outside the automaton")]
    UnknownState(StateId),
}

/// One belief-state step: `source ⇒label ζ` for every ζ in `successors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefStep {
    pub source: Dist,
    pub label: Label,
    pub successors: Lifted,
}

pub fn can_step(pa: &Pa, xi: &Dist, a: &Label) -> bool {
    xi.support().all(|s| pa.can_step(s, a))
}

/// Number of choice tuples (one listed successor per support state), or
/// `None` on overflow.
pub fn raw_generator_count(pa: &Pa, xi: &Dist, a: &Label) -> Option<usize> {
    xi.support()
        .try_fold(1usize, |acc, s| acc.checked_mul(pa.successors(s, a).len()))
}

/// Unreduced generators, one per choice tuple, in lexicographic tuple order.
pub fn raw_generators(pa: &Pa, xi: &Dist, a: &Label, cap: usize) -> Result<Vec<Dist>, TransformerError> {
    let needed = raw_generator_count(pa, xi, a).unwrap_or(usize::MAX);
    if needed > cap {
        return Err(TransformerError::Capacity { needed, cap });
    }
    let mut partial: Vec<BTreeMap<StateId, Rational>> = vec![BTreeMap::new()];
    for (s, w) in xi.iter() {
        let options = pa.successors(s, a);
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for acc in &partial {
            for zeta in options {
                let mut m = acc.clone();
                accumulate(&mut m, w, zeta);
                next.push(m);
            }
        }
        partial = next;
    }
    Ok(partial
        .iter()
        .map(|m| Dist::normalized(m).expect("mixture of distributions"))
        .collect())
}

pub fn successors_capped(pa: &Pa, xi: &Dist, a: &Label, cap: usize) -> Result<Lifted, TransformerError> {
    if let Some(s) = xi.support().find(|s| !pa.states().contains(*s)) {
        return Err(TransformerError::UnknownState(s.clone()));
    }
    if !can_step(pa, xi, a) {
        return Ok(Lifted::Bottom);
    }
    let gens = raw_generators(pa, xi, a, cap)?;
    Ok(Lifted::Set(conv_reduce(&Polytope::new(gens).expect("nonempty"))))
}

/// All `a`-successors of `xi`: `Bottom` if some support state cannot step,
/// otherwise the reduced hull of the choice-tuple mixtures.
pub fn successors(pa: &Pa, xi: &Dist, a: &Label) -> Result<Lifted, TransformerError> {
    successors_capped(pa, xi, a, DEFAULT_GENERATOR_CAP)
}

pub fn belief_step(pa: &Pa, xi: &Dist, a: &Label) -> Result<BeliefStep, TransformerError> {
    Ok(BeliefStep {
        source: xi.clone(),
        label: a.clone(),
        successors: successors(pa, xi, a)?,
    })
}

/// The successor reached by letting each support state `s` mix its listed
/// `a`-successors with the coefficients `choice[s]`.
pub fn step(
    pa: &Pa,
    xi: &Dist,
    a: &Label,
    choice: &BTreeMap<StateId, Vec<Rational>>,
) -> Result<Dist, TransformerError> {
    let mut acc = BTreeMap::new();
    for (s, w) in xi.iter() {
        let coefs = choice.get(s).ok_or_else(|| TransformerError::Choice(s.clone()))?;
        let options = pa.successors(s, a);
        if coefs.len() != options.len() {
            return Err(ModelError::Arity {
                expected: options.len(),
                found: coefs.len(),
            }
            .into());
        }
        check_convex(coefs)?;
        for (c, zeta) in coefs.iter().zip(options) {
            accumulate(&mut acc, &(w * c), zeta);
        }
    }
    Ok(Dist::normalized(&acc).expect("mixture of distributions"))
}

/// Successors built by folding the support of `xi` through binary black-hole
/// combinations of per-state convex steps.
pub fn successors_by_fold(pa: &Pa, xi: &Dist, a: &Label) -> Lifted {
    let mut acc: Option<(Rational, Lifted)> = None;
    for (s, w) in xi.iter() {
        let here = match Polytope::new(pa.successors(s, a).to_vec()) {
            Some(p) => Lifted::Set(p),
            None => Lifted::Bottom,
        };
        acc = Some(match acc {
            None => (w.clone(), here),
            Some((mass, prev)) => {
                let total = &mass + w;
                let p = &mass / &total;
                (total, blackhole_combine(&p, &prev, &here))
            }
        });
    }
    acc.expect("distributions have nonempty support").1
}

/// Compares successors of `p·xi1 + (1-p)·xi2` with the black-hole combination
/// of the components' successors.
pub fn mix_law_check(
    pa: &Pa,
    xi1: &Dist,
    xi2: &Dist,
    p: &Rational,
    a: &Label,
) -> Result<bool, TransformerError> {
    let mut mass = BTreeMap::new();
    accumulate(&mut mass, p, xi1);
    accumulate(&mut mass, &p.complement(), xi2);
    let mixed = Dist::normalized(&mass).expect("convex mixture");
    let whole = successors(pa, &mixed, a)?;
    let parts = blackhole_combine(p, &successors(pa, xi1, a)?, &successors(pa, xi2, a)?);
    Ok(whole.same(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::conv_member;
    use crate::model::parse_pa;

    fn fig1() -> Pa {
        parse_pa(include_str!("../../../figures/fig1.pa")).unwrap()
    }

    fn d(text: &str) -> Dist {
        Dist::parse_literal(text).unwrap()
    }

    fn a() -> Label {
        Label::new("a").unwrap()
    }

    fn r(n: i64, m: i64) -> Rational {
        Rational::new(n, m)
    }

    fn set(gens: &[&str]) -> Lifted {
        Lifted::Set(Polytope::new(gens.iter().map(|g| d(g)).collect()).unwrap())
    }

    #[test]
    fn can_step_examples() {
        let pa = fig1();
        assert!(!can_step(&pa, &d("x1:1/2,x3:1/2"), &a()));
        assert!(can_step(&pa, &d("x2"), &a()));
        assert!(!can_step(&pa, &d("y3"), &a()));
    }

    #[test]
    fn successor_examples() {
        let pa = fig1();
        assert_eq!(successors(&pa, &d("x0"), &a()).unwrap(), set(&["x1", "x3"]));
        assert_eq!(
            successors(&pa, &d("y1:1/2,y2:1/2"), &a()).unwrap(),
            set(&["y1:1/4,y2:3/4", "y2:1/2,y3:1/2"])
        );
        assert_eq!(successors(&pa, &d("x2:1/2,x3:1/2"), &a()).unwrap(), Lifted::Bottom);
    }

    #[test]
    fn step_examples() {
        let pa = fig1();
        let mut choice = BTreeMap::new();
        choice.insert(StateId::new("y0").unwrap(), vec![r(1, 2), r(1, 2)]);
        assert_eq!(step(&pa, &d("y0"), &a(), &choice).unwrap(), d("y1:1/4,y2:1/4,y3:1/2"));

        choice.clear();
        choice.insert(StateId::new("x0").unwrap(), vec![r(1, 1), r(0, 1)]);
        let out = step(&pa, &d("x0"), &a(), &choice).unwrap();
        assert_eq!(out, d("x1"));
        let succ = successors(&pa, &d("x0"), &a()).unwrap();
        assert!(conv_member(&out, succ.as_set().unwrap()).is_some());
    }

    #[test]
    fn step_errors() {
        let pa = fig1();
        let mut choice = BTreeMap::new();
        choice.insert(StateId::new("y0").unwrap(), vec![r(1, 2), r(1, 3)]);
        assert!(matches!(
            step(&pa, &d("y0"), &a(), &choice),
            Err(TransformerError::Coefficient(_))
        ));
        choice.insert(StateId::new("y0").unwrap(), vec![r(1, 2), r(1, 2)]);
        assert!(matches!(
            step(&pa, &d("y1:1/2,y0:1/2"), &a(), &choice),
            Err(TransformerError::Choice(_))
        ));
    }

    #[test]
    fn mix_law_examples() {
        let pa = fig1();
        assert!(mix_law_check(&pa, &d("y1"), &d("y2"), &r(1, 2), &a()).unwrap());
        assert!(mix_law_check(&pa, &d("x1"), &d("x3"), &r(1, 2), &a()).unwrap());
        assert!(mix_law_check(&pa, &d("x1"), &d("x3"), &r(1, 1), &a()).unwrap());
    }

    #[test]
    fn capacity_guard() {
        let pa = fig1();
        let xi = d("x0:1/2,y0:1/2");
        assert_eq!(raw_generator_count(&pa, &xi, &a()), Some(4));
        assert_eq!(
            successors_capped(&pa, &xi, &a(), 3),
            Err(TransformerError::Capacity { needed: 4, cap: 3 })
        );
        assert!(successors_capped(&pa, &xi, &a(), 4).is_ok());
    }

    #[test]
    fn fold_matches_enumeration_on_example() {
        let pa = fig1();
        let xi = d("y1:1/2,y2:1/2");
        let folded = successors_by_fold(&pa, &xi, &a());
        assert!(folded.same(&successors(&pa, &xi, &a()).unwrap()));
    }
}
