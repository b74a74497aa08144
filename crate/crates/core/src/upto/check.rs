use std::collections::HashMap;

use crate::algebra::Lifted;
use crate::lifting::mix;
use crate::model::{Dist, Label, Pa};
use crate::transformer::{can_step, successors};

use super::closure::{generator_pairs, plain_membership, solve_membership, Solution, Target};
use super::{Base, Certificate, Obligation, Reason, Side, TechniqueConfig, UptoError, Verdict};

pub(crate) struct SuccessorCache<'a> {
    pa: &'a Pa,
    memo: HashMap<(Dist, Label), Lifted>,
}

impl<'a> SuccessorCache<'a> {
    pub(crate) fn new(pa: &'a Pa) -> Self {
        SuccessorCache {
            pa,
            memo: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, xi: &Dist, a: &Label) -> Result<&Lifted, UptoError> {
        let key = (xi.clone(), a.clone());
        if !self.memo.contains_key(&key) {
            let succ = successors(self.pa, xi, a)?;
            self.memo.insert(key.clone(), succ);
        }
        Ok(&self.memo[&key])
    }
}

/// Can the spoiler's successor `g` be answered from `defender` so that the
/// resulting pair lies in the closure generated by `gens`?
pub(crate) fn defend(g: &Dist, defender: &[Dist], gens: &[(Dist, Dist)], config: TechniqueConfig) -> Option<Solution> {
    match config.base {
        Base::Plain => plain_membership(g, defender, gens, config.identity_slack),
        Base::Cvx | Base::CvxE => solve_membership(g, Target::Hull(defender), gens, config.identity_slack),
    }
}

pub(crate) fn validate(pa: &Pa, cert: &Certificate) -> Result<(), UptoError> {
    for (i, (l, r)) in cert.pairs.iter().enumerate() {
        for d in [l, r] {
            if let Some(s) = d.support().find(|s| !pa.states().contains(*s)) {
                return Err(UptoError::Input(format!("pair {i} mentions unknown state {s}")));
            }
        }
    }
    Ok(())
}

/// Checks `R ⊆ b(f(R))` for the certificate's relation `R` and technique `f`.
///
/// For each pair and label, both sides must agree on whether they can step.
/// When they do, every vertex of either side's successor set must be answered
/// by some point of the other side's successor set with the resulting pair in
/// `f(R)`. Matching vertices suffices: a mixed move is answered by the same
/// mixture of responses, and `f(R)` is convex.
pub fn check_certificate(pa: &Pa, cert: &Certificate) -> Result<Verdict, UptoError> {
    validate(pa, cert)?;
    let gens = generator_pairs(&cert.pairs, cert.config.base);
    let flipped: Vec<(Dist, Dist)> = gens.iter().map(|(u, v)| (v.clone(), u.clone())).collect();
    let mut cache = SuccessorCache::new(pa);
    let mut failures = Vec::new();

    for (idx, (left, right)) in cert.pairs.iter().enumerate() {
        for a in pa.labels() {
            let (cl, cr) = (can_step(pa, left, a), can_step(pa, right, a));
            if cl != cr {
                failures.push(Obligation {
                    pair_index: idx,
                    label: a.clone(),
                    spoiler: if cl { Side::Left } else { Side::Right },
                    generator: None,
                    reason: Reason::CanStepMismatch { left: cl, right: cr },
                });
                continue;
            }
            if !cl {
                continue;
            }
            let sl = cache.get(left, a)?.as_set().expect("steps").clone();
            let sr = cache.get(right, a)?.as_set().expect("steps").clone();
            for (side, spoiler, defender, oriented) in [
                (Side::Left, &sl, &sr, &gens),
                (Side::Right, &sr, &sl, &flipped),
            ] {
                for g in spoiler.generators() {
                    match defend(g, defender.generators(), oriented, cert.config) {
                        Some(sol) => debug_assert_eq!(
                            sol.witness.rebuild(oriented),
                            (g.clone(), mix(defender.generators(), &sol.mixture))
                        ),
                        None => failures.push(Obligation {
                            pair_index: idx,
                            label: a.clone(),
                            spoiler: side,
                            generator: Some(g.clone()),
                            reason: Reason::Unmatched,
                        }),
                    }
                }
            }
        }
    }

    if failures.is_empty() {
        Ok(Verdict::Accepted)
    } else {
        failures.sort();
        Ok(Verdict::Rejected(failures))
    }
}
