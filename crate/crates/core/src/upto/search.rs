//! Budgeted search for a certificate proving `ξ ~ ζ`.
//!
//! Starting from `{(ξ, ζ)}`, the first failing obligation is repaired by
//! choosing a defender response that is not refutable against the spoiler's
//! move, peeling off the part of the resulting pair already covered by the
//! closure, and adding the normalized remainder as a new pair.

use std::collections::BTreeMap;

use crate::lifting::mix;
use crate::model::{Dist, Pa, Rational, StateId};

use super::check::{check_certificate, SuccessorCache};
use super::closure::generator_pairs;
use super::refute::{refute_bounded, Trace};
use super::{Base, Certificate, Reason, RefuteOutcome, Side, TechniqueConfig, UptoError, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Proven(Certificate),
    Refuted(Trace),
    Unknown,
}

/// Largest subset size used for mixed defender candidates.
const MAX_MIX: usize = 3;

/// Defender generators, then uniform mixtures of generator subsets.
fn defender_candidates(gens: &[Dist]) -> Vec<Dist> {
    let mut out: Vec<Dist> = gens.to_vec();
    let n = gens.len();
    for size in 2..=MAX_MIX.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let mut lambda = vec![Rational::zero(); n];
            for &i in &idx {
                lambda[i] = Rational::new(1, size as i64);
            }
            let m = mix(gens, &lambda);
            if !out.contains(&m) {
                out.push(m);
            }
            // next combination in lexicographic order
            let mut k = size;
            while k > 0 && idx[k - 1] == n - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Greedily subtracts generator pairs (and, with slack, shared mass) from
/// `(g, d)`; returns the normalized remainder, or `None` if nothing remains.
fn peel(g: &Dist, d: &Dist, gens: &[(Dist, Dist)], slack: bool) -> Option<(Dist, Dist)> {
    let mut left: BTreeMap<StateId, Rational> = g.weights().clone();
    let mut right: BTreeMap<StateId, Rational> = d.weights().clone();
    let avail = |m: &BTreeMap<StateId, Rational>, dist: &Dist| -> Rational {
        dist.iter()
            .map(|(s, w)| m.get(s).cloned().unwrap_or_else(Rational::zero) / w)
            .fold(Rational::one(), Rational::min)
    };
    for (u, v) in gens {
        let t = avail(&left, u).min(avail(&right, v));
        if t.is_positive() {
            for (s, w) in u.iter() {
                *left.get_mut(s).unwrap() -= &(&t * w);
            }
            for (s, w) in v.iter() {
                *right.get_mut(s).unwrap() -= &(&t * w);
            }
        }
    }
    if slack {
        for (s, w) in left.iter_mut() {
            if let Some(x) = right.get_mut(s) {
                let c = w.clone().min(x.clone());
                *w -= &c;
                *x -= &c;
            }
        }
    }
    left.retain(|_, w| !w.is_zero());
    right.retain(|_, w| !w.is_zero());
    if left.is_empty() {
        return None;
    }
    Some((Dist::normalized(&left)?, Dist::normalized(&right)?))
}

/// Semi-decision for `xi ~ zeta` within `max_pairs` certificate pairs and
/// refutation/pair depth `max_depth`. `Proven` certificates have been
/// re-checked; `Refuted` comes from [`refute_bounded`].
pub fn search_witness(
    pa: &Pa,
    xi: &Dist,
    zeta: &Dist,
    max_pairs: usize,
    max_depth: usize,
    config: TechniqueConfig,
) -> Result<SearchOutcome, UptoError> {
    for d in [xi, zeta] {
        if let Some(s) = d.support().find(|s| !pa.states().contains(*s)) {
            return Err(UptoError::Input(format!("unknown state {s}")));
        }
    }
    if let RefuteOutcome::Refuted(trace) = refute_bounded(pa, xi, zeta, max_depth) {
        return Ok(SearchOutcome::Refuted(trace));
    }

    let mut pairs = vec![(xi.clone(), zeta.clone())];
    let mut depths = vec![0usize];
    let mut cache = SuccessorCache::new(pa);
    loop {
        let cert = Certificate::new(pairs.clone(), config);
        let obligation = match check_certificate(pa, &cert)? {
            Verdict::Accepted => return Ok(SearchOutcome::Proven(cert)),
            Verdict::Rejected(obs) => obs.into_iter().next().expect("rejections are nonempty"),
        };
        if obligation.reason != Reason::Unmatched {
            return Ok(SearchOutcome::Unknown);
        }
        let idx = obligation.pair_index;
        if depths[idx] + 1 > max_depth || pairs.len() >= max_pairs {
            return Ok(SearchOutcome::Unknown);
        }
        let g = obligation.generator.expect("unmatched obligations name a move");
        let (defender_dist, flip) = match obligation.spoiler {
            Side::Left => (pairs[idx].1.clone(), false),
            Side::Right => (pairs[idx].0.clone(), true),
        };
        let defender = cache
            .get(&defender_dist, &obligation.label)?
            .as_set()
            .expect("both sides step")
            .clone();
        let mut gens = generator_pairs(&pairs, config.base);
        if flip {
            gens = gens.into_iter().map(|(u, v)| (v, u)).collect();
        }

        let mut added = None;
        'candidates: for d in defender_candidates(defender.generators()) {
            if refute_bounded(pa, &g, &d, max_depth).is_refuted() {
                continue;
            }
            let mut options = Vec::new();
            if config.base != Base::Plain {
                if let Some(rest) = peel(&g, &d, &gens, config.identity_slack) {
                    options.push(rest);
                }
            }
            options.push((g.clone(), d.clone()));
            for (sp, df) in options {
                let pair = if flip { (df, sp) } else { (sp, df) };
                if pairs.contains(&pair) || refute_bounded(pa, &pair.0, &pair.1, max_depth).is_refuted() {
                    continue;
                }
                added = Some(pair);
                break 'candidates;
            }
        }
        match added {
            Some(pair) => {
                pairs.push(pair);
                depths.push(depths[idx] + 1);
            }
            None => return Ok(SearchOutcome::Unknown),
        }
    }
}
