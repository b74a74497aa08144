//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pabisim_core::bisim::Partition;
use pabisim_core::lifting::{lift_related, StateRel};
use pabisim_core::model::parse_pa;
use pabisim_core::ratlp::{feasible, LinSystem};
use pabisim_core::{Dist, Label, Pa, Rational, StateId};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fig1() -> Pa {
    parse_pa(include_str!("../../../../figures/fig1.pa")).unwrap()
}

pub fn uv_hull() -> Pa {
    parse_pa(include_str!("../../../../figures/uv_hull.pa")).unwrap()
}

pub fn corpus() -> Vec<(&'static str, Pa)> {
    vec![("fig1", fig1()), ("uv_hull", uv_hull())]
}

pub fn d(text: &str) -> Dist {
    Dist::parse_literal(text).unwrap()
}

pub fn sid(name: &str) -> StateId {
    StateId::new(name).unwrap()
}

pub fn lab(name: &str) -> Label {
    Label::new(name).unwrap()
}

pub fn r(n: i64, m: i64) -> Rational {
    Rational::new(n, m)
}

/// Positive weights with denominators at most 12 summing to one.
pub fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let denom = rng.gen_range(n.max(1) as i64..=12);
    let mut cuts: Vec<i64> = (1..denom).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(n - 1).collect();
    cuts.sort();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(denom)) {
        out.push(Rational::new(c - prev, denom));
        prev = c;
    }
    out
}

/// Random distribution over at most `max_support` of `states`.
pub fn random_dist(rng: &mut ChaCha8Rng, states: &[StateId], max_support: usize) -> Dist {
    let k = rng.gen_range(1..=max_support.min(states.len()));
    let support: Vec<StateId> = states.choose_multiple(rng, k).cloned().collect();
    let w = weights(rng, k);
    Dist::new(support.into_iter().zip(w)).unwrap()
}

/// Rational in `(0, 1)` with denominator at most 12.
pub fn open_unit(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.gen_range(2..=12);
    Rational::new(rng.gen_range(1..den), den)
}

/// Random automaton over `n` states and labels `a`, `b`. The second half of
/// the states copies the first half so that nontrivial merges occur, with an
/// occasional perturbation.
pub fn random_pa(rng: &mut ChaCha8Rng, n: usize) -> Pa {
    let half = n.div_ceil(2);
    let names: Vec<StateId> = (0..n).map(|i| sid(&format!("s{i}"))).collect();
    let labels = [lab("a"), lab("b")];
    let mut trans: BTreeMap<(StateId, Label), Vec<Dist>> = BTreeMap::new();
    let copy = |s: &StateId| -> StateId {
        let i: usize = s.as_str()[1..].parse().unwrap();
        if i + half < n {
            names[i + half].clone()
        } else {
            s.clone()
        }
    };
    for s in &names[..half] {
        for a in &labels {
            let count = rng.gen_range(0..=2);
            let list: Vec<Dist> = (0..count).map(|_| random_dist(rng, &names, 2)).collect();
            if !list.is_empty() {
                trans.insert((s.clone(), a.clone()), list);
            }
        }
    }
    let originals: Vec<((StateId, Label), Vec<Dist>)> = trans.clone().into_iter().collect();
    for ((s, a), list) in originals {
        let t = copy(&s);
        if t == s {
            continue;
        }
        let mut image: Vec<Dist> = list
            .iter()
            .map(|mu| {
                let mut mass: BTreeMap<StateId, Rational> = BTreeMap::new();
                for (u, w) in mu.iter() {
                    *mass.entry(copy(u)).or_insert_with(Rational::zero) += w;
                }
                Dist::normalized(&mass).unwrap()
            })
            .collect();
        if rng.gen_bool(0.15) {
            image.push(random_dist(rng, &names, 2));
        }
        trans.insert((t, a), image);
    }
    Pa::new(names.into_iter().collect(), labels.into_iter().collect(), trans).unwrap()
}

/// Solves `A_S x = b` for the columns `cols`; `Some` only when those columns
/// are linearly independent and the system is consistent.
fn solve_columns(sys: &LinSystem, cols: &[usize]) -> Option<Vec<Rational>> {
    let k = cols.len();
    let mut m: Vec<Vec<Rational>> = sys
        .rows
        .iter()
        .map(|(row, rhs)| {
            let mut v: Vec<Rational> = cols.iter().map(|&j| row[j].clone()).collect();
            v.push(rhs.clone());
            v
        })
        .collect();
    let mut pivot_row = 0;
    for c in 0..k {
        let p = (pivot_row..m.len()).find(|&i| !m[i][c].is_zero())?;
        m.swap(pivot_row, p);
        let inv = Rational::one() / &m[pivot_row][c];
        for v in m[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != pivot_row && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=k {
                    let delta = &f * &m[pivot_row][j];
                    m[i][j] -= &delta;
                }
            }
        }
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|c| m[c][k].clone()).collect())
}

/// Feasibility of `{x ≥ 0 : Ax = b}` by enumerating all column subsets: a
/// feasible system has a basic feasible solution on independent columns.
pub fn brute_force_feasible(sys: &LinSystem) -> bool {
    let n = sys.num_vars;
    (0u32..1 << n).any(|mask| {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        solve_columns(sys, &cols).is_some_and(|x| x.iter().all(|v| !v.is_negative()))
    })
}

/// Small random system; rows may repeat, vanish or have negative right-hand
/// sides. Half the systems are built around a known nonnegative point.
pub fn random_system(rng: &mut ChaCha8Rng) -> LinSystem {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=4);
    let mut sys = LinSystem::new(n);
    let point: Option<Vec<Rational>> = rng
        .gen_bool(0.5)
        .then(|| (0..n).map(|_| Rational::new(rng.gen_range(0..=3), rng.gen_range(1..=3))).collect());
    for i in 0..m {
        if i > 0 && rng.gen_bool(0.1) {
            let dup = sys.rows[rng.gen_range(0..i)].clone();
            sys.rows.push(dup);
            continue;
        }
        let row: Vec<Rational> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    Rational::zero()
                } else {
                    Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=4))
                }
            })
            .collect();
        let rhs = match &point {
            Some(x) => row.iter().zip(x).map(|(a, v)| a * v).sum(),
            None => Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=4)),
        };
        sys.push_row(row, rhs);
    }
    sys
}

pub fn relation_of(p: &Partition) -> StateRel {
    let mut rel = BTreeSet::new();
    for b in p.blocks() {
        for s in b {
            for t in b {
                rel.insert((s.clone(), t.clone()));
            }
        }
    }
    rel
}

/// Random partition of `states` into at most `k` blocks.
pub fn random_partition(rng: &mut ChaCha8Rng, states: &[StateId], k: usize) -> Partition {
    let mut blocks: Vec<Vec<StateId>> = vec![Vec::new(); k];
    for s in states {
        blocks[rng.gen_range(0..k)].push(s.clone());
    }
    Partition::from_blocks(blocks)
}

/// Is there a convex combination of `options` related to `mu` by a coupling
/// inside `rel`? Variables: one mixture weight per option, one mass per
/// related pair.
fn convex_lift(rel: &StateRel, mu: &Dist, options: &[Dist]) -> bool {
    let pairs: Vec<&(StateId, StateId)> = rel.iter().filter(|(s, _)| mu.contains(s)).collect();
    let targets: BTreeSet<&StateId> = options.iter().flat_map(|o| o.support()).collect();
    let k = options.len();
    let mut sys = LinSystem::new(k + pairs.len());
    for (s, w) in mu.iter() {
        sys.push_sparse(
            pairs
                .iter()
                .enumerate()
                .filter(|(_, (u, _))| u == s)
                .map(|(i, _)| (k + i, Rational::one())),
            w.clone(),
        );
    }
    let mut all_targets: BTreeSet<&StateId> = targets;
    all_targets.extend(pairs.iter().map(|(_, t)| t));
    for t in all_targets {
        let mut terms: Vec<(usize, Rational)> = pairs
            .iter()
            .enumerate()
            .filter(|(_, (_, v))| v == t)
            .map(|(i, _)| (k + i, Rational::one()))
            .collect();
        for (j, o) in options.iter().enumerate() {
            if let Some(w) = o.get(t) {
                terms.push((j, -w));
            }
        }
        sys.push_sparse(terms, Rational::zero());
    }
    sys.push_sparse((0..k).map(|j| (j, Rational::one())), Rational::one());
    feasible(&sys).unwrap().is_feasible()
}

fn simulates(pa: &Pa, rel: &StateRel, s: &StateId, t: &StateId, convex: bool) -> bool {
    pa.labels().iter().all(|a| {
        let opts = pa.successors(t, a);
        pa.successors(s, a).iter().all(|mu| {
            if convex {
                !opts.is_empty() && convex_lift(rel, mu, opts)
            } else {
                opts.iter().any(|nu| lift_related(rel, mu, nu).is_some())
            }
        })
    })
}

/// Greatest fixpoint over arbitrary relations, starting from all pairs.
pub fn naive_bisimilarity(pa: &Pa, convex: bool) -> StateRel {
    let mut rel: StateRel = pa
        .states()
        .iter()
        .flat_map(|s| pa.states().iter().map(move |t| (s.clone(), t.clone())))
        .collect();
    loop {
        let flipped: StateRel = rel.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
        let next: StateRel = rel
            .iter()
            .filter(|(s, t)| simulates(pa, &rel, s, t, convex) && simulates(pa, &flipped, t, s, convex))
            .cloned()
            .collect();
        if next == rel {
            return rel;
        }
        rel = next;
    }
}
