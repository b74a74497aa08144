//! Relation lifting to distributions, convex hulls in generator form, and
//! convex transitions.

use std::collections::{BTreeMap, BTreeSet};

use crate::bisim::Partition;
use crate::model::{accumulate, Dist, Label, Pa, Rational, StateId};
use crate::ratlp::{feasible, LinSystem};

/// A relation on states.
pub type StateRel = BTreeSet<(StateId, StateId)>;

/// Joint distribution `ν(s, t)` with prescribed marginals.
pub type Coupling = BTreeMap<(StateId, StateId), Rational>;

/// Finds a coupling of `left` and `right` supported in `rel`, if one exists.
pub fn lift_related(rel: &StateRel, left: &Dist, right: &Dist) -> Option<Coupling> {
    let vars: Vec<(StateId, StateId)> = rel
        .iter()
        .filter(|(s, t)| left.contains(s) && right.contains(t))
        .cloned()
        .collect();
    let mut sys = LinSystem::new(vars.len());
    for (s, w) in left.iter() {
        sys.push_sparse(
            vars.iter()
                .enumerate()
                .filter(|(_, (u, _))| u == s)
                .map(|(i, _)| (i, Rational::one())),
            w.clone(),
        );
    }
    for (t, w) in right.iter() {
        sys.push_sparse(
            vars.iter()
                .enumerate()
                .filter(|(_, (_, v))| v == t)
                .map(|(i, _)| (i, Rational::one())),
            w.clone(),
        );
    }
    let x = feasible(&sys).expect("well-formed system").witness()?;
    Some(
        vars.into_iter()
            .zip(x)
            .filter(|(_, v)| !v.is_zero())
            .collect(),
    )
}

/// Mass of `d` on each block of `partition`, keyed by block representative.
/// States outside the partition count as singleton blocks.
pub fn block_masses(partition: &Partition, d: &Dist) -> BTreeMap<StateId, Rational> {
    let mut out: BTreeMap<StateId, Rational> = BTreeMap::new();
    for (s, w) in d.iter() {
        let key = partition.block_of(s).cloned().unwrap_or_else(|| s.clone());
        *out.entry(key).or_insert_with(Rational::zero) += w;
    }
    out
}

/// Lifting of an equivalence: equal mass on every block.
pub fn lift_related_partition(partition: &Partition, left: &Dist, right: &Dist) -> bool {
    block_masses(partition, left) == block_masses(partition, right)
}

/// Convex set of distributions given by a nonempty list of generators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polytope {
    generators: Vec<Dist>,
}

impl Polytope {
    /// Drops repeated generators, keeping first occurrences. `None` if empty.
    pub fn new(generators: Vec<Dist>) -> Option<Self> {
        let mut gens: Vec<Dist> = Vec::with_capacity(generators.len());
        for g in generators {
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
        if gens.is_empty() {
            None
        } else {
            Some(Polytope { generators: gens })
        }
    }

    pub fn point(d: Dist) -> Self {
        Polytope { generators: vec![d] }
    }

    pub fn generators(&self) -> &[Dist] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, point: &Dist) -> bool {
        conv_member(point, self).is_some()
    }

    /// Semantic equality: each generator set lies in the other's hull.
    pub fn hull_eq(&self, other: &Polytope) -> bool {
        self.generators.iter().all(|g| other.contains(g))
            && other.generators.iter().all(|g| self.contains(g))
    }
}

impl std::fmt::Display for Polytope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("{")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("}")
    }
}

/// Convex coefficients over `generators` reproducing `point`, if any.
pub fn conv_member_of(point: &Dist, generators: &[Dist]) -> Option<Vec<Rational>> {
    // a generator with mass outside supp(point) must get weight zero
    let usable: Vec<usize> = (0..generators.len())
        .filter(|&i| generators[i].support_within(point))
        .collect();
    if usable.is_empty() {
        return None;
    }
    if let Some(&i) = usable.iter().find(|&&i| generators[i] == *point) {
        let mut lambda = vec![Rational::zero(); generators.len()];
        lambda[i] = Rational::one();
        return Some(lambda);
    }
    if !point
        .support()
        .all(|s| usable.iter().any(|&i| generators[i].contains(s)))
    {
        return None;
    }
    let embed = |pairs: &[(usize, Rational)]| {
        let mut lambda = vec![Rational::zero(); generators.len()];
        for (i, w) in pairs {
            lambda[*i] = w.clone();
        }
        lambda
    };
    match usable[..] {
        [_] => return None,
        [i, j] => {
            return segment_coefficient(point, &generators[i], &generators[j])
                .map(|t| embed(&[(i, t.clone()), (j, t.complement())]));
        }
        _ => {}
    }
    let mut sys = LinSystem::new(usable.len());
    for (s, w) in point.iter() {
        sys.push_sparse(
            usable
                .iter()
                .enumerate()
                .filter_map(|(k, &i)| generators[i].get(s).map(|g| (k, g.clone()))),
            w.clone(),
        );
    }
    sys.push_sparse((0..usable.len()).map(|k| (k, Rational::one())), Rational::one());
    let x = feasible(&sys).expect("well-formed system").witness()?;
    let mut lambda = vec![Rational::zero(); generators.len()];
    for (k, &i) in usable.iter().enumerate() {
        lambda[i] = x[k].clone();
    }
    Some(lambda)
}

/// `t ∈ [0, 1]` with `point = t·g + (1 − t)·h`, if any.
fn segment_coefficient(point: &Dist, g: &Dist, h: &Dist) -> Option<Rational> {
    let s = g.support().chain(h.support()).find(|s| g.weight(s) != h.weight(s))?;
    let t = (point.weight(s) - h.weight(s)) / (g.weight(s) - h.weight(s));
    if t.is_negative() || t > Rational::one() {
        return None;
    }
    let ok = point
        .support()
        .chain(g.support())
        .chain(h.support())
        .all(|s| point.weight(s) == &t * &g.weight(s) + &t.complement() * &h.weight(s));
    ok.then_some(t)
}

pub fn conv_member(point: &Dist, poly: &Polytope) -> Option<Vec<Rational>> {
    conv_member_of(point, &poly.generators)
}

/// Reduces a polytope to the vertex set of its hull, sorted, hence canonical.
pub fn conv_reduce(poly: &Polytope) -> Polytope {
    let gens = &poly.generators;
    if gens.len() <= 1 {
        return poly.clone();
    }
    let states: Vec<StateId> = gens
        .iter()
        .flat_map(|g| g.support().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let points = DensePoints::new(gens, &states);
    let mut is_vertex = vec![false; gens.len()];
    for f in probe_functionals(states.len()) {
        is_vertex[points.lex_maximizer(&f)] = true;
    }
    // a point inside the hull of the remaining points can be dropped
    // without changing the hull; one that is not is a vertex
    let known: Vec<Dist> = (0..gens.len()).filter(|&i| is_vertex[i]).map(|i| gens[i].clone()).collect();
    let mut alive = vec![true; gens.len()];
    for i in 0..gens.len() {
        if is_vertex[i] || conv_member_of(&gens[i], &known).is_some() {
            alive[i] = is_vertex[i];
            continue;
        }
        let others: Vec<Dist> = (0..gens.len())
            .filter(|&j| j != i && alive[j])
            .map(|j| gens[j].clone())
            .collect();
        alive[i] = conv_member_of(&gens[i], &others).is_none();
    }
    let mut vertices: Vec<Dist> = (0..gens.len()).filter(|&i| alive[i]).map(|i| gens[i].clone()).collect();
    vertices.sort();
    Polytope { generators: vertices }
}

/// Generators as dense coordinate vectors, also scaled to a common integer
/// denominator when that fits.
struct DensePoints {
    rat: Vec<Vec<Rational>>,
    int: Option<Vec<Vec<i128>>>,
}

impl DensePoints {
    fn new(gens: &[Dist], states: &[StateId]) -> Self {
        let rat: Vec<Vec<Rational>> = gens
            .iter()
            .map(|g| states.iter().map(|s| g.weight(s)).collect())
            .collect();
        let int = common_scale(rat.iter().flatten()).and_then(|k| {
            rat.iter()
                .map(|row| row.iter().map(|v| scaled(v, k)).collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()
        });
        DensePoints { rat, int }
    }

    /// Index of the point maximizing `f`, ties broken by comparing
    /// coordinates in order. The lexicographic maximum of a finite set is
    /// always a vertex of its hull.
    fn lex_maximizer(&self, f: &[Rational]) -> usize {
        if let (Some(int), Some(k)) = (&self.int, common_scale(f.iter())) {
            if let Some(fi) = f.iter().map(|v| scaled(v, k)).collect::<Option<Vec<_>>>() {
                let keys: Option<Vec<i128>> = int
                    .iter()
                    .map(|x| x.iter().zip(&fi).try_fold(0i128, |acc, (a, b)| acc.checked_add(a.checked_mul(*b)?)))
                    .collect();
                if let Some(keys) = keys {
                    return argmax_lex(&keys, int);
                }
            }
        }
        let keys: Vec<Rational> = self
            .rat
            .iter()
            .map(|x| x.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect();
        argmax_lex(&keys, &self.rat)
    }
}

fn argmax_lex<K: Ord, C: Ord>(keys: &[K], coords: &[Vec<C>]) -> usize {
    (0..keys.len())
        .max_by(|&i, &j| keys[i].cmp(&keys[j]).then_with(|| coords[i].cmp(&coords[j])).then(j.cmp(&i)))
        .expect("nonempty")
}

/// Least common denominator, if it fits in `i64`.
fn common_scale<'a>(values: impl Iterator<Item = &'a Rational>) -> Option<i64> {
    let mut lcm: i64 = 1;
    for v in values {
        let (_, d) = v.small_parts()?;
        let (mut a, mut b) = (lcm, d);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        lcm = (lcm / a).checked_mul(d)?;
    }
    Some(lcm)
}

fn scaled(v: &Rational, k: i64) -> Option<i128> {
    let (n, d) = v.small_parts()?;
    (n as i128).checked_mul((k / d) as i128)
}

/// ± unit weightings plus a small fixed pseudo-random family.
fn probe_functionals(dim: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for sign in [1, -1] {
            let mut f = vec![Rational::zero(); dim];
            f[i] = Rational::from_integer(sign);
            out.push(f);
        }
    }
    let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
    for _ in 0..8 * dim {
        out.push(
            (0..dim)
                .map(|_| {
                    x = x
                        .wrapping_mul(6_364_136_223_846_793_005)
                        .wrapping_add(1_442_695_040_888_963_407);
                    Rational::from_integer(((x >> 33) % 201) as i64 - 100)
                })
                .collect(),
        );
    }
    out
}

/// The convex transitions `s →a_c ·`, as the hull of the listed
/// `a`-successors. `None` when `s` has no `a`-transition.
pub fn convex_steps(pa: &Pa, s: &StateId, a: &Label) -> Option<Polytope> {
    Polytope::new(pa.successors(s, a).to_vec())
}

/// `Σ λ_i g_i` over a polytope's generators; used to rebuild members.
pub fn mix(poly: &[Dist], lambda: &[Rational]) -> Dist {
    let mut acc = BTreeMap::new();
    for (g, l) in poly.iter().zip(lambda) {
        accumulate(&mut acc, l, g);
    }
    Dist::from_map_unchecked(acc)
}
