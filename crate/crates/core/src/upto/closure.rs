use std::collections::{BTreeMap, BTreeSet};

use crate::lifting::conv_member_of;
use crate::model::{accumulate, Dist, Rational, StateId};
use crate::ratlp::{feasible, LinSystem};

use super::{Base, TechniqueConfig};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index stays root so classes are found in node order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Reflexive, symmetric and transitive closure of `rel` over the
/// distributions occurring in it, as all ordered pairs within each class.
pub fn equivalence_closure(rel: &[(Dist, Dist)]) -> Vec<(Dist, Dist)> {
    let nodes: Vec<&Dist> = rel
        .iter()
        .flat_map(|(l, r)| [l, r])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let pos = |d: &Dist| nodes.binary_search(&d).expect("node present");
    let mut uf = UnionFind::new(nodes.len());
    for (l, r) in rel {
        uf.union(pos(l), pos(r));
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..nodes.len() {
        classes.entry(uf.find(i)).or_default().push(i);
    }
    let mut out = Vec::new();
    for members in classes.values() {
        for &i in members {
            for &j in members {
                out.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    out
}

/// Generator pairs whose convex hull is the base closure of `rel`.
pub fn generator_pairs(rel: &[(Dist, Dist)], base: Base) -> Vec<(Dist, Dist)> {
    match base {
        Base::Plain | Base::Cvx => {
            let mut out: Vec<(Dist, Dist)> = Vec::new();
            for p in rel {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            out
        }
        Base::CvxE => equivalence_closure(rel),
    }
}

/// Certificate that a pair lies in the closure: nonzero weights on generator
/// pairs (by index) plus an optional diagonal part `c · (φ, φ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureWitness {
    pub pairs: Vec<(usize, Rational)>,
    pub diagonal: Option<(Rational, Dist)>,
}

impl ClosureWitness {
    /// Recomputes the pair this witness describes.
    pub fn rebuild(&self, gens: &[(Dist, Dist)]) -> (Dist, Dist) {
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for (i, w) in &self.pairs {
            accumulate(&mut left, w, &gens[*i].0);
            accumulate(&mut right, w, &gens[*i].1);
        }
        if let Some((c, phi)) = &self.diagonal {
            accumulate(&mut left, c, phi);
            accumulate(&mut right, c, phi);
        }
        (
            Dist::normalized(&left).expect("convex witness"),
            Dist::normalized(&right).expect("convex witness"),
        )
    }
}

/// Where the right-hand component of a membership query comes from.
pub(crate) enum Target<'a> {
    Point(&'a Dist),
    /// Any point of the hull of these generators.
    Hull(&'a [Dist]),
}

pub(crate) struct Solution {
    pub witness: ClosureWitness,
    /// Mixture weights over the hull generators (`Target::Hull` only).
    pub mixture: Vec<Rational>,
}

fn diagonal_from(phi: BTreeMap<StateId, Rational>) -> Option<(Rational, Dist)> {
    let c: Rational = phi.values().sum();
    if c.is_zero() {
        None
    } else {
        Some((c, Dist::normalized(&phi).expect("positive mass")))
    }
}

/// Decides whether `(left, t)` lies in `cvx(gens ∪ diagonal)` for the given
/// target `t`, solving for the defender mixture inside the same system.
pub(crate) fn solve_membership(
    left: &Dist,
    target: Target<'_>,
    gens: &[(Dist, Dist)],
    slack: bool,
) -> Option<Solution> {
    // Exact generator hit or diagonal hit, without building a system.
    let hull: &[Dist] = match &target {
        Target::Point(d) => std::slice::from_ref(*d),
        Target::Hull(h) => h,
    };
    for (j, h) in hull.iter().enumerate() {
        let mut mixture = vec![Rational::zero(); hull.len()];
        mixture[j] = Rational::one();
        if let Some(i) = gens.iter().position(|(u, v)| u == left && v == h) {
            return Some(Solution {
                witness: ClosureWitness {
                    pairs: vec![(i, Rational::one())],
                    diagonal: None,
                },
                mixture,
            });
        }
        if slack && h == left {
            return Some(Solution {
                witness: ClosureWitness {
                    pairs: vec![],
                    diagonal: Some((Rational::one(), left.clone())),
                },
                mixture,
            });
        }
    }

    let usable: Vec<usize> = (0..gens.len())
        .filter(|&i| {
            gens[i].0.support_within(left)
                && match &target {
                    Target::Point(d) => gens[i].1.support_within(d),
                    Target::Hull(_) => true,
                }
        })
        .collect();
    let diag_states: Vec<StateId> = if slack {
        left.support()
            .filter(|s| match &target {
                Target::Point(d) => d.contains(s),
                Target::Hull(_) => true,
            })
            .cloned()
            .collect()
    } else {
        Vec::new()
    };
    if usable.is_empty() && diag_states.is_empty() {
        return None;
    }
    let n_lambda = usable.len();
    let n_phi = diag_states.len();
    let n_mu = match &target {
        Target::Point(_) => 0,
        Target::Hull(h) => h.len(),
    };
    let mut sys = LinSystem::new(n_lambda + n_phi + n_mu);
    let phi_var = |s: &StateId| diag_states.binary_search(s).ok().map(|k| n_lambda + k);

    for (s, w) in left.iter() {
        let mut terms: Vec<(usize, Rational)> = usable
            .iter()
            .enumerate()
            .filter_map(|(k, &i)| gens[i].0.get(s).map(|x| (k, x.clone())))
            .collect();
        if let Some(v) = phi_var(s) {
            terms.push((v, Rational::one()));
        }
        sys.push_sparse(terms, w.clone());
    }

    let mut right_states: BTreeSet<&StateId> = usable.iter().flat_map(|&i| gens[i].1.support()).collect();
    right_states.extend(diag_states.iter());
    right_states.extend(hull.iter().flat_map(|h| h.support()));
    for s in right_states {
        let mut terms: Vec<(usize, Rational)> = usable
            .iter()
            .enumerate()
            .filter_map(|(k, &i)| gens[i].1.get(s).map(|x| (k, x.clone())))
            .collect();
        if let Some(v) = phi_var(s) {
            terms.push((v, Rational::one()));
        }
        let rhs = match &target {
            Target::Point(d) => d.weight(s),
            Target::Hull(h) => {
                for (j, g) in h.iter().enumerate() {
                    if let Some(x) = g.get(s) {
                        terms.push((n_lambda + n_phi + j, -x));
                    }
                }
                Rational::zero()
            }
        };
        sys.push_sparse(terms, rhs);
    }
    if n_mu > 0 {
        sys.push_sparse((0..n_mu).map(|j| (n_lambda + n_phi + j, Rational::one())), Rational::one());
    }

    let x = feasible(&sys).expect("well-formed system").witness()?;
    let pairs = usable
        .iter()
        .enumerate()
        .filter(|(k, _)| !x[*k].is_zero())
        .map(|(k, &i)| (i, x[k].clone()))
        .collect();
    let phi: BTreeMap<StateId, Rational> = diag_states
        .iter()
        .enumerate()
        .filter(|(k, _)| !x[n_lambda + k].is_zero())
        .map(|(k, s)| (s.clone(), x[n_lambda + k].clone()))
        .collect();
    let mixture = match &target {
        Target::Point(_) => vec![Rational::one()],
        Target::Hull(_) => x[n_lambda + n_phi..].to_vec(),
    };
    Some(Solution {
        witness: ClosureWitness {
            pairs,
            diagonal: diagonal_from(phi),
        },
        mixture,
    })
}

/// Plain technique: the pair itself (or, with slack, a diagonal pair) must
/// be in the relation; with a hull target, any hull point may be used.
pub(crate) fn plain_membership(
    left: &Dist,
    hull: &[Dist],
    gens: &[(Dist, Dist)],
    slack: bool,
) -> Option<Solution> {
    for (i, (u, v)) in gens.iter().enumerate() {
        if u == left {
            if let Some(mixture) = conv_member_of(v, hull) {
                return Some(Solution {
                    witness: ClosureWitness {
                        pairs: vec![(i, Rational::one())],
                        diagonal: None,
                    },
                    mixture,
                });
            }
        }
    }
    if slack {
        if let Some(mixture) = conv_member_of(left, hull) {
            return Some(Solution {
                witness: ClosureWitness {
                    pairs: vec![],
                    diagonal: Some((Rational::one(), left.clone())),
                },
                mixture,
            });
        }
    }
    None
}

/// Decides `(left, right) ∈ f(rel)` for the technique `config`. Witness
/// indices refer to [`generator_pairs`]`(rel, config.base)`.
pub fn closure_member(
    left: &Dist,
    right: &Dist,
    rel: &[(Dist, Dist)],
    config: TechniqueConfig,
) -> Option<ClosureWitness> {
    let gens = generator_pairs(rel, config.base);
    let sol = match config.base {
        Base::Plain => plain_membership(left, std::slice::from_ref(right), &gens, config.identity_slack),
        Base::Cvx | Base::CvxE => solve_membership(left, Target::Point(right), &gens, config.identity_slack),
    };
    sol.map(|s| s.witness)
}
