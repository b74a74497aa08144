//! Convex algebras used by the belief-state transformer: the free algebra of
//! distributions, nonempty convex sets under Minkowski combination, the
//! black-hole extension with a termination element, and label-indexed
//! families. Includes a randomized checker for the convex-algebra laws.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lifting::{conv_reduce, Polytope};
use crate::model::{accumulate, convex_combine, Dist, Label, Rational, StateId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("label domains differ")]
    Arity,
    #[error("coefficient {0} outside [0, 1]")]
    Coefficient(Rational),
    #[error("{expected} arguments, {found} coefficients")]
    Length { expected: usize, found: usize },
}

/// A nonempty convex set of distributions, or the termination element `*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lifted {
    Set(Polytope),
    Bottom,
}

impl Lifted {
    pub fn is_bottom(&self) -> bool {
        matches!(self, Lifted::Bottom)
    }

    pub fn as_set(&self) -> Option<&Polytope> {
        match self {
            Lifted::Set(p) => Some(p),
            Lifted::Bottom => None,
        }
    }

    /// `Bottom` equals only `Bottom`; sets compare by hull.
    pub fn same(&self, other: &Lifted) -> bool {
        match (self, other) {
            (Lifted::Bottom, Lifted::Bottom) => true,
            (Lifted::Set(a), Lifted::Set(b)) => a.hull_eq(b),
            _ => false,
        }
    }
}

impl fmt::Display for Lifted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifted::Set(p) => write!(f, "{p}"),
            Lifted::Bottom => f.write_str("*"),
        }
    }
}

/// A total map from labels to [`Lifted`] values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledFam(pub BTreeMap<Label, Lifted>);

impl LabeledFam {
    pub fn get(&self, a: &Label) -> Option<&Lifted> {
        self.0.get(a)
    }

    pub fn same(&self, other: &LabeledFam) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|((a, x), (b, y))| a == b && x.same(y))
    }

    pub fn restrict(&self, labels: &[Label]) -> LabeledFam {
        LabeledFam(
            self.0
                .iter()
                .filter(|(a, _)| labels.contains(a))
                .map(|(a, v)| (a.clone(), v.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for LabeledFam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{a}={v}")?;
        }
        f.write_str("]")
    }
}

/// Pointwise combination `p·C + (1-p)·D`, reduced to its vertices.
pub fn minkowski(p: &Rational, c: &Polytope, d: &Polytope) -> Polytope {
    assert!(p.is_unit_interval(), "coefficient {p} outside [0, 1]");
    minkowski_n(&[p.clone(), p.complement()], &[c.clone(), d.clone()])
}

/// n-ary pointwise combination `Σ p_i·C_i`. Arguments with coefficient zero
/// contribute nothing and are skipped.
pub fn minkowski_n(coefficients: &[Rational], polys: &[Polytope]) -> Polytope {
    let live: Vec<(&Rational, &Polytope)> = coefficients
        .iter()
        .zip(polys)
        .filter(|(p, _)| !p.is_zero())
        .collect();
    // fold factor by factor, reducing to vertices after each step
    let mut mass = Rational::zero();
    let mut partial: Option<Polytope> = None;
    for (p, poly) in live {
        let total = &mass + p;
        let next = match &partial {
            None => poly.clone(),
            Some(acc) => {
                let (wa, wp) = (&mass / &total, p / &total);
                let mut gens = Vec::with_capacity(acc.len() * poly.len());
                for x in acc.generators() {
                    for g in poly.generators() {
                        let mut m = BTreeMap::new();
                        accumulate(&mut m, &wa, x);
                        accumulate(&mut m, &wp, g);
                        gens.push(Dist::normalized(&m).expect("convex coefficients"));
                    }
                }
                Polytope::new(gens).expect("nonempty product")
            }
        };
        partial = Some(conv_reduce(&next));
        mass = total;
    }
    partial.expect("coefficients sum to one")
}

/// Binary combination in the black-hole extension: `*` absorbs every proper
/// combination, while `p = 1` and `p = 0` project onto the first and second
/// argument respectively.
pub fn blackhole_combine(p: &Rational, u: &Lifted, v: &Lifted) -> Lifted {
    assert!(p.is_unit_interval(), "coefficient {p} outside [0, 1]");
    if p.is_one() {
        return u.clone();
    }
    if p.is_zero() {
        return v.clone();
    }
    match (u, v) {
        (Lifted::Set(c), Lifted::Set(d)) => Lifted::Set(minkowski(p, c, d)),
        _ => Lifted::Bottom,
    }
}

/// n-ary form: `*` if any argument with positive coefficient is `*`.
pub fn lifted_combine(coefficients: &[Rational], elems: &[Lifted]) -> Lifted {
    let mut cs = Vec::new();
    let mut polys = Vec::new();
    for (p, e) in coefficients.iter().zip(elems) {
        if p.is_zero() {
            continue;
        }
        match e {
            Lifted::Bottom => return Lifted::Bottom,
            Lifted::Set(poly) => {
                cs.push(p.clone());
                polys.push(poly.clone());
            }
        }
    }
    Lifted::Set(minkowski_n(&cs, &polys))
}

/// Label-wise black-hole combination.
pub fn exp_combine(p: &Rational, f: &LabeledFam, g: &LabeledFam) -> Result<LabeledFam, AlgebraError> {
    if !p.is_unit_interval() {
        return Err(AlgebraError::Coefficient(p.clone()));
    }
    if !f.0.keys().eq(g.0.keys()) {
        return Err(AlgebraError::Arity);
    }
    Ok(LabeledFam(
        f.0.iter()
            .zip(g.0.values())
            .map(|((a, x), y)| (a.clone(), blackhole_combine(p, x, y)))
            .collect(),
    ))
}

pub fn fam_combine(coefficients: &[Rational], fams: &[LabeledFam]) -> Result<LabeledFam, AlgebraError> {
    if coefficients.len() != fams.len() || fams.is_empty() {
        return Err(AlgebraError::Length {
            expected: fams.len(),
            found: coefficients.len(),
        });
    }
    if fams.iter().any(|f| !f.0.keys().eq(fams[0].0.keys())) {
        return Err(AlgebraError::Arity);
    }
    Ok(LabeledFam(
        fams[0]
            .0
            .keys()
            .map(|a| {
                let elems: Vec<Lifted> = fams.iter().map(|f| f.0[a].clone()).collect();
                (a.clone(), lifted_combine(coefficients, &elems))
            })
            .collect(),
    ))
}

// ---------------------------------------------------------------------------
// Randomized law checking
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Projection,
    Barycenter,
    Idempotence,
    ParametricCommutativity,
    ParametricAssociativity,
}

impl Law {
    pub const ALL: [Law; 5] = [
        Law::Projection,
        Law::Barycenter,
        Law::Idempotence,
        Law::ParametricCommutativity,
        Law::ParametricAssociativity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::Projection => "projection",
            Law::Barycenter => "barycenter",
            Law::Idempotence => "idempotence",
            Law::ParametricCommutativity => "parametric_commutativity",
            Law::ParametricAssociativity => "parametric_associativity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CarrierKind {
    Dist,
    Polytope,
    Lifted,
    LabeledFam,
}

impl CarrierKind {
    pub const ALL: [CarrierKind; 4] = [
        CarrierKind::Dist,
        CarrierKind::Polytope,
        CarrierKind::Lifted,
        CarrierKind::LabeledFam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CarrierKind::Dist => "Dist",
            CarrierKind::Polytope => "Polytope",
            CarrierKind::Lifted => "Lifted",
            CarrierKind::LabeledFam => "LabeledFam",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawOutcome {
    pub law: Law,
    pub carrier: CarrierKind,
    pub passes: usize,
    pub failures: usize,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomsReport {
    pub samples: usize,
    pub seed: u64,
    pub outcomes: Vec<LawOutcome>,
}

impl AxiomsReport {
    pub fn total_failures(&self) -> usize {
        self.outcomes.iter().map(|o| o.failures).sum()
    }

    pub fn outcome(&self, law: Law, carrier: CarrierKind) -> Option<&LawOutcome> {
        self.outcomes.iter().find(|o| o.law == law && o.carrier == carrier)
    }
}

impl fmt::Display for AxiomsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            write!(
                f,
                "{} {} passes={} failures={}",
                o.law.name(),
                o.carrier.name(),
                o.passes,
                o.failures
            )?;
            if let Some(c) = &o.counterexample {
                write!(f, " counterexample: {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// n-ary convex combination on distributions, injectable so that faulty
/// implementations can be run through the law checker.
pub type DistCombine<'a> = &'a (dyn Fn(&[Rational], &[Dist]) -> Dist + Sync);

const SAMPLE_STATES: [&str; 4] = ["s0", "s1", "s2", "s3"];
const SAMPLE_LABELS: [&str; 2] = ["a", "b"];
const MAX_DENOM: u32 = 12;
const MAX_SUPPORT: usize = 4;
const MAX_GENERATORS: usize = 3;
const MAX_ARITY: usize = 3;

fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    let d = rng.gen_range(1..=MAX_DENOM);
    let n = rng.gen_range(0..=d);
    Rational::new(n as i64, d as i64)
}

/// `n` nonnegative coefficients summing to one, common denominator ≤ 12.
fn random_coefficients(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let d = rng.gen_range(1..=MAX_DENOM);
    let mut parts = vec![0u32; n];
    for _ in 0..d {
        parts[rng.gen_range(0..n)] += 1;
    }
    parts.iter().map(|&k| Rational::new(k as i64, d as i64)).collect()
}

fn random_dist(rng: &mut ChaCha8Rng) -> Dist {
    let k = rng.gen_range(1..=MAX_SUPPORT);
    let d = rng.gen_range(k as u32..=MAX_DENOM);
    let states: Vec<&str> = SAMPLE_STATES.choose_multiple(rng, k).cloned().collect();
    let mut parts = vec![1u32; k];
    for _ in 0..(d - k as u32) {
        parts[rng.gen_range(0..k)] += 1;
    }
    Dist::new(
        states
            .iter()
            .zip(parts)
            .map(|(s, p)| (StateId::new(s).unwrap(), Rational::new(p as i64, d as i64))),
    )
    .expect("weights sum to one")
}

fn random_polytope(rng: &mut ChaCha8Rng) -> Polytope {
    let n = rng.gen_range(1..=MAX_GENERATORS);
    Polytope::new((0..n).map(|_| random_dist(rng)).collect()).unwrap()
}

fn random_lifted(rng: &mut ChaCha8Rng) -> Lifted {
    if rng.gen_ratio(1, 4) {
        Lifted::Bottom
    } else {
        Lifted::Set(random_polytope(rng))
    }
}

fn random_fam(rng: &mut ChaCha8Rng) -> LabeledFam {
    LabeledFam(
        SAMPLE_LABELS
            .iter()
            .map(|a| (Label::new(a).unwrap(), random_lifted(rng)))
            .collect(),
    )
}

trait Carrier {
    type Elem: Clone;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
    fn combine(&self, coefficients: &[Rational], elems: &[Self::Elem]) -> Self::Elem;
    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn render(&self, e: &Self::Elem) -> String;
}

struct DistCarrier<'a>(DistCombine<'a>);
struct PolytopeCarrier;
struct LiftedCarrier;
struct FamCarrier;

impl Carrier for DistCarrier<'_> {
    type Elem = Dist;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Dist {
        random_dist(rng)
    }
    fn combine(&self, coefficients: &[Rational], elems: &[Dist]) -> Dist {
        (self.0)(coefficients, elems)
    }
    fn same(&self, a: &Dist, b: &Dist) -> bool {
        a == b
    }
    fn render(&self, e: &Dist) -> String {
        e.to_string()
    }
}

impl Carrier for PolytopeCarrier {
    type Elem = Polytope;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Polytope {
        random_polytope(rng)
    }
    fn combine(&self, coefficients: &[Rational], elems: &[Polytope]) -> Polytope {
        minkowski_n(coefficients, elems)
    }
    fn same(&self, a: &Polytope, b: &Polytope) -> bool {
        a.hull_eq(b)
    }
    fn render(&self, e: &Polytope) -> String {
        e.to_string()
    }
}

impl Carrier for LiftedCarrier {
    type Elem = Lifted;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Lifted {
        random_lifted(rng)
    }
    fn combine(&self, coefficients: &[Rational], elems: &[Lifted]) -> Lifted {
        if let ([p, _], [u, v]) = (coefficients, elems) {
            return blackhole_combine(p, u, v);
        }
        lifted_combine(coefficients, elems)
    }
    fn same(&self, a: &Lifted, b: &Lifted) -> bool {
        a.same(b)
    }
    fn render(&self, e: &Lifted) -> String {
        e.to_string()
    }
}

impl Carrier for FamCarrier {
    type Elem = LabeledFam;
    fn sample(&self, rng: &mut ChaCha8Rng) -> LabeledFam {
        random_fam(rng)
    }
    fn combine(&self, coefficients: &[Rational], elems: &[LabeledFam]) -> LabeledFam {
        if let ([p, _], [f, g]) = (coefficients, elems) {
            return exp_combine(p, f, g).expect("shared label domain");
        }
        fam_combine(coefficients, elems).expect("shared label domain")
    }
    fn same(&self, a: &LabeledFam, b: &LabeledFam) -> bool {
        a.same(b)
    }
    fn render(&self, e: &LabeledFam) -> String {
        e.to_string()
    }
}

fn render_coefs(cs: &[Rational]) -> String {
    let parts: Vec<String> = cs.iter().map(Rational::to_string).collect();
    format!("({})", parts.join(","))
}

fn render_elems<C: Carrier>(c: &C, xs: &[C::Elem]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| c.render(x)).collect();
    format!("[{}]", parts.join(" ; "))
}

/// Runs one random instance of `law`; `Err` carries a rendered counterexample.
fn check_instance<C: Carrier>(c: &C, law: Law, rng: &mut ChaCha8Rng) -> Result<(), String> {
    match law {
        Law::Projection => {
            let n = rng.gen_range(1..=MAX_ARITY);
            let xs: Vec<C::Elem> = (0..n).map(|_| c.sample(rng)).collect();
            let j = rng.gen_range(0..n);
            let coefs: Vec<Rational> = (0..n)
                .map(|i| if i == j { Rational::one() } else { Rational::zero() })
                .collect();
            let lhs = c.combine(&coefs, &xs);
            if c.same(&lhs, &xs[j]) {
                Ok(())
            } else {
                Err(format!("p={} x={} got {}", render_coefs(&coefs), render_elems(c, &xs), c.render(&lhs)))
            }
        }
        Law::Barycenter => {
            let n = rng.gen_range(1..=MAX_ARITY);
            let m = rng.gen_range(1..=MAX_ARITY);
            let xs: Vec<C::Elem> = (0..m).map(|_| c.sample(rng)).collect();
            let p = random_coefficients(rng, n);
            let q: Vec<Vec<Rational>> = (0..n).map(|_| random_coefficients(rng, m)).collect();
            let inner: Vec<C::Elem> = q.iter().map(|qi| c.combine(qi, &xs)).collect();
            let lhs = c.combine(&p, &inner);
            let flat: Vec<Rational> = (0..m)
                .map(|j| p.iter().zip(&q).map(|(pi, qi)| pi * &qi[j]).sum())
                .collect();
            let rhs = c.combine(&flat, &xs);
            if c.same(&lhs, &rhs) {
                Ok(())
            } else {
                let qs: Vec<String> = q.iter().map(|qi| render_coefs(qi)).collect();
                Err(format!(
                    "p={} q=[{}] x={} lhs={} rhs={}",
                    render_coefs(&p),
                    qs.join(" "),
                    render_elems(c, &xs),
                    c.render(&lhs),
                    c.render(&rhs)
                ))
            }
        }
        Law::Idempotence => {
            let x = c.sample(rng);
            let p = random_unit(rng);
            let lhs = c.combine(&[p.clone(), p.complement()], &[x.clone(), x.clone()]);
            if c.same(&lhs, &x) {
                Ok(())
            } else {
                Err(format!("p={p} x={} got {}", c.render(&x), c.render(&lhs)))
            }
        }
        Law::ParametricCommutativity => {
            let x = c.sample(rng);
            let y = c.sample(rng);
            let p = random_unit(rng);
            let lhs = c.combine(&[p.clone(), p.complement()], &[x.clone(), y.clone()]);
            let rhs = c.combine(&[p.complement(), p.clone()], &[y.clone(), x.clone()]);
            if c.same(&lhs, &rhs) {
                Ok(())
            } else {
                Err(format!("p={p} x={} y={}", c.render(&x), c.render(&y)))
            }
        }
        Law::ParametricAssociativity => {
            let (x, y, z) = (c.sample(rng), c.sample(rng), c.sample(rng));
            let (p, q) = loop {
                let p = random_unit(rng);
                let q = random_unit(rng);
                if !(p.is_one() && q.is_one()) {
                    break (p, q);
                }
            };
            let pq = &p * &q;
            let rest = pq.complement();
            let inner_l = c.combine(&[q.clone(), q.complement()], &[x.clone(), y.clone()]);
            let lhs = c.combine(&[p.clone(), p.complement()], &[inner_l, z.clone()]);
            let inner_r = c.combine(
                &[&p * &q.complement() / &rest, p.complement() / &rest],
                &[y.clone(), z.clone()],
            );
            let rhs = c.combine(&[pq.clone(), rest], &[x.clone(), inner_r]);
            if c.same(&lhs, &rhs) {
                Ok(())
            } else {
                Err(format!(
                    "p={p} q={q} x={} y={} z={}",
                    c.render(&x),
                    c.render(&y),
                    c.render(&z)
                ))
            }
        }
    }
}

fn run_law<C: Carrier>(c: &C, kind: CarrierKind, k: usize, samples: usize, seed: u64) -> LawOutcome {
    let law = Law::ALL[k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind as u64) * 16 + k as u64);
    let mut outcome = LawOutcome {
        law,
        carrier: kind,
        passes: 0,
        failures: 0,
        counterexample: None,
    };
    for _ in 0..samples {
        match check_instance(c, law, &mut rng) {
            Ok(()) => outcome.passes += 1,
            Err(ce) => {
                outcome.failures += 1;
                outcome.counterexample.get_or_insert(ce);
            }
        }
    }
    outcome
}

fn spawn_carrier<'s, 'e: 's, C: Carrier + Sync>(
    scope: &'s std::thread::Scope<'s, 'e>,
    c: &'e C,
    kind: CarrierKind,
    samples: usize,
    seed: u64,
) -> Vec<std::thread::ScopedJoinHandle<'s, LawOutcome>> {
    (0..Law::ALL.len())
        .map(|k| scope.spawn(move || run_law(c, kind, k, samples, seed)))
        .collect()
}

/// Checks the convex-algebra laws on `samples` random instances per law and
/// carrier, using `dist_combine` for the distribution carrier. Each
/// (carrier, law) stream has its own RNG stream and runs on its own thread.
pub fn axioms_report_with(samples: usize, seed: u64, dist_combine: DistCombine<'_>) -> AxiomsReport {
    let dist = DistCarrier(dist_combine);
    let outcomes = std::thread::scope(|scope| {
        let mut handles = spawn_carrier(scope, &dist, CarrierKind::Dist, samples, seed);
        handles.extend(spawn_carrier(scope, &PolytopeCarrier, CarrierKind::Polytope, samples, seed));
        handles.extend(spawn_carrier(scope, &LiftedCarrier, CarrierKind::Lifted, samples, seed));
        handles.extend(spawn_carrier(scope, &FamCarrier, CarrierKind::LabeledFam, samples, seed));
        handles
            .into_iter()
            .map(|h| h.join().expect("law checker panicked"))
            .collect()
    });
    AxiomsReport {
        samples,
        seed,
        outcomes,
    }
}

pub fn axioms_report(samples: usize, seed: u64) -> AxiomsReport {
    let combine = |cs: &[Rational], ds: &[Dist]| convex_combine(cs, ds).expect("convex coefficients");
    axioms_report_with(samples, seed, &combine)
}
