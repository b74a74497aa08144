mod common;

use common::{d, fig1, random_dist, sid, weights};
use pabisim_core::bisim::convex_bisimilarity;
use pabisim_core::lifting::mix;
use pabisim_core::transformer::successors;
use pabisim_core::upto::{
    check_certificate, closure_member, refute_bounded, search_witness, Base, Certificate, SearchOutcome,
    Side, TechniqueConfig, Verdict,
};
use pabisim_core::{Dist, StateId};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_PAIRS: [(&str, &str); 4] = [("x2", "y2"), ("x3", "y3"), ("x1", "y1:1/2,y2:1/2"), ("x0", "y0")];

fn all_configs() -> Vec<TechniqueConfig> {
    [Base::Plain, Base::Cvx, Base::CvxE]
        .into_iter()
        .flat_map(|b| [false, true].map(|s| TechniqueConfig::new(b, s)))
        .collect()
}

/// `c1 ≤ c2` iff `c1`'s closure is contained in `c2`'s for every relation.
fn weaker(c1: TechniqueConfig, c2: TechniqueConfig) -> bool {
    c1.base <= c2.base && (!c1.identity_slack || c2.identity_slack)
}

#[test]
fn dirac_sweep_is_consistent() {
    let pa = fig1();
    let convex = convex_bisimilarity(&pa);
    let states: Vec<StateId> = pa.states().iter().cloned().collect();
    let (mut proven, mut refuted) = (0, 0);
    for s in &states {
        for t in &states {
            let (l, r) = (Dist::dirac(s.clone()), Dist::dirac(t.clone()));
            match search_witness(&pa, &l, &r, 32, 5, TechniqueConfig::default()).unwrap() {
                SearchOutcome::Proven(cert) => {
                    proven += 1;
                    assert!(check_certificate(&pa, &cert).unwrap().is_accepted());
                    for depth in 0..=10 {
                        assert!(!refute_bounded(&pa, &l, &r, depth).is_refuted(), "{s} {t}");
                    }
                }
                SearchOutcome::Refuted(trace) => {
                    refuted += 1;
                    assert!(trace.recheck(&pa, &l, &r), "{s} {t}: {trace}");
                    assert!(!convex.same_block(s, t), "{s} {t} are convex bisimilar");
                }
                SearchOutcome::Unknown => {}
            }
        }
    }
    assert_eq!(proven + refuted, 64);
    assert!(proven >= 14, "{proven}");
}

#[test]
fn convex_bisimilar_pairs_are_never_refuted() {
    let pa = common::uv_hull();
    for depth in 0..=6 {
        assert!(!refute_bounded(&pa, &d("u"), &d("v"), depth).is_refuted());
    }
    match search_witness(&pa, &d("u"), &d("v"), 8, 5, TechniqueConfig::default()).unwrap() {
        SearchOutcome::Proven(cert) => assert!(check_certificate(&pa, &cert).unwrap().is_accepted()),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn acceptance_is_monotone_in_technique() {
    let pa = fig1();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let pool: Vec<(Dist, Dist)> = GOLDEN_PAIRS
        .iter()
        .map(|(l, r)| (d(l), d(r)))
        .chain([
            (d("x1"), d("y1")),
            (d("x0:1/2,x2:1/2"), d("y0:1/2,y2:1/2")),
            (d("x2"), d("x2")),
            (d("x1:1/2,x2:1/2"), d("y1:1/4,y2:3/4")),
        ])
        .collect();
    for _ in 0..40 {
        let pairs: Vec<(Dist, Dist)> = pool.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        let verdicts: Vec<(TechniqueConfig, Verdict)> = all_configs()
            .into_iter()
            .map(|c| (c, check_certificate(&pa, &Certificate::new(pairs.clone(), c)).unwrap()))
            .collect();
        for (c1, v1) in &verdicts {
            for (c2, v2) in &verdicts {
                if weaker(*c1, *c2) && v1.is_accepted() {
                    assert!(v2.is_accepted(), "{pairs:?}: {c1:?} accepts, {c2:?} rejects");
                }
            }
        }
    }
}

#[test]
fn closure_is_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let states: Vec<StateId> = ["x0", "x1", "x2", "y0", "y1", "y2"].map(sid).to_vec();
    for _ in 0..60 {
        let rel: Vec<(Dist, Dist)> = (0..3)
            .map(|_| (random_dist(&mut rng, &states, 2), random_dist(&mut rng, &states, 2)))
            .collect();
        for config in all_configs().into_iter().filter(|c| c.base != Base::Plain) {
            let k = rng.gen_range(1..=3);
            let picks: Vec<&(Dist, Dist)> = (0..k).map(|_| &rel[rng.gen_range(0..rel.len())]).collect();
            let lambda = weights(&mut rng, k);
            let left = mix(&picks.iter().map(|p| p.0.clone()).collect::<Vec<_>>(), &lambda);
            let right = mix(&picks.iter().map(|p| p.1.clone()).collect::<Vec<_>>(), &lambda);
            let w = closure_member(&left, &right, &rel, config).expect("mixture of related pairs");
            let gens = pabisim_core::upto::generator_pairs(&rel, config.base);
            assert_eq!(w.rebuild(&gens), (left, right));
        }
    }
}

#[test]
fn rejections_name_real_moves() {
    let pa = fig1();
    let pairs: Vec<(Dist, Dist)> = GOLDEN_PAIRS.iter().skip(1).map(|(l, r)| (d(l), d(r))).collect();
    let cert = Certificate::new(pairs, TechniqueConfig::new(Base::Cvx, false));
    let v = check_certificate(&pa, &cert).unwrap();
    assert!(!v.obligations().is_empty());
    for ob in v.obligations() {
        let (l, r) = &cert.pairs[ob.pair_index];
        let spoiler = match ob.spoiler {
            Side::Left => l,
            Side::Right => r,
        };
        let moves = successors(&pa, spoiler, &ob.label).unwrap();
        let g = ob.generator.as_ref().expect("unmatched move");
        assert!(moves.as_set().unwrap().generators().contains(g), "{ob}");
    }
    assert!(v
        .obligations()
        .iter()
        .any(|ob| cert.pairs[ob.pair_index] == (d("x1"), d("y1:1/2,y2:1/2"))));
}
