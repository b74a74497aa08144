mod common;

use std::collections::BTreeMap;

use common::{d, fig1, lab, r, random_dist, random_partition, relation_of, sid, weights};
use pabisim_core::lifting::{
    block_masses, conv_member, conv_member_of, conv_reduce, convex_steps, lift_related, lift_related_partition,
    mix, Polytope,
};
use pabisim_core::{Dist, Rational, StateId};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A distribution with the same block masses as `xi`, redistributed inside
/// each block.
fn same_masses(rng: &mut ChaCha8Rng, xi: &Dist, blocks: &[Vec<StateId>]) -> Dist {
    let masses = block_masses(&pabisim_core::bisim::Partition::from_blocks(blocks.to_vec()), xi);
    let mut out: BTreeMap<StateId, Rational> = BTreeMap::new();
    for b in blocks {
        let Some(m) = masses.get(&b[0]) else { continue };
        let k = rng.gen_range(1..=b.len().min(3));
        for (s, w) in b.iter().take(k).zip(weights(rng, k)) {
            out.insert(s.clone(), m * &w);
        }
    }
    Dist::normalized(&out).unwrap()
}

#[test]
fn partition_lifting_matches_coupling_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let states: Vec<StateId> = (0..6).map(|i| sid(&format!("s{i}"))).collect();
    let mut related = 0;
    for _ in 0..200 {
        let k = rng.gen_range(1..=4);
        let part = random_partition(&mut rng, &states, k);
        let xi = random_dist(&mut rng, &states, 4);
        let zeta = if rng.gen_bool(0.5) {
            same_masses(&mut rng, &xi, part.blocks())
        } else {
            random_dist(&mut rng, &states, 4)
        };
        let rel = relation_of(&part);
        let by_blocks = lift_related_partition(&part, &xi, &zeta);
        let coupling = lift_related(&rel, &xi, &zeta);
        assert_eq!(by_blocks, coupling.is_some(), "{part} {xi} {zeta}");
        if let Some(nu) = coupling {
            related += 1;
            let mut left: BTreeMap<StateId, Rational> = BTreeMap::new();
            let mut right: BTreeMap<StateId, Rational> = BTreeMap::new();
            for ((s, t), w) in &nu {
                assert!(w.is_positive());
                assert!(rel.contains(&(s.clone(), t.clone())));
                *left.entry(s.clone()).or_insert_with(Rational::zero) += w;
                *right.entry(t.clone()).or_insert_with(Rational::zero) += w;
            }
            assert_eq!(&left, xi.weights());
            assert_eq!(&right, zeta.weights());
        }
    }
    assert!(related >= 80, "{related}");
}

#[test]
fn caption_transition_coefficients() {
    let pa = fig1();
    let hull = convex_steps(&pa, &sid("y0"), &lab("a")).unwrap();
    let lambda = conv_member(&d("y1:1/4,y2:1/4,y3:1/2"), &hull).unwrap();
    assert_eq!(lambda, vec![r(1, 2), r(1, 2)]);
    assert!(conv_member(&d("y1:1/2,y3:1/2"), &hull).is_none());
    assert!(convex_steps(&pa, &sid("y3"), &lab("a")).is_none());
}

#[test]
fn mixtures_are_members_and_reduction_keeps_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let states: Vec<StateId> = (0..4).map(|i| sid(&format!("s{i}"))).collect();
    for _ in 0..100 {
        let k = rng.gen_range(1..=5);
        let gens: Vec<Dist> = (0..k).map(|_| random_dist(&mut rng, &states, 4)).collect();
        let lambda = weights(&mut rng, k);
        let point = mix(&gens, &lambda);
        let coef = conv_member_of(&point, &gens).expect("mixture is a member");
        assert!(coef.iter().all(|c| !c.is_negative()));
        assert_eq!(coef.iter().cloned().sum::<Rational>(), Rational::one());
        assert_eq!(mix(&gens, &coef), point);

        let poly = Polytope::new(gens.clone()).unwrap();
        let reduced = conv_reduce(&poly);
        assert!(reduced.len() <= poly.len());
        assert!(reduced.hull_eq(&poly));
        for g in reduced.generators() {
            let others: Vec<Dist> = reduced.generators().iter().filter(|h| *h != g).cloned().collect();
            assert!(others.is_empty() || conv_member_of(g, &others).is_none(), "{g} is not a vertex");
        }
    }
}
