mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use pabisim_core::model::{convex_combine, parse_pa, serialize_pa};
use pabisim_core::{Dist, Rational, StateId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn extreme() -> impl Strategy<Value = i64> {
    prop_oneof![-20i64..20, any::<i64>(), Just(i64::MAX), Just(i64::MIN + 1)]
}

fn nonzero() -> impl Strategy<Value = i64> {
    extreme().prop_filter("nonzero", |d| *d != 0)
}

fn dist_strategy() -> impl Strategy<Value = Dist> {
    proptest::collection::btree_map(0usize..6, 1i64..12, 1..5).prop_map(|m| {
        let total: i64 = m.values().sum();
        Dist::new(
            m.into_iter()
                .map(|(s, w)| (StateId::new(&format!("s{s}")).unwrap(), Rational::new(w, total))),
        )
        .unwrap()
    })
}

fn coefficients(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(0i64..6, n).prop_filter_map("positive total", |w| {
        let total: i64 = w.iter().sum();
        (total > 0).then(|| w.into_iter().map(|x| Rational::new(x, total)).collect())
    })
}

proptest! {
    #[test]
    fn arithmetic_matches_bigrational(a in extreme(), b in nonzero(), c in extreme(), d in nonzero()) {
        let (x, y) = (Rational::new(a, b), Rational::new(c, d));
        let (bx, by) = (big(a, b), big(c, d));
        prop_assert_eq!((&x + &y).to_string(), (&bx + &by).to_string());
        prop_assert_eq!((&x - &y).to_string(), (&bx - &by).to_string());
        prop_assert_eq!((&x * &y).to_string(), (&bx * &by).to_string());
        if c != 0 {
            prop_assert_eq!((&x / &y).to_string(), (&bx / &by).to_string());
        }
        prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
    }

    #[test]
    fn combine_weights_sum_to_one(ds in proptest::collection::vec(dist_strategy(), 3), cs in coefficients(3)) {
        let out = convex_combine(&cs, &ds).unwrap();
        prop_assert!(out.iter().map(|(_, w)| w.clone()).sum::<Rational>().is_one());
        prop_assert!(out.iter().all(|(_, w)| w.is_positive()));
    }

    #[test]
    fn nary_combine_is_iterated_binary(ds in proptest::collection::vec(dist_strategy(), 4), cs in coefficients(4)) {
        let whole = convex_combine(&cs, &ds).unwrap();
        let mut acc: Option<(Rational, Dist)> = None;
        for (c, d) in cs.iter().zip(&ds) {
            if c.is_zero() {
                continue;
            }
            acc = Some(match acc {
                None => (c.clone(), d.clone()),
                Some((m, prev)) => {
                    let total = &m + c;
                    let p = &m / &total;
                    (total, convex_combine(&[p.clone(), p.complement()], &[prev, d.clone()]).unwrap())
                }
            });
        }
        prop_assert_eq!(whole, acc.unwrap().1);
    }

    #[test]
    fn dist_literal_round_trip(d in dist_strategy()) {
        prop_assert_eq!(Dist::parse_literal(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn pa_text_round_trip(seed in any::<u64>(), n in 1usize..7) {
        let pa = common::random_pa(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let text = serialize_pa(&pa);
        let back = parse_pa(&text).unwrap();
        prop_assert_eq!(serialize_pa(&back), text);
        prop_assert_eq!(back, pa);
    }
}

#[test]
fn combine_rejects_bad_coefficients() {
    let ds = [common::d("x"), common::d("y")];
    assert!(convex_combine(&[common::r(1, 2), common::r(1, 3)], &ds).is_err());
    assert!(convex_combine(&[common::r(3, 2), common::r(-1, 2)], &ds).is_err());
    assert!(convex_combine(&[common::r(1, 1)], &ds).is_err());
}
