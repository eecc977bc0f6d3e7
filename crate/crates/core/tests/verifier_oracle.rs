mod common;

use bvmetric::gallery::{halving_space, naturals_space, random_table, reciprocal_space, union_space, unit_sequence_space};
use bvmetric::verifier::{min_s, min_s_report, tuple_count, verify_polygon, Verdict, VerifyOptions};
use bvmetric::{parse_scalar, scale_space, BigRational, FiniteSpace, PointId, Rational};
use common::{brute_first_violation, brute_min_s, r};
use proptest::prelude::*;

#[test]
fn naturals_prefix_is_b2_1000() {
    let nat = naturals_space::<Rational>(30).unwrap();
    let prefix: Vec<PointId> = (0..15).map(PointId).collect();
    let space = nat.space.subspace(&prefix).unwrap();
    let res = verify_polygon(&space, 2, &r(1000, 1)).unwrap();
    assert_eq!(res.verdict, Verdict::Certified);
    assert_eq!(res.tuples_checked, tuple_count(15, 2));
    assert_eq!(res.tuples_checked, 105 * 13 * 12);
}

#[test]
fn gallery_min_s_matches_brute_force() {
    // exhaustive ratio maximization, frozen from an independent exact enumeration
    let cases: Vec<(FiniteSpace<Rational>, usize, Rational)> = vec![
        (union_space(12).unwrap().space, 3, r(5, 1)),
        (reciprocal_space(10).unwrap().space, 3, r(2, 1)),
        (unit_sequence_space(25).unwrap().space, 2, r(65611, 7593)),
        (naturals_space(40).unwrap().space, 2, r(800, 101)),
        (halving_space(4).unwrap().space, 2, r(1, 1)),
    ];
    for (space, v, expected) in cases {
        assert_eq!(min_s(&space, v).unwrap(), expected, "{:?}", space.labels());
    }
    let recip = reciprocal_space::<Rational>(10).unwrap().space;
    assert_eq!(brute_min_s(&recip, 3), r(2, 1));
    let union = union_space::<Rational>(12).unwrap().space;
    assert_eq!(brute_min_s(&union, 3), r(5, 1));
}

#[test]
fn union_argmax_chain() {
    let space = union_space::<Rational>(12).unwrap().space;
    let rep = min_s_report(&space, 3, &VerifyOptions::default()).unwrap();
    let (x, y, chain) = rep.argmax.unwrap();
    let labels: Vec<&str> = std::iter::once(x).chain(chain).chain([y]).map(|p| space.label(p)).collect();
    assert_eq!(labels, ["1/2", "1/3", "1/6", "1/9", "1/12"]);
    let res = verify_polygon(&space, 3, &r(2, 1)).unwrap();
    assert_eq!(res.verdict, Verdict::Refuted);
    let w = res.witness.unwrap();
    assert!(w.lhs > w.rhs);
}

#[test]
fn big_rational_route_agrees() {
    let small = unit_sequence_space::<Rational>(25).unwrap().space;
    let big = unit_sequence_space::<BigRational>(25).unwrap().space;
    let a = min_s(&small, 2).unwrap();
    let b = min_s(&big, 2).unwrap();
    assert_eq!(a.to_string(), b.to_string());
}

#[test]
fn scaled_reciprocal_entry() {
    let space = reciprocal_space::<Rational>(10).unwrap().space;
    let half = scale_space(&space, &r(1, 2)).unwrap();
    let (a, b) = (half.find("1/2").unwrap(), half.find("1/3").unwrap());
    assert_eq!(*half.d(a, b), r(1, 4));
}

#[test]
fn witness_is_thread_count_independent() {
    let space = random_table::<Rational>(9, 77).unwrap();
    let s = min_s(&space, 2).unwrap() * r(9, 10);
    let s = if s < r(1, 1) { r(1, 1) } else { s };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| verify_polygon(&space, 2, &s).unwrap())
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(run(threads), one);
    }
}

fn table_strategy() -> impl Strategy<Value = FiniteSpace<Rational>> {
    (2usize..7)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(1i128..=60, n * (n - 1) / 2)))
        .prop_map(|(n, vals)| {
            let mut it = vals.into_iter();
            let mut table = vec![vec![r(0, 1); n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let d = r(it.next().unwrap(), 6);
                    table[i][j] = d;
                    table[j][i] = d;
                }
            }
            FiniteSpace::new((0..n).map(|i| format!("p{i}")).collect(), table).unwrap()
        })
}

proptest! {
    #[test]
    fn verifier_matches_brute_force(space in table_strategy(), v in 1usize..4, s_num in 6i128..40) {
        let s = r(s_num, 6);
        let res = verify_polygon(&space, v, &s).unwrap();
        let n = space.len();
        if n < v + 2 {
            prop_assert_eq!(res.verdict, Verdict::Vacuous);
        } else {
            let brute = brute_first_violation(&space, v, s);
            match (&res.witness, brute) {
                (None, None) => {
                    prop_assert_eq!(res.verdict, Verdict::Certified);
                    prop_assert_eq!(res.tuples_checked, tuple_count(n, v));
                }
                (Some(w), Some((x, y, tuple))) => {
                    prop_assert_eq!(w.endpoints, (PointId(x), PointId(y)));
                    prop_assert_eq!(w.chain.iter().map(|p| p.0).collect::<Vec<_>>(), tuple);
                    prop_assert!(w.lhs > w.rhs);
                }
                (a, b) => prop_assert!(false, "verifier {:?} vs brute {:?}", a, b),
            }
        }
    }

    #[test]
    fn min_s_matches_brute_force_and_is_tight(space in table_strategy(), v in 1usize..4) {
        let m = min_s(&space, v).unwrap();
        prop_assert_eq!(m, brute_min_s(&space, v));
        prop_assert!(verify_polygon(&space, v, &m).unwrap().verdict.holds());
        if m > r(1, 1) {
            let below = m - m / r(1000, 1);
            prop_assert_eq!(verify_polygon(&space, v, &below).unwrap().verdict, Verdict::Refuted);
        }
    }

    #[test]
    fn min_s_is_scale_free(space in table_strategy(), v in 1usize..3, c_num in 1i128..20, c_den in 1i128..20) {
        let c = r(c_num, c_den);
        let scaled = scale_space(&space, &c).unwrap();
        prop_assert_eq!(min_s(&scaled, v).unwrap(), min_s(&space, v).unwrap());
        prop_assert_eq!(scale_space(&scaled, &(r(1, 1) / c)).unwrap(), space);
    }

    #[test]
    fn certification_is_monotone_in_s(space in table_strategy(), v in 1usize..3, a in 6i128..30, b in 0i128..30) {
        let s = r(a, 6);
        let larger = s + r(b, 6);
        if verify_polygon(&space, v, &s).unwrap().verdict.holds() {
            prop_assert!(verify_polygon(&space, v, &larger).unwrap().verdict.holds());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rational_order_agrees_with_cross_multiplication(
        a in -1000i128..1000, b in 1i128..1000, c in -1000i128..1000, d in 1i128..1000,
    ) {
        let x: Rational = parse_scalar(&format!("{a}/{b}")).unwrap();
        let y: Rational = parse_scalar(&format!("{c}/{d}")).unwrap();
        prop_assert_eq!(x.cmp(&y), (a * d).cmp(&(c * b)));
        prop_assert_eq!(parse_scalar::<Rational>(&x.to_string()).unwrap(), x);
        prop_assert_eq!((x + y) * r(b * d, 1), r(a * d + c * b, 1));
    }
}

#[test]
fn rational_prints_reduced() {
    assert_eq!(parse_scalar::<Rational>("3/2").unwrap().to_string(), "3/2");
    assert_eq!(parse_scalar::<Rational>("10/4").unwrap().to_string(), "5/2");
    assert_eq!(parse_scalar::<Rational>("8/4").unwrap().to_string(), "2");
}
