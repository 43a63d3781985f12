use cantor_doubling::min_uniform_constant;
use cantor_doubling::rational::ratio;
use cantor_doubling::Rational;
use num::One;
use proptest::prelude::*;

fn window(p: &[Rational], start: usize, len: usize) -> Rational {
    p[start..start + len].iter().sum()
}

/// Every admissible pair of windows, in any order.
fn window_pairs(p: &[Rational], s: usize) -> Vec<(Rational, Rational)> {
    let n = p.len();
    let mut out = Vec::new();
    for l in s..=n {
        for a in 0..=n - l {
            for b in 0..=n - l {
                if a.abs_diff(b) <= l {
                    out.push((window(p, a, l), window(p, b, l)));
                }
            }
        }
    }
    out
}

fn is_uniform(p: &[Rational], c: &Rational, s: usize) -> bool {
    window_pairs(p, s).iter().all(|(a, b)| a <= &(c * b))
}

/// Smallest candidate constant for which the predicate holds.
fn naive_min(p: &[Rational], s: usize) -> Rational {
    let mut candidates: Vec<Rational> =
        window_pairs(p, s).into_iter().map(|(a, b)| a / b).collect();
    candidates.push(Rational::one());
    candidates.sort();
    candidates
        .into_iter()
        .find(|c| c >= &Rational::one() && is_uniform(p, c, s))
        .expect("the largest ratio always works")
}

fn vector(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(1i64..=9, 1..=max_len).prop_map(|w| {
        let total: i64 = w.iter().sum();
        w.into_iter().map(|x| ratio(x, total)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_predicate_oracle(p in vector(8), s in 1usize..=3) {
        let report = min_uniform_constant(&p, s);
        prop_assert_eq!(&report.min_c, &naive_min(&p, s));
        prop_assert!(is_uniform(&p, &report.min_c, s));
        if let Some((i, j, l)) = report.windows {
            prop_assert!(l >= s && i <= j && j <= i + l && j + l <= p.len());
            let (a, b) = (window(&p, i, l), window(&p, j, l));
            let r = if a >= b { a / b } else { b / a };
            prop_assert_eq!(r, report.min_c);
        } else {
            prop_assert!(s > p.len());
        }
    }

    #[test]
    fn larger_floor_never_increases(p in vector(8), s in 1usize..=7) {
        prop_assert!(min_uniform_constant(&p, s + 1).min_c <= min_uniform_constant(&p, s).min_c);
    }

    #[test]
    fn concatenation_inherits_windows(p in vector(4), q in vector(4), s in 1usize..=2) {
        let joined: Vec<Rational> = p.iter().chain(q.iter()).cloned().collect();
        let whole = min_uniform_constant(&joined, s).min_c;
        prop_assert!(whole >= min_uniform_constant(&p, s).min_c);
        prop_assert!(whole >= min_uniform_constant(&q, s).min_c);
    }

    #[test]
    fn scale_invariant(p in vector(6), s in 1usize..=3, k in 2i64..=7) {
        let scaled: Vec<Rational> = p.iter().map(|x| x * ratio(k, 1)).collect();
        prop_assert_eq!(min_uniform_constant(&scaled, s), min_uniform_constant(&p, s));
    }
}
