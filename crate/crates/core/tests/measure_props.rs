mod common;

use cantor_doubling::measure::max_component_measure;
use cantor_doubling::rational::ratio;
use cantor_doubling::{
    component_interval, doubling_series, CantorConfig, Interval, MassModel, MatchingSequence,
    MeasureSpec, OracleOptions, Rational, Word,
};
use num::{One, Signed, Zero};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Rational> {
    (0i64..=60, 1i64..=60).prop_map(|(a, b)| ratio(a.min(b), b))
}

fn setup() -> impl Strategy<Value = (CantorConfig, MatchingSequence, usize)> {
    (common::config_and_matching(), 1usize..=4).prop_map(|((c, s), k)| (c, s, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn component_measure_is_additive((cfg, seq) in common::config_and_matching()) {
        let spec = MeasureSpec::matching(seq);
        for k in 0..=4 {
            for w in Word::all(&cfg, k) {
                let parent = spec.component_measure(&cfg, &w).unwrap();
                let children: Rational = (1..=cfg.n(k + 1))
                    .map(|i| spec.component_measure(&cfg, &w.child(i)).unwrap())
                    .sum();
                prop_assert_eq!(parent, children);
            }
        }
    }

    #[test]
    fn components_are_resolved_exactly((cfg, seq, depth) in setup()) {
        let spec = MeasureSpec::matching(seq);
        let model = MassModel::new(&spec, &cfg, depth);
        for k in 0..=depth {
            for w in Word::all(&cfg, k) {
                let b = model.interval(&component_interval(&cfg, &w).unwrap());
                prop_assert!(b.is_exact());
                prop_assert_eq!(b.lower, spec.component_measure(&cfg, &w).unwrap());
            }
        }
    }

    #[test]
    fn bracket_width_is_two_components((cfg, seq, depth) in setup(), a in point(), b in point()) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let spec = MeasureSpec::matching(seq);
        let bounds = MassModel::new(&spec, &cfg, depth).interval(&Interval::new(a, b));
        prop_assert!(bounds.lower <= bounds.upper);
        prop_assert!(bounds.lower >= Rational::zero() && bounds.upper <= Rational::one());
        let cap = max_component_measure(&spec, &cfg, depth) * Rational::from_integer(2.into());
        prop_assert!(bounds.width() <= cap);
    }

    #[test]
    fn balls_are_monotone_in_radius((cfg, seq, depth) in setup(), x in point(), r1 in point(), r2 in point()) {
        prop_assume!(r1.is_positive() && r2.is_positive());
        let (r1, r2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let model = MassModel::new(&MeasureSpec::matching(seq), &cfg, depth);
        let small = model.ball(&x, &r1);
        let big = model.ball(&x, &r2);
        prop_assert!(small.lower <= big.lower);
        prop_assert!(small.upper <= big.upper);
    }

    #[test]
    fn brackets_refine_with_depth((cfg, seq, depth) in setup(), a in point(), b in point()) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let spec = MeasureSpec::matching(seq);
        let i = Interval::new(a, b);
        let coarse = MassModel::new(&spec, &cfg, depth).interval(&i);
        let fine = MassModel::new(&spec, &cfg, depth + 1).interval(&i);
        prop_assert!(coarse.lower <= fine.lower);
        prop_assert!(fine.upper <= coarse.upper);
    }

    #[test]
    fn upper_bound_is_subadditive((cfg, seq, depth) in setup(), a in point(), b in point(), c in point()) {
        let mut v = [a, b, c];
        v.sort();
        let [a, b, c] = v;
        let model = MassModel::new(&MeasureSpec::matching(seq), &cfg, depth);
        let whole = model.interval(&Interval::new(a.clone(), c.clone()));
        let left = model.interval(&Interval::new(a, b.clone()));
        let right = model.interval(&Interval::new(b, c));
        prop_assert!(whole.upper <= left.upper + right.upper);
        prop_assert!(whole.lower >= left.lower);
        prop_assert!(whole.lower >= right.lower);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sup_series_is_non_decreasing((cfg, seq) in common::config_and_matching()) {
        let opts = OracleOptions { eval_depth: 6, ..OracleOptions::default() };
        let report = doubling_series(&MeasureSpec::matching(seq), &cfg, &[1, 2, 3, 4], &opts).unwrap();
        for w in report.series.windows(2) {
            prop_assert!(w[0].sup_ratio <= w[1].sup_ratio);
        }
        prop_assert!(report.sup_ratio_lower >= Rational::one());
    }
}
