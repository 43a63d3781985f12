#![allow(dead_code)]

use cantor_doubling::rational::{integer, ratio};
use cantor_doubling::{
    CantorConfig, MatchingSequence, MatchingTail, ProbVector, Rational, SequenceSpec, TailRule,
};
use proptest::prelude::*;

pub fn fraction() -> impl Strategy<Value = Rational> {
    (1i64..=9, 2i64..=12).prop_map(|(a, b)| ratio(a, a + b))
}

fn tail() -> impl Strategy<Value = TailRule> {
    prop_oneof![
        fraction().prop_map(TailRule::constant),
        prop::collection::vec(fraction(), 2..=3).prop_map(|values| TailRule::Periodic { values }),
        (fraction(), 2i64..=5).prop_map(|(coefficient, d)| TailRule::Geometric {
            coefficient,
            ratio: ratio(1, d),
        }),
        (fraction(), 1u32..=3).prop_map(|(coefficient, exponent)| TailRule::Power {
            coefficient,
            exponent,
        }),
    ]
}

/// Random valid configurations with branching at most 3.
pub fn config() -> impl Strategy<Value = CantorConfig> {
    (
        prop::collection::vec(2i64..=3, 0..=2),
        2i64..=3,
        prop::collection::vec(fraction(), 0..=2),
        tail(),
    )
        .prop_filter_map("valid configuration", |(np, nt, cp, ct)| {
            let n = SequenceSpec::new(
                np.into_iter().map(integer).collect(),
                TailRule::constant(integer(nt)),
            )
            .ok()?;
            let c = SequenceSpec::new(cp, ct).ok()?;
            CantorConfig::new(n, c).ok()
        })
}

/// Random probability vectors of length `n` with small denominators.
pub fn prob_vector(n: usize) -> impl Strategy<Value = ProbVector> {
    prop::collection::vec(1i64..=5, n).prop_map(|w| {
        let total: i64 = w.iter().sum();
        ProbVector::new(w.into_iter().map(|x| ratio(x, total)).collect()).unwrap()
    })
}

/// A matching sequence for `config` with a random prefix and a constant or
/// uniform tail, provided `n` is constant along the way.
pub fn matching_for(config: &CantorConfig) -> BoxedStrategy<MatchingSequence> {
    let n_tail = config.n(config.n_spec().tail_start()) as usize;
    let prefix_len = config.n_spec().tail_start() - 1;
    let ns: Vec<usize> = (1..=prefix_len + 2).map(|k| config.n(k) as usize).collect();
    let prefix = ns.into_iter().map(prob_vector).collect::<Vec<_>>();
    (prefix, prob_vector(n_tail), any::<bool>())
        .prop_map(|(prefix, tail, uniform)| MatchingSequence {
            prefix,
            tail: if uniform {
                MatchingTail::Uniform
            } else {
                MatchingTail::Periodic {
                    vectors: vec![tail],
                }
            },
        })
        .boxed()
}

pub fn config_and_matching() -> impl Strategy<Value = (CantorConfig, MatchingSequence)> {
    config().prop_flat_map(|cfg| {
        let seq = matching_for(&cfg);
        (Just(cfg), seq)
    })
}

pub fn one() -> Rational {
    integer(1)
}
