//! Uniform Cantor sets `E(n, c)`: validation, level statistics and the gap
//! data `Λ`, `m_k`, `s_k`.
//!
//! Level 0 is `E_0 = [0, 1]`. At level `k` every component of level `k - 1`
//! is split into `n_k` closed children of length `δ_k` separated by `n_k - 1`
//! open gaps of length `ε_k = c_k δ_{k-1}`.

use num::{BigInt, BigUint, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{
    integer, round_down, round_up, serde_str, serde_str_opt, serde_uint, Rational,
};
use crate::sequence::{lcm_all, SequenceError, SequenceSpec, TailRule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("n_{index} = {value} is not an integer")]
    NotInteger { index: usize, value: Rational },
    #[error("n_{index} = {value} must be at least 2")]
    BranchingTooSmall { index: usize, value: Rational },
    #[error("n_{index} = {value} is too large")]
    BranchingTooLarge { index: usize, value: Rational },
    #[error("c_{index} = {value} must be positive")]
    NonPositiveGap { index: usize, value: Rational },
    #[error("(n_{index} - 1) c_{index} = {value} must be below 1")]
    GapsTooWide { index: usize, value: Rational },
}

/// Eventual behaviour of the pair `(n, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum TailRegime {
    /// `n_k` and `c_k` are periodic for `k >= start`.
    Periodic { start: usize, period: usize },
    /// `n_k` is periodic and `c_k -> 0` for `k >= start`.
    Decaying { start: usize, period: usize },
}

impl TailRegime {
    pub fn start(&self) -> usize {
        match *self {
            TailRegime::Periodic { start, .. } | TailRegime::Decaying { start, .. } => start,
        }
    }

    pub fn period(&self) -> usize {
        match *self {
            TailRegime::Periodic { period, .. } | TailRegime::Decaying { period, .. } => period,
        }
    }
}

/// Shape of the tail of `{n_k c_k}`, which decides its `ℓ^q` membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tail", rename_all = "snake_case")]
pub enum ProductTail {
    Constant,
    Periodic,
    Geometric,
    Power { exponent: u32 },
}

/// A validated uniform Cantor set configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct CantorConfig {
    n: SequenceSpec,
    c: SequenceSpec,
    n_prefix: Vec<u32>,
    n_cycle: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    n: SequenceSpec,
    c: SequenceSpec,
}

impl TryFrom<RawConfig> for CantorConfig {
    type Error = ConfigError;

    fn try_from(raw: RawConfig) -> Result<Self, ConfigError> {
        CantorConfig::new(raw.n, raw.c)
    }
}

impl From<CantorConfig> for RawConfig {
    fn from(config: CantorConfig) -> Self {
        RawConfig {
            n: config.n,
            c: config.c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub k: usize,
    /// `N_k`, the number of components of level `k`.
    #[serde(with = "serde_uint")]
    pub count: BigUint,
    #[serde(with = "serde_str")]
    pub delta: Rational,
    /// `ε_k`; absent at level 0.
    #[serde(with = "serde_str_opt")]
    pub epsilon: Option<Rational>,
}

/// `(m_k, s_k)` for a level `k ∈ Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapContext {
    pub k: usize,
    pub m: usize,
    pub s: usize,
}

fn n_to_u32(index: usize, value: &Rational) -> Result<u32, ConfigError> {
    if !value.is_integer() {
        return Err(ConfigError::NotInteger {
            index,
            value: value.clone(),
        });
    }
    if value < &integer(2) {
        return Err(ConfigError::BranchingTooSmall {
            index,
            value: value.clone(),
        });
    }
    value
        .to_integer()
        .to_u32()
        .ok_or_else(|| ConfigError::BranchingTooLarge {
            index,
            value: value.clone(),
        })
}

impl CantorConfig {
    pub fn new(n: SequenceSpec, c: SequenceSpec) -> Result<Self, ConfigError> {
        n.tail().validate()?;
        c.tail().validate()?;

        // A decaying n eventually drops below 2; report where.
        if n.tail().is_decaying() {
            let mut k = 1;
            loop {
                n_to_u32(k, &n.value(k))?;
                k += 1;
            }
        }

        let n_prefix = n
            .prefix()
            .iter()
            .enumerate()
            .map(|(i, v)| n_to_u32(i + 1, v))
            .collect::<Result<Vec<_>, _>>()?;
        let cycle_len = n.tail().period().unwrap_or(1);
        let n_cycle = (0..cycle_len)
            .map(|j| {
                let k = n.tail_start() + j;
                n_to_u32(k, &n.value(k))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let config = CantorConfig {
            n,
            c,
            n_prefix,
            n_cycle,
        };

        // Exhaustive over the window where the pair is not yet in its joint
        // tail, plus one joint period. Decaying c only gets smaller after
        // that, and n repeats.
        let start = config.n.tail_start().max(config.c.tail_start());
        let period = lcm_all([
            config.n.tail().period().unwrap_or(1),
            config.c.tail().period().unwrap_or(1),
        ]);
        for k in 1..start + period {
            let ck = config.c(k);
            if !ck.is_positive() {
                return Err(ConfigError::NonPositiveGap {
                    index: k,
                    value: ck,
                });
            }
            let spread = integer(config.n(k) as i64 - 1) * &ck;
            if spread >= Rational::one() {
                return Err(ConfigError::GapsTooWide {
                    index: k,
                    value: spread,
                });
            }
        }
        Ok(config)
    }

    /// `n_k ≡ n`, `c_k ≡ c`.
    pub fn constant(n: u32, c: Rational) -> Result<Self, ConfigError> {
        CantorConfig::new(
            SequenceSpec::constant(integer(n as i64)),
            SequenceSpec::constant(c),
        )
    }

    /// The middle-thirds Cantor set.
    pub fn middle_thirds() -> Self {
        CantorConfig::constant(2, crate::rational::ratio(1, 3)).expect("valid")
    }

    pub fn n_spec(&self) -> &SequenceSpec {
        &self.n
    }

    pub fn c_spec(&self) -> &SequenceSpec {
        &self.c
    }

    /// `n_k` for `k >= 1`.
    pub fn n(&self, k: usize) -> u32 {
        assert!(k >= 1, "levels of n start at 1");
        if k <= self.n_prefix.len() {
            self.n_prefix[k - 1]
        } else {
            self.n_cycle[(k - self.n_prefix.len() - 1) % self.n_cycle.len()]
        }
    }

    /// `c_k` for `k >= 1`.
    pub fn c(&self, k: usize) -> Rational {
        self.c.value(k)
    }

    /// `(1 - (n_k - 1) c_k) / n_k`, the ratio `δ_k / δ_{k-1}`.
    pub fn contraction(&self, k: usize) -> Rational {
        let n = integer(self.n(k) as i64);
        (Rational::one() - (&n - Rational::one()) * self.c(k)) / n
    }

    pub fn n_period(&self) -> usize {
        self.n_cycle.len()
    }

    pub fn n_max(&self) -> u32 {
        self.n_prefix
            .iter()
            .chain(self.n_cycle.iter())
            .copied()
            .max()
            .unwrap_or(2)
    }

    pub fn tail_regime(&self) -> TailRegime {
        let start = self.n.tail_start().max(self.c.tail_start());
        match self.c.tail().period() {
            Some(cp) => TailRegime::Periodic {
                start,
                period: lcm_all([self.n_period(), cp]),
            },
            None => TailRegime::Decaying {
                start,
                period: self.n_period(),
            },
        }
    }

    /// Diagnostic: `sup_{k∈Λ} m_k = ∞`. Holds exactly when `c_k -> 0`, since
    /// `n` is always bounded here.
    pub fn depth_unbounded(&self) -> bool {
        matches!(self.tail_regime(), TailRegime::Decaying { .. })
    }

    pub fn product_tail(&self) -> ProductTail {
        match self.c.tail() {
            TailRule::Constant { .. } if self.n_period() == 1 => ProductTail::Constant,
            TailRule::Constant { .. } | TailRule::Periodic { .. } => ProductTail::Periodic,
            TailRule::Geometric { .. } => ProductTail::Geometric,
            TailRule::Power { exponent, .. } => ProductTail::Power {
                exponent: *exponent,
            },
        }
    }

    /// Whether `Σ n_k c_k < ∞`.
    pub fn product_summable(&self) -> bool {
        match self.product_tail() {
            ProductTail::Constant | ProductTail::Periodic => false,
            ProductTail::Geometric => true,
            ProductTail::Power { exponent } => exponent > 1,
        }
    }

    pub fn level_stats(&self, k: usize) -> LevelStats {
        self.levels(k).pop().expect("non-empty")
    }

    /// Level statistics for levels `0..=upto`.
    pub fn levels(&self, upto: usize) -> Vec<LevelStats> {
        let mut out = Vec::with_capacity(upto + 1);
        out.push(LevelStats {
            k: 0,
            count: BigUint::one(),
            delta: Rational::one(),
            epsilon: None,
        });
        for k in 1..=upto {
            let prev = &out[k - 1];
            let stats = LevelStats {
                k,
                count: &prev.count * BigUint::from(self.n(k)),
                delta: &prev.delta * self.contraction(k),
                epsilon: Some(self.c(k) * &prev.delta),
            };
            out.push(stats);
        }
        out
    }

    /// `δ_j` for `j = 0..=upto`.
    pub fn deltas(&self, upto: usize) -> Vec<Rational> {
        let mut out = vec![Rational::one()];
        for k in 1..=upto {
            let next = &out[k - 1] * self.contraction(k);
            out.push(next);
        }
        out
    }

    /// Whether `k ∈ Λ`, i.e. `ε_k < δ_k`.
    pub fn in_lambda(&self, k: usize) -> bool {
        assert!(k >= 1);
        let n = integer(self.n(k) as i64);
        // ε_k < δ_k  <=>  c_k < (1 - (n_k - 1) c_k) / n_k
        let c = self.c(k);
        &c * &n < Rational::one() - (n - Rational::one()) * &c
    }

    /// `(m_k, s_k)` when `k ∈ Λ`.
    pub fn gap_context(&self, k: usize) -> Option<GapContext> {
        assert!(k >= 1, "gap levels start at 1");
        if !self.in_lambda(k) {
            return None;
        }
        let mut delta_prev = self.deltas(k - 1).pop().expect("non-empty");
        let eps_k = self.c(k) * &delta_prev;
        // Walk δ_k, δ_{k+1}, ... until it drops to ε_k.
        let mut j = k;
        let mut delta = &delta_prev * self.contraction(j);
        while delta > eps_k {
            delta_prev = delta;
            j += 1;
            delta = &delta_prev * self.contraction(j);
        }
        let m = j - k;
        debug_assert!(m >= 1);
        let eps_deep = self.c(j) * &delta_prev;
        let s = ((&eps_k + &eps_deep) / (&delta + &eps_deep))
            .floor()
            .to_integer()
            .to_usize()
            .expect("s_k fits in usize");
        Some(GapContext { k, m, s })
    }

    /// `δ_{k+m} <= ε_k < δ_{k+m-1}` for an arbitrary candidate `m >= 0`.
    pub fn depth_sandwich_holds(&self, k: usize, m: usize) -> bool {
        let deltas = self.deltas(k + m);
        let eps_k = self.c(k) * &deltas[k - 1];
        deltas[k + m] <= eps_k && eps_k < deltas[k + m - 1]
    }

    /// The `s`-sandwich for a candidate `(m, s)`:
    /// `s δ' + (s-1) ε' <= ε_k < (s+1) δ' + s ε'` with `δ' = δ_{k+m}`,
    /// `ε' = ε_{k+m}`.
    pub fn count_sandwich_holds(&self, k: usize, m: usize, s: i64) -> bool {
        let deltas = self.deltas(k + m);
        let eps_k = self.c(k) * &deltas[k - 1];
        let d = &deltas[k + m];
        let e = self.c(k + m) * &deltas[k + m - 1];
        let s_q = integer(s);
        let lhs = &s_q * d + (&s_q - Rational::one()) * &e;
        let rhs = (&s_q + Rational::one()) * d + &s_q * &e;
        lhs <= eps_k && eps_k < rhs
    }

    /// Bracket on `Π_{i >= from} (1 - (n_i - 1) c_i)` of width at most
    /// `tolerance`, or `None` when the product is zero (`Σ n_k c_k = ∞`).
    pub fn tail_product(&self, from: usize, tolerance: &Rational) -> Option<(Rational, Rational)> {
        assert!(tolerance.is_positive(), "tolerance must be positive");
        assert!(from >= 1);
        if !self.product_summable() {
            return None;
        }
        let tol_bits = tolerance.recip().ceil().to_integer().bits();
        let bits = 128.max(2 * tol_bits + 64);
        let start = self.n.tail_start().max(self.c.tail_start());

        let mut lo = Rational::one();
        let mut hi = Rational::one();
        // `last` is the last index already folded into [lo, hi].
        let mut last = from - 1;
        let mut next_check = 0;
        loop {
            if last + 1 >= start && last >= 1 && last >= next_check {
                if let Some((y_lo, y_hi)) = self.tail_log_bracket(last) {
                    let lower = round_down(&lo * exp_neg(&y_hi, bits, false), bits);
                    let upper = round_up(&hi * exp_neg(&y_lo, bits, true), bits);
                    if &upper - &lower <= *tolerance {
                        return Some((lower, upper));
                    }
                }
                next_check = last + last.max(1);
            }
            last += 1;
            let x = Rational::one() - integer(self.n(last) as i64 - 1) * self.c(last);
            lo = round_down(lo * &x, bits);
            hi = round_up(hi * &x, bits);
        }
    }

    /// Bracket on `-Σ_{i > k} log(1 - x_i)`, `x_i = (n_i - 1) c_i`, for `k`
    /// past both tail starts. Uses `x + x²/2 <= -log(1 - x) <= x + x²/2 + 2x³/3`
    /// for `x <= 1/2`, with the power sums split by the phase of `n`.
    /// `None` while some later `x_i` may exceed 1/2 or the sum exceeds 1.
    fn tail_log_bracket(&self, k: usize) -> Option<(Rational, Rational)> {
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let period = self.n_cycle.len();
        let mut sums: [(Rational, Rational); 3] = Default::default();
        for phase in 0..period {
            let i0 = k + 1 + phase;
            let a = integer(self.n(i0) as i64 - 1);
            for (d, sum) in sums.iter_mut().enumerate() {
                let (lo, hi) = self.class_power_sum(i0, period, &a, d as u32 + 1)?;
                sum.0 += lo;
                sum.1 += hi;
            }
        }
        let n_max = integer(self.n_max() as i64 - 1);
        if n_max * self.c(k + 1) > half || sums[0].1 > Rational::one() {
            return None;
        }
        let y_lo = &sums[0].0 + &sums[1].0 * &half;
        let y_hi = &sums[0].1 + &sums[1].1 * &half + &sums[2].1 * ratio_of(2, 3);
        Some((y_lo, y_hi))
    }

    /// Bracket on `Σ_{j >= 0} (a c_{i0 + p j})^d`.
    fn class_power_sum(
        &self,
        i0: usize,
        p: usize,
        a: &Rational,
        d: u32,
    ) -> Option<(Rational, Rational)> {
        let d = d as usize;
        match self.c.tail() {
            TailRule::Geometric { coefficient, ratio } => {
                let head = num::pow(a * coefficient, d) * num::pow(ratio.clone(), d * i0);
                let sum = head / (Rational::one() - num::pow(ratio.clone(), d * p));
                Some((sum.clone(), sum))
            }
            TailRule::Power {
                coefficient,
                exponent,
            } => {
                // g(j) = C (i0 + p j)^-m is convex and decreasing, so the sum
                // lies between the trapezoid and midpoint integrals.
                let m = d * *exponent as usize;
                if m < 2 {
                    return None;
                }
                let cst = num::pow(a * coefficient, d);
                let pq = integer(p as i64);
                let scale = &pq * integer(m as i64 - 1);
                let i0q = integer(i0 as i64);
                let mid = &i0q - &pq / integer(2);
                if !mid.is_positive() {
                    return None;
                }
                let lo = &cst / (num::pow(i0q.clone(), m - 1) * &scale)
                    + &cst / (num::pow(i0q, m) * integer(2));
                let hi = &cst / (num::pow(mid, m - 1) * &scale);
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Bracket on the Lebesgue measure of `E`; exactly `(0, 0)` when
    /// `Σ n_k c_k` diverges.
    pub fn lebesgue_of_e(&self, tolerance: &Rational) -> (Rational, Rational) {
        self.tail_product(1, tolerance)
            .unwrap_or_else(|| (Rational::zero(), Rational::zero()))
    }
}

fn ratio_of(a: i64, b: i64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

/// Bound on `exp(-y)` for `0 <= y <= 1` from a partial Taylor sum: an upper
/// bound when `upper`, else a lower bound.
fn exp_neg(y: &Rational, bits: u64, upper: bool) -> Rational {
    let y = if upper {
        round_down(y.clone(), bits)
    } else {
        round_up(y.clone(), bits)
    };
    let terms = if upper { 15 } else { 14 };
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for i in 0..terms {
        sum += &term;
        term = -term * &y / integer(i as i64 + 1);
    }
    sum
}
