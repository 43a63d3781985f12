//! Extensions of ultimately 1-uniform measures to doubling measures on
//! `[0, 1]`.
//!
//! When `Σ n_k c_k < ∞` the set has positive length, and the measure is
//! extended by a piecewise constant density: `μ(I) / L(E ∩ I)` on each
//! component `I` of level `k_0 - 1` and 1 on every coarser gap.

use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::CantorConfig;
use crate::geometry::{component_interval, gap_interval, Interval, Lattice, Word};
use crate::measure::{MeasureError, MeasureSpec};
use crate::oracle::{classify_series, BallMass, Growth, OracleError, Scan, SeriesPoint};
use crate::rational::{ceil_scaled, floor_scaled, serde_str, Rational};
use crate::sequence::TailRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpReason {
    /// Terms are eventually periodic and positive.
    PeriodicTerms,
    /// Terms decay geometrically.
    GeometricDecay,
    /// Terms are comparable to `k^(-exponent)`.
    PowerDecay { exponent: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpVerdict {
    #[serde(with = "serde_str")]
    pub q: Rational,
    pub member: bool,
    pub reason: LpReason,
}

/// Whether `{n_k c_k}` lies in `ℓ^q`. Only the tail rule of `c` matters,
/// since `n_k` is bounded and at least 2.
pub fn lp_membership(config: &CantorConfig, q: &Rational) -> LpVerdict {
    assert!(q >= &Rational::one(), "exponent must be at least 1");
    let (member, reason) = match config.c_spec().tail() {
        TailRule::Constant { .. } | TailRule::Periodic { .. } => (false, LpReason::PeriodicTerms),
        TailRule::Geometric { .. } => (true, LpReason::GeometricDecay),
        TailRule::Power { exponent, .. } => (
            q * Rational::from_integer(BigInt::from(*exponent)) > Rational::one(),
            LpReason::PowerDecay {
                exponent: *exponent,
            },
        ),
    };
    LpVerdict {
        q: q.clone(),
        member,
        reason,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("the extension theorem needs an ultimately 1-uniform measure; this one is not")]
    NotUltimatelyUniform,
    #[error("no doubling extension exists: {{n_k c_k}} is not summable")]
    NotInL1 { lp: LpVerdict },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    Component { word: Word },
    Gap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub interval: Interval,
    #[serde(with = "serde_str")]
    pub density_lo: Rational,
    #[serde(with = "serde_str")]
    pub density_hi: Rational,
    #[serde(flatten)]
    pub kind: PieceKind,
}

/// `ν` as constant densities on a partition of `[0, 1]`, left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseMeasure {
    pub k0: usize,
    #[serde(with = "serde_str")]
    pub tolerance: Rational,
    pub pieces: Vec<Piece>,
    /// Bracket on `Π_{i >= k0} (1 - (n_i - 1) c_i)`.
    #[serde(with = "serde_str")]
    pub tail_lo: Rational,
    #[serde(with = "serde_str")]
    pub tail_hi: Rational,
}

impl PiecewiseMeasure {
    /// Bracket on `ν([0, 1])`.
    pub fn total_mass(&self) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for p in &self.pieces {
            let len = p.interval.length();
            lo += &p.density_lo * &len;
            hi += &p.density_hi * &len;
        }
        (lo, hi)
    }

    /// Bracket on `ν(E)`, which equals `μ(E) = 1`.
    pub fn restricted_total(&self, config: &CantorConfig) -> (Rational, Rational) {
        let delta = config.level_stats(self.k0 - 1).delta;
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for p in &self.pieces {
            if let PieceKind::Component { .. } = p.kind {
                lo += &p.density_lo * &delta * &self.tail_lo;
                hi += &p.density_hi * &delta * &self.tail_hi;
            }
        }
        (lo, hi)
    }

    pub fn max_density(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.density_hi.clone())
            .max()
            .expect("at least one piece")
    }

    pub fn min_density(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.density_lo.clone())
            .min()
            .expect("at least one piece")
    }

    /// Bracket on `ν(E ∩ I_w)` given a bracket on `Π_{i > |w|} (1 - (n_i - 1) c_i)`.
    pub fn restricted_component(
        &self,
        config: &CantorConfig,
        w: &Word,
        tail: &(Rational, Rational),
    ) -> (Rational, Rational) {
        let delta = config.level_stats(w.len()).delta;
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for p in &self.pieces {
            let PieceKind::Component { word } = &p.kind else {
                continue;
            };
            if w.len() >= word.len() && word.is_prefix_of(w) {
                return (
                    &p.density_lo * &delta * &tail.0,
                    &p.density_hi * &delta * &tail.1,
                );
            }
            if w.is_prefix_of(word) {
                lo += &p.density_lo;
                hi += &p.density_hi;
            }
        }
        let piece_delta = config.level_stats(self.k0 - 1).delta;
        (
            lo * &piece_delta * &self.tail_lo,
            hi * &piece_delta * &self.tail_hi,
        )
    }
}

fn ultimately_uniform(spec: &MeasureSpec) -> Result<usize, ExtensionError> {
    spec.ultimately_one_uniform_index()
        .ok_or(ExtensionError::NotUltimatelyUniform)
}

/// Builds `ν` with `k_0` the first level from which all vectors are uniform.
pub fn build_extension(
    config: &CantorConfig,
    spec: &MeasureSpec,
    tolerance: &Rational,
) -> Result<PiecewiseMeasure, ExtensionError> {
    spec.validate(config)?;
    let k0 = ultimately_uniform(spec)?;
    let lp = lp_membership(config, &Rational::one());
    if !lp.member {
        return Err(ExtensionError::NotInL1 { lp });
    }
    let (tail_lo, tail_hi) = config
        .tail_product(k0, tolerance)
        .expect("summable tails have a positive product");
    let delta = config.level_stats(k0 - 1).delta;
    let mut pieces = Vec::new();
    for w in Word::all(config, k0 - 1) {
        let mass = spec.component_measure(config, &w)?;
        pieces.push(Piece {
            interval: component_interval(config, &w).expect("enumerated words are valid"),
            density_lo: &mass / (&delta * &tail_hi),
            density_hi: &mass / (&delta * &tail_lo),
            kind: PieceKind::Component { word: w },
        });
    }
    for level in 0..k0.saturating_sub(1) {
        for w in Word::all(config, level) {
            for i in 1..config.n(level + 1) {
                pieces.push(Piece {
                    interval: gap_interval(config, &w, i).expect("enumerated gaps are valid"),
                    density_lo: Rational::one(),
                    density_hi: Rational::one(),
                    kind: PieceKind::Gap,
                });
            }
        }
    }
    pieces.sort_by(|a, b| a.interval.lo.cmp(&b.interval.lo));
    Ok(PiecewiseMeasure {
        k0,
        tolerance: tolerance.clone(),
        pieces,
        tail_lo,
        tail_hi,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionEvidence {
    pub depth: usize,
    pub components_checked: usize,
    pub passed: bool,
    pub first_failure: Option<Word>,
}

/// Checks that the bracket on `ν(E ∩ I_w)` contains `μ(I_w)` for every `w`
/// with `|w| <= depth`.
pub fn check_restriction(
    config: &CantorConfig,
    spec: &MeasureSpec,
    nu: &PiecewiseMeasure,
    depth: usize,
) -> Result<RestrictionEvidence, ExtensionError> {
    let mut checked = 0;
    for level in 0..=depth {
        let tail = config
            .tail_product(level + 1, &nu.tolerance)
            .expect("summable tails have a positive product");
        for w in Word::all(config, level) {
            let mu = spec.component_measure(config, &w)?;
            let (lo, hi) = nu.restricted_component(config, &w, &tail);
            checked += 1;
            if mu < lo || mu > hi {
                return Ok(RestrictionEvidence {
                    depth,
                    components_checked: checked,
                    passed: false,
                    first_failure: Some(w),
                });
            }
        }
    }
    Ok(RestrictionEvidence {
        depth,
        components_checked: checked,
        passed: true,
        first_failure: None,
    })
}

/// `ν` on lattice intervals, with densities rounded outward to a dyadic grid.
struct PiecewiseModel {
    lattice: Lattice,
    starts: Vec<BigInt>,
    lo: Profile,
    hi: Profile,
}

/// Cumulative mass at each piece start and per-piece densities.
struct Profile {
    cum: Vec<BigInt>,
    density: Vec<BigInt>,
}

impl PiecewiseModel {
    const BITS: usize = 96;

    fn new(nu: &PiecewiseMeasure, lattice: Lattice) -> Self {
        let unit = BigInt::one() << Self::BITS;
        let starts: Vec<BigInt> = nu
            .pieces
            .iter()
            .map(|p| {
                lattice
                    .exact(&p.interval.lo)
                    .expect("piece ends lie on the lattice")
            })
            .collect();
        let ends: Vec<BigInt> = nu
            .pieces
            .iter()
            .map(|p| {
                lattice
                    .exact(&p.interval.hi)
                    .expect("piece ends lie on the lattice")
            })
            .collect();
        let profile = |density: Vec<BigInt>| {
            let mut cum = vec![BigInt::zero()];
            for (i, d) in density.iter().enumerate() {
                let next = cum.last().expect("non-empty") + d * (&ends[i] - &starts[i]);
                cum.push(next);
            }
            Profile { cum, density }
        };
        let lo = profile(
            nu.pieces
                .iter()
                .map(|p| floor_scaled(&p.density_lo, &unit))
                .collect(),
        );
        let hi = profile(
            nu.pieces
                .iter()
                .map(|p| ceil_scaled(&p.density_hi, &unit))
                .collect(),
        );
        PiecewiseModel {
            lattice,
            starts,
            lo,
            hi,
        }
    }

    fn cumulative(&self, profile: &Profile, x: &BigInt) -> BigInt {
        let one = self.lattice.scale();
        let x = x.clamp(&BigInt::zero(), one).clone();
        let idx = match self.starts.binary_search(&x) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        &profile.cum[idx] + &profile.density[idx] * (&x - &self.starts[idx])
    }

    fn density_bound(&self) -> Rational {
        let max = self.hi.density.iter().max().expect("pieces");
        let min = self.lo.density.iter().min().expect("pieces");
        Rational::new(max * 2, min.clone())
    }
}

impl BallMass for PiecewiseModel {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn lower(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.cumulative(&self.lo, b) - self.cumulative(&self.lo, a)
    }

    fn upper(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.cumulative(&self.hi, b) - self.cumulative(&self.hi, a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoublingEvidence {
    pub series: Vec<SeriesPoint>,
    pub label: Growth,
    #[serde(with = "serde_str")]
    pub sup_ratio: Rational,
    /// `2 · max density / min density`, after rounding densities outward.
    #[serde(with = "serde_str")]
    pub bound: Rational,
    pub within_bound: bool,
    pub truncated: bool,
}

/// Sup ratio of `ν` over the oracle's balls at each depth of `schedule`.
pub fn extension_doubling_evidence(
    config: &CantorConfig,
    nu: &PiecewiseMeasure,
    schedule: &[usize],
    budget: usize,
    gamma: &Rational,
) -> Result<DoublingEvidence, ExtensionError> {
    let last = *schedule
        .last()
        .ok_or_else(|| OracleError::Schedule("empty".into()))?;
    if schedule[0] == 0 || !schedule.windows(2).all(|w| w[0] < w[1]) {
        return Err(
            OracleError::Schedule("depths must be positive and strictly increase".into()).into(),
        );
    }
    let lattice = Lattice::new(config, last.max(nu.k0 - 1));
    let centers = lattice.endpoints(last).len();
    if budget < centers {
        return Err(OracleError::BudgetTooSmall {
            budget,
            centers,
            depth: last,
        }
        .into());
    }
    let model = PiecewiseModel::new(nu, lattice);
    let mut scan = Scan::new(&model, budget);
    let mut series = Vec::new();
    let mut done = 0;
    for &k in schedule {
        for j in done + 1..=k {
            scan.add_level(j);
        }
        done = k;
        series.push(scan.point(k));
    }
    let sup_ratio = scan.sup();
    let bound = model.density_bound();
    Ok(DoublingEvidence {
        label: classify_series(&series, gamma),
        within_bound: sup_ratio <= bound,
        sup_ratio,
        bound,
        series,
        truncated: scan.truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    #[serde(with = "serde_str")]
    pub tolerance: Rational,
    pub budget: usize,
    #[serde(with = "serde_str")]
    pub gamma: Rational,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            tolerance: Rational::new(BigInt::one(), BigInt::from(10u64).pow(12)),
            budget: crate::oracle::DEFAULT_BALL_BUDGET,
            gamma: crate::rational::ratio(3, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExtensionVerdict {
    Extendable {
        measure: PiecewiseMeasure,
        restriction: RestrictionEvidence,
        doubling: DoublingEvidence,
    },
    NotExtendable {
        lp: LpVerdict,
    },
}

impl ExtensionVerdict {
    pub fn is_extendable(&self) -> bool {
        matches!(self, ExtensionVerdict::Extendable { .. })
    }
}

/// Decides extendability from summability of `{n_k c_k}` and, when it
/// holds, builds `ν` and verifies it up to the largest depth of `schedule`.
pub fn check_theorem3(
    config: &CantorConfig,
    spec: &MeasureSpec,
    schedule: &[usize],
    options: &ExtensionOptions,
) -> Result<ExtensionVerdict, ExtensionError> {
    spec.validate(config)?;
    ultimately_uniform(spec)?;
    let lp = lp_membership(config, &Rational::one());
    if !lp.member {
        return Ok(ExtensionVerdict::NotExtendable { lp });
    }
    let nu = build_extension(config, spec, &options.tolerance)?;
    let depth = schedule.iter().copied().max().unwrap_or(0);
    let restriction = check_restriction(config, spec, &nu, depth)?;
    let doubling =
        extension_doubling_evidence(config, &nu, schedule, options.budget, &options.gamma)?;
    Ok(ExtensionVerdict::Extendable {
        measure: nu,
        restriction,
        doubling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{MatchingSequence, MatchingTail, ProbVector};
    use crate::rational::{integer, ratio};
    use crate::sequence::SequenceSpec;

    fn config(c: TailRule) -> CantorConfig {
        CantorConfig::new(
            SequenceSpec::constant(integer(2)),
            SequenceSpec::new(vec![], c).unwrap(),
        )
        .unwrap()
    }

    fn quarter() -> CantorConfig {
        config(TailRule::Geometric {
            coefficient: integer(1),
            ratio: ratio(1, 4),
        })
    }

    fn tol() -> Rational {
        ratio(1, 1_000_000_000)
    }

    #[test]
    fn lp_examples() {
        let fifth = config(TailRule::constant(ratio(1, 10)));
        assert!(!lp_membership(&fifth, &integer(1)).member);
        assert!(lp_membership(&quarter(), &integer(1)).member);
        let harmonic = config(TailRule::Power {
            coefficient: ratio(1, 2),
            exponent: 1,
        });
        assert!(!lp_membership(&harmonic, &integer(1)).member);
        assert!(lp_membership(&harmonic, &integer(2)).member);
    }

    #[test]
    fn uniform_gives_single_piece() {
        let nu = build_extension(&quarter(), &MeasureSpec::uniform(), &tol()).unwrap();
        assert_eq!(nu.k0, 1);
        assert_eq!(nu.pieces.len(), 1);
        assert_eq!(nu.pieces[0].interval, Interval::unit());
        let (lo, hi) = quarter().tail_product(1, &tol()).unwrap();
        assert_eq!(nu.pieces[0].density_lo, hi.recip());
        assert_eq!(nu.pieces[0].density_hi, lo.recip());
        let (a, b) = nu.restricted_total(&quarter());
        assert!(a <= integer(1) && integer(1) <= b);
        assert!(nu.total_mass().0 > integer(1));
    }

    #[test]
    fn skewed_first_level() {
        let seq = MatchingSequence {
            prefix: vec![ProbVector::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap()],
            tail: MatchingTail::Uniform,
        };
        let spec = MeasureSpec::matching(seq);
        let cfg = quarter();
        let nu = build_extension(&cfg, &spec, &tol()).unwrap();
        assert_eq!(nu.k0, 2);
        let kinds: Vec<bool> = nu.pieces.iter().map(|p| p.kind == PieceKind::Gap).collect();
        assert_eq!(kinds, vec![false, true, false]);
        assert_eq!(
            nu.pieces[1].interval,
            Interval::new(ratio(3, 8), ratio(5, 8))
        );
        assert_eq!(
            &nu.pieces[2].density_lo / &nu.pieces[0].density_lo,
            integer(2)
        );
        let r = check_restriction(&cfg, &spec, &nu, 8).unwrap();
        assert!(r.passed);
        assert_eq!(r.components_checked, 511);
    }

    #[test]
    fn dichotomy_examples() {
        let opts = ExtensionOptions::default();
        let uni = MeasureSpec::uniform();
        let v = check_theorem3(&CantorConfig::middle_thirds(), &uni, &[4, 6, 8], &opts).unwrap();
        assert!(!v.is_extendable());
        assert!(matches!(
            build_extension(&CantorConfig::middle_thirds(), &uni, &tol()),
            Err(ExtensionError::NotInL1 { .. })
        ));
        let v = check_theorem3(&quarter(), &uni, &[4, 6, 8], &opts).unwrap();
        let ExtensionVerdict::Extendable {
            restriction,
            doubling,
            ..
        } = v
        else {
            panic!()
        };
        assert!(restriction.passed);
        assert!(doubling.within_bound);
        assert_eq!(doubling.label, Growth::Bounded);
    }

    #[test]
    fn rejects_non_uniform_tails() {
        let skew = MeasureSpec::matching(MatchingSequence::constant(
            ProbVector::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap(),
        ));
        assert_eq!(
            check_theorem3(&quarter(), &skew, &[4], &ExtensionOptions::default()),
            Err(ExtensionError::NotUltimatelyUniform)
        );
    }
}
