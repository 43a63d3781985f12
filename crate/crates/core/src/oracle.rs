//! Brute-force lower bounds on `sup μ(B(x, 2r)) / μ(B(x, r))` over balls
//! centred at component endpoints.
//!
//! For each level `j` the centres are the level-`j` endpoints and the radii
//! are distances to other level-`j` endpoints, together with their doubles
//! and halves. When a level has too many endpoint pairs for the budget, each
//! centre keeps only its nearest neighbours. The family for depth `K` is the
//! union over `j <= K`, so it only grows with `K`.

use std::collections::BTreeSet;

use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::CantorConfig;
use crate::geometry::Lattice;
use crate::mass::{MassModel, MeasureBounds};
use crate::measure::MeasureSpec;
use crate::rational::{ratio, serde_str, serde_str_vec, Rational};

/// Default number of endpoint pairs examined per level.
pub const DEFAULT_BALL_BUDGET: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("budget {budget} is below the {centers} centres at level {depth}; raise the budget or lower the depth")]
    BudgetTooSmall {
        budget: usize,
        centers: usize,
        depth: usize,
    },
    #[error("evaluation depth {eval_depth} is below the enumeration depth {depth}")]
    EvalTooShallow { eval_depth: usize, depth: usize },
    #[error("invalid schedule: {0}")]
    Schedule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub eval_depth: usize,
    pub budget: usize,
    #[serde(with = "serde_str")]
    pub gamma: Rational,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            eval_depth: 14,
            budget: DEFAULT_BALL_BUDGET,
            gamma: ratio(3, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterBalls {
    #[serde(with = "serde_str")]
    pub center: Rational,
    #[serde(with = "serde_str_vec")]
    pub radii: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallEnumeration {
    pub depth: usize,
    /// Sorted by centre, radii ascending.
    pub balls: Vec<CenterBalls>,
    pub truncated: bool,
}

impl BallEnumeration {
    pub fn centers(&self) -> Vec<Rational> {
        self.balls.iter().map(|b| b.center.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.balls.iter().map(|b| b.radii.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: &Rational, r: &Rational) -> bool {
        self.balls
            .iter()
            .any(|b| &b.center == x && b.radii.contains(r))
    }
}

/// Lattice balls `(x, r)` of one level, and whether the level was thinned.
pub(crate) fn level_balls(
    lattice: &Lattice,
    j: usize,
    budget: usize,
) -> (Vec<(BigInt, BigInt)>, bool) {
    let ends = lattice.endpoints(j);
    let count = ends.len();
    let full = count * (count - 1) <= budget;
    let reach = if full { count } else { (budget / count).max(1) };
    let one = lattice.scale();
    let mut out = Vec::new();
    for (i, x) in ends.iter().enumerate() {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(count - 1);
        let mut radii = BTreeSet::new();
        for (t, y) in ends.iter().enumerate().take(hi + 1).skip(lo) {
            if t == i {
                continue;
            }
            let d = if y > x { y - x } else { x - y };
            for r in [d.clone(), &d * 2, &d / 2] {
                if r.is_zero() {
                    continue;
                }
                radii.insert(if &r > one { one.clone() } else { r });
            }
        }
        out.extend(radii.into_iter().map(|r| (x.clone(), r)));
    }
    (out, !full)
}

fn check_budget(lattice: &Lattice, depth: usize, budget: usize) -> Result<(), OracleError> {
    let centers = lattice.endpoints(depth).len();
    if budget < centers {
        return Err(OracleError::BudgetTooSmall {
            budget,
            centers,
            depth,
        });
    }
    Ok(())
}

pub fn enumerate_balls(
    config: &CantorConfig,
    depth: usize,
    budget: usize,
) -> Result<BallEnumeration, OracleError> {
    assert!(depth >= 1, "enumeration depth must be at least 1");
    let lattice = Lattice::new(config, depth);
    check_budget(&lattice, depth, budget)?;
    let mut all = BTreeSet::new();
    let mut truncated = false;
    for j in 1..=depth {
        let (balls, thinned) = level_balls(&lattice, j, budget);
        truncated |= thinned;
        all.extend(balls);
    }
    let mut balls: Vec<CenterBalls> = Vec::new();
    for (x, r) in all {
        let x = lattice.to_rational(&x);
        let r = lattice.to_rational(&r);
        match balls.last_mut() {
            Some(last) if last.center == x => last.radii.push(r),
            _ => balls.push(CenterBalls {
                center: x,
                radii: vec![r],
            }),
        }
    }
    Ok(BallEnumeration {
        depth,
        balls,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    #[serde(with = "serde_str")]
    pub x: Rational,
    #[serde(with = "serde_str")]
    pub r: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub depth: usize,
    #[serde(with = "serde_str")]
    pub sup_ratio: Rational,
    pub witness: Option<Ball>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub depth: usize,
    pub eval_depth: usize,
    #[serde(with = "serde_str")]
    pub sup_ratio_lower: Rational,
    pub witness: Option<Ball>,
    /// Both witness balls resolved exactly (lower = upper).
    pub exact: bool,
    pub truncated: bool,
    pub series: Vec<SeriesPoint>,
}

/// Integer lower and upper bounds of a measure on lattice intervals, all over
/// one common scale.
pub(crate) trait BallMass {
    fn lattice(&self) -> &Lattice;
    fn lower(&self, a: &BigInt, b: &BigInt) -> BigInt;
    fn upper(&self, a: &BigInt, b: &BigInt) -> BigInt;
}

impl BallMass for MassModel {
    fn lattice(&self) -> &Lattice {
        MassModel::lattice(self)
    }

    fn lower(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.bounds(a, b).0
    }

    fn upper(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.bounds(a, b).1
    }
}

/// Running maximum over enumerated balls.
pub(crate) struct Scan<'a, M: BallMass> {
    model: &'a M,
    budget: usize,
    seen: BTreeSet<(BigInt, BigInt)>,
    /// `(numerator, denominator, x, r)` of the best ratio so far.
    best: Option<(BigInt, BigInt, BigInt, BigInt)>,
    pub truncated: bool,
}

impl<'a, M: BallMass> Scan<'a, M> {
    pub fn new(model: &'a M, budget: usize) -> Self {
        Scan {
            model,
            budget,
            seen: BTreeSet::new(),
            best: None,
            truncated: false,
        }
    }

    pub fn add_level(&mut self, j: usize) {
        let (balls, thinned) = level_balls(self.model.lattice(), j, self.budget);
        self.truncated |= thinned;
        for (x, r) in balls {
            if !self.seen.insert((x.clone(), r.clone())) {
                continue;
            }
            let two_r = &r * 2;
            let num = self.model.lower(&(&x - &two_r), &(&x + &two_r));
            let den = self.model.upper(&(&x - &r), &(&x + &r));
            let better = match &self.best {
                None => true,
                Some((bn, bd, bx, br)) => {
                    let lhs = &num * bd;
                    let rhs = bn * &den;
                    lhs > rhs || (lhs == rhs && (&x, &r) < (bx, br))
                }
            };
            if better {
                self.best = Some((num, den, x, r));
            }
        }
    }

    pub fn sup(&self) -> Rational {
        match &self.best {
            Some((n, d, _, _)) => Rational::new(n.clone(), d.clone()),
            None => Rational::zero(),
        }
    }

    pub fn witness(&self) -> Option<(BigInt, BigInt)> {
        self.best
            .as_ref()
            .map(|(_, _, x, r)| (x.clone(), r.clone()))
    }

    pub fn point(&self, depth: usize) -> SeriesPoint {
        let lattice = self.model.lattice();
        SeriesPoint {
            depth,
            sup_ratio: self.sup(),
            witness: self.witness().map(|(x, r)| Ball {
                x: lattice.to_rational(&x),
                r: lattice.to_rational(&r),
            }),
        }
    }
}

fn validate_schedule(schedule: &[usize], eval_depth: usize) -> Result<(), OracleError> {
    if schedule.is_empty() {
        return Err(OracleError::Schedule("empty".into()));
    }
    if schedule[0] == 0 {
        return Err(OracleError::Schedule("depths start at 1".into()));
    }
    if !schedule.windows(2).all(|w| w[0] < w[1]) {
        return Err(OracleError::Schedule(
            "depths must strictly increase".into(),
        ));
    }
    let last = *schedule.last().expect("non-empty");
    if eval_depth < last {
        return Err(OracleError::EvalTooShallow {
            eval_depth,
            depth: last,
        });
    }
    Ok(())
}

/// The sup-ratio series over a strictly increasing schedule of depths. The
/// report's witness and flags refer to the last depth.
pub fn doubling_series(
    spec: &MeasureSpec,
    config: &CantorConfig,
    schedule: &[usize],
    options: &OracleOptions,
) -> Result<OracleReport, OracleError> {
    validate_schedule(schedule, options.eval_depth)?;
    let model = MassModel::new(spec, config, options.eval_depth);
    let depth = *schedule.last().expect("non-empty");
    check_budget(model.lattice(), depth, options.budget)?;
    let mut scan = Scan::new(&model, options.budget);
    let mut series = Vec::new();
    let mut done = 0;
    for &k in schedule {
        for j in done + 1..=k {
            scan.add_level(j);
        }
        done = k;
        series.push(scan.point(k));
    }
    let lattice = model.lattice();
    let (witness, exact) = match scan.witness() {
        Some((x, r)) => {
            let big = model.ball_bounds(&x, &(&r * 2));
            let small = model.ball_bounds(&x, &r);
            let exact = big.0 == big.1 && small.0 == small.1;
            (
                Some(Ball {
                    x: lattice.to_rational(&x),
                    r: lattice.to_rational(&r),
                }),
                exact,
            )
        }
        None => (None, true),
    };
    Ok(OracleReport {
        depth,
        eval_depth: options.eval_depth,
        sup_ratio_lower: scan.sup(),
        witness,
        exact,
        truncated: scan.truncated,
        series,
    })
}

pub fn sup_doubling_ratio(
    spec: &MeasureSpec,
    config: &CantorConfig,
    depth: usize,
    options: &OracleOptions,
) -> Result<OracleReport, OracleError> {
    doubling_series(spec, config, &[depth], options)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRatio {
    pub big: MeasureBounds,
    pub small: MeasureBounds,
    /// `big.lower / small.upper`.
    #[serde(with = "serde_str")]
    pub ratio_lower: Rational,
}

/// Conservative ratio for one ball, as the oracle evaluates it.
pub fn ball_ratio(
    spec: &MeasureSpec,
    config: &CantorConfig,
    x: &Rational,
    r: &Rational,
    eval_depth: usize,
) -> BallRatio {
    let model = MassModel::new(spec, config, eval_depth);
    let big = model.ball(x, &(r * Rational::from_integer(2.into())));
    let small = model.ball(x, r);
    let ratio_lower = &big.lower / &small.upper;
    BallRatio {
        big,
        small,
        ratio_lower,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Growing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub label: Growth,
    #[serde(with = "serde_str")]
    pub gamma: Rational,
    pub report: OracleReport,
}

/// `Growing` when the last sup ratio is at least `γ` times the first and the
/// last three strictly increase.
pub fn classify_series(series: &[SeriesPoint], gamma: &Rational) -> Growth {
    let n = series.len();
    if n < 3 {
        return Growth::Bounded;
    }
    let first = &series[0].sup_ratio;
    let last = &series[n - 1].sup_ratio;
    let rising = series[n - 3].sup_ratio < series[n - 2].sup_ratio
        && series[n - 2].sup_ratio < series[n - 1].sup_ratio;
    if rising && last >= &(gamma * first) {
        Growth::Growing
    } else {
        Growth::Bounded
    }
}

pub fn growth_classification(
    spec: &MeasureSpec,
    config: &CantorConfig,
    schedule: &[usize],
    options: &OracleOptions,
) -> Result<GrowthReport, OracleError> {
    if schedule.len() < 3 {
        return Err(OracleError::Schedule(
            "classification needs at least three depths".into(),
        ));
    }
    let report = doubling_series(spec, config, schedule, options)?;
    Ok(GrowthReport {
        label: classify_series(&report.series, &options.gamma),
        gamma: options.gamma.clone(),
        report,
    })
}
