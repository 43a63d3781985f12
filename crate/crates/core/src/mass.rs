//! Exact lower/upper bounds on `μ` of intervals and balls at a truncation
//! depth.
//!
//! A level-`K` component entirely inside the query counts toward both bounds,
//! one that merely meets it counts toward the upper bound only. Both sums are
//! computed as differences of prefix masses, each found by a single descent.

use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::CantorConfig;
use crate::geometry::{Interval, Lattice};
use crate::measure::{Automaton, MeasureSpec};
use crate::rational::{serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureBounds {
    #[serde(with = "serde_str")]
    pub lower: Rational,
    #[serde(with = "serde_str")]
    pub upper: Rational,
    pub depth: usize,
}

impl MeasureBounds {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }
}

/// Which level-`K` components a prefix mass collects, relative to a point `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    HiLe,
    HiLt,
    LoLt,
    LoLe,
}

impl Side {
    fn holds(self, lo: &BigInt, hi: &BigInt, x: &BigInt) -> bool {
        match self {
            Side::HiLe => hi <= x,
            Side::HiLt => hi < x,
            Side::LoLt => lo < x,
            Side::LoLe => lo <= x,
        }
    }
}

struct LevelTable {
    /// `L_j`, the common denominator of all entries used at this level.
    denom: BigInt,
    /// Per state: `cum[i] = L_j * (p_1 + ... + p_i)`.
    cum: Vec<Vec<BigInt>>,
    children: Vec<Vec<usize>>,
}

/// `μ` discretised on the level-`depth` lattice, with masses scaled to
/// integers over [`MassModel::mass_scale`].
pub struct MassModel {
    lattice: Lattice,
    levels: Vec<LevelTable>,
    scale: BigInt,
}

impl MassModel {
    pub fn new(spec: &MeasureSpec, config: &CantorConfig, depth: usize) -> Self {
        assert!(depth >= 1, "truncation depth must be at least 1");
        let lattice = Lattice::new(config, depth);
        let automaton = Automaton::new(spec, config, depth);
        let mut levels = Vec::with_capacity(depth);
        let mut scale = BigInt::one();
        for j in 0..depth {
            let nodes = automaton.level(j);
            let denom = nodes
                .iter()
                .flat_map(|node| node.vector.entries())
                .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
            let cum = nodes
                .iter()
                .map(|node| {
                    let mut acc = BigInt::zero();
                    let mut out = vec![acc.clone()];
                    for p in node.vector.entries() {
                        acc += p.numer() * (&denom / p.denom());
                        out.push(acc.clone());
                    }
                    out
                })
                .collect();
            let children = nodes.iter().map(|node| node.children.clone()).collect();
            scale *= &denom;
            levels.push(LevelTable {
                denom,
                cum,
                children,
            });
        }
        MassModel {
            lattice,
            levels,
            scale,
        }
    }

    pub fn depth(&self) -> usize {
        self.lattice.depth()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Total mass as an integer; all integer masses are over this scale.
    pub fn mass_scale(&self) -> &BigInt {
        &self.scale
    }

    /// Mass of the level-`K` components lying on the `side` of `x`.
    fn prefix_mass(&self, x: &BigInt, side: Side) -> BigInt {
        let depth = self.depth();
        let lat = &self.lattice;
        let d_k = lat.delta(depth);
        let full = |lo: &BigInt, j: usize| {
            let hi = lo + lat.delta(j);
            side.holds(&(&hi - d_k), &hi, x)
        };
        let none = |lo: &BigInt| !side.holds(lo, &(lo + d_k), x);

        let mut lo = BigInt::zero();
        if full(&lo, 0) {
            return self.scale.clone();
        }
        if none(&lo) {
            return BigInt::zero();
        }
        let mut acc = BigInt::zero();
        let mut mass = self.scale.clone();
        let mut state = 0usize;
        for j in 0..depth {
            let table = &self.levels[j];
            let n = lat.n(j + 1);
            let step = lat.step(j + 1);
            let q = (x - &lo)
                .div_floor(step)
                .clamp(BigInt::zero(), BigInt::from(n - 1));
            let qi = usize::try_from(&q).expect("child index fits");
            let child_lo = &lo + step * &q;
            let unit = &mass / &table.denom;
            let cum = &table.cum[state];
            acc += &unit * &cum[qi];
            let child_mass = &unit * (&cum[qi + 1] - &cum[qi]);
            if full(&child_lo, j + 1) {
                return acc + child_mass;
            }
            if none(&child_lo) {
                return acc;
            }
            lo = child_lo;
            mass = child_mass;
            state = table.children[state][qi];
        }
        unreachable!("a level-K component is either counted or not")
    }

    /// Integer bounds on `μ([a, b])` for lattice points `a`, `b`.
    pub fn bounds(&self, a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
        let inside = self.prefix_mass(b, Side::HiLe) - self.prefix_mass(a, Side::LoLt);
        let lower = if inside.is_negative() {
            BigInt::zero()
        } else {
            inside
        };
        let upper = self.prefix_mass(b, Side::LoLe) - self.prefix_mass(a, Side::HiLt);
        (lower, upper)
    }

    /// Integer bounds on `μ(B(x, r))`, `B` closed, for lattice `x`, `r`.
    pub fn ball_bounds(&self, x: &BigInt, r: &BigInt) -> (BigInt, BigInt) {
        self.bounds(&(x - r), &(x + r))
    }

    fn to_bounds(&self, (lower, upper): (BigInt, BigInt)) -> MeasureBounds {
        MeasureBounds {
            lower: Rational::new(lower, self.scale.clone()),
            upper: Rational::new(upper, self.scale.clone()),
            depth: self.depth(),
        }
    }

    pub fn interval(&self, interval: &Interval) -> MeasureBounds {
        let a = self.lattice.ceil(&interval.lo);
        let b = self.lattice.floor(&interval.hi);
        self.to_bounds(self.bounds(&a, &b))
    }

    pub fn ball(&self, x: &Rational, r: &Rational) -> MeasureBounds {
        assert!(r.is_positive(), "ball radius must be positive");
        self.interval(&Interval::new(x - r, x + r))
    }
}

/// Bounds on `μ(I)` at truncation depth `depth`.
pub fn interval_measure(
    spec: &MeasureSpec,
    config: &CantorConfig,
    interval: &Interval,
    depth: usize,
) -> MeasureBounds {
    MassModel::new(spec, config, depth).interval(interval)
}

/// Bounds on `μ(B(x, r))` for the closed ball `[x - r, x + r]`.
pub fn ball_measure(
    spec: &MeasureSpec,
    config: &CantorConfig,
    x: &Rational,
    r: &Rational,
    depth: usize,
) -> MeasureBounds {
    MassModel::new(spec, config, depth).ball(x, r)
}
