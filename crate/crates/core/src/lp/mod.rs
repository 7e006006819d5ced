//! Linear programs with integer data and exact rational answers.
//!
//! Every problem is `minimize costs · x` subject to `row · x >= rhs` and
//! per-variable bounds. Solvers return points that satisfy every row and
//! bound exactly in rational arithmetic.

mod certified;
mod exact;

pub use certified::CertifiedFloat;
pub use exact::ExactSimplex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// `Σ coefficient · x[var] >= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRow {
    pub terms: Vec<(usize, i64)>,
    pub rhs: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpProblem {
    /// Minimisation costs, one per variable.
    pub costs: Vec<i64>,
    pub bounds: Vec<(Option<i64>, Option<i64>)>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn add_var(&mut self, cost: i64, lower: Option<i64>, upper: Option<i64>) -> usize {
        self.costs.push(cost);
        self.bounds.push((lower, upper));
        self.costs.len() - 1
    }

    pub fn add_row(&mut self, terms: Vec<(usize, i64)>, rhs: i64) -> usize {
        self.rows.push(LpRow { terms, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    /// Exact check of every row and bound at `point`.
    pub fn is_satisfied(&self, point: &[Rational]) -> bool {
        if point.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = self.bounds.iter().zip(point).all(|(&(lo, hi), x)| {
            lo.is_none_or(|lo| *x >= Rational::from_integer(lo.into()))
                && hi.is_none_or(|hi| *x <= Rational::from_integer(hi.into()))
        });
        bounds_ok && rows_hold(point, self.rows.iter().map(|r| (r.terms.as_slice(), r.rhs)))
    }

    pub fn objective(&self, point: &[Rational]) -> Rational {
        self.costs
            .iter()
            .zip(point)
            .filter(|(&c, _)| c != 0)
            .map(|(&c, x)| x * Rational::from_integer(c.into()))
            .fold(Rational::zero(), |acc, v| acc + v)
    }
}

/// A rational point rewritten over a common denominator so row checks are
/// integer sums.
struct ScaledPoint {
    denominator: BigInt,
    small: Option<(Vec<i128>, i128)>,
    numerators: Vec<BigInt>,
}

impl ScaledPoint {
    fn new(point: &[Rational]) -> Self {
        let denominator = point
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let numerators: Vec<BigInt> = point
            .iter()
            .map(|x| x.numer() * (&denominator / x.denom()))
            .collect();
        let small = denominator.to_i64().and_then(|d| {
            let nums: Option<Vec<i128>> = numerators
                .iter()
                .map(|n| n.to_i64().map(i128::from))
                .collect();
            nums.map(|nums| (nums, i128::from(d)))
        });
        Self {
            denominator,
            small,
            numerators,
        }
    }

    fn holds(&self, terms: &[(usize, i64)], rhs: i64) -> bool {
        match &self.small {
            Some((nums, d)) => {
                let lhs: i128 = terms.iter().map(|&(v, c)| i128::from(c) * nums[v]).sum();
                lhs >= i128::from(rhs) * d
            }
            None => {
                let lhs: BigInt = terms
                    .iter()
                    .map(|&(v, c)| &self.numerators[v] * BigInt::from(c))
                    .sum();
                lhs >= BigInt::from(rhs) * &self.denominator
            }
        }
    }
}

/// Exact check of `Σ c · point[v] >= rhs` for every given row.
pub fn rows_hold<'a>(
    point: &[Rational],
    mut rows: impl Iterator<Item = (&'a [(usize, i64)], i64)>,
) -> bool {
    let scaled = ScaledPoint::new(point);
    rows.all(|(terms, rhs)| scaled.holds(terms, rhs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Vec<Rational>),
    /// `conflict` indexes rows of a small infeasible subset (bounds are
    /// implicitly included).
    Infeasible {
        conflict: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("objective is unbounded")]
    Unbounded,
    #[error("solver failure: {0}")]
    Numerical(String),
}

/// A back end able to optimise a problem and to explain infeasibility.
pub trait LpSolver {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError>;

    /// Rows of an infeasible subset, or `None` when the problem is feasible.
    fn report_infeasible(&self, problem: &LpProblem) -> Result<Option<Vec<usize>>, LpError> {
        Ok(match self.solve(problem)? {
            LpOutcome::Optimal(_) => None,
            LpOutcome::Infeasible { conflict } => Some(conflict),
        })
    }
}

/// Approximates `x` by the simplest fraction with denominator at most
/// `max_denominator` lying within `tolerance`.
pub(crate) fn snap(x: f64, max_denominator: i64, tolerance: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let target = x.abs();
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = target;
    for _ in 0..40 {
        let a = rest.floor();
        if a > i64::MAX as f64 / 4.0 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_denominator {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - target).abs() <= tolerance {
            return Some(Rational::new((sign * h1).into(), k1.into()));
        }
        let frac = rest - a as f64;
        if frac < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}
