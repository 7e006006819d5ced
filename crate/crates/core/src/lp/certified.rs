use super::{snap, ExactSimplex, LpError, LpOutcome, LpProblem, LpSolver, Rational};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Floating-point simplex whose answers are checked exactly.
///
/// Rows and bounds are tightened slightly before the float solve, so the
/// rounded point usually lands strictly inside the original feasible set.
/// The candidate is then rationalised and verified in exact arithmetic.
/// Anything that does not verify, including every infeasibility verdict, is
/// settled by the exact simplex.
#[derive(Debug, Clone, Copy)]
pub struct CertifiedFloat {
    pub exact: ExactSimplex,
    /// Relative tightening applied to rows and bounds.
    pub tighten: f64,
}

impl Default for CertifiedFloat {
    fn default() -> Self {
        Self {
            exact: ExactSimplex::default(),
            tighten: 1e-6,
        }
    }
}

impl LpSolver for CertifiedFloat {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError> {
        if let Some(point) = self.float_candidate(problem) {
            return Ok(LpOutcome::Optimal(point));
        }
        self.exact.solve(problem)
    }

    fn report_infeasible(&self, problem: &LpProblem) -> Result<Option<Vec<usize>>, LpError> {
        if self.float_candidate(problem).is_some() {
            return Ok(None);
        }
        self.exact.report_infeasible(problem)
    }
}

impl CertifiedFloat {
    fn float_candidate(&self, problem: &LpProblem) -> Option<Vec<Rational>> {
        let values = catch_unwind(AssertUnwindSafe(|| self.float_solve(problem))).ok()??;
        let clamped: Vec<f64> = values
            .iter()
            .zip(&problem.bounds)
            .map(|(&x, &(lo, hi))| {
                let x = lo.map_or(x, |lo| x.max(lo as f64));
                hi.map_or(x, |hi| x.min(hi as f64))
            })
            .collect();

        let snapped: Option<Vec<Rational>> = clamped
            .iter()
            .map(|&x| snap(x, 1000, 1e-5 * x.abs().max(1.0)))
            .collect();
        if let Some(point) = snapped {
            if problem.is_satisfied(&point) {
                return Some(point);
            }
        }
        let dyadic: Option<Vec<Rational>> =
            clamped.iter().map(|&x| Rational::from_float(x)).collect();
        dyadic.filter(|point| problem.is_satisfied(point))
    }

    fn float_solve(&self, problem: &LpProblem) -> Option<Vec<f64>> {
        let t = self.tighten;
        let widen = |v: i64| t * (v as f64).abs().max(1.0);
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = problem
            .costs
            .iter()
            .zip(&problem.bounds)
            .map(|(&c, &(lo, hi))| {
                let mut lo_f = lo.map_or(f64::NEG_INFINITY, |lo| lo as f64 + widen(lo));
                let mut hi_f = hi.map_or(f64::INFINITY, |hi| hi as f64 - widen(hi));
                if lo_f > hi_f {
                    lo_f = lo.map_or(f64::NEG_INFINITY, |lo| lo as f64);
                    hi_f = hi.map_or(f64::INFINITY, |hi| hi as f64);
                }
                lp.add_var(c as f64, (lo_f, hi_f))
            })
            .collect();
        for row in &problem.rows {
            let expr: Vec<_> = row
                .terms
                .iter()
                .map(|&(v, a)| (vars[v], a as f64))
                .collect();
            lp.add_constraint(expr, ComparisonOp::Ge, row.rhs as f64 + widen(row.rhs));
        }
        let solution = lp.solve().ok()?;
        Some(vars.iter().map(|&v| *solution.var_value(v)).collect())
    }
}
