use super::{LpError, LpOutcome, LpProblem, LpSolver, Rational};
use num_traits::{One, Signed, Zero};

/// Dense two-phase simplex over big rationals with Bland's rule.
///
/// Verdicts are exact. Infeasibility comes with the support of the phase-one
/// dual, which is a Farkas certificate over the returned rows.
#[derive(Debug, Clone, Copy)]
pub struct ExactSimplex {
    /// Refuse problems whose tableau would exceed this many cells.
    pub max_cells: usize,
}

impl Default for ExactSimplex {
    fn default() -> Self {
        Self {
            max_cells: 4_000_000,
        }
    }
}

impl LpSolver for ExactSimplex {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError> {
        self.run(problem, true)
    }

    fn report_infeasible(&self, problem: &LpProblem) -> Result<Option<Vec<usize>>, LpError> {
        Ok(match self.run(problem, false)? {
            LpOutcome::Optimal(_) => None,
            LpOutcome::Infeasible { conflict } => Some(conflict),
        })
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum Shape {
    /// `x = shift + y`
    Lower { col: usize, shift: i64 },
    /// `x = shift - y`
    Upper { col: usize, shift: i64 },
    /// `x = y+ - y-`
    Free { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; the last entry is minus the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut().filter(|v| !v.is_zero()) {
                *v /= &p;
            }
        }
        let nonzero: Vec<usize> = (0..self.width())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<Rational>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nonzero {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for row in self.rows.iter_mut().filter(|row| !row.is_empty()) {
            eliminate(row);
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs Bland's rule over columns `< allowed`. Returns false when
    /// unbounded.
    fn optimise(&mut self, allowed: usize) -> bool {
        let rhs = self.width() - 1;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio
                            || (ratio == *best_ratio && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

impl ExactSimplex {
    fn run(&self, problem: &LpProblem, optimise: bool) -> Result<LpOutcome, LpError> {
        let (shapes, ncols) = shapes(problem);

        // Rows in column space: (coefficients, rhs, original row index).
        let mut rows: Vec<(Vec<(usize, i128)>, i128, Option<usize>)> = Vec::new();
        for (index, row) in problem.rows.iter().enumerate() {
            let mut rhs = i128::from(row.rhs);
            let mut coeffs = Vec::new();
            for &(v, a) in &row.terms {
                let a = i128::from(a);
                match shapes[v] {
                    Shape::Lower { col, shift } => {
                        rhs -= a * i128::from(shift);
                        coeffs.push((col, a));
                    }
                    Shape::Upper { col, shift } => {
                        rhs -= a * i128::from(shift);
                        coeffs.push((col, -a));
                    }
                    Shape::Free { pos, neg } => {
                        coeffs.push((pos, a));
                        coeffs.push((neg, -a));
                    }
                }
            }
            rows.push((coeffs, rhs, Some(index)));
        }
        for (v, &(lo, hi)) in problem.bounds.iter().enumerate() {
            if let (Some(lo), Some(hi), Shape::Lower { col, .. }) = (lo, hi, shapes[v]) {
                rows.push((vec![(col, -1)], i128::from(lo) - i128::from(hi), None));
            }
        }

        let m = rows.len();
        let width = ncols + 2 * m + 1;
        if m.saturating_mul(width) > self.max_cells {
            return Err(LpError::Numerical(format!(
                "exact tableau of {m} rows and {width} columns exceeds the configured size"
            )));
        }
        let surplus = |i: usize| ncols + i;
        let artificial = |i: usize| ncols + m + i;
        let rhs_col = width - 1;

        let mut tableau = Tableau {
            rows: Vec::with_capacity(m),
            obj: vec![Rational::zero(); width],
            basis: (0..m).map(artificial).collect(),
        };
        for (i, (coeffs, rhs, _)) in rows.iter().enumerate() {
            let sign: i128 = if *rhs < 0 { -1 } else { 1 };
            let mut row = vec![Rational::zero(); width];
            for &(col, a) in coeffs {
                row[col] += Rational::from_integer((sign * a).into());
            }
            row[surplus(i)] = Rational::from_integer((-sign).into());
            row[artificial(i)] = Rational::one();
            row[rhs_col] = Rational::from_integer((sign * rhs).into());
            tableau.rows.push(row);
        }
        // Phase one: minimise the sum of artificials.
        for j in 0..width {
            if (ncols + m..ncols + 2 * m).contains(&j) {
                continue;
            }
            let total = tableau
                .rows
                .iter()
                .fold(Rational::zero(), |acc, row| acc + &row[j]);
            tableau.obj[j] = -total;
        }
        tableau.optimise(ncols + 2 * m);

        if tableau.obj[rhs_col].is_negative() {
            // Dual of row i is 1 minus the reduced cost of its artificial.
            let mut conflict: Vec<usize> = (0..m)
                .filter(|&i| !(Rational::one() - &tableau.obj[artificial(i)]).is_zero())
                .filter_map(|i| rows[i].2)
                .collect();
            conflict.sort_unstable();
            conflict.dedup();
            return Ok(LpOutcome::Infeasible { conflict });
        }
        if !optimise {
            return Ok(LpOutcome::Optimal(Vec::new()));
        }

        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tableau.basis[r] >= ncols + m {
                if let Some(c) = (0..ncols + m).find(|&j| !tableau.rows[r][j].is_zero()) {
                    tableau.pivot(r, c);
                }
            }
        }

        // Phase two with the real costs.
        let mut costs = vec![Rational::zero(); width];
        for (v, &c) in problem.costs.iter().enumerate() {
            let c = Rational::from_integer(c.into());
            match shapes[v] {
                Shape::Lower { col, .. } => costs[col] = c,
                Shape::Upper { col, .. } => costs[col] = -c,
                Shape::Free { pos, neg } => {
                    costs[neg] = -c.clone();
                    costs[pos] = c;
                }
            }
        }
        for j in 0..width {
            let basic = tableau
                .rows
                .iter()
                .zip(&tableau.basis)
                .filter(|(row, &b)| !costs[b].is_zero() && !row[j].is_zero())
                .fold(Rational::zero(), |acc, (row, &b)| acc + &costs[b] * &row[j]);
            tableau.obj[j] = if j == rhs_col {
                -basic
            } else {
                &costs[j] - basic
            };
        }
        if !tableau.optimise(ncols + m) {
            return Err(LpError::Unbounded);
        }

        let mut column_values = vec![Rational::zero(); ncols];
        for (row, &b) in tableau.rows.iter().zip(&tableau.basis) {
            if b < ncols {
                column_values[b] = row[rhs_col].clone();
            }
        }
        let point = shapes
            .iter()
            .map(|shape| match *shape {
                Shape::Lower { col, shift } => {
                    Rational::from_integer(shift.into()) + &column_values[col]
                }
                Shape::Upper { col, shift } => {
                    Rational::from_integer(shift.into()) - &column_values[col]
                }
                Shape::Free { pos, neg } => &column_values[pos] - &column_values[neg],
            })
            .collect();
        Ok(LpOutcome::Optimal(point))
    }
}

fn shapes(problem: &LpProblem) -> (Vec<Shape>, usize) {
    let mut next = 0;
    let mut take = || {
        next += 1;
        next - 1
    };
    let shapes = problem
        .bounds
        .iter()
        .map(|&(lo, hi)| match (lo, hi) {
            (Some(lo), _) => Shape::Lower {
                col: take(),
                shift: lo,
            },
            (None, Some(hi)) => Shape::Upper {
                col: take(),
                shift: hi,
            },
            (None, None) => Shape::Free {
                pos: take(),
                neg: take(),
            },
        })
        .collect();
    (shapes, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn small_optimum() {
        // min x + y  s.t.  x + 2y >= 3, 3x + y >= 4, x, y >= 0
        let mut p = LpProblem::default();
        let x = p.add_var(1, Some(0), None);
        let y = p.add_var(1, Some(0), None);
        p.add_row(vec![(x, 1), (y, 2)], 3);
        p.add_row(vec![(x, 3), (y, 1)], 4);
        let LpOutcome::Optimal(point) = ExactSimplex::default().solve(&p).unwrap() else {
            panic!("expected optimum");
        };
        assert_eq!(point, vec![q(1, 1), q(1, 1)]);
        assert!(p.is_satisfied(&point));
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // min y - x over x <= 5, y free, y >= x - 7, y >= -x
        let mut p = LpProblem::default();
        let x = p.add_var(-1, None, Some(5));
        let y = p.add_var(1, None, None);
        p.add_row(vec![(y, 1), (x, -1)], -7);
        p.add_row(vec![(y, 1), (x, 1)], 0);
        let LpOutcome::Optimal(point) = ExactSimplex::default().solve(&p).unwrap() else {
            panic!("expected optimum");
        };
        // every x in [3.5, 5] is optimal
        assert!(p.is_satisfied(&point));
        assert_eq!(p.objective(&point), q(-7, 1));
    }

    #[test]
    fn box_bounds_hold() {
        let mut p = LpProblem::default();
        let x = p.add_var(-1, Some(-3), Some(4));
        let y = p.add_var(1, Some(-3), Some(4));
        p.add_row(vec![(x, 1), (y, -1)], 1);
        let LpOutcome::Optimal(point) = ExactSimplex::default().solve(&p).unwrap() else {
            panic!("expected optimum");
        };
        assert_eq!(point, vec![q(4, 1), q(-3, 1)]);
    }

    #[test]
    fn contradiction_reports_both_rows() {
        let mut p = LpProblem::default();
        let a = p.add_var(0, None, None);
        let b = p.add_var(0, None, None);
        let c = p.add_var(0, None, None);
        p.add_row(vec![(c, 1)], 1);
        p.add_row(vec![(a, 1), (b, -1)], 1);
        p.add_row(vec![(b, 1), (a, -1)], 1);
        let solver = ExactSimplex::default();
        assert_eq!(
            solver.solve(&p).unwrap(),
            LpOutcome::Infeasible {
                conflict: vec![1, 2]
            }
        );
        assert_eq!(solver.report_infeasible(&p).unwrap(), Some(vec![1, 2]));
    }

    #[test]
    fn unbounded_is_an_error() {
        let mut p = LpProblem::default();
        let x = p.add_var(-1, Some(0), None);
        p.add_row(vec![(x, 1)], 1);
        assert_eq!(ExactSimplex::default().solve(&p), Err(LpError::Unbounded));
    }

    #[test]
    fn refuses_oversized_tableau() {
        let mut p = LpProblem::default();
        let x = p.add_var(0, None, None);
        for _ in 0..10 {
            p.add_row(vec![(x, 1)], 0);
        }
        let solver = ExactSimplex { max_cells: 10 };
        assert!(matches!(solver.solve(&p), Err(LpError::Numerical(_))));
    }
}
