//! Compilation of a TCP-net into a linear system over factor-table entries,
//! and solving that system into a GA value function.

mod conditions;
mod layout;

pub use conditions::{
    cp_conditions, difference_terms, importance_conditions, LinearConstraint, Provenance,
};
pub use layout::{FactorLayout, LpVariable};

use crate::lp::{rows_hold, LpOutcome, LpProblem, LpSolver, Rational};
use crate::model::{check_acyclic, derive_families, TcpNet, VarId, Variable};
use crate::ranking::GaValueFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::HashSet;
use thiserror::Error;

/// Margin standing in for strict inequality.
pub const MARGIN: i64 = 1;
/// Box bound for the random-vertex policy.
pub const VERTEX_BOX: i64 = 1000;
/// Cost per unit of violation of a soft row.
pub const SOFT_PENALTY: i64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("net is not acyclic (cycle through {})", witness.join(" -> "))]
    NetNotAcyclic { witness: Vec<String> },
    #[error("net has ci-arcs; use the conditions over TCP-families")]
    HasCiArcs,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    /// `hints` indexes constraints of an infeasible subset.
    #[error("linear system is infeasible ({} conflicting constraints)", hints.len())]
    Infeasible { hints: Vec<usize> },
    #[error("solver failure: {0}")]
    SolverFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectivePolicy {
    /// Minimise the sum of absolute entry values.
    L1,
    /// Maximise a seeded random objective inside a box.
    RandomVertex { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemStatus {
    Unsolved,
    Feasible(Vec<Rational>),
    Infeasible { conflict: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub variables: Vec<Variable>,
    pub layout: FactorLayout,
    pub constraints: Vec<LinearConstraint>,
    pub status: SystemStatus,
}

fn require_acyclic(net: &TcpNet) -> Result<(), CompileError> {
    let report = check_acyclic(net);
    match report.witness_names(net) {
        Some(witness) => Err(CompileError::NetNotAcyclic { witness }),
        None => Ok(()),
    }
}

/// Factor scopes of the compiled value function, indexed by owner.
pub fn factor_scopes(net: &TcpNet) -> Result<Vec<Vec<VarId>>, CompileError> {
    require_acyclic(net)?;
    Ok(FactorLayout::tcp(net).scopes().to_vec())
}

pub fn gen_cp_conditions(net: &TcpNet) -> Vec<LinearConstraint> {
    cp_conditions(net, &FactorLayout::tcp(net), MARGIN, false)
}

/// Importance conditions for nets whose importance is all i-arcs.
pub fn gen_i_conditions(net: &TcpNet) -> Result<Vec<LinearConstraint>, CompileError> {
    if net.has_ci_arcs() {
        return Err(CompileError::HasCiArcs);
    }
    Ok(gen_ci_conditions(net))
}

/// Importance conditions over TCP-families, covering i-arcs and CIT rows.
pub fn gen_ci_conditions(net: &TcpNet) -> Vec<LinearConstraint> {
    importance_conditions(net, &FactorLayout::tcp(net), MARGIN, false)
}

pub fn compile(net: &TcpNet) -> Result<LinearSystem, CompileError> {
    require_acyclic(net)?;
    let layout = FactorLayout::tcp(net);
    let mut constraints = cp_conditions(net, &layout, MARGIN, false);
    if net.has_importance() {
        constraints.extend(importance_conditions(net, &layout, MARGIN, false));
    }
    Ok(LinearSystem {
        variables: net.variables().to_vec(),
        layout,
        constraints,
        status: SystemStatus::Unsolved,
    })
}

/// Singleton scopes with every statement as a soft row: the best additive
/// fit to the net.
pub fn compile_additive(net: &TcpNet) -> Result<LinearSystem, CompileError> {
    require_acyclic(net)?;
    let layout = FactorLayout::additive(net);
    let mut constraints = cp_conditions(net, &layout, MARGIN, true);
    constraints.extend(importance_conditions(net, &layout, MARGIN, true));
    Ok(LinearSystem {
        variables: net.variables().to_vec(),
        layout,
        constraints,
        status: SystemStatus::Unsolved,
    })
}

impl LinearSystem {
    pub fn lp_variable_count(&self) -> usize {
        self.layout.entry_count()
    }

    pub fn push(&mut self, constraint: LinearConstraint) {
        self.constraints.push(constraint);
        self.status = SystemStatus::Unsolved;
    }

    /// Whether every hard row holds exactly at `entries`.
    pub fn satisfied_by(&self, entries: &[Rational]) -> bool {
        rows_hold(
            entries,
            self.constraints
                .iter()
                .filter(|c| !c.soft)
                .map(|c| (c.terms.as_slice(), c.margin)),
        )
    }

    /// Builds the LP for `policy`. Identical hard rows are merged; the
    /// returned map sends each LP row to its first constraint.
    pub fn to_problem(&self, policy: ObjectivePolicy) -> (LpProblem, Vec<usize>) {
        let entries = self.layout.entry_count();
        let mut problem = LpProblem::default();
        // Each entry as a signed combination of LP columns.
        let columns: Vec<Vec<(usize, i64)>> = match policy {
            ObjectivePolicy::L1 => (0..entries)
                .map(|_| {
                    let pos = problem.add_var(1, Some(0), None);
                    let neg = problem.add_var(1, Some(0), None);
                    vec![(pos, 1), (neg, -1)]
                })
                .collect(),
            ObjectivePolicy::RandomVertex { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..entries)
                    .map(|_| {
                        let gain: i64 = rng.gen_range(-1000..=1000);
                        vec![(
                            problem.add_var(-gain, Some(-VERTEX_BOX), Some(VERTEX_BOX)),
                            1,
                        )]
                    })
                    .collect()
            }
        };
        let mut row_map = Vec::new();
        let mut seen: HashSet<(&[(usize, i64)], i64)> = HashSet::new();
        for (index, c) in self.constraints.iter().enumerate() {
            if !c.soft && !seen.insert((c.terms.as_slice(), c.margin)) {
                continue;
            }
            let mut terms: Vec<(usize, i64)> = c
                .terms
                .iter()
                .flat_map(|&(e, a)| columns[e].iter().map(move |&(col, s)| (col, a * s)))
                .collect();
            if c.soft {
                terms.push((problem.add_var(SOFT_PENALTY, Some(0), None), 1));
            }
            problem.add_row(terms, c.margin);
            row_map.push(index);
        }
        (problem, row_map)
    }

    pub fn solve(
        &mut self,
        policy: ObjectivePolicy,
        solver: &dyn LpSolver,
    ) -> Result<GaValueFunction, SolveError> {
        let (problem, row_map) = self.to_problem(policy);
        let outcome = solver
            .solve(&problem)
            .map_err(|e| SolveError::SolverFailure(e.to_string()))?;
        match outcome {
            LpOutcome::Optimal(point) => {
                let entries: Vec<Rational> = match policy {
                    ObjectivePolicy::L1 => point
                        .chunks(2)
                        .take(self.layout.entry_count())
                        .map(|pq| &pq[0] - &pq[1])
                        .collect(),
                    ObjectivePolicy::RandomVertex { .. } => {
                        point[..self.layout.entry_count()].to_vec()
                    }
                };
                assert!(
                    self.satisfied_by(&entries),
                    "certified point violates a hard row"
                );
                let v = GaValueFunction::from_entries(&self.variables, &self.layout, &entries);
                self.status = SystemStatus::Feasible(entries);
                Ok(v)
            }
            LpOutcome::Infeasible { conflict } => {
                let conflict = irreducible(&problem, conflict, solver);
                let hints: Vec<usize> = conflict.iter().map(|&row| row_map[row]).collect();
                self.status = SystemStatus::Infeasible {
                    conflict: hints.clone(),
                };
                Err(SolveError::Infeasible { hints })
            }
        }
    }

    pub fn describe_constraint(&self, index: usize) -> String {
        let c = &self.constraints[index];
        format!(
            "{} (margin {})",
            provenance_json(&self.variables, &c.provenance),
            c.margin
        )
    }

    /// JSON dump of the LP variables and every constraint with provenance.
    pub fn dump(&self) -> Value {
        let names: Vec<String> = (0..self.layout.entry_count())
            .map(|e| describe_entry(&self.variables, &self.layout, e))
            .collect();
        let constraints: Vec<Value> = self
            .constraints
            .iter()
            .map(|c| {
                json!({
                    "terms": c.terms.iter().map(|&(e, a)| json!([names[e], a])).collect::<Vec<_>>(),
                    "margin": c.margin,
                    "soft": c.soft,
                    "provenance": provenance_json(&self.variables, &c.provenance),
                })
            })
            .collect();
        json!({ "lp_variables": names, "constraints": constraints })
    }
}

/// Largest conflict that gets shrunk to an irreducible subset.
const IRREDUCIBLE_LIMIT: usize = 64;

/// Deletion filter: drops every row whose removal keeps the subset
/// infeasible.
fn irreducible(problem: &LpProblem, conflict: Vec<usize>, solver: &dyn LpSolver) -> Vec<usize> {
    if conflict.len() > IRREDUCIBLE_LIMIT {
        return conflict;
    }
    let mut kept = conflict;
    let mut i = 0;
    while i < kept.len() {
        let trial: Vec<usize> = kept.iter().copied().filter(|&r| r != kept[i]).collect();
        let sub = LpProblem {
            costs: vec![0; problem.costs.len()],
            bounds: problem.bounds.clone(),
            rows: trial.iter().map(|&r| problem.rows[r].clone()).collect(),
        };
        match solver.report_infeasible(&sub) {
            Ok(Some(_)) => kept = trial,
            _ => i += 1,
        }
    }
    kept
}

fn describe_entry(variables: &[Variable], layout: &FactorLayout, entry: usize) -> String {
    let var = layout.lp_variable(entry);
    let parts: Vec<String> = var
        .scope_assignment
        .iter()
        .map(|&(z, val)| format!("{}={}", variables[z].name, variables[z].domain[val]))
        .collect();
    format!("{}[{}]", variables[var.owner].name, parts.join(", "))
}

fn provenance_json(variables: &[Variable], provenance: &Provenance) -> Value {
    let value = |x: VarId, val: usize| variables[x].domain[val].clone();
    let context = |ctx: &[(VarId, usize)]| -> Value {
        ctx.iter()
            .map(|&(z, val)| (variables[z].name.clone(), Value::String(value(z, val))))
            .collect::<serde_json::Map<_, _>>()
            .into()
    };
    match provenance {
        Provenance::Cp {
            variable,
            better,
            worse,
            context: ctx,
        } => json!({
            "kind": "cp",
            "variable": variables[*variable].name,
            "better": value(*variable, *better),
            "worse": value(*variable, *worse),
            "context": context(ctx),
        }),
        Provenance::Importance {
            more,
            less,
            ci_arc,
            better,
            worse,
            less_winning,
            less_losing,
            context: ctx,
        } => json!({
            "kind": if ci_arc.is_some() { "ci" } else { "i" },
            "more": variables[*more].name,
            "less": variables[*less].name,
            "better": value(*more, *better),
            "worse": value(*more, *worse),
            "less_winning": value(*less, *less_winning),
            "less_losing": value(*less, *less_losing),
            "context": context(ctx),
        }),
        Provenance::Feedback {
            round,
            winner,
            loser,
        } => json!({
            "kind": "feedback",
            "round": round,
            "winner": winner,
            "loser": loser,
        }),
    }
}

/// Sizes of the compiled system next to the complexity parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeReport {
    pub lp_variable_count: usize,
    pub constraint_count: usize,
    /// Largest domain size.
    pub d: usize,
    /// Largest factor scope.
    pub lambda: usize,
    /// Largest extended family.
    pub mu: usize,
    pub variable_bound: u128,
    pub constraint_bound: u128,
}

impl SizeReport {
    pub fn within_bounds(&self) -> bool {
        self.lp_variable_count as u128 <= self.variable_bound
            && self.constraint_count as u128 <= self.constraint_bound
    }
}

pub fn size_report(net: &TcpNet) -> Result<SizeReport, CompileError> {
    let system = compile(net)?;
    let families = derive_families(net);
    let d = net.domain_sizes().into_iter().max().unwrap_or(0);
    let lambda = system
        .layout
        .scopes()
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    let mu = families
        .iter()
        .map(|f| f.extended_tcp_family.len())
        .max()
        .unwrap_or(0);
    let n = net.len() as u128;
    let arcs = (net.i_arcs().count() + net.ci_arcs().len()) as u128;
    let pow = |e: usize| (d as u128).saturating_pow(e as u32);
    let report = SizeReport {
        lp_variable_count: system.lp_variable_count(),
        constraint_count: system.constraints.len(),
        d,
        lambda,
        mu,
        variable_bound: n.saturating_mul(pow(lambda)),
        constraint_bound: (n + arcs).saturating_mul(pow(2 * mu)),
    };
    assert!(report.lp_variable_count as u128 <= report.variable_bound);
    Ok(report)
}
