use super::layout::FactorLayout;
use crate::model::{AssignmentIter, ImportanceSource, TcpNet, VarId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Which statement, and which instance of it, produced a constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Ceteris paribus flip of `variable` from `better` to `worse` within
    /// `context`.
    Cp {
        variable: VarId,
        better: usize,
        worse: usize,
        context: Vec<(VarId, usize)>,
    },
    /// Joint flip where `more` improves and `less` changes arbitrarily.
    Importance {
        more: VarId,
        less: VarId,
        ci_arc: Option<usize>,
        better: usize,
        worse: usize,
        less_winning: usize,
        less_losing: usize,
        context: Vec<(VarId, usize)>,
    },
    Feedback {
        round: usize,
        winner: String,
        loser: String,
    },
}

impl Provenance {
    pub fn is_feedback(&self) -> bool {
        matches!(self, Provenance::Feedback { .. })
    }
}

/// `Σ coefficient · entry >= margin`, optionally soft.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, i64)>,
    pub margin: i64,
    /// Soft rows may be violated at a cost.
    pub soft: bool,
    pub provenance: Provenance,
}

/// Coefficients of `v(winning) - v(losing)` over the entries of `layout`.
/// Entries shared by both outcomes cancel.
pub fn difference_terms(
    layout: &FactorLayout,
    winning: &[usize],
    losing: &[usize],
) -> Vec<(usize, i64)> {
    let mut terms = Vec::new();
    for x in 0..layout.factor_count() {
        let (w, l) = (layout.entry(x, winning), layout.entry(x, losing));
        if w != l {
            terms.push((w, 1));
            terms.push((l, -1));
        }
    }
    terms.sort_unstable();
    terms
}

/// Enumerates every context in which `changing` flips from `winning` to
/// `losing`, holding `fixed` in place. The context ranges over all scope
/// variables of the factors touched by the flip, plus the fixed ones.
fn flip_instances(
    net: &TcpNet,
    layout: &FactorLayout,
    changing: &[(VarId, usize, usize)],
    fixed: &[(VarId, usize)],
    mut emit: impl FnMut(Vec<(usize, i64)>, Vec<(VarId, usize)>),
) {
    let moving: BTreeSet<VarId> = changing.iter().map(|c| c.0).collect();
    let touched: Vec<VarId> = (0..layout.factor_count())
        .filter(|&z| layout.scope(z).iter().any(|v| moving.contains(v)))
        .collect();
    let mut context_vars: BTreeSet<VarId> = touched
        .iter()
        .flat_map(|&z| layout.scope(z).iter().copied())
        .filter(|v| !moving.contains(v))
        .collect();
    context_vars.extend(fixed.iter().map(|f| f.0));
    let free: Vec<VarId> = context_vars
        .iter()
        .copied()
        .filter(|v| fixed.iter().all(|f| f.0 != *v))
        .collect();

    let mut winning = vec![0; net.len()];
    for &(v, val) in fixed {
        winning[v] = val;
    }
    for values in AssignmentIter::new(free.iter().map(|&v| net.domain_size(v)).collect()) {
        for (&v, &val) in free.iter().zip(&values) {
            winning[v] = val;
        }
        let mut losing = winning.clone();
        for &(v, win, lose) in changing {
            winning[v] = win;
            losing[v] = lose;
        }
        let mut terms = Vec::new();
        for &z in &touched {
            terms.push((layout.entry(z, &winning), 1));
            terms.push((layout.entry(z, &losing), -1));
        }
        terms.sort_unstable();
        let context = context_vars.iter().map(|&v| (v, winning[v])).collect();
        emit(terms, context);
    }
}

/// Conditions for every covering pair of every CPT row, swept over all
/// contexts compatible with the row.
pub fn cp_conditions(
    net: &TcpNet,
    layout: &FactorLayout,
    margin: i64,
    soft: bool,
) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for x in 0..net.len() {
        let parents = net.parents(x);
        for (given, order) in &net.cpt(x).rows {
            let fixed: Vec<(VarId, usize)> =
                parents.iter().copied().zip(given.iter().copied()).collect();
            for (better, worse) in order.covering_pairs() {
                flip_instances(
                    net,
                    layout,
                    &[(x, better, worse)],
                    &fixed,
                    |terms, context| {
                        out.push(LinearConstraint {
                            terms,
                            margin,
                            soft,
                            provenance: Provenance::Cp {
                                variable: x,
                                better,
                                worse,
                                context,
                            },
                        });
                    },
                );
            }
        }
    }
    out
}

/// Conditions for every importance statement (i-arcs, then CIT rows): the
/// more important variable improves along a covering pair of one of its CPT
/// rows while the less important one moves between any two distinct values.
pub fn importance_conditions(
    net: &TcpNet,
    layout: &FactorLayout,
    margin: i64,
    soft: bool,
) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for relation in net.importance_relations() {
        let (x, other) = (relation.more, relation.less);
        let parents = net.parents(x);
        let selector: Vec<(VarId, usize)> = relation
            .selector
            .iter()
            .copied()
            .zip(relation.given.iter().copied())
            .collect();
        for (given, order) in &net.cpt(x).rows {
            let mut fixed = selector.clone();
            let mut compatible = true;
            for (&p, &val) in parents.iter().zip(given) {
                match fixed.iter().find(|f| f.0 == p) {
                    Some(&(_, existing)) => compatible &= existing == val,
                    None => fixed.push((p, val)),
                }
            }
            if !compatible {
                continue;
            }
            fixed.sort_unstable();
            for (better, worse) in order.covering_pairs() {
                for less_winning in 0..net.domain_size(other) {
                    for less_losing in (0..net.domain_size(other)).filter(|&v| v != less_winning) {
                        let changing = [(x, better, worse), (other, less_winning, less_losing)];
                        flip_instances(net, layout, &changing, &fixed, |terms, context| {
                            out.push(LinearConstraint {
                                terms,
                                margin,
                                soft,
                                provenance: Provenance::Importance {
                                    more: x,
                                    less: other,
                                    ci_arc: match relation.source {
                                        ImportanceSource::IArc => None,
                                        ImportanceSource::CiArc(idx) => Some(idx),
                                    },
                                    better,
                                    worse,
                                    less_winning,
                                    less_losing,
                                    context,
                                },
                            });
                        });
                    }
                }
            }
        }
    }
    out
}
