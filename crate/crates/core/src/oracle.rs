//! Brute-force ceteris paribus semantics over the full outcome space.
//!
//! An outcome directly dominates another when they differ in one variable
//! whose CPT row (under the shared parent values) prefers the first value, or
//! when they differ in exactly two variables `X`, `X'` where `X` is more
//! important than `X'` in the shared selector context and the shared parent
//! context of `X` prefers the first value of `X`; the values of `X'` are then
//! arbitrary. Entailment is the transitive closure of direct dominance.

use crate::model::{TcpNet, VarId};
use std::collections::VecDeque;
use thiserror::Error;

/// Largest outcome space the oracle will enumerate by default.
pub const DEFAULT_ORACLE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("outcome space has {outcomes} outcomes, above the oracle cap of {cap}")]
    InstanceTooLarge { outcomes: u128, cap: usize },
}

/// A total assignment, as value indices in variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(pub Vec<usize>);

impl Outcome {
    /// Builds an outcome from `(variable, value)` labels; `None` if a name or
    /// value is unknown or a variable is left unassigned.
    pub fn from_labels(net: &TcpNet, labels: &[(&str, &str)]) -> Option<Self> {
        let mut values = vec![usize::MAX; net.len()];
        for &(name, label) in labels {
            let x = net.var_id(name)?;
            values[x] = net.variable(x).value_index(label)?;
        }
        (!values.contains(&usize::MAX)).then_some(Self(values))
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn label(&self, net: &TcpNet) -> String {
        self.0
            .iter()
            .enumerate()
            .map(|(x, &val)| format!("{}={}", net.variable(x).name, net.variable(x).domain[val]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Mixed-radix indexing of Ω, first variable most significant.
#[derive(Debug, Clone)]
pub struct OutcomeSpace {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl OutcomeSpace {
    pub fn new(net: &TcpNet, cap: usize) -> Result<Self, OracleError> {
        let outcomes = net.outcome_count();
        if outcomes > cap as u128 {
            return Err(OracleError::InstanceTooLarge { outcomes, cap });
        }
        let sizes = net.domain_sizes();
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Ok(Self {
            sizes,
            strides,
            len: outcomes as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Outcome {
        let mut values = vec![0; self.sizes.len()];
        for (i, &stride) in self.strides.iter().enumerate() {
            values[i] = index / stride;
            index %= stride;
        }
        Outcome(values)
    }
}

/// Checks whether `better` directly dominates `worse` by one flip.
pub fn direct_dominance(net: &TcpNet, better: &Outcome, worse: &Outcome) -> bool {
    let (o, p) = (better.values(), worse.values());
    let diff: Vec<VarId> = (0..net.len()).filter(|&x| o[x] != p[x]).collect();
    match diff.as_slice() {
        [x] => net.preference_in(*x, o).prefers(o[*x], p[*x]),
        [a, b] => [(*a, *b), (*b, *a)]
            .into_iter()
            .any(|(more, less)| importance_flip(net, more, less, o, p)),
        _ => false,
    }
}

fn importance_flip(net: &TcpNet, more: VarId, less: VarId, o: &[usize], p: &[usize]) -> bool {
    if net.parents(more).contains(&less) {
        return false;
    }
    let holds = net.importance_relations().iter().any(|rel| {
        rel.more == more
            && rel.less == less
            && rel
                .selector
                .iter()
                .zip(&rel.given)
                .all(|(&s, &val)| o[s] == val)
    });
    holds && net.preference_in(more, o).prefers(o[more], p[more])
}

/// The direct-dominance graph over every outcome of a net.
#[derive(Debug, Clone)]
pub struct DominanceGraph {
    space: OutcomeSpace,
    successors: Vec<Vec<u32>>,
}

impl DominanceGraph {
    pub fn build(net: &TcpNet, cap: usize) -> Result<Self, OracleError> {
        let space = OutcomeSpace::new(net, cap)?;
        let relations = net.importance_relations();
        let mut successors = Vec::with_capacity(space.len());
        for index in 0..space.len() {
            let o = space.decode(index).0;
            let mut next = Vec::new();
            let mut flipped = o.clone();
            for x in 0..net.len() {
                for (b, w) in net.preference_in(x, &o).pairs() {
                    if b == o[x] {
                        flipped[x] = w;
                        next.push(space.encode(&flipped) as u32);
                        flipped[x] = o[x];
                    }
                }
            }
            for rel in &relations {
                let (x, y) = (rel.more, rel.less);
                let selected = rel
                    .selector
                    .iter()
                    .zip(&rel.given)
                    .all(|(&s, &val)| o[s] == val);
                if !selected || net.parents(x).contains(&y) {
                    continue;
                }
                for (b, w) in net.preference_in(x, &o).pairs() {
                    if b != o[x] {
                        continue;
                    }
                    flipped[x] = w;
                    for val in (0..net.domain_size(y)).filter(|&val| val != o[y]) {
                        flipped[y] = val;
                        next.push(space.encode(&flipped) as u32);
                    }
                    flipped[x] = o[x];
                    flipped[y] = o[y];
                }
            }
            next.sort_unstable();
            next.dedup();
            successors.push(next);
        }
        Ok(Self { space, successors })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn node_count(&self) -> usize {
        self.successors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, node: usize) -> &[u32] {
        &self.successors[node]
    }

    /// Kahn's algorithm; `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.node_count();
        let mut indegree = vec![0usize; n];
        for succ in &self.successors {
            for &s in succ {
                indegree[s as usize] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &s in &self.successors[v] {
                indegree[s as usize] -= 1;
                if indegree[s as usize] == 0 {
                    queue.push_back(s as usize);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Nodes reachable from `from` by a nonempty path.
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue: VecDeque<usize> =
            self.successors[from].iter().map(|&s| s as usize).collect();
        for &s in &self.successors[from] {
            seen[s as usize] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &s in &self.successors[v] {
                if !seen[s as usize] {
                    seen[s as usize] = true;
                    queue.push_back(s as usize);
                }
            }
        }
        seen
    }

    pub fn closure(&self) -> EntailmentClosure {
        let n = self.node_count();
        let words = n.div_ceil(64);
        let mut reach = vec![vec![0u64; words]; n];
        match self.topological_order() {
            Some(order) => {
                for &v in order.iter().rev() {
                    let mut row = vec![0u64; words];
                    for &s in &self.successors[v] {
                        let s = s as usize;
                        row[s / 64] |= 1 << (s % 64);
                        for (dst, src) in row.iter_mut().zip(&reach[s]) {
                            *dst |= src;
                        }
                    }
                    reach[v] = row;
                }
            }
            None => {
                for (v, row) in reach.iter_mut().enumerate() {
                    for (s, hit) in self.reachable_from(v).into_iter().enumerate() {
                        if hit {
                            row[s / 64] |= 1 << (s % 64);
                        }
                    }
                }
            }
        }
        EntailmentClosure { reach }
    }
}

/// Reachability bitsets of a dominance graph.
#[derive(Debug, Clone)]
pub struct EntailmentClosure {
    reach: Vec<Vec<u64>>,
}

impl EntailmentClosure {
    pub fn entails(&self, better: usize, worse: usize) -> bool {
        self.reach[better][worse / 64] & (1 << (worse % 64)) != 0
    }

    pub fn pair_count(&self) -> usize {
        self.reach
            .iter()
            .flatten()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// All entailed `(better, worse)` index pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.reach.len();
        (0..n).flat_map(move |a| {
            (0..n)
                .filter(move |&b| self.entails(a, b))
                .map(move |b| (a, b))
        })
    }

    /// Outcomes no other outcome is entailed to beat.
    pub fn maximal(&self) -> Vec<usize> {
        let n = self.reach.len();
        let mut beaten = vec![false; n];
        for (a, b) in self.pairs() {
            if a != b {
                beaten[b] = true;
            }
        }
        (0..n).filter(|&v| !beaten[v]).collect()
    }
}

/// `N ⊨ better ≻ worse`: `worse` is reachable from `better` by a nonempty
/// sequence of direct dominance steps.
pub fn entails(
    net: &TcpNet,
    better: &Outcome,
    worse: &Outcome,
    cap: usize,
) -> Result<bool, OracleError> {
    let graph = DominanceGraph::build(net, cap)?;
    let from = graph.space().encode(better.values());
    let to = graph.space().encode(worse.values());
    Ok(graph.reachable_from(from)[to])
}

/// A net is consistent iff its dominance graph is acyclic.
pub fn consistent(net: &TcpNet, cap: usize) -> Result<bool, OracleError> {
    Ok(DominanceGraph::build(net, cap)?
        .topological_order()
        .is_some())
}

/// Every entailed ordered pair of outcomes.
pub fn all_entailed_pairs(
    net: &TcpNet,
    cap: usize,
) -> Result<Vec<(Outcome, Outcome)>, OracleError> {
    let graph = DominanceGraph::build(net, cap)?;
    let closure = graph.closure();
    let space = graph.space();
    Ok(closure
        .pairs()
        .map(|(a, b)| (space.decode(a), space.decode(b)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_net_json;
    use crate::model::tests::flight;

    fn outcome(net: &TcpNet, labels: &[(&str, &str)]) -> Outcome {
        Outcome::from_labels(net, labels).unwrap()
    }

    #[test]
    fn importance_flip_ignores_less_important_value() {
        let net = flight();
        let o = outcome(
            &net,
            &[
                ("D", "2d"),
                ("A", "klm"),
                ("T", "night"),
                ("S", "0s"),
                ("C", "economy"),
            ],
        );
        let p = outcome(
            &net,
            &[
                ("D", "2d"),
                ("A", "ba"),
                ("T", "day"),
                ("S", "0s"),
                ("C", "economy"),
            ],
        );
        assert!(direct_dominance(&net, &o, &p));
        assert!(!direct_dominance(&net, &p, &o));
    }

    #[test]
    fn identical_outcomes_do_not_dominate() {
        let net = flight();
        let o = outcome(
            &net,
            &[
                ("D", "2d"),
                ("A", "klm"),
                ("T", "night"),
                ("S", "0s"),
                ("C", "economy"),
            ],
        );
        assert!(!direct_dominance(&net, &o, &o));
    }

    #[test]
    fn night_flights_prefer_direct() {
        let net = flight();
        let o = outcome(
            &net,
            &[
                ("D", "1d"),
                ("A", "ba"),
                ("T", "night"),
                ("S", "0s"),
                ("C", "business"),
            ],
        );
        let p = outcome(
            &net,
            &[
                ("D", "1d"),
                ("A", "ba"),
                ("T", "night"),
                ("S", "1s"),
                ("C", "business"),
            ],
        );
        assert!(direct_dominance(&net, &o, &p));
        assert!(entails(&net, &o, &p, DEFAULT_ORACLE_CAP).unwrap());
    }

    #[test]
    fn single_variable_entailment() {
        let net = parse_net_json(
            r#"{"variables":[{"name":"X","domain":["x1","x2"]}],
                "cpts":[{"variable":"X","rows":[{"given":{},"order":[["x1","x2"]]}]}]}"#,
        )
        .unwrap();
        let x1 = outcome(&net, &[("X", "x1")]);
        let x2 = outcome(&net, &[("X", "x2")]);
        assert!(entails(&net, &x1, &x2, DEFAULT_ORACLE_CAP).unwrap());
        assert!(!entails(&net, &x2, &x1, DEFAULT_ORACLE_CAP).unwrap());
        assert_eq!(
            all_entailed_pairs(&net, DEFAULT_ORACLE_CAP).unwrap(),
            vec![(x1, x2)]
        );
    }

    #[test]
    fn empty_cpt_net_entails_nothing() {
        let net = parse_net_json(r#"{"variables":[{"name":"X","domain":["a","b"]}]}"#).unwrap();
        assert!(consistent(&net, DEFAULT_ORACLE_CAP).unwrap());
        assert!(all_entailed_pairs(&net, DEFAULT_ORACLE_CAP)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn mutually_conditioned_flips_are_inconsistent() {
        let net = parse_net_json(include_str!("../../../fixtures/bad_cycle.json")).unwrap();
        assert!(!consistent(&net, DEFAULT_ORACLE_CAP).unwrap());
        let graph = DominanceGraph::build(&net, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(graph.edge_count(), 4);
        let closure = graph.closure();
        assert!((0..4).all(|v| closure.entails(v, v)));
    }

    #[test]
    fn cap_is_enforced() {
        let net = flight();
        assert_eq!(
            consistent(&net, 16),
            Err(OracleError::InstanceTooLarge {
                outcomes: 32,
                cap: 16
            })
        );
    }

    #[test]
    fn edges_agree_with_direct_dominance() {
        let net = flight();
        let graph = DominanceGraph::build(&net, DEFAULT_ORACLE_CAP).unwrap();
        let space = graph.space();
        for a in 0..space.len() {
            for b in 0..space.len() {
                let edge = graph.successors(a).contains(&(b as u32));
                assert_eq!(
                    edge,
                    direct_dominance(&net, &space.decode(a), &space.decode(b)),
                    "{a} -> {b}"
                );
            }
        }
    }
}
