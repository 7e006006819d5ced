use crate::model::{
    check_acyclic, parse_net, AssignmentIter, CiArcDocument, CitRowDocument, CptDocument,
    CptRowDocument, NetDocument, TcpNet, VariableDocument,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOrder {
    Total,
    Partial,
}

/// Shape of randomly generated nets. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub variable_count: [usize; 2],
    pub domain_size: [usize; 2],
    pub cp_edge_probability: f64,
    pub max_in_degree: usize,
    #[serde(default)]
    pub i_arc_count: [usize; 2],
    #[serde(default)]
    pub ci_arc_count: [usize; 2],
    #[serde(default)]
    pub selector_size_max: usize,
    pub cpt_completeness: f64,
    pub cpt_row_order: RowOrder,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            variable_count: [3, 8],
            domain_size: [2, 3],
            cp_edge_probability: 0.5,
            max_in_degree: 2,
            i_arc_count: [0, 0],
            ci_arc_count: [0, 0],
            selector_size_max: 0,
            cpt_completeness: 1.0,
            cpt_row_order: RowOrder::Total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("generator parameters cannot be met: {0}")]
    ParamsInfeasible(String),
}

fn pick(rng: &mut ChaCha8Rng, [lo, hi]: [usize; 2]) -> usize {
    rng.gen_range(lo..=hi)
}

impl GeneratorParams {
    fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: &str| Err(GeneratorError::ParamsInfeasible(msg.to_string()));
        let ranges = [
            self.variable_count,
            self.domain_size,
            self.i_arc_count,
            self.ci_arc_count,
        ];
        if ranges.iter().any(|[lo, hi]| lo > hi) {
            return bad("empty range");
        }
        if self.variable_count[0] == 0 {
            return bad("nets need at least one variable");
        }
        if self.domain_size[0] < 2 {
            return bad("domains need at least two values");
        }
        if !(0.0..=1.0).contains(&self.cp_edge_probability) {
            return bad("cp_edge_probability must lie in [0, 1]");
        }
        if !(self.cpt_completeness > 0.0 && self.cpt_completeness <= 1.0) {
            return bad("cpt_completeness must lie in (0, 1]");
        }
        if self.ci_arc_count[0] > 0 && self.variable_count[1] < 2 {
            return bad("ci-arcs need two variables");
        }
        Ok(())
    }
}

const DRAWS: usize = 32;

/// A random acyclic net. cp-arcs follow a random topological order; i-arcs
/// and ci-arcs are placed only where the mixed graph stays acyclic and the
/// net stays conditionally acyclic (see `conditionally_acyclic`). A draw that
/// cannot fit the requested arcs is redrawn from the same stream.
pub fn gen_random_net(params: &GeneratorParams, seed: u64) -> Result<TcpNet, GeneratorError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..DRAWS {
        match draw(params, &mut rng) {
            Ok(net) => return Ok(net),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one draw"))
}

fn draw(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> Result<TcpNet, GeneratorError> {
    let rng = &mut *rng;
    let n = pick(rng, params.variable_count);
    let sizes: Vec<usize> = (0..n).map(|_| pick(rng, params.domain_size)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut position = vec![0; n];
    for (p, &x) in order.iter().enumerate() {
        position[x] = p;
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, &x) in order.iter().enumerate() {
        let mut earlier: Vec<usize> = order[..p].to_vec();
        earlier.shuffle(rng);
        for y in earlier {
            if parents[x].len() < params.max_in_degree && rng.gen_bool(params.cp_edge_probability) {
                parents[x].push(y);
            }
        }
        parents[x].sort_unstable();
    }

    let name = |x: usize| format!("X{x}");
    let label = |v: usize| format!("v{v}");
    let mut doc = NetDocument {
        variables: (0..n)
            .map(|x| VariableDocument {
                name: name(x),
                domain: (0..sizes[x]).map(label).collect(),
            })
            .collect(),
        ..NetDocument::default()
    };
    for x in 0..n {
        for &p in &parents[x] {
            doc.cp_arcs.push([name(p), name(x)]);
        }
    }

    let mut used_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let parse = |doc: &NetDocument| parse_net(doc).expect("generator emits valid nets");
    let admissible = |doc: &NetDocument| {
        let net = parse(doc);
        check_acyclic(&net).acyclic && conditionally_acyclic(&net)
    };

    let want_ci = pick(rng, params.ci_arc_count);
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    candidates.shuffle(rng);
    let mut placed = 0;
    for key in candidates {
        if placed == want_ci {
            break;
        }
        let (a, b) = key;
        let eligible: Vec<usize> = (0..n).filter(|&z| z != a && z != b).collect();
        let size = rng
            .gen_range(0..=params.selector_size_max)
            .min(eligible.len());
        let mut selector: Vec<usize> = eligible.choose_multiple(rng, size).copied().collect();
        selector.sort_unstable();
        let mut rows = Vec::new();
        for values in AssignmentIter::new(selector.iter().map(|&z| sizes[z]).collect()) {
            if rng.gen_bool(params.cpt_completeness) {
                let more = if rng.gen_bool(0.5) { a } else { b };
                rows.push(CitRowDocument {
                    given: selector
                        .iter()
                        .zip(&values)
                        .map(|(&z, &v)| (name(z), label(v)))
                        .collect(),
                    more: name(more),
                });
            }
        }
        let mut trial = doc.clone();
        trial.ci_arcs.push(CiArcDocument {
            pair: [name(a), name(b)],
            selector: selector.iter().map(|&z| name(z)).collect(),
            rows,
        });
        if admissible(&trial) {
            doc = trial;
            used_pairs.insert(key);
            placed += 1;
        }
    }
    if placed < want_ci {
        return Err(GeneratorError::ParamsInfeasible(format!(
            "placed {placed} of {want_ci} ci-arcs without creating a cycle"
        )));
    }

    let want_i = pick(rng, params.i_arc_count);
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|key| !used_pairs.contains(key))
        .collect();
    candidates.shuffle(rng);
    let mut placed = 0;
    for (a, b) in candidates {
        if placed == want_i {
            break;
        }
        let (more, less) = if position[a] < position[b] {
            (a, b)
        } else {
            (b, a)
        };
        let mut trial = doc.clone();
        trial.i_arcs.push([name(more), name(less)]);
        if admissible(&trial) {
            doc = trial;
            placed += 1;
        }
    }
    if placed < want_i {
        return Err(GeneratorError::ParamsInfeasible(format!(
            "placed {placed} of {want_i} i-arcs without creating a cycle"
        )));
    }

    for x in 0..n {
        let mut rows = Vec::new();
        for given in AssignmentIter::new(parents[x].iter().map(|&p| sizes[p]).collect()) {
            if !rng.gen_bool(params.cpt_completeness) {
                continue;
            }
            let mut ranking: Vec<usize> = (0..sizes[x]).collect();
            ranking.shuffle(rng);
            let mut order = Vec::new();
            for i in 0..ranking.len() {
                for j in i + 1..ranking.len() {
                    let keep = match params.cpt_row_order {
                        RowOrder::Total => j == i + 1,
                        RowOrder::Partial => rng.gen_bool(0.5),
                    };
                    if keep {
                        order.push([label(ranking[i]), label(ranking[j])]);
                    }
                }
            }
            rows.push(CptRowDocument {
                given: parents[x]
                    .iter()
                    .zip(&given)
                    .map(|(&p, &v)| (name(p), label(v)))
                    .collect::<BTreeMap<_, _>>(),
                order,
            });
        }
        if !rows.is_empty() {
            doc.cpts.push(CptDocument {
                variable: name(x),
                rows,
            });
        }
    }

    let net = parse(&doc);
    debug_assert!(check_acyclic(&net).acyclic);
    Ok(net)
}

/// Selector variables act as parents of the pair they select for: under
/// every joint selector assignment, cp-arcs, i-arcs, selector-to-endpoint
/// edges and the ci-arcs oriented by their CIT rows form a DAG.
fn conditionally_acyclic(net: &TcpNet) -> bool {
    let n = net.len();
    let mut fixed: Vec<(usize, usize)> = net.cp_arcs().chain(net.i_arcs()).collect();
    let mut selector_vars: BTreeSet<usize> = BTreeSet::new();
    for arc in net.ci_arcs() {
        for &z in &arc.selector {
            fixed.push((z, arc.pair.0));
            fixed.push((z, arc.pair.1));
            selector_vars.insert(z);
        }
    }
    let selector_vars: Vec<usize> = selector_vars.into_iter().collect();
    let sizes = selector_vars.iter().map(|&z| net.domain_size(z)).collect();
    AssignmentIter::new(sizes).all(|values| {
        let mut edges = fixed.clone();
        for arc in net.ci_arcs() {
            let key: Vec<usize> = arc
                .selector
                .iter()
                .map(|z| values[selector_vars.binary_search(z).expect("collected above")])
                .collect();
            if let Some(&more) = arc.rows.get(&key) {
                edges.push((more, arc.other(more)));
            }
        }
        is_dag(n, &edges)
    })
}

fn is_dag(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut indegree = vec![0; n];
    let mut out = vec![Vec::new(); n];
    for &(a, b) in edges {
        out[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    seen == n
}
