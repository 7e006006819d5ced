use super::{TcpNet, VarId};
use std::collections::VecDeque;

/// Outcome of the mixed-graph acyclicity check. `witness` lists the
/// variables of one offending cycle in traversal order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcyclicityReport {
    pub acyclic: bool,
    pub witness: Option<Vec<VarId>>,
}

impl AcyclicityReport {
    pub fn witness_names(&self, net: &TcpNet) -> Option<Vec<String>> {
        self.witness
            .as_ref()
            .map(|w| w.iter().map(|&v| net.variable(v).name.clone()).collect())
    }
}

/// A net is acyclic when its mixed graph over cp, i and ci arcs has no
/// semi-directed cycle: no simple cycle whose directed arcs (zero or more)
/// all point the same way around it.
pub fn check_acyclic(net: &TcpNet) -> AcyclicityReport {
    let n = net.len();
    let mut undirected = vec![Vec::new(); n];
    let mut directed = vec![Vec::new(); n];
    for (a, b) in net.cp_arcs().chain(net.i_arcs()) {
        directed[a].push(b);
    }
    for list in &mut directed {
        list.sort_unstable();
        list.dedup();
    }

    // A cycle made of ci-arcs alone has no directed arc at all.
    let mut forest: Vec<Vec<VarId>> = vec![Vec::new(); n];
    for arc in net.ci_arcs() {
        let (a, b) = arc.pair;
        if let Some(path) = bfs(n, a, b, |v| forest[v].clone()) {
            return AcyclicityReport {
                acyclic: false,
                witness: Some(path),
            };
        }
        forest[a].push(b);
        forest[b].push(a);
        undirected[a].push(b);
        undirected[b].push(a);
    }

    for u in 0..n {
        for &v in &directed[u] {
            let step = |w: VarId| {
                directed[w]
                    .iter()
                    .chain(&undirected[w])
                    .copied()
                    .collect::<Vec<_>>()
            };
            if let Some(path) = bfs(n, v, u, step) {
                let mut witness = vec![u];
                witness.extend(&path[..path.len() - 1]);
                return AcyclicityReport {
                    acyclic: false,
                    witness: Some(witness),
                };
            }
        }
    }
    AcyclicityReport {
        acyclic: true,
        witness: None,
    }
}

/// Shortest path `from ⇝ to` (inclusive) under `step`, if any.
fn bfs(n: usize, from: VarId, to: VarId, step: impl Fn(VarId) -> Vec<VarId>) -> Option<Vec<VarId>> {
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(w) = queue.pop_front() {
        if w == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for next in step(w) {
            if !seen[next] {
                seen[next] = true;
                prev[next] = w;
                queue.push_back(next);
            }
        }
    }
    None
}
