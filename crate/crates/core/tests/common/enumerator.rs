//! Naive instance enumerator for the CP and importance conditions. It loops
//! every quantifier separately over its full domain and keeps the compatible
//! combinations, sharing no code with the compiler beyond the net accessors.

use gavf_core::compiler::{LinearConstraint, Provenance};
use gavf_core::model::{TcpNet, VarId};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Only pairs with nothing in between.
    Covering,
    /// Every pair of the transitive closure.
    Closure,
}

/// One generated instance: a winning and a losing partial outcome that agree
/// everywhere except on the flipped variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instance {
    pub kind: Kind,
    pub winning: BTreeMap<VarId, usize>,
    pub losing: BTreeMap<VarId, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Cp {
        x: VarId,
    },
    Importance {
        more: VarId,
        less: VarId,
        ci_arc: Option<usize>,
    },
}

impl Instance {
    /// Outcome vectors with unmentioned variables at value 0.
    pub fn outcomes(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        let fill = |m: &BTreeMap<VarId, usize>| {
            let mut o = vec![0; n];
            for (&v, &val) in m {
                o[v] = val;
            }
            o
        };
        (fill(&self.winning), fill(&self.losing))
    }
}

pub struct Families {
    pub parents: Vec<Vec<VarId>>,
    pub scope: Vec<BTreeSet<VarId>>,
    pub extended: Vec<BTreeSet<VarId>>,
}

pub fn families(net: &TcpNet) -> Families {
    let n = net.len();
    let mut parents = vec![Vec::new(); n];
    let mut children = vec![BTreeSet::new(); n];
    for (a, b) in net.cp_arcs() {
        parents[b].push(a);
        children[a].insert(b);
    }
    for p in &mut parents {
        p.sort_unstable();
    }
    let mut selectors = vec![BTreeSet::new(); n];
    let mut selected = vec![BTreeSet::new(); n];
    for arc in net.ci_arcs() {
        for end in [arc.pair.0, arc.pair.1] {
            selectors[end].extend(arc.selector.iter().copied());
            for &z in &arc.selector {
                selected[z].insert(end);
            }
        }
    }
    let scope: Vec<BTreeSet<VarId>> = (0..n)
        .map(|x| {
            let mut s: BTreeSet<VarId> = parents[x].iter().copied().collect();
            s.insert(x);
            s.extend(selectors[x].iter().copied());
            s
        })
        .collect();
    let extended = (0..n)
        .map(|x| {
            let mut e = scope[x].clone();
            for y in children[x].iter().chain(&selected[x]) {
                e.extend(scope[*y].iter().copied());
            }
            e
        })
        .collect();
    Families {
        parents,
        scope,
        extended,
    }
}

/// Σ_X Π_{Z ∈ scope(X)} |D(Z)|.
pub fn lp_variable_count(net: &TcpNet) -> usize {
    families(net)
        .scope
        .iter()
        .map(|s| s.iter().map(|&z| net.domain_size(z)).product::<usize>())
        .sum()
}

fn pairs(order: &gavf_core::model::StrictOrder, mode: PairMode) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = order.pairs().collect();
    match mode {
        PairMode::Closure => all,
        PairMode::Covering => all
            .iter()
            .copied()
            .filter(|&(a, c)| !all.iter().any(|&(a2, b)| a2 == a && all.contains(&(b, c))))
            .collect(),
    }
}

/// Every assignment to `vars`, in lexicographic order.
fn product(net: &TcpNet, vars: &[VarId]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &v in vars {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..net.domain_size(v)).map(move |val| {
                    let mut p = prefix.clone();
                    p.push(val);
                    p
                })
            })
            .collect();
    }
    out
}

/// Merges `vars = values` into `into`, failing on any disagreement.
fn merge(into: &mut BTreeMap<VarId, usize>, vars: &[VarId], values: &[usize]) -> bool {
    for (&v, &val) in vars.iter().zip(values) {
        if *into.entry(v).or_insert(val) != val {
            return false;
        }
    }
    true
}

pub fn cp_instances(net: &TcpNet, mode: PairMode) -> BTreeSet<Instance> {
    let fam = families(net);
    let mut out = BTreeSet::new();
    for x in 0..net.len() {
        let rest: Vec<VarId> = fam.extended[x]
            .iter()
            .copied()
            .filter(|&v| v != x)
            .collect();
        for (u, order) in &net.cpt(x).rows {
            for (x1, x2) in pairs(order, mode) {
                for v in product(net, &rest) {
                    let mut ctx = BTreeMap::new();
                    if !merge(&mut ctx, &fam.parents[x], u) || !merge(&mut ctx, &rest, &v) {
                        continue;
                    }
                    let mut winning = ctx.clone();
                    let mut losing = ctx;
                    winning.insert(x, x1);
                    losing.insert(x, x2);
                    out.insert(Instance {
                        kind: Kind::Cp { x },
                        winning,
                        losing,
                    });
                }
            }
        }
    }
    out
}

pub fn importance_instances(net: &TcpNet, mode: PairMode) -> BTreeSet<Instance> {
    let fam = families(net);
    let mut statements: Vec<(VarId, VarId, Option<usize>, Vec<VarId>, Vec<usize>)> = net
        .i_arcs()
        .map(|(more, less)| (more, less, None, Vec::new(), Vec::new()))
        .collect();
    for (idx, arc) in net.ci_arcs().iter().enumerate() {
        for (s, &more) in &arc.rows {
            let less = if more == arc.pair.0 {
                arc.pair.1
            } else {
                arc.pair.0
            };
            statements.push((more, less, Some(idx), arc.selector.clone(), s.clone()));
        }
    }
    let mut out = BTreeSet::new();
    for (x, xp, ci_arc, selector, s) in statements {
        let outside = |set: &BTreeSet<VarId>| -> Vec<VarId> {
            set.iter().copied().filter(|&v| v != x && v != xp).collect()
        };
        let u_prime: Vec<VarId> = fam.parents[xp]
            .iter()
            .copied()
            .filter(|&v| v != x)
            .collect();
        let s_prime: Vec<VarId> = fam.scope[xp]
            .iter()
            .copied()
            .filter(|v| !fam.parents[xp].contains(v) && *v != xp && *v != x)
            .collect();
        let v_vars = outside(&fam.extended[x]);
        let vp_vars = outside(&fam.extended[xp]);
        let v_all = product(net, &v_vars);
        let vp_all = product(net, &vp_vars);
        let up_all = product(net, &u_prime);
        let sp_all = product(net, &s_prime);
        for (u, order) in &net.cpt(x).rows {
            let mut base = BTreeMap::new();
            if !merge(&mut base, &selector, &s) || !merge(&mut base, &fam.parents[x], u) {
                continue;
            }
            for (x1, x2) in pairs(order, mode) {
                for xp1 in 0..net.domain_size(xp) {
                    for xp2 in (0..net.domain_size(xp)).filter(|&b| b != xp1) {
                        let kind = Kind::Importance {
                            more: x,
                            less: xp,
                            ci_arc,
                        };
                        for v in &v_all {
                            let mut with_v = base.clone();
                            if !merge(&mut with_v, &v_vars, v) {
                                continue;
                            }
                            for vp in &vp_all {
                                let mut with_vp = with_v.clone();
                                if !merge(&mut with_vp, &vp_vars, vp) {
                                    continue;
                                }
                                for up in &up_all {
                                    for sp in &sp_all {
                                        let mut ctx = with_vp.clone();
                                        if !(merge(&mut ctx, &u_prime, up)
                                            && merge(&mut ctx, &s_prime, sp))
                                        {
                                            continue;
                                        }
                                        let mut winning = ctx.clone();
                                        let mut losing = ctx;
                                        winning.insert(x, x1);
                                        winning.insert(xp, xp1);
                                        losing.insert(x, x2);
                                        losing.insert(xp, xp2);
                                        out.insert(Instance {
                                            kind,
                                            winning,
                                            losing,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// CP instances, plus importance instances when the net has any i- or
/// ci-arc.
pub fn all_instances(net: &TcpNet, mode: PairMode) -> BTreeSet<Instance> {
    let mut out = cp_instances(net, mode);
    out.extend(importance_instances(net, mode));
    out
}

/// The instance a compiled row stands for, read off its provenance.
pub fn from_constraint(c: &LinearConstraint) -> Instance {
    let with = |context: &[(usize, usize)], flips: &[(usize, usize)]| {
        let mut m: BTreeMap<usize, usize> = context.iter().copied().collect();
        m.extend(flips.iter().copied());
        m
    };
    match &c.provenance {
        Provenance::Cp {
            variable,
            better,
            worse,
            context,
        } => Instance {
            kind: Kind::Cp { x: *variable },
            winning: with(context, &[(*variable, *better)]),
            losing: with(context, &[(*variable, *worse)]),
        },
        Provenance::Importance {
            more,
            less,
            ci_arc,
            better,
            worse,
            less_winning,
            less_losing,
            context,
        } => Instance {
            kind: Kind::Importance {
                more: *more,
                less: *less,
                ci_arc: *ci_arc,
            },
            winning: with(context, &[(*more, *better), (*less, *less_winning)]),
            losing: with(context, &[(*more, *worse), (*less, *less_losing)]),
        },
        Provenance::Feedback { .. } => unreachable!("compile emits no feedback rows"),
    }
}
