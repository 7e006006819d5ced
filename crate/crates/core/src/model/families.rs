use super::{TcpNet, VarId};
use std::collections::BTreeSet;

/// Neighbourhood sets of one variable `X`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Family {
    /// `U_X`: cp-parents.
    pub parents: BTreeSet<VarId>,
    /// `Y_X`: cp-children.
    pub children: BTreeSet<VarId>,
    /// `F_X = {X} ∪ U_X`.
    pub cp_family: BTreeSet<VarId>,
    /// `EF_X = F_X ∪ ⋃_{Y ∈ Y_X} F_Y`.
    pub extended_cp_family: BTreeSet<VarId>,
    /// `S_X`: union of the selectors of ci-arcs touching `X`.
    pub selectors: BTreeSet<VarId>,
    /// `W_X`: ci-arc endpoints whose selector contains `X`.
    pub selected: BTreeSet<VarId>,
    /// `Y*_X = Y_X ∪ W_X`.
    pub dependents: BTreeSet<VarId>,
    /// `F*_X = F_X ∪ S_X`.
    pub tcp_family: BTreeSet<VarId>,
    /// `EF*_X = F*_X ∪ ⋃_{Y ∈ Y*_X} F*_Y`.
    pub extended_tcp_family: BTreeSet<VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySets {
    families: Vec<Family>,
}

impl FamilySets {
    pub fn get(&self, x: VarId) -> &Family {
        &self.families[x]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Family> {
        self.families.iter()
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// `I_{X|s}`: variables directly more important than `x` under the
    /// (possibly partial) assignment `context`. CIT rows only count when the
    /// whole selector is assigned in `context`.
    pub fn dominators(&self, net: &TcpNet, x: VarId, context: &[Option<usize>]) -> BTreeSet<VarId> {
        let mut out: BTreeSet<VarId> = net
            .i_arcs()
            .filter(|&(_, less)| less == x)
            .map(|(more, _)| more)
            .collect();
        for arc in net.ci_arcs().iter().filter(|arc| arc.touches(x)) {
            let given: Option<Vec<usize>> = arc.selector.iter().map(|&s| context[s]).collect();
            if let Some(&more) = given.and_then(|g| arc.rows.get(&g)) {
                if more != x {
                    out.insert(more);
                }
            }
        }
        out
    }
}

pub fn derive_families(net: &TcpNet) -> FamilySets {
    let n = net.len();
    let mut families = vec![Family::default(); n];
    for (a, b) in net.cp_arcs() {
        families[b].parents.insert(a);
        families[a].children.insert(b);
    }
    for arc in net.ci_arcs() {
        for endpoint in [arc.pair.0, arc.pair.1] {
            families[endpoint]
                .selectors
                .extend(arc.selector.iter().copied());
            for &s in &arc.selector {
                families[s].selected.insert(endpoint);
            }
        }
    }
    for (x, fam) in families.iter_mut().enumerate() {
        fam.cp_family = fam.parents.clone();
        fam.cp_family.insert(x);
        fam.tcp_family = &fam.cp_family | &fam.selectors;
        fam.dependents = &fam.children | &fam.selected;
    }
    for x in 0..n {
        let mut extended = families[x].cp_family.clone();
        for &y in &families[x].children {
            extended.extend(families[y].cp_family.iter().copied());
        }
        let mut extended_tcp = families[x].tcp_family.clone();
        for &y in &families[x].dependents {
            extended_tcp.extend(families[y].tcp_family.iter().copied());
        }
        families[x].extended_cp_family = extended;
        families[x].extended_tcp_family = extended_tcp;
    }
    FamilySets { families }
}
