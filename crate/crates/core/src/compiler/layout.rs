use crate::model::{derive_families, TcpNet, VarId};

/// Placement of every factor table inside the flat vector of LP variables.
///
/// Factor `x` is owned by variable `x`; its scope lists the owner first and
/// the remaining variables in ascending order. Table entries are laid out in
/// mixed radix over the scope, last variable fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLayout {
    scopes: Vec<Vec<VarId>>,
    radices: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    total: usize,
}

/// One LP variable: a single table entry of one factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpVariable {
    pub owner: VarId,
    pub scope_assignment: Vec<(VarId, usize)>,
}

impl FactorLayout {
    /// Scopes `F*_X` (equal to `F_X` when the net has no ci-arcs).
    pub fn tcp(net: &TcpNet) -> Self {
        let families = derive_families(net);
        let scopes = (0..net.len())
            .map(|x| {
                let fam = &families.get(x).tcp_family;
                std::iter::once(x)
                    .chain(fam.iter().copied().filter(|&z| z != x))
                    .collect()
            })
            .collect();
        Self::from_scopes(net, scopes)
    }

    /// One singleton factor per variable.
    pub fn additive(net: &TcpNet) -> Self {
        Self::from_scopes(net, (0..net.len()).map(|x| vec![x]).collect())
    }

    fn from_scopes(net: &TcpNet, scopes: Vec<Vec<VarId>>) -> Self {
        let radices: Vec<Vec<usize>> = scopes
            .iter()
            .map(|scope| scope.iter().map(|&z| net.domain_size(z)).collect())
            .collect();
        let mut offsets = Vec::with_capacity(scopes.len());
        let mut total = 0;
        for r in &radices {
            offsets.push(total);
            total += r.iter().product::<usize>();
        }
        Self {
            scopes,
            radices,
            offsets,
            total,
        }
    }

    pub fn factor_count(&self) -> usize {
        self.scopes.len()
    }

    pub fn scope(&self, x: VarId) -> &[VarId] {
        &self.scopes[x]
    }

    pub fn scopes(&self) -> &[Vec<VarId>] {
        &self.scopes
    }

    pub fn table_size(&self, x: VarId) -> usize {
        self.radices[x].iter().product()
    }

    pub fn offset(&self, x: VarId) -> usize {
        self.offsets[x]
    }

    /// Number of LP variables.
    pub fn entry_count(&self) -> usize {
        self.total
    }

    /// Entry of factor `x` at the projection of `values`, which must assign
    /// every variable of the scope (other positions are ignored).
    pub fn entry(&self, x: VarId, values: &[usize]) -> usize {
        let local = self.scopes[x]
            .iter()
            .zip(&self.radices[x])
            .fold(0, |acc, (&z, &radix)| acc * radix + values[z]);
        self.offsets[x] + local
    }

    /// The entry of every factor at a full outcome.
    pub fn outcome_entries(&self, outcome: &[usize]) -> Vec<usize> {
        (0..self.scopes.len())
            .map(|x| self.entry(x, outcome))
            .collect()
    }

    pub fn lp_variable(&self, entry: usize) -> LpVariable {
        let owner = self.offsets.partition_point(|&o| o <= entry) - 1;
        let mut local = entry - self.offsets[owner];
        let mut values = vec![0; self.scopes[owner].len()];
        for (slot, &radix) in values.iter_mut().zip(&self.radices[owner]).rev() {
            *slot = local % radix;
            local /= radix;
        }
        LpVariable {
            owner,
            scope_assignment: self.scopes[owner].iter().copied().zip(values).collect(),
        }
    }

    /// Human-readable LP variable name such as `S[S=1s, T=day, A=klm]`.
    pub fn describe(&self, net: &TcpNet, entry: usize) -> String {
        let var = self.lp_variable(entry);
        let parts: Vec<String> = var
            .scope_assignment
            .iter()
            .map(|&(z, val)| format!("{}={}", net.variable(z).name, net.variable(z).domain[val]))
            .collect();
        format!("{}[{}]", net.variable(var.owner).name, parts.join(", "))
    }
}
