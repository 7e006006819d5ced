//! TCP-nets: variables, cp/i/ci arcs, conditional preference tables and
//! conditional importance tables.

mod acyclic;
mod assign;
mod document;
mod families;
mod order;

pub use acyclic::{check_acyclic, AcyclicityReport};
pub use assign::{domain_product, AssignmentIter};
pub use document::{
    parse_net, parse_net_json, serialize_net, CiArcDocument, CitRowDocument, CptDocument,
    CptRowDocument, NetDocument, VariableDocument,
};
pub use families::{derive_families, Family, FamilySets};
pub use order::StrictOrder;

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Index of a variable within its net.
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: &[&str]) -> Self {
        Self {
            name: name.into(),
            domain: domain.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }
}

/// Conditional preference table. Row keys are value indices aligned with the
/// owning variable's sorted parent list; absent rows mean "no preference".
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cpt {
    pub rows: BTreeMap<Vec<usize>, StrictOrder>,
}

/// A ci-arc together with its conditional importance table. `pair` is stored
/// with the smaller variable index first; row values name the dominant endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiArc {
    pub pair: (VarId, VarId),
    pub selector: Vec<VarId>,
    pub rows: BTreeMap<Vec<usize>, VarId>,
}

impl CiArc {
    pub fn touches(&self, x: VarId) -> bool {
        self.pair.0 == x || self.pair.1 == x
    }

    pub fn other(&self, x: VarId) -> VarId {
        if self.pair.0 == x {
            self.pair.1
        } else {
            self.pair.0
        }
    }
}

/// Where an importance statement comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ImportanceSource {
    IArc,
    CiArc(usize),
}

/// One "`more` is more important than `less`" statement, conditioned on the
/// selector taking the values in `given` (empty for i-arcs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportanceRelation {
    pub more: VarId,
    pub less: VarId,
    pub selector: Vec<VarId>,
    pub given: Vec<usize>,
    pub source: ImportanceSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("variable `{0}` needs at least two domain values")]
    DomainTooSmall(String),
    #[error("variable `{variable}` lists value `{value}` twice")]
    DuplicateDomainValue { variable: String, value: String },
    #[error("unknown variable `{name}` in {context}")]
    UnknownVariable { name: String, context: String },
    #[error("unknown value `{value}` for variable `{variable}` in {context}")]
    UnknownValue {
        variable: String,
        value: String,
        context: String,
    },
    #[error("self-arc on `{0}`")]
    SelfArc(String),
    #[error("duplicate arc between `{0}` and `{1}`")]
    DuplicateArc(String, String),
    #[error("ci-arc selector of ({a}, {b}) contains endpoint `{endpoint}`")]
    SelectorOverlapsEndpoints {
        a: String,
        b: String,
        endpoint: String,
    },
    #[error("CPT row of `{variable}` given {given} is not a strict partial order")]
    CptRowNotPartialOrder { variable: String, given: String },
    #[error("CPT row of `{variable}` must condition on exactly its cp-parents {parents:?}")]
    ConditioningMismatch {
        variable: String,
        parents: Vec<String>,
    },
    #[error("CPT for `{0}` is declared more than once")]
    DuplicateCpt(String),
    #[error("table row {given} of `{owner}` is declared more than once")]
    DuplicateRow { owner: String, given: String },
    #[error("CIT row of ({a}, {b}) names `{named}`, which is not an endpoint")]
    DominantNotEndpoint { a: String, b: String, named: String },
}

/// Every violation found while validating a net description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid net: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct NetError {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("assignment does not cover exactly the cp-parents of `{0}`")]
    WrongConditioningSet(String),
    #[error("no importance relation between `{0}` and `{1}`")]
    NoSuchImportanceRelation(String, String),
    #[error("selector assignment for ({0}, {1}) is incomplete")]
    IncompleteSelector(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcpNet {
    variables: Vec<Variable>,
    cp_arcs: BTreeSet<(VarId, VarId)>,
    i_arcs: BTreeSet<(VarId, VarId)>,
    ci_arcs: Vec<CiArc>,
    cpts: Vec<Cpt>,
    parents: Vec<Vec<VarId>>,
}

impl TcpNet {
    /// Assembles a net from index-level parts and checks every structural
    /// invariant. CPT rows must already be transitively closed orders.
    pub fn new(
        variables: Vec<Variable>,
        cp_arcs: Vec<(VarId, VarId)>,
        i_arcs: Vec<(VarId, VarId)>,
        mut ci_arcs: Vec<CiArc>,
        cpts: Vec<Cpt>,
    ) -> Result<Self, NetError> {
        let mut violations = Vec::new();
        let n = variables.len();
        let name = |v: VarId| {
            variables
                .get(v)
                .map_or_else(|| format!("#{v}"), |x| x.name.clone())
        };

        let mut seen = BTreeSet::new();
        for var in &variables {
            if !seen.insert(var.name.as_str()) {
                violations.push(Violation::DuplicateVariable(var.name.clone()));
            }
            if var.domain.len() < 2 {
                violations.push(Violation::DomainTooSmall(var.name.clone()));
            }
            let mut values = BTreeSet::new();
            for value in &var.domain {
                if !values.insert(value.as_str()) {
                    violations.push(Violation::DuplicateDomainValue {
                        variable: var.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }

        let check_endpoint = |v: VarId, context: &str, violations: &mut Vec<Violation>| {
            if v >= n {
                violations.push(Violation::UnknownVariable {
                    name: format!("#{v}"),
                    context: context.to_string(),
                });
                false
            } else {
                true
            }
        };

        let mut cp_set = BTreeSet::new();
        for &(a, b) in &cp_arcs {
            if !check_endpoint(a, "cp_arcs", &mut violations)
                || !check_endpoint(b, "cp_arcs", &mut violations)
            {
                continue;
            }
            if a == b {
                violations.push(Violation::SelfArc(name(a)));
            } else if !cp_set.insert((a, b)) {
                violations.push(Violation::DuplicateArc(name(a), name(b)));
            }
        }

        // unordered pairs carrying an importance statement
        let mut importance_pairs = BTreeSet::new();
        let mut i_set = BTreeSet::new();
        for &(a, b) in &i_arcs {
            if !check_endpoint(a, "i_arcs", &mut violations)
                || !check_endpoint(b, "i_arcs", &mut violations)
            {
                continue;
            }
            if a == b {
                violations.push(Violation::SelfArc(name(a)));
            } else if !importance_pairs.insert((a.min(b), a.max(b))) {
                violations.push(Violation::DuplicateArc(name(a), name(b)));
            } else {
                i_set.insert((a, b));
            }
        }

        for arc in &mut ci_arcs {
            let (a, b) = arc.pair;
            if !check_endpoint(a, "ci_arcs", &mut violations)
                || !check_endpoint(b, "ci_arcs", &mut violations)
            {
                continue;
            }
            if a == b {
                violations.push(Violation::SelfArc(name(a)));
                continue;
            }
            arc.pair = (a.min(b), a.max(b));
            if !importance_pairs.insert(arc.pair) {
                violations.push(Violation::DuplicateArc(name(a), name(b)));
            }
            for &s in &arc.selector {
                if !check_endpoint(s, "ci-arc selector", &mut violations) {
                    continue;
                }
                if s == a || s == b {
                    violations.push(Violation::SelectorOverlapsEndpoints {
                        a: name(a),
                        b: name(b),
                        endpoint: name(s),
                    });
                }
            }
            arc.selector.sort_unstable();
            arc.selector.dedup();
            for (given, &dominant) in &arc.rows {
                if dominant != a && dominant != b {
                    violations.push(Violation::DominantNotEndpoint {
                        a: name(a),
                        b: name(b),
                        named: name(dominant),
                    });
                }
                let fits = given.len() == arc.selector.len()
                    && given
                        .iter()
                        .zip(&arc.selector)
                        .all(|(&val, &s)| s < n && val < variables[s].size());
                if !fits {
                    violations.push(Violation::UnknownValue {
                        variable: name(a),
                        value: format!("{given:?}"),
                        context: "CIT row".into(),
                    });
                }
            }
        }
        ci_arcs.sort_by_key(|arc| arc.pair);

        let mut parents = vec![Vec::new(); n];
        for &(a, b) in &cp_set {
            parents[b].push(a);
        }
        for p in &mut parents {
            p.sort_unstable();
        }

        if cpts.len() != n {
            violations.push(Violation::UnknownVariable {
                name: format!("{} CPTs for {n} variables", cpts.len()),
                context: "cpts".into(),
            });
        } else {
            for (x, cpt) in cpts.iter().enumerate() {
                for (given, order) in &cpt.rows {
                    let fits = given.len() == parents[x].len()
                        && given
                            .iter()
                            .zip(&parents[x])
                            .all(|(&val, &p)| val < variables[p].size());
                    if !fits {
                        violations.push(Violation::ConditioningMismatch {
                            variable: name(x),
                            parents: parents[x].iter().map(|&p| name(p)).collect(),
                        });
                    }
                    let in_domain = order
                        .pairs()
                        .all(|(a, b)| a < variables[x].size() && b < variables[x].size());
                    if !in_domain || !order.is_strict_partial_order() {
                        violations.push(Violation::CptRowNotPartialOrder {
                            variable: name(x),
                            given: format!("{given:?}"),
                        });
                    }
                }
            }
        }

        if !violations.is_empty() {
            return Err(NetError { violations });
        }
        Ok(Self {
            variables,
            cp_arcs: cp_set,
            i_arcs: i_set,
            ci_arcs,
            cpts,
            parents,
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, x: VarId) -> &Variable {
        &self.variables[x]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn domain_size(&self, x: VarId) -> usize {
        self.variables[x].size()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::size).collect()
    }

    pub fn cp_arcs(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.cp_arcs.iter().copied()
    }

    pub fn i_arcs(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.i_arcs.iter().copied()
    }

    pub fn ci_arcs(&self) -> &[CiArc] {
        &self.ci_arcs
    }

    pub fn has_ci_arcs(&self) -> bool {
        !self.ci_arcs.is_empty()
    }

    pub fn has_importance(&self) -> bool {
        !self.i_arcs.is_empty() || !self.ci_arcs.is_empty()
    }

    /// Sorted cp-parents `U_X`.
    pub fn parents(&self, x: VarId) -> &[VarId] {
        &self.parents[x]
    }

    pub fn cpt(&self, x: VarId) -> &Cpt {
        &self.cpts[x]
    }

    /// The stored (closed) order for parent values `given`, aligned with
    /// [`TcpNet::parents`]. Absent rows yield an empty order.
    pub fn cpt_row(&self, x: VarId, given: &[usize]) -> &StrictOrder {
        static EMPTY: StrictOrder = StrictOrder::empty();
        self.cpts[x].rows.get(given).unwrap_or(&EMPTY)
    }

    /// Looks up the preference over `x` for a named parent assignment, which
    /// must assign exactly the cp-parents of `x`.
    pub fn cpt_lookup(
        &self,
        x: VarId,
        given: &[(VarId, usize)],
    ) -> Result<StrictOrder, LookupError> {
        let parents = self.parents(x);
        let mut key = vec![usize::MAX; parents.len()];
        if given.len() != parents.len() {
            return Err(LookupError::WrongConditioningSet(
                self.variables[x].name.clone(),
            ));
        }
        for &(var, val) in given {
            match parents.iter().position(|&p| p == var) {
                Some(i) if key[i] == usize::MAX && val < self.domain_size(var) => key[i] = val,
                _ => {
                    return Err(LookupError::WrongConditioningSet(
                        self.variables[x].name.clone(),
                    ))
                }
            }
        }
        Ok(self.cpt_row(x, &key).clone())
    }

    /// The preference over `x` in the context of a full outcome.
    pub fn preference_in(&self, x: VarId, outcome: &[usize]) -> &StrictOrder {
        let key: Vec<usize> = self.parents[x].iter().map(|&p| outcome[p]).collect();
        self.cpt_row(x, &key)
    }

    /// Which of `a`, `b` is more important under selector values `given`
    /// (empty for an i-arc). `Ok(None)` means the CIT has no row for `given`.
    pub fn importance_lookup(
        &self,
        a: VarId,
        b: VarId,
        given: &[(VarId, usize)],
    ) -> Result<Option<VarId>, LookupError> {
        let no_relation = || {
            LookupError::NoSuchImportanceRelation(
                self.variables[a].name.clone(),
                self.variables[b].name.clone(),
            )
        };
        if self.i_arcs.contains(&(a, b)) || self.i_arcs.contains(&(b, a)) {
            if !given.is_empty() {
                return Err(no_relation());
            }
            return Ok(Some(if self.i_arcs.contains(&(a, b)) { a } else { b }));
        }
        let pair = (a.min(b), a.max(b));
        let arc = self
            .ci_arcs
            .iter()
            .find(|arc| arc.pair == pair)
            .ok_or_else(no_relation)?;
        let mut key = Vec::with_capacity(arc.selector.len());
        for &s in &arc.selector {
            let val = given
                .iter()
                .find(|&&(var, _)| var == s)
                .map(|&(_, val)| val)
                .ok_or_else(|| {
                    LookupError::IncompleteSelector(
                        self.variables[a].name.clone(),
                        self.variables[b].name.clone(),
                    )
                })?;
            key.push(val);
        }
        Ok(arc.rows.get(&key).copied())
    }

    /// Every importance statement: each i-arc, then each CIT row, in
    /// canonical order.
    pub fn importance_relations(&self) -> Vec<ImportanceRelation> {
        let mut out: Vec<ImportanceRelation> = self
            .i_arcs
            .iter()
            .map(|&(more, less)| ImportanceRelation {
                more,
                less,
                selector: Vec::new(),
                given: Vec::new(),
                source: ImportanceSource::IArc,
            })
            .collect();
        for (idx, arc) in self.ci_arcs.iter().enumerate() {
            for (given, &more) in &arc.rows {
                out.push(ImportanceRelation {
                    more,
                    less: arc.other(more),
                    selector: arc.selector.clone(),
                    given: given.clone(),
                    source: ImportanceSource::CiArc(idx),
                });
            }
        }
        out
    }

    /// Total outcome count `|Ω|`, saturating.
    pub fn outcome_count(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.size() as u128))
    }

    pub fn format_values(&self, vars: &[VarId], values: &[usize]) -> String {
        let parts: Vec<String> = vars
            .iter()
            .zip(values)
            .map(|(&v, &val)| {
                format!(
                    "{}={}",
                    self.variables[v].name, self.variables[v].domain[val]
                )
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}
