//! JSON interchange form of a TCP-net.

use super::{CiArc, Cpt, NetError, StrictOrder, TcpNet, VarId, Variable, Violation};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDocument {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitRowDocument {
    pub given: BTreeMap<String, String>,
    pub more: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiArcDocument {
    pub pair: [String; 2],
    #[serde(default)]
    pub selector: Vec<String>,
    #[serde(default)]
    pub rows: Vec<CitRowDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CptRowDocument {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub order: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CptDocument {
    pub variable: String,
    #[serde(default)]
    pub rows: Vec<CptRowDocument>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDocument {
    pub variables: Vec<VariableDocument>,
    #[serde(default)]
    pub cp_arcs: Vec<[String; 2]>,
    #[serde(default)]
    pub i_arcs: Vec<[String; 2]>,
    #[serde(default)]
    pub ci_arcs: Vec<CiArcDocument>,
    #[serde(default)]
    pub cpts: Vec<CptDocument>,
}

/// Parses and validates a JSON net description.
pub fn parse_net_json(text: &str) -> Result<TcpNet, NetError> {
    let doc: NetDocument = serde_json::from_str(text).map_err(|e| NetError {
        violations: vec![Violation::Malformed(e.to_string())],
    })?;
    parse_net(&doc)
}

struct Resolver<'a> {
    variables: &'a [Variable],
    index: BTreeMap<&'a str, VarId>,
}

impl<'a> Resolver<'a> {
    fn var(&self, name: &str, context: &str, violations: &mut Vec<Violation>) -> Option<VarId> {
        let found = self.index.get(name).copied();
        if found.is_none() {
            violations.push(Violation::UnknownVariable {
                name: name.to_string(),
                context: context.to_string(),
            });
        }
        found
    }

    fn value(
        &self,
        var: VarId,
        label: &str,
        context: &str,
        violations: &mut Vec<Violation>,
    ) -> Option<usize> {
        let found = self.variables[var].value_index(label);
        if found.is_none() {
            violations.push(Violation::UnknownValue {
                variable: self.variables[var].name.clone(),
                value: label.to_string(),
                context: context.to_string(),
            });
        }
        found
    }

    /// Resolves `given` against exactly `vars`, returning values aligned with `vars`.
    fn given(
        &self,
        given: &BTreeMap<String, String>,
        vars: &[VarId],
        context: &str,
        violations: &mut Vec<Violation>,
    ) -> Result<Vec<usize>, bool> {
        let mut values = vec![usize::MAX; vars.len()];
        let mut ok = true;
        let mut covers = given.len() == vars.len();
        for (name, label) in given {
            let Some(var) = self.var(name, context, violations) else {
                ok = false;
                continue;
            };
            let Some(val) = self.value(var, label, context, violations) else {
                ok = false;
                continue;
            };
            match vars.iter().position(|&v| v == var) {
                Some(i) => values[i] = val,
                None => covers = false,
            }
        }
        if !ok {
            return Err(false);
        }
        if !covers || values.contains(&usize::MAX) {
            return Err(true);
        }
        Ok(values)
    }
}

/// Resolves names in `doc` and validates the resulting net, reporting every
/// violation found.
pub fn parse_net(doc: &NetDocument) -> Result<TcpNet, NetError> {
    let mut violations = Vec::new();
    let variables: Vec<Variable> = doc
        .variables
        .iter()
        .map(|v| Variable {
            name: v.name.clone(),
            domain: v.domain.clone(),
        })
        .collect();
    let mut index = BTreeMap::new();
    for (i, v) in variables.iter().enumerate() {
        index.entry(v.name.as_str()).or_insert(i);
    }
    let resolver = Resolver {
        variables: &variables,
        index,
    };

    let resolve_arcs = |arcs: &[[String; 2]], context: &str, violations: &mut Vec<Violation>| {
        arcs.iter()
            .filter_map(|[a, b]| {
                let a = resolver.var(a, context, violations);
                let b = resolver.var(b, context, violations);
                Some((a?, b?))
            })
            .collect::<Vec<_>>()
    };
    let cp_arcs = resolve_arcs(&doc.cp_arcs, "cp_arcs", &mut violations);
    let i_arcs = resolve_arcs(&doc.i_arcs, "i_arcs", &mut violations);

    let mut ci_arcs = Vec::new();
    for arc in &doc.ci_arcs {
        let context = format!("ci-arc ({}, {})", arc.pair[0], arc.pair[1]);
        let a = resolver.var(&arc.pair[0], &context, &mut violations);
        let b = resolver.var(&arc.pair[1], &context, &mut violations);
        let selector: Vec<VarId> = arc
            .selector
            .iter()
            .filter_map(|s| resolver.var(s, &context, &mut violations))
            .collect();
        let (Some(a), Some(b)) = (a, b) else { continue };
        let mut sorted_selector = selector.clone();
        sorted_selector.sort_unstable();
        sorted_selector.dedup();
        let mut rows = BTreeMap::new();
        for row in &arc.rows {
            let Some(more) = resolver.var(&row.more, &context, &mut violations) else {
                continue;
            };
            match resolver.given(&row.given, &sorted_selector, &context, &mut violations) {
                Ok(values) => {
                    if rows.insert(values, more).is_some() {
                        violations.push(Violation::DuplicateRow {
                            owner: context.clone(),
                            given: format!("{:?}", row.given),
                        });
                    }
                }
                Err(true) => violations.push(Violation::UnknownValue {
                    variable: row.given.keys().cloned().collect::<Vec<_>>().join(","),
                    value: "<selector assignment>".into(),
                    context: format!("{context}: row must assign exactly the selector"),
                }),
                Err(false) => {}
            }
        }
        ci_arcs.push(CiArc {
            pair: (a, b),
            selector,
            rows,
        });
    }

    let n = variables.len();
    let mut parents: Vec<BTreeSet<VarId>> = vec![BTreeSet::new(); n];
    for &(a, b) in &cp_arcs {
        if a != b {
            parents[b].insert(a);
        }
    }

    let mut cpts = vec![Cpt::default(); n];
    let mut declared = BTreeSet::new();
    for cpt in &doc.cpts {
        let Some(x) = resolver.var(&cpt.variable, "cpts", &mut violations) else {
            continue;
        };
        if !declared.insert(x) {
            violations.push(Violation::DuplicateCpt(cpt.variable.clone()));
            continue;
        }
        let parent_list: Vec<VarId> = parents[x].iter().copied().collect();
        let context = format!("CPT of {}", cpt.variable);
        for row in &cpt.rows {
            let given = match resolver.given(&row.given, &parent_list, &context, &mut violations) {
                Ok(values) => values,
                Err(true) => {
                    violations.push(Violation::ConditioningMismatch {
                        variable: cpt.variable.clone(),
                        parents: parent_list
                            .iter()
                            .map(|&p| variables[p].name.clone())
                            .collect(),
                    });
                    continue;
                }
                Err(false) => continue,
            };
            let mut pairs = Vec::new();
            let mut values_ok = true;
            for [better, worse] in &row.order {
                let b = resolver.value(x, better, &context, &mut violations);
                let w = resolver.value(x, worse, &context, &mut violations);
                match (b, w) {
                    (Some(b), Some(w)) => pairs.push((b, w)),
                    _ => values_ok = false,
                }
            }
            if !values_ok {
                continue;
            }
            let Some(order) = StrictOrder::from_pairs(pairs) else {
                violations.push(Violation::CptRowNotPartialOrder {
                    variable: cpt.variable.clone(),
                    given: format!("{:?}", row.given),
                });
                continue;
            };
            if cpts[x].rows.insert(given, order).is_some() {
                violations.push(Violation::DuplicateRow {
                    owner: context.clone(),
                    given: format!("{:?}", row.given),
                });
            }
        }
    }

    match TcpNet::new(variables, cp_arcs, i_arcs, ci_arcs, cpts) {
        Ok(net) if violations.is_empty() => Ok(net),
        Ok(_) => Err(NetError { violations }),
        Err(mut err) => {
            violations.append(&mut err.violations);
            let mut unique = Vec::new();
            for v in violations {
                if !unique.contains(&v) {
                    unique.push(v);
                }
            }
            Err(NetError { violations: unique })
        }
    }
}

/// The document form of `net`; [`parse_net`] inverts it.
pub fn serialize_net(net: &TcpNet) -> NetDocument {
    let name = |v: VarId| net.variable(v).name.clone();
    let label = |v: VarId, val: usize| net.variable(v).domain[val].clone();
    let given_map = |vars: &[VarId], values: &[usize]| -> BTreeMap<String, String> {
        vars.iter()
            .zip(values)
            .map(|(&v, &val)| (name(v), label(v, val)))
            .collect()
    };
    NetDocument {
        variables: net
            .variables()
            .iter()
            .map(|v| VariableDocument {
                name: v.name.clone(),
                domain: v.domain.clone(),
            })
            .collect(),
        cp_arcs: net.cp_arcs().map(|(a, b)| [name(a), name(b)]).collect(),
        i_arcs: net.i_arcs().map(|(a, b)| [name(a), name(b)]).collect(),
        ci_arcs: net
            .ci_arcs()
            .iter()
            .map(|arc| CiArcDocument {
                pair: [name(arc.pair.0), name(arc.pair.1)],
                selector: arc.selector.iter().map(|&s| name(s)).collect(),
                rows: arc
                    .rows
                    .iter()
                    .map(|(given, &more)| CitRowDocument {
                        given: given_map(&arc.selector, given),
                        more: name(more),
                    })
                    .collect(),
            })
            .collect(),
        cpts: (0..net.len())
            .filter(|&x| !net.cpt(x).rows.is_empty())
            .map(|x| CptDocument {
                variable: name(x),
                rows: net
                    .cpt(x)
                    .rows
                    .iter()
                    .map(|(given, order)| CptRowDocument {
                        given: given_map(net.parents(x), given),
                        order: order
                            .pairs()
                            .map(|(b, w)| [label(x, b), label(x, w)])
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}
