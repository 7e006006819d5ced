use crate::compiler::FactorLayout;
use crate::lp::Rational;
use crate::model::{AssignmentIter, VarId, Variable, VariableDocument};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// One sub-function: a table over the joint values of `scope`, owner first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub owner: VarId,
    pub scope: Vec<VarId>,
    radices: Vec<usize>,
    pub table: Vec<Rational>,
}

impl Factor {
    fn index(&self, outcome: &[usize]) -> usize {
        self.scope
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&z, &radix)| acc * radix + outcome[z])
    }

    pub fn value_at(&self, outcome: &[usize]) -> &Rational {
        &self.table[self.index(outcome)]
    }
}

/// A generalized-additive value function: the sum of one factor per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaValueFunction {
    variables: Vec<Variable>,
    factors: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueFunctionError {
    #[error("malformed value-function document: {0}")]
    Malformed(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown value `{value}` for `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("factor of `{0}` must list its owner first and no variable twice")]
    BadScope(String),
    #[error("variable `{0}` owns no factor or more than one")]
    FactorCount(String),
    #[error("table of `{0}` is not total over its scope")]
    IncompleteTable(String),
    #[error("bad number `{0}`")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueFunctionDocument {
    pub variables: Vec<VariableDocument>,
    pub factors: Vec<FactorDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDocument {
    pub owner: String,
    pub scope: Vec<String>,
    pub table: Vec<TableEntryDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntryDocument {
    pub assignment: BTreeMap<String, String>,
    pub value: String,
}

impl GaValueFunction {
    /// Builds the function whose table entries are `entries`, laid out as in
    /// `layout`.
    pub fn from_entries(
        variables: &[Variable],
        layout: &FactorLayout,
        entries: &[Rational],
    ) -> Self {
        let factors = (0..layout.factor_count())
            .map(|x| {
                let scope = layout.scope(x).to_vec();
                let start = layout.offset(x);
                Factor {
                    owner: x,
                    radices: scope.iter().map(|&z| variables[z].size()).collect(),
                    scope,
                    table: entries[start..start + layout.table_size(x)].to_vec(),
                }
            })
            .collect();
        Self {
            variables: variables.to_vec(),
            factors,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// All table entries, factor by factor.
    pub fn entries(&self) -> Vec<Rational> {
        self.factors
            .iter()
            .flat_map(|f| f.table.iter().cloned())
            .collect()
    }

    pub fn entry_count(&self) -> usize {
        self.factors.iter().map(|f| f.table.len()).sum()
    }

    /// Same scopes, tables replaced by `entries` (factor by factor).
    pub fn with_entries(&self, entries: &[Rational]) -> Self {
        let mut out = self.clone();
        let mut rest = entries;
        for f in &mut out.factors {
            let (head, tail) = rest.split_at(f.table.len());
            f.table = head.to_vec();
            rest = tail;
        }
        out
    }

    /// Sum over factors of the entry at the outcome's projection.
    pub fn evaluate(&self, outcome: &[usize]) -> Rational {
        self.factors
            .iter()
            .fold(Rational::zero(), |acc, f| acc + f.value_at(outcome))
    }

    pub fn to_document(&self) -> ValueFunctionDocument {
        let variables = self
            .variables
            .iter()
            .map(|v| VariableDocument {
                name: v.name.clone(),
                domain: v.domain.clone(),
            })
            .collect();
        let factors = self
            .factors
            .iter()
            .map(|f| FactorDocument {
                owner: self.variables[f.owner].name.clone(),
                scope: f
                    .scope
                    .iter()
                    .map(|&z| self.variables[z].name.clone())
                    .collect(),
                table: AssignmentIter::new(f.radices.clone())
                    .zip(&f.table)
                    .map(|(values, value)| TableEntryDocument {
                        assignment: f
                            .scope
                            .iter()
                            .zip(&values)
                            .map(|(&z, &val)| {
                                (
                                    self.variables[z].name.clone(),
                                    self.variables[z].domain[val].clone(),
                                )
                            })
                            .collect(),
                        value: format_number(value),
                    })
                    .collect(),
            })
            .collect();
        ValueFunctionDocument { variables, factors }
    }

    pub fn from_document(doc: &ValueFunctionDocument) -> Result<Self, ValueFunctionError> {
        let variables: Vec<Variable> = doc
            .variables
            .iter()
            .map(|v| Variable {
                name: v.name.clone(),
                domain: v.domain.clone(),
            })
            .collect();
        let id = |name: &str| {
            variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| ValueFunctionError::UnknownVariable(name.to_string()))
        };
        let mut factors: Vec<Option<Factor>> = vec![None; variables.len()];
        for fd in &doc.factors {
            let owner = id(&fd.owner)?;
            let scope = fd
                .scope
                .iter()
                .map(|n| id(n))
                .collect::<Result<Vec<_>, _>>()?;
            let mut distinct = scope.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if scope.first() != Some(&owner) || distinct.len() != scope.len() {
                return Err(ValueFunctionError::BadScope(fd.owner.clone()));
            }
            if factors[owner].is_some() {
                return Err(ValueFunctionError::FactorCount(fd.owner.clone()));
            }
            let radices: Vec<usize> = scope.iter().map(|&z| variables[z].size()).collect();
            let mut factor = Factor {
                owner,
                scope,
                radices,
                table: Vec::new(),
            };
            let size: usize = factor.radices.iter().product();
            let mut table: Vec<Option<Rational>> = vec![None; size];
            let mut outcome = vec![0; variables.len()];
            for entry in &fd.table {
                if entry.assignment.len() != factor.scope.len() {
                    return Err(ValueFunctionError::IncompleteTable(fd.owner.clone()));
                }
                for &z in &factor.scope {
                    let var = &variables[z];
                    let label = entry
                        .assignment
                        .get(&var.name)
                        .ok_or_else(|| ValueFunctionError::IncompleteTable(fd.owner.clone()))?;
                    outcome[z] =
                        var.value_index(label)
                            .ok_or_else(|| ValueFunctionError::UnknownValue {
                                variable: var.name.clone(),
                                value: label.clone(),
                            })?;
                }
                table[factor.index(&outcome)] = Some(parse_number(&entry.value)?);
            }
            factor.table = table
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| ValueFunctionError::IncompleteTable(fd.owner.clone()))?;
            factors[owner] = Some(factor);
        }
        let factors = factors
            .into_iter()
            .enumerate()
            .map(|(x, f)| {
                f.ok_or_else(|| ValueFunctionError::FactorCount(variables[x].name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { variables, factors })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document())
            .expect("value-function document serializes")
    }

    pub fn parse_json(text: &str) -> Result<Self, ValueFunctionError> {
        let doc: ValueFunctionDocument =
            serde_json::from_str(text).map_err(|e| ValueFunctionError::Malformed(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// Exact decimal when the denominator divides a power of ten, `p/q`
/// otherwise.
pub fn format_number(x: &Rational) -> String {
    let mut denom = x.denom().clone();
    let (two, five, ten) = (BigInt::from(2), BigInt::from(5), BigInt::from(10));
    let mut digits = 0u32;
    let mut scale = BigInt::one();
    while !denom.is_one() {
        if (&denom % &two).is_zero() {
            denom /= &two;
        } else if (&denom % &five).is_zero() {
            denom /= &five;
        } else {
            return format!("{}/{}", x.numer(), x.denom());
        }
        digits += 1;
        scale *= &ten;
    }
    // enough digits for every factor of 2 or 5
    let scaled = x * Rational::from_integer(scale.clone());
    let scaled = scaled.to_integer();
    if digits == 0 {
        return scaled.to_string();
    }
    let sign = if scaled.is_negative() { "-" } else { "" };
    let magnitude = scaled.abs().to_string();
    let padded = format!("{:0>width$}", magnitude, width = digits as usize + 1);
    let (int, frac) = padded.split_at(padded.len() - digits as usize);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

pub fn parse_number(text: &str) -> Result<Rational, ValueFunctionError> {
    let bad = || ValueFunctionError::BadNumber(text.to_string());
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let value = Rational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    Ok(if negative { -value } else { value })
}
