use crate::model::{VarId, Variable};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: String,
    /// Value index per schema variable.
    pub values: Vec<usize>,
}

/// Items over the attribute space of a net, ids unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemTable {
    schema: Vec<Variable>,
    rows: Vec<Item>,
    index: HashMap<String, usize>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ItemError {
    #[error("cannot read items: {0}")]
    Io(String),
    #[error("malformed item document: {0}")]
    Malformed(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    /// `row` counts data rows from 1.
    #[error("row {row}: unknown value `{value}` for `{attribute}`")]
    UnknownValue {
        row: usize,
        attribute: String,
        value: String,
    },
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),
    #[error("hard constraint on `{0}` names no attribute or allows no known value")]
    BadHardConstraint(String),
}

/// Keeps only items whose `attribute` takes one of `allowed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardConstraint {
    pub attribute: String,
    pub allowed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemDocument {
    pub id: String,
    pub attributes: BTreeMap<String, String>,
}

impl ItemTable {
    pub fn new(
        schema: &[Variable],
        rows: Vec<Item>,
        provenance: impl Into<String>,
    ) -> Result<Self, ItemError> {
        let mut index = HashMap::new();
        for (i, item) in rows.iter().enumerate() {
            if index.insert(item.id.clone(), i).is_some() {
                return Err(ItemError::DuplicateId(item.id.clone()));
            }
        }
        Ok(Self {
            schema: schema.to_vec(),
            rows,
            index,
            provenance: provenance.into(),
        })
    }

    pub fn schema(&self) -> &[Variable] {
        &self.schema
    }

    pub fn rows(&self) -> &[Item] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.index.get(id).map(|&i| &self.rows[i])
    }

    pub fn to_documents(&self) -> Vec<ItemDocument> {
        self.rows
            .iter()
            .map(|item| ItemDocument {
                id: item.id.clone(),
                attributes: self
                    .schema
                    .iter()
                    .zip(&item.values)
                    .map(|(var, &val)| (var.name.clone(), var.domain[val].clone()))
                    .collect(),
            })
            .collect()
    }

    /// CSV text with an `id` column followed by the schema columns.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("id")
            .chain(self.schema.iter().map(|v| v.name.as_str()))
            .collect();
        writer.write_record(&header).expect("in-memory write");
        for item in &self.rows {
            let record: Vec<&str> = std::iter::once(item.id.as_str())
                .chain(
                    self.schema
                        .iter()
                        .zip(&item.values)
                        .map(|(v, &val)| v.domain[val].as_str()),
                )
                .collect();
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 labels")
    }
}

fn resolve_row(
    schema: &[Variable],
    row: usize,
    mut lookup: impl FnMut(&str) -> Option<String>,
) -> Result<Vec<usize>, ItemError> {
    schema
        .iter()
        .map(|var| {
            let label =
                lookup(&var.name).ok_or_else(|| ItemError::MissingColumn(var.name.clone()))?;
            var.value_index(&label).ok_or(ItemError::UnknownValue {
                row,
                attribute: var.name.clone(),
                value: label,
            })
        })
        .collect()
}

pub fn load_items_csv(
    text: &str,
    schema: &[Variable],
    provenance: &str,
) -> Result<ItemTable, ItemError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| ItemError::Malformed(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ItemError::MissingColumn(name.to_string()))
    };
    let id_col = column("id")?;
    for var in schema {
        column(&var.name)?;
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ItemError::Malformed(e.to_string()))?;
        let field = |c: usize| record.get(c).map(str::to_string);
        let id = field(id_col).ok_or_else(|| ItemError::MissingColumn("id".into()))?;
        let values = resolve_row(schema, i + 1, |name| column(name).ok().and_then(field))?;
        rows.push(Item { id, values });
    }
    ItemTable::new(schema, rows, provenance)
}

pub fn load_items_json(
    text: &str,
    schema: &[Variable],
    provenance: &str,
) -> Result<ItemTable, ItemError> {
    let docs: Vec<ItemDocument> =
        serde_json::from_str(text).map_err(|e| ItemError::Malformed(e.to_string()))?;
    items_from_documents(&docs, schema, provenance)
}

pub fn items_from_documents(
    docs: &[ItemDocument],
    schema: &[Variable],
    provenance: &str,
) -> Result<ItemTable, ItemError> {
    let rows = docs
        .iter()
        .enumerate()
        .map(|(i, doc)| {
            let values = resolve_row(schema, i + 1, |name| doc.attributes.get(name).cloned())?;
            Ok(Item {
                id: doc.id.clone(),
                values,
            })
        })
        .collect::<Result<Vec<_>, ItemError>>()?;
    ItemTable::new(schema, rows, provenance)
}

/// Loads CSV, or JSON when the extension is `.json`.
pub fn load_items_path(path: &Path, schema: &[Variable]) -> Result<ItemTable, ItemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ItemError::Io(format!("{}: {e}", path.display())))?;
    let provenance = path.display().to_string();
    if path.extension().is_some_and(|ext| ext == "json") {
        load_items_json(&text, schema, &provenance)
    } else {
        load_items_csv(&text, schema, &provenance)
    }
}

/// Rows satisfying every constraint, in original order.
pub fn filter_hard(
    items: &ItemTable,
    constraints: &[HardConstraint],
) -> Result<ItemTable, ItemError> {
    let mut allowed: Vec<(VarId, Vec<bool>)> = Vec::new();
    for c in constraints {
        let bad = || ItemError::BadHardConstraint(c.attribute.clone());
        let x = items
            .schema
            .iter()
            .position(|v| v.name == c.attribute)
            .ok_or_else(bad)?;
        let var = &items.schema[x];
        let mut mask = vec![false; var.size()];
        for label in &c.allowed {
            mask[var.value_index(label).ok_or_else(bad)?] = true;
        }
        if c.allowed.is_empty() {
            return Err(bad());
        }
        allowed.push((x, mask));
    }
    let rows = items
        .rows
        .iter()
        .filter(|item| allowed.iter().all(|(x, mask)| mask[item.values[*x]]))
        .cloned()
        .collect();
    ItemTable::new(&items.schema, rows, items.provenance.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<Variable> {
        vec![
            Variable::new("T", &["day", "night"]),
            Variable::new("A", &["ba", "klm"]),
        ]
    }

    #[test]
    fn csv_loading_and_errors() {
        let table = load_items_csv("id,A,T\n1,ba,day\n2,klm,night\n", &schema(), "inline").unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.get("2").unwrap().values, vec![1, 1]);
        assert_eq!(
            load_items_csv("id,T,A\n1,noon,ba\n", &schema(), "x"),
            Err(ItemError::UnknownValue {
                row: 1,
                attribute: "T".into(),
                value: "noon".into()
            })
        );
        assert_eq!(
            load_items_csv("id,T\n1,day\n", &schema(), "x"),
            Err(ItemError::MissingColumn("A".into()))
        );
        assert_eq!(
            load_items_csv("id,T,A\n1,day,ba\n1,night,ba\n", &schema(), "x"),
            Err(ItemError::DuplicateId("1".into()))
        );
    }

    #[test]
    fn json_matches_csv() {
        let csv = load_items_csv("id,T,A\n1,day,ba\n2,night,klm\n", &schema(), "x").unwrap();
        let json = serde_json::to_string(&csv.to_documents()).unwrap();
        let back = load_items_json(&json, &schema(), "x").unwrap();
        assert_eq!(back.rows(), csv.rows());
        let again = load_items_csv(&csv.to_csv(), &schema(), "x").unwrap();
        assert_eq!(again.rows(), csv.rows());
    }

    #[test]
    fn hard_filter() {
        let table = load_items_csv(
            "id,T,A\n1,day,ba\n2,night,klm\n3,night,ba\n",
            &schema(),
            "x",
        )
        .unwrap();
        let night = HardConstraint {
            attribute: "T".into(),
            allowed: vec!["night".into()],
        };
        let ids: Vec<_> = filter_hard(&table, &[night.clone()])
            .unwrap()
            .rows()
            .iter()
            .map(|i| i.id.clone())
            .collect();
        assert_eq!(ids, ["2", "3"]);
        assert_eq!(filter_hard(&table, &[]).unwrap(), table);
        let bad = HardConstraint {
            attribute: "T".into(),
            allowed: vec!["noon".into()],
        };
        assert!(filter_hard(&table, &[bad]).is_err());
    }
}
