//! Item tables, hard filters, GA value functions and top-k ranking.

mod items;
mod valuefn;

pub use items::{
    filter_hard, items_from_documents, load_items_csv, load_items_json, load_items_path,
    HardConstraint, Item, ItemDocument, ItemError, ItemTable,
};
pub use valuefn::{
    format_number, parse_number, Factor, FactorDocument, GaValueFunction, TableEntryDocument,
    ValueFunctionDocument, ValueFunctionError,
};

use crate::lp::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedItem {
    pub id: String,
    pub score: Rational,
}

/// The `k` best items by descending score, ties by ascending id.
pub fn top_k(v: &GaValueFunction, items: &ItemTable, k: usize) -> Vec<RankedItem> {
    let mut scored: Vec<RankedItem> = items
        .rows()
        .iter()
        .map(|item| RankedItem {
            id: item.id.clone(),
            score: v.evaluate(&item.values),
        })
        .collect();
    scored.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
    scored.truncate(k);
    scored
}
