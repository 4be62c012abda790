//! Frequent-itemset mining, ID3 induction and rule derivation.
//!
//! Miners operate on [`Transactions`], a compact id-encoded view of a dataset
//! in which every distinct item gets a dense `u32` id assigned in canonical
//! item order. Supports are weight fractions: `support_count / total_weight`,
//! compared against thresholds with a plain `>=`.

mod apriori;
mod id3;
mod maxminer;
mod oracle;
mod rules;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{row_to_itemset, Dataset, Item, ItemSet, Rule, RuleSource, Thresholds};

pub use apriori::apriori;
pub use id3::{
    entropy, id3_build, id3_build_all, id3_rules, information_gain, Branch, DecisionNode,
    DecisionTree, Split,
};
pub use maxminer::{expand_maximal, max_miner};
pub use oracle::{brute_force_frequent, ORACLE_MAX_ITEMS};
pub use rules::derive_rules;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MineError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("class counts are all zero")]
    AllZeroCounts,
    #[error("{0} distinct items exceed the brute-force limit")]
    TooManyItems(usize),
}

impl MineError {
    pub fn code(&self) -> &'static str {
        match self {
            MineError::EmptyDataset => "empty-dataset",
            MineError::InvalidThreshold(_) => "invalid-threshold",
            MineError::UnknownAttribute(_) => "unknown-attribute",
            MineError::AllZeroCounts => "all-zero-counts",
            MineError::TooManyItems(_) => "too-many-items",
        }
    }
}

/// Rule-source selector for a mining run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Apriori,
    Maxminer,
    Id3,
}

impl Algorithm {
    pub fn source(self) -> RuleSource {
        match self {
            Algorithm::Apriori => RuleSource::Apriori,
            Algorithm::Maxminer => RuleSource::Maxminer,
            Algorithm::Id3 => RuleSource::Id3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Apriori => "apriori",
            Algorithm::Maxminer => "maxminer",
            Algorithm::Id3 => "id3",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apriori" => Ok(Algorithm::Apriori),
            "maxminer" => Ok(Algorithm::Maxminer),
            "id3" => Ok(Algorithm::Id3),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// A frequent itemset with its exact weighted count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentItemSet {
    pub items: ItemSet,
    pub support_count: u64,
    pub support: f64,
}

impl FrequentItemSet {
    pub(crate) fn new(items: ItemSet, support_count: u64, total_weight: u64) -> Self {
        FrequentItemSet {
            items,
            support_count,
            support: ratio(support_count, total_weight),
        }
    }
}

/// Work counters for one mining run. Counters only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningStats {
    /// Itemsets whose support was counted against the data.
    pub candidates_generated: u64,
    /// Full scans over the transactions.
    pub support_counting_passes: u64,
    pub rules_emitted: u64,
}

/// Output of a frequent-itemset miner.
#[derive(Debug, Clone, PartialEq)]
pub struct Mined {
    /// Sorted by canonical itemset order.
    pub itemsets: Vec<FrequentItemSet>,
    pub stats: MiningStats,
}

pub(crate) fn ratio(num: u64, den: u64) -> f64 {
    num as f64 / den as f64
}

pub(crate) fn is_frequent(count: u64, total: u64, min_support: f64) -> bool {
    count > 0 && ratio(count, total) >= min_support
}

pub(crate) fn check_fraction(value: f64) -> Result<(), MineError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(MineError::InvalidThreshold(value.to_string()))
    }
}

/// Id-encoded weighted transactions.
///
/// Identical transactions are merged and their weights summed; the merged
/// list is kept in a deterministic order.
#[derive(Debug, Clone)]
pub struct Transactions {
    items: Vec<Item>,
    ids: HashMap<Item, u32>,
    rows: Vec<(Vec<u32>, u64)>,
    total_weight: u64,
}

impl Transactions {
    pub fn from_itemsets<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (ItemSet, u64)>,
    {
        let rows: Vec<(ItemSet, u64)> = rows.into_iter().filter(|(_, w)| *w > 0).collect();
        let universe: BTreeSet<Item> = rows.iter().flat_map(|(s, _)| s.items()).collect();
        let items: Vec<Item> = universe.into_iter().collect();
        let ids: HashMap<Item, u32> = items
            .iter()
            .enumerate()
            .map(|(i, item)| (item.clone(), i as u32))
            .collect();
        let mut merged: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut total_weight = 0;
        for (set, weight) in rows {
            // canonical item order == id order, so this is already sorted
            let encoded: Vec<u32> = set.items().map(|item| ids[&item]).collect();
            *merged.entry(encoded).or_default() += weight;
            total_weight += weight;
        }
        let mut rows: Vec<(Vec<u32>, u64)> = merged.into_iter().collect();
        rows.sort();
        Transactions {
            items,
            ids,
            rows,
            total_weight,
        }
    }

    pub fn from_dataset(data: &Dataset) -> Self {
        Self::from_rows(data.rows())
    }

    pub fn from_rows(rows: &[crate::model::TrainingRow]) -> Self {
        Self::from_itemsets(rows.iter().map(|r| (row_to_itemset(r), r.weight)))
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn is_empty(&self) -> bool {
        self.total_weight == 0
    }

    pub fn distinct_items(&self) -> usize {
        self.items.len()
    }

    pub(crate) fn item(&self, id: u32) -> &Item {
        &self.items[id as usize]
    }

    pub(crate) fn rows(&self) -> &[(Vec<u32>, u64)] {
        &self.rows
    }

    pub(crate) fn same_attribute(&self, a: u32, b: u32) -> bool {
        self.item(a).attribute == self.item(b).attribute
    }

    /// Encodes an itemset; `None` if some item never occurs in the data.
    pub(crate) fn encode(&self, set: &ItemSet) -> Option<Vec<u32>> {
        set.items()
            .map(|item| self.ids.get(&item).copied())
            .collect()
    }

    pub(crate) fn decode(&self, ids: &[u32]) -> ItemSet {
        let mut set = ItemSet::new();
        for &id in ids {
            set.insert(self.item(id).clone())
                .expect("encoded itemsets bind each attribute once");
        }
        set
    }

    pub(crate) fn count_ids(&self, ids: &[u32]) -> u64 {
        self.rows
            .iter()
            .filter(|(row, _)| is_sorted_subset(ids, row))
            .map(|(_, w)| w)
            .sum()
    }

    /// Weighted count of transactions containing `set`.
    pub fn count(&self, set: &ItemSet) -> u64 {
        match self.encode(set) {
            Some(ids) => self.count_ids(&ids),
            None => 0,
        }
    }
}

/// `needle ⊆ hay` for ascending slices.
pub(crate) fn is_sorted_subset(needle: &[u32], hay: &[u32]) -> bool {
    let mut hay = hay.iter();
    'outer: for n in needle {
        for h in hay.by_ref() {
            match h.cmp(n) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Sum of weights of rows whose itemset contains `target`.
pub fn support_count(target: &ItemSet, data: &Dataset) -> Result<u64, MineError> {
    if let Some(unknown) = target.attributes().find(|a| data.schema().get(a).is_none()) {
        return Err(MineError::UnknownAttribute(unknown.to_string()));
    }
    Ok(data
        .rows()
        .iter()
        .filter(|row| target.is_subset_of(&row_to_itemset(row)))
        .map(|row| row.weight)
        .sum())
}

/// Mines rules from a dataset with the selected algorithm.
///
/// Max-Miner output is expanded back to the full frequent family before rule
/// derivation, so `apriori` and `maxminer` produce the same rules.
pub fn mine_rules(
    data: &Dataset,
    thresholds: Thresholds,
    algorithm: Algorithm,
) -> Result<(Vec<Rule>, MiningStats), MineError> {
    if data.is_empty() {
        return Err(MineError::EmptyDataset);
    }
    let (rules, mut stats) = match algorithm {
        Algorithm::Apriori => {
            let tx = Transactions::from_dataset(data);
            let mined = apriori(&tx, thresholds.min_support())?;
            let rules = derive_rules(
                &mined.itemsets,
                data.schema(),
                thresholds.min_confidence(),
                RuleSource::Apriori,
            );
            (rules, mined.stats)
        }
        Algorithm::Maxminer => {
            let tx = Transactions::from_dataset(data);
            let mined = max_miner(&tx, thresholds.min_support())?;
            let all = expand_maximal(&mined.itemsets, &tx, thresholds.min_support());
            let rules = derive_rules(
                &all,
                data.schema(),
                thresholds.min_confidence(),
                RuleSource::Maxminer,
            );
            (rules, mined.stats)
        }
        Algorithm::Id3 => {
            let mut stats = MiningStats::default();
            let mut rules = Vec::new();
            for tree in id3_build_all(data)? {
                stats.candidates_generated += tree.node_count() as u64;
                stats.support_counting_passes += 1;
                rules.extend(id3_rules(&tree, data, thresholds));
            }
            rules.sort_by(Rule::listing_cmp);
            (rules, stats)
        }
    };
    stats.rules_emitted += rules.len() as u64;
    Ok((rules, stats))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::model::{AttributeSchema, Dataset, ItemSet, Schema, TrainingRow};

    /// The five-row headphones/hour/app fixture.
    pub fn f1() -> Dataset {
        let schema = Schema::new(vec![
            AttributeSchema::input("headphones", ["yes", "no"]).unwrap(),
            AttributeSchema::input("hour", ["morning", "evening"]).unwrap(),
            AttributeSchema::output("app", ["music", "none"]).unwrap(),
        ])
        .unwrap();
        let row = |h: &str, t: &str, a: &str| {
            TrainingRow::new([("headphones", h), ("hour", t)], [("app", a)])
        };
        Dataset::with_rows(
            schema,
            vec![
                row("yes", "morning", "music"),
                row("yes", "morning", "music"),
                row("no", "morning", "none"),
                row("yes", "evening", "music"),
                row("no", "evening", "none"),
            ],
        )
        .unwrap()
    }

    /// Transactions {a,b,c},{a,b},{a,c},{b,c}.
    pub fn abc() -> Vec<(ItemSet, u64)> {
        [&["a", "b", "c"][..], &["a", "b"], &["a", "c"], &["b", "c"]]
            .iter()
            .map(|names| (set(names), 1))
            .collect()
    }

    pub fn set(names: &[&str]) -> ItemSet {
        ItemSet::from_pairs(names.iter().map(|n| (*n, "1"))).unwrap()
    }
}
