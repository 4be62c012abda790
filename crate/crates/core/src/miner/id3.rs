//! ID3 decision trees over categorical inputs, and path-to-rule extraction.
//!
//! Rows whose split attribute is null are routed to a dedicated [`Branch::Null`]
//! child. Gain ties go to the attribute declared first in the schema, and
//! majority-class ties to the class value declared first, so the built tree
//! is a pure function of the dataset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ratio, MineError};
use crate::model::{
    row_to_itemset, AttributeKind, AttributeSchema, Dataset, ItemSet, Rule, RuleSource, Schema,
    Thresholds, TrainingRow,
};

/// Shannon entropy in bits of a class distribution.
pub fn entropy<I: IntoIterator<Item = u64>>(class_counts: I) -> Result<f64, MineError> {
    let counts: Vec<u64> = class_counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(MineError::AllZeroCounts);
    }
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = ratio(c, total);
            -p * p.log2()
        })
        .sum())
}

/// Edge label from a split node to a child.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    Value(String),
    /// Rows where the split attribute is unbound.
    Null,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub attribute: String,
    pub children: Vec<(Branch, DecisionNode)>,
}

/// A tree node. Every node carries its majority class and the weighted class
/// counts of the rows that reached it; internal nodes also carry a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionNode {
    pub class: String,
    pub counts: BTreeMap<String, u64>,
    pub split: Option<Split>,
}

impl DecisionNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    fn node_count(&self) -> usize {
        1 + self
            .split
            .iter()
            .flat_map(|s| &s.children)
            .map(|(_, c)| c.node_count())
            .sum::<usize>()
    }
}

/// A tree predicting one output attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub target: String,
    pub root: DecisionNode,
}

impl DecisionTree {
    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Routes a row's inputs to a leaf and returns that leaf. Values with no
    /// matching child stop at the current node.
    pub fn route(&self, row: &TrainingRow) -> &DecisionNode {
        let mut node = &self.root;
        while let Some(split) = &node.split {
            let branch = match row.input(&split.attribute) {
                Some(v) => Branch::Value(v.to_string()),
                None => Branch::Null,
            };
            match split.children.iter().find(|(b, _)| *b == branch) {
                Some((_, child)) => node = child,
                None => break,
            }
        }
        node
    }

    pub fn classify(&self, row: &TrainingRow) -> &str {
        &self.route(row).class
    }
}

fn class_counts(rows: &[&TrainingRow], target: &str) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for row in rows {
        if let Some(class) = row.outputs.get(target) {
            *counts.entry(class.clone()).or_default() += row.weight;
        }
    }
    counts
}

fn majority(counts: &BTreeMap<String, u64>, target: &AttributeSchema) -> Option<String> {
    target
        .domain()
        .iter()
        .filter(|v| counts.get(*v).copied().unwrap_or(0) > 0)
        // max_by_key keeps the last maximum; reverse so declaration order wins
        .rev()
        .max_by_key(|v| counts[*v])
        .cloned()
}

fn partition<'a>(
    rows: &[&'a TrainingRow],
    attribute: &AttributeSchema,
) -> Vec<(Branch, Vec<&'a TrainingRow>)> {
    let mut parts: Vec<(Branch, Vec<&TrainingRow>)> = attribute
        .domain()
        .iter()
        .map(|v| (Branch::Value(v.clone()), Vec::new()))
        .collect();
    let mut nulls = Vec::new();
    for &row in rows {
        match row.input(attribute.name()) {
            Some(v) => match attribute.value_index(v) {
                Some(i) => parts[i].1.push(row),
                None => nulls.push(row),
            },
            None => nulls.push(row),
        }
    }
    if !nulls.is_empty() {
        parts.push((Branch::Null, nulls));
    }
    parts
}

fn gain_on(
    rows: &[&TrainingRow],
    attribute: &AttributeSchema,
    target: &str,
) -> Result<f64, MineError> {
    let total: u64 = rows.iter().map(|r| r.weight).sum();
    let base = entropy(class_counts(rows, target).into_values())?;
    let mut remainder = 0.0;
    for (_, part) in partition(rows, attribute) {
        let weight: u64 = part.iter().map(|r| r.weight).sum();
        if weight > 0 {
            remainder += ratio(weight, total) * entropy(class_counts(&part, target).into_values())?;
        }
    }
    // exact arithmetic gives >= 0; clamp rounding residue
    Ok((base - remainder).max(0.0))
}

fn attribute_of_kind<'a>(
    schema: &'a Schema,
    name: &str,
    kind: AttributeKind,
) -> Result<&'a AttributeSchema, MineError> {
    schema
        .get(name)
        .filter(|a| a.kind() == kind)
        .ok_or_else(|| MineError::UnknownAttribute(name.to_string()))
}

/// Entropy of `target` over the data minus the weighted entropy after
/// splitting on `attribute` (nulls form their own partition).
pub fn information_gain(data: &Dataset, attribute: &str, target: &str) -> Result<f64, MineError> {
    let attr = attribute_of_kind(data.schema(), attribute, AttributeKind::Input)?;
    attribute_of_kind(data.schema(), target, AttributeKind::Output)?;
    if data.is_empty() {
        return Err(MineError::EmptyDataset);
    }
    let rows: Vec<&TrainingRow> = data.rows().iter().collect();
    gain_on(&rows, attr, target)
}

/// Builds the ID3 tree for one output attribute.
pub fn id3_build(data: &Dataset, target: &str) -> Result<DecisionTree, MineError> {
    let schema = data.schema();
    let target_attr = attribute_of_kind(schema, target, AttributeKind::Output)?;
    if data.is_empty() {
        return Err(MineError::EmptyDataset);
    }
    let rows: Vec<&TrainingRow> = data.rows().iter().collect();
    let inputs: Vec<&AttributeSchema> = schema.inputs().collect();
    let root = grow(&rows, &inputs, target_attr, None)?;
    Ok(DecisionTree {
        target: target.to_string(),
        root,
    })
}

/// One tree per output attribute, in declaration order.
pub fn id3_build_all(data: &Dataset) -> Result<Vec<DecisionTree>, MineError> {
    data.schema()
        .outputs()
        .map(|o| id3_build(data, o.name()))
        .collect()
}

fn grow(
    rows: &[&TrainingRow],
    available: &[&AttributeSchema],
    target: &AttributeSchema,
    parent_class: Option<&str>,
) -> Result<DecisionNode, MineError> {
    let counts = class_counts(rows, target.name());
    let Some(class) = majority(&counts, target) else {
        let class = parent_class.unwrap_or(&target.domain()[0]).to_string();
        return Ok(DecisionNode {
            class,
            counts,
            split: None,
        });
    };
    let pure = counts.values().filter(|&&c| c > 0).count() <= 1;
    if pure || available.is_empty() {
        return Ok(DecisionNode {
            class,
            counts,
            split: None,
        });
    }

    let mut best = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for (i, attr) in available.iter().enumerate() {
        let gain = gain_on(rows, attr, target.name())?;
        if gain > best_gain {
            best = i;
            best_gain = gain;
        }
    }
    let chosen = available[best];
    let rest: Vec<&AttributeSchema> = available
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, a)| *a)
        .collect();
    let mut children = Vec::new();
    for (branch, part) in partition(rows, chosen) {
        children.push((branch, grow(&part, &rest, target, Some(&class))?));
    }
    Ok(DecisionNode {
        class,
        counts,
        split: Some(Split {
            attribute: chosen.name().to_string(),
            children,
        }),
    })
}

/// Turns each root-to-leaf path into `path conditions ⇒ target = leaf class`,
/// with support and confidence recounted against `data`, keeping rules that
/// clear both thresholds.
///
/// Paths through a null branch cannot be written as an item condition and
/// yield no rule; neither does an empty path (single-leaf tree).
pub fn id3_rules(tree: &DecisionTree, data: &Dataset, thresholds: Thresholds) -> Vec<Rule> {
    let mut paths = Vec::new();
    collect_paths(&tree.root, &mut Vec::new(), &mut paths);
    let itemsets: Vec<(ItemSet, u64)> = data
        .rows()
        .iter()
        .map(|r| (row_to_itemset(r), r.weight))
        .collect();
    let count = |set: &ItemSet| -> u64 {
        itemsets
            .iter()
            .filter(|(row, _)| set.is_subset_of(row))
            .map(|(_, w)| w)
            .sum()
    };
    let total = data.total_weight();
    let mut rules = Vec::new();
    for (antecedent, class) in paths {
        if antecedent.is_empty() {
            continue;
        }
        let consequent =
            ItemSet::from_pairs([(tree.target.as_str(), class.as_str())]).expect("single item");
        let whole = antecedent
            .union(&consequent)
            .expect("antecedent holds inputs only");
        let (a, z) = (count(&antecedent), count(&whole));
        if a == 0 || z == 0 {
            continue;
        }
        let support = ratio(z, total);
        let confidence = ratio(z, a);
        if support >= thresholds.min_support() && confidence >= thresholds.min_confidence() {
            rules.push(Rule {
                antecedent,
                consequent,
                support,
                confidence,
                source: RuleSource::Id3,
            });
        }
    }
    rules.sort_by(Rule::listing_cmp);
    rules
}

fn collect_paths(
    node: &DecisionNode,
    path: &mut Vec<(String, String)>,
    out: &mut Vec<(ItemSet, String)>,
) {
    match &node.split {
        None => out.push((
            ItemSet::from_pairs(path.iter().cloned()).expect("no attribute repeats on a path"),
            node.class.clone(),
        )),
        Some(split) => {
            for (branch, child) in &split.children {
                if let Branch::Value(v) = branch {
                    path.push((split.attribute.clone(), v.clone()));
                    collect_paths(child, path, out);
                    path.pop();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::f1;
    use super::*;

    const F1_APP_ENTROPY: f64 = 0.970_950_594_454_668_6;

    #[test]
    fn entropy_reference_values() {
        assert_eq!(entropy([3, 0]).unwrap(), 0.0);
        assert_eq!(entropy([1, 1]).unwrap(), 1.0);
        assert!((entropy([3, 2]).unwrap() - F1_APP_ENTROPY).abs() < 1e-9);
        assert_eq!(entropy([0, 0]).unwrap_err().code(), "all-zero-counts");
        assert_eq!(entropy(Vec::new()).unwrap_err(), MineError::AllZeroCounts);
    }

    #[test]
    fn gain_on_f1() {
        let data = f1();
        let g = information_gain(&data, "headphones", "app").unwrap();
        assert!((g - F1_APP_ENTROPY).abs() < 1e-9);
        // hour: morning {2 music, 1 none}, evening {1, 1}
        let hour = information_gain(&data, "hour", "app").unwrap();
        let morning =
            -(2.0f64 / 3.0) * (2.0f64 / 3.0).log2() - (1.0f64 / 3.0) * (1.0f64 / 3.0).log2();
        assert!((hour - (F1_APP_ENTROPY - 0.6 * morning - 0.4)).abs() < 1e-12);
        assert!(g > hour);
    }

    #[test]
    fn gain_errors() {
        let data = f1();
        assert_eq!(
            information_gain(&data, "volume", "app").unwrap_err().code(),
            "unknown-attribute"
        );
        assert!(information_gain(&data, "app", "headphones").is_err());
    }

    #[test]
    fn f1_splits_on_headphones_into_pure_leaves() {
        let tree = id3_build(&f1(), "app").unwrap();
        let split = tree.root.split.as_ref().unwrap();
        assert_eq!(split.attribute, "headphones");
        assert_eq!(split.children.len(), 2);
        for (branch, child) in &split.children {
            assert!(child.is_leaf());
            let want = match branch {
                Branch::Value(v) if v == "yes" => "music",
                _ => "none",
            };
            assert_eq!(child.class, want);
        }
    }

    #[test]
    fn single_class_gives_single_leaf_and_no_rules() {
        let data = f1();
        let rows: Vec<TrainingRow> = data
            .rows()
            .iter()
            .filter(|r| r.outputs["app"] == "music")
            .cloned()
            .collect();
        let only_music = Dataset::with_rows(data.schema().clone(), rows).unwrap();
        let tree = id3_build(&only_music, "app").unwrap();
        assert!(tree.root.is_leaf());
        let t = Thresholds::new(0.01, 0.01).unwrap();
        assert!(id3_rules(&tree, &only_music, t).is_empty());
    }

    #[test]
    fn f1_path_rules() {
        let data = f1();
        let tree = id3_build(&data, "app").unwrap();
        let rules = id3_rules(&tree, &data, Thresholds::new(0.2, 0.8).unwrap());
        let summary: Vec<(String, String, f64, f64)> = rules
            .iter()
            .map(|r| {
                (
                    r.antecedent.to_string(),
                    r.consequent.to_string(),
                    r.support,
                    r.confidence,
                )
            })
            .collect();
        assert_eq!(
            summary,
            vec![
                ("{headphones=yes}".into(), "{app=music}".into(), 0.6, 1.0),
                ("{headphones=no}".into(), "{app=none}".into(), 0.4, 1.0),
            ]
        );
        assert!(rules.iter().all(|r| r.source == RuleSource::Id3));
    }

    #[test]
    fn null_inputs_take_the_null_branch() {
        let data = f1();
        let mut rows = data.rows().to_vec();
        let mut row = TrainingRow::new([("hour", "morning")], [("app", "music")]);
        row.inputs.insert("headphones".into(), None);
        rows.push(row.clone());
        let data = Dataset::with_rows(data.schema().clone(), rows).unwrap();
        let tree = id3_build(&data, "app").unwrap();
        let split = tree.root.split.as_ref().unwrap();
        assert_eq!(split.attribute, "headphones");
        assert!(split.children.iter().any(|(b, _)| *b == Branch::Null));
        assert_eq!(tree.classify(&row), "music");
        // null path produces no rule
        let rules = id3_rules(&tree, &data, Thresholds::new(0.01, 0.01).unwrap());
        assert!(rules
            .iter()
            .all(|r| r.antecedent.get("headphones").is_some()));
    }

    #[test]
    fn xor_needs_a_zero_gain_split() {
        let schema = Schema::new(vec![
            AttributeSchema::input("a", ["0", "1"]).unwrap(),
            AttributeSchema::input("b", ["0", "1"]).unwrap(),
            AttributeSchema::output("y", ["0", "1"]).unwrap(),
        ])
        .unwrap();
        let rows: Vec<TrainingRow> = [
            ("0", "0", "0"),
            ("0", "1", "1"),
            ("1", "0", "1"),
            ("1", "1", "0"),
        ]
        .iter()
        .map(|(a, b, y)| TrainingRow::new([("a", *a), ("b", *b)], [("y", *y)]))
        .collect();
        let data = Dataset::with_rows(schema, rows).unwrap();
        assert_eq!(information_gain(&data, "a", "y").unwrap(), 0.0);
        let tree = id3_build(&data, "y").unwrap();
        // tie on zero gain goes to the first declared attribute
        assert_eq!(tree.root.split.as_ref().unwrap().attribute, "a");
        for row in data.rows() {
            assert_eq!(tree.classify(row), row.outputs["y"]);
        }
    }

    #[test]
    fn empty_partition_inherits_parent_majority() {
        let schema = Schema::new(vec![
            AttributeSchema::input("a", ["0", "1", "2"]).unwrap(),
            AttributeSchema::output("y", ["p", "q"]).unwrap(),
        ])
        .unwrap();
        let rows = vec![
            TrainingRow::new([("a", "0")], [("y", "p")]),
            TrainingRow::new([("a", "0")], [("y", "p")]),
            TrainingRow::new([("a", "1")], [("y", "q")]),
        ];
        let data = Dataset::with_rows(schema, rows).unwrap();
        let tree = id3_build(&data, "y").unwrap();
        let split = tree.root.split.as_ref().unwrap();
        let (_, empty) = &split.children[2];
        assert!(empty.counts.is_empty());
        assert_eq!(empty.class, "p");
    }
}
