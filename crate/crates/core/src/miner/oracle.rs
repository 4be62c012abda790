//! Exhaustive frequent-itemset enumeration, used as a ground-truth oracle.
//!
//! Deliberately shares nothing with the miners beyond the public model types:
//! rows become bitmasks over the sorted item universe and every mask in the
//! power set is checked.

use std::collections::BTreeSet;

use super::{FrequentItemSet, MineError};
use crate::model::{Item, ItemSet};

pub const ORACLE_MAX_ITEMS: usize = 20;

pub fn brute_force_frequent(
    rows: &[(ItemSet, u64)],
    min_support: f64,
) -> Result<Vec<FrequentItemSet>, MineError> {
    let universe: Vec<Item> = rows
        .iter()
        .flat_map(|(s, _)| s.items())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if universe.len() > ORACLE_MAX_ITEMS {
        return Err(MineError::TooManyItems(universe.len()));
    }
    let total: u64 = rows.iter().map(|(_, w)| w).sum();
    if total == 0 {
        return Ok(Vec::new());
    }
    let masks: Vec<(u32, u64)> = rows
        .iter()
        .map(|(set, w)| {
            let mask = universe
                .iter()
                .enumerate()
                .filter(|(_, item)| set.contains(item))
                .fold(0u32, |m, (i, _)| m | (1 << i));
            (mask, *w)
        })
        .collect();

    let mut out = Vec::new();
    for candidate in 1u32..(1u32 << universe.len()) {
        let count: u64 = masks
            .iter()
            .filter(|(m, _)| m & candidate == candidate)
            .map(|(_, w)| w)
            .sum();
        if count == 0 || (count as f64 / total as f64) < min_support {
            continue;
        }
        let items = (0..universe.len())
            .filter(|i| candidate & (1 << i) != 0)
            .map(|i| universe[i].clone());
        let items = ItemSet::try_from_items(items).expect("co-occurring items never conflict");
        out.push(FrequentItemSet {
            items,
            support_count: count,
            support: count as f64 / total as f64,
        });
    }
    out.sort_by(|a, b| a.items.cmp(&b.items));
    Ok(out)
}
