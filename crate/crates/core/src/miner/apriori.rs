//! Level-wise Apriori with downward-closure pruning.

use std::collections::HashSet;

use super::{
    check_fraction, is_frequent, is_sorted_subset, FrequentItemSet, MineError, Mined, MiningStats,
    Transactions,
};

/// All itemsets with support `>= min_support`, each with its exact count.
pub fn apriori(data: &Transactions, min_support: f64) -> Result<Mined, MineError> {
    check_fraction(min_support)?;
    if data.is_empty() {
        return Err(MineError::EmptyDataset);
    }
    let total = data.total_weight();
    let mut stats = MiningStats::default();
    let mut found: Vec<(Vec<u32>, u64)> = Vec::new();

    let mut singles = vec![0u64; data.distinct_items()];
    for (row, weight) in data.rows() {
        for &id in row {
            singles[id as usize] += weight;
        }
    }
    stats.candidates_generated += singles.len() as u64;
    stats.support_counting_passes += 1;

    let mut level: Vec<Vec<u32>> = Vec::new();
    for (id, &count) in singles.iter().enumerate() {
        if is_frequent(count, total, min_support) {
            level.push(vec![id as u32]);
            found.push((vec![id as u32], count));
        }
    }

    while level.len() > 1 {
        let candidates = join_and_prune(data, &level);
        if candidates.is_empty() {
            break;
        }
        stats.candidates_generated += candidates.len() as u64;
        stats.support_counting_passes += 1;

        let mut counts = vec![0u64; candidates.len()];
        for (row, weight) in data.rows() {
            if row.len() < candidates[0].len() {
                continue;
            }
            for (candidate, count) in candidates.iter().zip(counts.iter_mut()) {
                if is_sorted_subset(candidate, row) {
                    *count += weight;
                }
            }
        }

        level = Vec::new();
        for (candidate, count) in candidates.into_iter().zip(counts) {
            if is_frequent(count, total, min_support) {
                found.push((candidate.clone(), count));
                level.push(candidate);
            }
        }
    }

    let mut itemsets: Vec<FrequentItemSet> = found
        .into_iter()
        .map(|(ids, count)| FrequentItemSet::new(data.decode(&ids), count, total))
        .collect();
    itemsets.sort_by(|a, b| a.items.cmp(&b.items));
    Ok(Mined { itemsets, stats })
}

/// Joins sorted `k`-itemsets sharing a `k-1` prefix into `k+1` candidates,
/// then drops any candidate with an infrequent `k`-subset. Pairs whose last
/// items bind the same attribute can never co-occur and are skipped.
fn join_and_prune(data: &Transactions, level: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let known: HashSet<&[u32]> = level.iter().map(Vec::as_slice).collect();
    let k = level[0].len();
    let mut out = Vec::new();
    for (i, left) in level.iter().enumerate() {
        for right in &level[i + 1..] {
            if left[..k - 1] != right[..k - 1] {
                // level is sorted, so no later `right` shares the prefix
                break;
            }
            let (a, b) = (left[k - 1], right[k - 1]);
            if data.same_attribute(a, b) {
                continue;
            }
            let mut candidate = left.clone();
            candidate.push(b);
            let closed = (0..candidate.len() - 2).all(|skip| {
                let subset: Vec<u32> = candidate
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &id)| id)
                    .collect();
                known.contains(subset.as_slice())
            });
            if closed {
                out.push(candidate);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::model::ItemSet;

    fn supports(mined: &Mined) -> Vec<(ItemSet, u64)> {
        mined
            .itemsets
            .iter()
            .map(|f| (f.items.clone(), f.support_count))
            .collect()
    }

    #[test]
    fn abc_at_half_support() {
        let tx = Transactions::from_itemsets(abc());
        let mined = apriori(&tx, 0.5).unwrap();
        let mut expected = vec![
            (set(&["a"]), 3),
            (set(&["b"]), 3),
            (set(&["c"]), 3),
            (set(&["a", "b"]), 2),
            (set(&["a", "c"]), 2),
            (set(&["b", "c"]), 2),
        ];
        expected.sort();
        assert_eq!(supports(&mined), expected);
        for f in &mined.itemsets {
            let want = if f.items.len() == 1 { 0.75 } else { 0.5 };
            assert_eq!(f.support, want);
        }
    }

    #[test]
    fn unanimity_keeps_only_items_in_every_row() {
        let tx = Transactions::from_itemsets(vec![
            (set(&["a", "b"]), 1),
            (set(&["a", "b", "c"]), 2),
            (set(&["a", "d"]), 1),
        ]);
        let mined = apriori(&tx, 1.0).unwrap();
        assert_eq!(supports(&mined), vec![(set(&["a"]), 4)]);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let tx = Transactions::from_itemsets(Vec::new());
        assert_eq!(apriori(&tx, 0.5).unwrap_err().code(), "empty-dataset");
    }

    #[test]
    fn rejects_bad_support() {
        let tx = Transactions::from_itemsets(abc());
        assert!(apriori(&tx, 0.0).is_err());
        assert!(apriori(&tx, 1.5).is_err());
    }

    #[test]
    fn never_joins_two_values_of_one_attribute() {
        let tx = Transactions::from_dataset(&f1());
        let mined = apriori(&tx, 0.2).unwrap();
        // 6 singletons, 12 cross-attribute pairs, 4 closed triples
        assert_eq!(mined.stats.candidates_generated, 6 + 12 + 4);
        assert!(mined.itemsets.iter().all(|f| f.support_count > 0));
    }
}
