//! Max-Miner: maximal frequent itemsets via a set-enumeration tree.
//!
//! Each search node is a candidate group with a committed `head` and a `tail`
//! of possible extensions. One pass over the data counts `head ∪ {i}` for
//! every tail item and `head ∪ tail` as a whole. When `head ∪ tail` is
//! frequent the entire subtree is skipped and the union is recorded as a
//! candidate maximal set. Otherwise the node is expanded with its tail
//! filtered to frequent extensions and reordered by ascending support.

use std::collections::HashSet;

use super::{
    check_fraction, is_frequent, is_sorted_subset, FrequentItemSet, MineError, Mined, MiningStats,
    Transactions,
};

/// A set-enumeration tree node.
#[derive(Debug, Clone)]
struct CandidateNode {
    /// Committed items, ascending ids.
    head: Vec<u32>,
    head_count: u64,
    /// Candidate extensions, ordered by ascending support of `head ∪ {i}`.
    tail: Vec<u32>,
}

#[derive(Default)]
struct NodeCounts {
    per_tail: Vec<u64>,
    whole: u64,
}

fn with_item(head: &[u32], id: u32) -> Vec<u32> {
    let mut out = head.to_vec();
    let pos = out.partition_point(|&x| x < id);
    out.insert(pos, id);
    out
}

fn union_sorted(head: &[u32], tail: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = head.iter().chain(tail).copied().collect();
    out.sort_unstable();
    out
}

/// Tail items after `pos` that do not rebind an attribute already in `head`.
fn tail_after(data: &Transactions, tail: &[u32], pos: usize, head: &[u32]) -> Vec<u32> {
    tail[pos + 1..]
        .iter()
        .copied()
        .filter(|&j| head.iter().all(|&h| !data.same_attribute(h, j)))
        .collect()
}

/// The maximal frequent itemsets: frequent, with no frequent proper superset.
pub fn max_miner(data: &Transactions, min_support: f64) -> Result<Mined, MineError> {
    check_fraction(min_support)?;
    if data.is_empty() {
        return Err(MineError::EmptyDataset);
    }
    let total = data.total_weight();
    let mut stats = MiningStats::default();

    let mut singles = vec![0u64; data.distinct_items()];
    for (row, weight) in data.rows() {
        for &id in row {
            singles[id as usize] += weight;
        }
    }
    stats.candidates_generated += singles.len() as u64;
    stats.support_counting_passes += 1;

    let mut order: Vec<u32> = (0..singles.len() as u32)
        .filter(|&id| is_frequent(singles[id as usize], total, min_support))
        .collect();
    if order.is_empty() {
        return Ok(Mined {
            itemsets: Vec::new(),
            stats,
        });
    }
    order.sort_by_key(|&id| (singles[id as usize], id));

    let last = *order.last().expect("nonempty");
    let mut maximal: Vec<(Vec<u32>, u64)> = vec![(vec![last], singles[last as usize])];
    let mut groups: Vec<CandidateNode> = order[..order.len() - 1]
        .iter()
        .enumerate()
        .map(|(pos, &id)| CandidateNode {
            head: vec![id],
            head_count: singles[id as usize],
            tail: tail_after(data, &order, pos, &[id]),
        })
        .collect();

    while !groups.is_empty() {
        let counts = count_groups(data, &groups, &mut stats);
        let mut next = Vec::new();
        for (group, counts) in groups.iter().zip(&counts) {
            if is_frequent(counts.whole, total, min_support) {
                maximal.push((union_sorted(&group.head, &group.tail), counts.whole));
            } else {
                maximal.push(expand(data, group, counts, total, min_support, &mut next));
            }
        }
        keep_maximal(&mut maximal);
        next.retain(|g| {
            let whole = union_sorted(&g.head, &g.tail);
            !maximal.iter().any(|(m, _)| is_sorted_subset(&whole, m))
        });
        groups = next;
    }

    let mut itemsets: Vec<FrequentItemSet> = maximal
        .into_iter()
        .map(|(ids, count)| FrequentItemSet::new(data.decode(&ids), count, total))
        .collect();
    itemsets.sort_by(|a, b| a.items.cmp(&b.items));
    Ok(Mined { itemsets, stats })
}

/// One pass over the data for every pending group.
fn count_groups(
    data: &Transactions,
    groups: &[CandidateNode],
    stats: &mut MiningStats,
) -> Vec<NodeCounts> {
    let mut counts: Vec<NodeCounts> = groups
        .iter()
        .map(|g| NodeCounts {
            per_tail: vec![0; g.tail.len()],
            whole: if g.tail.is_empty() { g.head_count } else { 0 },
        })
        .collect();
    for g in groups {
        stats.candidates_generated += match g.tail.len() {
            0 => 0,
            1 => 1,
            n => n as u64 + 1,
        };
    }
    if groups.iter().any(|g| !g.tail.is_empty()) {
        stats.support_counting_passes += 1;
        for (row, weight) in data.rows() {
            for (g, c) in groups.iter().zip(counts.iter_mut()) {
                if g.tail.is_empty() || !is_sorted_subset(&g.head, row) {
                    continue;
                }
                let mut all = true;
                for (i, id) in g.tail.iter().enumerate() {
                    if row.binary_search(id).is_ok() {
                        c.per_tail[i] += weight;
                    } else {
                        all = false;
                    }
                }
                if all {
                    c.whole += weight;
                }
            }
        }
    }
    counts
}

/// Expands an infrequent group into child groups, returning the one itemset
/// that the expansion settles immediately: `head ∪ {last}` for the greatest
/// tail item, or `head` itself when no extension is frequent.
fn expand(
    data: &Transactions,
    group: &CandidateNode,
    counts: &NodeCounts,
    total: u64,
    min_support: f64,
    out: &mut Vec<CandidateNode>,
) -> (Vec<u32>, u64) {
    let mut tail: Vec<(u32, u64)> = group
        .tail
        .iter()
        .zip(&counts.per_tail)
        .filter(|&(_, &c)| is_frequent(c, total, min_support))
        .map(|(&id, &c)| (id, c))
        .collect();
    tail.sort_by_key(|&(id, c)| (c, id));
    let Some(&(last, last_count)) = tail.last() else {
        return (group.head.clone(), group.head_count);
    };
    let ordered: Vec<u32> = tail.iter().map(|&(id, _)| id).collect();
    for (pos, &(id, count)) in tail[..tail.len() - 1].iter().enumerate() {
        let head = with_item(&group.head, id);
        let child_tail = tail_after(data, &ordered, pos, &head);
        out.push(CandidateNode {
            head,
            head_count: count,
            tail: child_tail,
        });
    }
    (with_item(&group.head, last), last_count)
}

/// Drops duplicates and every set with a proper superset in the family.
fn keep_maximal(family: &mut Vec<(Vec<u32>, u64)>) {
    let mut seen = HashSet::new();
    family.retain(|(ids, _)| seen.insert(ids.clone()));
    let snapshot: Vec<Vec<u32>> = family.iter().map(|(ids, _)| ids.clone()).collect();
    family.retain(|(ids, _)| {
        !snapshot
            .iter()
            .any(|other| other.len() > ids.len() && is_sorted_subset(ids, other))
    });
}

/// Rebuilds the complete frequent family from maximal sets: every nonempty
/// subset of a maximal set, with exact counts, filtered by support.
///
/// Counting uses one scan per maximal set: each transaction is reduced to
/// its intersection mask with the set, then a superset-sum over masks gives
/// every subset's count at once.
pub fn expand_maximal(
    maximal: &[FrequentItemSet],
    data: &Transactions,
    min_support: f64,
) -> Vec<FrequentItemSet> {
    let total = data.total_weight();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::new();
    for m in maximal {
        let Some(ids) = data.encode(&m.items) else {
            continue;
        };
        let n = ids.len();
        assert!(
            n < 32,
            "maximal itemset of {n} items is too large to expand"
        );
        let mut by_mask = vec![0u64; 1 << n];
        for (row, weight) in data.rows() {
            let mask = ids
                .iter()
                .enumerate()
                .filter(|(_, id)| row.binary_search(id).is_ok())
                .fold(0usize, |acc, (bit, _)| acc | (1 << bit));
            by_mask[mask] += weight;
        }
        // superset sums: by_mask[s] becomes the weight of rows containing s
        for bit in 0..n {
            for mask in 0..(1usize << n) {
                if mask & (1 << bit) == 0 {
                    by_mask[mask] += by_mask[mask | (1 << bit)];
                }
            }
        }
        for (mask, &count) in by_mask.iter().enumerate().skip(1) {
            let subset: Vec<u32> = (0..n)
                .filter(|bit| mask & (1 << bit) != 0)
                .map(|bit| ids[bit])
                .collect();
            if is_frequent(count, total, min_support) && seen.insert(subset.clone()) {
                out.push(FrequentItemSet::new(data.decode(&subset), count, total));
            }
        }
    }
    out.sort_by(|a, b| a.items.cmp(&b.items));
    out
}
