//! Max-Miner against Apriori on data with one long planted pattern.
//!
//! Apriori has to count every subset of the pattern on its way up. Max-Miner
//! looks ahead and counts the long set directly, then recovers the subsets'
//! supports in a single pass per maximal set.
//!
//!     cargo run --release --example maxminer_candidates

use ruleml::miner::{apriori, expand_maximal, max_miner, mine_rules, Algorithm, Transactions};
use ruleml::model::Thresholds;
use ruleml::service::cli::parse_data_file;

const PLANTED: &str = include_str!("../fixtures/planted_long.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = parse_data_file(PLANTED)?;
    let tx = Transactions::from_dataset(&data);
    let s = 0.5;

    let a = apriori(&tx, s)?;
    let m = max_miner(&tx, s)?;
    println!(
        "{} rows, {} distinct items, min support {s}",
        data.rows().len(),
        tx.distinct_items()
    );
    println!(
        "apriori:   {:>4} frequent sets, {:>4} candidates",
        a.itemsets.len(),
        a.stats.candidates_generated
    );
    println!(
        "max-miner: {:>4} maximal sets,  {:>4} candidates",
        m.itemsets.len(),
        m.stats.candidates_generated
    );
    for f in &m.itemsets {
        println!(
            "  maximal: {} ({} items, support {})",
            f.items,
            f.items.len(),
            f.support
        );
    }

    let expanded = expand_maximal(&m.itemsets, &tx, s);
    assert_eq!(expanded, a.itemsets);
    println!(
        "expanded maximal sets reproduce all {} frequent sets",
        expanded.len()
    );

    let t = Thresholds::new(s, 0.9)?;
    let (ra, _) = mine_rules(&data, t, Algorithm::Apriori)?;
    let (rm, _) = mine_rules(&data, t, Algorithm::Maxminer)?;
    println!("rules: apriori {} / max-miner {}", ra.len(), rm.len());
    Ok(())
}
