//! Frequent itemsets and rules straight from the miner, without an engine.
//!
//!     cargo run --example apriori_rules -- 0.4 0.8

use ruleml::miner::{apriori, derive_rules, mine_rules, Algorithm, Transactions};
use ruleml::model::{RuleSource, Thresholds};
use ruleml::service::cli::parse_data_file;

const F1: &str = include_str!("../fixtures/f1.jsonl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>());
    let min_support = args.next().transpose()?.unwrap_or(0.4);
    let min_confidence = args.next().transpose()?.unwrap_or(0.8);

    let data = parse_data_file(F1)?;
    let tx = Transactions::from_dataset(&data);
    let mined = apriori(&tx, min_support)?;
    println!("frequent itemsets at support {min_support}:");
    for f in &mined.itemsets {
        println!(
            "  {:<40} count={} support={}",
            f.items.to_string(),
            f.support_count,
            f.support
        );
    }
    println!(
        "{} candidates counted in {} passes",
        mined.stats.candidates_generated, mined.stats.support_counting_passes
    );

    // rules only ever put output attributes in the consequent
    let rules = derive_rules(
        &mined.itemsets,
        data.schema(),
        min_confidence,
        RuleSource::Apriori,
    );
    println!("\nrules at confidence {min_confidence}:");
    for r in &rules {
        println!("  {r}");
    }

    // mine_rules does both steps and picks the algorithm
    let (same, _) = mine_rules(
        &data,
        Thresholds::new(min_support, min_confidence)?,
        Algorithm::Apriori,
    )?;
    assert_eq!(same, rules);
    Ok(())
}
