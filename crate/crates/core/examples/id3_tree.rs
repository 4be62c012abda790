//! An ID3 tree over the inputs, printed, then flattened into rules.
//!
//!     cargo run --example id3_tree

use ruleml::miner::{entropy, id3_build, id3_rules, information_gain, Branch, DecisionNode};
use ruleml::model::Thresholds;
use ruleml::service::cli::parse_data_file;

const F1: &str = include_str!("../fixtures/f1.jsonl");

fn show(node: &DecisionNode, depth: usize) {
    let pad = "  ".repeat(depth);
    match &node.split {
        None => println!("{pad}-> {} {:?}", node.class, node.counts),
        Some(split) => {
            for (branch, child) in &split.children {
                let value = match branch {
                    Branch::Value(v) => v.as_str(),
                    Branch::Null => "(unbound)",
                };
                println!("{pad}{} = {value}", split.attribute);
                show(child, depth + 1);
            }
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = parse_data_file(F1)?;
    println!("H(app) = {:.4}", entropy([3, 2])?);
    for attr in ["headphones", "hour"] {
        println!(
            "gain(app; {attr}) = {:.4}",
            information_gain(&data, attr, "app")?
        );
    }

    let tree = id3_build(&data, "app")?;
    println!(
        "\ntree for `{}` ({} nodes):",
        tree.target,
        tree.node_count()
    );
    show(&tree.root, 1);

    println!("\nrules:");
    for r in id3_rules(&tree, &data, Thresholds::new(0.2, 0.8)?) {
        println!("  {r}");
    }
    for row in data.rows() {
        assert_eq!(tree.classify(row), row.outputs["app"]);
    }
    Ok(())
}
