//! Changing an application's attributes after it has data.
//!
//!     cargo run --example schema_migration

use ruleml::engine::Engine;
use ruleml::miner::Algorithm;
use ruleml::model::{AttributeSchema, Thresholds, TrainingRow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::new();
    let key = engine.register_app("Reader")?;
    engine.set_input_output(
        &key,
        vec![
            AttributeSchema::input("network", ["wifi", "cell"])?,
            AttributeSchema::input("battery", ["low", "ok"])?,
        ],
        vec![AttributeSchema::output("sync", ["now", "later"])?],
    )?;
    engine.load_training_data(
        &key,
        vec![
            TrainingRow::new([("network", "wifi"), ("battery", "ok")], [("sync", "now")]),
            TrainingRow::new(
                [("network", "cell"), ("battery", "low")],
                [("sync", "later")],
            ),
            TrainingRow::new(
                [("network", "cell"), ("battery", "ok")],
                [("sync", "later")],
            ),
        ],
    )?;
    engine.generate_rules(&key, Thresholds::new(0.3, 0.6)?, Algorithm::Apriori)?;

    // drop `battery`, add `roaming`, and narrow `sync` to a single value
    let report = engine.change_inputs_outputs(
        &key,
        vec![
            AttributeSchema::input("network", ["wifi", "cell"])?,
            AttributeSchema::input("roaming", ["yes", "no"])?,
        ],
        vec![AttributeSchema::output("sync", ["now"])?],
    )?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    let ctx = engine.snapshot(&key)?;
    println!(
        "kept {} row(s), quarantined {}",
        ctx.rows.len(),
        ctx.quarantine.len()
    );
    for row in &ctx.rows {
        println!("  {}", serde_json::to_string(row)?);
    }
    // rules from the old schema are gone until the next generate
    assert!(ctx.rules.is_none());
    Ok(())
}
