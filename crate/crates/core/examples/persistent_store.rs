//! State written through the request layer survives a reopen.
//!
//!     cargo run --example persistent_store -- /tmp/ruleml-demo
//!
//! Run it twice against the same directory: the second run finds the
//! application from the first and keeps appending to it.

use ruleml::engine::{Engine, FeedbackPolicy};
use ruleml::service::handle_line;
use ruleml::store::Store;
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ruleml-store-example"));

    let (store, loaded) = Store::open(&root)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: {} application(s) on disk",
        root.display(),
        loaded.contexts.len()
    );
    let engine = Engine::from_contexts(loaded.contexts, FeedbackPolicy::default())?;

    let call = |req: Value| -> Value {
        let line = handle_line(&req.to_string(), &engine, Some(&store));
        serde_json::from_str(&line).expect("responses are JSON")
    };

    let key = match engine.key_for("Thermostat") {
        Some(key) => key.to_string(),
        None => {
            let r = call(json!({"request": "register_app", "params": {"name": "Thermostat"}}));
            let key = r["result"]["key"].as_str().unwrap().to_string();
            call(
                json!({"request": "set_input_output", "key": key, "params": {
                    "inputs": ["room:input:{kitchen,bedroom}", "time:input:{day,night}"],
                    "outputs": ["heat:output:{low,high}"]
                }}),
            );
            key
        }
    };

    // every acknowledged row is on disk before the response comes back
    for (room, time, heat) in [("bedroom", "night", "high"), ("kitchen", "day", "low")] {
        let row = json!({"inputs": {"room": room, "time": time}, "outputs": {"heat": heat}});
        call(json!({"request": "set_training_data_row", "key": key, "params": {"row": row}}));
    }
    let r = call(json!({"request": "generate_rules", "key": key,
        "params": {"min_support": 0.2, "min_confidence": 0.6}}));
    println!(
        "{} rule(s) after this run",
        r["result"]["rules"].as_array().map_or(0, Vec::len)
    );

    let (_, reread) = Store::open(&root)?;
    assert_eq!(reread.contexts, engine.snapshots());
    let ctx = &reread
        .contexts
        .iter()
        .find(|c| c.name == "Thermostat")
        .unwrap();
    println!(
        "reloaded Thermostat: {} rows, key {}",
        ctx.rows.len(),
        ctx.key
    );
    println!("files under {}:", root.join(&key).display());
    for entry in std::fs::read_dir(root.join(&key))? {
        let entry = entry?;
        println!(
            "  {:<18} {} bytes",
            entry.file_name().to_string_lossy(),
            entry.metadata()?.len()
        );
    }
    Ok(())
}
