//! Register an application, teach it five observations, ask for a prediction.
//!
//!     cargo run --example quickstart

use ruleml::engine::{Engine, Verdict};
use ruleml::miner::Algorithm;
use ruleml::model::{AttributeSchema, ItemSet, Thresholds, TrainingRow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::new();
    let key = engine.register_app("MusicPlayer")?;
    println!("registered MusicPlayer as {key}");

    engine.set_input_output(
        &key,
        vec![
            AttributeSchema::input("headphones", ["yes", "no"])?,
            AttributeSchema::input("hour", ["morning", "evening"])?,
        ],
        vec![AttributeSchema::output("app", ["music", "none"])?],
    )?;

    let seen = [
        ("yes", "morning", "music"),
        ("yes", "morning", "music"),
        ("no", "morning", "none"),
        ("yes", "evening", "music"),
        ("no", "evening", "none"),
    ];
    let rows = seen
        .iter()
        .map(|&(h, t, app)| TrainingRow::new([("headphones", h), ("hour", t)], [("app", app)]))
        .collect();
    engine.load_training_data(&key, rows)?;

    let rules = engine.generate_rules(&key, Thresholds::new(0.4, 0.8)?, Algorithm::Apriori)?;
    println!("\n{} rules:", rules.len());
    for r in &rules {
        println!("  {r}");
    }

    let now = ItemSet::from_pairs([("headphones", "yes"), ("hour", "evening")])?;
    match engine.get_current_output(&key, &now)? {
        Some(inf) => {
            println!("\n{now} -> {} (confidence {})", inf.output, inf.confidence);
            // the user did open the music app
            let fb = engine.send_feedback_last_gco(&key, Verdict::Positive)?;
            println!("after positive feedback: confidence {}", fb.confidence);
        }
        None => println!("\nno rule covers {now}"),
    }
    Ok(())
}
