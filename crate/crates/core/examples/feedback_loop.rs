//! Negative feedback wearing a rule down until it stops firing.
//!
//!     cargo run --example feedback_loop

use ruleml::engine::{Engine, FeedbackPolicy, Verdict};
use ruleml::miner::Algorithm;
use ruleml::model::{AttributeSchema, ItemSet, Thresholds, TrainingRow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // harsher than the default 0.05 / 0.10
    let engine = Engine::with_policy(FeedbackPolicy::new(0.05, 0.15).expect("deltas in (0, 1)"));
    let key = engine.register_app("Alarm")?;
    engine.set_input_output(
        &key,
        vec![AttributeSchema::input("day", ["weekday", "weekend"])?],
        vec![AttributeSchema::output("alarm", ["on", "off"])?],
    )?;
    let rows = (0..10)
        .map(|i| {
            let (day, alarm) = if i < 7 {
                ("weekday", "on")
            } else {
                ("weekend", "off")
            };
            TrainingRow::new([("day", day)], [("alarm", alarm)])
        })
        .collect();
    engine.load_training_data(&key, rows)?;
    let thresholds = Thresholds::new(0.2, 0.7)?;
    engine.generate_rules(&key, thresholds, Algorithm::Apriori)?;

    let weekday = ItemSet::from_pairs([("day", "weekday")])?;
    // the user keeps snoozing: every prediction is wrong
    while let Some(inf) = engine.get_current_output(&key, &weekday)? {
        let fb = engine.send_feedback_last_gco(&key, Verdict::Negative)?;
        println!(
            "{} => {}: confidence {:.2} active={}",
            inf.rule.antecedent, inf.output, fb.confidence, fb.active
        );
    }
    println!("no active rule covers {weekday} any more");

    // feedback is one-shot per prediction
    let err = engine
        .send_feedback_last_gco(&key, Verdict::Positive)
        .unwrap_err();
    println!("second verdict: error[{}]", err.code());

    // regeneration recomputes confidences from the data
    engine.generate_rules(&key, thresholds, Algorithm::Apriori)?;
    let back = engine
        .get_current_output(&key, &weekday)?
        .expect("restored");
    println!(
        "after regeneration: {} (confidence {})",
        back.output, back.confidence
    );
    Ok(())
}
