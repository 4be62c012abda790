//! Generate a synthetic phone trace, replay it, and score the predictions.
//!
//!     cargo run --release --example system_replay -- 7 2000

use ruleml::miner::Algorithm;
use ruleml::model::Thresholds;
use ruleml::syslearn::{generate_trace, replay_fresh, Regeneration, ReplayPolicy, TraceSpec};

const SPEC: &str = include_str!("../fixtures/t1_spec.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(7);
    let len: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(500);

    let spec = TraceSpec::from_json(SPEC)?;
    let trace = generate_trace(&spec, seed, len)?;
    println!("seed {seed}: {} events", trace.events.len());
    for (cond, freq) in trace.sidecar.iter().filter(|(_, f)| **f > 0.0) {
        println!("  P({cond}) = {freq:.3}");
    }

    let thresholds = Thresholds::new(0.05, 0.7)?;
    for regeneration in [Regeneration::EveryN(25), Regeneration::PerRow] {
        let started = std::time::Instant::now();
        let policy = ReplayPolicy {
            regeneration,
            feedback: false,
        };
        let report = replay_fresh(
            &trace.events,
            &spec.bins,
            thresholds,
            Algorithm::Apriori,
            policy,
        )?;
        println!(
            "\n{regeneration:?}: {} actions, {} fired, precision {:.3}, recall {:.3} in {:.2?}",
            report.actions,
            report.fired,
            report.precision,
            report.recall,
            started.elapsed()
        );
        for (value, stats) in &report.per_action {
            println!(
                "  {value:<8} seen {:>3} predicted {:>3} correct {:>3}",
                stats.occurrences, stats.predicted, stats.correct
            );
        }
        let top = report
            .rules
            .iter()
            .max_by(|a, b| a.support.total_cmp(&b.support));
        if let Some(r) = top {
            println!("  best supported rule: {r}");
        }
    }
    Ok(())
}
