use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{snapshot_to_row, BinningConfig, EventKind, Reading, SyslearnError, TraceEvent};
use crate::engine::{Engine, EngineError, GenerationMode, RuleRef, Verdict};
use crate::miner::Algorithm;
use crate::model::{IdentificationKey, ItemSet, Rule, Thresholds, TrainingRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regeneration {
    /// Automated mode: rules are regenerated after every learned row.
    PerRow,
    /// Manual regeneration after every `n` learned rows.
    EveryN(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayPolicy {
    pub regeneration: Regeneration,
    /// Send positive/negative feedback for every fired prediction.
    pub feedback: bool,
}

impl Default for ReplayPolicy {
    fn default() -> Self {
        ReplayPolicy {
            regeneration: Regeneration::PerRow,
            feedback: false,
        }
    }
}

/// A fired prediction, made on the state just before a user action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub t: u64,
    pub rule: RuleRef,
    pub confidence: f64,
    pub predicted: String,
    pub actual: String,
    pub correct: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionStats {
    /// User actions with this value.
    pub occurrences: usize,
    /// Fired predictions of this value.
    pub predicted: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub events: usize,
    pub actions: usize,
    pub rows_learned: usize,
    /// Active rules after the final regeneration.
    pub rules: Vec<Rule>,
    pub predictions: Vec<Prediction>,
    pub fired: usize,
    pub correct: usize,
    /// `correct / fired`, 0 when nothing fired.
    pub precision: f64,
    /// `correct / actions`, 0 when there were no actions.
    pub recall: f64,
    pub per_action: BTreeMap<String, ActionStats>,
}

fn fraction(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn bound_inputs(row: &TrainingRow) -> ItemSet {
    ItemSet::from_pairs(
        row.inputs
            .iter()
            .filter_map(|(a, v)| v.as_deref().map(|v| (a.as_str(), v))),
    )
    .expect("a map binds each attribute once")
}

/// Replays `events` against the application `key`, whose schema must equal
/// the binning's. At each user action the current binned state is matched
/// first and learned from second, so no prediction sees its own event.
pub fn replay(
    events: &[TraceEvent],
    engine: &Engine,
    key: &IdentificationKey,
    binning: &BinningConfig,
    thresholds: Thresholds,
    algorithm: Algorithm,
    policy: ReplayPolicy,
) -> Result<ReplayReport, SyslearnError> {
    let schema = engine.snapshot(key)?.schema;
    if schema.as_ref() != Some(binning.schema()) {
        return Err(SyslearnError::SchemaMismatch(
            "application schema differs from the binning's".into(),
        ));
    }
    if let Regeneration::EveryN(0) = policy.regeneration {
        return Err(SyslearnError::InvalidSpec(
            "regeneration interval must be positive".into(),
        ));
    }
    let attribute = binning.action().attribute().to_string();
    let mut state: BTreeMap<String, Reading> = BTreeMap::new();
    let mut report = ReplayReport {
        events: events.len(),
        actions: 0,
        rows_learned: 0,
        rules: Vec::new(),
        predictions: Vec::new(),
        fired: 0,
        correct: 0,
        precision: 0.0,
        recall: 0.0,
        per_action: binning
            .action()
            .values
            .iter()
            .map(|v| (v.clone(), ActionStats::default()))
            .collect(),
    };
    let mut stale = false;

    for event in events {
        match &event.kind {
            EventKind::Sensor(update) => {
                if let Some(signal) = binning.signal(&update.name) {
                    signal.bin(&update.value)?;
                }
                state.insert(update.name.clone(), update.value.clone());
            }
            EventKind::Action(action) => {
                let item = binning.action_item(action)?;
                let row = snapshot_to_row(&state, &item, binning)?;
                report.actions += 1;
                report
                    .per_action
                    .entry(item.value.clone())
                    .or_default()
                    .occurrences += 1;

                match engine.get_current_output(key, &bound_inputs(&row)) {
                    Ok(Some(inference)) => {
                        let predicted = inference.output.get(&attribute).unwrap_or_default();
                        let correct = predicted == item.value;
                        let stats = report.per_action.entry(predicted.to_string()).or_default();
                        stats.predicted += 1;
                        if correct {
                            stats.correct += 1;
                        }
                        report.predictions.push(Prediction {
                            t: event.t,
                            rule: inference.rule,
                            confidence: inference.confidence,
                            predicted: predicted.to_string(),
                            actual: item.value.clone(),
                            correct,
                        });
                        if policy.feedback {
                            let verdict = if correct {
                                Verdict::Positive
                            } else {
                                Verdict::Negative
                            };
                            engine.send_feedback_last_gco(key, verdict)?;
                        }
                    }
                    Ok(None) | Err(EngineError::NoRulesGenerated) => {}
                    Err(e) => return Err(e.into()),
                }

                engine.set_training_data_row(key, row)?;
                report.rows_learned += 1;
                stale = true;
                match policy.regeneration {
                    Regeneration::PerRow => {
                        if engine.snapshot(key)?.mode == GenerationMode::Manual {
                            engine.generate_rules(key, thresholds, algorithm)?;
                            engine.set_generation_mode(key, GenerationMode::Automated)?;
                        }
                        stale = false;
                    }
                    Regeneration::EveryN(n) => {
                        if report.rows_learned.is_multiple_of(n) {
                            engine.generate_rules(key, thresholds, algorithm)?;
                            stale = false;
                        }
                    }
                }
            }
        }
    }
    if stale {
        engine.generate_rules(key, thresholds, algorithm)?;
    }

    report.rules = engine.snapshot(key)?.active_rules().cloned().collect();
    report.fired = report.predictions.len();
    report.correct = report.predictions.iter().filter(|p| p.correct).count();
    report.precision = fraction(report.correct, report.fired);
    report.recall = fraction(report.correct, report.actions);
    Ok(report)
}

/// Replays into a fresh engine holding a single `system` application.
pub fn replay_fresh(
    events: &[TraceEvent],
    binning: &BinningConfig,
    thresholds: Thresholds,
    algorithm: Algorithm,
    policy: ReplayPolicy,
) -> Result<ReplayReport, SyslearnError> {
    let engine = Engine::new();
    let key = engine.register_app("system")?;
    let schema = binning.schema();
    engine.set_input_output(
        &key,
        schema.inputs().cloned().collect(),
        schema.outputs().cloned().collect(),
    )?;
    replay(
        events, &engine, &key, binning, thresholds, algorithm, policy,
    )
}
