//! System-level learning: the whole device acts as one client application.
//!
//! Sensor readings are discretized into input items by a [`BinningConfig`],
//! user actions become the output, and a timestamped trace is replayed
//! against an engine to learn and score predictions offline.

mod replay;
mod tracegen;

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EngineError;
use crate::model::{AttributeSchema, Item, Schema, TrainingRow};

pub use replay::{
    replay, replay_fresh, ActionStats, Prediction, Regeneration, ReplayPolicy, ReplayReport,
};
pub use tracegen::{empirical_frequencies, generate_trace, GeneratedTrace, TraceSpec};

#[derive(Debug, Error)]
pub enum SyslearnError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: timestamp {t} is earlier than {previous}")]
    TimestampRegression { line: usize, t: u64, previous: u64 },
    #[error("signal `{signal}`: value {value} falls outside every bin")]
    UnbinnableValue { signal: String, value: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("invalid trace spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("trace i/o failed: {0}")]
    Io(#[from] std::io::Error),
}

impl SyslearnError {
    pub fn code(&self) -> &'static str {
        match self {
            SyslearnError::MalformedLine { .. } => "malformed-line",
            SyslearnError::TimestampRegression { .. } => "timestamp-regression",
            SyslearnError::UnbinnableValue { .. } => "unbinnable-value",
            SyslearnError::SchemaMismatch(_) => "schema-mismatch",
            SyslearnError::InvalidBinning(_) => "invalid-binning",
            SyslearnError::InvalidSpec(_) => "invalid-spec",
            SyslearnError::Engine(e) => e.code(),
            SyslearnError::Io(_) => "io-error",
        }
    }
}

/// A raw sensor value: a number or a piece of text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reading {
    Number(f64),
    Text(String),
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reading::Number(x) => write!(f, "{x}"),
            Reading::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorUpdate {
    pub name: String,
    pub value: Reading,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAction {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Sensor(SensorUpdate),
    Action(UserAction),
}

/// One trace line: `{"t":..,"sensor":{..}}` or `{"t":..,"action":{..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub t: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl TraceEvent {
    pub fn sensor(t: u64, name: impl Into<String>, value: Reading) -> Self {
        TraceEvent {
            t,
            kind: EventKind::Sensor(SensorUpdate {
                name: name.into(),
                value,
            }),
        }
    }

    pub fn action(t: u64, name: impl Into<String>, value: impl Into<String>) -> Self {
        TraceEvent {
            t,
            kind: EventKind::Action(UserAction {
                name: name.into(),
                value: value.into(),
            }),
        }
    }
}

/// Reads a JSON-lines trace. Blank lines are skipped.
pub fn parse_trace(reader: impl BufRead) -> Result<Vec<TraceEvent>, SyslearnError> {
    let mut events: Vec<TraceEvent> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: TraceEvent =
            serde_json::from_str(&line).map_err(|e| SyslearnError::MalformedLine {
                line: i + 1,
                message: e.to_string(),
            })?;
        if let Some(prev) = events.last() {
            if event.t < prev.t {
                return Err(SyslearnError::TimestampRegression {
                    line: i + 1,
                    t: event.t,
                    previous: prev.t,
                });
            }
        }
        events.push(event);
    }
    Ok(events)
}

pub fn write_trace(events: &[TraceEvent], out: &mut impl std::io::Write) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut *out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// One closed-open numeric interval `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericBin {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// `"HH:MM"` readings cut into equal bins from midnight. One-hour bins
    /// are labelled `"08"`, narrower or wider ones by their start `"08:30"`.
    TimeOfDay {
        #[serde(default = "default_width")]
        width_minutes: u32,
    },
    Numeric {
        bins: Vec<NumericBin>,
    },
    /// Text readings passed through unchanged, restricted to `values`.
    Categorical {
        values: Vec<String>,
    },
}

fn default_width() -> u32 {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalBinning {
    /// Sensor name as it appears in the trace.
    pub name: String,
    /// Input attribute the binned value lands in; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(flatten)]
    pub binning: Binning,
}

impl SignalBinning {
    pub fn attribute(&self) -> &str {
        self.attribute.as_deref().unwrap_or(&self.name)
    }

    /// Every label this signal can produce, in bin order.
    pub fn labels(&self) -> Vec<String> {
        match &self.binning {
            Binning::TimeOfDay { width_minutes } => (0..24 * 60)
                .step_by(*width_minutes as usize)
                .map(|start| time_label(start, *width_minutes))
                .collect(),
            Binning::Numeric { bins } => bins.iter().map(|b| b.label.clone()).collect(),
            Binning::Categorical { values } => values.clone(),
        }
    }

    pub fn bin(&self, value: &Reading) -> Result<String, SyslearnError> {
        let unbinnable = || SyslearnError::UnbinnableValue {
            signal: self.name.clone(),
            value: value.to_string(),
        };
        match (&self.binning, value) {
            (Binning::TimeOfDay { width_minutes }, Reading::Text(text)) => {
                let minutes = parse_clock(text).ok_or_else(unbinnable)?;
                let start = minutes - minutes % width_minutes;
                Ok(time_label(start, *width_minutes))
            }
            (Binning::Numeric { bins }, Reading::Number(x)) => bins
                .iter()
                .find(|b| b.lo <= *x && *x < b.hi)
                .map(|b| b.label.clone())
                .ok_or_else(unbinnable),
            (Binning::Categorical { values }, Reading::Text(text)) => values
                .iter()
                .find(|v| *v == text)
                .cloned()
                .ok_or_else(unbinnable),
            _ => Err(unbinnable()),
        }
    }

    fn validate(&self) -> Result<(), String> {
        match &self.binning {
            Binning::TimeOfDay { width_minutes } => {
                if *width_minutes == 0 || 1440 % width_minutes != 0 {
                    return Err(format!(
                        "{}: width_minutes {width_minutes} must divide a day",
                        self.name
                    ));
                }
            }
            Binning::Numeric { bins } => {
                if bins.is_empty() {
                    return Err(format!("{}: no bins", self.name));
                }
                for b in bins {
                    if b.lo.partial_cmp(&b.hi) != Some(std::cmp::Ordering::Less) {
                        return Err(format!("{}: bin `{}` is empty", self.name, b.label));
                    }
                }
                for pair in bins.windows(2) {
                    if pair[0].hi != pair[1].lo {
                        return Err(format!(
                            "{}: bins `{}` and `{}` are not contiguous",
                            self.name, pair[0].label, pair[1].label
                        ));
                    }
                }
            }
            Binning::Categorical { values } => {
                if values.is_empty() {
                    return Err(format!("{}: no values", self.name));
                }
            }
        }
        let labels = self.labels();
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(format!("{}: labels are not unique", self.name));
        }
        Ok(())
    }
}

fn time_label(start: u32, width: u32) -> String {
    if width == 60 {
        format!("{:02}", start / 60)
    } else {
        format!("{:02}:{:02}", start / 60, start % 60)
    }
}

/// Minutes since midnight of an `HH:MM` or `HH:MM:SS` clock reading.
fn parse_clock(text: &str) -> Option<u32> {
    let mut parts = text.split(':');
    let h: u32 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let s: u32 = match parts.next() {
        Some(s) => s.parse().ok()?,
        None => 0,
    };
    (parts.next().is_none() && h < 24 && m < 60 && s < 60).then_some(h * 60 + m)
}

/// The single output channel: trace actions named `name` become values of
/// `attribute`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBinding {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    pub values: Vec<String>,
}

impl ActionBinding {
    pub fn attribute(&self) -> &str {
        self.attribute.as_deref().unwrap_or(&self.name)
    }
}

/// How raw signals map onto the system application's schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBinning", into = "RawBinning")]
pub struct BinningConfig {
    signals: Vec<SignalBinning>,
    action: ActionBinding,
    schema: Schema,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawBinning {
    signals: Vec<SignalBinning>,
    action: ActionBinding,
}

impl TryFrom<RawBinning> for BinningConfig {
    type Error = SyslearnError;

    fn try_from(raw: RawBinning) -> Result<Self, Self::Error> {
        BinningConfig::new(raw.signals, raw.action)
    }
}

impl From<BinningConfig> for RawBinning {
    fn from(b: BinningConfig) -> Self {
        RawBinning {
            signals: b.signals,
            action: b.action,
        }
    }
}

impl BinningConfig {
    pub fn new(signals: Vec<SignalBinning>, action: ActionBinding) -> Result<Self, SyslearnError> {
        let invalid = SyslearnError::InvalidBinning;
        for s in &signals {
            s.validate().map_err(invalid)?;
        }
        for (i, s) in signals.iter().enumerate() {
            if signals[..i].iter().any(|o| o.name == s.name) {
                return Err(invalid(format!("signal `{}` declared twice", s.name)));
            }
        }
        let inputs = signals
            .iter()
            .map(|s| AttributeSchema::input(s.attribute(), s.labels()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(e.to_string()))?;
        let output = AttributeSchema::output(action.attribute(), action.values.iter().cloned())
            .map_err(|e| invalid(e.to_string()))?;
        let schema =
            Schema::from_parts(inputs, vec![output]).map_err(|e| invalid(e.to_string()))?;
        Ok(BinningConfig {
            signals,
            action,
            schema,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, SyslearnError> {
        serde_json::from_str(text).map_err(|e| SyslearnError::InvalidBinning(e.to_string()))
    }

    pub fn signals(&self) -> &[SignalBinning] {
        &self.signals
    }

    pub fn action(&self) -> &ActionBinding {
        &self.action
    }

    /// The system application's schema: one input per signal, one output.
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn signal(&self, name: &str) -> Option<&SignalBinning> {
        self.signals.iter().find(|s| s.name == name)
    }

    /// Output item for a trace action, checking name and value.
    pub fn action_item(&self, action: &UserAction) -> Result<Item, SyslearnError> {
        if action.name != self.action.name {
            return Err(SyslearnError::SchemaMismatch(format!(
                "action `{}` is not bound (expected `{}`)",
                action.name, self.action.name
            )));
        }
        if !self.action.values.contains(&action.value) {
            return Err(SyslearnError::UnbinnableValue {
                signal: action.name.clone(),
                value: format!("{:?}", action.value),
            });
        }
        Ok(Item::new(self.action.attribute(), action.value.clone()))
    }
}

/// Bins a raw sensor state into a training row labelled with `action`.
/// Signals without a reading stay null; readings of undeclared signals are
/// ignored.
pub fn snapshot_to_row(
    state: &BTreeMap<String, Reading>,
    action: &Item,
    binning: &BinningConfig,
) -> Result<TrainingRow, SyslearnError> {
    if action.attribute != binning.action.attribute() {
        return Err(SyslearnError::SchemaMismatch(format!(
            "`{}` is not the output attribute",
            action.attribute
        )));
    }
    let mut inputs = BTreeMap::new();
    for s in &binning.signals {
        let value = state.get(&s.name).map(|r| s.bin(r)).transpose()?;
        inputs.insert(s.attribute().to_string(), value);
    }
    Ok(TrainingRow {
        inputs,
        outputs: [(action.attribute.clone(), action.value.clone())].into(),
        weight: 1,
    })
}
