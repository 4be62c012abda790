//! Seeded synthetic traces with planted action patterns.
//!
//! A spec lists contexts (think "morning commute"); each visit to a context
//! emits its sensor readings and then a few user actions drawn from the
//! context's action distribution.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{snapshot_to_row, BinningConfig, EventKind, Reading, SyslearnError, TraceEvent};
use crate::model::{canonical_encode, Item, ItemSet};

/// How one sensor's reading is drawn on each visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SensorDraw {
    OneOf {
        one_of: Vec<Reading>,
    },
    /// Uniform minute between two `HH:MM` clock readings, inclusive.
    ClockBetween {
        clock_between: [String; 2],
    },
    /// Uniform number in `[lo, hi)`, truncated to one decimal.
    Between {
        between: [f64; 2],
    },
    Fixed(Reading),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub name: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    pub sensors: BTreeMap<String, SensorDraw>,
    /// Action value → probability; must sum to 1.
    pub actions: BTreeMap<String, f64>,
    #[serde(default = "one")]
    pub actions_per_visit: usize,
}

fn unit_weight() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

fn default_start() -> u64 {
    1_700_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub bins: BinningConfig,
    #[serde(default = "default_start")]
    pub start: u64,
    pub contexts: Vec<ContextSpec>,
    /// Extra input conditions whose action frequencies go in the sidecar.
    #[serde(default)]
    pub track: Vec<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTrace {
    pub events: Vec<TraceEvent>,
    /// `canonical(condition ∪ {action=value})` → empirical
    /// `P(action=value | condition)` over the trace's user actions.
    pub sidecar: BTreeMap<String, f64>,
}

fn parse_minutes(text: &str) -> Option<u32> {
    let (h, m) = text.split_once(':')?;
    let (h, m): (u32, u32) = (h.parse().ok()?, m.parse().ok()?);
    (h < 24 && m < 60).then_some(h * 60 + m)
}

impl SensorDraw {
    fn validate(&self) -> Result<(), String> {
        match self {
            SensorDraw::OneOf { one_of } if one_of.is_empty() => Err("empty one_of".into()),
            SensorDraw::ClockBetween {
                clock_between: [a, b],
            } => match (parse_minutes(a), parse_minutes(b)) {
                (Some(a), Some(b)) if a <= b => Ok(()),
                _ => Err(format!("bad clock range {a}..{b}")),
            },
            SensorDraw::Between { between: [lo, hi] }
                if lo.partial_cmp(hi) != Some(Ordering::Less) =>
            {
                Err(format!("empty range {lo}..{hi}"))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Reading {
        match self {
            SensorDraw::OneOf { one_of } => one_of[rng.gen_range(0..one_of.len())].clone(),
            SensorDraw::ClockBetween {
                clock_between: [a, b],
            } => {
                let lo = parse_minutes(a).expect("validated");
                let hi = parse_minutes(b).expect("validated");
                let m = rng.gen_range(lo..=hi);
                Reading::Text(format!("{:02}:{:02}", m / 60, m % 60))
            }
            SensorDraw::Between { between: [lo, hi] } => {
                let x: f64 = rng.gen_range(*lo..*hi);
                Reading::Number(((x * 10.0).floor() / 10.0).max(*lo))
            }
            SensorDraw::Fixed(r) => r.clone(),
        }
    }
}

impl TraceSpec {
    pub fn from_json(text: &str) -> Result<Self, SyslearnError> {
        let spec: TraceSpec =
            serde_json::from_str(text).map_err(|e| SyslearnError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SyslearnError> {
        let invalid = |m: String| SyslearnError::InvalidSpec(m);
        if self.contexts.is_empty() {
            return Err(invalid("no contexts".into()));
        }
        let values = &self.bins.action().values;
        for c in &self.contexts {
            let at = |m: String| invalid(format!("context `{}`: {m}", c.name));
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(at(format!("weight {} must be positive", c.weight)));
            }
            if c.actions_per_visit == 0 {
                return Err(at("actions_per_visit must be positive".into()));
            }
            for (name, draw) in &c.sensors {
                if self.bins.signal(name).is_none() {
                    return Err(at(format!("sensor `{name}` has no binning")));
                }
                draw.validate().map_err(at)?;
            }
            if c.actions.is_empty() {
                return Err(at("no actions".into()));
            }
            for (v, p) in &c.actions {
                if !values.contains(v) {
                    return Err(at(format!("action value `{v}` is not declared")));
                }
                if !(0.0..=1.0).contains(p) {
                    return Err(at(format!("probability {p} out of range")));
                }
            }
            let total: f64 = c.actions.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(at(format!("action probabilities sum to {total}")));
            }
        }
        for cond in &self.track {
            for (a, v) in cond {
                let known =
                    self.bins.schema().get(a).is_some_and(|s| {
                        s.kind() == crate::model::AttributeKind::Input && s.allows(v)
                    });
                if !known {
                    return Err(invalid(format!(
                        "tracked condition {a}={v} is not an input item"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic for a fixed `(spec, seed, len)`; emits exactly `len` events.
pub fn generate_trace(
    spec: &TraceSpec,
    seed: u64,
    len: usize,
) -> Result<GeneratedTrace, SyslearnError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick_context = WeightedIndex::new(spec.contexts.iter().map(|c| c.weight))
        .map_err(|e| SyslearnError::InvalidSpec(e.to_string()))?;
    let mut pick_action = Vec::new();
    for c in &spec.contexts {
        let values: Vec<&String> = c.actions.keys().collect();
        let dist = WeightedIndex::new(c.actions.values())
            .map_err(|e| SyslearnError::InvalidSpec(format!("context `{}`: {e}", c.name)))?;
        pick_action.push((values, dist));
    }
    let action_name = spec.bins.action().name.clone();

    let mut events = Vec::with_capacity(len);
    // per context: binned items shared by every state its actions were taken in
    let mut held: Vec<Option<ItemSet>> = vec![None; spec.contexts.len()];
    let mut state: BTreeMap<String, Reading> = BTreeMap::new();
    let mut t = spec.start;
    'visits: while events.len() < len {
        let ci = pick_context.sample(&mut rng);
        let context = &spec.contexts[ci];
        for (name, draw) in &context.sensors {
            if events.len() == len {
                break 'visits;
            }
            t += rng.gen_range(1..=30);
            let value = draw.sample(&mut rng);
            let signal = spec.bins.signal(name).expect("validated");
            signal
                .bin(&value)
                .map_err(|e| SyslearnError::InvalidSpec(e.to_string()))?;
            state.insert(name.clone(), value.clone());
            events.push(TraceEvent::sensor(t, name.clone(), value));
        }
        let (values, dist) = &pick_action[ci];
        for _ in 0..context.actions_per_visit {
            if events.len() == len {
                break 'visits;
            }
            t += rng.gen_range(5..=300);
            let value = values[dist.sample(&mut rng)].clone();
            let item = Item::new(spec.bins.action().attribute(), value.clone());
            let row = snapshot_to_row(&state, &item, &spec.bins)?;
            let bound = ItemSet::from_pairs(
                row.inputs
                    .iter()
                    .filter_map(|(a, v)| v.as_deref().map(|v| (a.as_str(), v))),
            )
            .expect("one value per attribute");
            held[ci] = Some(match held[ci].take() {
                None => bound,
                Some(prev) => prev.restrict(|a| prev.get(a) == bound.get(a)),
            });
            events.push(TraceEvent::action(t, action_name.clone(), value));
        }
        t += rng.gen_range(600..=3600);
    }

    let mut conditions: Vec<ItemSet> = spec
        .track
        .iter()
        .map(|c| ItemSet::from_pairs(c.iter().map(|(a, v)| (a.as_str(), v.as_str()))).expect("map"))
        .collect();
    conditions.extend(held.into_iter().flatten());
    let sidecar = empirical_frequencies(&events, &spec.bins, &conditions)?;
    Ok(GeneratedTrace { events, sidecar })
}

/// For each condition and each declared action value, the fraction of user
/// actions taken in a state containing the condition that had that value.
/// Conditions never met are left out.
pub fn empirical_frequencies(
    events: &[TraceEvent],
    bins: &BinningConfig,
    conditions: &[ItemSet],
) -> Result<BTreeMap<String, f64>, SyslearnError> {
    let mut seen = vec![0u64; conditions.len()];
    let mut hits: Vec<BTreeMap<&str, u64>> = vec![BTreeMap::new(); conditions.len()];
    let mut state: BTreeMap<String, Reading> = BTreeMap::new();
    for event in events {
        match &event.kind {
            EventKind::Sensor(u) => {
                state.insert(u.name.clone(), u.value.clone());
            }
            EventKind::Action(a) => {
                let item = bins.action_item(a)?;
                let row = snapshot_to_row(&state, &item, bins)?;
                for (i, cond) in conditions.iter().enumerate() {
                    if cond.iter().all(|(k, v)| row.input(k) == Some(v)) {
                        seen[i] += 1;
                        let value = bins
                            .action()
                            .values
                            .iter()
                            .find(|v| **v == item.value)
                            .expect("action_item checked the value");
                        *hits[i].entry(value.as_str()).or_default() += 1;
                    }
                }
            }
        }
    }
    let attribute = bins.action().attribute();
    let mut out = BTreeMap::new();
    for (i, cond) in conditions.iter().enumerate() {
        if seen[i] == 0 {
            continue;
        }
        for value in &bins.action().values {
            let mut key = cond.clone();
            key.insert(Item::new(attribute, value.clone()))
                .map_err(|e| SyslearnError::InvalidSpec(e.to_string()))?;
            let n = hits[i].get(value.as_str()).copied().unwrap_or(0);
            out.insert(canonical_encode(&key), n as f64 / seen[i] as f64);
        }
    }
    Ok(out)
}
