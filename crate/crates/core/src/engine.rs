//! Multi-tenant rule engine: one isolated [`AppContext`] per registered
//! application, addressed by its [`IdentificationKey`].
//!
//! The request set mirrors the module API an application drives:
//! register, declare inputs/outputs, feed rows, generate rules, query the
//! current output, send feedback, delete data and migrate the schema.
//!
//! Requests against one key are serialized by that context's mutex; requests
//! for different keys only share the registry read lock.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::{mine_rules, Algorithm, MineError};
use crate::model::{
    validate_row, AttributeKind, AttributeSchema, Dataset, IdentificationKey, ItemSet, Rule,
    Schema, SchemaError, Thresholds, TrainingRow, ValidationError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("application name must be nonempty")]
    EmptyName,
    #[error("application `{0}` is already registered")]
    DuplicateName(String),
    #[error("no application is registered under key `{0}`")]
    UnknownKey(String),
    #[error("inputs and outputs are already set; use change_inputs_outputs")]
    SchemaAlreadySet,
    #[error(transparent)]
    InvalidSchema(#[from] SchemaError),
    #[error("inputs and outputs have not been set")]
    NoSchema,
    #[error("row {row}: {source}")]
    Validation {
        row: usize,
        #[source]
        source: ValidationError,
    },
    #[error("training data set is empty")]
    EmptyTrainingData,
    #[error("automated mode needs a prior generate_rules call")]
    NoGenerationConfig,
    #[error("rules have not been generated")]
    NoRulesGenerated,
    #[error("no get_current_output result is awaiting feedback")]
    NoPendingGco,
    #[error("the rule behind the last get_current_output is no longer stored")]
    RuleEvicted,
    #[error("`{0}` is not an input attribute")]
    InvalidAttribute(String),
    #[error(transparent)]
    Mining(MineError),
}

impl EngineError {
    /// Stable text identifier used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::EmptyName => "empty-name",
            EngineError::DuplicateName(_) => "duplicate-name",
            EngineError::UnknownKey(_) => "unknown-key",
            EngineError::SchemaAlreadySet => "schema-already-set",
            EngineError::InvalidSchema(_) => "invalid-schema",
            EngineError::NoSchema => "no-schema",
            EngineError::Validation { .. } => "validation-error",
            EngineError::EmptyTrainingData => "empty-training-data",
            EngineError::NoGenerationConfig => "no-generation-config",
            EngineError::NoRulesGenerated => "no-rules-generated",
            EngineError::NoPendingGco => "no-pending-gco",
            EngineError::RuleEvicted => "rule-evicted",
            EngineError::InvalidAttribute(_) => "invalid-attribute",
            EngineError::Mining(e) => e.code(),
        }
    }
}

impl From<MineError> for EngineError {
    fn from(e: MineError) -> Self {
        match e {
            MineError::EmptyDataset => EngineError::EmptyTrainingData,
            other => EngineError::Mining(other),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerationMode {
    Automated,
    #[default]
    Manual,
}

/// Thresholds and algorithm of the most recent `generate_rules`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub thresholds: Thresholds,
    pub algorithm: Algorithm,
}

/// A mined rule plus the feedback overlay: its confidence may have been
/// adjusted, and it stops matching once `active` is false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRule {
    #[serde(flatten)]
    pub rule: Rule,
    pub active: bool,
}

/// Identity of a rule: antecedent and consequent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRef {
    pub antecedent: ItemSet,
    pub consequent: ItemSet,
}

impl RuleRef {
    fn matches(&self, rule: &Rule) -> bool {
        self.antecedent == rule.antecedent && self.consequent == rule.consequent
    }
}

/// What the last successful `get_current_output` matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LastGco {
    pub inputs: ItemSet,
    pub rule: RuleRef,
    /// Rule-set generation the match was made against.
    pub generation: u64,
    pub at_ms: u64,
}

/// Result of a matched `get_current_output`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub output: ItemSet,
    pub confidence: f64,
    pub support: f64,
    pub rule: RuleRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackOutcome {
    pub confidence: f64,
    pub active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeleteMode {
    First,
    All,
}

/// Confidence adjustment applied by feedback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackPolicy {
    pub positive_delta: f64,
    pub negative_delta: f64,
    pub floor: f64,
    pub ceiling: f64,
}

impl Default for FeedbackPolicy {
    fn default() -> Self {
        FeedbackPolicy {
            positive_delta: 0.05,
            negative_delta: 0.10,
            floor: 0.0,
            ceiling: 1.0,
        }
    }
}

impl FeedbackPolicy {
    pub fn new(positive_delta: f64, negative_delta: f64) -> Option<Self> {
        let unit = |d: f64| d > 0.0 && d < 1.0;
        (unit(positive_delta) && unit(negative_delta)).then(|| FeedbackPolicy {
            positive_delta,
            negative_delta,
            ..FeedbackPolicy::default()
        })
    }

    fn apply(&self, confidence: f64, verdict: Verdict) -> f64 {
        let moved = match verdict {
            Verdict::Positive => confidence + self.positive_delta,
            Verdict::Negative => confidence - self.negative_delta,
        };
        moved.clamp(self.floor, self.ceiling)
    }
}

/// Per-attribute summary of a schema change.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationReport {
    pub dropped_columns: Vec<String>,
    pub added_inputs: Vec<String>,
    pub added_outputs: Vec<String>,
    pub retained_rows: usize,
    pub quarantined_rows: usize,
}

/// Everything the engine knows about one application.
#[derive(Debug, Clone, PartialEq)]
pub struct AppContext {
    pub key: IdentificationKey,
    pub name: String,
    pub schema: Option<Schema>,
    /// Minable rows in insertion order.
    pub rows: Vec<TrainingRow>,
    /// Rows invalidated by a schema change: kept, never mined.
    pub quarantine: Vec<TrainingRow>,
    /// `None` until the first `generate_rules`, and again after a schema change.
    pub rules: Option<Vec<StoredRule>>,
    pub mode: GenerationMode,
    pub config: Option<GenerationConfig>,
    /// Bumped whenever the stored rule set is replaced or invalidated.
    pub generation: u64,
    pub last_gco: Option<LastGco>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl AppContext {
    pub fn new(key: IdentificationKey, name: impl Into<String>) -> Self {
        AppContext {
            key,
            name: name.into(),
            schema: None,
            rows: Vec::new(),
            quarantine: Vec::new(),
            rules: None,
            mode: GenerationMode::Manual,
            config: None,
            generation: 0,
            last_gco: None,
        }
    }

    fn schema(&self) -> Result<&Schema, EngineError> {
        self.schema.as_ref().ok_or(EngineError::NoSchema)
    }

    /// The minable rows as a dataset.
    pub fn dataset(&self) -> Result<Dataset, EngineError> {
        let schema = self.schema()?.clone();
        Dataset::with_rows(schema, self.rows.clone())
            .map_err(|(row, source)| EngineError::Validation { row, source })
    }

    pub fn active_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules
            .iter()
            .flatten()
            .filter(|r| r.active)
            .map(|r| &r.rule)
    }

    pub fn set_input_output(
        &mut self,
        inputs: Vec<AttributeSchema>,
        outputs: Vec<AttributeSchema>,
    ) -> Result<(), EngineError> {
        if self.schema.is_some() {
            return Err(EngineError::SchemaAlreadySet);
        }
        self.schema = Some(Schema::from_parts(inputs, outputs)?);
        self.rows.clear();
        self.quarantine.clear();
        Ok(())
    }

    /// Validates the whole batch before appending any of it.
    pub fn load_training_data(&mut self, rows: Vec<TrainingRow>) -> Result<usize, EngineError> {
        let schema = self.schema()?;
        for (row, r) in rows.iter().enumerate() {
            validate_row(schema, r).map_err(|source| EngineError::Validation { row, source })?;
        }
        let accepted = rows.len();
        if accepted == 0 {
            return Ok(0);
        }
        self.rows.extend(rows);
        self.after_insert()?;
        Ok(accepted)
    }

    pub fn set_training_data_row(&mut self, row: TrainingRow) -> Result<(), EngineError> {
        validate_row(self.schema()?, &row)
            .map_err(|source| EngineError::Validation { row: 0, source })?;
        self.rows.push(row);
        self.after_insert()
    }

    fn after_insert(&mut self) -> Result<(), EngineError> {
        if self.mode == GenerationMode::Automated {
            if let Some(config) = self.config {
                self.regenerate(config)?;
            }
        }
        Ok(())
    }

    fn regenerate(&mut self, config: GenerationConfig) -> Result<Vec<Rule>, EngineError> {
        let data = self.dataset()?;
        if data.is_empty() {
            return Err(EngineError::EmptyTrainingData);
        }
        let (rules, _) = mine_rules(&data, config.thresholds, config.algorithm)?;
        self.rules = Some(
            rules
                .iter()
                .cloned()
                .map(|rule| StoredRule { rule, active: true })
                .collect(),
        );
        self.config = Some(config);
        self.generation += 1;
        Ok(rules)
    }

    /// Mines afresh, replacing stored rules and any feedback adjustments.
    pub fn generate_rules(
        &mut self,
        thresholds: Thresholds,
        algorithm: Algorithm,
    ) -> Result<Vec<Rule>, EngineError> {
        self.schema()?;
        self.regenerate(GenerationConfig {
            thresholds,
            algorithm,
        })
    }

    pub fn set_generation_mode(&mut self, mode: GenerationMode) -> Result<(), EngineError> {
        if mode == GenerationMode::Automated && self.config.is_none() {
            return Err(EngineError::NoGenerationConfig);
        }
        self.mode = mode;
        Ok(())
    }

    fn check_inputs<'a>(
        &self,
        attributes: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), EngineError> {
        let schema = self.schema()?;
        for a in attributes {
            if schema.kind_of(a) != Some(AttributeKind::Input) {
                return Err(EngineError::InvalidAttribute(a.to_string()));
            }
        }
        Ok(())
    }

    /// Best active rule whose antecedent is contained in `inputs`, ranked by
    /// confidence, then support, then antecedent size, then canonical
    /// encoding. `Ok(None)` is the null result.
    pub fn get_current_output(
        &mut self,
        inputs: &ItemSet,
    ) -> Result<Option<Inference>, EngineError> {
        if self.rules.is_none() {
            return Err(EngineError::NoRulesGenerated);
        }
        self.check_inputs(inputs.attributes())?;
        let best = self
            .active_rules()
            .filter(|r| !r.antecedent.is_empty() && r.antecedent.is_subset_of(inputs))
            .max_by(|a, b| match_rank(a, b));
        let Some(best) = best else {
            self.last_gco = None;
            return Ok(None);
        };
        let rule = RuleRef {
            antecedent: best.antecedent.clone(),
            consequent: best.consequent.clone(),
        };
        let inference = Inference {
            output: best.consequent.clone(),
            confidence: best.confidence,
            support: best.support,
            rule: rule.clone(),
        };
        self.last_gco = Some(LastGco {
            inputs: inputs.clone(),
            rule,
            generation: self.generation,
            at_ms: now_ms(),
        });
        Ok(Some(inference))
    }

    /// Moves the confidence of the last matched rule and consumes the record.
    pub fn send_feedback_last_gco(
        &mut self,
        verdict: Verdict,
        policy: &FeedbackPolicy,
    ) -> Result<FeedbackOutcome, EngineError> {
        let last = self.last_gco.take().ok_or(EngineError::NoPendingGco)?;
        if last.generation != self.generation {
            return Err(EngineError::RuleEvicted);
        }
        let min_confidence = self
            .config
            .map(|c| c.thresholds.min_confidence())
            .unwrap_or(0.0);
        let stored = self
            .rules
            .iter_mut()
            .flatten()
            .find(|r| last.rule.matches(&r.rule))
            .ok_or(EngineError::RuleEvicted)?;
        stored.rule.confidence = policy.apply(stored.rule.confidence, verdict);
        stored.active = stored.rule.confidence >= min_confidence;
        Ok(FeedbackOutcome {
            confidence: stored.rule.confidence,
            active: stored.active,
        })
    }

    /// Clears all training rows, quarantined ones included. Rules stay until
    /// the next generation.
    pub fn delete_training_data(&mut self) {
        self.rows.clear();
        self.quarantine.clear();
    }

    /// Deletes rows whose inputs agree with `pattern` on every listed
    /// attribute (`None` matches an unbound input).
    pub fn delete_training_data_row(
        &mut self,
        pattern: &BTreeMap<String, Option<String>>,
        mode: DeleteMode,
    ) -> Result<usize, EngineError> {
        self.check_inputs(pattern.keys().map(String::as_str))?;
        let hit = |row: &TrainingRow| pattern.iter().all(|(a, v)| row.input(a) == v.as_deref());
        match mode {
            DeleteMode::First => match self.rows.iter().position(hit) {
                Some(i) => {
                    self.rows.remove(i);
                    Ok(1)
                }
                None => Ok(0),
            },
            DeleteMode::All => {
                let before = self.rows.len();
                self.rows.retain(|r| !hit(r));
                Ok(before - self.rows.len())
            }
        }
    }

    /// Installs a new schema and migrates stored rows: dropped attributes are
    /// removed, new inputs become null, and rows that no longer validate
    /// (a new output, a shrunk domain) move to quarantine. Stored rules are
    /// invalidated.
    pub fn change_inputs_outputs(
        &mut self,
        inputs: Vec<AttributeSchema>,
        outputs: Vec<AttributeSchema>,
    ) -> Result<MigrationReport, EngineError> {
        let new = Schema::from_parts(inputs, outputs)?;
        let old = self.schema()?;
        let same = |a: &AttributeSchema, s: &Schema| s.kind_of(a.name()) == Some(a.kind());
        let mut report = MigrationReport {
            dropped_columns: old
                .attributes()
                .iter()
                .filter(|a| !same(a, &new))
                .map(|a| a.name().to_string())
                .collect(),
            ..MigrationReport::default()
        };
        for a in new.attributes().iter().filter(|a| !same(a, old)) {
            match a.kind() {
                AttributeKind::Input => report.added_inputs.push(a.name().to_string()),
                AttributeKind::Output => report.added_outputs.push(a.name().to_string()),
            }
        }

        let migrate = |mut row: TrainingRow| {
            row.inputs
                .retain(|a, _| new.kind_of(a) == Some(AttributeKind::Input));
            row.outputs
                .retain(|a, _| new.kind_of(a) == Some(AttributeKind::Output));
            for a in &report.added_inputs {
                row.inputs.entry(a.clone()).or_insert(None);
            }
            row
        };
        let mut kept = Vec::with_capacity(self.rows.len());
        let mut quarantine: Vec<TrainingRow> = self.quarantine.drain(..).map(&migrate).collect();
        for row in self.rows.drain(..).map(&migrate) {
            if validate_row(&new, &row).is_ok() {
                kept.push(row);
            } else {
                report.quarantined_rows += 1;
                quarantine.push(row);
            }
        }
        report.retained_rows = kept.len();
        self.rows = kept;
        self.quarantine = quarantine;
        self.schema = Some(new);
        self.rules = None;
        self.generation += 1;
        Ok(report)
    }
}

fn match_rank(a: &Rule, b: &Rule) -> std::cmp::Ordering {
    a.confidence
        .total_cmp(&b.confidence)
        .then_with(|| a.support.total_cmp(&b.support))
        .then_with(|| a.antecedent.len().cmp(&b.antecedent.len()))
        // smaller canonical encoding ranks higher
        .then_with(|| b.identity().cmp(&a.identity()))
}

#[derive(Default)]
struct Registry {
    apps: BTreeMap<IdentificationKey, Arc<Mutex<AppContext>>>,
    names: BTreeMap<String, IdentificationKey>,
}

/// The registry of application contexts.
#[derive(Default)]
pub struct Engine {
    policy: FeedbackPolicy,
    registry: RwLock<Registry>,
}

impl Engine {
    pub fn new() -> Self {
        Engine::default()
    }

    pub fn with_policy(policy: FeedbackPolicy) -> Self {
        Engine {
            policy,
            registry: RwLock::default(),
        }
    }

    /// Rebuilds an engine from previously persisted contexts.
    pub fn from_contexts(
        contexts: impl IntoIterator<Item = AppContext>,
        policy: FeedbackPolicy,
    ) -> Result<Self, EngineError> {
        let mut registry = Registry::default();
        for ctx in contexts {
            if registry.names.contains_key(&ctx.name) {
                return Err(EngineError::DuplicateName(ctx.name));
            }
            registry.names.insert(ctx.name.clone(), ctx.key.clone());
            registry
                .apps
                .insert(ctx.key.clone(), Arc::new(Mutex::new(ctx)));
        }
        Ok(Engine {
            policy,
            registry: RwLock::new(registry),
        })
    }

    pub fn policy(&self) -> &FeedbackPolicy {
        &self.policy
    }

    pub fn register_app(&self, name: &str) -> Result<IdentificationKey, EngineError> {
        if name.is_empty() {
            return Err(EngineError::EmptyName);
        }
        let mut registry = self.registry.write();
        if registry.names.contains_key(name) {
            return Err(EngineError::DuplicateName(name.to_string()));
        }
        let key = loop {
            let candidate = IdentificationKey::generate();
            if !registry.apps.contains_key(&candidate) {
                break candidate;
            }
        };
        registry.names.insert(name.to_string(), key.clone());
        registry.apps.insert(
            key.clone(),
            Arc::new(Mutex::new(AppContext::new(key.clone(), name))),
        );
        Ok(key)
    }

    fn context(&self, key: &IdentificationKey) -> Result<Arc<Mutex<AppContext>>, EngineError> {
        self.registry
            .read()
            .apps
            .get(key)
            .cloned()
            .ok_or_else(|| EngineError::UnknownKey(key.to_string()))
    }

    /// Runs `f` with exclusive access to one application's context.
    pub fn with_app<R>(
        &self,
        key: &IdentificationKey,
        f: impl FnOnce(&mut AppContext) -> R,
    ) -> Result<R, EngineError> {
        let ctx = self.context(key)?;
        let mut guard = ctx.lock();
        Ok(f(&mut guard))
    }

    fn run<R>(
        &self,
        key: &IdentificationKey,
        f: impl FnOnce(&mut AppContext) -> Result<R, EngineError>,
    ) -> Result<R, EngineError> {
        self.with_app(key, f)?
    }

    pub fn key_for(&self, name: &str) -> Option<IdentificationKey> {
        self.registry.read().names.get(name).cloned()
    }

    pub fn keys(&self) -> Vec<IdentificationKey> {
        self.registry.read().apps.keys().cloned().collect()
    }

    /// A copy of one context.
    pub fn snapshot(&self, key: &IdentificationKey) -> Result<AppContext, EngineError> {
        self.with_app(key, |ctx| ctx.clone())
    }

    /// Copies of every context, ordered by key.
    pub fn snapshots(&self) -> Vec<AppContext> {
        let apps: Vec<_> = self.registry.read().apps.values().cloned().collect();
        apps.iter().map(|ctx| ctx.lock().clone()).collect()
    }

    pub fn set_input_output(
        &self,
        key: &IdentificationKey,
        inputs: Vec<AttributeSchema>,
        outputs: Vec<AttributeSchema>,
    ) -> Result<(), EngineError> {
        self.run(key, |ctx| ctx.set_input_output(inputs, outputs))
    }

    pub fn load_training_data(
        &self,
        key: &IdentificationKey,
        rows: Vec<TrainingRow>,
    ) -> Result<usize, EngineError> {
        self.run(key, |ctx| ctx.load_training_data(rows))
    }

    pub fn set_training_data_row(
        &self,
        key: &IdentificationKey,
        row: TrainingRow,
    ) -> Result<(), EngineError> {
        self.run(key, |ctx| ctx.set_training_data_row(row))
    }

    pub fn generate_rules(
        &self,
        key: &IdentificationKey,
        thresholds: Thresholds,
        algorithm: Algorithm,
    ) -> Result<Vec<Rule>, EngineError> {
        self.run(key, |ctx| ctx.generate_rules(thresholds, algorithm))
    }

    pub fn set_generation_mode(
        &self,
        key: &IdentificationKey,
        mode: GenerationMode,
    ) -> Result<(), EngineError> {
        self.run(key, |ctx| ctx.set_generation_mode(mode))
    }

    pub fn get_current_output(
        &self,
        key: &IdentificationKey,
        inputs: &ItemSet,
    ) -> Result<Option<Inference>, EngineError> {
        self.run(key, |ctx| ctx.get_current_output(inputs))
    }

    pub fn send_feedback_last_gco(
        &self,
        key: &IdentificationKey,
        verdict: Verdict,
    ) -> Result<FeedbackOutcome, EngineError> {
        let policy = self.policy;
        self.run(key, |ctx| ctx.send_feedback_last_gco(verdict, &policy))
    }

    pub fn delete_training_data(&self, key: &IdentificationKey) -> Result<(), EngineError> {
        self.with_app(key, |ctx| ctx.delete_training_data())
    }

    pub fn delete_training_data_row(
        &self,
        key: &IdentificationKey,
        pattern: &BTreeMap<String, Option<String>>,
        mode: DeleteMode,
    ) -> Result<usize, EngineError> {
        self.run(key, |ctx| ctx.delete_training_data_row(pattern, mode))
    }

    pub fn change_inputs_outputs(
        &self,
        key: &IdentificationKey,
        inputs: Vec<AttributeSchema>,
        outputs: Vec<AttributeSchema>,
    ) -> Result<MigrationReport, EngineError> {
        self.run(key, |ctx| ctx.change_inputs_outputs(inputs, outputs))
    }
}
