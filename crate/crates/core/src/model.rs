//! Domain types shared by every layer: attribute schemas, items and itemsets,
//! training rows, rules, thresholds and identification keys.
//!
//! Everything here is a plain immutable value once constructed. Attributes are
//! categorical with a finite declared domain; continuous signals are binned
//! before they reach this layer (see [`crate::syslearn::binning`]).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::Alphanumeric;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Whether an attribute is fed to the engine or predicted by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Input,
    Output,
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::Input => "input",
            AttributeKind::Output => "output",
        })
    }
}

/// Schema construction failures. All of them surface as `invalid-schema`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("attribute name must be nonempty and free of ':', '{{', '}}' and ','")]
    BadName(String),
    #[error("attribute `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("attribute `{attribute}` has an invalid domain value `{value}`")]
    BadValue { attribute: String, value: String },
    #[error("attribute `{attribute}` repeats domain value `{value}`")]
    DuplicateValue { attribute: String, value: String },
    #[error("attribute `{0}` declared more than once")]
    DuplicateAttribute(String),
    #[error("schema needs at least one input and one output attribute")]
    MissingKind,
    #[error("attribute `{name}` is declared as {found} but was listed as {expected}")]
    WrongKind {
        name: String,
        expected: AttributeKind,
        found: AttributeKind,
    },
    #[error("malformed attribute literal `{0}` (expected name:kind:{{v1,v2,...}})")]
    Literal(String),
}

impl SchemaError {
    pub fn code(&self) -> &'static str {
        "invalid-schema"
    }
}

fn valid_token(s: &str) -> bool {
    !s.is_empty() && !s.contains([':', '{', '}', ','])
}

/// A named categorical attribute with its ordered value domain.
///
/// The text literal form is `name:kind:{v1,v2,...}`, used in files and on the
/// wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AttributeSchema {
    name: String,
    kind: AttributeKind,
    domain: Vec<String>,
}

impl AttributeSchema {
    pub fn new<N, I, V>(name: N, kind: AttributeKind, domain: I) -> Result<Self, SchemaError>
    where
        N: Into<String>,
        I: IntoIterator<Item = V>,
        V: Into<String>,
    {
        let name = name.into();
        if !valid_token(&name) {
            return Err(SchemaError::BadName(name));
        }
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.is_empty() {
            return Err(SchemaError::EmptyDomain(name));
        }
        for (i, value) in domain.iter().enumerate() {
            if !valid_token(value) || value.trim() != value {
                return Err(SchemaError::BadValue {
                    attribute: name,
                    value: value.clone(),
                });
            }
            if domain[..i].contains(value) {
                return Err(SchemaError::DuplicateValue {
                    attribute: name,
                    value: value.clone(),
                });
            }
        }
        Ok(AttributeSchema { name, kind, domain })
    }

    pub fn input<N: Into<String>, V: Into<String>>(
        name: N,
        domain: impl IntoIterator<Item = V>,
    ) -> Result<Self, SchemaError> {
        Self::new(name, AttributeKind::Input, domain)
    }

    pub fn output<N: Into<String>, V: Into<String>>(
        name: N,
        domain: impl IntoIterator<Item = V>,
    ) -> Result<Self, SchemaError> {
        Self::new(name, AttributeKind::Output, domain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AttributeKind {
        self.kind
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn allows(&self, value: &str) -> bool {
        self.domain.iter().any(|v| v == value)
    }

    /// Position of `value` in the declared domain.
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

impl fmt::Display for AttributeSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{{{}}}",
            self.name,
            self.kind,
            self.domain.join(",")
        )
    }
}

impl FromStr for AttributeSchema {
    type Err = SchemaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SchemaError::Literal(s.to_string());
        let (name, rest) = s.split_once(':').ok_or_else(bad)?;
        let (kind, domain) = rest.split_once(':').ok_or_else(bad)?;
        let kind = match kind {
            "input" => AttributeKind::Input,
            "output" => AttributeKind::Output,
            _ => return Err(bad()),
        };
        let inner = domain
            .strip_prefix('{')
            .and_then(|d| d.strip_suffix('}'))
            .ok_or_else(bad)?;
        let values: Vec<&str> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').collect()
        };
        AttributeSchema::new(name, kind, values)
    }
}

impl Serialize for AttributeSchema {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AttributeSchema {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let literal = String::deserialize(deserializer)?;
        literal.parse().map_err(serde::de::Error::custom)
    }
}

/// An application's full attribute set, in declaration order.
///
/// Declaration order matters: ID3 breaks gain ties by it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<AttributeSchema>", into = "Vec<AttributeSchema>")]
pub struct Schema {
    attributes: Vec<AttributeSchema>,
}

impl Schema {
    pub fn new(attributes: Vec<AttributeSchema>) -> Result<Self, SchemaError> {
        for (i, attr) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|a| a.name == attr.name) {
                return Err(SchemaError::DuplicateAttribute(attr.name.clone()));
            }
        }
        let has = |k| attributes.iter().any(|a| a.kind == k);
        if !has(AttributeKind::Input) || !has(AttributeKind::Output) {
            return Err(SchemaError::MissingKind);
        }
        Ok(Schema { attributes })
    }

    /// Builds a schema from separate input and output lists, checking that
    /// each attribute's declared kind agrees with the list it appears in.
    pub fn from_parts(
        inputs: Vec<AttributeSchema>,
        outputs: Vec<AttributeSchema>,
    ) -> Result<Self, SchemaError> {
        for (list, expected) in [
            (&inputs, AttributeKind::Input),
            (&outputs, AttributeKind::Output),
        ] {
            if let Some(a) = list.iter().find(|a| a.kind != expected) {
                return Err(SchemaError::WrongKind {
                    name: a.name.clone(),
                    expected,
                    found: a.kind,
                });
            }
        }
        Schema::new(inputs.into_iter().chain(outputs).collect())
    }

    pub fn attributes(&self) -> &[AttributeSchema] {
        &self.attributes
    }

    pub fn get(&self, name: &str) -> Option<&AttributeSchema> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &AttributeSchema> {
        self.attributes
            .iter()
            .filter(|a| a.kind == AttributeKind::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &AttributeSchema> {
        self.attributes
            .iter()
            .filter(|a| a.kind == AttributeKind::Output)
    }

    pub fn kind_of(&self, name: &str) -> Option<AttributeKind> {
        self.get(name).map(|a| a.kind)
    }
}

impl TryFrom<Vec<AttributeSchema>> for Schema {
    type Error = SchemaError;

    fn try_from(value: Vec<AttributeSchema>) -> Result<Self, Self::Error> {
        Schema::new(value)
    }
}

impl From<Schema> for Vec<AttributeSchema> {
    fn from(schema: Schema) -> Self {
        schema.attributes
    }
}

/// One `attribute=value` binding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub attribute: String,
    pub value: String,
}

impl Item {
    pub fn new(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Item {
            attribute: attribute.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("attribute `{attribute}` already bound to `{existing}`, cannot also bind `{value}`")]
pub struct ItemConflict {
    pub attribute: String,
    pub existing: String,
    pub value: String,
}

/// A set of items binding each attribute at most once.
///
/// Backed by an ordered map, so iteration is always in canonical order
/// (attribute name, then value) and equality is structural.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemSet(BTreeMap<String, String>);

const ENCODED_EMPTY: &str = "{}";

fn escape_into(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '%' => out.push_str("%25"),
            '=' => out.push_str("%3D"),
            '&' => out.push_str("%26"),
            c => out.push(c),
        }
    }
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('%') {
        out.push_str(&rest[..i]);
        let code = rest.get(i + 1..i + 3)?;
        out.push(match code {
            "25" => '%',
            "3D" => '=',
            "26" => '&',
            _ => return None,
        });
        rest = &rest[i + 3..];
    }
    out.push_str(rest);
    Some(out)
}

impl ItemSet {
    pub fn new() -> Self {
        ItemSet(BTreeMap::new())
    }

    pub fn try_from_items<I: IntoIterator<Item = Item>>(items: I) -> Result<Self, ItemConflict> {
        let mut set = ItemSet::new();
        for item in items {
            set.insert(item)?;
        }
        Ok(set)
    }

    /// Convenience constructor from `(attribute, value)` pairs.
    pub fn from_pairs<A, V>(pairs: impl IntoIterator<Item = (A, V)>) -> Result<Self, ItemConflict>
    where
        A: Into<String>,
        V: Into<String>,
    {
        Self::try_from_items(pairs.into_iter().map(|(a, v)| Item::new(a, v)))
    }

    /// Inserts an item. Re-inserting an identical item is a no-op; binding an
    /// attribute to a second value is rejected.
    pub fn insert(&mut self, item: Item) -> Result<(), ItemConflict> {
        match self.0.get(&item.attribute) {
            Some(existing) if *existing != item.value => Err(ItemConflict {
                attribute: item.attribute,
                existing: existing.clone(),
                value: item.value,
            }),
            Some(_) => Ok(()),
            None => {
                self.0.insert(item.attribute, item.value);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, attribute: &str) -> Option<&str> {
        self.0.get(attribute).map(String::as_str)
    }

    pub fn contains(&self, item: &Item) -> bool {
        self.get(&item.attribute) == Some(item.value.as_str())
    }

    pub fn is_subset_of(&self, other: &ItemSet) -> bool {
        self.0
            .iter()
            .all(|(a, v)| other.0.get(a).is_some_and(|w| w == v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.0.iter().map(|(a, v)| (a.as_str(), v.as_str()))
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.0.iter().map(|(a, v)| Item::new(a.clone(), v.clone()))
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.keys().map(String::as_str)
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    pub fn union(&self, other: &ItemSet) -> Result<ItemSet, ItemConflict> {
        let mut out = self.clone();
        for item in other.items() {
            out.insert(item)?;
        }
        Ok(out)
    }

    /// Keeps only the items whose attribute satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> ItemSet {
        ItemSet(
            self.0
                .iter()
                .filter(|(a, _)| keep(a))
                .map(|(a, v)| (a.clone(), v.clone()))
                .collect(),
        )
    }

    /// Deterministic, injective text encoding.
    ///
    /// Items are joined with `&` as `attribute=value` in canonical order, with
    /// `%`, `=` and `&` percent-escaped. The empty set encodes as `{}`, which
    /// cannot collide with a nonempty encoding since those always contain an
    /// unescaped `=`.
    pub fn canonical_encode(&self) -> String {
        if self.0.is_empty() {
            return ENCODED_EMPTY.to_string();
        }
        let mut out = String::new();
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                out.push('&');
            }
            escape_into(&mut out, a);
            out.push('=');
            escape_into(&mut out, v);
        }
        out
    }

    /// Inverse of [`ItemSet::canonical_encode`].
    pub fn canonical_decode(text: &str) -> Option<ItemSet> {
        if text == ENCODED_EMPTY {
            return Some(ItemSet::new());
        }
        let mut set = ItemSet::new();
        for part in text.split('&') {
            let (a, v) = part.split_once('=')?;
            let (a, v) = (unescape(a)?, unescape(v)?);
            if set.0.insert(a, v).is_some() {
                return None;
            }
        }
        Some(set)
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}={v}")?;
        }
        f.write_str("}")
    }
}

fn default_weight() -> u64 {
    1
}

/// One training example: input bindings (null when a sensor is absent), the
/// full output assignment and a repeat count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainingRow {
    #[serde(default)]
    pub inputs: BTreeMap<String, Option<String>>,
    pub outputs: BTreeMap<String, String>,
    #[serde(default = "default_weight")]
    pub weight: u64,
}

impl TrainingRow {
    pub fn new<I, O, A, V, B, W>(inputs: I, outputs: O) -> Self
    where
        I: IntoIterator<Item = (A, V)>,
        O: IntoIterator<Item = (B, W)>,
        A: Into<String>,
        V: Into<String>,
        B: Into<String>,
        W: Into<String>,
    {
        TrainingRow {
            inputs: inputs
                .into_iter()
                .map(|(a, v)| (a.into(), Some(v.into())))
                .collect(),
            outputs: outputs
                .into_iter()
                .map(|(a, v)| (a.into(), v.into()))
                .collect(),
            weight: 1,
        }
    }

    pub fn with_weight(mut self, weight: u64) -> Self {
        self.weight = weight;
        self
    }

    /// Value bound to an input attribute, `None` when absent or null.
    pub fn input(&self, attribute: &str) -> Option<&str> {
        self.inputs.get(attribute).and_then(|v| v.as_deref())
    }
}

/// Why a row does not fit a schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("value `{value}` is not in the domain of `{attribute}`")]
    OutOfDomainValue { attribute: String, value: String },
    #[error("output attribute `{0}` is not bound")]
    MissingOutput(String),
    #[error("row weight must be positive")]
    InvalidWeight,
}

impl ValidationError {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::UnknownAttribute(_) => "unknown-attribute",
            ValidationError::OutOfDomainValue { .. } => "out-of-domain-value",
            ValidationError::MissingOutput(_) => "missing-output",
            ValidationError::InvalidWeight => "invalid-weight",
        }
    }
}

/// Checks a row against a schema: every bound value in-domain, inputs only
/// on input attributes, every output attribute bound.
pub fn validate_row(schema: &Schema, row: &TrainingRow) -> Result<(), ValidationError> {
    if row.weight == 0 {
        return Err(ValidationError::InvalidWeight);
    }
    let check = |name: &str, value: &str, kind: AttributeKind| match schema.get(name) {
        Some(attr) if attr.kind() == kind => {
            if attr.allows(value) {
                Ok(())
            } else {
                Err(ValidationError::OutOfDomainValue {
                    attribute: name.to_string(),
                    value: value.to_string(),
                })
            }
        }
        _ => Err(ValidationError::UnknownAttribute(name.to_string())),
    };
    for (name, value) in &row.inputs {
        match value {
            Some(value) => check(name, value, AttributeKind::Input)?,
            None if schema.kind_of(name) == Some(AttributeKind::Input) => {}
            None => return Err(ValidationError::UnknownAttribute(name.clone())),
        }
    }
    for (name, value) in &row.outputs {
        check(name, value, AttributeKind::Output)?;
    }
    if let Some(missing) = schema
        .outputs()
        .find(|a| !row.outputs.contains_key(a.name()))
    {
        return Err(ValidationError::MissingOutput(missing.name().to_string()));
    }
    Ok(())
}

/// The itemset of a row: every non-null input plus every output.
pub fn row_to_itemset(row: &TrainingRow) -> ItemSet {
    let mut map = BTreeMap::new();
    for (a, v) in &row.inputs {
        if let Some(v) = v {
            map.insert(a.clone(), v.clone());
        }
    }
    for (a, v) in &row.outputs {
        map.insert(a.clone(), v.clone());
    }
    ItemSet(map)
}

/// Free-function form of [`ItemSet::canonical_encode`].
pub fn canonical_encode(set: &ItemSet) -> String {
    set.canonical_encode()
}

/// A schema plus rows in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<TrainingRow>,
}

impl Dataset {
    pub fn new(schema: Schema) -> Self {
        Dataset {
            schema,
            rows: Vec::new(),
        }
    }

    /// Validates all rows first; nothing is kept unless every row passes.
    pub fn with_rows(
        schema: Schema,
        rows: Vec<TrainingRow>,
    ) -> Result<Self, (usize, ValidationError)> {
        for (i, row) in rows.iter().enumerate() {
            validate_row(&schema, row).map_err(|e| (i, e))?;
        }
        Ok(Dataset { schema, rows })
    }

    pub fn push(&mut self, row: TrainingRow) -> Result<(), ValidationError> {
        validate_row(&self.schema, &row)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[TrainingRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.rows.iter().map(|r| r.weight).sum()
    }
}

/// Which miner produced a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleSource {
    Apriori,
    Maxminer,
    Id3,
}

/// `antecedent => consequent` with its support and confidence.
///
/// Antecedents bind only input attributes and consequents only outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: ItemSet,
    pub consequent: ItemSet,
    pub support: f64,
    pub confidence: f64,
    pub source: RuleSource,
}

impl Rule {
    /// Canonical identity of the rule, independent of its statistics.
    pub fn identity(&self) -> (String, String) {
        (
            self.antecedent.canonical_encode(),
            self.consequent.canonical_encode(),
        )
    }

    /// Order used when listing rules: confidence desc, support desc, then
    /// canonical encoding.
    pub fn listing_cmp(&self, other: &Rule) -> std::cmp::Ordering {
        other
            .confidence
            .total_cmp(&self.confidence)
            .then_with(|| other.support.total_cmp(&self.support))
            .then_with(|| self.identity().cmp(&other.identity()))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} => {} support={} confidence={}",
            self.antecedent, self.consequent, self.support, self.confidence
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error(
    "thresholds must lie in (0, 1], got min_support={min_support} min_confidence={min_confidence}"
)]
pub struct ThresholdError {
    pub min_support: f64,
    pub min_confidence: f64,
}

#[derive(Deserialize)]
struct RawThresholds {
    min_support: f64,
    min_confidence: f64,
}

/// Support and confidence floors, both fractions in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawThresholds")]
pub struct Thresholds {
    min_support: f64,
    min_confidence: f64,
}

impl Thresholds {
    pub fn new(min_support: f64, min_confidence: f64) -> Result<Self, ThresholdError> {
        let ok = |x: f64| x > 0.0 && x <= 1.0;
        if ok(min_support) && ok(min_confidence) {
            Ok(Thresholds {
                min_support,
                min_confidence,
            })
        } else {
            Err(ThresholdError {
                min_support,
                min_confidence,
            })
        }
    }

    pub fn min_support(&self) -> f64 {
        self.min_support
    }

    pub fn min_confidence(&self) -> f64 {
        self.min_confidence
    }
}

impl TryFrom<RawThresholds> for Thresholds {
    type Error = ThresholdError;

    fn try_from(raw: RawThresholds) -> Result<Self, Self::Error> {
        Thresholds::new(raw.min_support, raw.min_confidence)
    }
}

pub const KEY_LEN: usize = 32;

/// 32-character alphanumeric token naming one application's context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct IdentificationKey(String);

impl IdentificationKey {
    /// Draws a fresh key from the thread-local CSPRNG.
    pub fn generate() -> Self {
        let key = rand::thread_rng()
            .sample_iter(&Alphanumeric)
            .take(KEY_LEN)
            .map(char::from)
            .collect();
        IdentificationKey(key)
    }

    pub fn parse(text: &str) -> Option<Self> {
        (text.len() == KEY_LEN && text.bytes().all(|b| b.is_ascii_alphanumeric()))
            .then(|| IdentificationKey(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for IdentificationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for IdentificationKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        IdentificationKey::parse(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid identification key `{text}`")))
    }
}
