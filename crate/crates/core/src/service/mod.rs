//! The engine behind a line-delimited JSON protocol, plus the batch commands
//! of the `ruleml` binary.
//!
//! Each request is one line:
//!
//! ```text
//! {"request":"get_current_output","key":"<32 chars>","params":{"inputs":{"hour":"08"}},"id":7}
//! ```
//!
//! and gets exactly one response line echoing `id`:
//!
//! ```text
//! {"id":7,"ok":true,"result":{"output":{"app":"music"},"confidence":1.0,...}}
//! {"id":7,"ok":false,"error":{"code":"no-rules-generated","message":"..."}}
//! ```

pub mod cli;
mod server;

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::engine::{AppContext, DeleteMode, Engine, EngineError, GenerationMode, Verdict};
use crate::miner::Algorithm;
use crate::model::{AttributeSchema, IdentificationKey, ItemSet, Thresholds, TrainingRow};
use crate::store::{Store, StoreError};

pub use server::{Endpoint, ServeError, Server};

/// Every verb the protocol accepts.
pub const VERBS: [&str; 12] = [
    "register_app",
    "set_input_output",
    "load_training_data",
    "set_training_data_row",
    "generate_rules",
    "set_generation_mode",
    "get_current_output",
    "send_feedback_last_gco",
    "delete_training_data",
    "delete_training_data_row",
    "change_inputs_outputs",
    "ping",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub request: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(default)]
    pub id: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    pub code: String,
    pub message: String,
}

impl WireError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        WireError {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<EngineError> for WireError {
    fn from(e: EngineError) -> Self {
        WireError::new(e.code(), e.to_string())
    }
}

impl From<StoreError> for WireError {
    fn from(e: StoreError) -> Self {
        WireError::new(e.code(), e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub id: Value,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<WireError>,
}

impl WireResponse {
    fn from_result(id: Value, result: Result<Value, WireError>) -> Self {
        match result {
            Ok(v) => WireResponse {
                id,
                ok: true,
                result: Some(v),
                error: None,
            },
            Err(e) => WireResponse {
                id,
                ok: false,
                result: None,
                error: Some(e),
            },
        }
    }
}

/// Which part of the on-disk state a successful request changed.
#[derive(Clone, Copy)]
enum Persist {
    /// Meta and rules snapshot.
    Meta,
    /// The newest row, plus meta when automated mode regenerated.
    AppendRow,
    /// Meta, rules, and both row logs.
    Full,
}

fn write_back(store: &Store, ctx: &AppContext, persist: Persist) -> Result<(), StoreError> {
    match persist {
        Persist::Meta => store.persist_context(ctx),
        Persist::AppendRow => {
            let row = ctx.rows.last().expect("a row was just inserted");
            store.append_row(&ctx.key, row)?;
            if ctx.mode == GenerationMode::Automated {
                store.persist_context(ctx)?;
            }
            Ok(())
        }
        Persist::Full => store.persist_all(ctx),
    }
}

fn params<T: DeserializeOwned>(raw: Option<Value>) -> Result<T, WireError> {
    serde_json::from_value(raw.unwrap_or_else(|| json!({})))
        .map_err(|e| WireError::new("malformed-params", e.to_string()))
}

fn to_value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("responses always serialize")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterParams {
    name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaParams {
    inputs: Vec<String>,
    outputs: Vec<String>,
}

type Attributes = (Vec<AttributeSchema>, Vec<AttributeSchema>);

impl SchemaParams {
    /// Literals are parsed here rather than during decoding so that a bad
    /// literal reports `invalid-schema`, not `malformed-params`.
    fn parse(self) -> Result<Attributes, WireError> {
        let parse = |list: Vec<String>| -> Result<Vec<AttributeSchema>, EngineError> {
            list.iter()
                .map(|l| l.parse().map_err(EngineError::from))
                .collect()
        };
        Ok((parse(self.inputs)?, parse(self.outputs)?))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowsParams {
    rows: Vec<TrainingRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowParams {
    row: TrainingRow,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateParams {
    min_support: f64,
    min_confidence: f64,
    #[serde(default = "default_algorithm")]
    algorithm: Algorithm,
}

fn default_algorithm() -> Algorithm {
    Algorithm::Apriori
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeParams {
    mode: GenerationMode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputsParams {
    inputs: ItemSet,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackParams {
    verdict: Verdict,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeleteRowParams {
    #[serde(rename = "match")]
    pattern: BTreeMap<String, Option<String>>,
    #[serde(default = "default_delete_mode")]
    mode: DeleteMode,
}

fn default_delete_mode() -> DeleteMode {
    DeleteMode::First
}

/// Runs `op` on one context and writes the change back before returning.
fn keyed<R: Serialize>(
    engine: &Engine,
    store: Option<&Store>,
    key: Option<String>,
    persist: Persist,
    op: impl FnOnce(&mut AppContext) -> Result<R, EngineError>,
) -> Result<Value, WireError> {
    let key = key.ok_or_else(|| WireError::new("malformed-request", "missing key"))?;
    let key = IdentificationKey::parse(&key).ok_or_else(|| EngineError::UnknownKey(key.clone()))?;
    engine.with_app(&key, |ctx| match op(ctx) {
        Ok(result) => {
            if let Some(store) = store {
                write_back(store, ctx, persist)?;
            }
            Ok(to_value(result))
        }
        Err(e) => {
            // a failed feedback still consumes last_gco
            if let (Some(store), Persist::Meta) = (store, persist) {
                store.persist_context(ctx)?;
            }
            Err(e.into())
        }
    })?
}

/// Handles one decoded request.
pub fn dispatch(req: WireRequest, engine: &Engine, store: Option<&Store>) -> WireResponse {
    let WireRequest {
        request,
        key,
        params: raw,
        id,
    } = req;
    let result = match request.as_str() {
        "ping" => Ok(json!("pong")),
        "register_app" => params::<RegisterParams>(raw).and_then(|p| {
            let key = engine.register_app(&p.name)?;
            if let Some(store) = store {
                engine.with_app(&key, |ctx| store.persist_context(ctx))??;
            }
            Ok(json!({ "key": key }))
        }),
        "set_input_output" => params::<SchemaParams>(raw).and_then(|p| {
            let (inputs, outputs) = p.parse()?;
            keyed(engine, store, key, Persist::Full, |ctx| {
                ctx.set_input_output(inputs, outputs).map(|()| json!({}))
            })
        }),
        "load_training_data" => params::<RowsParams>(raw).and_then(|p| {
            keyed(engine, store, key, Persist::Full, |ctx| {
                ctx.load_training_data(p.rows)
                    .map(|n| json!({ "accepted": n }))
            })
        }),
        "set_training_data_row" => params::<RowParams>(raw).and_then(|p| {
            keyed(engine, store, key, Persist::AppendRow, |ctx| {
                ctx.set_training_data_row(p.row).map(|()| json!({}))
            })
        }),
        "generate_rules" => params::<GenerateParams>(raw).and_then(|p| {
            let thresholds = Thresholds::new(p.min_support, p.min_confidence)
                .map_err(|e| WireError::new("invalid-threshold", e.to_string()))?;
            keyed(engine, store, key, Persist::Meta, |ctx| {
                ctx.generate_rules(thresholds, p.algorithm)
                    .map(|rules| json!({ "rules": rules }))
            })
        }),
        "set_generation_mode" => params::<ModeParams>(raw).and_then(|p| {
            keyed(engine, store, key, Persist::Meta, |ctx| {
                ctx.set_generation_mode(p.mode).map(|()| json!({}))
            })
        }),
        "get_current_output" => params::<InputsParams>(raw).and_then(|p| {
            keyed(engine, store, key, Persist::Meta, |ctx| {
                ctx.get_current_output(&p.inputs).map(|found| match found {
                    Some(inference) => to_value(inference),
                    None => json!({ "output": null }),
                })
            })
        }),
        "send_feedback_last_gco" => params::<FeedbackParams>(raw).and_then(|p| {
            let policy = *engine.policy();
            keyed(engine, store, key, Persist::Meta, |ctx| {
                ctx.send_feedback_last_gco(p.verdict, &policy)
            })
        }),
        "delete_training_data" => params::<Empty>(raw).and_then(|_| {
            keyed(engine, store, key, Persist::Full, |ctx| {
                ctx.delete_training_data();
                Ok(json!({}))
            })
        }),
        "delete_training_data_row" => params::<DeleteRowParams>(raw).and_then(|p| {
            keyed(engine, store, key, Persist::Full, |ctx| {
                ctx.delete_training_data_row(&p.pattern, p.mode)
                    .map(|n| json!({ "deleted": n }))
            })
        }),
        "change_inputs_outputs" => params::<SchemaParams>(raw).and_then(|p| {
            let (inputs, outputs) = p.parse()?;
            keyed(engine, store, key, Persist::Full, |ctx| {
                ctx.change_inputs_outputs(inputs, outputs)
            })
        }),
        other => Err(WireError::new(
            "unknown-request",
            format!("unknown request `{other}`"),
        )),
    };
    WireResponse::from_result(id, result)
}

/// Decodes one request line, dispatches it, and encodes the response line
/// (without the trailing newline).
pub fn handle_line(line: &str, engine: &Engine, store: Option<&Store>) -> String {
    let response = match serde_json::from_str::<Value>(line) {
        Err(e) => WireResponse::from_result(
            Value::Null,
            Err(WireError::new("malformed-request", e.to_string())),
        ),
        Ok(value) => {
            let id = value.get("id").cloned().unwrap_or(Value::Null);
            match serde_json::from_value::<WireRequest>(value) {
                Ok(req) => dispatch(req, engine, store),
                Err(e) => WireResponse::from_result(
                    id,
                    Err(WireError::new("malformed-request", e.to_string())),
                ),
            }
        }
    };
    serde_json::to_string(&response).expect("responses always serialize")
}
