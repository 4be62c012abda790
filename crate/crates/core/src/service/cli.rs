//! Batch commands behind the `ruleml` binary. Each writes its report to the
//! given writer and maps failures onto the process exit codes.

use std::fmt;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Endpoint, Server};
use crate::engine::{EngineError, GenerationMode};
use crate::miner::{mine_rules, Algorithm};
use crate::model::{AttributeSchema, Dataset, Schema, Thresholds, TrainingRow};
use crate::store::Store;
use crate::syslearn::{
    generate_trace, parse_trace, replay_fresh, write_trace, BinningConfig, Regeneration,
    ReplayPolicy, SyslearnError, TraceSpec,
};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_ENGINE: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub exit: u8,
    pub code: String,
    pub message: String,
}

impl CliError {
    fn new(exit: u8, code: &str, message: impl Into<String>) -> Self {
        CliError {
            exit,
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn data(code: &str, message: impl Into<String>) -> Self {
        CliError::new(EXIT_DATA, code, message)
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError::data("io-error", format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::new(EXIT_ENGINE, e.code(), e.to_string())
    }
}

impl From<SyslearnError> for CliError {
    fn from(e: SyslearnError) -> Self {
        match e {
            SyslearnError::Engine(e) => e.into(),
            other => CliError::data(other.code(), other.to_string()),
        }
    }
}

pub fn thresholds(min_support: f64, min_confidence: f64) -> Result<Thresholds, CliError> {
    Thresholds::new(min_support, min_confidence)
        .map_err(|e| CliError::new(EXIT_USAGE, "invalid-threshold", e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: Vec<AttributeSchema>,
}

/// Parses a data file: a `{"schema":[...]}` header line followed by one
/// training row per line.
pub fn parse_data_file(text: &str) -> Result<Dataset, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::data("malformed-data", "missing schema header"))?;
    let header: Header = serde_json::from_str(header)
        .map_err(|e| CliError::data("malformed-data", format!("line 1: {e}")))?;
    let schema =
        Schema::new(header.schema).map_err(|e| CliError::data(e.code(), format!("line 1: {e}")))?;
    let mut data = Dataset::new(schema);
    for (i, line) in lines {
        let row: TrainingRow = serde_json::from_str(line)
            .map_err(|e| CliError::data("malformed-data", format!("line {}: {e}", i + 1)))?;
        data.push(row)
            .map_err(|e| CliError::data(e.code(), format!("line {}: {e}", i + 1)))?;
    }
    Ok(data)
}

/// Inverse of [`parse_data_file`].
pub fn render_data_file(data: &Dataset) -> String {
    let header = Header {
        schema: data.schema().attributes().to_vec(),
    };
    let mut out = serde_json::to_string(&header).expect("serializable");
    out.push('\n');
    for row in data.rows() {
        out.push_str(&serde_json::to_string(row).expect("serializable"));
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// `mine`: prints rules in listing order, then counters with `stats`.
pub fn cmd_mine(
    data_file: &Path,
    thresholds: Thresholds,
    algorithm: Algorithm,
    stats: bool,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let data = parse_data_file(&read(data_file)?)?;
    let (rules, counters) = mine_rules(&data, thresholds, algorithm).map_err(EngineError::from)?;
    let mut text = String::new();
    for rule in &rules {
        text.push_str(&format!("{rule}\n"));
    }
    if stats {
        text.push_str(&format!(
            "candidates_generated={}\nsupport_counting_passes={}\nrules_emitted={}\n",
            counters.candidates_generated, counters.support_counting_passes, counters.rules_emitted
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// `replay`: prints the report as JSON.
pub fn cmd_replay(
    trace_file: &Path,
    bins_file: &Path,
    thresholds: Thresholds,
    algorithm: Algorithm,
    regen_every: Option<usize>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let bins = BinningConfig::from_json(&read(bins_file)?)?;
    let file = fs::File::open(trace_file).map_err(|e| CliError::io(trace_file, e))?;
    let events = parse_trace(BufReader::new(file))?;
    let regeneration = match regen_every {
        None => Regeneration::PerRow,
        Some(0) => {
            return Err(CliError::new(
                EXIT_USAGE,
                "invalid-argument",
                "--regen-every must be positive",
            ))
        }
        Some(n) => Regeneration::EveryN(n),
    };
    let policy = ReplayPolicy {
        regeneration,
        feedback: false,
    };
    let report = replay_fresh(&events, &bins, thresholds, algorithm, policy)?;
    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
    text.push('\n');
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// Where `gen-trace` puts the sidecar for a given output path.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("sidecar.json")
}

/// `gen-trace`: writes the trace and its sidecar.
pub fn cmd_gen_trace(
    spec_file: &Path,
    seed: u64,
    len: usize,
    out_file: &Path,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let spec = TraceSpec::from_json(&read(spec_file)?)?;
    let generated = generate_trace(&spec, seed, len)?;
    let mut trace = Vec::new();
    write_trace(&generated.events, &mut trace).expect("in-memory write");
    fs::write(out_file, trace).map_err(|e| CliError::io(out_file, e))?;
    let sidecar = sidecar_path(out_file);
    let mut text = serde_json::to_string_pretty(&generated.sidecar).expect("serializable");
    text.push('\n');
    fs::write(&sidecar, text).map_err(|e| CliError::io(&sidecar, e))?;
    writeln!(
        out,
        "events={}\ntrace={}\nsidecar={}",
        generated.events.len(),
        out_file.display(),
        sidecar.display()
    )
    .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// `inspect`: read-only summary of one application.
pub fn cmd_inspect(store_root: &Path, app: &str, out: &mut impl Write) -> Result<(), CliError> {
    let loaded =
        Store::load_read_only(store_root).map_err(|e| CliError::data(e.code(), e.to_string()))?;
    let ctx = loaded
        .contexts
        .iter()
        .find(|c| c.name == app)
        .ok_or_else(|| {
            CliError::new(
                EXIT_ENGINE,
                "unknown-app",
                format!("no application named `{app}`"),
            )
        })?;
    let mut text = format!("app: {}\nkey: {}\n", ctx.name, ctx.key);
    match &ctx.schema {
        None => text.push_str("schema: (unset)\n"),
        Some(schema) => {
            text.push_str("schema:\n");
            for a in schema.attributes() {
                text.push_str(&format!("  {a}\n"));
            }
        }
    }
    text.push_str(&format!(
        "rows: {}\nquarantined: {}\n",
        ctx.rows.len(),
        ctx.quarantine.len()
    ));
    match &ctx.rules {
        None => text.push_str("rules: (not generated)\n"),
        Some(rules) => text.push_str(&format!(
            "rules: {} ({} active)\n",
            rules.len(),
            rules.iter().filter(|r| r.active).count()
        )),
    }
    let mode = match ctx.mode {
        GenerationMode::Automated => "automated",
        GenerationMode::Manual => "manual",
    };
    text.push_str(&format!("mode: {mode}\n"));
    if let Some(c) = ctx.config {
        text.push_str(&format!(
            "config: {} min_support={} min_confidence={}\n",
            c.algorithm.name(),
            c.thresholds.min_support(),
            c.thresholds.min_confidence()
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

/// `serve`: binds, announces the endpoint on `out`, then blocks.
pub fn cmd_serve(store_root: &Path, listen: &str, out: &mut impl Write) -> Result<(), CliError> {
    let server = Server::bind(store_root, &Endpoint::parse(listen)).map_err(|e| {
        let exit = match e {
            super::ServeError::Store(_) => EXIT_DATA,
            _ => EXIT_ENGINE,
        };
        CliError::new(exit, e.code(), e.to_string())
    })?;
    for w in server.warnings() {
        log::warn!("{w}");
    }
    writeln!(out, "listening on {}", server.local_endpoint())
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    server
        .run()
        .map_err(|e| CliError::new(EXIT_ENGINE, "io-error", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const F1: &str = r#"{"schema":["headphones:input:{yes,no}","hour:input:{morning,evening}","app:output:{music,none}"]}
{"inputs":{"headphones":"yes","hour":"morning"},"outputs":{"app":"music"}}
{"inputs":{"headphones":"yes","hour":"morning"},"outputs":{"app":"music"}}
{"inputs":{"headphones":"no","hour":"morning"},"outputs":{"app":"none"}}
{"inputs":{"headphones":"yes","hour":"evening"},"outputs":{"app":"music"}}
{"inputs":{"headphones":"no","hour":"evening"},"outputs":{"app":"none"}}
"#;

    #[test]
    fn data_file_round_trip() {
        let data = parse_data_file(F1).unwrap();
        assert_eq!(data.len(), 5);
        assert_eq!(parse_data_file(&render_data_file(&data)).unwrap(), data);
        assert_eq!(parse_data_file("").unwrap_err().exit, EXIT_DATA);
        let bad = F1.replace(
            "\"none\"}}\n{\"inputs\":{\"headphones\":\"yes\"",
            "\"loud\"}}\n{\"inputs\":{\"headphones\":\"yes\"",
        );
        assert_eq!(
            parse_data_file(&bad).unwrap_err().code,
            "out-of-domain-value"
        );
    }

    #[test]
    fn mine_f1() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f1.jsonl");
        fs::write(&path, F1).unwrap();
        let mut out = Vec::new();
        cmd_mine(
            &path,
            thresholds(0.4, 0.8).unwrap(),
            Algorithm::Apriori,
            true,
            &mut out,
        )
        .unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "{headphones=yes} => {app=music} support=0.6 confidence=1"
        );
        assert!(text.contains("candidates_generated="));

        let empty = dir.path().join("empty.jsonl");
        fs::write(&empty, F1.lines().next().unwrap()).unwrap();
        let err = cmd_mine(
            &empty,
            thresholds(0.4, 0.8).unwrap(),
            Algorithm::Apriori,
            false,
            &mut Vec::new(),
        )
        .unwrap_err();
        assert_eq!(
            (err.exit, err.code.as_str()),
            (EXIT_ENGINE, "empty-training-data")
        );
        assert_eq!(thresholds(0.0, 0.5).unwrap_err().exit, EXIT_USAGE);
    }
}
