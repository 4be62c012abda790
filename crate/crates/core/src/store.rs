//! On-disk persistence: one directory per identification key.
//!
//! ```text
//! <root>/<key>/meta.json         name, schema, mode, config, generation, last_gco
//! <root>/<key>/rules.jsonl       rule snapshot, one rule per line
//! <root>/<key>/rows.jsonl        append-only training rows
//! <root>/<key>/quarantine.jsonl  rows excluded from mining
//! ```
//!
//! Snapshots (meta, rules, and compacted logs) are replaced atomically by
//! writing a sibling temp file and renaming it over the original. Rows are
//! appended one line at a time and synced before the append returns. Anything
//! after the last newline of a log is a torn write and is dropped on open.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{AppContext, GenerationConfig, GenerationMode, LastGco, StoredRule};
use crate::model::{AttributeSchema, IdentificationKey, Schema, TrainingRow};

const META: &str = "meta.json";
const RULES: &str = "rules.jsonl";
const ROWS: &str = "rows.jsonl";
const QUARANTINE: &str = "quarantine.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot read store root {path}: {source}")]
    UnreadableRoot {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt meta record {path}: {message}")]
    CorruptMeta { path: PathBuf, message: String },
    #[error("corrupt record at {path}:{line}: {message}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no application directory for key `{0}`")]
    UnknownKey(String),
    #[error("store i/o failed on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::UnreadableRoot { .. } => "unreadable-root",
            StoreError::CorruptMeta { .. } => "corrupt-meta",
            StoreError::CorruptLog { .. } => "corrupt-log",
            StoreError::UnknownKey(_) => "unknown-key",
            StoreError::Io { .. } => "io-error",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    key: IdentificationKey,
    name: String,
    schema: Option<Vec<AttributeSchema>>,
    mode: GenerationMode,
    config: Option<GenerationConfig>,
    generation: u64,
    rules_generated: bool,
    last_gco: Option<LastGco>,
}

/// A log that was read back, plus what had to be discarded.
struct LogRead<T> {
    records: Vec<T>,
    /// Byte length of the complete-line prefix.
    valid_len: u64,
    torn: bool,
}

fn read_log<T: DeserializeOwned>(path: &Path) -> Result<LogRead<T>, StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let mut records = Vec::new();
    for (i, line) in bytes[..complete].split(|&b| b == b'\n').enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let record = serde_json::from_slice(line).map_err(|e| StoreError::CorruptLog {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(LogRead {
        records,
        valid_len: complete as u64,
        torn: complete < bytes.len(),
    })
}

fn write_lines<T: Serialize>(out: &mut impl Write, records: &[T]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Replaces `path` with whatever `fill` writes, via temp file and rename.
fn replace_atomically(
    path: &Path,
    fill: impl FnOnce(&mut BufWriter<&File>) -> io::Result<()>,
) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let run = || -> io::Result<()> {
        let file = File::create(&tmp)?;
        let mut out = BufWriter::new(&file);
        fill(&mut out)?;
        out.flush()?;
        drop(out);
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        if let Some(dir) = path.parent() {
            // directory fsync is best effort; not every platform allows it
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
        Ok(())
    };
    run().map_err(io_err(path))
}

/// What one `open` found: the contexts and any repairs made.
#[derive(Debug)]
pub struct Loaded {
    pub contexts: Vec<AppContext>,
    pub warnings: Vec<String>,
}

/// Handle on a store root. Stateless apart from the path, so it can be shared
/// across threads; the engine's per-key locking keeps one writer per app.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Opens (creating if needed) a store and loads every context. Torn
    /// trailing records are dropped with a warning and truncated away.
    pub fn open(root: impl AsRef<Path>) -> Result<(Store, Loaded), StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|source| StoreError::UnreadableRoot {
            path: root.clone(),
            source,
        })?;
        let loaded = load(&root, true)?;
        Ok((Store { root }, loaded))
    }

    /// Loads contexts without creating, repairing, or writing anything.
    pub fn load_read_only(root: impl AsRef<Path>) -> Result<Loaded, StoreError> {
        load(root.as_ref(), false)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn app_dir(&self, key: &IdentificationKey) -> PathBuf {
        self.root.join(key.as_str())
    }

    /// Writes meta and the rules snapshot. Row logs are left alone.
    pub fn persist_context(&self, ctx: &AppContext) -> Result<(), StoreError> {
        let dir = self.app_dir(&ctx.key);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let meta = Meta {
            key: ctx.key.clone(),
            name: ctx.name.clone(),
            schema: ctx.schema.as_ref().map(|s| s.attributes().to_vec()),
            mode: ctx.mode,
            config: ctx.config,
            generation: ctx.generation,
            rules_generated: ctx.rules.is_some(),
            last_gco: ctx.last_gco.clone(),
        };
        let rules: &[StoredRule] = ctx.rules.as_deref().unwrap_or(&[]);
        replace_atomically(&dir.join(RULES), |out| write_lines(out, rules))?;
        replace_atomically(&dir.join(META), |out| {
            serde_json::to_writer(&mut *out, &meta)?;
            out.write_all(b"\n")
        })
    }

    /// Appends one row to the key's log and syncs it to disk.
    pub fn append_row(&self, key: &IdentificationKey, row: &TrainingRow) -> Result<(), StoreError> {
        let dir = self.app_dir(key);
        if !dir.join(META).is_file() {
            return Err(StoreError::UnknownKey(key.to_string()));
        }
        let path = dir.join(ROWS);
        let mut line = serde_json::to_vec(row).expect("rows always serialize");
        line.push(b'\n');
        let run = || -> io::Result<()> {
            let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
            file.write_all(&line)?;
            file.sync_data()
        };
        run().map_err(io_err(&path))
    }

    /// Rewrites the rows and quarantine logs from memory.
    pub fn compact(&self, ctx: &AppContext) -> Result<(), StoreError> {
        let dir = self.app_dir(&ctx.key);
        if !dir.join(META).is_file() {
            return Err(StoreError::UnknownKey(ctx.key.to_string()));
        }
        replace_atomically(&dir.join(ROWS), |out| write_lines(out, &ctx.rows))?;
        replace_atomically(&dir.join(QUARANTINE), |out| {
            write_lines(out, &ctx.quarantine)
        })
    }

    /// Full snapshot of one context: meta, rules, and both logs.
    pub fn persist_all(&self, ctx: &AppContext) -> Result<(), StoreError> {
        self.persist_context(ctx)?;
        self.compact(ctx)
    }
}

fn load(root: &Path, repair: bool) -> Result<Loaded, StoreError> {
    let unreadable = |source| StoreError::UnreadableRoot {
        path: root.to_path_buf(),
        source,
    };
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(unreadable)? {
        let entry = entry.map_err(unreadable)?;
        if entry.file_type().map_err(unreadable)?.is_dir() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    let mut loaded = Loaded {
        contexts: Vec::with_capacity(dirs.len()),
        warnings: Vec::new(),
    };
    for dir in dirs {
        loaded
            .contexts
            .push(load_app(&dir, repair, &mut loaded.warnings)?);
    }
    Ok(loaded)
}

fn load_app(
    dir: &Path,
    repair: bool,
    warnings: &mut Vec<String>,
) -> Result<AppContext, StoreError> {
    let meta_path = dir.join(META);
    let corrupt = |message: String| StoreError::CorruptMeta {
        path: meta_path.clone(),
        message,
    };
    let text = fs::read_to_string(&meta_path).map_err(|e| corrupt(e.to_string()))?;
    let meta: Meta = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let dir_name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if meta.key.as_str() != dir_name {
        return Err(corrupt(format!(
            "key `{}` does not match directory `{dir_name}`",
            meta.key
        )));
    }
    let schema = meta
        .schema
        .map(Schema::new)
        .transpose()
        .map_err(|e| corrupt(e.to_string()))?;

    let mut read = |name: &str| -> Result<Vec<TrainingRow>, StoreError> {
        let path = dir.join(name);
        let log = read_log::<TrainingRow>(&path)?;
        if log.torn {
            let msg = format!(
                "{}: dropped torn trailing record after {} complete rows",
                path.display(),
                log.records.len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
            if repair {
                let file = OpenOptions::new()
                    .write(true)
                    .open(&path)
                    .map_err(io_err(&path))?;
                file.set_len(log.valid_len).map_err(io_err(&path))?;
                file.sync_all().map_err(io_err(&path))?;
            }
        }
        Ok(log.records)
    };
    let rows = read(ROWS)?;
    let quarantine = read(QUARANTINE)?;
    let rules = read_log::<StoredRule>(&dir.join(RULES))?.records;

    Ok(AppContext {
        key: meta.key,
        name: meta.name,
        schema,
        rows,
        quarantine,
        rules: meta.rules_generated.then_some(rules),
        mode: meta.mode,
        config: meta.config,
        generation: meta.generation,
        last_gco: meta.last_gco,
    })
}
