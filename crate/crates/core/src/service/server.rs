use std::fmt;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use thiserror::Error;

use super::handle_line;
use crate::engine::{Engine, EngineError, FeedbackPolicy};
use crate::store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {endpoint}: {source}")]
    BindFailure {
        endpoint: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ServeError {
    pub fn code(&self) -> &'static str {
        match self {
            ServeError::BindFailure { .. } => "bind-failure",
            ServeError::Store(e) => e.code(),
            ServeError::Engine(e) => e.code(),
        }
    }
}

/// Where the daemon listens: `tcp:HOST:PORT`, a bare socket address, or a
/// filesystem path for a unix socket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Tcp(String),
    Unix(PathBuf),
}

impl Endpoint {
    pub fn parse(text: &str) -> Endpoint {
        if let Some(addr) = text.strip_prefix("tcp:") {
            Endpoint::Tcp(addr.to_string())
        } else if text.parse::<SocketAddr>().is_ok() {
            Endpoint::Tcp(text.to_string())
        } else {
            Endpoint::Unix(PathBuf::from(text.strip_prefix("unix:").unwrap_or(text)))
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Tcp(a) => write!(f, "tcp:{a}"),
            Endpoint::Unix(p) => write!(f, "unix:{}", p.display()),
        }
    }
}

enum Listener {
    Tcp(TcpListener),
    #[cfg(unix)]
    Unix(std::os::unix::net::UnixListener),
}

/// A bound daemon. [`Server::run`] blocks, serving one thread per connection.
pub struct Server {
    engine: Arc<Engine>,
    store: Arc<Store>,
    listener: Listener,
    warnings: Vec<String>,
}

impl Server {
    /// Opens the store, loads every context, and binds the endpoint.
    pub fn bind(store_root: impl AsRef<Path>, endpoint: &Endpoint) -> Result<Server, ServeError> {
        let (store, loaded) = Store::open(store_root)?;
        let engine = Engine::from_contexts(loaded.contexts, FeedbackPolicy::default())?;
        let bind_failure = |source| ServeError::BindFailure {
            endpoint: endpoint.to_string(),
            source,
        };
        let listener = match endpoint {
            Endpoint::Tcp(addr) => Listener::Tcp(TcpListener::bind(addr).map_err(bind_failure)?),
            #[cfg(unix)]
            Endpoint::Unix(path) => {
                Listener::Unix(std::os::unix::net::UnixListener::bind(path).map_err(bind_failure)?)
            }
            #[cfg(not(unix))]
            Endpoint::Unix(_) => {
                return Err(bind_failure(io::Error::new(
                    io::ErrorKind::Unsupported,
                    "unix sockets are not available on this platform",
                )))
            }
        };
        Ok(Server {
            engine: Arc::new(engine),
            store: Arc::new(store),
            listener,
            warnings: loaded.warnings,
        })
    }

    /// The bound address, with the real port when `:0` was requested.
    pub fn local_endpoint(&self) -> Endpoint {
        match &self.listener {
            Listener::Tcp(l) => Endpoint::Tcp(
                l.local_addr()
                    .map(|a| a.to_string())
                    .unwrap_or_else(|_| "?".into()),
            ),
            #[cfg(unix)]
            Listener::Unix(l) => Endpoint::Unix(
                l.local_addr()
                    .ok()
                    .and_then(|a| a.as_pathname().map(Path::to_path_buf))
                    .unwrap_or_default(),
            ),
        }
    }

    /// Repairs made while loading the store.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn run(self) -> io::Result<()> {
        match self.listener {
            Listener::Tcp(l) => {
                for stream in l.incoming() {
                    let accepted = stream.and_then(|s: TcpStream| {
                        s.set_nodelay(true)?;
                        Ok((s.try_clone()?, s))
                    });
                    match accepted {
                        Ok((reader, writer)) => {
                            spawn_connection(&self.engine, &self.store, reader, writer)
                        }
                        Err(e) => log::warn!("accept failed: {e}"),
                    }
                }
            }
            #[cfg(unix)]
            Listener::Unix(l) => {
                for stream in l.incoming() {
                    match stream.and_then(|s| Ok((s.try_clone()?, s))) {
                        Ok((reader, writer)) => {
                            spawn_connection(&self.engine, &self.store, reader, writer)
                        }
                        Err(e) => log::warn!("accept failed: {e}"),
                    }
                }
            }
        }
        Ok(())
    }
}

fn spawn_connection<R, W>(engine: &Arc<Engine>, store: &Arc<Store>, reader: R, writer: W)
where
    R: io::Read + Send + 'static,
    W: Write + Send + 'static,
{
    let engine = Arc::clone(engine);
    let store = Arc::clone(store);
    thread::spawn(move || {
        if let Err(e) = serve_connection(&engine, &store, reader, writer) {
            log::debug!("connection closed: {e}");
        }
    });
}

/// Answers requests strictly in arrival order until the peer hangs up.
pub(crate) fn serve_connection(
    engine: &Engine,
    store: &Store,
    reader: impl io::Read,
    mut writer: impl Write,
) -> io::Result<()> {
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut response = handle_line(&line, engine, Some(store));
        response.push('\n');
        writer.write_all(response.as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}
