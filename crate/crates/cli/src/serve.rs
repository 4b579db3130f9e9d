use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use ldx_server::dto::Mode;
use ldx_server::{AppState, ServerConfig};

use crate::Failure;

pub struct Flags {
    pub config: Option<PathBuf>,
    pub data: Vec<PathBuf>,
    pub endpoint: Option<String>,
    pub port: Option<u16>,
    pub root: Option<String>,
}

const USAGE: &str = "usage: ldx serve [--config PATH] [--data FILE]... [--endpoint URL] [--port PORT] [--root URI]\n\
                     nothing to serve: give --data, --endpoint, or a config file naming one";

/// The configuration file and `ELINDA_*` variables, overridden by flags.
fn config(flags: Flags) -> Result<ServerConfig, Failure> {
    let mut config =
        ServerConfig::load(flags.config.as_deref(), std::env::vars()).map_err(|e| Failure::Config(e.to_string()))?;
    if !flags.data.is_empty() {
        config.data = flags.data;
    }
    if flags.endpoint.is_some() {
        config.endpoint = flags.endpoint;
    }
    if let Some(port) = flags.port {
        config.listen.set_port(port);
    }
    if let Some(root) = flags.root {
        config.root_class = root;
    }
    config.validate().map_err(|e| Failure::Config(e.to_string()))?;
    if config.data.is_empty() && config.endpoint.is_none() {
        return Err(Failure::Config(USAGE.into()));
    }
    Ok(config)
}

pub fn run(flags: Flags) -> Result<(), Failure> {
    let config = config(flags)?;
    let state = Arc::new(AppState::new(config.clone()).map_err(|e| Failure::Config(e.to_string()))?);
    let loaded = state.preload().map_err(|(mode, e)| match mode {
        Mode::Embedded => Failure::Parse(e.to_string()),
        Mode::Remote => Failure::Config(e.to_string()),
    })?;
    let mut stdout = std::io::stdout().lock();
    for (source, stats) in loaded {
        let _ = writeln!(stdout, "{source}: {} triples, {} classes", stats.triple_count, stats.class_count);
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Config(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .map_err(|e| Failure::Config(format!("cannot listen on {}: {e}", config.listen)))?;
        let addr = listener.local_addr().map_err(|e| Failure::Config(e.to_string()))?;
        let _ = writeln!(stdout, "listening on http://{addr}");
        let _ = stdout.flush();
        drop(stdout);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        };
        ldx_server::serve(listener, state, shutdown)
            .await
            .map_err(|e| Failure::Config(format!("server failed: {e}")))
    })
}
