//! Service configuration: a `key = value` file plus `ELINDA_*` environment
//! overrides.
//!
//! ```text
//! # comments and blank lines are ignored
//! listen = 127.0.0.1:8080
//! data = music.nt, people.nt
//! root_class = http://www.w3.org/2002/07/owl#Thing
//! heavy_threshold_ms = 1000
//! ```
//!
//! Every key can be overridden by an environment variable named `ELINDA_`
//! followed by the upper-cased key, e.g. `ELINDA_LISTEN=0.0.0.0:9000`.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use ldx_core::explore::EngineConfig;
use ldx_core::rdf::vocab::OWL_THING;
use ldx_core::rdf::LabelPreference;
use ldx_query::{EndpointConfig, ManagerConfig};
use thiserror::Error;

pub const ENV_PREFIX: &str = "ELINDA_";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {value:?}")]
    InvalidValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    /// N-Triples files loaded at startup.
    pub data: Vec<PathBuf>,
    /// SPARQL endpoint probed at startup.
    pub endpoint: Option<String>,
    /// Root class of new sessions that do not name one.
    pub root_class: String,
    pub label_languages: String,
    pub excluded_predicates: Vec<String>,
    /// Idle sessions are dropped after this long.
    pub session_ttl: Duration,
    pub sweep_interval: Duration,
    /// Allowed CORS origin; `*` allows any.
    pub cors_origin: Option<String>,
    pub endpoint_timeout: Duration,
    pub endpoint_max_retries: u32,
    pub endpoint_max_in_flight: usize,
    pub manager: ManagerConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data: Vec::new(),
            endpoint: None,
            root_class: OWL_THING.to_string(),
            label_languages: "en,none,*".to_string(),
            excluded_predicates: Vec::new(),
            session_ttl: Duration::from_secs(3600),
            sweep_interval: Duration::from_secs(60),
            cors_origin: Some("*".to_string()),
            endpoint_timeout: Duration::from_secs(30),
            endpoint_max_retries: 2,
            endpoint_max_in_flight: 4,
            manager: ManagerConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn millis(key: &str, value: &str) -> Result<Duration, ConfigError> {
    parse::<u64>(key, value).map(Duration::from_millis)
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn optional(value: &str) -> Option<String> {
    let v = value.trim();
    (!v.is_empty() && v != "none").then(|| v.to_string())
}

impl ServerConfig {
    /// Reads `path` (if given) over the defaults, then applies overrides
    /// from `env`.
    pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<Self, ConfigError> {
        let mut config = ServerConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            config.apply_file(&text)?;
        }
        config.apply_env(env)?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies `ELINDA_*` variables. Other variables are skipped; unknown
    /// `ELINDA_*` names are errors.
    pub fn apply_env(&mut self, env: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (name, value) in env {
            if let Some(key) = name.strip_prefix(ENV_PREFIX) {
                self.set(&key.to_ascii_lowercase(), value.trim())?;
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let m = &mut self.manager;
        match key {
            "listen" => self.listen = parse(key, value)?,
            "port" => self.listen.set_port(parse(key, value)?),
            "data" => self.data = list(value).into_iter().map(PathBuf::from).collect(),
            "endpoint" => self.endpoint = optional(value),
            "root_class" => self.root_class = value.to_string(),
            "label_languages" => self.label_languages = value.to_string(),
            "excluded_predicates" => self.excluded_predicates = list(value),
            "session_ttl_secs" => self.session_ttl = Duration::from_secs(parse(key, value)?),
            "sweep_interval_secs" => self.sweep_interval = Duration::from_secs(parse(key, value)?),
            "cors_origin" => self.cors_origin = optional(value),
            "endpoint_timeout_ms" => self.endpoint_timeout = millis(key, value)?,
            "endpoint_max_retries" => self.endpoint_max_retries = parse(key, value)?,
            "endpoint_max_in_flight" => self.endpoint_max_in_flight = parse(key, value)?,
            "heavy_threshold_ms" => m.heavy_threshold = millis(key, value)?,
            "chunk_size" => m.chunk_size = parse(key, value)?,
            "max_chunks" => m.max_chunks = parse(key, value)?,
            "query_timeout_ms" => m.query_timeout = optional(value).map(|v| millis(key, &v)).transpose()?,
            "max_resubmissions" => m.max_resubmissions = parse(key, value)?,
            "hvs_max_bytes" => m.hvs_max_bytes = optional(value).map(|v| parse(key, &v)).transpose()?,
            "hvs_path" => m.hvs_path = optional(value).map(PathBuf::from),
            "fast_path" => m.fast_path = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.manager.validate().map_err(ConfigError::Invalid)?;
        if self.session_ttl.is_zero() || self.sweep_interval.is_zero() {
            return Err(ConfigError::Invalid("session_ttl_secs and sweep_interval_secs must be positive".into()));
        }
        if let Some(url) = &self.endpoint {
            self.endpoint_config(url)
                .validate()
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn endpoint_config(&self, url: &str) -> EndpointConfig {
        EndpointConfig {
            timeout: self.endpoint_timeout,
            max_retries: self.endpoint_max_retries,
            max_in_flight: self.endpoint_max_in_flight,
            ..EndpointConfig::new(url)
        }
    }

    /// Engine settings for a session rooted at `root`, or at the configured
    /// root class.
    pub fn engine_config(&self, root: Option<&str>) -> EngineConfig {
        EngineConfig {
            root: root.unwrap_or(&self.root_class).to_string(),
            excluded_predicates: self.excluded_predicates.iter().cloned().collect(),
        }
    }

    pub fn label_preference(&self) -> LabelPreference {
        LabelPreference::parse(&self.label_languages)
    }
}
