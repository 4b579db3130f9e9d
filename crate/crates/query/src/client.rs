//! Blocking client for SPARQL 1.1 protocol endpoints.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use ldx_core::rdf::DatasetStats;
use ldx_core::sparql::{class_count_query, triple_count_query};
use ldx_core::{Origin, QueryResult};
use parking_lot::{Condvar, Mutex};
use reqwest::header::ACCEPT;

use crate::error::ClientError;

pub const RESULTS_JSON: &str = "application/sparql-results+json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointConfig {
    pub url: String,
    /// Per-request timeout, body included.
    pub timeout: Duration,
    /// Extra attempts after a timeout or a 5xx answer.
    pub max_retries: u32,
    pub default_graph: Option<String>,
    /// Requests allowed in flight at once.
    pub max_in_flight: usize,
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            timeout: Duration::from_secs(30),
            max_retries: 2,
            default_graph: None,
            max_in_flight: 4,
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        let parsed = reqwest::Url::parse(&self.url).map_err(|e| ClientError::InvalidConfig(format!("{}: {e}", self.url)))?;
        if !matches!(parsed.scheme(), "http" | "https") {
            return Err(ClientError::InvalidConfig(format!("{}: not an http(s) URL", self.url)));
        }
        if self.timeout.is_zero() {
            return Err(ClientError::InvalidConfig("timeout must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ClientError::InvalidConfig("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

struct Semaphore {
    free: Mutex<usize>,
    cond: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock();
        while *free == 0 {
            self.cond.wait(&mut free);
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock() += 1;
        self.0.cond.notify_one();
    }
}

pub struct EndpointClient {
    config: EndpointConfig,
    http: reqwest::blocking::Client,
    permits: Semaphore,
    requests: AtomicU64,
}

impl std::fmt::Debug for EndpointClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EndpointClient").field("config", &self.config).finish_non_exhaustive()
    }
}

impl EndpointClient {
    pub fn new(config: EndpointConfig) -> Result<Self, ClientError> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ClientError::InvalidConfig(e.to_string()))?;
        Ok(EndpointClient {
            permits: Semaphore {
                free: Mutex::new(config.max_in_flight),
                cond: Condvar::new(),
            },
            config,
            http,
            requests: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// HTTP requests sent so far, retries included.
    pub fn requests_sent(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    /// Runs a SELECT query. Timeouts and 5xx answers are retried up to
    /// `max_retries` times; anything else fails at once.
    pub fn execute(&self, query: &str) -> Result<QueryResult, ClientError> {
        let attempts = self.config.max_retries + 1;
        let mut all_timeouts = true;
        let mut last = None;
        for attempt in 1..=attempts {
            match self.attempt(query) {
                Ok(r) => return Ok(r),
                Err(e) if e.is_transient() => {
                    log::warn!("{} attempt {attempt}/{attempts}: {e}", self.config.url);
                    all_timeouts &= matches!(e, ClientError::Timeout(_));
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        let last = last.expect("at least one attempt");
        if all_timeouts {
            Err(ClientError::Timeout(self.config.timeout))
        } else if attempts == 1 {
            Err(last)
        } else {
            Err(ClientError::TooManyRetries {
                attempts,
                last: last.to_string(),
            })
        }
    }

    fn attempt(&self, query: &str) -> Result<QueryResult, ClientError> {
        let _permit = self.permits.acquire();
        self.requests.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let mut form = vec![("query", query)];
        if let Some(g) = &self.config.default_graph {
            form.push(("default-graph-uri", g));
        }
        let response = self
            .http
            .post(&self.config.url)
            .header(ACCEPT, RESULTS_JSON)
            .form(&form)
            .send()
            .map_err(|e| self.transport_error(e))?;
        let status = response.status();
        let body = response.bytes().map_err(|e| self.transport_error(e))?;
        if !status.is_success() {
            let text = String::from_utf8_lossy(&body);
            return Err(ClientError::Http {
                status: Some(status.as_u16()),
                message: text.chars().take(500).collect(),
            });
        }
        QueryResult::from_sparql_json(&body, Origin::Remote, start.elapsed())
            .map_err(|e| ClientError::MalformedResponse(e.0))
    }

    fn transport_error(&self, e: reqwest::Error) -> ClientError {
        if e.is_timeout() {
            ClientError::Timeout(self.config.timeout)
        } else if e.is_decode() {
            ClientError::MalformedResponse(e.to_string())
        } else {
            ClientError::Http {
                status: None,
                message: e.to_string(),
            }
        }
    }

    /// Triple and class counts, also a cheap reachability check.
    pub fn probe(&self) -> Result<DatasetStats, ClientError> {
        let count = |text: &str| {
            self.execute(text)?
                .scalar_count()
                .ok_or_else(|| ClientError::MalformedResponse("count query returned no number".into()))
        };
        Ok(DatasetStats {
            triple_count: count(&triple_count_query().text)?,
            class_count: count(&class_count_query().text)?,
        })
    }
}
