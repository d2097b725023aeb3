//! Pluggable translation backends.
//!
//! Everything above this module talks to a [`Translator`] through a
//! [`Session`], which assigns request ids and checks that every request
//! gets exactly one response. Backends are chosen with a spec string:
//!
//! * `mock:<transform>[?params]`: in-process [`MockTranslator`]
//! * `tcp:<host>:<port>`: a server speaking the [`protocol`] over TCP
//! * `cmd:<program> [args..]`: a child process speaking the protocol on its
//!   standard streams
//!
//! Wrapping an HTTP-JSON service only requires implementing
//! [`Translator::translate_batch`] and returning one response per request
//! id, in request order.

mod client;
mod mock;
pub mod protocol;
mod server;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

pub use client::{CmdTranslator, TcpTranslator};
pub use mock::{Fault, FaultKind, FaultTrigger, MockSpec, MockTranslator, Transform};
pub use server::{serve_connection, serve_mock, serve_stdio, MockServer};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("translator unavailable: {0}")]
    TranslatorUnavailable(String),
    #[error("failed to bind {addr}: {source}")]
    BindFailure {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid backend spec {spec:?}: {reason}")]
    InvalidSpec { spec: String, reason: String },
    #[error("request {id}: {reason}")]
    InvalidRequest { id: u64, reason: String },
    #[error("protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationRequest {
    pub id: u64,
    pub text: String,
}

/// One response; `outcome` is `Err` when this single request failed after
/// the backend's retries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationResponse {
    pub id: u64,
    pub outcome: Result<String, String>,
}

pub trait Translator: Send + Sync {
    /// Returns exactly one response per request, in request order.
    fn translate_batch(
        &self,
        requests: &[TranslationRequest],
    ) -> Result<Vec<TranslationResponse>, TranslateError>;
}

impl<T: Translator + ?Sized> Translator for Arc<T> {
    fn translate_batch(
        &self,
        requests: &[TranslationRequest],
    ) -> Result<Vec<TranslationResponse>, TranslateError> {
        (**self).translate_batch(requests)
    }
}

/// Assigns monotonically increasing request ids (starting at 1) and
/// validates backend responses.
pub struct Session {
    translator: Arc<dyn Translator>,
    next_id: AtomicU64,
    requests: AtomicU64,
}

impl Session {
    pub fn new(translator: Arc<dyn Translator>) -> Self {
        Self {
            translator,
            next_id: AtomicU64::new(1),
            requests: AtomicU64::new(0),
        }
    }

    /// Total number of requests sent through this session.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn translate(
        &self,
        texts: &[String],
    ) -> Result<Vec<Result<String, String>>, TranslateError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let n = texts.len() as u64;
        let first = self.next_id.fetch_add(n, Ordering::SeqCst);
        self.requests.fetch_add(n, Ordering::Relaxed);
        let requests: Vec<TranslationRequest> = texts
            .iter()
            .zip(first..)
            .map(|(text, id)| TranslationRequest {
                id,
                text: text.clone(),
            })
            .collect();
        if let Some(bad) = requests.iter().find(|r| r.text.contains(['\n', '\r'])) {
            return Err(TranslateError::InvalidRequest {
                id: bad.id,
                reason: "text contains a line break".to_string(),
            });
        }
        let responses = self.translator.translate_batch(&requests)?;
        order_responses(&requests, responses)
    }
}

/// Matches responses to requests by id, rejecting drops and duplicates.
pub(crate) fn order_responses(
    requests: &[TranslationRequest],
    responses: Vec<TranslationResponse>,
) -> Result<Vec<Result<String, String>>, TranslateError> {
    if responses.len() != requests.len() {
        return Err(TranslateError::Protocol(format!(
            "{} responses for {} requests",
            responses.len(),
            requests.len()
        )));
    }
    let mut by_id: HashMap<u64, Result<String, String>> = HashMap::with_capacity(responses.len());
    for r in responses {
        if by_id.insert(r.id, r.outcome).is_some() {
            return Err(TranslateError::Protocol(format!(
                "duplicate response id {}",
                r.id
            )));
        }
    }
    requests
        .iter()
        .map(|req| {
            by_id
                .remove(&req.id)
                .ok_or_else(|| TranslateError::Protocol(format!("no response for id {}", req.id)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientOptions {
    /// Concurrent connections per batch (TCP backend).
    pub workers: usize,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub timeout: Duration,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            retries: 2,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Mock(MockSpec),
    Tcp(String),
    Cmd { program: String, args: Vec<String> },
}

impl BackendSpec {
    pub fn connect(&self, options: &ClientOptions) -> Arc<dyn Translator> {
        match self {
            Self::Mock(spec) => Arc::new(MockTranslator::new(spec.clone())),
            Self::Tcp(addr) => Arc::new(TcpTranslator::new(addr.clone(), options.clone())),
            Self::Cmd { program, args } => Arc::new(CmdTranslator::new(
                program.clone(),
                args.clone(),
                options.clone(),
            )),
        }
    }
}

impl FromStr for BackendSpec {
    type Err = TranslateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = |reason: String| TranslateError::InvalidSpec {
            spec: s.to_string(),
            reason,
        };
        let (scheme, rest) = s
            .split_once(':')
            .ok_or_else(|| invalid("expected <scheme>:<target>".to_string()))?;
        match scheme {
            "mock" => rest.parse().map(Self::Mock).map_err(invalid),
            "tcp" => {
                let valid = rest
                    .rsplit_once(':')
                    .is_some_and(|(host, port)| !host.is_empty() && port.parse::<u16>().is_ok());
                if !valid {
                    return Err(invalid("expected tcp:<host>:<port>".to_string()));
                }
                Ok(Self::Tcp(rest.to_string()))
            }
            "cmd" => {
                let mut parts = rest.split_whitespace().map(str::to_string);
                let program = parts
                    .next()
                    .ok_or_else(|| invalid("missing program path".to_string()))?;
                Ok(Self::Cmd {
                    program,
                    args: parts.collect(),
                })
            }
            other => Err(invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Mock(spec) => write!(f, "mock:{spec}"),
            Self::Tcp(addr) => write!(f, "tcp:{addr}"),
            Self::Cmd { program, args } => {
                write!(f, "cmd:{program}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
        }
    }
}
