//! Interactive stepping over rsx configurations.
//!
//! A [`Stepper`] holds independent sessions, one per loaded program. Each call
//! to [`Stepper::handle`] answers one [`Request`]; [`serve`] exposes the same
//! over newline-delimited JSON on a TCP socket.

pub mod protocol;
mod server;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rsx_core::congruence::canonicalize;
use rsx_core::semantics::{apply, enumerate, find_redex, Redex, RedexSummary, SemanticsError};
use rsx_core::surface::load_config;
use rsx_core::Configuration;
use thiserror::Error;

pub use protocol::{Op, RedexLists, Request, Response};
pub use server::{serve, spawn, DEFAULT_PORT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepperError {
    #[error("UnknownSession: no session {0}")]
    UnknownSession(String),
    #[error("StaleRedex: redex {0} is not enabled in the current configuration")]
    StaleRedex(String),
    #[error("ParseError: {0}")]
    ParseError(String),
    #[error("BadRequest: {0}")]
    BadRequest(String),
}

impl StepperError {
    pub fn kind(&self) -> &'static str {
        match self {
            StepperError::UnknownSession(_) => "UnknownSession",
            StepperError::StaleRedex(_) => "StaleRedex",
            StepperError::ParseError(_) => "ParseError",
            StepperError::BadRequest(_) => "BadRequest",
        }
    }
}

impl From<SemanticsError> for StepperError {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::StaleRedex(k) => StepperError::StaleRedex(k),
        }
    }
}

/// One loaded program and the steps taken since load or reset.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub id: String,
    pub root: Configuration,
    pub current: Configuration,
    /// Applied redexes with the configuration each was applied to.
    pub history: Vec<(Redex, Configuration)>,
}

impl SessionState {
    pub fn new(id: String, root: Configuration) -> Self {
        SessionState { id, current: root.clone(), root, history: Vec::new() }
    }

    pub fn canonical(&self) -> String {
        canonicalize(&self.current).text()
    }

    pub fn redexes(&self) -> RedexLists {
        let (fw, bw) = enumerate(&self.current);
        RedexLists {
            forward: fw.iter().map(RedexSummary::from).collect(),
            backward: bw.iter().map(RedexSummary::from).collect(),
        }
    }

    pub fn apply_key(&mut self, key: &str) -> Result<(), StepperError> {
        let r = find_redex(&self.current, key)?;
        let next = apply(&self.current, &r)?;
        let prev = std::mem::replace(&mut self.current, next);
        self.history.push((r, prev));
        Ok(())
    }

    pub fn reset(&mut self) {
        self.current = self.root.clone();
        self.history.clear();
    }

    /// Keys applied since load or reset, in order.
    pub fn applied_keys(&self) -> Vec<String> {
        self.history.iter().map(|(r, _)| r.key()).collect()
    }
}

#[derive(Debug, Default)]
pub struct Stepper {
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionState>>>>,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn session(&self, id: &str) -> Option<Arc<Mutex<SessionState>>> {
        self.sessions.lock().unwrap().get(id).cloned()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn handle(&self, req: &Request) -> Response {
        match self.dispatch(req) {
            Ok((session, canonical, redexes)) => Response {
                id: req.id.clone(),
                ok: true,
                error: None,
                session: Some(session),
                canonical: Some(canonical),
                redexes: Some(redexes),
            },
            Err(e) => Response {
                id: req.id.clone(),
                ok: false,
                error: Some(e.to_string()),
                session: req.session.clone(),
                canonical: None,
                redexes: None,
            },
        }
    }

    /// Parses one request line and serializes the response, without newline.
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(&req),
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(line)
                    .ok()
                    .and_then(|v| v.get("id").cloned())
                    .unwrap_or(serde_json::Value::Null);
                Response {
                    id,
                    ok: false,
                    error: Some(StepperError::BadRequest(e.to_string()).to_string()),
                    session: None,
                    canonical: None,
                    redexes: None,
                }
            }
        };
        serde_json::to_string(&resp).expect("response serializes")
    }

    fn dispatch(&self, req: &Request) -> Result<(String, String, RedexLists), StepperError> {
        if req.op == Op::Load {
            let text = req.text.as_deref().ok_or_else(|| StepperError::BadRequest("load needs text".into()))?;
            let root = load_config(text).map_err(|e| StepperError::ParseError(e.to_string()))?;
            let id = uuid::Uuid::new_v4().to_string();
            let state = SessionState::new(id.clone(), root);
            let out = (id.clone(), state.canonical(), state.redexes());
            self.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(state)));
            return Ok(out);
        }
        let id = req.session.as_deref().ok_or_else(|| StepperError::BadRequest("missing session".into()))?;
        let slot = self.session(id).ok_or_else(|| StepperError::UnknownSession(id.to_string()))?;
        let mut state = slot.lock().unwrap();
        match req.op {
            Op::Apply => {
                let key = req.redex.as_deref().ok_or_else(|| StepperError::BadRequest("apply needs redex".into()))?;
                state.apply_key(key)?;
            }
            Op::Reset => state.reset(),
            Op::Redexes | Op::Load => {}
        }
        Ok((state.id.clone(), state.canonical(), state.redexes()))
    }
}
