//! Wire format: one JSON object per line in each direction.

use rsx_core::semantics::RedexSummary;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Load,
    Redexes,
    Apply,
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    /// Client-chosen, echoed verbatim.
    pub id: Value,
    pub op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redex: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedexLists {
    pub forward: Vec<RedexSummary>,
    pub backward: Vec<RedexSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: Value,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redexes: Option<RedexLists>,
}

impl Request {
    pub fn load(id: impl Into<Value>, text: impl Into<String>) -> Self {
        Request { id: id.into(), op: Op::Load, session: None, text: Some(text.into()), redex: None }
    }

    pub fn redexes(id: impl Into<Value>, session: impl Into<String>) -> Self {
        Request { id: id.into(), op: Op::Redexes, session: Some(session.into()), text: None, redex: None }
    }

    pub fn apply(id: impl Into<Value>, session: impl Into<String>, redex: impl Into<String>) -> Self {
        Request { id: id.into(), op: Op::Apply, session: Some(session.into()), text: None, redex: Some(redex.into()) }
    }

    pub fn reset(id: impl Into<Value>, session: impl Into<String>) -> Self {
        Request { id: id.into(), op: Op::Reset, session: Some(session.into()), text: None, redex: None }
    }
}
