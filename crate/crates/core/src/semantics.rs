//! Forward and backward reduction: session opening, communication, and their
//! undo rules, over configurations taken up to structural congruence.
//!
//! A [`Redex`] names its participants by position: runners by their ordinal
//! among the running processes of [`decompose`], monitors by endpoint.
//! [`apply`] keeps runner order, so ordinals stay meaningful across steps.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::congruence::{decompose, Component, Decomposition};
use crate::syntax::{Action, Configuration, HistoryType, Ident, Monitor, Polarity, Process, Runner, SessionType, Sort, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    Open,
    Com,
    #[serde(rename = "OpenU")]
    OpenUndo,
    #[serde(rename = "ComU")]
    ComUndo,
}

impl Rule {
    pub fn direction(self) -> Direction {
        match self {
            Rule::Open | Rule::Com => Direction::Forward,
            Rule::OpenUndo | Rule::ComUndo => Direction::Backward,
        }
    }

    pub fn inverse(self) -> Rule {
        match self {
            Rule::Open => Rule::OpenUndo,
            Rule::Com => Rule::ComUndo,
            Rule::OpenUndo => Rule::Open,
            Rule::ComUndo => Rule::Com,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::Open => "Open",
            Rule::Com => "Com",
            Rule::OpenUndo => "OpenU",
            Rule::ComUndo => "ComU",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

/// Endpoints touched by a step, plus the service it opened or closed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub endpoints: BTreeSet<Ident>,
    pub service: Option<Ident>,
}

impl Label {
    pub fn endpoint_names(&self) -> Vec<String> {
        self.endpoints.iter().map(Ident::to_string).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.endpoint_names().join(","))?;
        if let Some(s) = &self.service {
            write!(f, "@{s}")?;
        }
        Ok(())
    }
}

/// Disjoint endpoints and distinct services.
pub fn concurrent(l1: &Label, l2: &Label) -> bool {
    let services_clash = matches!((&l1.service, &l2.service), (Some(a), Some(b)) if a == b);
    l1.endpoints.is_disjoint(&l2.endpoints) && !services_clash
}

/// Names matched by a rule instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bindings {
    /// Open / OpenU. `service` is the channel both subjects evaluate to.
    Session {
        service: Ident,
        requester_subject: Ident,
        accepter_subject: Ident,
        requester_var: Ident,
        accepter_var: Ident,
        requester_type: SessionType,
        accepter_type: SessionType,
    },
    /// Com / ComU.
    Message { receiver_subject: Ident, receiver_var: Ident, sender_subject: Ident, payload: Value, sort: Sort },
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bindings::Session { service, requester_subject, accepter_subject, requester_var, accepter_var, requester_type, accepter_type } => write!(
                f,
                "service={service};u={requester_subject};u'={accepter_subject};x={requester_var};y={accepter_var};S={requester_type};T={accepter_type}"
            ),
            Bindings::Message { receiver_subject, receiver_var, sender_subject, payload, sort } => {
                write!(f, "k={receiver_subject};x={receiver_var};k'={sender_subject};v={payload};U={sort}")
            }
        }
    }
}

/// A matched rule instance.
///
/// `runners` and `endpoints` are `[requester, accepter]` for Open/OpenU and
/// `[receiver, sender]` for Com/ComU.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Redex {
    pub rule: Rule,
    pub runners: [usize; 2],
    pub endpoints: [Ident; 2],
    pub bindings: Bindings,
}

impl Redex {
    pub fn direction(&self) -> Direction {
        self.rule.direction()
    }

    pub fn label(&self) -> Label {
        let endpoints = self.endpoints.iter().cloned().collect();
        let service = match &self.bindings {
            Bindings::Session { service, .. } => Some(service.clone()),
            Bindings::Message { .. } => None,
        };
        Label { endpoints, service }
    }

    /// Content hash of rule, participants and bindings, hex encoded.
    pub fn key(&self) -> String {
        let text = format!(
            "{}|{},{}|{},{}|{}",
            self.rule, self.runners[0], self.runners[1], self.endpoints[0], self.endpoints[1], self.bindings
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn describe(&self) -> String {
        let [e0, e1] = &self.endpoints;
        match (&self.rule, &self.bindings) {
            (Rule::Open, Bindings::Session { service, requester_var, accepter_var, .. }) => format!(
                "Open on {service}: processes {} and {} open session {e1}/{e0} as {requester_var}, {accepter_var}",
                self.runners[0], self.runners[1]
            ),
            (Rule::OpenUndo, Bindings::Session { service, .. }) => {
                format!("OpenU on {service}: close session {e1}/{e0} and restore the session prefixes")
            }
            (Rule::Com, Bindings::Message { receiver_var, payload, sort, .. }) => {
                format!("Com on {e1}->{e0}: send {payload}:{sort} into {receiver_var}")
            }
            (Rule::ComUndo, Bindings::Message { receiver_var, payload, .. }) => {
                format!("ComU on {e1}->{e0}: take back {payload} from {receiver_var}")
            }
            _ => format!("{} {}", self.rule, self.bindings),
        }
    }
}

/// Serializable form of a [`Label`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelView {
    pub endpoints: Vec<String>,
    pub service: Option<String>,
}

impl From<&Label> for LabelView {
    fn from(l: &Label) -> Self {
        LabelView { endpoints: l.endpoint_names(), service: l.service.as_ref().map(Ident::to_string) }
    }
}

/// What a client needs to show and select a redex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedexSummary {
    pub key: String,
    pub rule: Rule,
    pub direction: Direction,
    pub label: LabelView,
    pub description: String,
}

impl From<&Redex> for RedexSummary {
    fn from(r: &Redex) -> Self {
        RedexSummary {
            key: r.key(),
            rule: r.rule,
            direction: r.direction(),
            label: LabelView::from(&r.label()),
            description: r.describe(),
        }
    }
}

/// The enabled redex with the given key, forward or backward.
pub fn find_redex(m: &Configuration, key: &str) -> Result<Redex, SemanticsError> {
    let (fw, bw) = enumerate(m);
    fw.into_iter().chain(bw).find(|r| r.key() == key).ok_or_else(|| SemanticsError::StaleRedex(key.to_string()))
}

/// Applies the redexes named by `keys` in order.
pub fn replay<'a>(root: &Configuration, keys: impl IntoIterator<Item = &'a str>) -> Result<Configuration, SemanticsError> {
    keys.into_iter().try_fold(root.clone(), |m, k| apply(&m, &find_redex(&m, k)?))
}

pub fn label(r: &Redex) -> Label {
    r.label()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("redex {0} does not apply to this configuration")]
    StaleRedex(String),
}

/// Why a configuration with pending prefixes cannot move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stuck {
    /// The payload does not have the sort both monitors demand.
    SortMismatch { endpoint: Ident, expected: Sort, found: Option<Sort>, payload: Value },
    /// The sender and receiver monitors disagree on the sort.
    MonitorMismatch { endpoint: Ident, receiver: Action, sender: Action },
    /// A prefix is blocked because its monitor expects a different action.
    ProtocolViolation { endpoint: Ident, attempted: &'static str, expected: Option<Action> },
    /// A request and an accept on the same service carry non-dual types.
    NonDualTypes { service: Ident, requester: SessionType, accepter: SessionType },
}

impl fmt::Display for Stuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stuck::SortMismatch { endpoint, expected, found, payload } => match found {
                Some(s) => write!(f, "on {endpoint}: payload {payload} has sort {s}, monitors expect {expected}"),
                None => write!(f, "on {endpoint}: payload {payload} is not a value of sort {expected}"),
            },
            Stuck::MonitorMismatch { endpoint, receiver, sender } => {
                write!(f, "on {endpoint}: receiver monitor expects {receiver} but sender monitor expects {sender}")
            }
            Stuck::ProtocolViolation { endpoint, attempted, expected } => match expected {
                Some(a) => write!(f, "on {endpoint}: process attempts {attempted} but its monitor expects {a}"),
                None => write!(f, "on {endpoint}: process attempts {attempted} but the protocol has ended"),
            },
            Stuck::NonDualTypes { service, requester, accepter } => {
                write!(f, "on {service}: request type {requester} is not dual to accept type {accepter}")
            }
        }
    }
}

// ---------------------------------------------------------------------------

struct View {
    decomp: Decomposition,
    /// Component index of each runner, in decomposition order.
    runner_at: Vec<usize>,
}

impl View {
    fn new(m: &Configuration) -> View {
        let decomp = decompose(m);
        let runner_at =
            decomp.components.iter().enumerate().filter(|(_, c)| matches!(c, Component::Running(_))).map(|(i, _)| i).collect();
        View { decomp, runner_at }
    }

    fn runner(&self, ord: usize) -> &Runner {
        match &self.decomp.components[self.runner_at[ord]] {
            Component::Running(r) => r,
            Component::Monitor(_) => unreachable!("runner_at points at runners"),
        }
    }

    fn runners(&self) -> impl Iterator<Item = (usize, &Runner)> {
        (0..self.runner_at.len()).map(move |i| (i, self.runner(i)))
    }

    fn monitor_index(&self, e: &Ident) -> Option<usize> {
        self.decomp.components.iter().position(|c| matches!(c, Component::Monitor(m) if m.endpoint == *e))
    }

    fn monitor(&self, e: &Ident) -> Option<&Monitor> {
        self.monitor_index(e).map(|i| match &self.decomp.components[i] {
            Component::Monitor(m) => m,
            Component::Running(_) => unreachable!(),
        })
    }

    fn owner(&self, e: &Ident) -> Option<usize> {
        self.runners().find(|(_, r)| r.endpoints.contains(e)).map(|(i, _)| i)
    }

    fn is_restricted(&self, base: &str) -> bool {
        self.decomp.context.restricted.iter().any(|n| n.base() == base)
    }

    /// Unused session bases `s0, s1, ...` in increasing order.
    fn fresh_sessions(&self, count: usize) -> Vec<Ident> {
        let mut used = BTreeSet::new();
        for n in &self.decomp.context.restricted {
            used.insert(n.base().to_string());
        }
        for c in &self.decomp.components {
            let mut note = |n: &Ident| {
                used.insert(n.base().to_string());
            };
            match c {
                Component::Running(r) => r.visit_idents(&mut note),
                Component::Monitor(m) => m.visit_idents(&mut note),
            }
        }
        (0..).map(|i| format!("s{i}")).filter(|b| !used.contains(b)).take(count).map(Ident::session).collect()
    }
}

fn dual_session(e: &Ident) -> Ident {
    e.dual().expect("endpoints are sessions")
}

fn session_endpoint(v: &Value) -> Option<&Ident> {
    v.as_name().filter(|n| n.is_session())
}

struct OpenCandidate {
    runners: [usize; 2],
    bindings: Bindings,
}

fn open_candidates(view: &View) -> (Vec<OpenCandidate>, Vec<Stuck>) {
    let mut out = Vec::new();
    let mut stuck = Vec::new();
    for (i, req) in view.runners() {
        let Process::Request { service: u, var: x, stype: s, .. } = &req.process else { continue };
        let Some(chan) = req.store.eval_ident(u).as_name().filter(|n| n.is_channel()).cloned() else { continue };
        for (j, acc) in view.runners() {
            if i == j {
                continue;
            }
            let Process::Accept { service: u2, var: y, stype: t, .. } = &acc.process else { continue };
            if acc.store.eval_ident(u2) != Value::Name(chan.clone()) {
                continue;
            }
            if !s.is_dual(t) {
                stuck.push(Stuck::NonDualTypes { service: chan.clone(), requester: s.clone(), accepter: t.clone() });
                continue;
            }
            out.push(OpenCandidate {
                runners: [i, j],
                bindings: Bindings::Session {
                    service: chan.clone(),
                    requester_subject: u.clone(),
                    accepter_subject: u2.clone(),
                    requester_var: x.clone(),
                    accepter_var: y.clone(),
                    requester_type: s.clone(),
                    accepter_type: t.clone(),
                },
            });
        }
    }
    (out, stuck)
}

fn com_candidates(view: &View) -> (Vec<Redex>, Vec<Stuck>) {
    let mut out = Vec::new();
    let mut stuck = Vec::new();
    for (i, recv) in view.runners() {
        let Process::Input { subject: k, var: x, .. } = &recv.process else { continue };
        let Some(e) = session_endpoint(&recv.store.eval_ident(k)).cloned() else { continue };
        if !recv.endpoints.contains(&e) {
            continue;
        }
        let partner = dual_session(&e);
        let Some(j) = view.owner(&partner) else { continue };
        if i == j {
            continue;
        }
        let send = view.runner(j);
        let Process::Output { subject: k2, payload, .. } = &send.process else { continue };
        if send.store.eval_ident(k2) != Value::Name(partner.clone()) {
            continue;
        }
        let (Some(mr), Some(ms)) = (view.monitor(&e), view.monitor(&partner)) else { continue };
        let (hr, hs) = (mr.htype.future().head(), ms.htype.future().head());
        let Some(Action::Recv(u)) = hr else {
            stuck.push(Stuck::ProtocolViolation { endpoint: e.clone(), attempted: "input", expected: hr });
            continue;
        };
        let Some(Action::Send(u2)) = hs else {
            stuck.push(Stuck::ProtocolViolation { endpoint: partner.clone(), attempted: "output", expected: hs });
            continue;
        };
        if u != u2 {
            stuck.push(Stuck::MonitorMismatch { endpoint: e.clone(), receiver: Action::Recv(u), sender: Action::Send(u2) });
            continue;
        }
        let found = send.store.eval(payload).sort();
        if found != Some(u) {
            stuck.push(Stuck::SortMismatch { endpoint: e.clone(), expected: u, found, payload: payload.clone() });
            continue;
        }
        out.push(Redex {
            rule: Rule::Com,
            runners: [i, j],
            endpoints: [e, partner],
            bindings: Bindings::Message {
                receiver_subject: k.clone(),
                receiver_var: x.clone(),
                sender_subject: k2.clone(),
                payload: payload.clone(),
                sort: u,
            },
        });
    }
    (out, stuck)
}

fn forward(view: &View) -> Vec<Redex> {
    let (opens, _) = open_candidates(view);
    let fresh = view.fresh_sessions(opens.len());
    let mut out: Vec<Redex> = opens
        .into_iter()
        .zip(fresh)
        .map(|(c, s)| Redex { rule: Rule::Open, runners: c.runners, endpoints: [dual_session(&s), s], bindings: c.bindings })
        .collect();
    out.extend(com_candidates(view).0);
    out
}

fn open_undo(view: &View, mon_req: &Monitor) -> Option<Redex> {
    let req_end = &mon_req.endpoint;
    let acc_end = dual_session(req_end);
    if !view.is_restricted(req_end.base()) {
        return None;
    }
    let mon_acc = view.monitor(&acc_end)?;
    for m in [mon_req, mon_acc] {
        if !m.htype.is_at_start() || m.vars.len() != 1 || m.names.len() != 1 {
            return None;
        }
    }
    let (i, j) = (view.owner(req_end)?, view.owner(&acc_end)?);
    let (req, acc) = (view.runner(i), view.runner(j));
    if req.endpoints.last() != Some(req_end) || acc.endpoints.last() != Some(&acc_end) {
        return None;
    }
    let x = mon_req.vars[0].as_name().filter(|n| n.is_variable())?.clone();
    let y = mon_acc.vars[0].as_name().filter(|n| n.is_variable())?.clone();
    if req.store.current(&x) != Some(&Value::Name(req_end.clone())) || acc.store.current(&y) != Some(&Value::Name(acc_end.clone())) {
        return None;
    }
    let u = flip_service(&mon_req.names[0]);
    let u2 = mon_acc.names[0].clone();
    let s = mon_req.htype.future().clone();
    let t = mon_acc.htype.future().clone();
    if !s.is_dual(&t) {
        return None;
    }
    let (sr, sa) = (req.store.reverse_update(&x).ok()?, acc.store.reverse_update(&y).ok()?);
    let chan = sr.eval_ident(&u).as_name().filter(|n| n.is_channel())?.clone();
    if sa.eval_ident(&u2) != Value::Name(chan.clone()) {
        return None;
    }
    Some(Redex {
        rule: Rule::OpenUndo,
        runners: [i, j],
        endpoints: [req_end.clone(), acc_end],
        bindings: Bindings::Session {
            service: chan,
            requester_subject: u,
            accepter_subject: u2,
            requester_var: x,
            accepter_var: y,
            requester_type: s,
            accepter_type: t,
        },
    })
}

/// The requester's monitor records the dual of its service when that is a
/// channel, and the variable itself otherwise. The map is an involution.
fn flip_service(recorded: &Ident) -> Ident {
    if recorded.is_variable() {
        recorded.clone()
    } else {
        recorded.dual().expect("not a variable")
    }
}

fn com_undo(view: &View, mon_recv: &Monitor) -> Option<Redex> {
    let Some(Action::Recv(u)) = mon_recv.htype.past().last().copied() else { return None };
    let e = &mon_recv.endpoint;
    let partner = dual_session(e);
    let mon_send = view.monitor(&partner)?;
    if mon_send.htype.past().last().copied() != Some(Action::Send(u)) {
        return None;
    }
    let x = mon_recv.vars.last()?.as_name().filter(|n| n.is_variable())?.clone();
    let k = mon_recv.names.last()?.clone();
    let y = mon_send.vars.last()?.clone();
    let k2 = mon_send.names.last()?.clone();
    let (i, j) = (view.owner(e)?, view.owner(&partner)?);
    let (recv, send) = (view.runner(i), view.runner(j));
    if !recv.store.contains(&x) {
        return None;
    }
    if recv.store.eval_ident(&k) != Value::Name(e.clone()) || send.store.eval_ident(&k2) != Value::Name(partner.clone()) {
        return None;
    }
    Some(Redex {
        rule: Rule::ComUndo,
        runners: [i, j],
        endpoints: [e.clone(), partner],
        bindings: Bindings::Message { receiver_subject: k, receiver_var: x, sender_subject: k2, payload: y, sort: u },
    })
}

fn backward(view: &View) -> Vec<Redex> {
    let mut out = Vec::new();
    for c in &view.decomp.components {
        let Component::Monitor(m) = c else { continue };
        if m.endpoint.polarity() == Polarity::Dual {
            out.extend(open_undo(view, m));
        }
    }
    for c in &view.decomp.components {
        let Component::Monitor(m) = c else { continue };
        out.extend(com_undo(view, m));
    }
    out
}

pub fn enumerate_forward(m: &Configuration) -> Vec<Redex> {
    forward(&View::new(m))
}

pub fn enumerate_backward(m: &Configuration) -> Vec<Redex> {
    backward(&View::new(m))
}

/// Forward and backward redexes from a single decomposition.
pub fn enumerate(m: &Configuration) -> (Vec<Redex>, Vec<Redex>) {
    let view = View::new(m);
    (forward(&view), backward(&view))
}

/// Reasons pending prefixes are blocked.
pub fn stuck_diagnostics(m: &Configuration) -> Vec<Stuck> {
    let view = View::new(m);
    let mut out = open_candidates(&view).1;
    out.extend(com_candidates(&view).1);
    out
}

fn set_runner(d: &mut Decomposition, at: &[usize], ord: usize, r: Runner) {
    d.components[at[ord]] = Component::Running(r);
}

fn set_monitor(d: &mut Decomposition, idx: usize, m: Monitor) {
    d.components[idx] = Component::Monitor(m);
}

pub fn apply(m: &Configuration, r: &Redex) -> Result<Configuration, SemanticsError> {
    let view = View::new(m);
    let candidates = match r.direction() {
        Direction::Forward => forward(&view),
        Direction::Backward => backward(&view),
    };
    if !candidates.contains(r) {
        return Err(SemanticsError::StaleRedex(r.key()));
    }
    let View { decomp, runner_at } = view;
    let mut d = decomp;
    let [i, j] = r.runners;
    let take = |d: &Decomposition, ord: usize| match &d.components[runner_at[ord]] {
        Component::Running(r) => r.clone(),
        Component::Monitor(_) => unreachable!(),
    };
    let (mut a, mut b) = (take(&d, i), take(&d, j));
    let [e0, e1] = r.endpoints.clone();
    match (&r.rule, &r.bindings) {
        (Rule::Open, Bindings::Session { requester_subject: u, accepter_subject: u2, requester_var: x, accepter_var: y, requester_type: s, accepter_type: t, .. }) => {
            // e0 = ~s (requester), e1 = s (accepter)
            a.process = body_of(&a.process);
            b.process = body_of(&b.process);
            a.endpoints.push(e0.clone());
            b.endpoints.push(e1.clone());
            a.store = a.store.update(x, Value::Name(e0.clone()));
            b.store = b.store.update(y, Value::Name(e1.clone()));
            let mon_req = Monitor::new(e0.clone(), HistoryType::start(s.clone()), vec![Value::Name(x.clone())], vec![flip_service(u)]);
            let mon_acc = Monitor::new(e1.clone(), HistoryType::start(t.clone()), vec![Value::Name(y.clone())], vec![u2.clone()]);
            set_runner(&mut d, &runner_at, i, a);
            set_runner(&mut d, &runner_at, j, b);
            d.components.push(Component::Monitor(mon_req));
            d.components.push(Component::Monitor(mon_acc));
            d.context.restricted.push(e1.plain());
        }
        (Rule::OpenUndo, Bindings::Session { requester_subject: u, accepter_subject: u2, requester_var: x, accepter_var: y, requester_type: s, accepter_type: t, .. }) => {
            a.process = Process::request(u.clone(), x.clone(), s.clone(), a.process.clone());
            b.process = Process::accept(u2.clone(), y.clone(), t.clone(), b.process.clone());
            a.endpoints.pop();
            b.endpoints.pop();
            a.store = a.store.reverse_update(x).expect("premise checked");
            b.store = b.store.reverse_update(y).expect("premise checked");
            set_runner(&mut d, &runner_at, i, a);
            set_runner(&mut d, &runner_at, j, b);
            d.components.retain(|c| !matches!(c, Component::Monitor(m) if m.endpoint == e0 || m.endpoint == e1));
            d.context.restricted.retain(|n| n.base() != e0.base());
        }
        (Rule::Com, Bindings::Message { receiver_subject: k, receiver_var: x, sender_subject: k2, payload, .. }) => {
            let v = b.store.eval(payload);
            a.process = body_of(&a.process);
            b.process = body_of(&b.process);
            a.store = a.store.update(x, v);
            let ri = d.components.iter().position(|c| matches!(c, Component::Monitor(m) if m.endpoint == e0)).expect("premise");
            let si = d.components.iter().position(|c| matches!(c, Component::Monitor(m) if m.endpoint == e1)).expect("premise");
            let mut mr = monitor_at(&d, ri);
            let mut ms = monitor_at(&d, si);
            mr.htype = mr.htype.advance().expect("premise checked");
            ms.htype = ms.htype.advance().expect("premise checked");
            mr.vars.push(Value::Name(x.clone()));
            mr.names.push(k.clone());
            ms.vars.push(payload.clone());
            ms.names.push(k2.clone());
            set_runner(&mut d, &runner_at, i, a);
            set_runner(&mut d, &runner_at, j, b);
            set_monitor(&mut d, ri, mr);
            set_monitor(&mut d, si, ms);
        }
        (Rule::ComUndo, Bindings::Message { receiver_subject: k, receiver_var: x, sender_subject: k2, payload, .. }) => {
            a.process = Process::input(k.clone(), x.clone(), a.process.clone());
            b.process = Process::output(k2.clone(), payload.clone(), b.process.clone());
            a.store = a.store.reverse_update(x).expect("premise checked");
            let ri = d.components.iter().position(|c| matches!(c, Component::Monitor(m) if m.endpoint == e0)).expect("premise");
            let si = d.components.iter().position(|c| matches!(c, Component::Monitor(m) if m.endpoint == e1)).expect("premise");
            let mut mr = monitor_at(&d, ri);
            let mut ms = monitor_at(&d, si);
            mr.htype = mr.htype.rewind().expect("premise checked");
            ms.htype = ms.htype.rewind().expect("premise checked");
            for m in [&mut mr, &mut ms] {
                m.vars.pop();
                m.names.pop();
            }
            set_runner(&mut d, &runner_at, i, a);
            set_runner(&mut d, &runner_at, j, b);
            set_monitor(&mut d, ri, mr);
            set_monitor(&mut d, si, ms);
        }
        _ => return Err(SemanticsError::StaleRedex(r.key())),
    }
    Ok(d.plug())
}

fn body_of(p: &Process) -> Process {
    p.body().cloned().unwrap_or(Process::Nil)
}

fn monitor_at(d: &Decomposition, idx: usize) -> Monitor {
    match &d.components[idx] {
        Component::Monitor(m) => m.clone(),
        Component::Running(_) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{canonicalize, equiv};
    use crate::surface::parse_config;

    const INT_EXCHANGE: &str = "proc[]{ ~a(x:!int.end). x!<5>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{}";

    // Hand-instantiated results of the rules on the int exchange.
    const AFTER_OPEN: &str = "new(s0,~s0).(proc[~s0]{ x!<5>. 0 } store{ x = [~s0] } | mon ~s0 { ^!int.end ; [x] ; [~a] } \
         | proc[s0]{ y?(z). 0 } store{ y = [s0] } | mon s0 { ^?int.end ; [y] ; [a] })";
    const AFTER_COM: &str = "new(s0,~s0).(proc[~s0]{ 0 } store{ x = [~s0] } | mon ~s0 { !int.^end ; [x, 5] ; [~a, x] } \
         | proc[s0]{ 0 } store{ y = [s0], z = [5] } | mon s0 { ?int.^end ; [y, z] ; [a, y] })";

    fn cfg(t: &str) -> Configuration {
        parse_config(t).unwrap()
    }

    fn only(rs: Vec<Redex>, rule: Rule) -> Redex {
        assert_eq!(rs.len(), 1, "{rs:?}");
        assert_eq!(rs[0].rule, rule);
        rs.into_iter().next().unwrap()
    }

    #[test]
    fn open_on_int_exchange() {
        let m = cfg(INT_EXCHANGE);
        let open = only(enumerate_forward(&m), Rule::Open);
        assert!(enumerate_backward(&m).is_empty());
        let n = apply(&m, &open).unwrap();
        n.validate().unwrap();
        assert!(equiv(&n, &cfg(AFTER_OPEN)), "{}", canonicalize(&n));
        let l = open.label();
        assert_eq!(l.endpoint_names(), vec!["s0", "~s0"]);
        assert_eq!(l.service, Some(Ident::channel("a")));
    }

    #[test]
    fn com_then_undo() {
        let n = cfg(AFTER_OPEN);
        assert_eq!(only(enumerate_backward(&n), Rule::OpenUndo).label().service, Some(Ident::channel("a")));
        let com = only(enumerate_forward(&n), Rule::Com);
        assert_eq!(com.label().endpoint_names(), vec!["s0", "~s0"]);
        assert_eq!(com.label().service, None);
        let o = apply(&n, &com).unwrap();
        assert!(equiv(&o, &cfg(AFTER_COM)), "{}", canonicalize(&o));
        assert!(enumerate_forward(&o).is_empty());
        let comu = only(enumerate_backward(&o), Rule::ComUndo);
        assert_eq!(canonicalize(&apply(&o, &comu).unwrap()), canonicalize(&n));
    }

    #[test]
    fn open_undo_restores_initial() {
        let m = cfg(INT_EXCHANGE);
        let n = apply(&m, &enumerate_forward(&m)[0]).unwrap();
        let back = only(enumerate_backward(&n), Rule::OpenUndo);
        assert_eq!(canonicalize(&apply(&n, &back).unwrap()), canonicalize(&m));
    }

    #[test]
    fn nil_has_no_redexes() {
        assert!(enumerate_forward(&Configuration::Nil).is_empty());
        assert!(enumerate_backward(&Configuration::Nil).is_empty());
    }

    #[test]
    fn sort_mismatch_blocks_com() {
        let m = cfg(
            "new(s0,~s0).(proc[~s0]{ x!<5>. 0 } store{ x = [~s0] } | mon ~s0 { ^!int.end ; [x] ; [~a] } \
             | proc[s0]{ y?(z). 0 } store{ y = [s0] } | mon s0 { ^?bool.end ; [y] ; [a] })",
        );
        assert!(enumerate_forward(&m).is_empty());
        let d = stuck_diagnostics(&m);
        assert!(matches!(d.as_slice(), [Stuck::MonitorMismatch { .. }]), "{d:?}");

        let m = cfg(
            "new(s0,~s0).(proc[~s0]{ x!<true>. 0 } store{ x = [~s0] } | mon ~s0 { ^!int.end ; [x] ; [~a] } \
             | proc[s0]{ y?(z). 0 } store{ y = [s0] } | mon s0 { ^?int.end ; [y] ; [a] })",
        );
        assert!(enumerate_forward(&m).is_empty());
        let d = stuck_diagnostics(&m);
        assert!(matches!(d.as_slice(), [Stuck::SortMismatch { found: Some(Sort::Bool), .. }]), "{d:?}");
        assert_eq!(d[0].to_string(), "on s0: payload true has sort bool, monitors expect int");
    }

    #[test]
    fn non_dual_types_block_open() {
        let m = cfg("proc[]{ ~a(x:!int.end). 0 } store{} | proc[]{ a(y:?bool.end). 0 } store{}");
        assert!(enumerate_forward(&m).is_empty());
        assert!(matches!(stuck_diagnostics(&m).as_slice(), [Stuck::NonDualTypes { .. }]));
    }

    #[test]
    fn stale_redex_rejected() {
        let m = cfg(INT_EXCHANGE);
        let open = enumerate_forward(&m).remove(0);
        let n = apply(&m, &open).unwrap();
        assert_eq!(apply(&n, &open), Err(SemanticsError::StaleRedex(open.key())));
    }

    #[test]
    fn labels_and_concurrency() {
        let l = |e: &[&str], s: Option<&str>| Label {
            endpoints: e.iter().map(|n| match n.strip_prefix('~') {
                Some(b) => Ident::session(b).dual().unwrap(),
                None => Ident::session(*n),
            }).collect(),
            service: s.map(Ident::channel),
        };
        assert!(concurrent(&l(&["s0", "~s0"], None), &l(&["s1", "~s1"], None)));
        assert!(!concurrent(&l(&["s0", "~s0"], None), &l(&["s0", "~s0"], None)));
        assert!(!concurrent(&l(&["s0", "~s0"], Some("a")), &l(&["s1", "~s1"], Some("a"))));
        assert!(concurrent(&l(&["s0", "~s0"], Some("a")), &l(&["s1", "~s1"], Some("b"))));
    }

    #[test]
    fn coinitial_opens_get_distinct_sessions() {
        let m = cfg(
            "proc[]{ ~a(x:!int.end). x!<1>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{} \
             | proc[]{ ~b(w:!int.end). w!<2>. 0 } store{} | proc[]{ b(v:?int.end). v?(t). 0 } store{}",
        );
        let fw = enumerate_forward(&m);
        assert_eq!(fw.len(), 2);
        assert!(concurrent(&fw[0].label(), &fw[1].label()));
        assert_eq!(fw[1].label().endpoint_names(), vec!["s1", "~s1"]);
        // after the first Open the second one keeps its session name
        let n = apply(&m, &fw[0]).unwrap();
        assert!(enumerate_forward(&n).contains(&fw[1]));
    }

    #[test]
    fn keys_are_stable_and_distinct() {
        let m = cfg(INT_EXCHANGE);
        let k1 = enumerate_forward(&m)[0].key();
        assert_eq!(k1, enumerate_forward(&m)[0].key());
        assert_eq!(k1.len(), 64);
        let n = apply(&m, &enumerate_forward(&m)[0]).unwrap();
        assert_ne!(enumerate_backward(&n)[0].key(), k1);
    }

    #[test]
    fn open_through_variable_service() {
        let m = cfg(
            "proc[]{ ~u(x:!int.end). x!<1>. 0 } store{ u = [a] } | proc[]{ a(y:?int.end). y?(z). 0 } store{}",
        );
        let open = only(enumerate_forward(&m), Rule::Open);
        let n = apply(&m, &open).unwrap();
        n.validate().unwrap();
        let mon = n.monitors().into_iter().find(|m| m.endpoint.polarity() == Polarity::Dual).unwrap().clone();
        assert_eq!(mon.names, vec![Ident::variable("u")]);
        let back = only(enumerate_backward(&n), Rule::OpenUndo);
        assert!(equiv(&apply(&n, &back).unwrap(), &m));
    }
}
