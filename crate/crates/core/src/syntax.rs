//! Term and type languages: names, sorts, values, session types, history
//! types (session types with a cursor), processes and configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::store::Store;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NameKind {
    Channel,
    Session,
    Variable,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Channel => "channel",
            NameKind::Session => "session",
            NameKind::Variable => "variable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Plain,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("variable `{0}` has no dual")]
    DualOfVariable(String),
}

/// A channel, session endpoint or variable.
///
/// Channels and sessions come in dual pairs sharing a base token; the dual
/// end prints with a leading `~`. Variables are always plain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident {
    kind: NameKind,
    base: String,
    polarity: Polarity,
}

impl Ident {
    pub fn channel(base: impl Into<String>) -> Self {
        Ident { kind: NameKind::Channel, base: base.into(), polarity: Polarity::Plain }
    }

    pub fn session(base: impl Into<String>) -> Self {
        Ident { kind: NameKind::Session, base: base.into(), polarity: Polarity::Plain }
    }

    pub fn variable(base: impl Into<String>) -> Self {
        Ident { kind: NameKind::Variable, base: base.into(), polarity: Polarity::Plain }
    }

    /// Builds a name of the given kind and polarity. Variables reject `Dual`.
    pub fn new(kind: NameKind, base: impl Into<String>, polarity: Polarity) -> Result<Self, NameError> {
        let base = base.into();
        if kind == NameKind::Variable && polarity == Polarity::Dual {
            return Err(NameError::DualOfVariable(base));
        }
        Ok(Ident { kind, base, polarity })
    }

    pub fn kind(&self) -> NameKind {
        self.kind
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_variable(&self) -> bool {
        self.kind == NameKind::Variable
    }

    pub fn is_session(&self) -> bool {
        self.kind == NameKind::Session
    }

    pub fn is_channel(&self) -> bool {
        self.kind == NameKind::Channel
    }

    /// The dual name: flips polarity, keeps kind and base.
    pub fn dual(&self) -> Result<Ident, NameError> {
        if self.is_variable() {
            return Err(NameError::DualOfVariable(self.base.clone()));
        }
        let polarity = match self.polarity {
            Polarity::Plain => Polarity::Dual,
            Polarity::Dual => Polarity::Plain,
        };
        Ok(Ident { kind: self.kind, base: self.base.clone(), polarity })
    }

    /// The plain end of the pair this name belongs to.
    pub fn plain(&self) -> Ident {
        Ident { kind: self.kind, base: self.base.clone(), polarity: Polarity::Plain }
    }

    /// Same kind and polarity, different base.
    pub fn with_base(&self, base: impl Into<String>) -> Ident {
        Ident { kind: self.kind, base: base.into(), polarity: self.polarity }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Dual {
            f.write_str("~")?;
        }
        f.write_str(&self.base)
    }
}

/// Free-function form of [`Ident::dual`].
pub fn dual_name(n: &Ident) -> Result<Ident, NameError> {
    n.dual()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
        })
    }
}

/// A payload or store value: a literal of a basic sort, or a name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Name(Ident),
}

impl Value {
    /// Sort of a literal; names have none.
    pub fn sort(&self) -> Option<Sort> {
        match self {
            Value::Int(_) => Some(Sort::Int),
            Value::Bool(_) => Some(Sort::Bool),
            Value::Name(_) => None,
        }
    }

    pub fn as_name(&self) -> Option<&Ident> {
        match self {
            Value::Name(n) => Some(n),
            _ => None,
        }
    }
}

impl From<Ident> for Value {
    fn from(n: Ident) -> Self {
        Value::Name(n)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Name(n) => write!(f, "{n}"),
        }
    }
}

/// A single protocol action, as recorded in the past of a history type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Send(Sort),
    Recv(Sort),
}

impl Action {
    pub fn sort(self) -> Sort {
        match self {
            Action::Send(s) | Action::Recv(s) => s,
        }
    }

    pub fn dual(self) -> Action {
        match self {
            Action::Send(s) => Action::Recv(s),
            Action::Recv(s) => Action::Send(s),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Send(s) => write!(f, "!{s}"),
            Action::Recv(s) => write!(f, "?{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessionType {
    End,
    Send(Sort, Box<SessionType>),
    Recv(Sort, Box<SessionType>),
}

impl SessionType {
    pub fn send(sort: Sort, cont: SessionType) -> Self {
        SessionType::Send(sort, Box::new(cont))
    }

    pub fn recv(sort: Sort, cont: SessionType) -> Self {
        SessionType::Recv(sort, Box::new(cont))
    }

    /// Builds `a1.a2. ... .end` from an action sequence.
    pub fn from_actions<I>(actions: I) -> Self
    where
        I: IntoIterator<Item = Action>,
        I::IntoIter: DoubleEndedIterator,
    {
        actions.into_iter().rev().fold(SessionType::End, |cont, a| SessionType::prefixed(a, cont))
    }

    pub fn prefixed(action: Action, cont: SessionType) -> Self {
        match action {
            Action::Send(s) => SessionType::send(s, cont),
            Action::Recv(s) => SessionType::recv(s, cont),
        }
    }

    pub fn actions(&self) -> Vec<Action> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Some((a, next)) = cur.split_head() {
            out.push(a);
            cur = next;
        }
        out
    }

    /// Head action and continuation, or `None` for `end`.
    pub fn split_head(&self) -> Option<(Action, &SessionType)> {
        match self {
            SessionType::End => None,
            SessionType::Send(s, k) => Some((Action::Send(*s), k)),
            SessionType::Recv(s, k) => Some((Action::Recv(*s), k)),
        }
    }

    pub fn head(&self) -> Option<Action> {
        self.split_head().map(|(a, _)| a)
    }

    /// Number of actions before `end`.
    pub fn depth(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Some((_, next)) = cur.split_head() {
            n += 1;
            cur = next;
        }
        n
    }

    pub fn dual(&self) -> SessionType {
        match self {
            SessionType::End => SessionType::End,
            SessionType::Send(s, k) => SessionType::recv(*s, k.dual()),
            SessionType::Recv(s, k) => SessionType::send(*s, k.dual()),
        }
    }

    pub fn is_dual(&self, other: &SessionType) -> bool {
        match (self, other) {
            (SessionType::End, SessionType::End) => true,
            (SessionType::Send(a, k1), SessionType::Recv(b, k2))
            | (SessionType::Recv(a, k1), SessionType::Send(b, k2)) => a == b && k1.is_dual(k2),
            _ => false,
        }
    }
}

pub fn dual_type(s: &SessionType) -> SessionType {
    s.dual()
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.actions() {
            write!(f, "{a}.")?;
        }
        f.write_str("end")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CursorError {
    #[error("cursor is at the end of the protocol: nothing left to execute")]
    NoFuture,
    #[error("cursor is at the start of the protocol: nothing to undo")]
    NoPast,
}

/// Run-time session type `past ^ future`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HistoryType {
    past: Vec<Action>,
    future: SessionType,
}

impl HistoryType {
    /// `^S`: nothing executed yet.
    pub fn start(future: SessionType) -> Self {
        HistoryType { past: Vec::new(), future }
    }

    pub fn new(past: Vec<Action>, future: SessionType) -> Self {
        HistoryType { past, future }
    }

    pub fn past(&self) -> &[Action] {
        &self.past
    }

    pub fn future(&self) -> &SessionType {
        &self.future
    }

    pub fn is_at_start(&self) -> bool {
        self.past.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.future == SessionType::End
    }

    /// The whole protocol, past and future joined.
    pub fn protocol(&self) -> SessionType {
        let mut actions = self.past.clone();
        actions.extend(self.future.actions());
        SessionType::from_actions(actions)
    }

    pub fn advance(&self) -> Result<HistoryType, CursorError> {
        let (a, next) = self.future.split_head().ok_or(CursorError::NoFuture)?;
        let mut past = self.past.clone();
        past.push(a);
        Ok(HistoryType { past, future: next.clone() })
    }

    pub fn rewind(&self) -> Result<HistoryType, CursorError> {
        let (last, rest) = self.past.split_last().ok_or(CursorError::NoPast)?;
        Ok(HistoryType { past: rest.to_vec(), future: SessionType::prefixed(*last, self.future.clone()) })
    }
}

pub fn cursor_advance(h: &HistoryType) -> Result<HistoryType, CursorError> {
    h.advance()
}

pub fn cursor_rewind(h: &HistoryType) -> Result<HistoryType, CursorError> {
    h.rewind()
}

impl fmt::Display for HistoryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.past {
            write!(f, "{a}.")?;
        }
        write!(f, "^{}", self.future)
    }
}

/// User processes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    /// `u(x:S).P`
    Accept { service: Ident, var: Ident, stype: SessionType, body: Box<Process> },
    /// `~u(x:S).P`; `service` is `u` itself, the `~` is the request marker.
    Request { service: Ident, var: Ident, stype: SessionType, body: Box<Process> },
    /// `k!<v>.P`
    Output { subject: Ident, payload: Value, body: Box<Process> },
    /// `k?(x).P`
    Input { subject: Ident, var: Ident, body: Box<Process> },
    /// `new(a).P`
    Restrict { name: Ident, body: Box<Process> },
}

impl Process {
    pub fn accept(service: Ident, var: Ident, stype: SessionType, body: Process) -> Self {
        Process::Accept { service, var, stype, body: Box::new(body) }
    }

    pub fn request(service: Ident, var: Ident, stype: SessionType, body: Process) -> Self {
        Process::Request { service, var, stype, body: Box::new(body) }
    }

    pub fn output(subject: Ident, payload: Value, body: Process) -> Self {
        Process::Output { subject, payload, body: Box::new(body) }
    }

    pub fn input(subject: Ident, var: Ident, body: Process) -> Self {
        Process::Input { subject, var, body: Box::new(body) }
    }

    pub fn restrict(name: Ident, body: Process) -> Self {
        Process::Restrict { name, body: Box::new(body) }
    }

    pub fn body(&self) -> Option<&Process> {
        match self {
            Process::Nil => None,
            Process::Accept { body, .. }
            | Process::Request { body, .. }
            | Process::Output { body, .. }
            | Process::Input { body, .. }
            | Process::Restrict { body, .. } => Some(body),
        }
    }

    /// Names bound by the head construct of this process.
    pub fn head_binder(&self) -> Option<&Ident> {
        match self {
            Process::Accept { var, .. } | Process::Request { var, .. } | Process::Input { var, .. } => Some(var),
            Process::Restrict { name, .. } => Some(name),
            _ => None,
        }
    }

    /// Every identifier occurrence, binders included, in print order.
    pub fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        let mut cur = self;
        loop {
            match cur {
                Process::Nil => return,
                Process::Accept { service, var, body, .. } | Process::Request { service, var, body, .. } => {
                    f(service);
                    f(var);
                    cur = body;
                }
                Process::Output { subject, payload, body } => {
                    f(subject);
                    if let Value::Name(n) = payload {
                        f(n);
                    }
                    cur = body;
                }
                Process::Input { subject, var, body } => {
                    f(subject);
                    f(var);
                    cur = body;
                }
                Process::Restrict { name, body } => {
                    f(name);
                    cur = body;
                }
            }
        }
    }

    /// Free identifiers (binders are `var`s of prefixes and restricted names).
    pub fn free_idents(&self) -> BTreeSet<Ident> {
        fn go(p: &Process, bound: &mut Vec<String>, out: &mut BTreeSet<Ident>) {
            let mark = |n: &Ident, bound: &Vec<String>, out: &mut BTreeSet<Ident>| {
                if !bound.iter().any(|b| b == n.base()) {
                    out.insert(n.clone());
                }
            };
            match p {
                Process::Nil => {}
                Process::Accept { service, var, body, .. } | Process::Request { service, var, body, .. } => {
                    mark(service, bound, out);
                    bound.push(var.base().to_string());
                    go(body, bound, out);
                    bound.pop();
                }
                Process::Output { subject, payload, body } => {
                    mark(subject, bound, out);
                    if let Value::Name(n) = payload {
                        mark(n, bound, out);
                    }
                    go(body, bound, out);
                }
                Process::Input { subject, var, body } => {
                    mark(subject, bound, out);
                    bound.push(var.base().to_string());
                    go(body, bound, out);
                    bound.pop();
                }
                Process::Restrict { name, body } => {
                    bound.push(name.base().to_string());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Applies a base-renaming to every occurrence (binders included).
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Process {
        let r = |n: &Ident| rename_ident(n, map);
        match self {
            Process::Nil => Process::Nil,
            Process::Accept { service, var, stype, body } => {
                Process::accept(r(service), r(var), stype.clone(), body.rename(map))
            }
            Process::Request { service, var, stype, body } => {
                Process::request(r(service), r(var), stype.clone(), body.rename(map))
            }
            Process::Output { subject, payload, body } => {
                Process::output(r(subject), rename_value(payload, map), body.rename(map))
            }
            Process::Input { subject, var, body } => Process::input(r(subject), r(var), body.rename(map)),
            Process::Restrict { name, body } => Process::restrict(r(name), body.rename(map)),
        }
    }
}

pub(crate) fn rename_ident(n: &Ident, map: &BTreeMap<String, String>) -> Ident {
    match map.get(n.base()) {
        Some(b) => n.with_base(b.clone()),
        None => n.clone(),
    }
}

pub(crate) fn rename_value(v: &Value, map: &BTreeMap<String, String>) -> Value {
    match v {
        Value::Name(n) => Value::Name(rename_ident(n, map)),
        other => other.clone(),
    }
}

/// `proc[endpoints]{ process } store{ ... }`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Runner {
    pub endpoints: Vec<Ident>,
    pub process: Process,
    pub store: Store,
}

impl Runner {
    pub fn new(endpoints: Vec<Ident>, process: Process, store: Store) -> Self {
        Runner { endpoints, process, store }
    }

    /// A runner with no endpoints and an empty store.
    pub fn initial(process: Process) -> Self {
        Runner { endpoints: Vec::new(), process, store: Store::new() }
    }

    pub fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        for e in &self.endpoints {
            f(e);
        }
        self.process.visit_idents(f);
        self.store.visit_idents(f);
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Runner {
        Runner {
            endpoints: self.endpoints.iter().map(|e| rename_ident(e, map)).collect(),
            process: self.process.rename(map),
            store: self.store.rename(map),
        }
    }
}

/// `mon s { H ; [vars] ; [names] }`; stacks are bottom-first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monitor {
    pub endpoint: Ident,
    pub htype: HistoryType,
    pub vars: Vec<Value>,
    pub names: Vec<Ident>,
}

impl Monitor {
    pub fn new(endpoint: Ident, htype: HistoryType, vars: Vec<Value>, names: Vec<Ident>) -> Self {
        Monitor { endpoint, htype, vars, names }
    }

    /// Stacks hold one entry from session establishment plus one per
    /// communication not undone.
    pub fn stacks_balanced(&self) -> bool {
        let expected = self.htype.past().len() + 1;
        self.vars.len() == expected && self.names.len() == expected
    }

    pub fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        f(&self.endpoint);
        for v in &self.vars {
            if let Value::Name(n) = v {
                f(n);
            }
        }
        for n in &self.names {
            f(n);
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Monitor {
        Monitor {
            endpoint: rename_ident(&self.endpoint, map),
            htype: self.htype.clone(),
            vars: self.vars.iter().map(|v| rename_value(v, map)).collect(),
            names: self.names.iter().map(|n| rename_ident(n, map)).collect(),
        }
    }
}

/// Run-time configurations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Configuration {
    Nil,
    Running(Runner),
    Monitor(Monitor),
    /// Restriction binds the whole dual pair of `name`'s base.
    Restrict(Ident, Box<Configuration>),
    Parallel(Box<Configuration>, Box<Configuration>),
}

impl Configuration {
    pub fn restrict(name: Ident, body: Configuration) -> Self {
        Configuration::Restrict(name.plain(), Box::new(body))
    }

    pub fn par(left: Configuration, right: Configuration) -> Self {
        Configuration::Parallel(Box::new(left), Box::new(right))
    }

    /// Right-nested parallel of the parts; `0` when empty.
    pub fn par_all(parts: impl IntoIterator<Item = Configuration>) -> Self {
        let mut parts: Vec<_> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Configuration::Nil;
        };
        while let Some(p) = parts.pop() {
            acc = Configuration::par(p, acc);
        }
        acc
    }

    /// Wraps `body` in restrictions, first name outermost.
    pub fn restrict_all(names: impl IntoIterator<Item = Ident>, body: Configuration) -> Self {
        let names: Vec<_> = names.into_iter().collect();
        names.into_iter().rev().fold(body, |acc, n| Configuration::restrict(n, acc))
    }

    pub fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        match self {
            Configuration::Nil => {}
            Configuration::Running(r) => r.visit_idents(f),
            Configuration::Monitor(m) => m.visit_idents(f),
            Configuration::Restrict(n, body) => {
                f(n);
                body.visit_idents(f);
            }
            Configuration::Parallel(l, r) => {
                l.visit_idents(f);
                r.visit_idents(f);
            }
        }
    }

    /// Every base token occurring anywhere, free or bound.
    pub fn all_bases(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_idents(&mut |n| {
            out.insert(n.base().to_string());
        });
        out
    }

    /// Free identifiers: anything not under a restriction or process binder
    /// of the same base.
    pub fn free_idents(&self) -> BTreeSet<Ident> {
        fn go(c: &Configuration, bound: &mut Vec<String>, out: &mut BTreeSet<Ident>) {
            let keep = |n: &Ident, bound: &Vec<String>| !bound.iter().any(|b| b == n.base());
            match c {
                Configuration::Nil => {}
                Configuration::Running(r) => {
                    let mut all = BTreeSet::new();
                    for e in &r.endpoints {
                        all.insert(e.clone());
                    }
                    all.extend(r.process.free_idents());
                    r.store.visit_idents(&mut |n| {
                        all.insert(n.clone());
                    });
                    out.extend(all.into_iter().filter(|n| keep(n, bound)));
                }
                Configuration::Monitor(m) => {
                    m.visit_idents(&mut |n| {
                        if keep(n, bound) {
                            out.insert(n.clone());
                        }
                    });
                }
                Configuration::Restrict(n, body) => {
                    bound.push(n.base().to_string());
                    go(body, bound, out);
                    bound.pop();
                }
                Configuration::Parallel(l, r) => {
                    go(l, bound, out);
                    go(r, bound, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn free_bases(&self) -> BTreeSet<String> {
        self.free_idents().into_iter().map(|n| n.base().to_string()).collect()
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Configuration {
        match self {
            Configuration::Nil => Configuration::Nil,
            Configuration::Running(r) => Configuration::Running(r.rename(map)),
            Configuration::Monitor(m) => Configuration::Monitor(m.rename(map)),
            Configuration::Restrict(n, body) => Configuration::Restrict(rename_ident(n, map), Box::new(body.rename(map))),
            Configuration::Parallel(l, r) => Configuration::par(l.rename(map), r.rename(map)),
        }
    }

    pub fn runners(&self) -> Vec<&Runner> {
        let mut out = Vec::new();
        self.collect(&mut out, &mut Vec::new());
        out
    }

    pub fn monitors(&self) -> Vec<&Monitor> {
        let mut out = Vec::new();
        self.collect(&mut Vec::new(), &mut out);
        out
    }

    fn collect<'a>(&'a self, runners: &mut Vec<&'a Runner>, monitors: &mut Vec<&'a Monitor>) {
        match self {
            Configuration::Nil => {}
            Configuration::Running(r) => runners.push(r),
            Configuration::Monitor(m) => monitors.push(m),
            Configuration::Restrict(_, body) => body.collect(runners, monitors),
            Configuration::Parallel(l, r) => {
                l.collect(runners, monitors);
                r.collect(runners, monitors);
            }
        }
    }

    /// No monitors, and every runner has no endpoints and an empty store.
    pub fn is_initial(&self) -> bool {
        self.monitors().is_empty() && self.runners().iter().all(|r| r.endpoints.is_empty() && r.store.is_empty())
    }

    /// Checks the structural invariants of well-formed configurations.
    pub fn validate(&self) -> Result<(), WellFormednessError> {
        crate::wellformed::validate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormednessError {
    #[error("endpoint `{0}` is owned by more than one running process")]
    DuplicateEndpointOwner(Ident),
    #[error("endpoint `{0}` has more than one monitor")]
    DuplicateMonitor(Ident),
    #[error("monitor on `{endpoint}` has {vars} vars and {names} names for {past} past actions (expected {expected} each)", expected = past + 1)]
    MalformedMonitorStacks { endpoint: Ident, vars: usize, names: usize, past: usize },
    #[error("monitored endpoint `{0}` is not owned by any running process")]
    UnownedMonitor(Ident),
    #[error("`{ident}` is used as a {found} where a {expected} is required")]
    KindMismatch { ident: Ident, expected: &'static str, found: NameKind },
    #[error("base `{0}` is used with more than one kind")]
    NameKindConflict(String),
    #[error("binder `{0}` is not distinct from other binders or free names")]
    BinderClash(String),
    #[error("variable `{0}` appears in the stores of two running processes")]
    SharedVariable(Ident),
}
