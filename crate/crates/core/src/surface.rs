//! Concrete syntax for `.rsx` files.
//!
//! ```text
//! config  := atom ("|" atom)*
//! atom    := "0" | runner | monitor | "new(" names ")." atom | "(" config ")"
//! runner  := "proc" "[" endpoints? "]" "{" process "}" "store" "{" bindings? "}"
//! monitor := "mon" endpoint "{" htype ";" "[" values? "]" ";" "[" ids? "]" "}"
//! process := "0" | prefix "." process | "new(" id ")." process
//! prefix  := id "(" id ":" stype ")"  |  "~" id "(" id ":" stype ")"
//!          | ["~"] id "!<" value ">"  |  ["~"] id "?(" id ")"
//! stype   := "end" | "!" sort "." stype | "?" sort "." stype
//! htype   := (action ".")* "^" stype?
//! ```
//!
//! The grammar does not say which kind of name an identifier is; that is
//! resolved from where the name is used. Clashing binders are renamed apart
//! before resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::store::Store;
use crate::syntax::{
    Action, Configuration, HistoryType, Ident, Monitor, NameKind, Polarity, Process, Runner, SessionType, Sort,
    Value, WellFormednessError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: expected {expected}, found {found}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("ill-formed configuration: {0}")]
    WellFormed(#[from] WellFormednessError),
    #[error("{span}: `~{name}` is a variable and has no dual")]
    DualVariable { name: String, span: SourceSpan },
}

/// A binder renamed during parsing to keep bound names distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Renaming {
    pub from: String,
    pub to: String,
    pub span: SourceSpan,
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(i64),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: &[&str] = &["proc", "store", "mon", "new", "end", "int", "bool", "true", "false"];

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span_at = |start: usize, end: usize, line: usize, column: usize| SourceSpan { start, end, line, column };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let (start, start_col) = (i, col);
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Word(src[start..i].to_string()), span_at(start, i, line, start_col)));
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let span = span_at(start, i, line, start_col);
            let n = src[start..i].parse::<i64>().map_err(|_| ParseError {
                span,
                expected: "an integer in range".into(),
                found: format!("`{}`", &src[start..i]),
            })?;
            out.push((Tok::Int(n), span));
            continue;
        }
        if "()[]{}<>.,;:|~!?^=".contains(c) {
            i += 1;
            col += 1;
            out.push((Tok::Sym(c), span_at(start, i, line, start_col)));
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        return Err(ParseError { span: span_at(i, i + ch.len_utf8(), line, col), expected: "a token".into(), found: format!("`{ch}`") });
    }
    out.push((Tok::Eof, span_at(src.len(), src.len(), line, col)));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw syntax: names unresolved

#[derive(Debug, Clone)]
struct RawName {
    tilde: bool,
    base: String,
    span: SourceSpan,
}

#[derive(Debug, Clone)]
enum RawValue {
    Int(i64),
    Bool(bool),
    Name(RawName),
}

#[derive(Debug, Clone)]
enum RawProc {
    Nil,
    Accept { service: RawName, var: RawName, stype: SessionType, body: Box<RawProc> },
    Request { service: RawName, var: RawName, stype: SessionType, body: Box<RawProc> },
    Output { subject: RawName, payload: RawValue, body: Box<RawProc> },
    Input { subject: RawName, var: RawName, body: Box<RawProc> },
    Restrict { name: RawName, body: Box<RawProc> },
}

#[derive(Debug, Clone)]
struct RawRunner {
    endpoints: Vec<RawName>,
    process: RawProc,
    store: Vec<(RawName, Vec<RawValue>)>,
}

#[derive(Debug, Clone)]
struct RawMonitor {
    endpoint: RawName,
    htype: HistoryType,
    vars: Vec<RawValue>,
    names: Vec<RawName>,
}

#[derive(Debug, Clone)]
enum RawConfig {
    Nil,
    Runner(RawRunner),
    Monitor(RawMonitor),
    Restrict(Vec<RawName>, Box<RawConfig>),
    Par(Vec<RawConfig>),
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError { span: self.span(), expected: expected.to_string(), found: self.peek().to_string() })
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.fail(&format!("`{c}`"))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == kw)
    }

    fn kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<RawName, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(RawName { tilde: false, base: w, span })
            }
            _ => self.fail("an identifier"),
        }
    }

    fn name(&mut self) -> Result<RawName, ParseError> {
        let span = self.span();
        if self.eat_sym('~') {
            let mut n = self.ident()?;
            n.tilde = true;
            n.span.start = span.start;
            n.span.column = span.column;
            n.span.line = span.line;
            Ok(n)
        } else {
            self.ident()
        }
    }

    fn list<T>(&mut self, close: char, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            self.sym(',')?;
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        if self.is_kw("int") {
            self.bump();
            Ok(Sort::Int)
        } else if self.is_kw("bool") {
            self.bump();
            Ok(Sort::Bool)
        } else {
            self.fail("a sort (`int` or `bool`)")
        }
    }

    fn stype(&mut self) -> Result<SessionType, ParseError> {
        let mut actions = Vec::new();
        loop {
            if self.is_kw("end") {
                self.bump();
                return Ok(SessionType::from_actions(actions));
            }
            let a = if self.eat_sym('!') {
                Action::Send(self.sort()?)
            } else if self.eat_sym('?') {
                Action::Recv(self.sort()?)
            } else {
                return self.fail("`end`, `!` or `?`");
            };
            actions.push(a);
            self.sym('.')?;
        }
    }

    fn htype(&mut self) -> Result<HistoryType, ParseError> {
        let mut past = Vec::new();
        while !self.eat_sym('^') {
            let a = if self.eat_sym('!') {
                Action::Send(self.sort()?)
            } else if self.eat_sym('?') {
                Action::Recv(self.sort()?)
            } else {
                return self.fail("`^`, `!` or `?`");
            };
            past.push(a);
            self.sym('.')?;
        }
        let starts_type = self.is_kw("end") || matches!(self.peek(), Tok::Sym('!') | Tok::Sym('?'));
        let future = if starts_type { self.stype()? } else { SessionType::End };
        Ok(HistoryType::new(past, future))
    }

    fn value(&mut self) -> Result<RawValue, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(RawValue::Int(n))
            }
            Tok::Word(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(RawValue::Bool(w == "true"))
            }
            Tok::Word(_) | Tok::Sym('~') => Ok(RawValue::Name(self.name()?)),
            _ => self.fail("a value"),
        }
    }

    fn process(&mut self) -> Result<RawProc, ParseError> {
        if *self.peek() == Tok::Int(0) {
            self.bump();
            return Ok(RawProc::Nil);
        }
        if self.is_kw("new") {
            self.bump();
            self.sym('(')?;
            let name = self.ident()?;
            self.sym(')')?;
            self.sym('.')?;
            let body = self.process()?;
            return Ok(RawProc::Restrict { name, body: Box::new(body) });
        }
        let marker_span = self.span();
        let marker = self.eat_sym('~');
        let mut subject = self.name()?;
        let prefix = match self.peek() {
            Tok::Sym('(') => {
                self.bump();
                let var = self.ident()?;
                self.sym(':')?;
                let stype = self.stype()?;
                self.sym(')')?;
                (true, var, stype)
            }
            Tok::Sym('!') | Tok::Sym('?') if marker && subject.tilde => {
                return self.fail("`(` after a doubly-marked name");
            }
            Tok::Sym('!') => {
                self.bump();
                self.sym('<')?;
                let payload = self.value()?;
                self.sym('>')?;
                self.sym('.')?;
                if marker {
                    subject.tilde = true;
                    subject.span.start = marker_span.start;
                }
                let body = self.process()?;
                return Ok(RawProc::Output { subject, payload, body: Box::new(body) });
            }
            Tok::Sym('?') => {
                self.bump();
                self.sym('(')?;
                let var = self.ident()?;
                self.sym(')')?;
                self.sym('.')?;
                if marker {
                    subject.tilde = true;
                    subject.span.start = marker_span.start;
                }
                let body = self.process()?;
                return Ok(RawProc::Input { subject, var, body: Box::new(body) });
            }
            _ => return self.fail("`(`, `!<` or `?(`"),
        };
        let (_, var, stype) = prefix;
        self.sym('.')?;
        let body = Box::new(self.process()?);
        Ok(if marker {
            RawProc::Request { service: subject, var, stype, body }
        } else {
            RawProc::Accept { service: subject, var, stype, body }
        })
    }

    fn runner(&mut self) -> Result<RawRunner, ParseError> {
        self.kw("proc")?;
        self.sym('[')?;
        let endpoints = self.list(']', Self::name)?;
        self.sym('{')?;
        let process = self.process()?;
        self.sym('}')?;
        self.kw("store")?;
        self.sym('{')?;
        let store = self.list('}', |p| {
            let k = p.ident()?;
            p.sym('=')?;
            p.sym('[')?;
            let vs = p.list(']', Self::value)?;
            if vs.is_empty() {
                return p.fail("a nonempty value list");
            }
            Ok((k, vs))
        })?;
        Ok(RawRunner { endpoints, process, store })
    }

    fn monitor(&mut self) -> Result<RawMonitor, ParseError> {
        self.kw("mon")?;
        let endpoint = self.name()?;
        self.sym('{')?;
        let htype = self.htype()?;
        self.sym(';')?;
        self.sym('[')?;
        let vars = self.list(']', Self::value)?;
        self.sym(';')?;
        self.sym('[')?;
        let names = self.list(']', Self::name)?;
        self.sym('}')?;
        Ok(RawMonitor { endpoint, htype, vars, names })
    }

    fn atom(&mut self) -> Result<RawConfig, ParseError> {
        match self.peek() {
            Tok::Int(0) => {
                self.bump();
                Ok(RawConfig::Nil)
            }
            Tok::Sym('(') => {
                self.bump();
                let c = self.config()?;
                self.sym(')')?;
                Ok(c)
            }
            Tok::Word(w) if w == "proc" => Ok(RawConfig::Runner(self.runner()?)),
            Tok::Word(w) if w == "mon" => Ok(RawConfig::Monitor(self.monitor()?)),
            Tok::Word(w) if w == "new" => {
                self.bump();
                self.sym('(')?;
                let names = self.list(')', Self::name)?;
                if names.is_empty() {
                    return self.fail("at least one restricted name");
                }
                self.sym('.')?;
                let body = self.atom()?;
                Ok(RawConfig::Restrict(names, Box::new(body)))
            }
            _ => self.fail("a configuration (`0`, `proc`, `mon`, `new` or `(`)"),
        }
    }

    fn config(&mut self) -> Result<RawConfig, ParseError> {
        let mut parts = vec![self.atom()?];
        while self.eat_sym('|') {
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { RawConfig::Par(parts) })
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail("end of input")
        }
    }
}

// ---------------------------------------------------------------------------
// Binder freshening

struct Freshener {
    used: BTreeSet<String>,
    renamings: Vec<Renaming>,
}

type Env = BTreeMap<String, String>;

fn lookup(env: &Env, n: &RawName) -> RawName {
    RawName { base: env.get(&n.base).cloned().unwrap_or_else(|| n.base.clone()), ..n.clone() }
}

fn lookup_value(env: &Env, v: &RawValue) -> RawValue {
    match v {
        RawValue::Name(n) => RawValue::Name(lookup(env, n)),
        other => other.clone(),
    }
}

impl Freshener {
    fn bind(&mut self, env: &mut Env, n: &RawName) -> RawName {
        let new = if self.used.contains(&n.base) {
            let stem = n.base.trim_end_matches(|c: char| c.is_ascii_digit());
            let stem = if stem.is_empty() { "n" } else { stem };
            let fresh = (1..).map(|i| format!("{stem}{i}")).find(|c| !self.used.contains(c)).expect("unbounded");
            self.renamings.push(Renaming { from: n.base.clone(), to: fresh.clone(), span: n.span });
            fresh
        } else {
            n.base.clone()
        };
        self.used.insert(new.clone());
        env.insert(n.base.clone(), new.clone());
        RawName { base: new, ..n.clone() }
    }

    fn process(&mut self, p: &RawProc, env: &Env) -> RawProc {
        let mut env = env.clone();
        match p {
            RawProc::Nil => RawProc::Nil,
            RawProc::Accept { service, var, stype, body } | RawProc::Request { service, var, stype, body } => {
                let service = lookup(&env, service);
                let var = self.bind(&mut env, var);
                let body = Box::new(self.process(body, &env));
                if matches!(p, RawProc::Accept { .. }) {
                    RawProc::Accept { service, var, stype: stype.clone(), body }
                } else {
                    RawProc::Request { service, var, stype: stype.clone(), body }
                }
            }
            RawProc::Output { subject, payload, body } => RawProc::Output {
                subject: lookup(&env, subject),
                payload: lookup_value(&env, payload),
                body: Box::new(self.process(body, &env)),
            },
            RawProc::Input { subject, var, body } => {
                let subject = lookup(&env, subject);
                let var = self.bind(&mut env, var);
                RawProc::Input { subject, var, body: Box::new(self.process(body, &env)) }
            }
            RawProc::Restrict { name, body } => {
                let name = self.bind(&mut env, name);
                RawProc::Restrict { name, body: Box::new(self.process(body, &env)) }
            }
        }
    }

    fn config(&mut self, c: &RawConfig, env: &Env) -> RawConfig {
        match c {
            RawConfig::Nil => RawConfig::Nil,
            RawConfig::Par(parts) => RawConfig::Par(parts.iter().map(|p| self.config(p, env)).collect()),
            RawConfig::Restrict(names, body) => {
                let mut env = env.clone();
                let mut bound: Vec<RawName> = Vec::new();
                let mut seen = BTreeSet::new();
                for n in names {
                    if seen.insert(n.base.clone()) {
                        bound.push(self.bind(&mut env, &RawName { tilde: false, ..n.clone() }));
                    }
                }
                RawConfig::Restrict(bound, Box::new(self.config(body, &env)))
            }
            RawConfig::Runner(r) => RawConfig::Runner(RawRunner {
                endpoints: r.endpoints.iter().map(|e| lookup(env, e)).collect(),
                process: self.process(&r.process, env),
                store: r.store.iter().map(|(k, vs)| (lookup(env, k), vs.iter().map(|v| lookup_value(env, v)).collect())).collect(),
            }),
            RawConfig::Monitor(m) => RawConfig::Monitor(RawMonitor {
                endpoint: lookup(env, &m.endpoint),
                htype: m.htype.clone(),
                vars: m.vars.iter().map(|v| lookup_value(env, v)).collect(),
                names: m.names.iter().map(|n| lookup(env, n)).collect(),
            }),
        }
    }
}

fn free_bases_proc(p: &RawProc, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let mark = |n: &RawName, bound: &Vec<String>, out: &mut BTreeSet<String>| {
        if !bound.contains(&n.base) {
            out.insert(n.base.clone());
        }
    };
    match p {
        RawProc::Nil => {}
        RawProc::Accept { service, var, body, .. } | RawProc::Request { service, var, body, .. } => {
            mark(service, bound, out);
            bound.push(var.base.clone());
            free_bases_proc(body, bound, out);
            bound.pop();
        }
        RawProc::Output { subject, payload, body } => {
            mark(subject, bound, out);
            if let RawValue::Name(n) = payload {
                mark(n, bound, out);
            }
            free_bases_proc(body, bound, out);
        }
        RawProc::Input { subject, var, body } => {
            mark(subject, bound, out);
            bound.push(var.base.clone());
            free_bases_proc(body, bound, out);
            bound.pop();
        }
        RawProc::Restrict { name, body } => {
            bound.push(name.base.clone());
            free_bases_proc(body, bound, out);
            bound.pop();
        }
    }
}

fn free_bases(c: &RawConfig, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let mark = |n: &RawName, bound: &Vec<String>, out: &mut BTreeSet<String>| {
        if !bound.contains(&n.base) {
            out.insert(n.base.clone());
        }
    };
    match c {
        RawConfig::Nil => {}
        RawConfig::Par(ps) => ps.iter().for_each(|p| free_bases(p, bound, out)),
        RawConfig::Restrict(names, body) => {
            let k = bound.len();
            bound.extend(names.iter().map(|n| n.base.clone()));
            free_bases(body, bound, out);
            bound.truncate(k);
        }
        RawConfig::Runner(r) => {
            r.endpoints.iter().for_each(|e| mark(e, bound, out));
            free_bases_proc(&r.process, bound, out);
            for (k, vs) in &r.store {
                mark(k, bound, out);
                for v in vs {
                    if let RawValue::Name(n) = v {
                        mark(n, bound, out);
                    }
                }
            }
        }
        RawConfig::Monitor(m) => {
            mark(&m.endpoint, bound, out);
            for v in &m.vars {
                if let RawValue::Name(n) = v {
                    mark(n, bound, out);
                }
            }
            m.names.iter().for_each(|n| mark(n, bound, out));
        }
    }
}

// ---------------------------------------------------------------------------
// Kind resolution

#[derive(Default)]
struct Kinds {
    sessions: BTreeSet<String>,
    variables: BTreeSet<String>,
    channels: BTreeSet<String>,
}

impl Kinds {
    fn gather_proc(&mut self, p: &RawProc) {
        match p {
            RawProc::Nil => {}
            RawProc::Accept { var, body, .. } | RawProc::Request { var, body, .. } | RawProc::Input { var, body, .. } => {
                self.variables.insert(var.base.clone());
                self.gather_proc(body);
            }
            RawProc::Output { body, .. } => self.gather_proc(body),
            RawProc::Restrict { name, body } => {
                self.channels.insert(name.base.clone());
                self.gather_proc(body);
            }
        }
    }

    fn gather(&mut self, c: &RawConfig) {
        match c {
            RawConfig::Nil => {}
            RawConfig::Par(ps) => ps.iter().for_each(|p| self.gather(p)),
            RawConfig::Restrict(_, body) => self.gather(body),
            RawConfig::Runner(r) => {
                for e in &r.endpoints {
                    self.sessions.insert(e.base.clone());
                }
                for (k, _) in &r.store {
                    self.variables.insert(k.base.clone());
                }
                self.gather_proc(&r.process);
            }
            RawConfig::Monitor(m) => {
                self.sessions.insert(m.endpoint.base.clone());
                for v in &m.vars {
                    if let RawValue::Name(n) = v {
                        self.variables.insert(n.base.clone());
                    }
                }
            }
        }
    }

    /// Services that are not variables are channels.
    fn gather_services(&mut self, c: &RawConfig) {
        fn proc_services(k: &mut Kinds, p: &RawProc) {
            let mut cur = p;
            loop {
                match cur {
                    RawProc::Nil => return,
                    RawProc::Accept { service, body, .. } | RawProc::Request { service, body, .. } => {
                        if !k.variables.contains(&service.base) && !k.sessions.contains(&service.base) {
                            k.channels.insert(service.base.clone());
                        }
                        cur = body;
                    }
                    RawProc::Output { body, .. } | RawProc::Input { body, .. } | RawProc::Restrict { body, .. } => cur = body,
                }
            }
        }
        match c {
            RawConfig::Par(ps) => ps.iter().for_each(|p| self.gather_services(p)),
            RawConfig::Restrict(_, body) => self.gather_services(body),
            RawConfig::Runner(r) => proc_services(self, &r.process),
            _ => {}
        }
    }

    fn conflict(&self) -> Option<String> {
        self.sessions
            .intersection(&self.variables)
            .chain(self.sessions.intersection(&self.channels))
            .chain(self.variables.intersection(&self.channels))
            .next()
            .cloned()
    }

    fn kind_of(&self, base: &str) -> Option<NameKind> {
        if self.variables.contains(base) {
            Some(NameKind::Variable)
        } else if self.sessions.contains(base) {
            Some(NameKind::Session)
        } else if self.channels.contains(base) {
            Some(NameKind::Channel)
        } else {
            None
        }
    }
}

struct Resolver {
    kinds: Kinds,
}

impl Resolver {
    fn make(&self, n: &RawName, kind: NameKind) -> Result<Ident, SurfaceError> {
        let pol = if n.tilde { Polarity::Dual } else { Polarity::Plain };
        Ident::new(kind, n.base.clone(), pol).map_err(|_| SurfaceError::DualVariable { name: n.base.clone(), span: n.span })
    }

    fn with_default(&self, n: &RawName, default: NameKind) -> Result<Ident, SurfaceError> {
        self.make(n, self.kinds.kind_of(&n.base).unwrap_or(default))
    }

    fn value(&self, v: &RawValue, default: NameKind) -> Result<Value, SurfaceError> {
        Ok(match v {
            RawValue::Int(i) => Value::Int(*i),
            RawValue::Bool(b) => Value::Bool(*b),
            RawValue::Name(n) => {
                let default = if n.tilde && default == NameKind::Variable { NameKind::Channel } else { default };
                Value::Name(self.with_default(n, default)?)
            }
        })
    }

    fn process(&self, p: &RawProc) -> Result<Process, SurfaceError> {
        Ok(match p {
            RawProc::Nil => Process::Nil,
            RawProc::Accept { service, var, stype, body } => Process::accept(
                self.with_default(service, NameKind::Channel)?,
                self.make(var, NameKind::Variable)?,
                stype.clone(),
                self.process(body)?,
            ),
            RawProc::Request { service, var, stype, body } => Process::request(
                self.with_default(service, NameKind::Channel)?,
                self.make(var, NameKind::Variable)?,
                stype.clone(),
                self.process(body)?,
            ),
            RawProc::Output { subject, payload, body } => Process::output(
                self.with_default(subject, NameKind::Session)?,
                self.value(payload, NameKind::Variable)?,
                self.process(body)?,
            ),
            RawProc::Input { subject, var, body } => Process::input(
                self.with_default(subject, NameKind::Session)?,
                self.make(var, NameKind::Variable)?,
                self.process(body)?,
            ),
            RawProc::Restrict { name, body } => Process::restrict(self.make(name, NameKind::Channel)?, self.process(body)?),
        })
    }

    fn config(&self, c: &RawConfig) -> Result<Configuration, SurfaceError> {
        Ok(match c {
            RawConfig::Nil => Configuration::Nil,
            RawConfig::Par(ps) => Configuration::par_all(ps.iter().map(|p| self.config(p)).collect::<Result<Vec<_>, _>>()?),
            RawConfig::Restrict(names, body) => {
                let mut body = self.config(body)?;
                for n in names.iter().rev() {
                    let kind = self.kinds.kind_of(&n.base).unwrap_or(NameKind::Channel);
                    if kind == NameKind::Variable {
                        let ident = Ident::variable(n.base.clone());
                        return Err(WellFormednessError::KindMismatch { ident, expected: "channel or session", found: kind }.into());
                    }
                    body = Configuration::restrict(self.make(&RawName { tilde: false, ..n.clone() }, kind)?, body);
                }
                body
            }
            RawConfig::Runner(r) => {
                let endpoints = r.endpoints.iter().map(|e| self.make(e, NameKind::Session)).collect::<Result<Vec<_>, _>>()?;
                let process = self.process(&r.process)?;
                let mut entries = Vec::new();
                for (k, vs) in &r.store {
                    let key = self.make(k, NameKind::Variable)?;
                    let vals = vs.iter().map(|v| self.value(v, NameKind::Channel)).collect::<Result<Vec<_>, _>>()?;
                    entries.push((key, vals));
                }
                Configuration::Running(Runner::new(endpoints, process, Store::from_entries(entries)))
            }
            RawConfig::Monitor(m) => Configuration::Monitor(Monitor::new(
                self.make(&m.endpoint, NameKind::Session)?,
                m.htype.clone(),
                m.vars.iter().map(|v| self.value(v, NameKind::Variable)).collect::<Result<Vec<_>, _>>()?,
                m.names.iter().map(|n| self.with_default(n, NameKind::Channel)).collect::<Result<Vec<_>, _>>()?,
            )),
        })
    }
}

fn parse_raw(text: &str) -> Result<RawConfig, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let c = p.config()?;
    p.finish()?;
    Ok(c)
}

/// Parses a configuration, renaming clashing binders apart, and validates it.
pub fn parse_config_with_renamings(text: &str) -> Result<(Configuration, Vec<Renaming>), SurfaceError> {
    let raw = parse_raw(text)?;
    let mut free = BTreeSet::new();
    free_bases(&raw, &mut Vec::new(), &mut free);
    let mut fr = Freshener { used: free, renamings: Vec::new() };
    let raw = fr.config(&raw, &Env::new());

    let mut kinds = Kinds::default();
    kinds.gather(&raw);
    if let Some(base) = kinds.conflict() {
        return Err(WellFormednessError::NameKindConflict(base).into());
    }
    kinds.gather_services(&raw);
    let config = Resolver { kinds }.config(&raw)?;
    config.validate()?;
    Ok((config, fr.renamings))
}

pub fn parse_config(text: &str) -> Result<Configuration, SurfaceError> {
    parse_config_with_renamings(text).map(|(c, _)| c)
}

/// Parses and returns the canonical representative, the starting point for
/// runs, traces and stepper sessions.
pub fn load_config(text: &str) -> Result<Configuration, SurfaceError> {
    parse_config(text).map(|m| crate::congruence::canonicalize(&m).to_config())
}

pub fn parse_session_type(text: &str) -> Result<SessionType, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let s = p.stype()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_history_type(text: &str) -> Result<HistoryType, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let h = p.htype()?;
    p.finish()?;
    Ok(h)
}

// ---------------------------------------------------------------------------
// Printer

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut cur = self;
        loop {
            match cur {
                Process::Nil => return f.write_str("0"),
                Process::Accept { service, var, stype, body } => {
                    write!(f, "{service}({var}:{stype}). ")?;
                    cur = body;
                }
                Process::Request { service, var, stype, body } => {
                    write!(f, "~{service}({var}:{stype}). ")?;
                    cur = body;
                }
                Process::Output { subject, payload, body } => {
                    write!(f, "{subject}!<{payload}>. ")?;
                    cur = body;
                }
                Process::Input { subject, var, body } => {
                    write!(f, "{subject}?({var}). ")?;
                    cur = body;
                }
                Process::Restrict { name, body } => {
                    write!(f, "new({name}). ")?;
                    cur = body;
                }
            }
        }
    }
}

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for Runner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "proc[{}]{{ {} }} {}", join(&self.endpoints, ","), self.process, self.store)
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mon {} {{ {} ; [{}] ; [{}] }}", self.endpoint, self.htype, join(&self.vars, ", "), join(&self.names, ", "))
    }
}

fn write_atom(c: &Configuration, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match c {
        Configuration::Parallel(..) => write!(f, "({c})"),
        _ => write!(f, "{c}"),
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Configuration::Nil => f.write_str("0"),
            Configuration::Running(r) => write!(f, "{r}"),
            Configuration::Monitor(m) => write!(f, "{m}"),
            Configuration::Restrict(..) => {
                let mut names = Vec::new();
                let mut body = self;
                while let Configuration::Restrict(n, b) = body {
                    names.push(n.plain().to_string());
                    if n.is_session() {
                        names.push(n.plain().dual().expect("session").to_string());
                    }
                    body = b;
                }
                write!(f, "new({}).", names.join(","))?;
                write_atom(body, f)
            }
            Configuration::Parallel(l, r) => write!(f, "{l} | {r}"),
        }
    }
}

/// Single-line concrete syntax.
pub fn print(m: &Configuration) -> String {
    m.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::equiv;

    const INT_EXCHANGE: &str = "proc[]{ ~a(x:!int.end). x!<5>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{}";

    #[test]
    fn parses_request_runner() {
        let c = parse_config("proc[]{ ~a(x:!int.end). x!<5>. 0 } store{}").unwrap();
        let Configuration::Running(r) = &c else { panic!("expected runner") };
        match &r.process {
            Process::Request { service, var, stype, .. } => {
                assert_eq!(*service, Ident::channel("a"));
                assert_eq!(*var, Ident::variable("x"));
                assert_eq!(stype.to_string(), "!int.end");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.is_initial());
    }

    #[test]
    fn parses_nil() {
        assert_eq!(parse_config("0").unwrap(), Configuration::Nil);
        assert_eq!(print(&Configuration::Nil), "0");
        assert_eq!(parse_config("  -- nothing\n 0 ").unwrap(), Configuration::Nil);
    }

    #[test]
    fn monitor_round_trip() {
        let text = "new(s0,~s0).(proc[s0]{ 0 } store{ x = [~s0] } | mon s0 { !int . ^ end ; [x, 5] ; [~a, s0] })";
        let c = parse_config(text).unwrap();
        let m = c.monitors()[0].clone();
        assert_eq!(m.htype.past(), &[Action::Send(Sort::Int)]);
        assert_eq!(m.names, vec![Ident::channel("a").dual().unwrap(), Ident::session("s0")]);
        assert_eq!(m.to_string(), "mon s0 { !int.^end ; [x, 5] ; [~a, s0] }");
        let again = parse_config(&print(&c)).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn int_exchange_round_trips() {
        let c = parse_config(INT_EXCHANGE).unwrap();
        assert_eq!(print(&c), INT_EXCHANGE);
        assert!(equiv(&parse_config(&print(&c)).unwrap(), &c));
    }

    #[test]
    fn clashing_binders_are_renamed() {
        let (c, ren) = parse_config_with_renamings(
            "proc[]{ a(x:?int.?int.end). x?(z). x?(z). 0 } store{} | proc[]{ ~a(x:!int.!int.end). x!<1>. x!<2>. 0 } store{}",
        )
        .unwrap();
        assert_eq!(ren.len(), 2);
        assert_eq!(ren[0].from, "z");
        assert_eq!(ren[0].to, "z1");
        assert_eq!(ren[1].from, "x");
        assert_eq!(ren[1].to, "x1");
        assert!(print(&c).contains("~a(x1:!int.!int.end). x1!<1>. x1!<2>. 0"));
    }

    #[test]
    fn binder_clashing_with_store_key() {
        let (c, ren) = parse_config_with_renamings("new(s0,~s0).(proc[s0]{ s0?(x). 0 } store{ x = [1] })").unwrap();
        assert_eq!(ren.len(), 1);
        assert!(print(&c).contains("s0?(x1)"));
    }

    #[test]
    fn kinds_resolved_from_usage() {
        let c = parse_config("proc[]{ x(y:!int.end). y!<w>. 0 } store{ x = [a] }").unwrap();
        let r = c.runners()[0];
        let Process::Accept { service, body, .. } = &r.process else { panic!() };
        assert!(service.is_variable());
        let Process::Output { subject, payload, .. } = &**body else { panic!() };
        assert!(subject.is_variable());
        assert!(payload.as_name().unwrap().is_variable());
        assert!(r.store.current(&Ident::variable("x")).unwrap().as_name().unwrap().is_channel());
    }

    #[test]
    fn parse_errors_carry_spans() {
        let err = parse_config("proc[]{ ~a(x:!int.end). x!<5> 0 } store{}").unwrap_err();
        let SurfaceError::Parse(e) = err else { panic!("expected parse error") };
        assert_eq!(e.span.line, 1);
        assert_eq!(e.span.column, 31);
        assert_eq!(e.expected, "`.`");

        let err = parse_config("proc[]{ 0 }\n store{} | ").unwrap_err();
        let SurfaceError::Parse(e) = err else { panic!() };
        assert_eq!(e.span.line, 2);
    }

    #[test]
    fn wellformedness_errors() {
        let err = parse_config("proc[s0]{ 0 } store{} | proc[s0]{ 0 } store{}").unwrap_err();
        assert!(matches!(err, SurfaceError::WellFormed(WellFormednessError::DuplicateEndpointOwner(_))));
        let err = parse_config("proc[s0]{ 0 } store{} | mon s0 { ^end ; [] ; [] }").unwrap_err();
        assert!(matches!(err, SurfaceError::WellFormed(WellFormednessError::MalformedMonitorStacks { .. })));
        let err = parse_config("proc[]{ a(x:end). ~x!<1>. 0 } store{}").unwrap_err();
        assert!(matches!(err, SurfaceError::DualVariable { .. }));
    }

    #[test]
    fn history_type_forms() {
        assert_eq!(parse_history_type("^!int.end").unwrap().to_string(), "^!int.end");
        assert_eq!(parse_history_type("!int.?bool.^").unwrap().to_string(), "!int.?bool.^end");
        assert_eq!(parse_session_type("?bool.!int.end").unwrap().depth(), 2);
    }

    #[test]
    fn restriction_binds_tightly() {
        let c = parse_config("new(b).proc[]{ b(x:end). 0 } store{} | proc[]{ ~b(y:end). 0 } store{}").unwrap();
        // the second runner's `b` is free, so the bound one is renamed apart
        assert!(matches!(c, Configuration::Parallel(..)));
        let printed = print(&c);
        assert!(printed.starts_with("new(b1).proc[]{ b1(x:end). 0 }"), "{printed}");
    }
}
