//! Random program generation, state-graph exploration and empirical checks of
//! the reversibility properties: loop, square, causal consistency, plus the
//! normal-form and monitor bookkeeping invariants.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::congruence::{canonicalize, decompose, has_normal_shape, Component};
use crate::semantics::{apply, concurrent, enumerate, Direction, Label, Redex, Rule};
use crate::syntax::{Action, Configuration, Ident, Process, Runner, SessionType, Sort, Value};

// ---------------------------------------------------------------------------
// Generation

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub max_processes: usize,
    pub max_depth: usize,
    pub int_weight: u32,
    pub bool_weight: u32,
    pub seed: u64,
    /// Probability that a pair gets one payload of the wrong sort.
    pub mismatch_rate: f64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec { max_processes: 4, max_depth: 4, int_weight: 3, bool_weight: 1, seed: 0, mismatch_rate: 0.0 }
    }
}

impl GenSpec {
    pub fn with_seed(seed: u64) -> Self {
        GenSpec { seed, ..GenSpec::default() }
    }
}

const CHANNELS: [&str; 4] = ["a", "b", "c", "d"];

fn numbered(stem: &str, i: usize) -> String {
    if i == 0 {
        stem.to_string()
    } else {
        format!("{stem}{i}")
    }
}

struct Gen<'a> {
    spec: &'a GenSpec,
    rng: ChaCha8Rng,
    inputs: usize,
}

impl Gen<'_> {
    fn sort(&mut self) -> Sort {
        let total = self.spec.int_weight + self.spec.bool_weight;
        if total == 0 || self.rng.gen_range(0..total) < self.spec.int_weight {
            Sort::Int
        } else {
            Sort::Bool
        }
    }

    fn literal(&mut self, sort: Sort) -> Value {
        match sort {
            Sort::Int => Value::Int(self.rng.gen_range(0..10)),
            Sort::Bool => Value::Bool(self.rng.gen_bool(0.5)),
        }
    }

    fn payload(&mut self, sort: Sort, received: &[(Ident, Sort)]) -> Value {
        let usable: Vec<&Ident> = received.iter().filter(|(_, s)| *s == sort).map(|(x, _)| x).collect();
        if !usable.is_empty() && self.rng.gen_bool(0.3) {
            Value::Name(usable[self.rng.gen_range(0..usable.len())].clone())
        } else {
            self.literal(sort)
        }
    }

    fn input_var(&mut self) -> Ident {
        let v = Ident::variable(numbered("z", self.inputs));
        self.inputs += 1;
        v
    }

    /// A request/accept pair following `actions` (requester's view).
    fn pair(&mut self, p: usize, chan: Ident, actions: &[Action]) -> (Runner, Runner) {
        let xr = Ident::variable(numbered("x", p));
        let ya = Ident::variable(numbered("y", p));
        let comms = actions.len();
        let bad = if comms > 0 && self.rng.gen_bool(self.spec.mismatch_rate.clamp(0.0, 1.0)) {
            Some(self.rng.gen_range(0..comms))
        } else {
            None
        };
        let (mut req_steps, mut acc_steps) = (Vec::new(), Vec::new());
        let mut req_got: Vec<(Ident, Sort)> = Vec::new();
        let mut acc_got: Vec<(Ident, Sort)> = Vec::new();
        for (n, a) in actions.iter().enumerate() {
            let wrong = bad == Some(n);
            match *a {
                Action::Send(u) => {
                    let v = if wrong { self.literal(flip(u)) } else { self.payload(u, &req_got) };
                    let z = self.input_var();
                    req_steps.push(Step::Out(xr.clone(), v));
                    acc_steps.push(Step::In(ya.clone(), z.clone()));
                    acc_got.push((z, u));
                }
                Action::Recv(u) => {
                    let v = if wrong { self.literal(flip(u)) } else { self.payload(u, &acc_got) };
                    let z = self.input_var();
                    acc_steps.push(Step::Out(ya.clone(), v));
                    req_steps.push(Step::In(xr.clone(), z.clone()));
                    req_got.push((z, u));
                }
            }
        }
        let s = SessionType::from_actions(actions.to_vec());
        let t = s.dual();
        let req = Process::request(chan.clone(), xr, s, build(req_steps));
        let acc = Process::accept(chan, ya, t, build(acc_steps));
        (Runner::initial(req), Runner::initial(acc))
    }
}

fn flip(s: Sort) -> Sort {
    match s {
        Sort::Int => Sort::Bool,
        Sort::Bool => Sort::Int,
    }
}

enum Step {
    Out(Ident, Value),
    In(Ident, Ident),
}

fn build(steps: Vec<Step>) -> Process {
    steps.into_iter().rev().fold(Process::Nil, |body, s| match s {
        Step::Out(k, v) => Process::output(k, v, body),
        Step::In(k, x) => Process::input(k, x, body),
    })
}

/// An initial configuration of request/accept pairs with dual types, each
/// process using a single session. Deterministic in the seed.
pub fn generate_initial(spec: &GenSpec) -> Configuration {
    let max_pairs = spec.max_processes / 2;
    if max_pairs == 0 {
        return Configuration::Nil;
    }
    let mut g = Gen { spec, rng: ChaCha8Rng::seed_from_u64(spec.seed), inputs: 0 };
    let pairs = g.rng.gen_range(1..=max_pairs);
    let mut parts = Vec::new();
    for p in 0..pairs {
        let chan = Ident::channel(CHANNELS[g.rng.gen_range(0..=p.min(CHANNELS.len() - 1))]);
        let depth = if spec.max_depth == 0 { 0 } else { g.rng.gen_range(1..=spec.max_depth) };
        let actions: Vec<Action> = (0..depth)
            .map(|_| {
                let u = g.sort();
                if g.rng.gen_bool(0.5) {
                    Action::Send(u)
                } else {
                    Action::Recv(u)
                }
            })
            .collect();
        let (r, a) = g.pair(p, chan, &actions);
        parts.push(Configuration::Running(r));
        parts.push(Configuration::Running(a));
    }
    Configuration::par_all(parts)
}

fn process_binders(p: &Process, out: &mut BTreeSet<String>) {
    let mut cur = p;
    while let Some(body) = cur.body() {
        if let Some(b) = cur.head_binder() {
            out.insert(b.base().to_string());
        }
        cur = body;
    }
}

/// A random configuration congruent to `m`: bound names renamed, components
/// shuffled and regrouped, restrictions reordered, nils sprinkled in.
pub fn scramble<R: Rng>(m: &Configuration, rng: &mut R) -> Configuration {
    let d = decompose(m);
    let mut all = decompose(m).plug().all_bases();
    all.extend(m.all_bases());
    let mut map = BTreeMap::new();
    let mut next = 0usize;
    let mut fresh = |all: &mut BTreeSet<String>, rng: &mut R| loop {
        let cand = format!("q{}", next + rng.gen_range(0..3));
        next += 1;
        if all.insert(cand.clone()) {
            return cand;
        }
    };
    for n in &d.context.restricted {
        map.insert(n.base().to_string(), fresh(&mut all, rng));
    }
    let mut binders = BTreeSet::new();
    for c in &d.components {
        if let Component::Running(r) = c {
            process_binders(&r.process, &mut binders);
        }
    }
    for b in binders {
        map.insert(b, fresh(&mut all, rng));
    }
    let mut restricted: Vec<Ident> = d.context.restricted.iter().map(|n| n.with_base(map[n.base()].clone())).collect();
    let mut parts: Vec<Configuration> = d.components.iter().map(|c| c.clone().into_config().rename(&map)).collect();
    let nils = rng.gen_range(0..3);
    for _ in 0..nils {
        parts.push(Configuration::Nil);
    }
    parts.shuffle(rng);
    restricted.shuffle(rng);
    let body = group(parts, rng);
    if rng.gen_bool(0.3) {
        let unused = Ident::channel(fresh(&mut all, rng));
        restricted.push(unused);
    }
    let wrapped = Configuration::restrict_all(restricted, body);
    if rng.gen_bool(0.3) {
        Configuration::par(Configuration::Nil, wrapped)
    } else {
        wrapped
    }
}

fn group(mut parts: Vec<Configuration>, rng: &mut impl Rng) -> Configuration {
    match parts.len() {
        0 => Configuration::Nil,
        1 => parts.pop().expect("one"),
        n => {
            let k = rng.gen_range(1..n);
            let right = parts.split_off(k);
            Configuration::par(group(parts, rng), group(right, rng))
        }
    }
}

/// Follows random redexes (either direction) for up to `steps` steps.
pub fn random_walk(m: &Configuration, steps: usize, rng: &mut impl Rng) -> Configuration {
    let mut cur = m.clone();
    for _ in 0..steps {
        let (mut fw, bw) = enumerate(&cur);
        fw.extend(bw);
        let Some(r) = fw.choose(rng) else { break };
        cur = apply(&cur, r).expect("freshly enumerated");
    }
    cur
}

// ---------------------------------------------------------------------------
// Exploration

#[derive(Debug, Clone)]
pub struct Node {
    pub text: String,
    pub config: Configuration,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rule: Rule,
    pub label: Label,
    pub redex: Redex,
}

impl Edge {
    pub fn direction(&self) -> Direction {
        self.rule.direction()
    }
}

/// Configurations reachable from an initial one, keyed by canonical text.
/// Node 0 is the root.
#[derive(Debug, Clone, Default)]
pub struct StateGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Set when the node budget stopped exploration; the last nodes may be
    /// unexpanded.
    pub truncated: bool,
    index: HashMap<String, usize>,
    /// BFS tree: the edge that first discovered each node.
    parent: Vec<Option<usize>>,
}

impl StateGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn forward_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.direction() == Direction::Forward)
    }

    pub fn backward_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.direction() == Direction::Backward)
    }

    pub fn find(&self, text: &str) -> Option<usize> {
        self.index.get(text).copied()
    }

    /// Step descriptions along the BFS tree from the root to `node`.
    pub fn trace_to(&self, node: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(e) = self.parent.get(cur).copied().flatten() {
            out.push(self.edges[e].redex.describe());
            cur = self.edges[e].from;
        }
        out.reverse();
        out
    }

    fn insert(&mut self, config: Configuration, via: Option<usize>) -> (usize, bool) {
        let canon = canonicalize(&config);
        let text = canon.text();
        if let Some(&i) = self.index.get(&text) {
            return (i, false);
        }
        let i = self.nodes.len();
        self.index.insert(text.clone(), i);
        // the root is stored canonically; successors keep the names the
        // steps produced, which depend only on the root's binders
        let config = if via.is_none() { canon.to_config() } else { config };
        self.nodes.push(Node { text, config });
        self.parent.push(via);
        (i, true)
    }
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("exploration needs an initial configuration (no monitors, empty stores and endpoint lists)")]
    NotInitial,
    #[error("node budget of {budget} exceeded; graph truncated at {} nodes", graph.node_count())]
    BudgetExceeded { budget: usize, graph: Box<StateGraph> },
}

/// Breadth-first closure under forward and backward steps.
pub fn explore(m: &Configuration, node_budget: usize) -> Result<StateGraph, ExploreError> {
    if !m.is_initial() {
        return Err(ExploreError::NotInitial);
    }
    let mut g = StateGraph::default();
    g.insert(m.clone(), None);
    let mut queue = VecDeque::from([0usize]);
    let mut seen_edges: BTreeSet<(usize, usize, Direction)> = BTreeSet::new();
    while let Some(from) = queue.pop_front() {
        let config = g.nodes[from].config.clone();
        let (fw, bw) = enumerate(&config);
        for r in fw.into_iter().chain(bw) {
            let next = apply(&config, &r).expect("freshly enumerated");
            if g.find(&canonicalize(&next).text()).is_none() && g.nodes.len() >= node_budget {
                g.truncated = true;
                continue;
            }
            let edge_id = g.edges.len();
            let (to, fresh) = g.insert(next, Some(edge_id));
            if fresh {
                queue.push_back(to);
            }
            if seen_edges.insert((from, to, r.direction())) {
                g.edges.push(Edge { from, to, rule: r.rule, label: r.label(), redex: r });
            } else if fresh {
                unreachable!("a fresh node has no edges yet");
            }
        }
    }
    if g.truncated {
        return Err(ExploreError::BudgetExceeded { budget: node_budget, graph: Box::new(g) });
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Checks

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: String,
    pub redexes: Vec<String>,
    pub witness_trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub check: String,
    pub nodes: usize,
    pub edges: usize,
    pub violations: Vec<Violation>,
    /// Proof obligations examined; zero means the check held vacuously or
    /// was skipped.
    pub checked: usize,
}

impl Report {
    fn new(check: &str, g: &StateGraph) -> Report {
        Report { check: check.to_string(), nodes: g.node_count(), edges: g.edge_count(), violations: Vec::new(), checked: 0 }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, g: &StateGraph, node: usize, redexes: &[&Redex]) {
        self.violations.push(Violation {
            node: g.nodes[node].text.clone(),
            redexes: redexes.iter().map(|r| r.describe()).collect(),
            witness_trace: g.trace_to(node),
        });
    }
}

fn expanded(g: &StateGraph) -> impl Iterator<Item = usize> + '_ {
    // on a truncated graph the tail of the BFS order may be unexpanded
    (0..g.nodes.len()).filter(move |&i| !g.truncated || g.edges.iter().any(|e| e.from == i))
}

/// Every step can be undone, and every undo redone, landing on a congruent
/// configuration.
pub fn check_loop(g: &StateGraph) -> Report {
    let mut rep = Report::new("loop", g);
    for i in expanded(g) {
        let m = &g.nodes[i].config;
        let (fw, bw) = enumerate(m);
        for r in fw.iter().chain(bw.iter()) {
            rep.checked += 1;
            let n = apply(m, r).expect("freshly enumerated");
            let (nfw, nbw) = enumerate(&n);
            let back = match r.direction() {
                Direction::Forward => nbw,
                Direction::Backward => nfw,
            };
            let ok = back
                .iter()
                .filter(|b| b.rule == r.rule.inverse())
                .any(|b| canonicalize(&apply(&n, b).expect("freshly enumerated")).text() == g.nodes[i].text);
            if !ok {
                rep.violation(g, i, &[r]);
            }
        }
    }
    rep
}

/// `r2` as it appears after `r1` has fired: same rule and participants.
fn lift(after: &Configuration, r2: &Redex) -> Option<Redex> {
    let (fw, bw) = enumerate(after);
    let pool = match r2.direction() {
        Direction::Forward => fw,
        Direction::Backward => bw,
    };
    pool.into_iter().find(|c| {
        c.rule == r2.rule && c.runners == r2.runners && (r2.rule == Rule::Open || c.endpoints == r2.endpoints)
    })
}

/// Coinitial steps with disjoint labels commute.
pub fn check_square(g: &StateGraph) -> Report {
    let mut rep = Report::new("square", g);
    for i in expanded(g) {
        let m = &g.nodes[i].config;
        let (mut all, bw) = enumerate(m);
        all.extend(bw);
        for (a, r1) in all.iter().enumerate() {
            for r2 in &all[a + 1..] {
                if !concurrent(&r1.label(), &r2.label()) {
                    continue;
                }
                rep.checked += 1;
                let one = |x: &Redex, y: &Redex| -> Option<String> {
                    let mid = apply(m, x).ok()?;
                    let y2 = lift(&mid, y)?;
                    Some(canonicalize(&apply(&mid, &y2).ok()?).text())
                };
                match (one(r1, r2), one(r2, r1)) {
                    (Some(p), Some(q)) if p == q => {}
                    _ => rep.violation(g, i, &[r1, r2]),
                }
            }
        }
    }
    rep
}

/// Largest graph the causal check examines.
pub const CAUSAL_NODE_LIMIT: usize = 500;

/// Everything reachable by mixing forward and backward steps is reachable
/// by forward steps alone.
pub fn check_causal(g: &StateGraph) -> Report {
    let mut rep = Report::new("causal", g);
    if g.truncated || g.node_count() > CAUSAL_NODE_LIMIT || g.nodes.is_empty() {
        return rep;
    }
    let mut fwd = vec![false; g.node_count()];
    fwd[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        for e in g.forward_edges().filter(|e| e.from == n) {
            if !fwd[e.to] {
                fwd[e.to] = true;
                queue.push_back(e.to);
            }
        }
    }
    for (i, reached) in fwd.iter().enumerate() {
        rep.checked += 1;
        if !reached {
            let last = g.parent[i].map(|e| &g.edges[e].redex);
            rep.violation(g, i, &last.into_iter().collect::<Vec<_>>());
        }
    }
    rep
}

/// Every node is in normal shape `new(~a).(runners | monitors)`.
pub fn check_normal_form(g: &StateGraph) -> Report {
    let mut rep = Report::new("normal_form", g);
    for (i, n) in g.nodes.iter().enumerate() {
        rep.checked += 1;
        if !has_normal_shape(&n.config) {
            rep.violation(g, i, &[]);
        }
    }
    rep
}

/// Monitor stacks hold one entry per past action plus one; each session
/// offers at most one Com; forward and backward edges pair up.
pub fn check_bookkeeping(g: &StateGraph) -> Report {
    let mut rep = Report::new("bookkeeping", g);
    for (i, n) in g.nodes.iter().enumerate() {
        rep.checked += 1;
        if n.config.monitors().iter().any(|m| !m.stacks_balanced()) || n.config.validate().is_err() {
            rep.violation(g, i, &[]);
            continue;
        }
        let (fw, _) = enumerate(&n.config);
        let mut per_session: BTreeMap<&str, Vec<&Redex>> = BTreeMap::new();
        for r in fw.iter().filter(|r| r.rule == Rule::Com) {
            per_session.entry(r.endpoints[0].base()).or_default().push(r);
        }
        for rs in per_session.values().filter(|rs| rs.len() > 1) {
            rep.violation(g, i, rs);
        }
    }
    if !g.truncated && g.forward_edges().count() != g.backward_edges().count() {
        rep.violations.push(Violation {
            node: g.nodes.first().map(|n| n.text.clone()).unwrap_or_default(),
            redexes: vec![format!(
                "{} forward edges but {} backward edges",
                g.forward_edges().count(),
                g.backward_edges().count()
            )],
            witness_trace: Vec::new(),
        });
    }
    rep
}

pub fn check_all(g: &StateGraph) -> Vec<Report> {
    vec![check_loop(g), check_square(g), check_causal(g), check_normal_form(g), check_bookkeeping(g)]
}

/// Distinct sessions opened anywhere in the graph.
pub fn session_count(g: &StateGraph) -> usize {
    g.nodes.iter().map(|n| n.config.monitors().len() / 2).max().unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Corpus

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub count: usize,
    pub seed: u64,
    pub budget: usize,
    pub template: GenSpec,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { count: 500, seed: 0, budget: 10_000, template: GenSpec::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProgramResult {
    pub seed: u64,
    pub program: String,
    pub nodes: usize,
    pub edges: usize,
    pub sessions: usize,
    pub truncated: bool,
    pub reports: Vec<Report>,
}

impl ProgramResult {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(Report::passed)
    }
}

pub fn check_program(m: &Configuration, seed: u64, budget: usize) -> Result<ProgramResult, ExploreError> {
    let (g, truncated) = match explore(m, budget) {
        Ok(g) => (g, false),
        Err(ExploreError::BudgetExceeded { graph, .. }) => (*graph, true),
        Err(e) => return Err(e),
    };
    Ok(ProgramResult {
        seed,
        program: crate::surface::print(m),
        nodes: g.node_count(),
        edges: g.edge_count(),
        sessions: session_count(&g),
        truncated,
        reports: check_all(&g),
    })
}

/// Generates `count` programs from consecutive seeds and checks each one,
/// in parallel. Results are in seed order.
pub fn run_corpus(spec: &CorpusSpec) -> Vec<ProgramResult> {
    (0..spec.count as u64)
        .into_par_iter()
        .map(|k| {
            let seed = spec.seed + k;
            let m = generate_initial(&GenSpec { seed, ..spec.template.clone() });
            check_program(&m, seed, spec.budget).expect("generated programs are initial")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::equiv;
    use crate::surface::{parse_config, print};

    const INT_EXCHANGE: &str = "proc[]{ ~a(x:!int.end). x!<5>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{}";

    fn two_sessions() -> Configuration {
        parse_config(
            "proc[]{ ~a(x:!int.end). x!<1>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{} \
             | proc[]{ ~b(w:!int.end). w!<2>. 0 } store{} | proc[]{ b(v:?int.end). v?(t). 0 } store{}",
        )
        .unwrap()
    }

    #[test]
    fn int_exchange_graph() {
        let g = explore(&parse_config(INT_EXCHANGE).unwrap(), 100).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.forward_edges().count(), 2);
        assert_eq!(g.backward_edges().count(), 2);
        for r in check_all(&g) {
            assert!(r.passed(), "{r:?}");
        }
        assert_eq!(g.trace_to(2).len(), 2);
    }

    #[test]
    fn nil_graph_is_vacuous() {
        let g = explore(&Configuration::Nil, 10).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        for r in check_all(&g) {
            assert!(r.passed());
        }
        assert_eq!(check_square(&g).checked, 0);
    }

    #[test]
    fn explore_rejects_non_initial() {
        let m = parse_config("new(s0,~s0).(proc[s0]{ 0 } store{ y = [s0] } | mon s0 { ^end ; [y] ; [a] })").unwrap();
        assert!(matches!(explore(&m, 10), Err(ExploreError::NotInitial)));
    }

    #[test]
    fn budget_truncates() {
        match explore(&two_sessions(), 4) {
            Err(ExploreError::BudgetExceeded { graph, budget }) => {
                assert_eq!(budget, 4);
                assert!(graph.truncated);
                assert_eq!(graph.node_count(), 4);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn independent_sessions_diamond() {
        let g = explore(&two_sessions(), 1000).unwrap();
        // three local states per pair
        assert_eq!(g.node_count(), 9);
        let sq = check_square(&g);
        assert!(sq.passed(), "{sq:?}");
        // two concurrent Coms at the node where both sessions are open
        let both_open = g.nodes.iter().position(|n| {
            let (fw, _) = enumerate(&n.config);
            fw.iter().filter(|r| r.rule == Rule::Com).count() == 2
        });
        assert!(both_open.is_some());
        assert!(sq.checked > 0);
        for r in check_all(&g) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn shared_service_contention() {
        let m = parse_config(
            "proc[]{ ~a(x:!int.end). x!<1>. 0 } store{} | proc[]{ a(y:?int.end). y?(z). 0 } store{} \
             | proc[]{ ~a(w:!int.end). w!<2>. 0 } store{} | proc[]{ a(v:?int.end). v?(t). 0 } store{}",
        )
        .unwrap();
        let (fw, _) = enumerate(&m);
        assert_eq!(fw.len(), 4);
        let g = explore(&m, 10_000).unwrap();
        for r in check_all(&g) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn two_session_process_breaks_causality() {
        let m = parse_config(
            "proc[]{ ~a(x:!int.end). ~b(w:!int.end). x!<1>. w!<2>. 0 } store{} \
             | proc[]{ a(y:?int.end). y?(z). 0 } store{} | proc[]{ b(v:?int.end). v?(t). 0 } store{}",
        )
        .unwrap();
        let g = explore(&m, 1000).unwrap();
        let rep = check_causal(&g);
        assert!(!rep.passed());
        let bad = &rep.violations[0];
        assert!(bad.redexes[0].starts_with("OpenU on b"), "{bad:?}");
        assert!(!bad.witness_trace.is_empty());
        assert!(check_loop(&g).passed());
    }

    #[test]
    fn generator_is_deterministic_and_initial() {
        for seed in 0..200 {
            let spec = GenSpec::with_seed(seed);
            let m = generate_initial(&spec);
            assert_eq!(m, generate_initial(&spec));
            assert!(m.is_initial());
            m.validate().unwrap();
            assert!(m.runners().len() <= 4);
        }
    }

    #[test]
    fn generator_golden_seed_zero() {
        let spec = GenSpec { max_processes: 2, max_depth: 1, ..GenSpec::default() };
        let m = generate_initial(&spec);
        assert_eq!(print(&m), GOLDEN_SEED_ZERO);
    }

    const GOLDEN_SEED_ZERO: &str =
        "proc[]{ ~a(x:?bool.end). x?(z). 0 } store{} | proc[]{ a(y:!bool.end). y!<false>. 0 } store{}";

    #[test]
    fn generator_with_no_processes() {
        let spec = GenSpec { max_processes: 0, ..GenSpec::default() };
        assert_eq!(print(&generate_initial(&spec)), "0");
    }

    #[test]
    fn mismatched_programs_get_stuck() {
        let mut stuck = 0;
        for seed in 0..50 {
            let spec = GenSpec { mismatch_rate: 1.0, seed, ..GenSpec::default() };
            let m = generate_initial(&spec);
            let g = explore(&m, 10_000).unwrap();
            // no node completes every protocol
            let complete = g.nodes.iter().any(|n| {
                n.config.runners().iter().all(|r| r.process == Process::Nil) && !n.config.monitors().is_empty()
            });
            if !complete {
                stuck += 1;
            }
        }
        assert_eq!(stuck, 50);
    }

    #[test]
    fn scramble_is_congruent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..40 {
            let m = random_walk(&generate_initial(&GenSpec::with_seed(seed)), 6, &mut rng);
            let s = scramble(&m, &mut rng);
            assert!(equiv(&m, &s), "{}\n{}", print(&m), print(&s));
        }
    }

    #[test]
    fn report_json_shape() {
        let g = explore(&parse_config(INT_EXCHANGE).unwrap(), 100).unwrap();
        let v = serde_json::to_value(check_loop(&g)).unwrap();
        for k in ["check", "nodes", "edges", "violations", "checked"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
