//! Structural congruence, decided by canonical forms.
//!
//! A configuration is flattened into a single restriction prefix over a
//! parallel of running processes and monitors (scope extrusion, nil removal,
//! flattening of `|`). Bound names are then renamed deterministically and the
//! components sorted, so two configurations are congruent exactly when their
//! canonical forms are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Configuration, Ident, Monitor, NameKind, Process, Runner};

/// Components sitting under the evaluation context of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Component {
    Running(Runner),
    Monitor(Monitor),
}

impl Component {
    pub fn into_config(self) -> Configuration {
        match self {
            Component::Running(r) => Configuration::Running(r),
            Component::Monitor(m) => Configuration::Monitor(m),
        }
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Component {
        match self {
            Component::Running(r) => Component::Running(r.rename(map)),
            Component::Monitor(m) => Component::Monitor(m.rename(map)),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Component::Running(_) => 0,
            Component::Monitor(_) => 1,
        }
    }

    fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        match self {
            Component::Running(r) => r.visit_idents(f),
            Component::Monitor(m) => m.visit_idents(f),
        }
    }

    fn print(&self) -> String {
        match self {
            Component::Running(r) => r.to_string(),
            Component::Monitor(m) => m.to_string(),
        }
    }
}

/// `new(ã).([] | ... | [])`: a restriction prefix over a flat parallel of holes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationContext {
    pub restricted: Vec<Ident>,
}

impl EvaluationContext {
    pub fn plug(&self, components: impl IntoIterator<Item = Component>) -> Configuration {
        let body = Configuration::par_all(components.into_iter().map(Component::into_config));
        if matches!(body, Configuration::Nil) {
            return Configuration::Nil;
        }
        Configuration::restrict_all(self.restricted.iter().cloned(), body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub context: EvaluationContext,
    pub components: Vec<Component>,
}

impl Decomposition {
    pub fn plug(&self) -> Configuration {
        self.context.plug(self.components.iter().cloned())
    }
}

fn fresh_base(stem_of: &str, avoid: &BTreeSet<String>) -> String {
    let stem = stem_of.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "n" } else { stem };
    (1..).map(|i| format!("{stem}{i}")).find(|c| !avoid.contains(c)).expect("unbounded")
}

struct Flattener {
    taken: BTreeSet<String>,
    avoid: BTreeSet<String>,
    restricted: Vec<Ident>,
    components: Vec<Component>,
}

impl Flattener {
    /// Claims `name` for the top-level prefix, returning the base to use.
    fn claim(&mut self, name: &Ident) -> Option<String> {
        if self.taken.contains(name.base()) {
            let fresh = fresh_base(name.base(), &self.avoid);
            self.avoid.insert(fresh.clone());
            self.taken.insert(fresh.clone());
            self.restricted.push(name.plain().with_base(fresh.clone()));
            Some(fresh)
        } else {
            self.taken.insert(name.base().to_string());
            self.restricted.push(name.plain());
            None
        }
    }

    fn go(&mut self, c: &Configuration) {
        match c {
            Configuration::Nil => {}
            Configuration::Parallel(l, r) => {
                self.go(l);
                self.go(r);
            }
            Configuration::Restrict(n, body) => match self.claim(n) {
                Some(fresh) => {
                    let map = BTreeMap::from([(n.base().to_string(), fresh)]);
                    self.go(&body.rename(&map));
                }
                None => self.go(body),
            },
            Configuration::Monitor(m) => self.components.push(Component::Monitor(m.clone())),
            Configuration::Running(r) => {
                let mut r = r.clone();
                while let Process::Restrict { name, body } = &r.process {
                    let body = (**body).clone();
                    match self.claim(name) {
                        Some(fresh) => {
                            let map = BTreeMap::from([(name.base().to_string(), fresh)]);
                            r.process = body.rename(&map);
                        }
                        None => r.process = body,
                    }
                }
                self.components.push(Component::Running(r));
            }
        }
    }
}

/// Pulls every restriction (including ones heading a running process) to the
/// top and flattens parallel composition, dropping nils. Clashing bound names
/// are freshened on the way out.
pub fn decompose(m: &Configuration) -> Decomposition {
    let mut f = Flattener {
        taken: m.free_bases(),
        avoid: m.all_bases(),
        restricted: Vec::new(),
        components: Vec::new(),
    };
    f.go(m);
    Decomposition { context: EvaluationContext { restricted: f.restricted }, components: f.components }
}

pub fn plug(context: &EvaluationContext, components: impl IntoIterator<Item = Component>) -> Configuration {
    context.plug(components)
}

/// `new(ã).(runners | monitors)` with bound names in canonical spelling.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    pub restricted: Vec<Ident>,
    pub runners: Vec<Runner>,
    pub monitors: Vec<Monitor>,
}

impl CanonicalForm {
    pub fn to_config(&self) -> Configuration {
        let parts = self
            .runners
            .iter()
            .cloned()
            .map(Configuration::Running)
            .chain(self.monitors.iter().cloned().map(Configuration::Monitor));
        let body = Configuration::par_all(parts);
        if matches!(body, Configuration::Nil) {
            return Configuration::Nil;
        }
        Configuration::restrict_all(self.restricted.iter().cloned(), body)
    }

    pub fn text(&self) -> String {
        crate::surface::print(&self.to_config())
    }

    pub fn is_empty(&self) -> bool {
        self.runners.is_empty() && self.monitors.is_empty()
    }
}

impl std::fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text())
    }
}

/// Cap on the number of orderings tried when components tie up to bound names.
const MAX_TIE_ORDERINGS: usize = 720;

fn process_binders(p: &Process, out: &mut Vec<Ident>) {
    let mut cur = p;
    while let Some(body) = cur.body() {
        if let Some(b) = cur.head_binder() {
            out.push(b.clone());
        }
        cur = body;
    }
}

/// Sort key independent of the spelling of bound names.
fn shape_key(c: &Component, restricted: &BTreeMap<String, NameKind>) -> String {
    let mut map: BTreeMap<String, String> = restricted
        .iter()
        .map(|(b, k)| (b.clone(), if *k == NameKind::Session { "%S".to_string() } else { "%C".to_string() }))
        .collect();
    if let Component::Running(r) = c {
        let mut binders = Vec::new();
        process_binders(&r.process, &mut binders);
        for (i, b) in binders.iter().enumerate() {
            map.insert(b.base().to_string(), format!("#{i}"));
        }
    }
    c.rename(&map).print()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

struct Namer<'a> {
    free: &'a BTreeSet<String>,
    next: [usize; 3],
}

impl Namer<'_> {
    fn fresh(&mut self, kind: NameKind) -> String {
        let (slot, stem) = match kind {
            NameKind::Session => (0, "s"),
            NameKind::Channel => (1, "c"),
            NameKind::Variable => (2, "x"),
        };
        loop {
            let cand = format!("{stem}{}", self.next[slot]);
            self.next[slot] += 1;
            if !self.free.contains(&cand) {
                return cand;
            }
        }
    }
}

/// Renames restricted names and process binders in first-occurrence order
/// over the given component order.
fn spell(
    order: &[&Component],
    restricted: &BTreeMap<String, NameKind>,
    binders: &BTreeMap<String, NameKind>,
    free: &BTreeSet<String>,
) -> (Vec<Ident>, Vec<Component>) {
    let mut namer = Namer { free, next: [0; 3] };
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut new_restricted = Vec::new();
    for c in order {
        c.visit_idents(&mut |n| {
            let base = n.base();
            if map.contains_key(base) {
                return;
            }
            if let Some(kind) = restricted.get(base) {
                let fresh = namer.fresh(*kind);
                new_restricted.push(Ident::new(*kind, fresh.clone(), crate::syntax::Polarity::Plain).expect("not a variable"));
                map.insert(base.to_string(), fresh);
            } else if let Some(kind) = binders.get(base) {
                map.insert(base.to_string(), namer.fresh(*kind));
            }
        });
    }
    (new_restricted, order.iter().map(|c| c.rename(&map)).collect())
}

pub fn canonicalize(m: &Configuration) -> CanonicalForm {
    let d = decompose(m);
    let mut used = BTreeSet::new();
    for c in &d.components {
        c.visit_idents(&mut |n| {
            used.insert(n.base().to_string());
        });
    }
    let restricted: BTreeMap<String, NameKind> = d
        .context
        .restricted
        .iter()
        .filter(|n| used.contains(n.base()))
        .map(|n| (n.base().to_string(), n.kind()))
        .collect();

    let mut binders = BTreeMap::new();
    for c in &d.components {
        if let Component::Running(r) = c {
            let mut bs = Vec::new();
            process_binders(&r.process, &mut bs);
            for b in bs {
                binders.insert(b.base().to_string(), b.kind());
            }
        }
    }
    let free: BTreeSet<String> = used.iter().filter(|b| !restricted.contains_key(*b) && !binders.contains_key(*b)).cloned().collect();

    let keyed: Vec<(u8, String, &Component)> =
        d.components.iter().map(|c| (c.rank(), shape_key(c, &restricted), c)).collect();
    let mut sorted: Vec<&(u8, String, &Component)> = keyed.iter().collect();
    sorted.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    // Tie groups whose members mention restricted names need every ordering tried.
    let mentions_restricted = |c: &Component| {
        let mut hit = false;
        c.visit_idents(&mut |n| hit |= restricted.contains_key(n.base()));
        hit
    };
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 && sorted[j].1 == sorted[i].1 {
            j += 1;
        }
        if j - i > 1 && sorted[i..j].iter().any(|k| mentions_restricted(k.2)) {
            groups.push((i, j - i));
        }
        i = j;
    }
    let mut total = 1usize;
    for (_, len) in &groups {
        total = total.saturating_mul((1..=*len).product());
    }
    if total > MAX_TIE_ORDERINGS {
        groups.clear();
    }
    let perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|(_, len)| permutations(*len)).collect();

    let mut best: Option<(String, CanonicalForm)> = None;
    let mut odometer = vec![0usize; groups.len()];
    loop {
        let mut order: Vec<&Component> = sorted.iter().map(|k| k.2).collect();
        for (g, (start, len)) in groups.iter().enumerate() {
            let p = &perms[g][odometer[g]];
            for (slot, &src) in p.iter().enumerate() {
                order[start + slot] = sorted[start + src].2;
            }
            let _ = len;
        }
        let (new_restricted, comps) = spell(&order, &restricted, &binders, &free);
        let mut finals: Vec<(u8, String, String, Component)> = comps
            .into_iter()
            .map(|c| {
                let rank = c.rank();
                let text = c.print();
                (rank, shape_key(&c, &BTreeMap::new()), text, c)
            })
            .collect();
        finals.sort_by(|a, b| match a.0.cmp(&b.0) {
            Ordering::Equal => (&a.1, &a.2).cmp(&(&b.1, &b.2)),
            o => o,
        });
        let mut runners = Vec::new();
        let mut monitors = Vec::new();
        for (_, _, _, c) in finals {
            match c {
                Component::Running(r) => runners.push(r),
                Component::Monitor(m) => monitors.push(m),
            }
        }
        let form = CanonicalForm { restricted: new_restricted, runners, monitors };
        let text = form.text();
        if best.as_ref().is_none_or(|(t, _)| text < *t) {
            best = Some((text, form));
        }

        // advance odometer
        let mut g = 0;
        loop {
            if g == groups.len() {
                return best.expect("at least one ordering").1;
            }
            odometer[g] += 1;
            if odometer[g] < perms[g].len() {
                break;
            }
            odometer[g] = 0;
            g += 1;
        }
    }
}

pub fn equiv(m: &Configuration, n: &Configuration) -> bool {
    canonicalize(m) == canonicalize(n)
}

/// Checks the normal-form shape `new(ã).(runners | monitors)`: one
/// restriction prefix, then a parallel of runners followed by monitors with
/// no nils or nested restrictions.
pub fn has_normal_shape(m: &Configuration) -> bool {
    let mut body = m;
    while let Configuration::Restrict(_, b) = body {
        body = b;
    }
    if matches!(body, Configuration::Nil) {
        return matches!(m, Configuration::Nil);
    }
    let mut leaves = Vec::new();
    fn leaves_of<'a>(c: &'a Configuration, out: &mut Vec<&'a Configuration>) -> bool {
        match c {
            Configuration::Parallel(l, r) => leaves_of(l, out) && leaves_of(r, out),
            Configuration::Running(_) | Configuration::Monitor(_) => {
                out.push(c);
                true
            }
            _ => false,
        }
    }
    if !leaves_of(body, &mut leaves) {
        return false;
    }
    let first_monitor = leaves.iter().position(|c| matches!(c, Configuration::Monitor(_))).unwrap_or(leaves.len());
    leaves[first_monitor..].iter().all(|c| matches!(c, Configuration::Monitor(_)))
}
