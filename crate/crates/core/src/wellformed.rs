use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Configuration, Ident, NameKind, Process, Value, WellFormednessError};

fn expect(ident: &Ident, ok: &[NameKind], expected: &'static str) -> Result<(), WellFormednessError> {
    if ok.contains(&ident.kind()) {
        Ok(())
    } else {
        Err(WellFormednessError::KindMismatch { ident: ident.clone(), expected, found: ident.kind() })
    }
}

fn check_process(p: &Process, binders: &mut Vec<String>) -> Result<(), WellFormednessError> {
    use NameKind::*;
    let mut cur = p;
    loop {
        match cur {
            Process::Nil => return Ok(()),
            Process::Accept { service, var, body, .. } | Process::Request { service, var, body, .. } => {
                expect(service, &[Channel, Variable], "channel or variable")?;
                expect(var, &[Variable], "variable")?;
                binders.push(var.base().to_string());
                cur = body;
            }
            Process::Output { subject, body, .. } => {
                expect(subject, &[Session, Variable], "session endpoint or variable")?;
                cur = body;
            }
            Process::Input { subject, var, body } => {
                expect(subject, &[Session, Variable], "session endpoint or variable")?;
                expect(var, &[Variable], "variable")?;
                binders.push(var.base().to_string());
                cur = body;
            }
            Process::Restrict { name, body } => {
                expect(name, &[Channel], "channel")?;
                binders.push(name.base().to_string());
                cur = body;
            }
        }
    }
}

pub(crate) fn validate(config: &Configuration) -> Result<(), WellFormednessError> {
    use NameKind::*;

    // One kind per base.
    let mut kinds: BTreeMap<&str, NameKind> = BTreeMap::new();
    let mut conflict = None;
    config.visit_idents(&mut |n| {
        let k = *kinds.entry(n.base()).or_insert(n.kind());
        if k != n.kind() && conflict.is_none() {
            conflict = Some(n.base().to_string());
        }
    });
    if let Some(base) = conflict {
        return Err(WellFormednessError::NameKindConflict(base));
    }

    let mut binders = Vec::new();
    collect_restrictions(config, &mut binders)?;

    let runners = config.runners();
    let monitors = config.monitors();

    let mut owners: BTreeSet<&Ident> = BTreeSet::new();
    let mut store_vars: BTreeSet<&Ident> = BTreeSet::new();
    for r in &runners {
        for e in &r.endpoints {
            expect(e, &[Session], "session endpoint")?;
            if !owners.insert(e) {
                return Err(WellFormednessError::DuplicateEndpointOwner(e.clone()));
            }
        }
        for (k, vs) in r.store.iter() {
            expect(k, &[Variable], "variable")?;
            if !store_vars.insert(k) {
                return Err(WellFormednessError::SharedVariable(k.clone()));
            }
            debug_assert!(!vs.is_empty());
        }
        check_process(&r.process, &mut binders)?;
    }

    let mut monitored: BTreeSet<&Ident> = BTreeSet::new();
    for m in &monitors {
        expect(&m.endpoint, &[Session], "session endpoint")?;
        if !monitored.insert(&m.endpoint) {
            return Err(WellFormednessError::DuplicateMonitor(m.endpoint.clone()));
        }
        if !m.stacks_balanced() {
            return Err(WellFormednessError::MalformedMonitorStacks {
                endpoint: m.endpoint.clone(),
                vars: m.vars.len(),
                names: m.names.len(),
                past: m.htype.past().len(),
            });
        }
        for v in &m.vars {
            if let Value::Name(n) = v {
                expect(n, &[Variable], "variable")?;
            }
        }
        if !owners.contains(&m.endpoint) {
            return Err(WellFormednessError::UnownedMonitor(m.endpoint.clone()));
        }
    }

    let free = config.free_bases();
    let mut seen = BTreeSet::new();
    for b in binders {
        if free.contains(&b) || !seen.insert(b.clone()) {
            return Err(WellFormednessError::BinderClash(b));
        }
    }
    Ok(())
}

fn collect_restrictions(c: &Configuration, out: &mut Vec<String>) -> Result<(), WellFormednessError> {
    match c {
        Configuration::Restrict(n, body) => {
            expect(n, &[NameKind::Channel, NameKind::Session], "channel or session")?;
            out.push(n.base().to_string());
            collect_restrictions(body, out)
        }
        Configuration::Parallel(l, r) => {
            collect_restrictions(l, out)?;
            collect_restrictions(r, out)
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Store;
    use crate::syntax::{HistoryType, Monitor, Runner, SessionType, Sort};

    fn s0() -> Ident {
        Ident::session("s0")
    }

    fn runner_on(e: Ident) -> Configuration {
        Configuration::Running(Runner::new(vec![e], Process::Nil, Store::new()))
    }

    #[test]
    fn duplicate_endpoint_owner() {
        let c = Configuration::par(runner_on(s0()), runner_on(s0()));
        assert_eq!(c.validate(), Err(WellFormednessError::DuplicateEndpointOwner(s0())));
    }

    #[test]
    fn malformed_and_unowned_monitors() {
        let mon = Monitor::new(s0(), HistoryType::start(SessionType::End), vec![], vec![]);
        let c = Configuration::par(runner_on(s0()), Configuration::Monitor(mon));
        assert!(matches!(c.validate(), Err(WellFormednessError::MalformedMonitorStacks { .. })));

        let mon = Monitor::new(
            s0(),
            HistoryType::start(SessionType::send(Sort::Int, SessionType::End)),
            vec![Value::Name(Ident::variable("y"))],
            vec![Ident::channel("a")],
        );
        let c = Configuration::Monitor(mon.clone());
        assert_eq!(c.validate(), Err(WellFormednessError::UnownedMonitor(s0())));
        let c = Configuration::par(runner_on(s0()), Configuration::par(Configuration::Monitor(mon.clone()), Configuration::Monitor(mon)));
        assert_eq!(c.validate(), Err(WellFormednessError::DuplicateMonitor(s0())));
    }

    #[test]
    fn binder_clash_with_free_name() {
        let x = Ident::variable("x");
        let p = Process::input(s0(), x.clone(), Process::Nil);
        let store = Store::new().update(&x, Value::Int(1));
        let c = Configuration::Running(Runner::new(vec![s0()], p, store));
        assert_eq!(c.validate(), Err(WellFormednessError::BinderClash("x".into())));
    }

    #[test]
    fn kind_conflict() {
        let c = Configuration::par(runner_on(s0()), Configuration::Running(Runner::initial(Process::input(
            Ident::variable("s0"),
            Ident::variable("z"),
            Process::Nil,
        ))));
        assert_eq!(c.validate(), Err(WellFormednessError::NameKindConflict("s0".into())));
    }
}
