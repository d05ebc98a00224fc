use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rsx_core::congruence::{canonicalize, decompose, equiv, has_normal_shape};
use rsx_core::properties::{explore, generate_initial, random_walk, scramble, GenSpec};
use rsx_core::semantics::{apply, concurrent, enumerate, enumerate_backward, enumerate_forward, Rule};
use rsx_core::store::Store;
use rsx_core::surface::{parse_config, parse_history_type, parse_session_type, print};
use rsx_core::syntax::{Action, HistoryType, Ident, SessionType, Sort, Value};
use rsx_core::Configuration;

fn action() -> impl Strategy<Value = Action> {
    (any::<bool>(), any::<bool>()).prop_map(|(send, int)| {
        let s = if int { Sort::Int } else { Sort::Bool };
        if send {
            Action::Send(s)
        } else {
            Action::Recv(s)
        }
    })
}

fn stype() -> impl Strategy<Value = SessionType> {
    prop::collection::vec(action(), 0..10).prop_map(SessionType::from_actions)
}

fn htype() -> impl Strategy<Value = HistoryType> {
    (prop::collection::vec(action(), 0..6), stype()).prop_map(|(p, f)| HistoryType::new(p, f))
}

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-100i64..100).prop_map(Value::Int),
        any::<bool>().prop_map(Value::Bool),
        "[a-d]".prop_map(|b| Value::Name(Ident::channel(b))),
    ]
}

fn store() -> impl Strategy<Value = Store> {
    prop::collection::vec(("v[0-4]", value()), 0..10).prop_map(|ups| {
        ups.into_iter().fold(Store::new(), |s, (x, v)| s.update(&Ident::variable(x), v))
    })
}

/// A reachable configuration: generated program plus a short random walk.
fn reachable() -> impl Strategy<Value = Configuration> {
    (0u64..400, 0usize..8, any::<u64>()).prop_map(|(seed, steps, walk_seed)| {
        let m = generate_initial(&GenSpec::with_seed(seed));
        random_walk(&m, steps, &mut ChaCha8Rng::seed_from_u64(walk_seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dual_is_an_involution(s in stype()) {
        prop_assert_eq!(s.dual().dual(), s.clone());
        prop_assert!(s.is_dual(&s.dual()));
        prop_assert_eq!(s.dual().depth(), s.depth());
    }

    #[test]
    fn cursor_moves_are_inverse(h in htype()) {
        let total = h.past().len() + h.future().depth();
        if let Ok(a) = h.advance() {
            prop_assert_eq!(a.rewind().unwrap(), h.clone());
            prop_assert_eq!(a.past().len() + a.future().depth(), total);
        }
        if let Ok(r) = h.rewind() {
            prop_assert_eq!(r.advance().unwrap(), h.clone());
            prop_assert_eq!(r.past().len() + r.future().depth(), total);
        }
        prop_assert_eq!(h.protocol().depth(), total);
    }

    #[test]
    fn types_print_and_parse(s in stype(), h in htype()) {
        prop_assert_eq!(parse_session_type(&s.to_string()).unwrap(), s);
        prop_assert_eq!(parse_history_type(&h.to_string()).unwrap(), h);
    }

    #[test]
    fn store_update_is_undone(st in store(), x in "v[0-6]", v in value()) {
        let x = Ident::variable(x);
        let up = st.update(&x, v.clone());
        prop_assert_eq!(up.reverse_update(&x).unwrap(), st.clone());
        prop_assert_eq!(up.eval(&Value::Name(x.clone())), v);
        for (y, hist) in st.iter() {
            if *y != x {
                prop_assert_eq!(up.history(y), Some(hist));
            }
        }
    }

    #[test]
    fn canonicalize_is_idempotent(m in reachable()) {
        let c = canonicalize(&m);
        prop_assert_eq!(canonicalize(&c.to_config()), c.clone());
        prop_assert!(has_normal_shape(&c.to_config()));
        prop_assert!(c.to_config().validate().is_ok());
    }

    #[test]
    fn scrambling_preserves_the_class(m in reachable(), seed in any::<u64>()) {
        let n = scramble(&m, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(equiv(&m, &n));
        prop_assert_eq!(canonicalize(&m).text(), canonicalize(&n).text());
    }

    #[test]
    fn congruence_is_closed_under_contexts(m in reachable(), seed in any::<u64>()) {
        let n = scramble(&m, &mut ChaCha8Rng::seed_from_u64(seed));
        let other = parse_config("proc[]{ zz(q:end). 0 } store{}").unwrap();
        prop_assert!(equiv(&Configuration::par(m.clone(), other.clone()), &Configuration::par(other, n.clone())));
        let c = Ident::channel("fresh");
        prop_assert!(equiv(&Configuration::restrict(c.clone(), m), &Configuration::restrict(c, n)));
    }

    #[test]
    fn decompose_plugs_back(m in reachable(), seed in any::<u64>()) {
        let n = scramble(&m, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(equiv(&decompose(&n).plug(), &n));
    }

    #[test]
    fn print_parse_round_trip(m in reachable(), seed in any::<u64>()) {
        let n = scramble(&m, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = parse_config(&print(&n)).unwrap();
        prop_assert!(equiv(&back, &n));
    }

    #[test]
    fn enumeration_respects_congruence(m in reachable(), seed in any::<u64>()) {
        // binder spellings leak into stores after a step, so compare redex
        // shapes rather than successor texts
        let n = scramble(&m, &mut ChaCha8Rng::seed_from_u64(seed));
        let shapes = |c: &Configuration| {
            let (fw, bw) = enumerate(c);
            let mut v: Vec<String> = fw
                .iter()
                .chain(&bw)
                .map(|r| match &r.bindings {
                    rsx_core::semantics::Bindings::Session { service, requester_type, .. } => {
                        format!("{} {service} {requester_type}", r.rule)
                    }
                    rsx_core::semantics::Bindings::Message { payload, sort, .. } => {
                        let p = if payload.as_name().is_some() { "var".to_string() } else { payload.to_string() };
                        format!("{} {p}:{sort}", r.rule)
                    }
                })
                .collect();
            v.sort();
            v
        };
        prop_assert_eq!(shapes(&m), shapes(&n));
    }

    #[test]
    fn every_step_can_be_undone(m in reachable()) {
        for r in enumerate_forward(&m) {
            let n = apply(&m, &r).unwrap();
            let back = enumerate_backward(&n)
                .iter()
                .any(|u| u.rule == r.rule.inverse() && equiv(&apply(&n, u).unwrap(), &m));
            prop_assert!(back, "no undo for {}", r.describe());
        }
        for r in enumerate_backward(&m) {
            let n = apply(&m, &r).unwrap();
            let redo = enumerate_forward(&n)
                .iter()
                .any(|u| u.rule == r.rule.inverse() && equiv(&apply(&n, u).unwrap(), &m));
            prop_assert!(redo, "no redo for {}", r.describe());
        }
    }

    #[test]
    fn monitor_bookkeeping(m in reachable()) {
        let (fw, bw) = enumerate(&m);
        for r in fw.iter().chain(&bw).filter(|r| matches!(r.rule, Rule::Com | Rule::ComUndo)) {
            let n = apply(&m, r).unwrap();
            let delta: isize = if r.rule == Rule::Com { 1 } else { -1 };
            for e in &r.endpoints {
                let before = m.monitors().into_iter().find(|x| &x.endpoint == e).unwrap();
                let after = n.monitors().into_iter().find(|x| &x.endpoint == e).unwrap();
                prop_assert_eq!(after.vars.len() as isize - before.vars.len() as isize, delta);
                prop_assert_eq!(after.names.len() as isize - before.names.len() as isize, delta);
                prop_assert_eq!(after.htype.past().len() as isize - before.htype.past().len() as isize, delta);
            }
        }
        for mon in m.monitors() {
            prop_assert!(mon.stacks_balanced());
        }
    }

    #[test]
    fn one_com_per_session(m in reachable()) {
        let mut seen = std::collections::BTreeSet::new();
        for r in enumerate_forward(&m).into_iter().filter(|r| r.rule == Rule::Com) {
            prop_assert!(seen.insert(r.endpoints[0].base().to_string()));
        }
    }

    #[test]
    fn open_allocates_fresh_endpoints(m in reachable()) {
        let used = m.all_bases();
        for r in enumerate_forward(&m).into_iter().filter(|r| r.rule == Rule::Open) {
            prop_assert!(!used.contains(r.endpoints[0].base()));
        }
    }

    #[test]
    fn concurrent_redexes_commute(m in reachable()) {
        let (fw, bw) = enumerate(&m);
        let all: Vec<_> = fw.into_iter().chain(bw).collect();
        for (i, r1) in all.iter().enumerate() {
            for r2 in &all[i + 1..] {
                if !concurrent(&r1.label(), &r2.label()) {
                    continue;
                }
                let a = apply(&m, r1).unwrap();
                let b = apply(&m, r2).unwrap();
                // the residual of r on the other branch: same rule and runners,
                // same endpoints unless it allocates them
                let residual = |x: &Configuration, r: &rsx_core::semantics::Redex| -> Vec<Configuration> {
                    let (f, bk) = enumerate(x);
                    f.into_iter()
                        .chain(bk)
                        .filter(|c| c.rule == r.rule && c.runners == r.runners && (r.rule == Rule::Open || c.endpoints == r.endpoints))
                        .map(|c| apply(x, &c).unwrap())
                        .collect()
                };
                let ab = residual(&a, r2);
                let ba = residual(&b, r1);
                let meet = ab.iter().any(|x| ba.iter().any(|y| equiv(x, y)));
                prop_assert!(meet, "{} / {}", r1.describe(), r2.describe());
            }
        }
    }

    #[test]
    fn graph_size_is_congruence_invariant(seed in 0u64..200, s in any::<u64>()) {
        let m = generate_initial(&GenSpec { max_processes: 4, max_depth: 2, seed, ..GenSpec::default() });
        let n = scramble(&m, &mut ChaCha8Rng::seed_from_u64(s));
        let g = explore(&m, 5000).unwrap();
        let h = explore(&n, 5000).unwrap();
        prop_assert_eq!(g.node_count(), h.node_count());
        prop_assert_eq!(g.edge_count(), h.edge_count());
    }
}

#[test]
fn canonical_print_distinguishes_classes() {
    let mut texts = std::collections::BTreeMap::new();
    for seed in 0..60 {
        let g = explore(&generate_initial(&GenSpec::with_seed(seed)), 5000).unwrap();
        for n in &g.nodes {
            let t = canonicalize(&n.config).text();
            if let Some(prev) = texts.insert(t.clone(), n.config.clone()) {
                assert!(equiv(&prev, &n.config));
            }
        }
    }
    let keys: Vec<_> = texts.values().take(200).cloned().collect();
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            assert!(!equiv(a, b));
        }
    }
}
