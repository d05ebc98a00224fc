//! Per-process local stores: variables mapped to their assignment history.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{rename_ident, rename_value, Ident, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("variable `{0}` is not bound in the store")]
    UnboundVariable(Ident),
}

/// A persistent store. Every entry holds a nonempty history, oldest first;
/// the current value is the last one.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Store {
    entries: BTreeMap<Ident, Vec<Value>>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    /// Builds a store from `(variable, history)` pairs. Empty histories are
    /// dropped; repeated variables concatenate.
    pub fn from_entries(entries: impl IntoIterator<Item = (Ident, Vec<Value>)>) -> Self {
        let mut out = BTreeMap::new();
        for (k, vs) in entries {
            if vs.is_empty() {
                continue;
            }
            out.entry(k).or_insert_with(Vec::new).extend(vs);
        }
        Store { entries: out }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn contains(&self, x: &Ident) -> bool {
        self.entries.contains_key(x)
    }

    pub fn history(&self, x: &Ident) -> Option<&[Value]> {
        self.entries.get(x).map(Vec::as_slice)
    }

    pub fn current(&self, x: &Ident) -> Option<&Value> {
        self.entries.get(x).and_then(|h| h.last())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &[Value])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn variables(&self) -> impl Iterator<Item = &Ident> {
        self.entries.keys()
    }

    /// `σ[x ↦ v]`: binds a fresh variable or pushes onto its history.
    pub fn update(&self, x: &Ident, v: Value) -> Store {
        let mut entries = self.entries.clone();
        entries.entry(x.clone()).or_default().push(v);
        Store { entries }
    }

    /// `σ ↩ x`: pops the most recent value of `x`, dropping the entry once
    /// its history is exhausted.
    pub fn reverse_update(&self, x: &Ident) -> Result<Store, StoreError> {
        let mut entries = self.entries.clone();
        let history = entries.get_mut(x).ok_or_else(|| StoreError::UnboundVariable(x.clone()))?;
        history.pop();
        if history.is_empty() {
            entries.remove(x);
        }
        Ok(Store { entries })
    }

    /// Current value of a bound variable; anything else evaluates to itself.
    pub fn eval(&self, n: &Value) -> Value {
        match n {
            Value::Name(id) if id.is_variable() => self.current(id).cloned().unwrap_or_else(|| n.clone()),
            _ => n.clone(),
        }
    }

    pub fn eval_ident(&self, n: &Ident) -> Value {
        self.eval(&Value::Name(n.clone()))
    }

    pub(crate) fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        for (k, vs) in &self.entries {
            f(k);
            for v in vs {
                if let Value::Name(n) = v {
                    f(n);
                }
            }
        }
    }

    pub(crate) fn rename(&self, map: &BTreeMap<String, String>) -> Store {
        Store {
            entries: self
                .entries
                .iter()
                .map(|(k, vs)| (rename_ident(k, map), vs.iter().map(|v| rename_value(v, map)).collect()))
                .collect(),
        }
    }
}

pub fn update(store: &Store, x: &Ident, v: Value) -> Store {
    store.update(x, v)
}

pub fn reverse_update(store: &Store, x: &Ident) -> Result<Store, StoreError> {
    store.reverse_update(x)
}

pub fn eval(store: &Store, n: &Value) -> Value {
    store.eval(n)
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("store{}");
        }
        f.write_str("store{ ")?;
        for (i, (k, vs)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = [")?;
            for (j, v) in vs.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        f.write_str(" }")
    }
}
