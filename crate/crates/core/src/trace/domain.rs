use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{Trace, Value, Word};

/// A letter-to-letter map. `None` is the empty word and is dropped from the
/// projected word.
pub type ProjectionFn = dyn Fn(&Value) -> Option<Value> + Send + Sync;

/// Index of a projection inside its [`DataDomain`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjId(pub u32);

struct Projection {
    name: Arc<str>,
    func: Arc<ProjectionFn>,
}

/// The trace variables of a system together with the named projections that
/// formulas may apply to traces.
///
/// Every variable `x` gets an implicit projection `x` reading that field from
/// an event. Further projections may be derived from any field combination.
#[derive(Clone)]
pub struct DataDomain {
    name: Arc<str>,
    variables: Vec<Arc<str>>,
    projections: Vec<Arc<Projection>>,
    index: BTreeMap<Arc<str>, ProjId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownProjection(pub String);

impl fmt::Display for UnknownProjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown projection `{}`", self.0)
    }
}

impl core::error::Error for UnknownProjection {}

impl DataDomain {
    pub fn new<S: AsRef<str>>(name: &str, variables: &[S]) -> Self {
        let mut domain = DataDomain {
            name: Arc::from(name),
            variables: Vec::new(),
            projections: Vec::new(),
            index: BTreeMap::new(),
        };
        for var in variables {
            let key: Arc<str> = Arc::from(var.as_ref());
            domain.variables.push(key.clone());
            let field = key.clone();
            domain.add(
                &key,
                Arc::new(move |v: &Value| v.as_event().and_then(|e| e.get(&field)).cloned()),
            );
        }
        domain
    }

    /// Adds (or replaces) a named projection.
    pub fn with_projection(
        mut self,
        name: &str,
        func: impl Fn(&Value) -> Option<Value> + Send + Sync + 'static,
    ) -> Self {
        self.add(name, Arc::new(func));
        self
    }

    fn add(&mut self, name: &str, func: Arc<ProjectionFn>) {
        let proj = Arc::new(Projection {
            name: Arc::from(name),
            func,
        });
        match self.index.get(name) {
            Some(id) => self.projections[id.0 as usize] = proj,
            None => {
                let id = ProjId(self.projections.len() as u32);
                self.projections.push(proj);
                self.index.insert(Arc::from(name), id);
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Arc<str>] {
        &self.variables
    }

    pub fn projection_names(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(|k| &**k)
    }

    pub fn has_projection(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn projection_id(&self, name: &str) -> Result<ProjId, UnknownProjection> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| UnknownProjection(name.into()))
    }

    pub fn projection_name(&self, id: ProjId) -> &str {
        &self.projections[id.0 as usize].name
    }

    pub fn apply(&self, id: ProjId, letter: &Value) -> Option<Value> {
        (self.projections[id.0 as usize].func)(letter)
    }

    pub fn project_letters(&self, id: ProjId, letters: &[Value]) -> Word {
        letters.iter().filter_map(|l| self.apply(id, l)).collect()
    }

    /// Projects a trace by projection name.
    pub fn project(&self, trace: &Trace, name: &str) -> Result<Word, UnknownProjection> {
        let id = self.projection_id(name)?;
        Ok(self.project_letters(id, trace.letters()))
    }
}

impl fmt::Debug for DataDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataDomain")
            .field("name", &self.name)
            .field("variables", &self.variables)
            .field("projections", &self.index.keys().collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Valuation;

    #[test]
    fn implicit_and_derived_projections() {
        let domain = DataDomain::new("t", &["a", "b"]).with_projection("odd_a", |v| {
            let a = v.as_event()?.get("a")?.as_int()?;
            (a % 2 != 0).then_some(Value::Int(a))
        });
        let trace = Trace::complete(
            "t1",
            (0..4).map(|i| Valuation::from_pairs([("a", Value::Int(i)), ("b", Value::sym("x"))])),
        );
        assert_eq!(
            domain.project(&trace, "a").unwrap(),
            (0..4).map(Value::Int).collect::<Vec<_>>()
        );
        assert_eq!(
            domain.project(&trace, "odd_a").unwrap(),
            alloc::vec![Value::Int(1), Value::Int(3)]
        );
        assert!(domain.project(&trace, "c").is_err());
    }
}
