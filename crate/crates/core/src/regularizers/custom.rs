use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::grid::GridSignal;

/// A user-supplied convex functional on grid signals.
pub trait Functional: Send + Sync {
    fn value(&self, u: &GridSignal) -> Result<f64>;

    /// Any subgradient with respect to the node values.
    fn subgradient(&self, u: &GridSignal) -> Result<Vec<f64>>;

    fn vanishes_exactly_on_constants(&self) -> bool {
        true
    }
}

/// A named user callback. Serializes as its name; never deserialized.
pub struct Named<F: ?Sized> {
    pub name: String,
    pub f: Arc<F>,
}

impl<F: ?Sized> Named<F> {
    pub fn new(name: impl Into<String>, f: Arc<F>) -> Self {
        Self {
            name: name.into(),
            f,
        }
    }
}

impl<F: ?Sized> Clone for Named<F> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<F: ?Sized> fmt::Debug for Named<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({})", self.name)
    }
}

impl<F: ?Sized> Serialize for Named<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("custom:{}", self.name))
    }
}
