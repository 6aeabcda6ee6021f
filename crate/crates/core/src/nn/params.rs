//! Named parameter storage and per-pass bindings to graph leaves.

use std::cell::RefCell;
use std::collections::BTreeMap;

use super::tensor::{numel, Shape, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub shape: Shape,
    pub data: Vec<f64>,
}

/// Parameters keyed by dotted names, iterated in name order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    entries: BTreeMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, shape: Shape, data: Vec<f64>) -> Result<()> {
        let name = name.into();
        if data.len() != numel(&shape) {
            return Err(Error::domain(format!("parameter {name}: {} values for shape {shape:?}", data.len())));
        }
        if self.entries.contains_key(&name) {
            return Err(Error::domain(format!("duplicate parameter name {name}")));
        }
        self.entries.insert(name, Param { shape, data });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.entries.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Param)> {
        self.entries.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Param)> {
        self.entries.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total scalar count.
    pub fn count(&self) -> usize {
        self.entries.values().map(|p| p.data.len()).sum()
    }

    /// Leaves for one forward pass. Names for which `trainable` is false
    /// become constants and receive no gradient.
    pub fn bind<'a>(&'a self, trainable: impl Fn(&str) -> bool + 'a) -> Bindings<'a> {
        Bindings {
            store: self,
            trainable: Box::new(trainable),
            leaves: RefCell::new(BTreeMap::new()),
        }
    }

    /// Binds every parameter as trainable.
    pub fn bind_all(&self) -> Bindings<'_> {
        self.bind(|_| true)
    }

    /// Binds every parameter as a constant.
    pub fn bind_frozen(&self) -> Bindings<'_> {
        self.bind(|_| false)
    }
}

/// Lazily created graph leaves for the parameters a forward pass touches.
pub struct Bindings<'a> {
    store: &'a ParamStore,
    trainable: Box<dyn Fn(&str) -> bool + 'a>,
    leaves: RefCell<BTreeMap<String, Tensor>>,
}

impl Bindings<'_> {
    pub fn get(&self, name: &str) -> Result<Tensor> {
        if let Some(t) = self.leaves.borrow().get(name) {
            return Ok(t.clone());
        }
        let p = self
            .store
            .get(name)
            .ok_or_else(|| Error::Checkpoint(format!("missing parameter {name}")))?;
        let t = if (self.trainable)(name) {
            Tensor::leaf(p.shape, p.data.clone())?
        } else {
            Tensor::new(p.shape, p.data.clone())?
        };
        self.leaves.borrow_mut().insert(name.to_string(), t.clone());
        Ok(t)
    }

    /// Replaces the leaf for `name`, e.g. with a perturbed copy.
    pub fn set(&self, name: &str, t: Tensor) {
        self.leaves.borrow_mut().insert(name.to_string(), t);
    }

    /// Gradients of trainable leaves touched so far.
    pub fn grads(&self) -> BTreeMap<String, Vec<f64>> {
        self.leaves
            .borrow()
            .iter()
            .filter_map(|(k, t)| t.grad().map(|g| (k.clone(), g)))
            .collect()
    }
}
