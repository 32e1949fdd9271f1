use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector3;

use super::{nodal_tangential_force, ContactFormulation, NodalContact};
use crate::real::Real;

/// Stored tangential force of one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentialEntry<T: Real> {
    pub force: Vector3<T>,
    pub last_step: u64,
}

/// Friction history of one master/slave pair, keyed by slave node.
#[derive(Clone, Debug, PartialEq)]
pub struct PairHistory<T: Real> {
    entries: HashMap<usize, TangentialEntry<T>>,
}

impl<T: Real> Default for PairHistory<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Default for ContactLedger<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> PairHistory<T> {
    pub fn new() -> Self {
        Self {
            entries: HashMap::new(),
        }
    }

    pub fn get(&self, node: usize) -> Option<&TangentialEntry<T>> {
        self.entries.get(&node)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Advances the friction force of `c.node` by one step and stores it.
    pub fn update(
        &mut self,
        c: &NodalContact<T>,
        relative_velocity: &Vector3<T>,
        dt: T,
        f: &ContactFormulation<T>,
        step: u64,
    ) -> Vector3<T> {
        let previous = self
            .entries
            .get(&c.node)
            .map_or_else(Vector3::zeros, |e| e.force);
        let force = nodal_tangential_force(c, relative_velocity, dt, f, &previous);
        self.entries.insert(
            c.node,
            TangentialEntry {
                force,
                last_step: step,
            },
        );
        force
    }

    /// Forgets nodes that were not updated at `step` (they separated).
    pub fn drop_inactive(&mut self, step: u64) {
        self.entries.retain(|_, e| e.last_step == step);
    }
}

/// Friction history of every active pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactLedger<T: Real> {
    pairs: BTreeMap<(usize, usize), PairHistory<T>>,
}

impl<T: Real> ContactLedger<T> {
    pub fn new() -> Self {
        Self {
            pairs: BTreeMap::new(),
        }
    }

    /// Removes and returns a pair's history so it can be updated on its own.
    pub fn take(&mut self, pair: (usize, usize)) -> PairHistory<T> {
        self.pairs.remove(&key(pair)).unwrap_or_default()
    }

    /// Puts a pair's history back; empty histories are not kept.
    pub fn restore(&mut self, pair: (usize, usize), history: PairHistory<T>) {
        if !history.is_empty() {
            self.pairs.insert(key(pair), history);
        }
    }

    pub fn pair(&self, pair: (usize, usize)) -> Option<&PairHistory<T>> {
        self.pairs.get(&key(pair))
    }

    pub fn get(&self, pair: (usize, usize), node: usize) -> Option<&TangentialEntry<T>> {
        self.pair(pair).and_then(|h| h.get(node))
    }

    /// Single-contact convenience wrapper around [`PairHistory::update`].
    pub fn tangential_force(
        &mut self,
        c: &NodalContact<T>,
        relative_velocity: &Vector3<T>,
        dt: T,
        f: &ContactFormulation<T>,
        step: u64,
    ) -> Vector3<T> {
        self.pairs
            .entry(key((c.master, c.slave)))
            .or_default()
            .update(c, relative_velocity, dt, f, step)
    }

    /// Drops every entry not refreshed at `step`.
    pub fn end_step(&mut self, step: u64) {
        for h in self.pairs.values_mut() {
            h.drop_inactive(step);
        }
        self.pairs.retain(|_, h| !h.is_empty());
    }

    /// Total number of stored node entries.
    pub fn len(&self) -> usize {
        self.pairs.values().map(PairHistory::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }
}

fn key((a, b): (usize, usize)) -> (usize, usize) {
    (a.min(b), a.max(b))
}
