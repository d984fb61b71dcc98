use rand::Rng;

use crate::env::{ActionSet, OBS_DIM};
use crate::error::{Error, Result};

/// One replay record. `safe` and `admissible` describe the state the action
/// was taken in; the `_next` sets describe the successor state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: [f64; OBS_DIM],
    pub a: usize,
    pub r: f64,
    pub s_next: [f64; OBS_DIM],
    pub terminal: bool,
    pub admissible: ActionSet,
    pub safe: ActionSet,
    pub admissible_next: ActionSet,
    pub safe_next: ActionSet,
}

/// Fixed-capacity ring buffer sampled uniformly with replacement.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            capacity: capacity.max(1),
            items: Vec::with_capacity(capacity.max(1)),
            next: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Stores `t`, evicting the oldest record once full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Records in insertion order, oldest first.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(&self.items[..split])
    }

    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok((0..n).map(|_| rng.gen_range(0..self.items.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        Ok(self.sample_indices(n, rng)?.into_iter().map(|i| &self.items[i]).collect())
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }
}
