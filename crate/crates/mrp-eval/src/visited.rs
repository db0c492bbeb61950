//! Insertion-ordered set of visited states with dense positions.

use std::collections::HashMap;

/// The distinct states touched during sampling, in first-visit order, each
/// mapped to a contiguous dense position. Walk accumulators are keyed by
/// these positions so storage scales with states actually seen, never with
/// the nominal state count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VisitedSet {
    states: Vec<usize>,
    index: HashMap<usize, usize>,
}

impl VisitedSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Dense position of `state`, inserting it if new.
    pub fn insert(&mut self, state: usize) -> usize {
        if let Some(&pos) = self.index.get(&state) {
            return pos;
        }
        let pos = self.states.len();
        self.states.push(state);
        self.index.insert(state, pos);
        pos
    }

    pub fn position(&self, state: usize) -> Option<usize> {
        self.index.get(&state).copied()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.index.contains_key(&state)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// States in insertion order; position `i` holds the state mapped to `i`.
    pub fn states(&self) -> &[usize] {
        &self.states
    }
}
