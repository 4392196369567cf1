use rand::Rng;

/// One stored interaction. `done` marks true terminals only; step-cap
/// truncations keep bootstrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f32>,
    pub action: usize,
    pub reward: f32,
    pub next_obs: Vec<f32>,
    pub done: bool,
}

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self { capacity, items: Vec::new(), next: 0 }
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

    /// Appends, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Uniform sample with replacement; panics on an empty buffer.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<&Transition> {
        assert!(!self.items.is_empty());
        (0..n).map(|_| &self.items[rng.gen_range(0..self.items.len())]).collect()
    }
}
