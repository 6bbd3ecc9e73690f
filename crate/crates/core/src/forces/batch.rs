use rand::Rng;

use crate::error::{invalid, Result};

/// Indices drawn uniformly without replacement.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchDraw {
    indices: Vec<usize>,
}

impl BatchDraw {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a batch from explicit indices, for enumeration in tests.
    pub fn from_indices(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `s` distinct indices from `0..n` excluding `exclude`.
    pub fn particle<R: Rng + ?Sized>(rng: &mut R, n: usize, exclude: usize, s: usize) -> Result<Self> {
        if exclude >= n || s == 0 || s > n - 1 {
            return Err(invalid(format!("batch of {s} from {n} particles excluding one is impossible")));
        }
        let mut b = Self::new();
        b.redraw_excluding(rng, n, exclude, s);
        Ok(b)
    }

    /// `s` distinct indices from `0..n`.
    pub fn data<R: Rng + ?Sized>(rng: &mut R, n: usize, s: usize) -> Result<Self> {
        if s == 0 || s > n {
            return Err(invalid(format!("batch of {s} from {n} data points is impossible")));
        }
        let mut b = Self::new();
        b.redraw(rng, n, s);
        Ok(b)
    }

    /// Refills in place with `s` distinct indices from `0..n`; `s <= n` is the caller's duty.
    pub fn redraw<R: Rng + ?Sized>(&mut self, rng: &mut R, n: usize, s: usize) {
        debug_assert!(s >= 1 && s <= n);
        self.indices.clear();
        if s == 1 {
            self.indices.push(rng.random_range(0..n));
        } else if s <= 32 {
            // Floyd's algorithm; membership by linear scan is cheap at this size.
            for j in n - s..n {
                let t = rng.random_range(0..=j);
                if self.indices.contains(&t) {
                    self.indices.push(j);
                } else {
                    self.indices.push(t);
                }
            }
        } else {
            self.indices
                .extend(rand::seq::index::sample(rng, n, s));
        }
    }

    /// As [`redraw`](Self::redraw) over `0..n` minus `exclude`.
    pub fn redraw_excluding<R: Rng + ?Sized>(&mut self, rng: &mut R, n: usize, exclude: usize, s: usize) {
        self.redraw(rng, n - 1, s);
        for k in self.indices.iter_mut() {
            if *k >= exclude {
                *k += 1;
            }
        }
    }
}
