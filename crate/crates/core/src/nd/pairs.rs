use alloc::vec::Vec;

use crate::{Error, Result};

/// Number of pairs `n(n − 1)/2`.
#[inline]
pub const fn pair_count(n_bands: usize) -> usize {
    n_bands * n_bands.saturating_sub(1) / 2
}

/// Lexicographic rank of `(i, j)` among all pairs with `i < j < n`.
pub fn pair_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok(i * n - i * (i + 1) / 2 + (j - i - 1))
}

/// The ordered list of band pairs for `n` bands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndexer {
    n_bands: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndexer {
    pub fn new(n_bands: usize) -> Self {
        let pairs = (0..n_bands)
            .flat_map(|i| (i + 1..n_bands).map(move |j| (i, j)))
            .collect();
        Self { n_bands, pairs }
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, position: usize) -> Option<(usize, usize)> {
        self.pairs.get(position).copied()
    }

    pub fn position(&self, i: usize, j: usize) -> Result<usize> {
        pair_index(i, j, self.n_bands)
    }
}
