//! Finite ground sets, configurations and index sets.

use serde::{Deserialize, Serialize};

use crate::error::{DppError, Result};

/// Default largest ground set for which `2^p` enumeration is allowed.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Hard ceiling on any override of the enumeration cap.
const MAX_ENUMERATION_CAP: usize = 32;

/// Largest representable ground set (configurations are 64-bit masks).
pub const MAX_POINTS: usize = 63;

/// The ground set `{1, …, p}` together with the enumeration cap that applies to it.
/// Pointwise evaluation works for any `p ≤ 63`; anything that walks all `2^p`
/// configurations calls [`GroundSet::check_enumerable`] first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    p: usize,
    cap: usize,
}

impl GroundSet {
    pub fn new(p: usize) -> Result<Self> {
        Self::with_cap(p, DEFAULT_ENUMERATION_CAP)
    }

    /// A ground set with an overridden enumeration cap (clamped to 32).
    pub fn with_cap(p: usize, cap: usize) -> Result<Self> {
        if p == 0 || p > MAX_POINTS {
            return Err(DppError::GroundSetSize { p, cap: MAX_POINTS });
        }
        Ok(Self {
            p,
            cap: cap.min(MAX_ENUMERATION_CAP),
        })
    }

    /// Errors unless `2^p` enumeration is allowed under the cap.
    pub fn check_enumerable(&self) -> Result<()> {
        if self.p > self.cap {
            Err(DppError::EnumerationCap {
                p: self.p,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of configurations, `2^p`.
    pub fn num_configs(&self) -> usize {
        1usize << self.p
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.p) - 1
    }

    pub fn contains(&self, alpha: Config) -> bool {
        alpha.0 & !self.full_mask() == 0
    }

    pub fn check(&self, alpha: Config) -> Result<()> {
        if self.contains(alpha) {
            Ok(())
        } else {
            Err(DppError::InvalidConfig {
                mask: alpha.0,
                p: self.p,
            })
        }
    }

    /// All configurations in ascending bitmask order.
    pub fn configs(&self) -> impl Iterator<Item = Config> {
        (0..self.num_configs() as u64).map(Config)
    }

    /// All configurations of cardinality `k`, in ascending bitmask order.
    pub fn configs_of_size(&self, k: usize) -> impl Iterator<Item = Config> {
        Subsets::new(self.p, k).map(Config)
    }
}

/// A finite subset of the ground set, as a bitmask (bit `i` is point `i + 1`).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Config(pub u64);

impl Config {
    pub const EMPTY: Config = Config(0);

    /// Builds a configuration from zero-based point indices; duplicates collapse.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Config(indices.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(&self, other: Config) -> bool {
        self.0 & !other.0 == 0
    }

    /// Zero-based members in increasing order.
    pub fn members(&self) -> Vec<usize> {
        bits(self.0).collect()
    }
}

/// A subset `J` of column indices of an orthonormal family (zero-based bitmask).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ActiveSet(pub u64);

impl ActiveSet {
    pub const EMPTY: ActiveSet = ActiveSet(0);

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        ActiveSet(indices.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    /// `{0, …, k-1}`.
    pub fn first(k: usize) -> Self {
        if k == 0 {
            ActiveSet(0)
        } else {
            ActiveSet(u64::MAX >> (64 - k))
        }
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        bits(self.0).collect()
    }

    pub fn check(&self, rank: usize) -> Result<()> {
        match bits(self.0).find(|&j| j >= rank) {
            Some(index) => Err(DppError::IndexOutOfRange { index, rank }),
            None => Ok(()),
        }
    }

    /// All subsets of `{0, …, r-1}` with exactly `k` elements, ascending.
    pub fn subsets_of_size(r: usize, k: usize) -> impl Iterator<Item = ActiveSet> {
        Subsets::new(r, k).map(ActiveSet)
    }

    /// All subsets of `{0, …, r-1}`, ascending.
    pub fn all_subsets(r: usize) -> impl Iterator<Item = ActiveSet> {
        (0..1u64 << r).map(ActiveSet)
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Fixed-popcount bitmasks over `n` bits in ascending order (Gosper's hack).
struct Subsets {
    next: Option<u64>,
    limit: u64,
}

impl Subsets {
    fn new(n: usize, k: usize) -> Self {
        let next = if k > n {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some((1u64 << k) - 1)
        };
        Subsets {
            next,
            limit: 1u64 << n,
        }
    }
}

impl Iterator for Subsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        if cur >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    }
}
