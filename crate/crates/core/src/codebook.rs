//! Sparse or multi-LED transmit codebooks in spatial-group-major order.

use crate::error::{Error, Result};

/// One transmit vector together with the labels that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TxVector {
    pub led_index: usize,
    pub symbol_index: usize,
    pub amplitude: f64,
    pub vector: Vec<f64>,
}

/// Every transmit vector of a scheme.
///
/// Codewords are grouped by spatial index (active LED, or active LED
/// combination for multi-LED schemes); within a group they are ordered by
/// symbol index. Codeword `k` therefore has spatial index
/// `k / symbols_per_group` and symbol index `k % symbols_per_group`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n_t: usize,
    n_groups: usize,
    symbols_per_group: usize,
    data: Vec<f64>,
}

impl Codebook {
    pub fn new(n_t: usize, n_groups: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if n_t == 0 || n_groups == 0 || vectors.is_empty() {
            return Err(Error::Dimension("empty codebook".into()));
        }
        if !vectors.len().is_multiple_of(n_groups) {
            return Err(Error::Dimension(format!(
                "{} codewords do not split into {n_groups} equal groups",
                vectors.len()
            )));
        }
        if vectors.iter().any(|v| v.len() != n_t) {
            return Err(Error::Dimension(format!("codeword length must be {n_t}")));
        }
        if vectors.iter().flatten().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::Dimension(
                "intensity-modulated codewords must be finite and nonnegative".into(),
            ));
        }
        let symbols_per_group = vectors.len() / n_groups;
        Ok(Self {
            n_t,
            n_groups,
            symbols_per_group,
            data: vectors.into_iter().flatten().collect(),
        })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn symbols_per_group(&self) -> usize {
        self.symbols_per_group
    }

    pub fn len(&self) -> usize {
        self.n_groups * self.symbols_per_group
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_t..(k + 1) * self.n_t]
    }

    #[inline]
    pub fn index(&self, group: usize, symbol: usize) -> usize {
        group * self.symbols_per_group + symbol
    }

    #[inline]
    pub fn labels(&self, k: usize) -> (usize, usize) {
        (k / self.symbols_per_group, k % self.symbols_per_group)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n_t)
    }

    /// Bits carried per channel use, `log2` of the codebook size.
    pub fn spectral_efficiency(&self) -> f64 {
        (self.len() as f64).log2()
    }

    /// Average total emitted optical power per codeword.
    pub fn mean_optical_power(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.len() as f64
    }
}

/// Binary-reflected Gray label of `k`.
#[inline]
pub fn gray_encode(k: usize) -> usize {
    k ^ (k >> 1)
}

#[inline]
pub fn gray_decode(mut g: usize) -> usize {
    let mut k = g;
    while g > 0 {
        g >>= 1;
        k ^= g;
    }
    k
}

/// Big-endian integer value of a bit slice.
pub fn bits_to_usize(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

pub fn usize_to_bits(value: usize, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}
