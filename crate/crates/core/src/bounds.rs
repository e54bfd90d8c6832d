//! Union-bound symbol error rate evaluators for joint and two-step detection.
//!
//! All evaluators work from the pairwise distances `||gamma H (x_a - x_b)||`
//! between noiseless received points, so a [`PairDistances`] table built once
//! per channel and codebook serves a whole SNR sweep. Values are returned raw;
//! at low SNR a union bound may exceed one.

use serde::Serialize;

use crate::apq::ApqScheme;
use crate::codebook::Codebook;
use crate::detection::Detector;
use crate::error::{Error, Result};
use crate::geometry::ChannelMatrix;

const Q_CLAMP: f64 = 38.0;

/// Gaussian tail probability `Q(x) = erfc(x / sqrt 2) / 2`.
///
/// Saturates to exactly 0 or 1 beyond `|x| = 38`.
pub fn q_function(x: f64) -> f64 {
    if x > Q_CLAMP {
        0.0
    } else if x < -Q_CLAMP {
        1.0
    } else {
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
    }
}

/// `Q(distance / (2 sigma))`, with a zero distance always giving `Q(0)`.
#[inline]
pub fn q_of_distance(distance: f64, sigma: f64) -> f64 {
    if distance == 0.0 {
        0.5
    } else {
        q_function(distance / (2.0 * sigma))
    }
}

/// Probability that `x_a` is decoded as `x_b` in a binary ML test.
pub fn pep(x_a: &[f64], x_b: &[f64], h: &ChannelMatrix, gamma: f64, sigma: f64) -> Result<f64> {
    if x_a.len() != h.n_t() || x_b.len() != h.n_t() {
        return Err(Error::Dimension("transmit vector length differs from N_t".into()));
    }
    let diff: Vec<f64> = x_a.iter().zip(x_b).map(|(a, b)| a - b).collect();
    let d = gamma * h.apply(&diff).iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(q_of_distance(d, sigma))
}

/// Euclidean distances between every pair of noiseless received points.
#[derive(Debug, Clone)]
pub struct PairDistances {
    n: usize,
    n_groups: usize,
    per_group: usize,
    dist: Vec<f64>,
}

impl PairDistances {
    pub fn new(h: &ChannelMatrix, codebook: &Codebook, gamma: f64) -> Result<Self> {
        Ok(Self::from_detector(&Detector::new(h, codebook, gamma)?, codebook))
    }

    pub fn from_detector(det: &Detector, codebook: &Codebook) -> Self {
        let n = det.len();
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            for b in a + 1..n {
                let d = det
                    .point(a)
                    .iter()
                    .zip(det.point(b))
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                dist[a * n + b] = d;
                dist[b * n + a] = d;
            }
        }
        Self {
            n,
            n_groups: codebook.n_groups(),
            per_group: codebook.symbols_per_group(),
            dist,
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Joint-detection union bound averaged over equiprobable codewords.
    pub fn joint_bound(&self, sigma: f64) -> f64 {
        let mut total = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                if a != b {
                    total += q_of_distance(self.get(a, b), sigma);
                }
            }
        }
        total / self.n as f64
    }

    /// Smallest distance from codeword `(group, symbol)` to any codeword of a
    /// different spatial group.
    pub fn min_distance(&self, group: usize, symbol: usize) -> Result<f64> {
        self.check(group, symbol)?;
        if self.n_groups < 2 {
            return Err(Error::Dimension(
                "minimum inter-group distance needs at least two spatial groups".into(),
            ));
        }
        let a = group * self.per_group + symbol;
        let mut best = f64::INFINITY;
        for b in 0..self.n {
            if b / self.per_group != group {
                best = best.min(self.get(a, b));
            }
        }
        Ok(best)
    }

    /// Spatial-index error term for group `group`.
    pub fn index_bound(&self, sigma: f64, group: usize) -> Result<f64> {
        let mut total = 0.0;
        for s in 0..self.per_group {
            total += q_of_distance(self.min_distance(group, s)?, sigma);
        }
        Ok(total / self.per_group as f64)
    }

    /// Union bound on symbol error given the spatial index was detected
    /// correctly, for group `group`.
    pub fn symbol_bound(&self, sigma: f64, group: usize) -> Result<f64> {
        self.check(group, 0)?;
        let base = group * self.per_group;
        let mut total = 0.0;
        for s in 0..self.per_group {
            for t in 0..self.per_group {
                if s != t {
                    total += q_of_distance(self.get(base + s, base + t), sigma);
                }
            }
        }
        Ok(total / self.per_group as f64)
    }

    /// Every quantity of the two-step analysis at one noise level.
    ///
    /// With a single spatial group the index term is zero.
    pub fn report(&self, sigma: f64) -> Result<BoundTerms> {
        let mut index = 0.0;
        let mut symbol = 0.0;
        let mut two_step = 0.0;
        for g in 0..self.n_groups {
            // a lone spatial group cannot be confused with another
            let pl = if self.n_groups < 2 { 0.0 } else { self.index_bound(sigma, g)? };
            let px = self.symbol_bound(sigma, g)?;
            index += pl;
            symbol += px;
            two_step += pl + px - pl * px;
        }
        let k = self.n_groups as f64;
        Ok(BoundTerms {
            joint: self.joint_bound(sigma),
            index: index / k,
            cond_symbol: symbol / k,
            two_step: two_step / k,
        })
    }

    fn check(&self, group: usize, symbol: usize) -> Result<()> {
        if group >= self.n_groups {
            return Err(Error::IndexOutOfRange {
                what: "spatial index",
                index: group,
                limit: self.n_groups,
            });
        }
        if symbol >= self.per_group {
            return Err(Error::IndexOutOfRange {
                what: "symbol index",
                index: symbol,
                limit: self.per_group,
            });
        }
        Ok(())
    }
}

/// Bound values at one noise level; `index` and `cond_symbol` are averaged
/// over spatial groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerms {
    pub joint: f64,
    pub index: f64,
    pub cond_symbol: f64,
    pub two_step: f64,
}

/// One row of a bound sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub snr_db: f64,
    pub joint_bound: f64,
    pub index_bound: f64,
    pub cond_symbol_bound: f64,
    pub two_step_bound: f64,
}

impl BoundReport {
    pub fn new(snr_db: f64, t: BoundTerms) -> Self {
        Self {
            snr_db,
            joint_bound: t.joint,
            index_bound: t.index,
            cond_symbol_bound: t.cond_symbol,
            two_step_bound: t.two_step,
        }
    }
}

pub fn joint_aser_bound(codebook: &Codebook, h: &ChannelMatrix, gamma: f64, sigma: f64) -> Result<f64> {
    Ok(PairDistances::new(h, codebook, gamma)?.joint_bound(sigma))
}

pub fn min_distance(codebook: &Codebook, h: &ChannelMatrix, gamma: f64, group: usize, symbol: usize) -> Result<f64> {
    PairDistances::new(h, codebook, gamma)?.min_distance(group, symbol)
}

pub fn index_error_bound(codebook: &Codebook, h: &ChannelMatrix, gamma: f64, sigma: f64, group: usize) -> Result<f64> {
    PairDistances::new(h, codebook, gamma)?.index_bound(sigma, group)
}

pub fn symbol_error_bound(codebook: &Codebook, h: &ChannelMatrix, gamma: f64, sigma: f64, group: usize) -> Result<f64> {
    PairDistances::new(h, codebook, gamma)?.symbol_bound(sigma, group)
}

pub fn two_step_aser_bound(codebook: &Codebook, h: &ChannelMatrix, gamma: f64, sigma: f64) -> Result<f64> {
    Ok(PairDistances::new(h, codebook, gamma)?.report(sigma)?.two_step)
}

/// Per-pair coefficients `Delta^r_i = x_i(b) h_{r, led(b)} - x_i(a) h_{r, led(a)}`
/// over all ordered codeword pairs `a != b` of an APQ-SM scheme, so that
/// `p . Delta^r` is the `r`-th component of `H (x_b - x_a)` for any power
/// split `p`.
#[derive(Debug, Clone)]
pub struct DeltaTensor {
    n_codewords: usize,
    n_r: usize,
    /// `pairs * n_r` rows of three coefficients, pair-major.
    coeffs: Vec<[f64; 3]>,
    pairs: Vec<(u32, u32)>,
}

impl DeltaTensor {
    pub fn new(scheme: &ApqScheme, h: &ChannelMatrix) -> Result<Self> {
        if h.n_t() != scheme.n_t() {
            return Err(Error::Dimension(format!(
                "channel has {} LEDs, scheme {}",
                h.n_t(),
                scheme.n_t()
            )));
        }
        let parts = scheme.all_part_values();
        let m = parts.len();
        let n = scheme.n_t() * m;
        let n_r = h.n_r();
        let mut coeffs = Vec::with_capacity(n * (n - 1) * n_r);
        let mut pairs = Vec::with_capacity(n * (n - 1));
        for a in 0..n {
            let (la, ma) = (a / m, a % m);
            for b in 0..n {
                if a == b {
                    continue;
                }
                let (lb, mb) = (b / m, b % m);
                pairs.push((a as u32, b as u32));
                for r in 0..n_r {
                    let ha = h.get(r, la);
                    let hb = h.get(r, lb);
                    coeffs.push([
                        parts[mb][0] * hb - parts[ma][0] * ha,
                        parts[mb][1] * hb - parts[ma][1] * ha,
                        parts[mb][2] * hb - parts[ma][2] * ha,
                    ]);
                }
            }
        }
        Ok(Self {
            n_codewords: n,
            n_r,
            coeffs,
            pairs,
        })
    }

    pub fn n_codewords(&self) -> usize {
        self.n_codewords
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Ordered codeword indices `(a, b)` of pair `k`.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        let (a, b) = self.pairs[k];
        (a as usize, b as usize)
    }

    /// The `n_r` coefficient rows of pair `k`.
    #[inline]
    pub fn rows(&self, k: usize) -> &[[f64; 3]] {
        &self.coeffs[k * self.n_r..(k + 1) * self.n_r]
    }

    pub fn iter_pairs(&self) -> impl Iterator<Item = &[[f64; 3]]> {
        self.coeffs.chunks(self.n_r)
    }
}
