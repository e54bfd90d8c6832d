//! AWGN transmission and maximum-likelihood detection.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::geometry::ChannelMatrix;

/// Additive white Gaussian noise, standard deviation `sigma` per photodiode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
}

impl NoiseModel {
    /// `sigma^2 = N_0 * B`.
    pub fn from_psd(n0: f64, bandwidth: f64) -> Self {
        Self {
            sigma: (n0 * bandwidth).sqrt(),
        }
    }
}

/// `y = gamma * H * x + z` with `z ~ N(0, sigma^2 I)`.
pub fn transmit<R: Rng + ?Sized>(
    h: &ChannelMatrix,
    x: &[f64],
    gamma: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if x.len() != h.n_t() {
        return Err(Error::Dimension(format!(
            "transmit vector has length {}, channel has {} LEDs",
            x.len(),
            h.n_t()
        )));
    }
    let mut y = h.apply(x);
    for v in &mut y {
        let z: f64 = rng.sample(StandardNormal);
        *v = gamma * *v + sigma * z;
    }
    Ok(y)
}

/// Outcome of one detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    /// Spatial index (active LED or LED combination).
    pub group: usize,
    pub symbol: usize,
    /// Codeword index `group * symbols_per_group + symbol`.
    pub index: usize,
    /// Number of candidate distances evaluated.
    pub evaluations: usize,
}

/// ML detector over a fixed codebook with the noiseless received points
/// `gamma * H * x` precomputed.
#[derive(Debug, Clone)]
pub struct Detector {
    n_r: usize,
    n_groups: usize,
    per_group: usize,
    points: Vec<f64>,
}

impl Detector {
    pub fn new(h: &ChannelMatrix, codebook: &Codebook, gamma: f64) -> Result<Self> {
        if h.n_t() != codebook.n_t() {
            return Err(Error::Dimension(format!(
                "channel has {} LEDs, codebook {}",
                h.n_t(),
                codebook.n_t()
            )));
        }
        let mut points = Vec::with_capacity(codebook.len() * h.n_r());
        for x in codebook.iter() {
            points.extend(h.apply(x).into_iter().map(|v| gamma * v));
        }
        Ok(Self {
            n_r: h.n_r(),
            n_groups: codebook.n_groups(),
            per_group: codebook.symbols_per_group(),
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.n_groups * self.per_group
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn symbols_per_group(&self) -> usize {
        self.per_group
    }

    /// Noiseless received point of codeword `k`.
    #[inline]
    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.n_r..(k + 1) * self.n_r]
    }

    #[inline]
    fn distance(&self, y: &[f64], k: usize) -> f64 {
        self.point(k)
            .iter()
            .zip(y)
            .map(|(p, v)| (v - p) * (v - p))
            .sum()
    }

    fn decision(&self, index: usize) -> Decision {
        Decision {
            group: index / self.per_group,
            symbol: index % self.per_group,
            index,
            evaluations: self.len(),
        }
    }

    /// Exhaustive search over every codeword; ties go to the lowest index.
    pub fn detect_joint(&self, y: &[f64]) -> Decision {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for k in 0..self.len() {
            let d = self.distance(y, k);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        self.decision(best)
    }

    /// Spatial index first (minimum over its symbols), then the symbol that
    /// achieved that minimum within the chosen group.
    pub fn detect_two_step(&self, y: &[f64]) -> Decision {
        let mut best_group = 0;
        let mut best_group_d = f64::INFINITY;
        let mut best_symbol = 0;
        for g in 0..self.n_groups {
            let mut inner = f64::INFINITY;
            let mut inner_arg = 0;
            for s in 0..self.per_group {
                let d = self.distance(y, g * self.per_group + s);
                if d < inner {
                    inner = d;
                    inner_arg = s;
                }
            }
            if inner < best_group_d {
                best_group_d = inner;
                best_group = g;
                best_symbol = inner_arg;
            }
        }
        self.decision(best_group * self.per_group + best_symbol)
    }

    pub fn detect(&self, kind: DetectorKind, y: &[f64]) -> Decision {
        match kind {
            DetectorKind::Joint => self.detect_joint(y),
            DetectorKind::TwoStep => self.detect_two_step(y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Joint,
    TwoStep,
}

impl DetectorKind {
    pub fn label(self) -> &'static str {
        match self {
            DetectorKind::Joint => "joint",
            DetectorKind::TwoStep => "two-step",
        }
    }
}

/// One-shot joint ML decision `(spatial index, symbol index)`.
pub fn detect_joint(y: &[f64], h: &ChannelMatrix, codebook: &Codebook, gamma: f64) -> Result<(usize, usize)> {
    let d = Detector::new(h, codebook, gamma)?.detect_joint(y);
    Ok((d.group, d.symbol))
}

/// One-shot two-step ML decision `(spatial index, symbol index)`.
pub fn detect_two_step(y: &[f64], h: &ChannelMatrix, codebook: &Codebook, gamma: f64) -> Result<(usize, usize)> {
    let d = Detector::new(h, codebook, gamma)?.detect_two_step(y);
    Ok((d.group, d.symbol))
}
