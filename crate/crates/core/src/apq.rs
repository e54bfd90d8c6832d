//! APQ constellations and APQ spatial modulation.
//!
//! An `M`-ary APQ symbol is built from three unipolar PAM parts (amplitude,
//! quadrant, phase) of sizes `M_1 * M_2 * M_3 = M`. Each part's level set has
//! unit mean, and the parts are superimposed with power weights `p_1 >= p_2 >=
//! p_3 >= 0` summing to the mean optical power, so every APQ constellation
//! keeps the average emitted power fixed.
//!
//! Symbol index `m` decomposes mixed-radix as `m = a * M_2 * M_3 + q * M_3 + t`.
//! On the bit side, the first `log2 N_t` bits pick the LED and the remaining
//! bits are consumed in amplitude, quadrant, phase order, each group Gray
//! mapped onto its part's levels.

use serde::{Deserialize, Serialize};

use crate::codebook::{bits_to_usize, gray_decode, gray_encode, usize_to_bits, Codebook, TxVector};
use crate::error::{Error, Result};
use crate::geometry::SystemParams;

const POWER_TOL: f64 = 1e-12;

/// Unipolar PAM levels `2k / (order + 1)`, `k = 1..=order`, ascending.
pub fn pam_levels(order: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::InvalidOrder("PAM order must be at least 1".into()));
    }
    let denom = (order + 1) as f64;
    Ok((1..=order).map(|k| 2.0 * k as f64 / denom).collect())
}

/// `E_s = gamma^2 * P_opt^2 * T`.
pub fn average_symbol_energy(params: &SystemParams, symbol_duration: f64) -> f64 {
    params.conv_factor_a_per_w.powi(2) * params.p_opt_w.powi(2) * symbol_duration
}

/// Power split across the three APQ parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerVector {
    p: [f64; 3],
    p_opt: f64,
}

impl PowerVector {
    pub fn new(p: [f64; 3], p_opt: f64) -> Result<Self> {
        if !(p_opt > 0.0 && p_opt.is_finite()) {
            return Err(Error::InvalidPower(format!("P_opt must be positive, got {p_opt}")));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPower(format!("non-finite entry in {p:?}")));
        }
        let tol = POWER_TOL * p_opt;
        let sum: f64 = p.iter().sum();
        if (sum - p_opt).abs() > tol {
            return Err(Error::InvalidPower(format!(
                "{p:?} sums to {sum}, expected {p_opt}"
            )));
        }
        if p[2] < -tol || p[1] < p[2] - tol || p[0] < p[1] - tol {
            return Err(Error::InvalidPower(format!(
                "{p:?} violates p1 >= p2 >= p3 >= 0"
            )));
        }
        Ok(Self { p, p_opt })
    }

    /// Scales nonnegative weights onto the simplex `sum = p_opt`.
    pub fn from_weights(w: [f64; 3], p_opt: f64) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidPower(format!("weights {w:?} must have positive sum")));
        }
        let p0 = w[0] / s * p_opt;
        let p1 = w[1] / s * p_opt;
        Self::new([p0, p1, p_opt - p0 - p1], p_opt)
    }

    /// The 4:2:1 split.
    pub fn fixed(p_opt: f64) -> Self {
        Self::from_weights([4.0, 2.0, 1.0], p_opt).expect("4:2:1 is feasible")
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.p
    }

    pub fn p_opt(&self) -> f64 {
        self.p_opt
    }
}

/// APQ-SM constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct ApqScheme {
    n_t: usize,
    split: [usize; 3],
    part_levels: [Vec<f64>; 3],
    power: PowerVector,
}

impl ApqScheme {
    pub fn new(n_t: usize, split: [usize; 3], power: PowerVector) -> Result<Self> {
        if n_t == 0 || !n_t.is_power_of_two() {
            return Err(Error::InvalidOrder(format!("N_t = {n_t} is not a power of two")));
        }
        for &m in &split {
            if m == 0 || !m.is_power_of_two() {
                return Err(Error::InvalidOrder(format!(
                    "part size {m} in {split:?} is not a power of two"
                )));
            }
        }
        Ok(Self {
            n_t,
            split,
            part_levels: [pam_levels(split[0])?, pam_levels(split[1])?, pam_levels(split[2])?],
            power,
        })
    }

    pub fn with_power(&self, power: PowerVector) -> Self {
        Self { power, ..self.clone() }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn split(&self) -> [usize; 3] {
        self.split
    }

    pub fn power(&self) -> &PowerVector {
        &self.power
    }

    pub fn part_levels(&self) -> &[Vec<f64>; 3] {
        &self.part_levels
    }

    /// Constellation size `M`.
    pub fn m_total(&self) -> usize {
        self.split.iter().product()
    }

    pub fn bits_per_channel_use(&self) -> usize {
        (self.n_t.trailing_zeros() + self.m_total().trailing_zeros()) as usize
    }

    /// Level indices `(a, q, t)` of symbol `m`.
    pub fn part_indices(&self, m: usize) -> Result<[usize; 3]> {
        if m >= self.m_total() {
            return Err(Error::IndexOutOfRange {
                what: "symbol index",
                index: m,
                limit: self.m_total(),
            });
        }
        let [_, m2, m3] = self.split;
        Ok([m / (m2 * m3), (m / m3) % m2, m % m3])
    }

    /// Unit-mean part levels `(x_1, x_2, x_3)` of symbol `m`.
    pub fn part_values(&self, m: usize) -> Result<[f64; 3]> {
        let idx = self.part_indices(m)?;
        Ok([
            self.part_levels[0][idx[0]],
            self.part_levels[1][idx[1]],
            self.part_levels[2][idx[2]],
        ])
    }

    /// Superimposed intensity `p . x(m)`.
    pub fn amplitude(&self, m: usize) -> Result<f64> {
        let x = self.part_values(m)?;
        let p = self.power.as_array();
        Ok(p[0] * x[0] + p[1] * x[1] + p[2] * x[2])
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        (0..self.m_total())
            .map(|m| self.amplitude(m).expect("index in range"))
            .collect()
    }

    /// Part levels of every symbol, in symbol order.
    pub fn all_part_values(&self) -> Vec<[f64; 3]> {
        (0..self.m_total())
            .map(|m| self.part_values(m).expect("index in range"))
            .collect()
    }

    pub fn tx_vector(&self, led: usize, m: usize) -> Result<TxVector> {
        if led >= self.n_t {
            return Err(Error::IndexOutOfRange {
                what: "LED index",
                index: led,
                limit: self.n_t,
            });
        }
        let amplitude = self.amplitude(m)?;
        let mut vector = vec![0.0; self.n_t];
        vector[led] = amplitude;
        Ok(TxVector {
            led_index: led,
            symbol_index: m,
            amplitude,
            vector,
        })
    }

    pub fn map_bits(&self, bits: &[bool]) -> Result<TxVector> {
        let expected = self.bits_per_channel_use();
        if bits.len() != expected {
            return Err(Error::BitLength {
                expected,
                got: bits.len(),
            });
        }
        let led_bits = self.n_t.trailing_zeros() as usize;
        let led = bits_to_usize(&bits[..led_bits]);
        let mut pos = led_bits;
        let mut idx = [0usize; 3];
        for (i, &size) in self.split.iter().enumerate() {
            let w = size.trailing_zeros() as usize;
            idx[i] = gray_decode(bits_to_usize(&bits[pos..pos + w]));
            pos += w;
        }
        let [_, m2, m3] = self.split;
        self.tx_vector(led, idx[0] * m2 * m3 + idx[1] * m3 + idx[2])
    }

    /// Inverse of [`ApqScheme::map_bits`].
    pub fn demap(&self, led: usize, m: usize) -> Result<Vec<bool>> {
        if led >= self.n_t {
            return Err(Error::IndexOutOfRange {
                what: "LED index",
                index: led,
                limit: self.n_t,
            });
        }
        let idx = self.part_indices(m)?;
        let mut bits = usize_to_bits(led, self.n_t.trailing_zeros() as usize);
        for (i, &size) in self.split.iter().enumerate() {
            bits.extend(usize_to_bits(gray_encode(idx[i]), size.trailing_zeros() as usize));
        }
        Ok(bits)
    }

    /// All `N_t * M` transmit vectors, LED-major.
    pub fn codebook(&self) -> Codebook {
        let amps = self.amplitudes();
        let mut vectors = Vec::with_capacity(self.n_t * amps.len());
        for led in 0..self.n_t {
            for &a in &amps {
                let mut v = vec![0.0; self.n_t];
                v[led] = a;
                vectors.push(v);
            }
        }
        Codebook::new(self.n_t, self.n_t, vectors).expect("APQ codewords are well formed")
    }
}
