//! SM-PAM and multiple-active SM reference schemes.

use crate::apq::pam_levels;
use crate::codebook::Codebook;
use crate::error::{Error, Result};

/// Single active LED carrying an `M`-PAM level scaled to mean `P_opt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmPamScheme {
    pub n_t: usize,
    pub m_pam: usize,
    pub levels: Vec<f64>,
}

impl SmPamScheme {
    pub fn new(n_t: usize, m_pam: usize, p_opt: f64) -> Result<Self> {
        check_pow2("N_t", n_t)?;
        check_pow2("PAM order", m_pam)?;
        let levels = pam_levels(m_pam)?.into_iter().map(|x| x * p_opt).collect();
        Ok(Self { n_t, m_pam, levels })
    }

    pub fn bits_per_channel_use(&self) -> usize {
        (self.n_t.trailing_zeros() + self.m_pam.trailing_zeros()) as usize
    }

    pub fn codebook(&self) -> Codebook {
        let mut vectors = Vec::with_capacity(self.n_t * self.m_pam);
        for led in 0..self.n_t {
            for &a in &self.levels {
                let mut v = vec![0.0; self.n_t];
                v[led] = a;
                vectors.push(v);
            }
        }
        Codebook::new(self.n_t, self.n_t, vectors).expect("SM-PAM codewords are well formed")
    }
}

pub fn build_sm_pam(n_t: usize, m_pam: usize, p_opt: f64) -> Result<Codebook> {
    Ok(SmPamScheme::new(n_t, m_pam, p_opt)?.codebook())
}

/// `N_a` of `N_t` LEDs active, each with its own `M`-PAM level.
///
/// Only the first `2^floor(log2 C(N_t, N_a))` LED combinations in
/// lexicographic order are used. Per-LED levels are scaled by `P_opt / N_a`
/// so the total emitted power averages to `P_opt`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaSmScheme {
    pub n_t: usize,
    pub n_a: usize,
    pub m_pam: usize,
    pub combinations: Vec<Vec<usize>>,
    pub levels: Vec<f64>,
}

impl MaSmScheme {
    pub fn new(n_t: usize, n_a: usize, m_pam: usize, p_opt: f64) -> Result<Self> {
        check_pow2("PAM order", m_pam)?;
        if n_a == 0 || n_a >= n_t {
            return Err(Error::InvalidOrder(format!(
                "need 0 < N_a < N_t, got N_a = {n_a}, N_t = {n_t}"
            )));
        }
        let all = combinations(n_t, n_a);
        let usable = 1usize << all.len().ilog2();
        let combinations = all.into_iter().take(usable).collect();
        let scale = p_opt / n_a as f64;
        let levels = pam_levels(m_pam)?.into_iter().map(|x| x * scale).collect();
        Ok(Self {
            n_t,
            n_a,
            m_pam,
            combinations,
            levels,
        })
    }

    pub fn spatial_bits(&self) -> usize {
        self.combinations.len().trailing_zeros() as usize
    }

    pub fn bits_per_channel_use(&self) -> usize {
        self.spatial_bits() + self.n_a * self.m_pam.trailing_zeros() as usize
    }

    pub fn codebook(&self) -> Codebook {
        let per_group = self.m_pam.pow(self.n_a as u32);
        let mut vectors = Vec::with_capacity(self.combinations.len() * per_group);
        for combo in &self.combinations {
            for s in 0..per_group {
                let mut v = vec![0.0; self.n_t];
                let mut rest = s;
                // first active LED takes the most significant digit
                for &led in combo.iter().rev() {
                    v[led] = self.levels[rest % self.m_pam];
                    rest /= self.m_pam;
                }
                vectors.push(v);
            }
        }
        Codebook::new(self.n_t, self.combinations.len(), vectors)
            .expect("MA-SM codewords are well formed")
    }
}

pub fn build_ma_sm(n_t: usize, n_a: usize, m_pam: usize, p_opt: f64) -> Result<Codebook> {
    Ok(MaSmScheme::new(n_t, n_a, m_pam, p_opt)?.codebook())
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_pow2(what: &str, v: usize) -> Result<()> {
    if v == 0 || !v.is_power_of_two() {
        return Err(Error::InvalidOrder(format!("{what} = {v} is not a power of two")));
    }
    Ok(())
}
