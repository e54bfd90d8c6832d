//! Seeded Monte Carlo symbol error rate estimation.
//!
//! Trials are grouped into fixed-size batches. Batch `b` of a point draws from
//! its own ChaCha8 stream keyed by `(master_seed, salt, snr, b)`, and batches
//! are folded in index order until the stopping rule fires, so counts do not
//! depend on how many worker threads evaluated the batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::detection::{Detector, DetectorKind};
use crate::error::{Error, Result};
use crate::geometry::ChannelMatrix;

/// `sigma = gamma * P_opt / sqrt(10^(snr_db / 10))`; `+inf` dB gives 0.
pub fn sigma_from_snr_db(snr_db: f64, gamma: f64, p_opt: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        gamma * p_opt / 10f64.powf(snr_db / 20.0)
    }
}

/// Per-point stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_trials: u64,
    pub batch_size: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_trials: 10_000_000,
            batch_size: 4096,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_errors == 0 || self.max_trials == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "min_errors, max_trials and batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Wilson score interval for a binomial proportion, `z = 1.96`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Raw counts of one detector at one noise level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub trials: u64,
    /// Wrong spatial index, wrong symbol, or both.
    pub errors: u64,
    pub index_errors: u64,
    /// Wrong symbol with the spatial index right.
    pub symbol_errors_given_index: u64,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.trials += o.trials;
        self.errors += o.errors;
        self.index_errors += o.index_errors;
        self.symbol_errors_given_index += o.symbol_errors_given_index;
    }

    pub fn ser(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }
}

/// One row of an SER curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// False when `max_trials` ran out before `min_errors` were seen.
    pub reliable: bool,
    pub bound: Option<f64>,
    #[serde(skip)]
    pub counts: Counts,
}

impl SerPoint {
    pub fn from_counts(snr_db: f64, counts: Counts, reliable: bool) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(counts.errors, counts.trials);
        Self {
            snr_db,
            trials: counts.trials,
            errors: counts.errors,
            ser: counts.ser(),
            ci_lo,
            ci_hi,
            reliable,
            bound: None,
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerCurve {
    pub label: String,
    pub points: Vec<SerPoint>,
}

impl SerCurve {
    pub fn unreliable_points(&self) -> usize {
        self.points.iter().filter(|p| !p.reliable).count()
    }

    /// CSV with columns `snr_db,trials,errors,ser,ci_lo,ci_hi` plus `bound`
    /// when any point carries one.
    pub fn to_csv(&self) -> Result<String> {
        let with_bound = self.points.iter().any(|p| p.bound.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["snr_db", "trials", "errors", "ser", "ci_lo", "ci_hi"];
        if with_bound {
            header.push("bound");
        }
        w.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![
                p.snr_db.to_string(),
                p.trials.to_string(),
                p.errors.to_string(),
                format!("{:.10e}", p.ser),
                format!("{:.10e}", p.ci_lo),
                format!("{:.10e}", p.ci_hi),
            ];
            if with_bound {
                row.push(p.bound.map(|b| format!("{b:.10e}")).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
    }
}

/// Execution settings that do not affect results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(pub usize);

impl Default for Workers {
    fn default() -> Self {
        Self(1)
    }
}

/// Monte Carlo engine for one channel and codebook, shared by every detector
/// it is asked to run so that all of them see identical noise.
#[derive(Debug, Clone)]
pub struct Simulator {
    detector: Detector,
    n_r: usize,
    master_seed: u64,
    salt: u64,
}

impl Simulator {
    pub fn new(h: &ChannelMatrix, codebook: &Codebook, gamma: f64, master_seed: u64, salt: u64) -> Result<Self> {
        Ok(Self {
            detector: Detector::new(h, codebook, gamma)?,
            n_r: h.n_r(),
            master_seed,
            salt,
        })
    }

    pub fn detector(&self) -> &Detector {
        &self.detector
    }

    fn batch_rng(&self, snr_db: f64, batch: u64) -> ChaCha8Rng {
        batch_rng(self.master_seed, self.salt, snr_db.to_bits(), batch)
    }

    /// Runs `trials` trials of batch `batch` for every detector kind.
    fn run_batch(&self, kinds: &[DetectorKind], sigma: f64, snr_db: f64, batch: u64, trials: u64) -> Vec<Counts> {
        let mut rng = self.batch_rng(snr_db, batch);
        let n = self.detector.len();
        let mut counts = vec![Counts::default(); kinds.len()];
        let mut y = vec![0.0; self.n_r];
        for _ in 0..trials {
            let k = rng.random_range(0..n);
            for (v, p) in y.iter_mut().zip(self.detector.point(k)) {
                let z: f64 = rng.sample(StandardNormal);
                *v = p + sigma * z;
            }
            let (g, _) = self.labels(k);
            for (c, &kind) in counts.iter_mut().zip(kinds) {
                let d = self.detector.detect(kind, &y);
                c.trials += 1;
                if d.index != k {
                    c.errors += 1;
                    if d.group != g {
                        c.index_errors += 1;
                    } else {
                        c.symbol_errors_given_index += 1;
                    }
                }
            }
        }
        counts
    }

    fn labels(&self, k: usize) -> (usize, usize) {
        let per = self.detector.symbols_per_group();
        (k / per, k % per)
    }

    /// Noiseless pass over every codeword.
    fn run_noiseless(&self, kinds: &[DetectorKind]) -> Vec<Counts> {
        let mut counts = vec![Counts::default(); kinds.len()];
        for k in 0..self.detector.len() {
            let y = self.detector.point(k).to_vec();
            for (c, &kind) in counts.iter_mut().zip(kinds) {
                let d = self.detector.detect(kind, &y);
                c.trials += 1;
                if d.index != k {
                    c.errors += 1;
                    if d.group != self.labels(k).0 {
                        c.index_errors += 1;
                    } else {
                        c.symbol_errors_given_index += 1;
                    }
                }
            }
        }
        counts
    }

    /// Simulates one SNR point for several detectors on common noise.
    ///
    /// Batches are consumed until every detector has `min_errors` errors or
    /// `max_trials` is reached. `sigma = 0` enumerates the codebook once.
    pub fn run_point(
        &self,
        kinds: &[DetectorKind],
        snr_db: f64,
        sigma: f64,
        stop: &StopRule,
        workers: Workers,
    ) -> Result<Vec<SerPoint>> {
        stop.validate()?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Domain {
                what: "sigma",
                value: sigma,
                domain: "finite and nonnegative",
            });
        }
        if sigma == 0.0 {
            let counts = self.run_noiseless(kinds);
            return Ok(counts.into_iter().map(|c| SerPoint::from_counts(snr_db, c, true)).collect());
        }
        let mut total = vec![Counts::default(); kinds.len()];
        let mut batch = 0u64;
        let wave = workers.0.max(1) as u64;
        let done = |t: &[Counts]| {
            t[0].trials >= stop.max_trials || t.iter().all(|c| c.errors >= stop.min_errors)
        };
        while !done(&total) {
            let start_trials = total[0].trials;
            let mut jobs = Vec::new();
            let mut planned = start_trials;
            for b in batch..batch + wave {
                if planned >= stop.max_trials {
                    break;
                }
                let n = stop.batch_size.min(stop.max_trials - planned);
                planned += n;
                jobs.push((b, n));
            }
            let results = self.evaluate(kinds, sigma, snr_db, &jobs, workers);
            for r in results {
                batch += 1;
                for (t, c) in total.iter_mut().zip(&r) {
                    t.add(c);
                }
                if done(&total) {
                    break;
                }
            }
        }
        let reliable = total.iter().all(|c| c.errors >= stop.min_errors);
        Ok(total
            .into_iter()
            .map(|c| SerPoint::from_counts(snr_db, c, reliable || c.errors >= stop.min_errors))
            .collect())
    }

    #[cfg(feature = "parallel")]
    fn evaluate(&self, kinds: &[DetectorKind], sigma: f64, snr_db: f64, jobs: &[(u64, u64)], workers: Workers) -> Vec<Vec<Counts>> {
        use rayon::prelude::*;
        if workers.0 > 1 && jobs.len() > 1 {
            jobs.par_iter()
                .map(|&(b, n)| self.run_batch(kinds, sigma, snr_db, b, n))
                .collect()
        } else {
            jobs.iter().map(|&(b, n)| self.run_batch(kinds, sigma, snr_db, b, n)).collect()
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn evaluate(&self, kinds: &[DetectorKind], sigma: f64, snr_db: f64, jobs: &[(u64, u64)], _workers: Workers) -> Vec<Vec<Counts>> {
        jobs.iter().map(|&(b, n)| self.run_batch(kinds, sigma, snr_db, b, n)).collect()
    }

    /// One curve per detector kind, points in ascending SNR order.
    pub fn run_sweep(
        &self,
        kinds: &[DetectorKind],
        snr_db_list: &[f64],
        gamma: f64,
        p_opt: f64,
        stop: &StopRule,
        workers: Workers,
    ) -> Result<Vec<SerCurve>> {
        if snr_db_list.is_empty() {
            return Err(Error::Config("empty SNR list".into()));
        }
        if kinds.is_empty() {
            return Err(Error::Config("no detector requested".into()));
        }
        let mut snrs = snr_db_list.to_vec();
        snrs.sort_by(f64::total_cmp);
        let mut curves: Vec<SerCurve> = kinds
            .iter()
            .map(|k| SerCurve {
                label: k.label().to_string(),
                points: Vec::with_capacity(snrs.len()),
            })
            .collect();
        for &snr in &snrs {
            let sigma = sigma_from_snr_db(snr, gamma, p_opt);
            for (c, p) in curves.iter_mut().zip(self.run_point(kinds, snr, sigma, stop, workers)?) {
                c.points.push(p);
            }
        }
        Ok(curves)
    }
}

/// Independent ChaCha8 stream for `(master_seed, salt, key, index)`.
pub fn batch_rng(master_seed: u64, salt: u64, key: u64, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&salt.to_le_bytes());
    seed[16..24].copy_from_slice(&key.to_le_bytes());
    seed[24..].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Stable 64-bit FNV-1a hash used to derive stream salts from labels.
pub fn salt_from_label(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3))
}

/// Runs `f` on a pool of `workers` threads when the parallel feature is on.
pub fn with_workers<T: Send>(workers: Workers, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        if workers.0 > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.0)
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            return Ok(pool.install(f));
        }
    }
    let _ = workers;
    Ok(f())
}
