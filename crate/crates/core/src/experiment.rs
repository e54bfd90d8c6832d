//! Experiment runners behind the `channel`, `sweep`, `optimize` and `compare`
//! commands, plus the data-level functions they are built on.
//!
//! Every runner writes UTF-8 CSV files, optional SVG plots and a
//! `metadata.json` describing the run into the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::apq::PowerVector;
use crate::bounds::{BoundReport, DeltaTensor, PairDistances};
use crate::codebook::Codebook;
use crate::config::{ExperimentConfig, PowerMode, PowerName, SchemeConfig, SnrPower, Variant};
use crate::detection::DetectorKind;
use crate::error::{Error, Result};
use crate::geometry::{build_channel_matrix, ChannelMatrix, SystemParams};
use crate::optimizer::{fmt_f64, objective_b, random_power, scp_optimize, ScpResult, Termination};
use crate::plot::{LinePlot, Series};
use crate::sim::{batch_rng, salt_from_label, sigma_from_snr_db, with_workers, SerCurve, Simulator, Workers};

/// Where and how a runner executes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
    pub out_dir: PathBuf,
}

/// What a runner produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Curve and SNR of every point that hit `max_trials` short of
    /// `min_errors`.
    pub unreliable: Vec<String>,
    pub notes: Vec<String>,
}

/// Channel matrix of one variant.
pub fn channel(cfg: &ExperimentConfig, v: &Variant) -> Result<(SystemParams, ChannelMatrix)> {
    let (params, geometry) = cfg.setup(v)?;
    let h = build_channel_matrix(&geometry, &params)?;
    Ok((params, h))
}

/// Power split actually used at one SNR point, with the SCP run that
/// produced it when there was one.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerChoice {
    pub power: PowerVector,
    pub scp: Option<ScpResult>,
}

/// Resolves an APQ scheme's power mode against one channel.
pub struct PowerPlan<'a> {
    cfg: &'a ExperimentConfig,
    scheme: &'a SchemeConfig,
    h: &'a ChannelMatrix,
    params: SystemParams,
    tensor: Option<DeltaTensor>,
    frozen: Option<PowerChoice>,
}

impl<'a> PowerPlan<'a> {
    pub fn new(cfg: &'a ExperimentConfig, scheme: &'a SchemeConfig, h: &'a ChannelMatrix, params: SystemParams) -> Self {
        Self {
            cfg,
            scheme,
            h,
            params,
            tensor: None,
            frozen: None,
        }
    }

    fn fixed(&self) -> Result<PowerVector> {
        match self.scheme {
            SchemeConfig::ApqSm { fixed_weights, .. } => PowerVector::from_weights(*fixed_weights, self.params.p_opt_w),
            _ => Err(Error::Config(format!("{} has no power split", self.scheme.label()))),
        }
    }

    /// Fresh seeded draw for `snr_db`, identical across commands.
    pub fn random(&self, snr_db: f64) -> PowerVector {
        let salt = salt_from_label(&format!("random-power/{}", self.scheme.label()));
        random_power(&mut batch_rng(self.cfg.seed, salt, snr_db.to_bits(), 0), self.params.p_opt_w)
    }

    pub fn fixed_power(&self) -> Result<PowerVector> {
        self.fixed()
    }

    fn tensor(&mut self) -> Result<&DeltaTensor> {
        if self.tensor.is_none() {
            let SchemeConfig::ApqSm { n_t, split, .. } = self.scheme else {
                return Err(Error::Config("only APQ-SM has a power split to optimize".into()));
            };
            let scheme = crate::apq::ApqScheme::new(*n_t, *split, self.fixed()?)?;
            self.tensor = Some(DeltaTensor::new(&scheme, self.h)?);
        }
        Ok(self.tensor.as_ref().expect("just built"))
    }

    /// Joint bound of an arbitrary split at `snr_db`.
    pub fn bound(&mut self, p: &PowerVector, snr_db: f64) -> Result<f64> {
        let gamma = self.params.conv_factor_a_per_w;
        let sigma = sigma_from_snr_db(snr_db, gamma, self.params.p_opt_w);
        Ok(objective_b(&p.as_array(), self.tensor()?, gamma, sigma))
    }

    fn optimize_at(&mut self, snr_db: f64) -> Result<PowerChoice> {
        let gamma = self.params.conv_factor_a_per_w;
        let sigma = sigma_from_snr_db(snr_db, gamma, self.params.p_opt_w);
        let p0 = self.fixed()?;
        let scp = self.cfg.scp.scp_config();
        let res = scp_optimize(self.tensor()?, gamma, sigma, &scp, &p0)?;
        Ok(PowerChoice {
            power: res.p,
            scp: Some(res),
        })
    }

    pub fn choose(&mut self, snr_db: f64) -> Result<PowerChoice> {
        let SchemeConfig::ApqSm { power, .. } = self.scheme else {
            return Err(Error::Config(format!("{} has no power split", self.scheme.label())));
        };
        let p_opt = self.params.p_opt_w;
        let plain = |power| Ok(PowerChoice { power, scp: None });
        match power {
            PowerMode::Named(PowerName::Fixed) => plain(self.fixed()?),
            PowerMode::Named(PowerName::Random) => plain(self.random(snr_db)),
            PowerMode::Explicit(p) => plain(PowerVector::from_weights(*p, p_opt)?),
            PowerMode::PerSnr { per_snr } => {
                let hit = per_snr
                    .iter()
                    .find(|sp| (sp.snr_db - snr_db).abs() <= 1e-9)
                    .ok_or_else(|| Error::Config(format!("per_snr power list has no entry for {snr_db} dB")))?;
                plain(PowerVector::from_weights(hit.p, p_opt)?)
            }
            PowerMode::Named(PowerName::Optimize) => match self.cfg.scp.freeze_at_snr_db {
                Some(at) => {
                    if self.frozen.is_none() {
                        self.frozen = Some(self.optimize_at(at)?);
                    }
                    Ok(self.frozen.clone().expect("just set"))
                }
                None => self.optimize_at(snr_db),
            },
        }
    }

    /// Codebook at `snr_db`, with the power choice for APQ schemes.
    pub fn codebook(&mut self, snr_db: f64) -> Result<(Codebook, Option<PowerChoice>)> {
        if self.scheme.is_apq() {
            let c = self.choose(snr_db)?;
            Ok((self.scheme.codebook(self.params.p_opt_w, Some(&c.power))?, Some(c)))
        } else {
            Ok((self.scheme.codebook(self.params.p_opt_w, None)?, None))
        }
    }
}

/// Simulated curve of one scheme, setup and detector with its bound sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub scheme: String,
    pub eta: usize,
    pub variant: String,
    pub d_tx_m: Option<f64>,
    pub semi_angle_deg: f64,
    pub detector: DetectorKind,
    /// Empty when the config asks for bounds only.
    pub curve: SerCurve,
    pub bounds: Vec<BoundReport>,
    /// Power split per SNR point, APQ only.
    pub powers: Vec<Option<[f64; 3]>>,
}

fn sorted_snrs(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    if cfg.sweep.snr_db.is_empty() {
        return Err(Error::Config("sweep.snr_db is empty".into()));
    }
    let mut v = cfg.sweep.snr_db.clone();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Runs every scheme and variant through the simulator (and the bound
/// evaluators when enabled).
pub fn simulate(cfg: &ExperimentConfig, workers: Workers) -> Result<Vec<CurveRecord>> {
    let snrs = sorted_snrs(cfg)?;
    with_workers(workers, || simulate_inner(cfg, &snrs, workers))?
}

fn simulate_inner(cfg: &ExperimentConfig, snrs: &[f64], workers: Workers) -> Result<Vec<CurveRecord>> {
    let stop = cfg.sweep.stop_rule();
    let mut out = Vec::new();
    for v in cfg.variants() {
        let (params, h) = channel(cfg, &v)?;
        let gamma = params.conv_factor_a_per_w;
        for scheme in &cfg.schemes {
            let label = scheme.label();
            let eta = scheme.spectral_efficiency()?;
            let mut plan = PowerPlan::new(cfg, scheme, &h, params);
            let mut recs: Vec<CurveRecord> = cfg
                .detectors
                .iter()
                .map(|&d| CurveRecord {
                    scheme: label.clone(),
                    eta,
                    variant: v.tag.clone(),
                    d_tx_m: v.d_tx_m.or(cfg.geometry.d_tx()),
                    semi_angle_deg: v.semi_angle_deg,
                    detector: d,
                    curve: SerCurve {
                        label: format!("{label} {}", d.label()),
                        points: Vec::new(),
                    },
                    bounds: Vec::new(),
                    powers: Vec::new(),
                })
                .collect();
            for &snr in snrs {
                let sigma = sigma_from_snr_db(snr, gamma, params.p_opt_w);
                let (cb, choice) = plan.codebook(snr)?;
                let report = if cfg.sweep.bounds || cfg.sweep.bounds_only {
                    let t = PairDistances::new(&h, &cb, gamma)?.report(sigma)?;
                    Some(BoundReport::new(snr, t))
                } else {
                    None
                };
                let points = if cfg.sweep.bounds_only {
                    None
                } else {
                    let sim = Simulator::new(&h, &cb, gamma, cfg.seed, salt_from_label(&label))?;
                    Some(sim.run_point(&cfg.detectors, snr, sigma, &stop, workers)?)
                };
                for (i, rec) in recs.iter_mut().enumerate() {
                    rec.powers.push(choice.as_ref().map(|c| c.power.as_array()));
                    if let Some(r) = report {
                        rec.bounds.push(r);
                    }
                    if let Some(pts) = &points {
                        let mut p = pts[i];
                        p.bound = report.map(|r| match rec.detector {
                            DetectorKind::Joint => r.joint_bound,
                            DetectorKind::TwoStep => r.two_step_bound,
                        });
                        rec.curve.points.push(p);
                    }
                }
            }
            out.extend(recs);
        }
    }
    Ok(out)
}

/// Per-SNR outcome of the `optimize` command for one scheme and setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationRecord {
    pub scheme: String,
    pub variant: String,
    pub mode: String,
    pub snr_db: f64,
    pub p: [f64; 3],
    pub bound: f64,
    pub fixed_p: [f64; 3],
    pub fixed_bound: f64,
    pub random_p: [f64; 3],
    pub random_bound: f64,
    #[serde(skip)]
    pub scp: Option<ScpResult>,
}

impl AllocationRecord {
    pub fn iterations(&self) -> Option<usize> {
        self.scp.as_ref().map(|s| s.trace.iterations())
    }

    /// First iteration whose objective is within 1 % of the final value.
    pub fn convergence_iteration(&self) -> Option<usize> {
        self.scp.as_ref().map(|s| s.trace.convergence_iteration(0.01))
    }
}

/// Power allocation comparison for every APQ scheme and variant.
pub fn optimize(cfg: &ExperimentConfig) -> Result<Vec<AllocationRecord>> {
    let snrs = sorted_snrs(cfg)?;
    if !cfg.schemes.iter().any(SchemeConfig::is_apq) {
        return Err(Error::Config("optimize needs at least one apq-sm scheme".into()));
    }
    let mut out = Vec::new();
    for v in cfg.variants() {
        let (params, h) = channel(cfg, &v)?;
        for scheme in cfg.schemes.iter().filter(|s| s.is_apq()) {
            let SchemeConfig::ApqSm { power, .. } = scheme else { unreachable!() };
            let mode = match power {
                PowerMode::Named(PowerName::Fixed) => "fixed",
                PowerMode::Named(PowerName::Optimize) => "optimize",
                PowerMode::Named(PowerName::Random) => "random",
                PowerMode::Explicit(_) => "explicit",
                PowerMode::PerSnr { .. } => "per-snr",
            };
            let mut plan = PowerPlan::new(cfg, scheme, &h, params);
            let fixed = plan.fixed_power()?;
            for &snr in &snrs {
                let choice = plan.choose(snr)?;
                let random = plan.random(snr);
                out.push(AllocationRecord {
                    scheme: scheme.label(),
                    variant: v.tag.clone(),
                    mode: mode.to_string(),
                    snr_db: snr,
                    p: choice.power.as_array(),
                    bound: plan.bound(&choice.power, snr)?,
                    fixed_p: fixed.as_array(),
                    fixed_bound: plan.bound(&fixed, snr)?,
                    random_p: random.as_array(),
                    random_bound: plan.bound(&random, snr)?,
                    scp: choice.scp,
                });
            }
        }
    }
    Ok(out)
}

/// Copy of `cfg` with every APQ scheme's power replaced by the splits found
/// in `records`.
pub fn config_with_powers(cfg: &ExperimentConfig, records: &[AllocationRecord]) -> ExperimentConfig {
    let mut out = cfg.clone();
    let first_variant = cfg.variants().first().map(|v| v.tag.clone()).unwrap_or_default();
    for scheme in out.schemes.iter_mut() {
        let label = scheme.label();
        if let SchemeConfig::ApqSm { power, .. } = scheme {
            let rows: Vec<&AllocationRecord> = records
                .iter()
                .filter(|r| r.scheme == label && r.variant == first_variant)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let distinct = rows.iter().any(|r| r.p != rows[0].p);
            *power = if distinct {
                PowerMode::PerSnr {
                    per_snr: rows.iter().map(|r| SnrPower { snr_db: r.snr_db, p: r.p }).collect(),
                }
            } else {
                PowerMode::Explicit(rows[0].p)
            };
        }
    }
    out
}

struct Writer {
    dir: PathBuf,
    report: RunReport,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            report: RunReport::default(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.report.files.push(path);
        Ok(())
    }

    fn finish(mut self, command: &str, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
        let files: Vec<String> = self
            .report
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let meta = json!({
            "command": command,
            "name": cfg.name,
            "seed": cfg.seed,
            "workers": opts.workers,
            "version": env!("CARGO_PKG_VERSION"),
            "trust_region_norm": "infinity",
            "scp_start_and_fixed_split": "fixed_weights of each apq-sm scheme",
            "random_split": "uniform on the simplex, sorted descending, one seeded draw per SNR point",
            "files": files,
            "unreliable_points": self.report.unreliable,
            "notes": self.report.notes,
        });
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
        self.write("metadata.json", &text)?;
        Ok(self.report)
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the channel matrix of every variant.
pub fn run_channel(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let mut w = Writer::new(&opts.out_dir)?;
    for v in cfg.variants() {
        let (_, h) = channel(cfg, &v)?;
        w.write(&format!("channel_{}.csv", v.tag), &h.to_csv())?;
    }
    w.finish("channel", cfg, opts)
}

fn bounds_csv(bounds: &[BoundReport]) -> Result<String> {
    let rows: Vec<Vec<String>> = bounds
        .iter()
        .map(|b| {
            vec![
                b.snr_db.to_string(),
                fmt_f64(b.joint_bound),
                fmt_f64(b.index_bound),
                fmt_f64(b.cond_symbol_bound),
                fmt_f64(b.two_step_bound),
            ]
        })
        .collect();
    csv_string(&["snr_db", "joint_bound", "index_bound", "cond_symbol_bound", "two_step_bound"], &rows)
}

fn write_curves(w: &mut Writer, cfg: &ExperimentConfig, recs: &[CurveRecord]) -> Result<()> {
    let mut bounds_done = std::collections::BTreeSet::new();
    for r in recs {
        if (cfg.sweep.bounds || cfg.sweep.bounds_only) && bounds_done.insert((r.scheme.clone(), r.variant.clone())) {
            w.write(&format!("bounds_{}_{}.csv", r.scheme, r.variant), &bounds_csv(&r.bounds)?)?;
        }
        if cfg.sweep.bounds_only {
            continue;
        }
        w.write(
            &format!("sweep_{}_{}_{}.csv", r.scheme, r.variant, r.detector.label()),
            &r.curve.to_csv()?,
        )?;
        for p in r.curve.points.iter().filter(|p| !p.reliable) {
            w.report.unreliable.push(format!("{} {} at {} dB", r.curve.label, r.variant, p.snr_db));
        }
    }
    if cfg.output.svg {
        let mut by_variant: BTreeMap<&str, Vec<&CurveRecord>> = BTreeMap::new();
        for r in recs {
            by_variant.entry(&r.variant).or_default().push(r);
        }
        for (tag, rs) in by_variant {
            let mut plot = LinePlot::new(format!("{} {tag}", cfg.name), "transmit SNR (dB)", "SER", true);
            for r in &rs {
                if !cfg.sweep.bounds_only {
                    plot.push(Series::new(
                        r.curve.label.clone(),
                        r.curve.points.iter().map(|p| (p.snr_db, p.ser)).collect(),
                    ));
                }
                if cfg.sweep.bounds || cfg.sweep.bounds_only {
                    let pts = r
                        .bounds
                        .iter()
                        .map(|b| {
                            let v = match r.detector {
                                DetectorKind::Joint => b.joint_bound,
                                DetectorKind::TwoStep => b.two_step_bound,
                            };
                            (b.snr_db, v.min(1.0))
                        })
                        .collect();
                    plot.push(Series::new(format!("{} bound", r.curve.label), pts).dashed());
                }
            }
            w.write(&format!("sweep_{tag}.svg"), &plot.to_svg())?;
        }
    }
    Ok(())
}

/// Simulated SER curves with their bounds.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let recs = simulate(cfg, Workers(opts.workers))?;
    let mut w = Writer::new(&opts.out_dir)?;
    write_curves(&mut w, cfg, &recs)?;
    w.finish("sweep", cfg, opts)
}

/// Like [`run_sweep`], plus one combined CSV across schemes that must share
/// the same spectral efficiency.
pub fn run_compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let etas: Vec<usize> = cfg.schemes.iter().map(|s| s.spectral_efficiency()).collect::<Result<_>>()?;
    if etas.iter().any(|&e| e != etas[0]) {
        let list: Vec<String> = cfg
            .schemes
            .iter()
            .zip(&etas)
            .map(|(s, e)| format!("{} = {e} bpcu", s.label()))
            .collect();
        return Err(Error::Config(format!(
            "compared schemes must share a spectral efficiency: {}",
            list.join(", ")
        )));
    }
    let recs = simulate(cfg, Workers(opts.workers))?;
    let mut w = Writer::new(&opts.out_dir)?;
    write_curves(&mut w, cfg, &recs)?;

    let mut rows = Vec::new();
    for r in &recs {
        if cfg.sweep.bounds_only {
            for b in &r.bounds {
                rows.push(vec![
                    r.scheme.clone(),
                    r.eta.to_string(),
                    opt_num(r.d_tx_m),
                    r.semi_angle_deg.to_string(),
                    r.detector.label().to_string(),
                    b.snr_db.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    fmt_f64(match r.detector {
                        DetectorKind::Joint => b.joint_bound,
                        DetectorKind::TwoStep => b.two_step_bound,
                    }),
                    String::new(),
                ]);
            }
            continue;
        }
        for p in &r.curve.points {
            rows.push(vec![
                r.scheme.clone(),
                r.eta.to_string(),
                opt_num(r.d_tx_m),
                r.semi_angle_deg.to_string(),
                r.detector.label().to_string(),
                p.snr_db.to_string(),
                p.trials.to_string(),
                p.errors.to_string(),
                format!("{:.10e}", p.ser),
                format!("{:.10e}", p.ci_lo),
                format!("{:.10e}", p.ci_hi),
                p.bound.map(fmt_f64).unwrap_or_default(),
                p.reliable.to_string(),
            ]);
        }
    }
    let header = [
        "scheme", "eta", "d_tx_m", "semi_angle_deg", "detector", "snr_db", "trials", "errors", "ser", "ci_lo",
        "ci_hi", "bound", "reliable",
    ];
    w.write("compare.csv", &csv_string(&header, &rows)?)?;

    if cfg.output.svg && cfg.vary.semi_angle_deg.len() > 1 && !cfg.sweep.bounds_only {
        let mut plot = LinePlot::new(format!("{} SER vs semi-angle", cfg.name), "semi-angle (deg)", "SER", true);
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for r in recs.iter().filter(|r| r.detector == cfg.detectors[0]) {
            for p in &r.curve.points {
                let key = format!("{} {} dB{}", r.scheme, p.snr_db, r.d_tx_m.map(|d| format!(" d={d}")).unwrap_or_default());
                series.entry(key).or_default().push((r.semi_angle_deg, p.ser));
            }
        }
        for (name, mut pts) in series {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            plot.push(Series::new(name, pts));
        }
        w.write("compare_semi_angle.svg", &plot.to_svg())?;
    }
    w.finish("compare", cfg, opts)
}

/// SCP traces, the fixed / random / optimized comparison and a config
/// carrying the chosen splits.
pub fn run_optimize(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let recs = with_workers(Workers(opts.workers), || optimize(cfg))??;
    let mut w = Writer::new(&opts.out_dir)?;
    let mut groups: BTreeMap<(String, String), Vec<&AllocationRecord>> = BTreeMap::new();
    for r in &recs {
        groups.entry((r.scheme.clone(), r.variant.clone())).or_default().push(r);
    }
    for ((scheme, tag), rs) in &groups {
        let mut rows = Vec::new();
        for r in rs {
            rows.push(vec![
                r.snr_db.to_string(),
                r.mode.clone(),
                fmt_f64(r.p[0]),
                fmt_f64(r.p[1]),
                fmt_f64(r.p[2]),
                fmt_f64(r.bound),
                fmt_f64(r.fixed_bound),
                fmt_f64(r.random_bound),
                fmt_f64(r.random_p[0]),
                fmt_f64(r.random_p[1]),
                fmt_f64(r.random_p[2]),
                r.iterations().map(|i| i.to_string()).unwrap_or_default(),
                r.convergence_iteration().map(|i| i.to_string()).unwrap_or_default(),
                r.scp
                    .as_ref()
                    .map(|s| match s.termination {
                        Termination::Converged => "converged",
                        Termination::IterationLimit => "iteration-limit",
                    })
                    .unwrap_or_default()
                    .to_string(),
            ]);
            if let Some(scp) = &r.scp {
                if cfg.scp.freeze_at_snr_db.is_none() || r.snr_db == rs[0].snr_db {
                    let at = cfg.scp.freeze_at_snr_db.unwrap_or(r.snr_db);
                    w.write(&format!("scp_trace_{scheme}_{tag}_snr{at}.csv"), &scp.trace.to_csv()?)?;
                }
            }
        }
        let header = [
            "snr_db",
            "mode",
            "p1",
            "p2",
            "p3",
            "bound",
            "fixed_bound",
            "random_bound",
            "random_p1",
            "random_p2",
            "random_p3",
            "iterations",
            "convergence_iteration",
            "termination",
        ];
        w.write(&format!("allocation_{scheme}_{tag}.csv"), &csv_string(&header, &rows)?)?;

        if cfg.output.svg {
            let mut plot = LinePlot::new(format!("{} {scheme} {tag}", cfg.name), "transmit SNR (dB)", "joint bound", true);
            plot.push(Series::new(
                "random",
                rs.iter().map(|r| (r.snr_db, r.random_bound.min(1.0))).collect(),
            ));
            plot.push(Series::new("fixed", rs.iter().map(|r| (r.snr_db, r.fixed_bound.min(1.0))).collect()));
            plot.push(Series::new(
                format!("chosen ({})", rs[0].mode),
                rs.iter().map(|r| (r.snr_db, r.bound.min(1.0))).collect(),
            ));
            w.write(&format!("allocation_{scheme}_{tag}.svg"), &plot.to_svg())?;

            let traced: Vec<&&AllocationRecord> = rs.iter().filter(|r| r.scp.is_some()).collect();
            if !traced.is_empty() && cfg.scp.freeze_at_snr_db.is_none() {
                let mut conv = LinePlot::new(format!("{} SCP convergence", cfg.name), "iteration", "f_a", true);
                for r in traced {
                    let s = r.scp.as_ref().expect("filtered");
                    conv.push(Series::new(
                        format!("{} dB", r.snr_db),
                        s.trace.steps.iter().map(|st| (st.l as f64, st.f_a)).collect(),
                    ));
                }
                w.write(&format!("convergence_{scheme}_{tag}.svg"), &conv.to_svg())?;
            }
        }
    }
    let updated = config_with_powers(cfg, &recs);
    w.write("optimized_config.json", &updated.to_json())?;
    if cfg.variants().len() > 1 {
        w.report
            .notes
            .push("optimized_config.json carries the splits of the first setup only".into());
    }
    w.finish("optimize", cfg, opts)
}
