//! Acceptance checks. Prints one PASS/FAIL line per criterion followed by the
//! evidence behind it.
//!
//! Exits 0 regardless of the outcome so the rest of the workspace tests still
//! run; set `APQSM_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use apqsm::config::{ExperimentConfig, SchemeConfig};
use apqsm::experiment::{optimize, run_compare, run_optimize, run_sweep, simulate, CurveRecord, RunOptions};
use apqsm::geometry::Geometry;
use apqsm::optimizer::{gradient_a, objective_b, random_power, solve_subproblem};
use apqsm::{
    build_channel_matrix, preset, sigma_from_snr_db, ApqScheme, Codebook, DeltaTensor, Detector, DetectorKind,
    MaSmScheme, PairDistances, PowerVector, SerPoint, Simulator, SmPamScheme, StopRule, SystemParams, Workers,
    PRESETS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORKERS: Workers = Workers(1);

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "  ok  " } else { "  FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("  note {line}"));
    }
}

fn load(name: &str) -> ExperimentConfig {
    preset(name).unwrap_or_else(|| panic!("missing preset {name}"))
}

fn curve<'a>(recs: &'a [CurveRecord], scheme: &str, det: DetectorKind) -> &'a CurveRecord {
    recs.iter()
        .find(|r| r.scheme == scheme && r.detector == det)
        .unwrap_or_else(|| panic!("no curve {scheme} {}", det.label()))
}

// ---------------------------------------------------------------------------
// independent reference implementations

/// Gaussian tail from Craig's integral `(1/pi) int_0^{pi/2} exp(-x^2 / (2 sin^2 t)) dt`,
/// composite Simpson on 4000 panels.
fn q_ref(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_ref(-x);
    }
    let n = 4000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let f = |t: f64| {
        let s = t.sin();
        if s == 0.0 {
            0.0
        } else {
            (-x * x / (2.0 * s * s)).exp()
        }
    };
    let mut acc = f(0.0) + f(std::f64::consts::FRAC_PI_2);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    acc * h / 3.0 / std::f64::consts::PI
}

/// APQ-SM transmit vectors built from scratch, LED-major.
fn apq_vectors(n_t: usize, split: [usize; 3], p: [f64; 3]) -> Vec<Vec<f64>> {
    let levels = |m: usize| -> Vec<f64> { (1..=m).map(|k| 2.0 * k as f64 / (m as f64 + 1.0)).collect() };
    let (l1, l2, l3) = (levels(split[0]), levels(split[1]), levels(split[2]));
    let mut amps = Vec::new();
    for a in &l1 {
        for b in &l2 {
            for c in &l3 {
                amps.push(p[0] * a + p[1] * b + p[2] * c);
            }
        }
    }
    let mut out = Vec::new();
    for led in 0..n_t {
        for &a in &amps {
            let mut v = vec![0.0; n_t];
            v[led] = a;
            out.push(v);
        }
    }
    out
}

fn received(h: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    h.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

struct RefBounds {
    joint: f64,
    index: Vec<f64>,
    symbol: Vec<f64>,
    two_step: f64,
}

fn ref_bounds(points: &[Vec<f64>], groups: usize, sigma: f64) -> RefBounds {
    let n = points.len();
    let per = n / groups;
    let q = |d: f64| if d == 0.0 { 0.5 } else { q_ref(d / (2.0 * sigma)) };
    let mut joint = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                joint += q(dist(&points[a], &points[b]));
            }
        }
    }
    let mut index = Vec::new();
    let mut symbol = Vec::new();
    let mut two_step = 0.0;
    for g in 0..groups {
        let mut pl = 0.0;
        let mut px = 0.0;
        for s in 0..per {
            let a = g * per + s;
            let nearest = (0..n)
                .filter(|b| b / per != g)
                .map(|b| dist(&points[a], &points[b]))
                .fold(f64::INFINITY, f64::min);
            pl += q(nearest);
            for t in 0..per {
                if t != s {
                    px += q(dist(&points[a], &points[g * per + t]));
                }
            }
        }
        pl /= per as f64;
        px /= per as f64;
        two_step += pl + px - pl * px;
        index.push(pl);
        symbol.push(px);
    }
    RefBounds {
        joint: joint / n as f64,
        index,
        symbol,
        two_step: two_step / groups as f64,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// ---------------------------------------------------------------------------

/// Criteria 1-3 on the reference-setup sweep.
fn bound_sweep(recs: &[CurveRecord]) -> (Verdict, Verdict, Verdict) {
    let mut c1 = Verdict::new();
    let mut c2 = Verdict::new();
    let mut c3 = Verdict::new();
    let schemes: Vec<String> = {
        let mut v: Vec<String> = recs.iter().map(|r| r.scheme.clone()).collect();
        v.dedup();
        v
    };
    for scheme in &schemes {
        let joint = curve(recs, scheme, DetectorKind::Joint);
        let two = curve(recs, scheme, DetectorKind::TwoStep);
        for r in [joint, two] {
            let mut above_point = 0;
            let mut checked = 0;
            for p in r.curve.points.iter().filter(|p| p.ser <= 0.1) {
                let b = p.bound.expect("bounds enabled");
                checked += 1;
                if p.ser > b {
                    above_point += 1;
                }
                let ok = b >= p.ci_lo;
                if !ok || p.ser > b {
                    c1.check(
                        ok,
                        format!(
                            "{} {} @ {} dB: bound {:.4e}, SER {:.4e} [{:.4e}, {:.4e}], {} trials",
                            scheme,
                            r.detector.label(),
                            p.snr_db,
                            b,
                            p.ser,
                            p.ci_lo,
                            p.ci_hi,
                            p.trials
                        ),
                    );
                }
            }
            c1.note(format!(
                "{} {}: {checked} points with SER <= 0.1, point estimate above bound at {above_point}",
                scheme,
                r.detector.label()
            ));
        }

        match joint.curve.points.iter().find(|p| p.ser < 1e-3) {
            Some(p) if p.errors > 0 => {
                let ratio = p.bound.expect("bounds enabled") / p.ser;
                c2.check(
                    ratio <= 3.0,
                    format!(
                        "{scheme} @ {} dB: SER {:.4e} ({} errors), bound/SER = {ratio:.3}",
                        p.snr_db, p.ser, p.errors
                    ),
                );
            }
            Some(p) => c2.check(false, format!("{scheme} @ {} dB: no errors observed, ratio undefined", p.snr_db)),
            None => c2.check(false, format!("{scheme}: simulated SER never drops below 1e-3")),
        }

        for (j, t) in joint.curve.points.iter().zip(&two.curve.points) {
            let ok = t.ser >= j.ci_lo || t.ci_hi >= j.ser;
            if !ok || t.ser != j.ser {
                c3.check(
                    ok,
                    format!("{scheme} @ {} dB: two-step {:.4e}, joint {:.4e}", j.snr_db, t.ser, j.ser),
                );
            }
        }
        let same = joint.curve.points.iter().zip(&two.curve.points).all(|(j, t)| j.errors == t.errors);
        c3.note(format!(
            "{scheme}: {} points, two-step and joint error counts {}",
            joint.curve.points.len(),
            if same { "identical at every point" } else { "differ" }
        ));
    }

    // noiseless exhaustive enumeration
    let params = SystemParams::default();
    let h = build_channel_matrix(&Geometry::reference(0.2), &params).unwrap();
    let books: Vec<(&str, Codebook)> = vec![
        ("apq-sm 2-4-2", ApqScheme::new(4, [2, 4, 2], PowerVector::fixed(1.0)).unwrap().codebook()),
        (
            "apq-sm 4-4-4",
            ApqScheme::new(4, [4, 4, 4], PowerVector::from_weights([16.0, 4.0, 1.0], 1.0).unwrap())
                .unwrap()
                .codebook(),
        ),
        ("sm-pam-16", SmPamScheme::new(4, 16, 1.0).unwrap().codebook()),
        ("sm-pam-64", SmPamScheme::new(4, 64, 1.0).unwrap().codebook()),
        ("ma-sm-2x4", MaSmScheme::new(4, 2, 4, 1.0).unwrap().codebook()),
        ("ma-sm-2x8", MaSmScheme::new(4, 2, 8, 1.0).unwrap().codebook()),
    ];
    for (name, cb) in &books {
        let sim = Simulator::new(&h, cb, 1.0, 1, 0).unwrap();
        let pts = sim
            .run_point(&[DetectorKind::Joint, DetectorKind::TwoStep], f64::INFINITY, 0.0, &StopRule::default(), WORKERS)
            .unwrap();
        let ok = pts.iter().all(|p| p.errors == 0 && p.trials == cb.len() as u64);
        c3.check(
            ok,
            format!(
                "noiseless {name}: {} codewords, errors joint {} two-step {}",
                cb.len(),
                pts[0].errors,
                pts[1].errors
            ),
        );
    }
    (c1, c2, c3)
}

/// Criterion 4: analytic gradient against central differences.
fn gradient_check() -> Verdict {
    let mut v = Verdict::new();
    let params = SystemParams::default();
    let h = build_channel_matrix(&Geometry::reference(0.2), &params).unwrap();
    let scheme = ApqScheme::new(4, [2, 4, 2], PowerVector::fixed(1.0)).unwrap();
    let dt = DeltaTensor::new(&scheme, &h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut points = Vec::new();
    while points.len() < 100 {
        let p = random_power(&mut rng, 1.0).as_array();
        if p[0] - p[1] > 1e-3 && p[1] - p[2] > 1e-3 && p[2] > 1e-3 {
            points.push(p);
        }
    }
    for snr in [80.0, 90.0, 100.0] {
        let sigma = sigma_from_snr_db(snr, 1.0, 1.0);
        let mut worst: f64 = 0.0;
        for p in &points {
            let a = gradient_a(p, &dt, 1.0, sigma);
            let step = 1e-6;
            let mut fd = [0.0; 3];
            for i in 0..3 {
                let mut up = *p;
                let mut dn = *p;
                up[i] += step;
                dn[i] -= step;
                fd[i] = (objective_b(&up, &dt, 1.0, sigma) - objective_b(&dn, &dt, 1.0, sigma)) / (2.0 * step);
            }
            let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let err = a.iter().zip(&fd).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / norm;
            worst = worst.max(err);
        }
        v.check(worst <= 1e-5, format!("{snr} dB: worst relative error over 100 points {worst:.2e}"));
    }
    v
}

/// Criterion 5 on the optimizer presets.
fn scp_behavior() -> Verdict {
    let mut v = Verdict::new();
    for name in ["fig8", "fig9", "fig10"] {
        let cfg = load(name);
        let recs = optimize(&cfg).unwrap();
        for r in &recs {
            let scp = r.scp.as_ref().expect("optimize mode");
            let steps = &scp.trace.steps;
            let monotone = steps.windows(2).all(|w| w[1].f_a <= w[0].f_a);
            let its = scp.trace.iterations();
            let conv = scp.trace.convergence_iteration(0.01);
            v.check(
                monotone && its <= 100,
                format!(
                    "{name} {} @ {} dB: {its} iterations, objective within 1% of final from iteration {conv}, monotone {monotone}",
                    r.scheme, r.snr_db
                ),
            );
            let fixed_ok = r.bound <= r.fixed_bound;
            let random_ok = r.bound <= r.random_bound;
            if name != "fig10" {
                v.check(
                    fixed_ok && random_ok,
                    format!(
                        "{name} {} @ {} dB: optimized {:.4e}, fixed {:.4e}, random {:.4e}",
                        r.scheme, r.snr_db, r.bound, r.fixed_bound, r.random_bound
                    ),
                );
            }
            if name == "fig10" {
                let (target, label) = if r.snr_db >= 90.0 { (5usize, "high") } else { (13, "low") };
                v.check(
                    conv.abs_diff(target) <= 5,
                    format!(
                        "{name} {label} SNR {} dB: convergence iteration {conv} (total {its}), target {target} +/- 5",
                        r.snr_db
                    ),
                );
            }
        }
    }
    v
}

/// Log-linear interpolation of the SNR where a curve first crosses `target`.
fn crossing(points: &[SerPoint], target: f64) -> Option<f64> {
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ser >= target && b.ser < target {
            if b.ser <= 0.0 {
                return Some(b.snr_db);
            }
            let t = (a.ser.log10() - target.log10()) / (a.ser.log10() - b.ser.log10());
            return Some(a.snr_db + t * (b.snr_db - a.snr_db));
        }
    }
    None
}

/// Criterion 6.
fn scheme_comparison() -> Verdict {
    let mut v = Verdict::new();
    let cfg = load("fig4");
    let recs = simulate(&cfg, WORKERS).unwrap();
    let apq = crossing(&curve(&recs, "apq-sm-4-4-4", DetectorKind::Joint).curve.points, 1e-3);
    let pam = crossing(&curve(&recs, "sm-pam-64", DetectorKind::Joint).curve.points, 1e-3);
    match (apq, pam) {
        (Some(a), Some(p)) => v.check(a < p, format!("8 bpcu, d_tx 0.2 m: SER 1e-3 at {a:.2} dB (APQ-SM) vs {p:.2} dB (SM-PAM-64)")),
        _ => v.check(false, format!("crossing not bracketed: APQ-SM {apq:?}, SM-PAM {pam:?}")),
    }
    v
}

/// Criterion 7.
fn semi_angle_trend() -> Verdict {
    let mut v = Verdict::new();
    let cfg = load("fig7");
    let recs = simulate(&cfg, WORKERS).unwrap();
    let mut table: BTreeMap<(String, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for r in recs.iter().filter(|r| r.detector == DetectorKind::Joint) {
        if ![15.0, 30.0, 45.0, 60.0].contains(&r.semi_angle_deg) {
            continue;
        }
        for p in &r.curve.points {
            table
                .entry((r.scheme.clone(), p.snr_db.to_bits()))
                .or_default()
                .push((r.semi_angle_deg, p.ser));
        }
    }
    for ((scheme, snr), mut row) in table {
        row.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ok = row.windows(2).all(|w| w[1].1 >= w[0].1);
        let cells: Vec<String> = row.iter().map(|(a, s)| format!("{a}°: {s:.3e}")).collect();
        v.check(ok, format!("{scheme} @ {} dB: {}", f64::from_bits(snr), cells.join(", ")));
    }
    v
}

/// Criterion 8 on a 2-LED, 8-level instance.
fn oracle_equivalence() -> Verdict {
    let mut v = Verdict::new();
    let params = SystemParams::default();
    let geometry = Geometry {
        led_positions: vec![[1.4, 1.5, 2.5], [1.6, 1.5, 2.5]],
        pd_positions: vec![[1.45, 1.5, 0.75], [1.55, 1.5, 0.75]],
        room_dims: [3.0, 3.0, 3.0],
    };
    let h = build_channel_matrix(&geometry, &params).unwrap();
    let h_rows: Vec<Vec<f64>> = h.rows().map(|r| r.to_vec()).collect();
    let split = [2, 2, 2];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut powers = vec![PowerVector::fixed(1.0)];
    for _ in 0..4 {
        powers.push(random_power(&mut rng, 1.0));
    }

    // modulator and detectors
    let p0 = powers[0];
    let scheme = ApqScheme::new(2, split, p0).unwrap();
    let cb = scheme.codebook();
    let vectors = apq_vectors(2, split, p0.as_array());
    let cb_ok = cb.len() == vectors.len()
        && cb.iter().zip(&vectors).all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15));
    v.check(cb_ok, format!("codebook: {} codewords match the direct construction", cb.len()));

    let points: Vec<Vec<f64>> = vectors.iter().map(|x| received(&h_rows, x)).collect();
    let det = Detector::new(&h, &cb, 1.0).unwrap();
    let sigma = sigma_from_snr_db(84.0, 1.0, 1.0);
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    let (mut joint_ok, mut two_ok, mut errors) = (0, 0, 0);
    let samples = 10_000;
    for _ in 0..samples {
        let k = rng.random_range(0..points.len());
        let y: Vec<f64> = points[k].iter().map(|m| m + rng.sample(normal)).collect();
        let best = (0..points.len())
            .min_by(|&a, &b| dist(&y, &points[a]).total_cmp(&dist(&y, &points[b])))
            .unwrap();
        let per = cb.symbols_per_group();
        let (mut g_best, mut s_best, mut d_best) = (0, 0, f64::INFINITY);
        for g in 0..cb.n_groups() {
            for s in 0..per {
                let d = dist(&y, &points[g * per + s]);
                if d < d_best {
                    (g_best, s_best, d_best) = (g, s, d);
                }
            }
        }
        joint_ok += usize::from(det.detect_joint(&y).index == best);
        two_ok += usize::from(det.detect_two_step(&y).index == g_best * per + s_best);
        errors += usize::from(best != k);
    }
    v.check(joint_ok == samples, format!("joint detector: {joint_ok}/{samples} decisions match brute force ({errors} symbol errors in the sample)"));
    v.check(two_ok == samples, format!("two-step detector: {two_ok}/{samples} decisions match brute force"));

    // bounds and objective over several splits and noise levels
    let mut worst_bound: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    for p in &powers {
        let cb = ApqScheme::new(2, split, *p).unwrap().codebook();
        let pd = PairDistances::new(&h, &cb, 1.0).unwrap();
        let dt = DeltaTensor::new(&ApqScheme::new(2, split, *p).unwrap(), &h).unwrap();
        let pts: Vec<Vec<f64>> = apq_vectors(2, split, p.as_array()).iter().map(|x| received(&h_rows, x)).collect();
        for snr in [70.0, 80.0, 90.0] {
            let sigma = sigma_from_snr_db(snr, 1.0, 1.0);
            let r = ref_bounds(&pts, 2, sigma);
            let t = pd.report(sigma).unwrap();
            worst_bound = worst_bound.max(rel(t.joint, r.joint)).max(rel(t.two_step, r.two_step));
            for g in 0..2 {
                worst_bound = worst_bound
                    .max(rel(pd.index_bound(sigma, g).unwrap(), r.index[g]))
                    .max(rel(pd.symbol_bound(sigma, g).unwrap(), r.symbol[g]));
            }
            worst_obj = worst_obj.max(rel(objective_b(&p.as_array(), &dt, 1.0, sigma), r.joint));
        }
    }
    v.check(worst_bound <= 1e-9, format!("joint, index, symbol and two-step bounds: worst relative error {worst_bound:.2e} (tol 1e-9)"));
    v.check(worst_obj <= 1e-9, format!("objective B: worst relative error {worst_obj:.2e} (tol 1e-9)"));

    // subproblem against a dense feasible sample
    let mut lp_ok = 0;
    let trials = 50;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..trials {
        let p_l = random_power(&mut rng, 1.0).as_array();
        let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let delta = rng.random_range(0.01..0.5);
        let q = solve_subproblem(&p_l, &a, delta, 1.0);
        let lin = |x: &[f64; 3]| a[0] * (x[0] - p_l[0]) + a[1] * (x[1] - p_l[1]) + a[2] * (x[2] - p_l[2]);
        let tol = 1e-12;
        let feasible = |x: &[f64; 3]| {
            (x.iter().sum::<f64>() - 1.0).abs() <= tol
                && x[0] >= x[1] - tol
                && x[1] >= x[2] - tol
                && x[2] >= -tol
                && x.iter().zip(&p_l).all(|(u, l)| (u - l).abs() <= delta + tol)
        };
        let mut best_sample = 0.0f64;
        let n = 100;
        for i in 0..=n {
            for j in 0..=n {
                let x1 = p_l[0] - delta + 2.0 * delta * i as f64 / n as f64;
                let x2 = p_l[1] - delta + 2.0 * delta * j as f64 / n as f64;
                let x = [x1, x2, 1.0 - x1 - x2];
                if feasible(&x) {
                    best_sample = best_sample.min(lin(&x));
                }
            }
        }
        let gap = lin(&q) - best_sample;
        worst_gap = worst_gap.max(gap);
        lp_ok += usize::from(feasible(&q) && gap <= 1e-12);
    }
    v.check(
        lp_ok == trials,
        format!("subproblem: {lp_ok}/{trials} solutions feasible and no worse than a 101x101 feasible sample (worst gap {worst_gap:.1e})"),
    );
    v
}

/// Criterion 9 over every scheme, setup and split the presets can produce.
fn conservation() -> Verdict {
    let mut v = Verdict::new();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for (name, _) in PRESETS {
        let cfg = load(name);
        let splits = if cfg.schemes.iter().any(SchemeConfig::is_apq) {
            optimize(&cfg).unwrap()
        } else {
            Vec::new()
        };
        for var in cfg.variants() {
            let (params, _) = cfg.setup(&var).unwrap();
            let p_opt = params.p_opt_w;
            for scheme in &cfg.schemes {
                let mut books = Vec::new();
                if scheme.is_apq() {
                    for r in splits.iter().filter(|r| r.scheme == scheme.label() && r.variant == var.tag) {
                        for p in [r.p, r.fixed_p, r.random_p] {
                            let pv = PowerVector::new(p, p_opt).unwrap();
                            books.push(scheme.codebook(p_opt, Some(&pv)).unwrap());
                        }
                    }
                } else {
                    books.push(scheme.codebook(p_opt, None).unwrap());
                }
                for cb in books {
                    let e = rel(cb.mean_optical_power(), p_opt);
                    worst = worst.max(e);
                    checked += 1;
                }
            }
        }
    }
    v.check(worst <= 1e-12, format!("{checked} codebooks across all presets: worst relative deviation of mean optical power {worst:.2e}"));
    v
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

/// Criterion 10: every preset twice, byte-for-byte.
fn reproducibility() -> Verdict {
    let mut v = Verdict::new();
    for (name, _) in PRESETS {
        let cfg = load(name);
        let mut trees = Vec::new();
        let mut dirs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let opts = RunOptions {
                workers: 1,
                out_dir: dir.path().to_path_buf(),
            };
            let run = match name {
                "fig2" => run_sweep,
                "fig8" | "fig9" | "fig10" => run_optimize,
                _ => run_compare,
            };
            run(&cfg, &opts).unwrap();
            trees.push(read_tree(dir.path()));
            dirs.push(dir);
        }
        let same = trees[0] == trees[1];
        v.check(same, format!("{name}: {} files, identical across two runs: {same}", trees[0].len()));
    }
    v
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(&str, Verdict)> = Vec::new();

    let fig2 = simulate(&load("fig2"), WORKERS).unwrap();
    let (c1, c2, c3) = bound_sweep(&fig2);
    results.push(("C1 bound validity", c1));
    results.push(("C2 bound tightness", c2));
    results.push(("C3 detector ordering and noiseless exactness", c3));
    results.push(("C4 gradient check", gradient_check()));
    results.push(("C5 SCP behavior", scp_behavior()));
    results.push(("C6 scheme comparison", scheme_comparison()));
    results.push(("C7 semi-angle trend", semi_angle_trend()));
    results.push(("C8 oracle equivalence", oracle_equivalence()));
    results.push(("C9 power conservation", conservation()));
    results.push(("C10 reproducibility", reproducibility()));

    let mut failed = 0;
    for (name, v) in &results {
        println!("{} {name}", if v.pass { "PASS" } else { "FAIL" });
        for l in &v.lines {
            println!("{l}");
        }
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed, {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var("APQSM_ACCEPTANCE_STRICT").is_ok_and(|s| s == "1") {
        std::process::exit(1);
    }
}
