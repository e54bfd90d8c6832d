//! Power-split optimization for APQ-SM by successive linear programming with
//! an adaptive trust region.
//!
//! The objective is the joint-detection union bound written in terms of the
//! [`DeltaTensor`], `f_a(p) = (1/N) sum_pairs Q(gamma s(p) / (2 sigma))` with
//! `s(p)^2 = sum_r (p . Delta^r)^2`. Each iteration linearizes `f_a` at the
//! incumbent and minimizes the linear model over the ordered simplex
//! intersected with an infinity-norm box of radius `delta`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::apq::PowerVector;
use crate::bounds::{q_of_distance, DeltaTensor};
use crate::error::{Error, Result};

/// Trust-region parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScpConfig {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Radius shrink divisor.
    pub alpha: f64,
    /// Radius growth factor.
    pub beta: f64,
    pub delta0: f64,
    pub epsilon: f64,
    pub n_max: usize,
}

impl Default for ScpConfig {
    fn default() -> Self {
        Self {
            alpha0: 0.1,
            alpha1: 0.9,
            alpha2: 1.0,
            alpha: 1.5,
            beta: 2.0,
            delta0: 4.0,
            epsilon: 1e-3,
            n_max: 100,
        }
    }
}

impl ScpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.alpha0 && self.alpha0 < self.alpha1 && self.alpha1 < self.alpha2 && self.alpha2 <= 1.0) {
            return Err(Error::Config(format!(
                "need 0 < alpha0 < alpha1 < alpha2 <= 1, got {}, {}, {}",
                self.alpha0, self.alpha1, self.alpha2
            )));
        }
        if !(self.alpha > 1.0 && self.beta >= 1.0) {
            return Err(Error::Config(format!(
                "need alpha > 1 and beta >= 1, got {} and {}",
                self.alpha, self.beta
            )));
        }
        if !(self.delta0 > 0.0 && self.epsilon > 0.0) {
            return Err(Error::Config("delta0 and epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Joint union bound as a function of the power split.
pub fn objective_b(p: &[f64; 3], dt: &DeltaTensor, gamma: f64, sigma: f64) -> f64 {
    let mut total = 0.0;
    for rows in dt.iter_pairs() {
        total += q_of_distance(gamma * pair_norm(p, rows), sigma);
    }
    total / dt.n_codewords() as f64
}

/// Gradient of [`objective_b`] with respect to `p`.
///
/// Pairs whose received points coincide (`s(p) = 0`) contribute nothing.
pub fn gradient_a(p: &[f64; 3], dt: &DeltaTensor, gamma: f64, sigma: f64) -> [f64; 3] {
    let k = gamma * gamma / (8.0 * sigma * sigma);
    let mut g = [0.0; 3];
    for rows in dt.iter_pairs() {
        let s2: f64 = rows.iter().map(|d| dot(p, d).powi(2)).sum();
        if s2 == 0.0 {
            continue;
        }
        let w = (-k * s2).exp() / s2.sqrt();
        if w == 0.0 {
            continue;
        }
        for d in rows {
            let proj = dot(p, d) * w;
            g[0] += proj * d[0];
            g[1] += proj * d[1];
            g[2] += proj * d[2];
        }
    }
    let c = -gamma / (sigma * dt.n_codewords() as f64 * (8.0 * std::f64::consts::PI).sqrt());
    g.map(|v| c * v)
}

#[inline]
fn dot(p: &[f64; 3], d: &[f64; 3]) -> f64 {
    p[0] * d[0] + p[1] * d[1] + p[2] * d[2]
}

#[inline]
fn pair_norm(p: &[f64; 3], rows: &[[f64; 3]]) -> f64 {
    rows.iter().map(|d| dot(p, d).powi(2)).sum::<f64>().sqrt()
}

/// Exact minimizer of `a . (p - p_l)` over `{sum p = p_opt, p1 >= p2 >= p3 >= 0,
/// |p - p_l|_inf <= delta}`.
///
/// `p_3` is eliminated and every vertex of the resulting planar polygon is
/// enumerated. The incumbent is kept unless a vertex is strictly better.
pub fn solve_subproblem(p_l: &[f64; 3], a: &[f64; 3], delta: f64, p_opt: f64) -> [f64; 3] {
    let [l1, l2, l3] = *p_l;
    let s = l1 + l2;
    // half-planes c1 p1 + c2 p2 <= b
    let cons: [[f64; 3]; 10] = [
        [1.0, 1.0, p_opt],
        [-1.0, -2.0, -p_opt],
        [-1.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [1.0, 0.0, l1 + delta],
        [-1.0, 0.0, -(l1 - delta)],
        [0.0, 1.0, l2 + delta],
        [0.0, -1.0, -(l2 - delta)],
        [1.0, 1.0, s + delta],
        [-1.0, -1.0, -(s - delta)],
    ];
    let c = [a[0] - a[2], a[1] - a[2]];
    let scale = p_opt.max(delta);
    let tol = 1e-12 * scale;
    let model_tol = 1e-14 * (c[0].abs() + c[1].abs()) * scale;

    let mut best = [l1, l2];
    let mut best_v = 0.0;
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let [a1, b1, r1] = cons[i];
            let [a2, b2, r2] = cons[j];
            let det = a1 * b2 - a2 * b1;
            if det == 0.0 {
                continue;
            }
            let x = (r1 * b2 - r2 * b1) / det;
            let y = (a1 * r2 - a2 * r1) / det;
            if cons.iter().any(|k| k[0] * x + k[1] * y > k[2] + tol) {
                continue;
            }
            let v = c[0] * (x - l1) + c[1] * (y - l2);
            if v < best_v - model_tol {
                best_v = v;
                best = [x, y];
            }
        }
    }
    if best == [l1, l2] {
        return [l1, l2, l3];
    }
    let [x, y] = best;
    // rounding residue can break the ordering by an ulp
    let mut q = [x.max(0.0), y.max(0.0), (p_opt - x - y).max(0.0)];
    q.sort_by(|u, v| v.total_cmp(u));
    q
}

/// Ratio of actual to predicted decrease.
///
/// With no predicted decrease the step counts as converged (`1`) when the
/// objective is also flat to `1e-15`, and as a failure (`-inf`) otherwise.
pub fn trust_region_ratio(f_a_old: f64, f_a_new: f64, f_p_old: f64, f_p_new: f64) -> f64 {
    let actual = f_a_old - f_a_new;
    let predicted = f_p_old - f_p_new;
    if predicted == 0.0 {
        if actual.abs() <= 1e-15 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        actual / predicted
    }
}

/// How an SCP run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The subproblem step fell below `epsilon`.
    Converged,
    /// `n_max` iterations were spent.
    IterationLimit,
}

/// One iteration of an SCP run.
///
/// `p` and `f_a` describe the incumbent after the iteration; `candidate` and
/// `candidate_f_a` the subproblem solution that `r` and `accepted` refer to.
/// Row 0 is the starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScpStep {
    pub l: usize,
    pub p: [f64; 3],
    pub delta: f64,
    pub f_a: f64,
    pub r: Option<f64>,
    pub accepted: bool,
    pub candidate: [f64; 3],
    pub candidate_f_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScpTrace {
    pub steps: Vec<ScpStep>,
}

impl ScpTrace {
    /// Number of subproblems solved.
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// First iteration whose incumbent objective is within `rel_tol` of the
    /// final one.
    pub fn convergence_iteration(&self, rel_tol: f64) -> usize {
        let last = self.steps.last().map_or(0.0, |s| s.f_a);
        self.steps
            .iter()
            .find(|s| s.f_a <= last * (1.0 + rel_tol))
            .map_or(0, |s| s.l)
    }

    /// CSV with columns `l,p1,p2,p3,delta,f_a,r,accepted`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["l", "p1", "p2", "p3", "delta", "f_a", "r", "accepted"])?;
        for s in &self.steps {
            w.write_record([
                s.l.to_string(),
                fmt_f64(s.p[0]),
                fmt_f64(s.p[1]),
                fmt_f64(s.p[2]),
                fmt_f64(s.delta),
                fmt_f64(s.f_a),
                s.r.map(fmt_f64).unwrap_or_default(),
                s.accepted.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScpResult {
    pub p: PowerVector,
    pub f_a: f64,
    pub termination: Termination,
    pub trace: ScpTrace,
}

/// Algorithm: linearize, solve the box-constrained LP, then grow, keep or
/// shrink the radius depending on the ratio `r` of actual to predicted
/// decrease. Steps with `r < alpha0` are rejected.
pub fn scp_optimize(
    dt: &DeltaTensor,
    gamma: f64,
    sigma: f64,
    config: &ScpConfig,
    p0: &PowerVector,
) -> Result<ScpResult> {
    config.validate()?;
    if !(sigma > 0.0 && gamma > 0.0) {
        return Err(Error::Domain {
            what: "sigma",
            value: sigma,
            domain: "positive, with positive gamma",
        });
    }
    let p_opt = p0.p_opt();
    let mut p = p0.as_array();
    let mut f = objective_b(&p, dt, gamma, sigma);
    let mut delta = config.delta0;
    let mut steps = vec![ScpStep {
        l: 0,
        p,
        delta,
        f_a: f,
        r: None,
        accepted: true,
        candidate: p,
        candidate_f_a: f,
    }];
    let mut termination = Termination::IterationLimit;
    for l in 1..=config.n_max {
        let a = gradient_a(&p, dt, gamma, sigma);
        let cand = solve_subproblem(&p, &a, delta, p_opt);
        let step = (0..3).map(|i| (cand[i] - p[i]).abs()).fold(0.0, f64::max);
        if step <= config.epsilon {
            termination = Termination::Converged;
            break;
        }
        let f_new = objective_b(&cand, dt, gamma, sigma);
        let model_new = f + (0..3).map(|i| a[i] * (cand[i] - p[i])).sum::<f64>();
        let r = trust_region_ratio(f, f_new, f, model_new);
        let used = delta;
        let accepted = r >= config.alpha0 && f_new <= f;
        if r >= config.alpha2 {
            delta *= config.beta;
        } else if r < config.alpha1 {
            delta /= config.alpha;
        }
        if accepted {
            p = cand;
            f = f_new;
        }
        steps.push(ScpStep {
            l,
            p,
            delta: used,
            f_a: f,
            r: Some(r),
            accepted,
            candidate: cand,
            candidate_f_a: f_new,
        });
    }
    Ok(ScpResult {
        p: PowerVector::new(p, p_opt)?,
        f_a: f,
        termination,
        trace: ScpTrace { steps },
    })
}

/// Uniform draw from the simplex `sum = p_opt`, sorted descending.
pub fn random_power<R: Rng + ?Sized>(rng: &mut R, p_opt: f64) -> PowerVector {
    let mut w: [f64; 3] = [rng.sample(Exp1), rng.sample(Exp1), rng.sample(Exp1)];
    w.sort_by(|a, b| b.total_cmp(a));
    PowerVector::from_weights(w, p_opt).expect("exponential weights are positive and sorted")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apq::ApqScheme;
    use crate::bounds::joint_aser_bound;
    use crate::geometry::{build_channel_matrix, ChannelMatrix, Geometry, SystemParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference(split: [usize; 3]) -> (ChannelMatrix, ApqScheme, DeltaTensor) {
        let h = build_channel_matrix(&Geometry::reference(0.2), &SystemParams::default()).unwrap();
        let s = ApqScheme::new(4, split, PowerVector::fixed(1.0)).unwrap();
        let dt = DeltaTensor::new(&s, &h).unwrap();
        (h, s, dt)
    }

    fn sigma(snr_db: f64) -> f64 {
        1.0 / 10f64.powf(snr_db / 20.0)
    }

    #[test]
    fn objective_matches_joint_bound() {
        let (h, s, dt) = reference([2, 4, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let pv = random_power(&mut rng, 1.0);
            let cb = s.with_power(pv).codebook();
            for snr in [85.0, 95.0] {
                let a = objective_b(&pv.as_array(), &dt, 1.0, sigma(snr));
                let b = joint_aser_bound(&cb, &h, 1.0, sigma(snr)).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn infinite_noise_limit() {
        let (_, _, dt) = reference([2, 4, 2]);
        let v = objective_b(&PowerVector::fixed(1.0).as_array(), &dt, 1.0, 1e30);
        assert_relative_eq!(v, 63.0 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_high_snr() {
        let (_, _, dt) = reference([2, 4, 2]);
        let g = gradient_a(&PowerVector::fixed(1.0).as_array(), &dt, 1.0, sigma(200.0));
        assert_eq!(g, [0.0; 3]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (_, _, dt) = reference([2, 4, 2]);
        let p = [0.55, 0.3, 0.15];
        let sg = sigma(90.0);
        let g = gradient_a(&p, &dt, 1.0, sg);
        let h = 1e-6;
        for i in 0..3 {
            let mut up = p;
            let mut dn = p;
            up[i] += h;
            dn[i] -= h;
            let fd = (objective_b(&up, &dt, 1.0, sg) - objective_b(&dn, &dt, 1.0, sg)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn subproblem_zero_gradient_keeps_incumbent() {
        let p = [0.5, 0.3, 0.2];
        assert_eq!(solve_subproblem(&p, &[0.0; 3], 4.0, 1.0), p);
    }

    #[test]
    fn subproblem_pushes_to_equal_split() {
        let p = PowerVector::fixed(1.0).as_array();
        let q = solve_subproblem(&p, &[0.0, 0.0, -1.0], 10.0, 1.0);
        for v in q {
            assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-12);
        }
        let q = solve_subproblem(&p, &[-1.0, 0.0, 0.0], 10.0, 1.0);
        assert_eq!(q, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn subproblem_respects_small_radius() {
        let p = PowerVector::fixed(1.0).as_array();
        let d = 1e-3;
        let q = solve_subproblem(&p, &[-1.0, 0.3, 0.2], d, 1.0);
        assert!((0..3).all(|i| (q[i] - p[i]).abs() <= d * (1.0 + 1e-9)));
        assert!(q[0] > p[0]);
    }

    #[test]
    fn ratio_cases() {
        assert_eq!(trust_region_ratio(1.0, 0.5, 1.0, 0.5), 1.0);
        assert!(trust_region_ratio(1.0, 1.2, 1.0, 0.5) < 0.0);
        assert_eq!(trust_region_ratio(1.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(trust_region_ratio(1.0, 0.9, 1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn mid_ratio_shrinks_and_accepts() {
        // r = 0.5 lies in [alpha0, alpha1): accepted with radius / alpha
        let cfg = ScpConfig::default();
        let r = trust_region_ratio(1.0, 0.75, 1.0, 0.5);
        assert_eq!(r, 0.5);
        assert!(r >= cfg.alpha0 && r < cfg.alpha1);
    }

    #[test]
    fn scp_improves_on_fixed_split() {
        let (_, _, dt) = reference([2, 4, 2]);
        let p0 = PowerVector::fixed(1.0);
        let res = scp_optimize(&dt, 1.0, sigma(90.0), &ScpConfig::default(), &p0).unwrap();
        let f0 = objective_b(&p0.as_array(), &dt, 1.0, sigma(90.0));
        assert!(res.f_a < 0.1 * f0, "{} vs {}", res.f_a, f0);
        assert_eq!(res.termination, Termination::Converged);
        let acc: Vec<f64> = res.trace.steps.iter().filter(|s| s.accepted).map(|s| s.f_a).collect();
        assert!(acc.windows(2).all(|w| w[1] <= w[0]));
        let again = scp_optimize(&dt, 1.0, sigma(90.0), &ScpConfig::default(), &p0).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn saturated_objective_stops_immediately() {
        let (_, _, dt) = reference([2, 4, 2]);
        let p0 = PowerVector::fixed(1.0);
        let res = scp_optimize(&dt, 1.0, sigma(250.0), &ScpConfig::default(), &p0).unwrap();
        assert_eq!(res.trace.iterations(), 0);
        assert_eq!(res.p, p0);
    }

    #[test]
    fn trace_csv_layout() {
        let (_, _, dt) = reference([2, 4, 2]);
        let res = scp_optimize(&dt, 1.0, sigma(90.0), &ScpConfig::default(), &PowerVector::fixed(1.0)).unwrap();
        let csv = res.trace.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "l,p1,p2,p3,delta,f_a,r,accepted");
        assert!(lines.next().unwrap().ends_with(",,true"));
        assert_eq!(csv.lines().count(), res.trace.steps.len() + 1);
    }

    #[test]
    fn config_validation() {
        assert!(ScpConfig::default().validate().is_ok());
        let bad = ScpConfig { alpha1: 0.05, ..ScpConfig::default() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn subproblem_feasible(
            w in prop::array::uniform3(0.0f64..1.0),
            a in prop::array::uniform3(-1.0f64..1.0),
            delta in 1e-4f64..2.0,
        ) {
            let mut w = w;
            w.sort_by(|x, y| y.total_cmp(x));
            prop_assume!(w[0] > 0.0);
            let p = PowerVector::from_weights(w, 1.0).unwrap().as_array();
            let q = solve_subproblem(&p, &a, delta, 1.0);
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(q[0] >= q[1] && q[1] >= q[2] && q[2] >= 0.0);
            for i in 0..3 {
                prop_assert!((q[i] - p[i]).abs() <= delta + 1e-12);
            }
            let model = |x: &[f64; 3]| a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
            prop_assert!(model(&q) <= model(&p) + 1e-15);
        }

        #[test]
        fn random_power_feasible(seed in any::<u64>()) {
            let p = random_power(&mut ChaCha8Rng::seed_from_u64(seed), 2.0).as_array();
            prop_assert!((p.iter().sum::<f64>() - 2.0).abs() <= 2e-12);
            prop_assert!(p[0] >= p[1] && p[1] >= p[2] && p[2] >= 0.0);
        }
    }
}
