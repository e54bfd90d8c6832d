//! JSON experiment configuration.
//!
//! Unknown keys are rejected everywhere. Omitted sections fall back to the
//! reference indoor setup: a 3 m room, four LEDs 0.2 m apart, 15° semi-angle
//! and field of view, 1 cm² photodiodes, 1 A/W and 1 W.

use serde::{Deserialize, Serialize};

use crate::apq::{ApqScheme, PowerVector};
use crate::baseline::{MaSmScheme, SmPamScheme};
use crate::codebook::Codebook;
use crate::detection::DetectorKind;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, SystemParams};
use crate::optimizer::ScpConfig;
use crate::sim::StopRule;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    pub schemes: Vec<SchemeConfig>,
    #[serde(default = "default_detectors")]
    pub detectors: Vec<DetectorKind>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub scp: ScpSection,
    #[serde(default)]
    pub vary: Variations,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_detectors() -> Vec<DetectorKind> {
    vec![DetectorKind::Joint]
}

/// Optical constants with angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub pd_area_m2: f64,
    pub fov_deg: f64,
    pub semi_angle_deg: f64,
    pub refractive_index: f64,
    pub filter_gain: f64,
    pub conv_factor_a_per_w: f64,
    pub p_opt_w: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            pd_area_m2: p.pd_area_m2,
            fov_deg: 15.0,
            semi_angle_deg: 15.0,
            refractive_index: p.refractive_index,
            filter_gain: p.filter_gain,
            conv_factor_a_per_w: p.conv_factor_a_per_w,
            p_opt_w: p.p_opt_w,
        }
    }
}

impl SystemConfig {
    pub fn params(&self) -> SystemParams {
        SystemParams {
            pd_area_m2: self.pd_area_m2,
            fov_rad: self.fov_deg.to_radians(),
            semi_angle_rad: self.semi_angle_deg.to_radians(),
            refractive_index: self.refractive_index,
            filter_gain: self.filter_gain,
            conv_factor_a_per_w: self.conv_factor_a_per_w,
            p_opt_w: self.p_opt_w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryConfig {
    /// Four ceiling LEDs on a square of side `d_tx_m` above four desk
    /// photodiodes.
    Reference { d_tx_m: f64 },
    Custom {
        led_positions: Vec<[f64; 3]>,
        pd_positions: Vec<[f64; 3]>,
        room_dims: [f64; 3],
    },
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig::Reference { d_tx_m: 0.2 }
    }
}

impl GeometryConfig {
    pub fn geometry(&self, d_tx_override: Option<f64>) -> Result<Geometry> {
        match (self, d_tx_override) {
            (GeometryConfig::Reference { d_tx_m }, o) => Ok(Geometry::reference(o.unwrap_or(*d_tx_m))),
            (GeometryConfig::Custom { .. }, Some(_)) => Err(Error::Config(
                "vary.d_tx_m needs the reference geometry".into(),
            )),
            (
                GeometryConfig::Custom {
                    led_positions,
                    pd_positions,
                    room_dims,
                },
                None,
            ) => Ok(Geometry {
                led_positions: led_positions.clone(),
                pd_positions: pd_positions.clone(),
                room_dims: *room_dims,
            }),
        }
    }

    pub fn d_tx(&self) -> Option<f64> {
        match self {
            GeometryConfig::Reference { d_tx_m } => Some(*d_tx_m),
            GeometryConfig::Custom { .. } => None,
        }
    }
}

/// How the APQ power split is chosen at each SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerMode {
    Named(PowerName),
    /// Explicit `[p1, p2, p3]`, rescaled to sum to `P_opt`.
    Explicit([f64; 3]),
    /// One explicit split per SNR point, as written by `optimize`.
    PerSnr { per_snr: Vec<SnrPower> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerName {
    /// The `fixed_weights` split.
    Fixed,
    /// Trust-region SCP started from the `fixed_weights` split.
    Optimize,
    /// Uniform draw on the ordered simplex, fresh per SNR point.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrPower {
    pub snr_db: f64,
    pub p: [f64; 3],
}

fn default_fixed_weights() -> [f64; 3] {
    [4.0, 2.0, 1.0]
}

fn default_power() -> PowerMode {
    PowerMode::Named(PowerName::Fixed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SchemeConfig {
    ApqSm {
        n_t: usize,
        split: [usize; 3],
        #[serde(default = "default_power")]
        power: PowerMode,
        /// Baseline split and SCP starting point.
        #[serde(default = "default_fixed_weights")]
        fixed_weights: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    SmPam {
        n_t: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    MaSm {
        n_t: usize,
        n_a: usize,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl SchemeConfig {
    pub fn label(&self) -> String {
        match self {
            SchemeConfig::ApqSm { label: Some(l), .. }
            | SchemeConfig::SmPam { label: Some(l), .. }
            | SchemeConfig::MaSm { label: Some(l), .. } => l.clone(),
            SchemeConfig::ApqSm { split, .. } => format!("apq-sm-{}-{}-{}", split[0], split[1], split[2]),
            SchemeConfig::SmPam { m, .. } => format!("sm-pam-{m}"),
            SchemeConfig::MaSm { n_a, m, .. } => format!("ma-sm-{n_a}x{m}"),
        }
    }

    pub fn n_t(&self) -> usize {
        match self {
            SchemeConfig::ApqSm { n_t, .. } | SchemeConfig::SmPam { n_t, .. } | SchemeConfig::MaSm { n_t, .. } => *n_t,
        }
    }

    /// Bits per channel use.
    pub fn spectral_efficiency(&self) -> Result<usize> {
        Ok(match self {
            SchemeConfig::ApqSm { n_t, split, .. } => {
                ApqScheme::new(*n_t, *split, PowerVector::fixed(1.0))?.bits_per_channel_use()
            }
            SchemeConfig::SmPam { n_t, m, .. } => SmPamScheme::new(*n_t, *m, 1.0)?.bits_per_channel_use(),
            SchemeConfig::MaSm { n_t, n_a, m, .. } => MaSmScheme::new(*n_t, *n_a, *m, 1.0)?.bits_per_channel_use(),
        })
    }

    /// Codebook of a scheme whose power split, if any, is already known.
    pub fn codebook(&self, p_opt: f64, power: Option<&PowerVector>) -> Result<Codebook> {
        match self {
            SchemeConfig::ApqSm { n_t, split, .. } => {
                let p = power.ok_or_else(|| Error::Config("APQ-SM needs a power split".into()))?;
                Ok(ApqScheme::new(*n_t, *split, *p)?.codebook())
            }
            SchemeConfig::SmPam { n_t, m, .. } => Ok(SmPamScheme::new(*n_t, *m, p_opt)?.codebook()),
            SchemeConfig::MaSm { n_t, n_a, m, .. } => Ok(MaSmScheme::new(*n_t, *n_a, *m, p_opt)?.codebook()),
        }
    }

    pub fn is_apq(&self) -> bool {
        matches!(self, SchemeConfig::ApqSm { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    pub max_trials: u64,
    pub batch_size: u64,
    /// Attach analytic bounds to the simulated curves.
    pub bounds: bool,
    /// Skip Monte Carlo and report bounds only.
    pub bounds_only: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let s = StopRule::default();
        Self {
            snr_db: Vec::new(),
            min_errors: s.min_errors,
            max_trials: s.max_trials,
            batch_size: s.batch_size,
            bounds: true,
            bounds_only: false,
        }
    }
}

impl SweepConfig {
    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            min_errors: self.min_errors,
            max_trials: self.max_trials,
            batch_size: self.batch_size,
        }
    }
}

/// Trust-region parameters plus sweep-level options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScpSection {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta0: f64,
    pub epsilon: f64,
    pub n_max: usize,
    /// Optimize once at this SNR and reuse the split at every point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freeze_at_snr_db: Option<f64>,
}

impl Default for ScpSection {
    fn default() -> Self {
        let c = ScpConfig::default();
        Self {
            alpha0: c.alpha0,
            alpha1: c.alpha1,
            alpha2: c.alpha2,
            alpha: c.alpha,
            beta: c.beta,
            delta0: c.delta0,
            epsilon: c.epsilon,
            n_max: c.n_max,
            freeze_at_snr_db: None,
        }
    }
}

impl ScpSection {
    pub fn scp_config(&self) -> ScpConfig {
        ScpConfig {
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            alpha: self.alpha,
            beta: self.beta,
            delta0: self.delta0,
            epsilon: self.epsilon,
            n_max: self.n_max,
        }
    }
}

/// Parameter lists swept on top of the base setup.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Variations {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub d_tx_m: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub semi_angle_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            svg: true,
        }
    }
}

/// One concrete setup out of the variation lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub d_tx_m: Option<f64>,
    pub semi_angle_deg: f64,
    pub tag: String,
}

impl ExperimentConfig {
    /// Parses and validates, reporting syntax and schema errors with their
    /// line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::ConfigParse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Config("at least one detector is required".into()));
        }
        self.system.params().validate()?;
        self.scp.scp_config().validate()?;
        self.sweep.stop_rule().validate()?;
        if self.sweep.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        let base = self.geometry.geometry(None)?;
        base.validate()?;
        let mut labels = std::collections::BTreeSet::new();
        for s in &self.schemes {
            if s.n_t() != base.n_t() {
                return Err(Error::Config(format!(
                    "scheme {} uses {} LEDs but the geometry has {}",
                    s.label(),
                    s.n_t(),
                    base.n_t()
                )));
            }
            s.spectral_efficiency()?;
            if !labels.insert(s.label()) {
                return Err(Error::Config(format!("duplicate scheme label {}", s.label())));
            }
            if let SchemeConfig::ApqSm {
                power, fixed_weights, ..
            } = s
            {
                PowerVector::from_weights(*fixed_weights, self.system.p_opt_w)?;
                match power {
                    PowerMode::Explicit(p) => {
                        PowerVector::from_weights(*p, self.system.p_opt_w)?;
                    }
                    PowerMode::PerSnr { per_snr } => {
                        for sp in per_snr {
                            PowerVector::from_weights(sp.p, self.system.p_opt_w)?;
                        }
                    }
                    PowerMode::Named(_) => {}
                }
            }
        }
        if !self.vary.d_tx_m.is_empty() && self.geometry.d_tx().is_none() {
            return Err(Error::Config("vary.d_tx_m needs the reference geometry".into()));
        }
        for v in self.variants() {
            let mut sys = self.system;
            sys.semi_angle_deg = v.semi_angle_deg;
            sys.params().validate()?;
            self.geometry.geometry(v.d_tx_m)?.validate()?;
        }
        Ok(())
    }

    /// Cartesian product of the variation lists, LED spacing outermost.
    pub fn variants(&self) -> Vec<Variant> {
        let d_list: Vec<Option<f64>> = if self.vary.d_tx_m.is_empty() {
            vec![self.geometry.d_tx()]
        } else {
            self.vary.d_tx_m.iter().map(|d| Some(*d)).collect()
        };
        let s_list = if self.vary.semi_angle_deg.is_empty() {
            vec![self.system.semi_angle_deg]
        } else {
            self.vary.semi_angle_deg.clone()
        };
        let mut out = Vec::new();
        for d in &d_list {
            for &s in &s_list {
                let tag = match d {
                    Some(d) => format!("dtx{d}_semi{s}"),
                    None => format!("custom_semi{s}"),
                };
                out.push(Variant {
                    d_tx_m: if self.vary.d_tx_m.is_empty() { None } else { *d },
                    semi_angle_deg: s,
                    tag,
                });
            }
        }
        out
    }

    /// System constants and geometry of one variant.
    pub fn setup(&self, v: &Variant) -> Result<(SystemParams, Geometry)> {
        let mut sys = self.system;
        sys.semi_angle_deg = v.semi_angle_deg;
        Ok((sys.params(), self.geometry.geometry(v.d_tx_m)?))
    }
}

/// Figure presets shipped with the crate, by name.
pub const PRESETS: [(&str, &str); 9] = [
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig3", include_str!("../presets/fig3.json")),
    ("fig4", include_str!("../presets/fig4.json")),
    ("fig5", include_str!("../presets/fig5.json")),
    ("fig6", include_str!("../presets/fig6.json")),
    ("fig7", include_str!("../presets/fig7.json")),
    ("fig8", include_str!("../presets/fig8.json")),
    ("fig9", include_str!("../presets/fig9.json")),
    ("fig10", include_str!("../presets/fig10.json")),
];

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ExperimentConfig::from_json(text).expect("bundled presets are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema_version": 1, "schemes": [{"kind": "sm-pam", "n_t": 4, "m": 16}]}"#;

    #[test]
    fn minimal_config_uses_reference_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.geometry, GeometryConfig::Reference { d_tx_m: 0.2 });
        assert_eq!(c.system.params(), SystemParams::default());
        assert_eq!(c.detectors, vec![DetectorKind::Joint]);
        assert_eq!(c.variants().len(), 1);
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let text = "{\n  \"schema_version\": 1,\n  \"schemes\": [],\n  \"colour\": 3\n}";
        match ExperimentConfig::from_json(text) {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let nested = r#"{"schema_version": 1, "schemes": [{"kind": "sm-pam", "n_t": 4, "m": 16, "x": 1}]}"#;
        assert!(matches!(ExperimentConfig::from_json(nested), Err(Error::ConfigParse { .. })));
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "{\n  \"schema_version\": 1,\n  \"schemes\": [\n}";
        match ExperimentConfig::from_json(text) {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_checks() {
        let wrong_version = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(ExperimentConfig::from_json(&wrong_version).is_err());
        let wrong_nt = MINIMAL.replace("\"n_t\": 4", "\"n_t\": 8");
        assert!(ExperimentConfig::from_json(&wrong_nt).is_err());
        let bad_power = r#"{"schema_version": 1, "schemes": [{"kind": "apq-sm", "n_t": 4, "split": [2,4,2], "power": [0.1, 0.3, 0.6]}]}"#;
        assert!(ExperimentConfig::from_json(bad_power).is_err());
    }

    #[test]
    fn power_modes_parse() {
        for (text, want) in [
            (r#""fixed""#, PowerMode::Named(PowerName::Fixed)),
            (r#""optimize""#, PowerMode::Named(PowerName::Optimize)),
            (r#""random""#, PowerMode::Named(PowerName::Random)),
            ("[0.5, 0.3, 0.2]", PowerMode::Explicit([0.5, 0.3, 0.2])),
        ] {
            let got: PowerMode = serde_json::from_str(text).unwrap();
            assert_eq!(got, want);
        }
        let per: PowerMode = serde_json::from_str(r#"{"per_snr": [{"snr_db": 90, "p": [0.6, 0.3, 0.1]}]}"#).unwrap();
        assert!(matches!(per, PowerMode::PerSnr { .. }));
    }

    #[test]
    fn variants_product_and_roundtrip() {
        let text = r#"{"schema_version": 1, "schemes": [{"kind": "sm-pam", "n_t": 4, "m": 16}],
            "vary": {"d_tx_m": [0.2, 0.4], "semi_angle_deg": [15, 30, 45]}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let v = c.variants();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0].tag, "dtx0.2_semi15");
        assert_eq!(v[5].tag, "dtx0.4_semi45");
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn labels_and_efficiency() {
        let c = ExperimentConfig::from_json(
            r#"{"schema_version": 1, "schemes": [
                {"kind": "apq-sm", "n_t": 4, "split": [2,4,2]},
                {"kind": "ma-sm", "n_t": 4, "n_a": 2, "m": 4}]}"#,
        )
        .unwrap();
        assert_eq!(c.schemes[0].label(), "apq-sm-2-4-2");
        assert_eq!(c.schemes[1].label(), "ma-sm-2x4");
        assert_eq!(c.schemes[0].spectral_efficiency().unwrap(), 6);
        assert_eq!(c.schemes[1].spectral_efficiency().unwrap(), 6);
    }

    #[test]
    fn every_preset_is_valid() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            assert_eq!(c.name, name);
        }
    }
}
