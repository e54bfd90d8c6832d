//! Line-of-sight optical MIMO channel.
//!
//! LEDs are mounted facing straight down and photodiodes face straight up, so
//! the emission and incidence angles of every link coincide and equal
//! `acos(dz / d)`. Only the direct path is modelled.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Optical front-end constants shared by every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub pd_area_m2: f64,
    pub fov_rad: f64,
    pub semi_angle_rad: f64,
    pub refractive_index: f64,
    pub filter_gain: f64,
    pub conv_factor_a_per_w: f64,
    pub p_opt_w: f64,
}

impl Default for SystemParams {
    /// 1 cm² detector, 15° FoV and semi-angle, unit filter gain, 1 A/W, 1 W,
    /// concentrator index 1.5.
    fn default() -> Self {
        Self {
            pd_area_m2: 1e-4,
            fov_rad: 15f64.to_radians(),
            semi_angle_rad: 15f64.to_radians(),
            refractive_index: 1.5,
            filter_gain: 1.0,
            conv_factor_a_per_w: 1.0,
            p_opt_w: 1.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pd_area_m2", self.pd_area_m2),
            ("refractive_index", self.refractive_index),
            ("filter_gain", self.filter_gain),
            ("conv_factor_a_per_w", self.conv_factor_a_per_w),
            ("p_opt_w", self.p_opt_w),
        ];
        for (what, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain {
                    what,
                    value,
                    domain: "strictly positive",
                });
            }
        }
        for (what, value) in [
            ("fov_rad", self.fov_rad),
            ("semi_angle_rad", self.semi_angle_rad),
        ] {
            if !(value > 0.0 && value < FRAC_PI_2) {
                return Err(Error::Domain {
                    what,
                    value,
                    domain: "(0, pi/2)",
                });
            }
        }
        Ok(())
    }
}

/// Room, transmitter and receiver placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub led_positions: Vec<Point3>,
    pub pd_positions: Vec<Point3>,
    pub room_dims: Point3,
}

impl Geometry {
    /// The 3 m cube with a square of four ceiling LEDs at 2.5 m separated by
    /// `d_tx`, centred above four desk photodiodes at 0.75 m spaced 0.1 m.
    pub fn reference(d_tx: f64) -> Self {
        let c = 1.5;
        let h = d_tx / 2.0;
        Self {
            led_positions: vec![
                [c + h, c + h, 2.5],
                [c - h, c + h, 2.5],
                [c + h, c - h, 2.5],
                [c - h, c - h, 2.5],
            ],
            pd_positions: vec![
                [1.55, 1.55, 0.75],
                [1.45, 1.55, 0.75],
                [1.55, 1.45, 0.75],
                [1.45, 1.45, 0.75],
            ],
            room_dims: [3.0, 3.0, 3.0],
        }
    }

    pub fn n_t(&self) -> usize {
        self.led_positions.len()
    }

    pub fn n_r(&self) -> usize {
        self.pd_positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n_t = self.n_t();
        if n_t == 0 || !n_t.is_power_of_two() {
            return Err(Error::Geometry(format!(
                "LED count must be a power of two, got {n_t}"
            )));
        }
        if self.pd_positions.is_empty() {
            return Err(Error::Geometry("no photodiodes".into()));
        }
        let inside = |p: &Point3| {
            p.iter()
                .zip(self.room_dims.iter())
                .all(|(x, lim)| x.is_finite() && *x >= 0.0 && x <= lim)
        };
        for (i, p) in self.led_positions.iter().enumerate() {
            if !inside(p) {
                return Err(Error::Geometry(format!("LED {i} at {p:?} is outside the room")));
            }
        }
        for (i, p) in self.pd_positions.iter().enumerate() {
            if !inside(p) {
                return Err(Error::Geometry(format!("PD {i} at {p:?} is outside the room")));
            }
        }
        let lowest_led = self
            .led_positions
            .iter()
            .map(|p| p[2])
            .fold(f64::INFINITY, f64::min);
        let highest_pd = self
            .pd_positions
            .iter()
            .map(|p| p[2])
            .fold(f64::NEG_INFINITY, f64::max);
        if lowest_led <= highest_pd {
            return Err(Error::Geometry(
                "every LED must be strictly above every photodiode".into(),
            ));
        }
        Ok(())
    }
}

/// Lambertian order `-ln 2 / ln cos(semi_angle)`.
pub fn lambertian_order(semi_angle_rad: f64) -> Result<f64> {
    if !(semi_angle_rad > 0.0 && semi_angle_rad < FRAC_PI_2) {
        return Err(Error::Domain {
            what: "semi_angle_rad",
            value: semi_angle_rad,
            domain: "(0, pi/2)",
        });
    }
    Ok(-std::f64::consts::LN_2 / semi_angle_rad.cos().ln())
}

/// Lambertian radiant intensity `(nu + 1) / (2 pi) * cos(angle)^nu`.
pub fn radiant_intensity(angle_rad: f64, order: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&angle_rad) {
        return Err(Error::Domain {
            what: "angle_rad",
            value: angle_rad,
            domain: "[0, pi/2]",
        });
    }
    Ok((order + 1.0) / (2.0 * PI) * angle_rad.cos().powf(order))
}

/// Optical concentrator gain; zero outside the field of view.
pub fn concentrator_gain(incidence_rad: f64, params: &SystemParams) -> f64 {
    if incidence_rad <= params.fov_rad {
        let s = params.fov_rad.sin();
        params.refractive_index * params.refractive_index / (s * s)
    } else {
        0.0
    }
}

/// DC gain of the direct path from one LED to one photodiode.
pub fn channel_gain(led: &Point3, pd: &Point3, params: &SystemParams) -> Result<f64> {
    let dx = led[0] - pd[0];
    let dy = led[1] - pd[1];
    let dz = led[2] - pd[2];
    let d2 = dx * dx + dy * dy + dz * dz;
    if d2 == 0.0 {
        return Err(Error::Geometry(format!(
            "LED at {led:?} coincides with photodiode"
        )));
    }
    let d = d2.sqrt();
    let cos_angle = (dz / d).clamp(-1.0, 1.0);
    let angle = cos_angle.acos();
    if angle > params.fov_rad {
        return Ok(0.0);
    }
    let order = lambertian_order(params.semi_angle_rad)?;
    let intensity = radiant_intensity(angle, order)?;
    Ok(params.pd_area_m2 / d2
        * intensity
        * params.filter_gain
        * concentrator_gain(angle, params)
        * cos_angle)
}

/// `N_r x N_t` matrix of nonnegative link gains, row = photodiode, column = LED.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_r: usize,
    n_t: usize,
    gains: Vec<f64>,
}

impl ChannelMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, Vec::len);
        if n_r == 0 || n_t == 0 {
            return Err(Error::Dimension("empty channel matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n_t) {
            return Err(Error::Dimension("ragged channel matrix rows".into()));
        }
        if rows.iter().flatten().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::Dimension(
                "channel gains must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            n_r,
            n_t,
            gains: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    #[inline]
    pub fn get(&self, r: usize, l: usize) -> f64 {
        self.gains[r * self.n_t + l]
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        (0..self.n_r).map(|r| self.get(r, l)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.gains.chunks(self.n_t)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_r: self.n_r,
            n_t: self.n_t,
            gains: self.gains.iter().map(|g| g * c).collect(),
        }
    }

    /// Keeps only the listed LED columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_t) {
            return Err(Error::IndexOutOfRange {
                what: "column",
                index: bad,
                limit: self.n_t,
            });
        }
        Self::from_rows(
            self.rows()
                .map(|row| cols.iter().map(|&c| row[c]).collect())
                .collect(),
        )
    }

    /// `H x` for a length-`N_t` transmit vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(x).map(|(h, v)| h * v).sum())
            .collect()
    }

    /// Normalised inner-product similarity `<a, b> / (|a| |b|)` of two columns.
    pub fn column_similarity(&self, a: usize, b: usize) -> f64 {
        let ca = self.column(a);
        let cb = self.column(b);
        let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
        let na: f64 = ca.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = cb.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    /// CSV with one row per photodiode, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|g| format!("{g:.16e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

pub fn build_channel_matrix(geometry: &Geometry, params: &SystemParams) -> Result<ChannelMatrix> {
    geometry.validate()?;
    params.validate()?;
    let rows = geometry
        .pd_positions
        .iter()
        .map(|pd| {
            geometry
                .led_positions
                .iter()
                .map(|led| channel_gain(led, pd, params))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelMatrix::from_rows(rows)
}
