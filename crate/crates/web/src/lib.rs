//! Browser bindings for the demo page in `www/`. Every export returns a JSON
//! string so the page needs no generated TypeScript types.

use apqsm::bounds::BoundReport;
use apqsm::{
    build_channel_matrix, scp_optimize, sigma_from_snr_db, ApqScheme, ChannelMatrix, DeltaTensor, Geometry,
    PairDistances, PowerVector, ScpConfig, SystemParams,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn setup(d_tx: f64, semi_angle_deg: f64) -> apqsm::Result<(SystemParams, ChannelMatrix)> {
    let params = SystemParams {
        semi_angle_rad: semi_angle_deg.to_radians(),
        ..SystemParams::default()
    };
    let h = build_channel_matrix(&Geometry::reference(d_tx), &params)?;
    Ok((params, h))
}

/// `(split, starting weights)` of the two demo constellations.
fn scheme_of(eta: u32) -> apqsm::Result<([usize; 3], [f64; 3])> {
    match eta {
        6 => Ok(([2, 4, 2], [4.0, 2.0, 1.0])),
        8 => Ok(([4, 4, 4], [16.0, 4.0, 1.0])),
        _ => Err(apqsm::Error::Config(format!("demo supports 6 or 8 bpcu, got {eta}"))),
    }
}

/// 4x4 channel matrix of the reference room plus pairwise column
/// similarities, as `{"h": [[..]], "similarity": [[..]]}`.
#[wasm_bindgen]
pub fn channel(d_tx: f64, semi_angle_deg: f64) -> Result<String, JsError> {
    let (_, h) = setup(d_tx, semi_angle_deg).map_err(js_err)?;
    let rows: Vec<Vec<f64>> = h.rows().map(|r| r.to_vec()).collect();
    let sim: Vec<Vec<f64>> = (0..h.n_t())
        .map(|a| (0..h.n_t()).map(|b| h.column_similarity(a, b)).collect())
        .collect();
    Ok(json!({ "h": rows, "similarity": sim }).to_string())
}

/// Union bounds over an SNR grid for the split `p` and for the default split.
#[wasm_bindgen]
pub fn bounds(
    eta: u32,
    p: &[f64],
    d_tx: f64,
    semi_angle_deg: f64,
    snr_lo: f64,
    snr_hi: f64,
    snr_step: f64,
) -> Result<String, JsError> {
    let (split, w0) = scheme_of(eta).map_err(js_err)?;
    let (params, h) = setup(d_tx, semi_angle_deg).map_err(js_err)?;
    let weights: [f64; 3] = p.try_into().map_err(|_| js_err("p must have three entries"))?;
    if !(snr_step > 0.0) || !(snr_hi >= snr_lo) {
        return Err(js_err("SNR grid must be increasing with a positive step"));
    }
    let gamma = params.conv_factor_a_per_w;
    let evaluate = |w: [f64; 3]| -> apqsm::Result<(Vec<BoundReport>, [f64; 3])> {
        let power = PowerVector::from_weights(w, params.p_opt_w)?;
        let cb = ApqScheme::new(h.n_t(), split, power)?.codebook();
        let pd = PairDistances::new(&h, &cb, gamma)?;
        let n = ((snr_hi - snr_lo) / snr_step).floor() as usize;
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let snr = snr_lo + k as f64 * snr_step;
            let sigma = sigma_from_snr_db(snr, gamma, params.p_opt_w);
            out.push(BoundReport::new(snr, pd.report(sigma)?));
        }
        Ok((out, power.as_array()))
    };
    let (chosen, p_used) = evaluate(weights).map_err(js_err)?;
    let (reference, _) = evaluate(w0).map_err(js_err)?;
    Ok(json!({ "p": p_used, "chosen": chosen, "reference": reference }).to_string())
}

/// Runs the trust-region optimizer from the default split and returns the
/// full iteration trace.
#[wasm_bindgen]
pub fn optimize(eta: u32, d_tx: f64, semi_angle_deg: f64, snr_db: f64) -> Result<String, JsError> {
    let (split, w0) = scheme_of(eta).map_err(js_err)?;
    let (params, h) = setup(d_tx, semi_angle_deg).map_err(js_err)?;
    let p0 = PowerVector::from_weights(w0, params.p_opt_w).map_err(js_err)?;
    let scheme = ApqScheme::new(h.n_t(), split, p0).map_err(js_err)?;
    let dt = DeltaTensor::new(&scheme, &h).map_err(js_err)?;
    let gamma = params.conv_factor_a_per_w;
    let sigma = sigma_from_snr_db(snr_db, gamma, params.p_opt_w);
    let res = scp_optimize(&dt, gamma, sigma, &ScpConfig::default(), &p0).map_err(js_err)?;
    Ok(json!({
        "p": res.p.as_array(),
        "f_a": res.f_a,
        "start_f_a": res.trace.steps[0].f_a,
        "iterations": res.trace.iterations(),
        "trace": res.trace,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn channel_is_four_by_four() {
        let v: Value = serde_json::from_str(&channel(0.2, 15.0).unwrap()).unwrap();
        assert_eq!(v["h"].as_array().unwrap().len(), 4);
        assert!((v["similarity"][1][1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_grid_and_reference() {
        let v: Value = serde_json::from_str(&bounds(6, &[4.0, 2.0, 1.0], 0.2, 15.0, 80.0, 90.0, 5.0).unwrap()).unwrap();
        assert_eq!(v["chosen"].as_array().unwrap().len(), 3);
        assert_eq!(v["chosen"], v["reference"]);
    }

    #[test]
    fn optimize_improves() {
        let v: Value = serde_json::from_str(&optimize(6, 0.2, 15.0, 90.0).unwrap()).unwrap();
        assert!(v["f_a"].as_f64().unwrap() <= v["start_f_a"].as_f64().unwrap());
    }
}
