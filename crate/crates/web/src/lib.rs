//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Every export returns a JSON string. The `*_json` functions are the plain
//! Rust versions the exports wrap.

use nalgebra::DVector;
use qlike::axioms::audit;
use qlike::gallery::{ks_build, ks_color, peres33, CounterexampleOrder, Example31Order};
use qlike::measures::{pure_state, uniform};
use qlike::orders::order_from_measure;
use qlike::sphere::{piron_path, piron_reach, verify_piron_path, SphereFrame};
use qlike::{Error, LikelihoodOrder, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn north() -> Result<SphereFrame> {
    SphereFrame::new(&DVector::from_vec(vec![0.0, 0.0, 1.0]))
}

/// EW-hop path from `q` to `r`, both given as (colatitude, longitude) about
/// the north pole. An unreachable target is reported, not raised.
pub fn piron_json(q_theta: f64, q_lambda: f64, r_theta: f64, r_lambda: f64) -> Result<Value> {
    let frame = north()?;
    let (q, r) = (
        frame.point(q_theta, q_lambda),
        frame.point(r_theta, r_lambda),
    );
    match piron_path(&frame, &q, &r, 1e-9) {
        Ok(path) => Ok(json!({
            "reachable": true,
            "hops": path.hops(),
            "reach": piron_reach(&frame, &q, &r)?,
            "verified": verify_piron_path(&path, &q, &r, 1e-9),
            "points": path.to_json().points,
        })),
        Err(Error::HopBudgetExceeded { needed, reach, .. }) => {
            Ok(json!({"reachable": false, "needed": needed, "reach": reach, "points": []}))
        }
        Err(e) => Err(e),
    }
}

/// Peres-33 rays in canonical order.
pub fn peres_rays_json() -> Result<Value> {
    Ok(json!(peres33()?.rays))
}

/// Two-color search on Peres-33 with the rays at `dropped` removed.
pub fn ks_json(dropped: &[u32]) -> Result<Value> {
    let all = peres33()?;
    let kept: Vec<usize> = (0..all.rays.len())
        .filter(|i| !dropped.contains(&(*i as u32)))
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput("every ray was dropped".into()));
    }
    let rays: Vec<[f64; 3]> = kept.iter().map(|&i| all.rays[i]).collect();
    let inst = ks_build(&rays, 1e-9)?;
    let col = ks_color(&inst);
    // ks_build re-sorts; map colors back to Peres-33 indices by direction
    let colors: Option<Vec<(usize, bool)>> = col.colors.as_ref().map(|c| {
        inst.rays
            .iter()
            .zip(c)
            .map(|(ray, g)| {
                let parallel = |a: &[f64; 3]| {
                    (a[0] * ray[0] + a[1] * ray[1] + a[2] * ray[2]).abs() > 1.0 - 1e-9
                };
                let idx = all
                    .rays
                    .iter()
                    .position(parallel)
                    .expect("subset of canonical rays");
                (idx, *g)
            })
            .collect()
    });
    Ok(json!({
        "rays": inst.rays.len(),
        "triples": inst.triples.len(),
        "nodes": col.nodes,
        "colorable": colors.is_some(),
        "green": colors.as_ref().map(|c| c.iter().filter(|x| x.1).map(|x| x.0).collect::<Vec<_>>()),
    }))
}

/// Seeded axiom audit of a named order on `R³`.
pub fn audit_json(kind: &str, seed: u64, samples: u64) -> Result<Value> {
    let pole = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let order: Box<dyn LikelihoodOrder> = match kind {
        "example31" => Box::new(Example31Order::with_pole(&pole)?),
        "counterexample" => Box::new(CounterexampleOrder::with_pole(&pole)?),
        "uniform" => Box::new(order_from_measure(uniform(3)?, qlike::tol::EQ_TOL)?),
        "pure" => Box::new(order_from_measure(pure_state(&pole)?, qlike::tol::EQ_TOL)?),
        other => return Err(Error::InvalidInput(format!("unknown order {other:?}"))),
    };
    let report = audit(order.as_ref(), 3, seed, samples)?;
    let rows: Vec<Value> = report
        .axioms
        .iter()
        .map(|a| json!({"axiom": a.axiom, "checked": a.checked, "violations": a.violations, "not_applicable": a.not_applicable}))
        .collect();
    Ok(json!({"order": report.order, "axioms": rows}))
}

fn out(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string())
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn piron(
    q_theta: f64,
    q_lambda: f64,
    r_theta: f64,
    r_lambda: f64,
) -> std::result::Result<String, JsError> {
    out(piron_json(q_theta, q_lambda, r_theta, r_lambda))
}

#[wasm_bindgen]
pub fn peres_rays() -> std::result::Result<String, JsError> {
    out(peres_rays_json())
}

#[wasm_bindgen]
pub fn ks(dropped: Vec<u32>) -> std::result::Result<String, JsError> {
    out(ks_json(&dropped))
}

#[wasm_bindgen]
pub fn audit_order(kind: &str, seed: u32, samples: u32) -> std::result::Result<String, JsError> {
    out(audit_json(kind, seed as u64, samples as u64))
}
