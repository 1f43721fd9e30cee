use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Rates of the two-step decay of a doubly excited pair after a first CW
/// photon. All rates share the unit of `gamma_prop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub phi: f64,
    pub gamma_prop: f64,
    pub forward_rate_from_pair: f64,
    pub backward_rate_from_pair: f64,
    pub p_same_direction: f64,
    pub p_opposite_direction: f64,
}

pub fn cascade_rates(phi: f64, gamma_prop: f64) -> Result<CascadeResult> {
    if !(gamma_prop > 0.0 && gamma_prop.is_finite()) {
        return Err(invalid("gamma_prop", format!("must be > 0, got {gamma_prop}")));
    }
    if !phi.is_finite() {
        return Err(invalid("phi", "must be finite"));
    }
    let c2 = phi.cos().powi(2);
    let forward = 2.0 * gamma_prop;
    let backward = forward * c2;
    let p_opposite = c2 / (1.0 + c2);
    Ok(CascadeResult {
        phi,
        gamma_prop,
        forward_rate_from_pair: forward,
        backward_rate_from_pair: backward,
        p_same_direction: 1.0 - p_opposite,
        p_opposite_direction: p_opposite,
    })
}

/// Ideal-emitter prediction for `g²_cross(0) / g²_auto(0)`.
pub fn cross_auto_ratio(phi: f64) -> f64 {
    phi.cos().powi(2)
}
