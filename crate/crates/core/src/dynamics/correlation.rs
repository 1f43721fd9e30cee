//! Normalized two-time intensity correlations via the quantum regression
//! theorem.

use rayon::prelude::*;

use super::evolve::{propagate_and_observe, EvolveOptions};
use crate::error::{invalid, Error, Result};
use crate::quantum::{expectation, DensityState, OpenSystem, Operator};
use crate::spectrum::{SeriesKind, SpectrumSeries};

/// `g²(τ) = Tr[J_d†J_d e^{𝓛τ}(J_e ρ J_e†)] / (⟨J_d†J_d⟩⟨J_e†J_e⟩)`.
///
/// `tau_grid` must start at a non-negative value and be strictly increasing.
pub fn g2_correlation(
    sys: &OpenSystem,
    rho_ss: &DensityState,
    jump_emit: &Operator,
    jump_detect: &Operator,
    tau_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<SpectrumSeries> {
    let n = sys.dim();
    for (name, d) in [
        ("rho_ss", rho_ss.dim()),
        ("jump_emit", jump_emit.dim()),
        ("jump_detect", jump_detect.dim()),
    ] {
        if d != n {
            log::error!("{name} has dimension {d}, system has {n}");
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    if tau_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(invalid("tau_grid", "delays must be >= 0"));
    }
    if let Some(k) = (1..tau_grid.len()).find(|&k| tau_grid[k] <= tau_grid[k - 1]) {
        return Err(invalid("tau_grid", format!("not strictly increasing at index {k}")));
    }
    let n_d = &jump_detect.adjoint() * jump_detect;
    let n_e = &jump_emit.adjoint() * jump_emit;
    let rate_d = expectation(&n_d, rho_ss)?.re;
    let rate_e = expectation(&n_e, rho_ss)?.re;
    let denom = rate_d * rate_e;
    if !(denom > f64::MIN_POSITIVE) || rate_d <= 1e-300 || rate_e <= 1e-300 {
        return Err(Error::NoEmission(format!(
            "steady-state emission rates {rate_e:e} (emit) and {rate_d:e} (detect)"
        )));
    }
    let jm = jump_emit.matrix();
    let x0 = jm * rho_ss.matrix() * jm.adjoint();
    let values = propagate_and_observe(sys, &x0, &n_d, tau_grid, opts)?;
    let points = tau_grid
        .iter()
        .zip(values)
        .map(|(&t, v)| (t, v.re / denom))
        .collect();
    SpectrumSeries::new("g2", SeriesKind::Correlation, points)
}

/// Auto (`emit`, `emit`) and cross (`emit`, `other`) correlations computed
/// in parallel.
pub fn g2_auto_cross(
    sys: &OpenSystem,
    rho_ss: &DensityState,
    emit: &Operator,
    other: &Operator,
    tau_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<(SpectrumSeries, SpectrumSeries)> {
    let pairs = [(emit, emit, "g2_auto"), (emit, other, "g2_cross")];
    let mut out: Vec<SpectrumSeries> = pairs
        .par_iter()
        .map(|&(e, d, label)| {
            g2_correlation(sys, rho_ss, e, d, tau_grid, opts).map(|mut s| {
                s.label = label.to_string();
                s
            })
        })
        .collect::<Result<_>>()?;
    let cross = out.pop().expect("two series");
    let auto = out.pop().expect("two series");
    Ok((auto, cross))
}
