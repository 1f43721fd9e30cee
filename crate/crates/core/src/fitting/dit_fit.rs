use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dit::{dit_amplitudes, DitParams};
use crate::error::{invalid, Error, Result};
use crate::spectrum::SpectrumSeries;
use crate::units::{from_ghz, mod_pi};

use super::fano::{cavity_params, fano_term};
use super::{FitFlag, FitModel, FitProblem, FitResult, FreeParam, MinimizeOptions, NamedValue};

/// Emitter inputs held fixed in the DIT fit, as ordinary frequencies in GHz.
/// `delta_ghz` and `detuning_ghz` come from line fits of the excitation
/// spectra; couplings from lifetime measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DitFitInputs {
    pub delta_ghz: f64,
    pub detuning_ghz: f64,
    pub g1_ghz: f64,
    pub g2_ghz: f64,
    /// Total emitter linewidths (FWHM).
    pub gamma1_ghz: f64,
    pub gamma2_ghz: f64,
}

impl DitFitInputs {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("delta_ghz", self.delta_ghz), ("detuning_ghz", self.detuning_ghz)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        for (name, v) in [("g1_ghz", self.g1_ghz), ("g2_ghz", self.g2_ghz)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        for (name, v) in [("gamma1_ghz", self.gamma1_ghz), ("gamma2_ghz", self.gamma2_ghz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "linewidths must be > 0 when fitting"));
            }
        }
        Ok(())
    }

    /// Same physical pair with the emitter labels exchanged.
    fn relabeled(&self) -> Self {
        Self {
            delta_ghz: -self.delta_ghz,
            detuning_ghz: self.detuning_ghz,
            g1_ghz: self.g2_ghz,
            g2_ghz: self.g1_ghz,
            gamma1_ghz: self.gamma2_ghz,
            gamma2_ghz: self.gamma1_ghz,
        }
    }

    fn is_label_symmetric(&self) -> bool {
        self.delta_ghz == 0.0 && self.g1_ghz == self.g2_ghz && self.gamma1_ghz == self.gamma2_ghz
    }
}

pub(super) fn device_params(v: &[f64]) -> DitParams {
    DitParams {
        delta: from_ghz(v[9]),
        detuning: from_ghz(v[10]),
        g1: from_ghz(v[11]),
        g2: from_ghz(v[12]),
        gamma1: from_ghz(v[13]),
        gamma2: from_ghz(v[14]),
        theta: v[15],
        phi: v[16],
        ..cavity_params(v)
    }
}

pub(super) fn evaluate(v: &[f64], x: f64) -> Result<f64> {
    let (t_c, _) = dit_amplitudes(from_ghz(x), &device_params(v))?;
    Ok(fano_term(t_c, v))
}

const FROM_FANO: &[&str] = &[
    "omega0_ghz",
    "kappa_ghz",
    "kappa_c_fraction",
    "kappa_d_fraction",
    "amp_b",
    "offset_c",
    "phase_rho",
];

/// Fit θ, φ, α and A to a close scan around the emitters, holding the cavity
/// and background from `fano` and the emitter inputs fixed.
///
/// Emitters are relabeled when needed so that emitter 1 is the lower one
/// (`delta_ghz ≥ 0`); phases are reported in `[0, π)`.
pub fn dit_fit(close_scan: &SpectrumSeries, fano: &FitResult, inputs: &DitFitInputs) -> Result<FitResult> {
    dit_fit_with(close_scan, fano, inputs, &MinimizeOptions::default())
}

pub fn dit_fit_with(
    close_scan: &SpectrumSeries,
    fano: &FitResult,
    inputs: &DitFitInputs,
    opts: &MinimizeOptions,
) -> Result<FitResult> {
    if fano.model != FitModel::FanoCavity {
        return Err(Error::Fit("the DIT fit needs a cavity/Fano fit of the wide scan first".into()));
    }
    inputs.validate()?;
    if close_scan.len() < 8 {
        return Err(invalid("close_scan", format!("need at least 8 points, got {}", close_scan.len())));
    }
    let relabel = inputs.delta_ghz < 0.0;
    let inputs = if relabel { inputs.relabeled() } else { *inputs };

    let mut fixed = FROM_FANO
        .iter()
        .map(|name| {
            fano.get(name)
                .map(|value| NamedValue { name: (*name).into(), value })
                .ok_or_else(|| Error::Fit(format!("cavity fit lacks {name}")))
        })
        .collect::<Result<Vec<_>>>()?;
    for (name, value) in [
        ("delta_ghz", inputs.delta_ghz),
        ("detuning_ghz", inputs.detuning_ghz),
        ("g1_ghz", inputs.g1_ghz),
        ("g2_ghz", inputs.g2_ghz),
        ("gamma1_ghz", inputs.gamma1_ghz),
        ("gamma2_ghz", inputs.gamma2_ghz),
    ] {
        fixed.push(NamedValue { name: name.into(), value });
    }

    let alpha_fano = fano.get("alpha_port").unwrap_or(0.5);
    let a_fano = fano.get("amp_a").unwrap_or(1.0);
    // Off the emitter lines the drop amplitude scales as A·√α.
    let amp_for = |alpha: f64| a_fano * (alpha_fano / alpha).sqrt();
    let a_hi = 10.0 * amp_for(0.05);
    let free = vec![
        FreeParam { name: "theta".into(), initial: PI / 4.0, lower: -PI / 2.0, upper: 1.5 * PI },
        FreeParam { name: "phi".into(), initial: PI / 4.0, lower: -PI / 2.0, upper: 1.5 * PI },
        FreeParam { name: "alpha_port".into(), initial: 0.5, lower: 0.0, upper: 1.0 },
        FreeParam { name: "amp_a".into(), initial: amp_for(0.5), lower: 0.0, upper: a_hi },
    ];
    let problem = FitProblem { model: FitModel::DitFull, data: close_scan.clone(), free, fixed };

    let theta_free = inputs.g1_ghz > 0.0;
    let phi_free = inputs.g2_ghz > 0.0;
    let phase_starts: &[f64] = &[PI / 8.0, 3.0 * PI / 8.0, 5.0 * PI / 8.0, 7.0 * PI / 8.0];
    let thetas = if theta_free { phase_starts } else { &phase_starts[..1] };
    let phis = if phi_free { phase_starts } else { &phase_starts[..1] };
    let mut starts = Vec::new();
    for &t in thetas {
        for &p in phis {
            for alpha in [0.25, 0.75] {
                starts.push(vec![t, p, alpha, amp_for(alpha)]);
            }
        }
    }
    let mut result = problem.solve(&starts, opts)?;

    let mut theta = mod_pi(result.get("theta").unwrap_or(0.0));
    let mut phi = mod_pi(result.get("phi").unwrap_or(0.0));
    if inputs.is_label_symmetric() && theta > phi {
        std::mem::swap(&mut theta, &mut phi);
    }
    result.set("theta", theta);
    result.set("phi", phi);
    let alpha = result.get("alpha_port").unwrap_or(0.5);
    if alpha <= 1e-6 || alpha >= 1.0 - 1e-6 {
        log::warn!("alpha_port pinned at a bound ({alpha})");
        result.flag(FitFlag::AlphaPortAtBound);
    }
    if !theta_free {
        result.flag(FitFlag::ThetaUnidentifiable);
    }
    if !phi_free {
        result.flag(FitFlag::PhiUnidentifiable);
    }
    if relabel {
        result.flag(FitFlag::EmittersRelabeled);
    }
    Ok(result)
}
