//! Least-squares fits of the spectral models.
//!
//! The DIT fit is staged: a wide scan fixes the cavity and Fano background
//! ([`fano_cavity_fit`]), then the close scan around the emitters is fit with
//! those values held ([`dit_fit`]).

mod dit_fit;
mod fano;
mod lorentzian;
pub mod nelder_mead;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectrum::{SeriesKind, SpectrumSeries};

pub use dit_fit::{dit_fit, dit_fit_with, DitFitInputs};
pub use fano::{fano_cavity_fit, fano_cavity_fit_with};
pub use lorentzian::{lorentzian, lorentzian_fit, lorentzian_fit_with};
pub use nelder_mead::{minimize, Bounds, MinimizeOptions, MinimizeOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Lorentzian,
    FanoCavity,
    DitFull,
}

const LORENTZIAN_PARAMS: &[&str] = &["amplitude", "center_ghz", "fwhm_mhz", "offset"];
const FANO_PARAMS: &[&str] = &[
    "omega0_ghz",
    "kappa_ghz",
    "kappa_c_fraction",
    "kappa_d_fraction",
    "alpha_port",
    "amp_a",
    "amp_b",
    "offset_c",
    "phase_rho",
];
const DIT_PARAMS: &[&str] = &[
    "omega0_ghz",
    "kappa_ghz",
    "kappa_c_fraction",
    "kappa_d_fraction",
    "alpha_port",
    "amp_a",
    "amp_b",
    "offset_c",
    "phase_rho",
    "delta_ghz",
    "detuning_ghz",
    "g1_ghz",
    "g2_ghz",
    "gamma1_ghz",
    "gamma2_ghz",
    "theta",
    "phi",
];

impl FitModel {
    /// Every parameter the model reads, in evaluation order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Lorentzian => LORENTZIAN_PARAMS,
            FitModel::FanoCavity => FANO_PARAMS,
            FitModel::DitFull => DIT_PARAMS,
        }
    }

    /// Model value at `x` (GHz offset) given values ordered as [`Self::param_names`].
    pub fn evaluate(self, values: &[f64], x: f64) -> Result<f64> {
        match self {
            FitModel::Lorentzian => Ok(lorentzian(x, values[0], values[1], values[2], values[3])),
            FitModel::FanoCavity => fano::evaluate(values, x),
            FitModel::DitFull => dit_fit::evaluate(values, x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub name: String,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Conditions worth reporting next to the fitted values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFlag {
    /// The optimizer never improved on the starting point.
    NoProgress,
    /// Flat data: the line center carries no information.
    DegenerateCenter,
    RhoUnidentifiable,
    ThetaUnidentifiable,
    PhiUnidentifiable,
    AlphaPortAtBound,
    /// Emitter labels were swapped to put the lower-frequency emitter first.
    EmittersRelabeled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProblem {
    pub model: FitModel,
    pub data: SpectrumSeries,
    pub free: Vec<FreeParam>,
    pub fixed: Vec<NamedValue>,
}

impl FitProblem {
    pub fn validate(&self) -> Result<()> {
        let names = self.model.param_names();
        let mut seen = vec![0usize; names.len()];
        let assigned = self
            .free
            .iter()
            .map(|p| p.name.as_str())
            .chain(self.fixed.iter().map(|p| p.name.as_str()));
        for name in assigned {
            let k = names
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| invalid("params", format!("unknown parameter {name}")))?;
            seen[k] += 1;
        }
        if let Some(k) = seen.iter().position(|&c| c != 1) {
            return Err(invalid(
                "params",
                format!("{} must be assigned exactly once (found {})", names[k], seen[k]),
            ));
        }
        for p in &self.free {
            if !(p.lower <= p.initial && p.initial <= p.upper) {
                return Err(invalid("params", format!("{} starts outside its bounds", p.name)));
            }
        }
        if self.fixed.iter().any(|p| !p.value.is_finite()) {
            return Err(invalid("params", "fixed values must be finite"));
        }
        Ok(())
    }

    fn bounds(&self) -> Result<Bounds> {
        Bounds::new(
            self.free.iter().map(|p| p.lower).collect(),
            self.free.iter().map(|p| p.upper).collect(),
        )
    }

    /// Full parameter vector in model order for the free values `x`.
    fn assemble(&self, x: &[f64]) -> Vec<f64> {
        self.model
            .param_names()
            .iter()
            .map(|name| {
                self.free
                    .iter()
                    .position(|p| p.name == *name)
                    .map(|k| x[k])
                    .or_else(|| self.fixed.iter().find(|p| p.name == *name).map(|p| p.value))
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    fn residuals(&self, x: &[f64]) -> Option<Vec<f64>> {
        let values = self.assemble(x);
        self.data
            .points()
            .iter()
            .map(|&(f, y)| {
                self.model
                    .evaluate(&values, f)
                    .ok()
                    .filter(|m| m.is_finite())
                    .map(|m| m - y)
            })
            .collect()
    }

    fn sum_of_squares(&self, x: &[f64]) -> f64 {
        self.residuals(x)
            .map(|r| r.iter().map(|v| v * v).sum())
            .unwrap_or(f64::INFINITY)
    }

    /// Solve from each starting point (free values in `free` order) and keep
    /// the lowest objective. The first start is the one stored in `free`.
    pub fn solve(&self, extra_starts: &[Vec<f64>], opts: &MinimizeOptions) -> Result<FitResult> {
        self.validate()?;
        let bounds = self.bounds()?;
        let x0: Vec<f64> = self.free.iter().map(|p| p.initial).collect();
        let f0 = self.sum_of_squares(&x0);
        let mut best: Option<MinimizeOutcome> = None;
        let mut iterations = 0;
        for start in std::iter::once(&x0).chain(extra_starts) {
            let mut s = start.clone();
            bounds.clip(&mut s);
            let out = minimize(|x| self.sum_of_squares(x), &s, &bounds, opts)?;
            iterations += out.iterations;
            if best.as_ref().is_none_or(|b| out.f < b.f) {
                best = Some(out);
            }
        }
        let best = best.expect("at least one start");
        if !best.f.is_finite() {
            return Err(Error::Fit("model could not be evaluated at any start".into()));
        }
        let mut flags = Vec::new();
        if !(best.f < f0) {
            flags.push(FitFlag::NoProgress);
        }
        Ok(FitResult {
            model: self.model,
            params: self
                .free
                .iter()
                .zip(&best.x)
                .map(|(p, &v)| FittedParam {
                    name: p.name.clone(),
                    value: v,
                    lower: p.lower,
                    upper: p.upper,
                })
                .collect(),
            fixed: self.fixed.clone(),
            residual_norm: best.f.sqrt(),
            initial_residual_norm: f0.sqrt(),
            iterations,
            converged: best.converged,
            covariance_proxy: self.covariance(&best.x),
            flags,
        })
    }

    /// `s² (JᵀJ)⁻¹` from a central-difference Jacobian of the residuals.
    fn covariance(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        let n = x.len();
        let m = self.data.len();
        if m <= n {
            return None;
        }
        let r0 = self.residuals(x)?;
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let p = &self.free[j];
            let h = 1e-6 * x[j].abs().max(1e-3 * (p.upper - p.lower).min(1.0)).max(1e-9);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let rp = self.residuals(&xp)?;
            let rm = self.residuals(&xm)?;
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let s2 = r0.iter().map(|v| v * v).sum::<f64>() / (m - n) as f64;
        let inv = (jac.transpose() * &jac).try_inverse()?;
        if inv.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((0..n).map(|i| (0..n).map(|j| s2 * inv[(i, j)]).collect()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParam {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Free parameters at the optimum, with their declared bounds.
    pub params: Vec<FittedParam>,
    pub fixed: Vec<NamedValue>,
    pub residual_norm: f64,
    pub initial_residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Rows and columns follow `params`.
    pub covariance_proxy: Option<Vec<Vec<f64>>>,
    pub flags: Vec<FitFlag>,
}

impl FitResult {
    /// Look up a free or fixed parameter.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
            .or_else(|| self.fixed.iter().find(|p| p.name == name).map(|p| p.value))
    }

    pub fn has_flag(&self, flag: FitFlag) -> bool {
        self.flags.contains(&flag)
    }

    fn set(&mut self, name: &str, value: f64) {
        if let Some(p) = self.params.iter_mut().find(|p| p.name == name) {
            p.value = value;
        } else if let Some(p) = self.fixed.iter_mut().find(|p| p.name == name) {
            p.value = value;
        }
    }

    fn flag(&mut self, flag: FitFlag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    fn values(&self) -> Result<Vec<f64>> {
        self.model
            .param_names()
            .iter()
            .map(|n| self.get(n).ok_or_else(|| Error::Fit(format!("result lacks {n}"))))
            .collect()
    }

    /// Evaluate the fitted model at a GHz offset.
    pub fn model_value(&self, x: f64) -> Result<f64> {
        self.model.evaluate(&self.values()?, x)
    }

    /// Rows `(freq_offset_ghz, data, model)` for plotting.
    pub fn overlay(&self, data: &SpectrumSeries) -> Result<Vec<(f64, f64, f64)>> {
        let values = self.values()?;
        data.points()
            .iter()
            .map(|&(x, y)| Ok((x, y, self.model.evaluate(&values, x)?)))
            .collect()
    }

    /// The fitted model on the same grid as `data`.
    pub fn model_series(&self, data: &SpectrumSeries) -> Result<SpectrumSeries> {
        let rows = self.overlay(data)?;
        SpectrumSeries::new(
            format!("{:?}_model", self.model).to_lowercase(),
            SeriesKind::Transmission,
            rows.into_iter().map(|(x, _, m)| (x, m)).collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Robust starting values shared by the line-shape fits.
pub(crate) struct PeakEstimate {
    pub baseline: f64,
    pub height: f64,
    pub center: f64,
    /// Full width at half height; `None` when the half level is not crossed
    /// on both sides inside the scan.
    pub width: Option<f64>,
}

pub(crate) fn estimate_peak(data: &SpectrumSeries) -> PeakEstimate {
    let pts = data.points();
    let n = pts.len();
    let edge = (n / 10).max(1);
    let mut edges: Vec<f64> = pts[..edge]
        .iter()
        .chain(&pts[n - edge..])
        .map(|p| p.1)
        .collect();
    edges.sort_by(f64::total_cmp);
    let baseline = edges[edges.len() / 2];
    let (k, height) = pts
        .iter()
        .enumerate()
        .map(|(k, p)| (k, p.1 - baseline))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap_or((0, 0.0));
    let half = height / 2.0;
    let below = |v: f64| (v - baseline) * height.signum() < half.abs();
    let left = (0..k).rev().find(|&j| below(pts[j].1));
    let right = (k + 1..n).find(|&j| below(pts[j].1));
    let width = match (left, right) {
        (Some(l), Some(r)) if height != 0.0 => Some(pts[r].0 - pts[l].0),
        _ => None,
    };
    PeakEstimate {
        baseline,
        height,
        center: pts.get(k).map_or(0.0, |p| p.0),
        width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_problem() -> FitProblem {
        let pts = (0..41)
            .map(|k| {
                let x = -0.2 + 0.01 * k as f64;
                (x, lorentzian(x, 2.0, 0.01, 54.3, 0.1))
            })
            .collect();
        FitProblem {
            model: FitModel::Lorentzian,
            data: SpectrumSeries::new("line", SeriesKind::Ple, pts).unwrap(),
            free: vec![
                FreeParam { name: "amplitude".into(), initial: 1.0, lower: 0.0, upper: 10.0 },
                FreeParam { name: "center_ghz".into(), initial: 0.0, lower: -0.2, upper: 0.2 },
                FreeParam { name: "fwhm_mhz".into(), initial: 40.0, lower: 1.0, upper: 400.0 },
            ],
            fixed: vec![NamedValue { name: "offset".into(), value: 0.1 }],
        }
    }

    #[test]
    fn problem_assignment_is_checked() {
        let mut p = line_problem();
        p.validate().unwrap();
        p.fixed.push(NamedValue { name: "amplitude".into(), value: 1.0 });
        assert!(p.validate().is_err());
        let mut p = line_problem();
        p.fixed.clear();
        assert!(p.validate().is_err());
        let mut p = line_problem();
        p.free[0].name = "bogus".into();
        assert!(p.validate().is_err());
    }

    #[test]
    fn solve_reports_within_bounds_and_monotone_residual() {
        let p = line_problem();
        let r = p.solve(&[], &MinimizeOptions::default()).unwrap();
        assert!(r.residual_norm <= r.initial_residual_norm);
        for q in &r.params {
            assert!(q.lower <= q.value && q.value <= q.upper);
        }
        assert!((r.get("fwhm_mhz").unwrap() - 54.3).abs() < 1e-4);
        assert_eq!(r.get("offset"), Some(0.1));
        let cov = r.covariance_proxy.as_ref().unwrap();
        assert_eq!(cov.len(), 3);
    }

    #[test]
    fn result_json_round_trip() {
        let r = line_problem().solve(&[], &MinimizeOptions::default()).unwrap();
        let back: FitResult = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn overlay_matches_data_for_exact_fit() {
        let p = line_problem();
        let r = p.solve(&[], &MinimizeOptions::default()).unwrap();
        for (_, y, m) in r.overlay(&p.data).unwrap() {
            assert!((y - m).abs() < 1e-6);
        }
    }
}
