use std::f64::consts::PI;

use crate::dit::{dit_amplitudes, DitParams};
use crate::error::{invalid, Error, Result};
use crate::spectrum::SpectrumSeries;
use crate::units::{from_ghz, wrap_phase};

use super::{
    estimate_peak, FitFlag, FitModel, FitProblem, FitResult, FreeParam, MinimizeOptions, NamedValue,
};

/// Emitter linewidth placeholder for the bare-cavity model (g = 0).
const BARE_GAMMA: f64 = 1.0;

pub(super) fn cavity_params(v: &[f64]) -> DitParams {
    let kappa = from_ghz(v[1]);
    DitParams {
        omega0: from_ghz(v[0]),
        kappa,
        kappa_c: v[2] * kappa,
        kappa_d: v[3] * kappa,
        alpha_port: v[4],
        g1: 0.0,
        g2: 0.0,
        theta: 0.0,
        phi: 0.0,
        delta: 0.0,
        detuning: 0.0,
        gamma1: BARE_GAMMA,
        gamma2: BARE_GAMMA,
    }
}

pub(super) fn fano_term(t_c: num_complex::Complex64, v: &[f64]) -> f64 {
    (v[5] * t_c + num_complex::Complex64::from_polar(v[6], v[8])).norm_sqr() + v[7]
}

pub(super) fn evaluate(v: &[f64], x: f64) -> Result<f64> {
    let (t_c, _) = dit_amplitudes(from_ghz(x), &cavity_params(v))?;
    Ok(fano_term(t_c, v))
}

/// Peak magnitude of the bare drop-port amplitude for the given port split.
fn bare_peak(device: &DitParams) -> f64 {
    2.0 * (device.alpha_port * device.kappa_c * device.kappa_d).sqrt() / device.kappa
}

/// Fit ω₀, κ, B, C and ρ of the bare-cavity model to a wide scan.
///
/// The bare response is a Lorentzian with a numerator linear in detuning,
/// so `A` cannot be separated from `(B, C, ρ)`; it is held at 1 here and
/// freed again in [`super::dit_fit`]. The port split (κ_c/κ, κ_d/κ, α) is
/// taken from `device`.
pub fn fano_cavity_fit(wide_scan: &SpectrumSeries, device: &DitParams) -> Result<FitResult> {
    fano_cavity_fit_with(wide_scan, device, &MinimizeOptions::default())
}

pub fn fano_cavity_fit_with(
    wide_scan: &SpectrumSeries,
    device: &DitParams,
    opts: &MinimizeOptions,
) -> Result<FitResult> {
    device.validate()?;
    if device.kappa <= 0.0 || device.kappa_c <= 0.0 || device.kappa_d <= 0.0 || device.alpha_port <= 0.0 {
        return Err(invalid("device", "cavity rates and alpha_port must be positive for a cavity fit"));
    }
    if wide_scan.len() < 8 {
        return Err(invalid("wide_scan", format!("need at least 8 points, got {}", wide_scan.len())));
    }
    let xs = wide_scan.xs();
    let ys = wide_scan.values();
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let span = x_hi - x_lo;
    let est = estimate_peak(wide_scan);
    let width = est.width.unwrap_or(span / 4.0);
    let step = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let y_abs = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
    let t_peak = bare_peak(device);
    let b_hi = 3.0 * y_abs.sqrt() + 3.0 * y_abs / t_peak;
    let c_lo = -(b_hi * b_hi + 2.0 * y_abs);

    let fixed = vec![
        NamedValue { name: "kappa_c_fraction".into(), value: device.kappa_c / device.kappa },
        NamedValue { name: "kappa_d_fraction".into(), value: device.kappa_d / device.kappa },
        NamedValue { name: "alpha_port".into(), value: device.alpha_port },
        NamedValue { name: "amp_a".into(), value: 1.0 },
    ];
    let free = vec![
        FreeParam { name: "omega0_ghz".into(), initial: est.center, lower: x_lo, upper: x_hi },
        FreeParam {
            name: "kappa_ghz".into(),
            initial: width.clamp(2.0 * step, 2.0 * span),
            lower: 2.0 * step,
            upper: 2.0 * span,
        },
        FreeParam { name: "amp_b".into(), initial: 0.0, lower: 0.0, upper: b_hi },
        FreeParam {
            name: "offset_c".into(),
            initial: est.baseline.clamp(c_lo, 2.0 * y_abs),
            lower: c_lo,
            upper: 2.0 * y_abs,
        },
        FreeParam { name: "phase_rho".into(), initial: 0.0, lower: -2.0 * PI, upper: 2.0 * PI },
    ];
    let problem = FitProblem { model: FitModel::FanoCavity, data: wide_scan.clone(), free, fixed };

    // Starts with a background share of the baseline at several phases.
    let b0 = est.baseline.max(0.0).sqrt().min(b_hi);
    let mut starts = Vec::new();
    for rho in [-PI / 2.0, 0.0, PI / 2.0, PI] {
        for share in [0.5, 1.0] {
            let b = share * b0;
            starts.push(vec![
                est.center,
                width.clamp(2.0 * step, 2.0 * span),
                b,
                (est.baseline - b * b).clamp(c_lo, 2.0 * y_abs),
                rho,
            ]);
        }
    }
    let mut result = problem.solve(&starts, opts)?;
    let kappa = result.get("kappa_ghz").unwrap_or(f64::INFINITY);
    if span < 3.0 * kappa {
        return Err(Error::Fit(format!(
            "span too narrow: {span:.4} GHz covers fewer than 3 linewidths of {kappa:.4} GHz"
        )));
    }
    let rho = result.get("phase_rho").unwrap_or(0.0);
    result.set("phase_rho", wrap_phase(rho));
    if result.get("amp_b").unwrap_or(0.0) <= 1e-3 * t_peak {
        result.flag(FitFlag::RhoUnidentifiable);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dit::{spectrum_sweep, FanoParams};
    use crate::units::mod_pi;

    fn device() -> DitParams {
        let mut p = DitParams::default();
        p.g1 = 0.0;
        p.g2 = 0.0;
        p.omega0 = from_ghz(0.3);
        p.kappa = from_ghz(2.8);
        p.kappa_c = 0.3 * p.kappa;
        p.kappa_d = 0.2 * p.kappa;
        p.alpha_port = 0.5;
        p
    }

    fn scan(p: &DitParams, f: &FanoParams, half_span: f64) -> SpectrumSeries {
        let grid: Vec<f64> = (0..401).map(|k| -half_span + 2.0 * half_span * k as f64 / 400.0).collect();
        spectrum_sweep(&grid, p, f).unwrap()
    }

    #[test]
    fn bare_cavity_round_trip() {
        let p = device();
        let r = fano_cavity_fit(&scan(&p, &FanoParams::new(1.0, 0.0, 0.01, 0.0), 10.0), &p).unwrap();
        assert!((r.get("kappa_ghz").unwrap() / 2.8 - 1.0).abs() < 0.01);
        assert!((r.get("omega0_ghz").unwrap() - 0.3).abs() < 1e-4);
        assert_eq!(r.get("amp_a"), Some(1.0));
        assert!(r.get("amp_b").unwrap() < 1e-3);
        assert!(r.has_flag(FitFlag::RhoUnidentifiable));
    }

    #[test]
    fn fano_background_round_trip() {
        let p = device();
        let truth = FanoParams::new(1.0, 0.3, 0.02, 1.1);
        let r = fano_cavity_fit(&scan(&p, &truth, 10.0), &p).unwrap();
        for (name, want) in [("kappa_ghz", 2.8), ("amp_b", 0.3), ("offset_c", 0.02)] {
            let got = r.get(name).unwrap();
            assert!((got / want - 1.0).abs() < 0.02, "{name}: {got} vs {want}");
        }
        let rho = r.get("phase_rho").unwrap();
        let d = (mod_pi(rho) - mod_pi(1.1)).abs();
        assert!(d.min(PI - d) < 0.02 * PI, "rho {rho}");
        assert!(!r.has_flag(FitFlag::RhoUnidentifiable));
    }

    #[test]
    fn narrow_span_rejected() {
        let p = device();
        let s = scan(&p, &FanoParams::new(1.0, 0.0, 0.0, 0.0), 2.0);
        assert!(matches!(fano_cavity_fit(&s, &p), Err(Error::Fit(_))));
    }

    #[test]
    fn deterministic() {
        let p = device();
        let s = scan(&p, &FanoParams::new(1.0, 0.3, 0.02, 1.1), 10.0);
        assert_eq!(fano_cavity_fit(&s, &p).unwrap(), fano_cavity_fit(&s, &p).unwrap());
    }
}
