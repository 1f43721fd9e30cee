use crate::error::{invalid, Result};
use crate::spectrum::SpectrumSeries;

use super::{estimate_peak, FitFlag, FitModel, FitProblem, FitResult, FreeParam, MinimizeOptions};

/// `amp·(w/2)² / ((x − x₀)² + (w/2)²) + offset`, with `x` in GHz and the
/// full width `fwhm_mhz` in MHz.
pub fn lorentzian(x: f64, amp: f64, center_ghz: f64, fwhm_mhz: f64, offset: f64) -> f64 {
    let hw = 0.5e-3 * fwhm_mhz;
    amp * hw * hw / ((x - center_ghz).powi(2) + hw * hw) + offset
}

/// Fit amplitude, center, FWHM (MHz) and offset of a single line.
pub fn lorentzian_fit(data: &SpectrumSeries) -> Result<FitResult> {
    lorentzian_fit_with(data, &MinimizeOptions::default())
}

pub fn lorentzian_fit_with(data: &SpectrumSeries, opts: &MinimizeOptions) -> Result<FitResult> {
    if data.len() < 5 {
        return Err(invalid("data", format!("need at least 5 points, got {}", data.len())));
    }
    let xs = data.xs();
    let ys = data.values();
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let span = x_hi - x_lo;
    let step = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let range = (y_max - y_min).max(1e-12 * y_max.abs().max(1.0));
    let est = estimate_peak(data);

    // Widths in MHz.
    let w_lo = 0.1e3 * step;
    let w_hi = 2e3 * span;
    let w0 = est.width.map_or(0.25e3 * span, |w| 1e3 * w).clamp(w_lo, w_hi);
    let amp0 = est.height.clamp(-2.0 * range, 2.0 * range);
    let free = vec![
        FreeParam { name: "amplitude".into(), initial: amp0, lower: -2.0 * range, upper: 2.0 * range },
        FreeParam { name: "center_ghz".into(), initial: est.center, lower: x_lo, upper: x_hi },
        FreeParam { name: "fwhm_mhz".into(), initial: w0, lower: w_lo, upper: w_hi },
        FreeParam {
            name: "offset".into(),
            initial: est.baseline.clamp(y_min - range, y_max + range),
            lower: y_min - range,
            upper: y_max + range,
        },
    ];
    let problem = FitProblem { model: FitModel::Lorentzian, data: data.clone(), free, fixed: vec![] };
    let mut result = problem.solve(&[], opts)?;
    let amp = result.get("amplitude").unwrap_or(0.0);
    if y_max - y_min <= 1e-12 * y_max.abs().max(1.0) || amp.abs() <= 1e-9 * range {
        log::warn!("flat data: Lorentzian center is undetermined");
        result.flag(FitFlag::DegenerateCenter);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SeriesKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synthetic(amp: f64, center: f64, fwhm: f64, offset: f64) -> SpectrumSeries {
        let pts = (0..161)
            .map(|k| {
                let x = -0.4 + 0.005 * k as f64;
                (x, lorentzian(x, amp, center, fwhm, offset))
            })
            .collect();
        SpectrumSeries::new("ple", SeriesKind::Ple, pts).unwrap()
    }

    #[test]
    fn half_width_at_half_maximum() {
        assert!((lorentzian(0.0, 2.0, 0.0, 100.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((lorentzian(0.05, 2.0, 0.0, 100.0, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_round_trip() {
        let r = lorentzian_fit(&synthetic(3.0, 0.02, 54.3, 0.5)).unwrap();
        assert!(r.converged);
        assert!((r.get("fwhm_mhz").unwrap() / 54.3 - 1.0).abs() < 1e-3);
        assert!((r.get("center_ghz").unwrap() - 0.02).abs() < 1e-6);
        assert!((r.get("amplitude").unwrap() / 3.0 - 1.0).abs() < 1e-3);
        assert!((r.get("offset").unwrap() - 0.5).abs() < 1e-4);
    }

    #[test]
    fn flat_data_flags_center() {
        let r = lorentzian_fit(&synthetic(0.0, 0.0, 50.0, 1.0)).unwrap();
        assert!(r.converged);
        assert!(r.get("amplitude").unwrap().abs() < 1e-9);
        assert!(r.has_flag(FitFlag::DegenerateCenter));
    }

    #[test]
    fn too_few_points() {
        let s = SpectrumSeries::new("s", SeriesKind::Ple, vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!(lorentzian_fit(&s).is_err());
    }

    #[test]
    fn noisy_monte_carlo() {
        let clean = synthetic(1.0, 0.0, 54.3, 0.0);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut errors: Vec<f64> = (0..50)
            .map(|_| {
                let pts = clean.points().iter().map(|&(x, y)| (x, y + noise.sample(&mut rng))).collect();
                let s = SpectrumSeries::new("noisy", SeriesKind::Ple, pts).unwrap();
                (lorentzian_fit(&s).unwrap().get("fwhm_mhz").unwrap() / 54.3 - 1.0).abs()
            })
            .collect();
        errors.sort_by(f64::total_cmp);
        assert!(errors[25] < 0.03, "median error {}", errors[25]);
    }

    #[test]
    fn deterministic() {
        let s = synthetic(3.0, 0.02, 54.3, 0.5);
        assert_eq!(lorentzian_fit(&s).unwrap(), lorentzian_fit(&s).unwrap());
    }
}
