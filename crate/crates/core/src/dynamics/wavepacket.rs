//! Directional emission rates `κ⟨a†a⟩(t)` and beat analysis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evolve::Trajectory;
use crate::error::{Error, Result};
use crate::quantum::OperatorSet;
use crate::spectrum::{SeriesKind, SpectrumSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketPair {
    pub cw: SpectrumSeries,
    pub ccw: SpectrumSeries,
}

/// Emission rates into the CW and CCW channels in photons/ns.
pub fn wavepacket(traj: &Trajectory, ops: &OperatorSet) -> Result<WavepacketPair> {
    if traj.dim() != ops.space.dim() {
        return Err(Error::DimensionMismatch {
            expected: ops.space.dim(),
            found: traj.dim(),
        });
    }
    let kappa = ops.params.kappa;
    let series = |label: &str, op| {
        let values = traj.expectation_series(&op);
        let points = traj
            .times()
            .iter()
            .zip(values)
            .map(|(&t, v)| (t, (kappa * v).max(0.0)))
            .collect();
        SpectrumSeries::new(label, SeriesKind::Wavepacket, points)
    };
    Ok(WavepacketPair {
        cw: series("cw", ops.number_cw())?,
        ccw: series("ccw", ops.number_ccw())?,
    })
}

impl WavepacketPair {
    /// Emitted photon number `∫(cw + ccw) dt`.
    pub fn total_photons(&self) -> f64 {
        self.cw.integral() + self.ccw.integral()
    }

    pub fn max_abs_difference(&self) -> f64 {
        self.cw
            .values()
            .iter()
            .zip(self.ccw.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Each series divided by the pair's total area; for comparison with
    /// normalized count histograms.
    pub fn area_normalized(&self) -> Result<WavepacketPair> {
        let total = self.total_photons();
        if !(total > 0.0) {
            return Err(Error::NoEmission("wavepacket has zero area".into()));
        }
        let scale = |s: &SpectrumSeries| {
            SpectrumSeries::new(
                s.label.clone(),
                s.kind,
                s.points().iter().map(|&(t, v)| (t, v / total)).collect(),
            )
        };
        Ok(WavepacketPair {
            cw: scale(&self.cw)?,
            ccw: scale(&self.ccw)?,
        })
    }
}

/// Period of the dominant oscillation in a decaying series.
///
/// The signal after its first local maximum is modelled as a sum of damped
/// complex exponentials and the poles are extracted with the matrix-pencil
/// method (uniformly resampled, SVD-truncated). The period belongs to the
/// oscillating pole with the largest amplitude. Returns `None` when no
/// oscillating component is found.
pub fn beat_period(series: &SpectrumSeries) -> Option<f64> {
    let pts = series.points();
    let start = (1..pts.len().saturating_sub(1)).find(|&k| pts[k].1 > pts[k - 1].1 && pts[k].1 >= pts[k + 1].1)?;
    beat_period_after(series, pts[start].0)
}

/// [`beat_period`] using only samples at `t >= t_start`.
pub fn beat_period_after(series: &SpectrumSeries, t_start: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = series.points().iter().copied().filter(|p| p.0 >= t_start).collect();
    let peak = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if pts.len() < 16 || !(peak > 0.0) {
        return None;
    }
    let end = pts.iter().rposition(|p| p.1.abs() >= 1e-4 * peak)?;
    let pts = &pts[..=end];
    if pts.len() < 16 {
        return None;
    }
    // Uniform resampling by linear interpolation, at most MAX_SAMPLES points.
    const MAX_SAMPLES: usize = 400;
    let n = pts.len().min(MAX_SAMPLES);
    let (t0, t1) = (pts[0].0, pts[pts.len() - 1].0);
    let h = (t1 - t0) / (n - 1) as f64;
    let mut y = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let t = t0 + k as f64 * h;
        while j + 2 < pts.len() && pts[j + 1].0 < t {
            j += 1;
        }
        let (a, b) = (pts[j], pts[j + 1]);
        let w = ((t - a.0) / (b.0 - a.0)).clamp(0.0, 1.0);
        y.push(a.1 + w * (b.1 - a.1));
    }

    let l = n / 3;
    let rows = n - l;
    let hankel = DMatrix::from_fn(rows, l + 1, |i, k| y[i + k]);
    let svd = hankel.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref()?;
    let order = sv.iter().filter(|&&x| x > 1e-8 * sv[0]).count().clamp(1, 10);
    let v = v_t.rows(0, order).transpose();
    let v1 = v.rows(0, l).into_owned();
    let v2 = v.rows(1, l).into_owned();
    let pencil = v1.pseudo_inverse(1e-14).ok()? * v2;
    let z: Vec<Complex64> = pencil.complex_eigenvalues().iter().copied().collect();

    // Amplitudes by least squares on the Vandermonde system.
    let vander = DMatrix::from_fn(n, z.len(), |k, i| z[i].powu(k as u32));
    let rhs = DVector::from_iterator(n, y.iter().map(|&v| Complex64::new(v, 0.0)));
    let amps = vander.svd(true, true).solve(&rhs, 1e-14).ok()?;

    let mut best: Option<(f64, f64)> = None;
    for (zi, ci) in z.iter().zip(amps.iter()) {
        let omega = zi.arg() / h;
        if omega <= 1e-9 || zi.norm() <= 0.0 {
            continue;
        }
        let weight = ci.norm();
        if best.is_none_or(|(w, _)| weight > w) {
            best = Some((weight, std::f64::consts::TAU / omega));
        }
    }
    best.map(|(_, period)| period)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beat_of_synthetic_signal() {
        let period = 2.27;
        let pts: Vec<(f64, f64)> = (0..3000)
            .map(|k| {
                let t = k as f64 * 0.01;
                let v = (-0.25 * t).exp() * (1.0 + 0.6 * (std::f64::consts::TAU * t / period).cos())
                    + 0.3 * (-0.1 * t).exp();
                (t, v)
            })
            .collect();
        let s = SpectrumSeries::new("x", SeriesKind::Wavepacket, pts).unwrap();
        let p = beat_period(&s).unwrap();
        assert!((p - period).abs() / period < 0.01, "{p}");
    }

    #[test]
    fn flat_signal_has_no_beat() {
        let pts: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, (-0.01 * k as f64).exp())).collect();
        let s = SpectrumSeries::new("x", SeriesKind::Wavepacket, pts).unwrap();
        assert!(beat_period(&s).is_none());
    }
}
