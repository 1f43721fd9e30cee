//! Dipole-induced transparency in the drop-port geometry.
//!
//! A scattering defect drives the port mode `D = √α a_cw + √(1−α) a_ccw`;
//! light is collected from the bus waveguide in the CW (`c`) and CCW (`b`)
//! output channels. The closed forms below are checked against a direct
//! solve of the frequency-domain Heisenberg–Langevin equations
//! ([`numeric_steady_state_oracle`]).

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::DeviceParams;
use crate::spectrum::{SeriesKind, SpectrumSeries};
use crate::units::{from_ghz, wrap_phase};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear-response parameters. Angular rates in rad/ns; `gamma1`/`gamma2`
/// are total emitter linewidths (FWHM, decay plus dephasing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitParams {
    pub omega0: f64,
    pub kappa: f64,
    pub kappa_c: f64,
    pub kappa_d: f64,
    pub alpha_port: f64,
    pub g1: f64,
    pub g2: f64,
    pub theta: f64,
    pub phi: f64,
    pub delta: f64,
    pub detuning: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl From<&DeviceParams> for DitParams {
    fn from(d: &DeviceParams) -> Self {
        Self {
            omega0: d.omega0,
            kappa: d.kappa,
            kappa_c: d.kappa_c,
            kappa_d: d.kappa_d,
            alpha_port: d.alpha_port,
            g1: d.g1,
            g2: d.g2,
            theta: d.theta,
            phi: d.phi,
            delta: d.delta,
            detuning: d.detuning,
            gamma1: d.gamma1 + d.gamma_d1,
            gamma2: d.gamma2 + d.gamma_d2,
        }
    }
}

impl Default for DitParams {
    fn default() -> Self {
        Self::from(&DeviceParams::default())
    }
}

impl DitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("kappa_c", self.kappa_c),
            ("kappa_d", self.kappa_d),
            ("g1", self.g1),
            ("g2", self.g2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("rate must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha_port) {
            return Err(invalid("alpha_port", format!("{} is outside [0, 1]", self.alpha_port)));
        }
        if self.kappa + 1e-12 * self.kappa < self.kappa_c + self.kappa_d {
            return Err(invalid("kappa", "total decay must be at least kappa_c + kappa_d"));
        }
        Ok(())
    }

    /// Absolute (offset) frequencies of emitters 1 and 2.
    pub fn emitter_frequencies(&self) -> (f64, f64) {
        (
            self.omega0 + self.detuning - self.delta / 2.0,
            self.omega0 + self.detuning + self.delta / 2.0,
        )
    }

    /// Coupling coefficients G₁ = g₁e^{−iθ}/√2, G₂ = g₂e^{−iφ}/√2.
    pub fn couplings(&self) -> (Complex64, Complex64) {
        (
            Complex64::from_polar(self.g1 * FRAC_1_SQRT_2, -self.theta),
            Complex64::from_polar(self.g2 * FRAC_1_SQRT_2, -self.phi),
        )
    }
}

/// Fano background: `T = |A t_c + B e^{iρ}|² + C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    pub amp_a: f64,
    pub amp_b: f64,
    pub offset_c: f64,
    phase_rho: f64,
}

impl FanoParams {
    pub fn new(amp_a: f64, amp_b: f64, offset_c: f64, phase_rho: f64) -> Self {
        Self {
            amp_a,
            amp_b,
            offset_c,
            phase_rho: wrap_phase(phase_rho),
        }
    }

    /// Pure cavity response: A = 1, B = C = 0.
    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub fn phase_rho(&self) -> f64 {
        self.phase_rho
    }
}

impl Default for FanoParams {
    fn default() -> Self {
        Self::identity()
    }
}

/// (Γ₁(ω), Γ₂(ω)) with Γⱼ = −i(ω − ωⱼ) + γⱼ/2.
pub fn gamma_factors(omega: f64, p: &DitParams) -> (Complex64, Complex64) {
    let (w1, w2) = p.emitter_frequencies();
    (
        Complex64::new(p.gamma1 / 2.0, -(omega - w1)),
        Complex64::new(p.gamma2 / 2.0, -(omega - w2)),
    )
}

/// Closed-form drop-port amplitudes `(t_c, t_b)` at angular frequency `omega`.
pub fn dit_amplitudes(omega: f64, p: &DitParams) -> Result<(Complex64, Complex64)> {
    let (gam1, gam2) = gamma_factors(omega, p);
    let (c1, c2) = p.couplings();
    let psi_plus = c1 * c1 * gam2 + c2 * c2 * gam1;
    let psi_minus = c1.conj() * c1.conj() * gam2 + c2.conj() * c2.conj() * gam1;
    let cavity = Complex64::new(p.kappa / 2.0, -(omega - p.omega0));
    let big_phi = cavity * gam1 * gam2 + c1.norm_sqr() * gam2 + c2.norm_sqr() * gam1;

    let den = big_phi * big_phi - psi_plus * psi_minus;
    let scale = big_phi.norm_sqr() + (psi_plus * psi_minus).norm();
    if !(den.norm() > 1e-13 * scale) {
        return Err(Error::Pole {
            omega,
            magnitude: den.norm(),
        });
    }
    let pre = gam1 * gam2 * (p.kappa_d * p.kappa_c).sqrt() / den;
    let sa = p.alpha_port.sqrt();
    let sb = (1.0 - p.alpha_port).sqrt();
    let t_c = pre * (sb * psi_plus - sa * big_phi);
    let t_b = pre * (sa * psi_minus - sb * big_phi);
    Ok((t_c, t_b))
}

/// `|A t_c + B e^{iρ}|² + C`.
pub fn dit_transmission(omega: f64, p: &DitParams, f: &FanoParams) -> Result<f64> {
    let (t_c, _) = dit_amplitudes(omega, p)?;
    Ok((f.amp_a * t_c + Complex64::from_polar(f.amp_b, f.phase_rho)).norm_sqr() + f.offset_c)
}

/// Evaluate the transmission on a grid of frequency offsets in GHz.
pub fn spectrum_sweep(grid_ghz: &[f64], p: &DitParams, f: &FanoParams) -> Result<SpectrumSeries> {
    p.validate()?;
    if let Some(k) = (1..grid_ghz.len()).find(|&k| grid_ghz[k] <= grid_ghz[k - 1]) {
        return Err(invalid("grid", format!("not strictly increasing at index {k}")));
    }
    let values = grid_ghz
        .par_iter()
        .map(|&x| dit_transmission(from_ghz(x), p, f))
        .collect::<Result<Vec<f64>>>()?;
    SpectrumSeries::new(
        "dit_transmission",
        SeriesKind::Transmission,
        grid_ghz.iter().copied().zip(values).collect(),
    )
}

/// Solve the four coupled frequency-domain equations for ⟨a_cw⟩, ⟨a_ccw⟩,
/// ⟨σ₁⟩, ⟨σ₂⟩ under a unit drive entering the CW and CCW modes with
/// amplitudes `drive = (u, v)`. Returns `(√κ_c⟨a_cw⟩, √κ_c⟨a_ccw⟩)`.
pub fn numeric_response_with_drive(
    omega: f64,
    p: &DitParams,
    drive: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    let (gam1, gam2) = gamma_factors(omega, p);
    let (c1, c2) = p.couplings();
    let k = Complex64::new(p.kappa / 2.0, -(omega - p.omega0));
    let zero = Complex64::new(0.0, 0.0);
    #[rustfmt::skip]
    let m = Matrix4::new(
        k,              zero,     I * c1,        I * c2,
        zero,           k,        I * c1.conj(), I * c2.conj(),
        I * c1.conj(),  I * c1,   gam1,          zero,
        I * c2.conj(),  I * c2,   zero,          gam2,
    );
    let rhs = Vector4::new(-drive.0, -drive.1, zero, zero);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("Heisenberg system at omega = {omega}")))?;
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular(format!("Heisenberg system at omega = {omega}")));
    }
    let skc = p.kappa_c.sqrt();
    Ok((skc * x[0], skc * x[1]))
}

/// Direct linear solve of the Heisenberg equations with the port drive
/// `√(α κ_d)` into CW and `√((1−α) κ_d)` into CCW.
pub fn numeric_steady_state_oracle(omega: f64, p: &DitParams) -> Result<(Complex64, Complex64)> {
    let u = Complex64::new((p.alpha_port * p.kappa_d).sqrt(), 0.0);
    let v = Complex64::new(((1.0 - p.alpha_port) * p.kappa_d).sqrt(), 0.0);
    numeric_response_with_drive(omega, p, (u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::from_ghz;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bare() -> DitParams {
        DitParams {
            g1: 0.0,
            g2: 0.0,
            ..Default::default()
        }
    }

    fn rel_err(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / (b.norm() + 1e-12)
    }

    pub(crate) fn random_params(rng: &mut ChaCha8Rng) -> DitParams {
        let kappa = rng.random_range(1.0..30.0);
        let kc = rng.random_range(0.0..0.5) * kappa;
        let kd = rng.random_range(0.0..0.5) * kappa;
        DitParams {
            omega0: rng.random_range(-5.0..5.0),
            kappa,
            kappa_c: kc,
            kappa_d: kd,
            alpha_port: rng.random_range(0.0..=1.0),
            g1: rng.random_range(0.0..5.0),
            g2: rng.random_range(0.0..5.0),
            theta: rng.random_range(-3.2..3.2),
            phi: rng.random_range(-3.2..3.2),
            delta: rng.random_range(-5.0..5.0),
            detuning: rng.random_range(-5.0..5.0),
            gamma1: rng.random_range(0.05..2.0),
            gamma2: rng.random_range(0.05..2.0),
        }
    }

    #[test]
    fn gamma_factors_on_resonance() {
        let p = DitParams {
            omega0: 0.3,
            detuning: 0.7,
            delta: 1.2,
            gamma1: 0.4,
            gamma2: 0.6,
            ..Default::default()
        };
        let (g1, _) = gamma_factors(0.3 + 0.7 - 0.6, &p);
        assert!((g1 - Complex64::new(0.2, 0.0)).norm() < 1e-15);
        let (_, g2) = gamma_factors(0.3 + 0.7 + 0.6, &p);
        assert!((g2 - Complex64::new(0.3, 0.0)).norm() < 1e-15);

        let q = DitParams {
            gamma1: 0.0,
            gamma2: 0.0,
            detuning: 0.0,
            ..p
        };
        let (g1, g2) = gamma_factors(q.omega0, &q);
        assert!((g1 + I * 0.6).norm() < 1e-15);
        assert!((g1 + g2).norm() < 1e-15);
    }

    #[test]
    fn bare_cavity_peak() {
        let p = bare();
        let (tc, _) = dit_amplitudes(p.omega0, &p).unwrap();
        let expect = 4.0 * p.alpha_port * p.kappa_d * p.kappa_c / (p.kappa * p.kappa);
        assert!((tc.norm_sqr() - expect).abs() < 1e-15);
        // off resonance: −√(α κ_d κ_c)/(−i(ω−ω₀)+κ/2)
        let w = p.omega0 + 3.1;
        let (tc, _) = dit_amplitudes(w, &p).unwrap();
        let lor = -(p.alpha_port * p.kappa_d * p.kappa_c).sqrt() / Complex64::new(p.kappa / 2.0, -3.1);
        assert!(rel_err(tc, lor) < 1e-12);
    }

    #[test]
    fn pure_cw_port_gives_no_backscatter_without_emitters() {
        let p = DitParams {
            alpha_port: 1.0,
            ..bare()
        };
        for k in -20..=20 {
            let (_, tb) = dit_amplitudes(p.omega0 + 0.5 * k as f64, &p).unwrap();
            assert_eq!(tb.norm(), 0.0);
        }
    }

    #[test]
    fn zero_linewidth_on_resonance_is_a_pole() {
        let p = DitParams {
            gamma1: 0.0,
            gamma2: 0.0,
            ..Default::default()
        };
        let (w1, _) = p.emitter_frequencies();
        assert!(matches!(dit_amplitudes(w1, &p), Err(Error::Pole { .. })));
    }

    #[test]
    fn fano_limits() {
        let p = DitParams::default();
        let w = from_ghz(0.13);
        let f = FanoParams::new(0.0, 0.3, 0.05, 1.0);
        assert!((dit_transmission(w, &p, &f).unwrap() - (0.09 + 0.05)).abs() < 1e-15);
        let f = FanoParams::new(2.0, 0.0, 0.0, 0.0);
        let (tc, _) = dit_amplitudes(w, &p).unwrap();
        assert!((dit_transmission(w, &p, &f).unwrap() - 4.0 * tc.norm_sqr()).abs() < 1e-15);
        assert!((FanoParams::new(1.0, 1.0, 0.0, 7.0).phase_rho() - wrap_phase(7.0)).abs() < 1e-15);
    }

    #[test]
    fn sweep_edge_cases() {
        let p = DitParams::default();
        let f = FanoParams::identity();
        assert!(spectrum_sweep(&[], &p, &f).unwrap().is_empty());
        let s = spectrum_sweep(&[0.2], &p, &f).unwrap();
        assert_eq!(s.points()[0].1, dit_transmission(from_ghz(0.2), &p, &f).unwrap());
        assert!(spectrum_sweep(&[0.2, 0.1], &p, &f).is_err());
    }

    #[test]
    fn symmetric_configuration_gives_symmetric_spectrum() {
        let p = DitParams {
            omega0: 0.0,
            detuning: 0.0,
            delta: 0.0,
            theta: 0.0,
            phi: 0.0,
            g1: 1.0,
            g2: 1.0,
            gamma1: 0.3,
            gamma2: 0.3,
            ..Default::default()
        };
        let f = FanoParams::new(1.3, 0.0, 0.01, 0.0);
        let grid: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.01).collect();
        let s = spectrum_sweep(&grid, &p, &f).unwrap();
        let v = s.values();
        for k in 0..v.len() {
            assert!((v[k] - v[v.len() - 1 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_matches_bare_cavity() {
        let p = bare();
        for k in -10..=10 {
            let w = 0.7 * k as f64;
            let (a, b) = dit_amplitudes(w, &p).unwrap();
            let (oa, ob) = numeric_steady_state_oracle(w, &p).unwrap();
            assert!((a - oa).norm() < 1e-14 && (b - ob).norm() < 1e-14);
        }
    }

    #[test]
    fn oracle_agrees_with_closed_form_on_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            for _ in 0..20 {
                let w = p.omega0 + rng.random_range(-3.0..3.0) * p.kappa;
                let (a, b) = dit_amplitudes(w, &p).unwrap();
                let (oa, ob) = numeric_steady_state_oracle(w, &p).unwrap();
                assert!(rel_err(a, oa) < 1e-9, "t_c {a} vs {oa}");
                assert!(rel_err(b, ob) < 1e-9, "t_b {b} vs {ob}");
            }
        }
    }

    #[test]
    fn degenerate_pair_acts_as_single_emitter_with_root_two_coupling() {
        let g = 0.8;
        let pair = DitParams {
            g1: g,
            g2: g,
            theta: 0.5,
            phi: 0.5,
            delta: 0.0,
            gamma1: 0.2,
            gamma2: 0.2,
            ..Default::default()
        };
        let single = DitParams {
            g1: std::f64::consts::SQRT_2 * g,
            g2: 0.0,
            ..pair
        };
        for k in -50..=50 {
            let w = 0.05 * k as f64;
            let (a, _) = numeric_steady_state_oracle(w, &pair).unwrap();
            let (b, _) = numeric_steady_state_oracle(w, &single).unwrap();
            assert!(rel_err(a, b) < 1e-12);
        }
    }

    #[test]
    fn device_spectrum_shows_two_transparency_dips() {
        let p = DitParams::default();
        let f = FanoParams::identity();
        let (w1, w2) = p.emitter_frequencies();
        let peak = dit_transmission(p.omega0, &DitParams { g1: 0.0, g2: 0.0, ..p }, &f).unwrap();
        for w in [w1, w2] {
            let t = |x: f64| dit_transmission(x, &p, &f).unwrap();
            let h = 1e-3;
            let curvature = (t(w + h) - 2.0 * t(w) + t(w - h)) / (h * h);
            assert!(curvature > 0.0);
            // depth relative to the local background a few linewidths away
            let background = 0.5 * (t(w - 0.6) + t(w + 0.6));
            assert!(background - t(w) > 0.05 * peak, "dip too shallow at {w}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn passive_response(seed in 0u64..10_000, x in -3.0..3.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_params(&mut rng);
            let w = p.omega0 + x * p.kappa;
            let t = dit_transmission(w, &p, &FanoParams::identity()).unwrap();
            prop_assert!(t <= 1.0 + 1e-12);
        }

        #[test]
        fn phase_gauge_with_port_redefinition(seed in 0u64..10_000, c in -3.0..3.0f64, x in -2.0..2.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = DitParams { alpha_port: 0.5, ..random_params(&mut rng) };
            let w = p.omega0 + x * p.kappa;
            let (tc, tb) = dit_amplitudes(w, &p).unwrap();
            let shifted = DitParams { theta: p.theta + c, phi: p.phi + c, ..p };
            let u = Complex64::from_polar((0.5 * p.kappa_d).sqrt(), -c);
            let v = Complex64::from_polar((0.5 * p.kappa_d).sqrt(), c);
            let (sc, sb) = numeric_response_with_drive(w, &shifted, (u, v)).unwrap();
            let scale = tc.norm_sqr() + tb.norm_sqr() + 1e-12;
            prop_assert!((tc.norm_sqr() - sc.norm_sqr()).abs() <= 1e-10 * scale);
            prop_assert!((tb.norm_sqr() - sb.norm_sqr()).abs() <= 1e-10 * scale);
        }
    }
}
