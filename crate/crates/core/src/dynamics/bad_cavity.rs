//! Emitter-only model obtained by adiabatically eliminating both cavity
//! modes (`κ` much larger than every emitter rate and detuning).
//!
//! The cavity leaves through `J_cw = (2/√κ)(G₁σ₁ + G₂σ₂)` and
//! `J_ccw = (2/√κ)(G₁*σ₁ + G₂*σ₂)`, with `Gⱼ` the standing-wave couplings.
//! The emitters behave as ideal two-level systems coupled only through
//! these two collective channels.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::correlation::g2_auto_cross;
use super::evolve::EvolveOptions;
use super::steady::{pumped_open_system, steady_state_in_sector, SteadyStateMethod};
use crate::error::{invalid, Result};
use crate::quantum::{emitter_lowering, kron, CMatrix, CollapseOperator, DensityState, DeviceParams, Level, OpenSystem, Operator};
use crate::spectrum::SpectrumSeries;

#[derive(Debug, Clone)]
pub struct EmitterPairModel {
    pub params: DeviceParams,
    pub system: OpenSystem,
    pub sigma1: Operator,
    pub sigma2: Operator,
    pub jump_cw: Operator,
    pub jump_ccw: Operator,
}

/// Dimension of the two-emitter space (3 levels each).
pub const EMITTER_PAIR_DIM: usize = 9;

pub fn bad_cavity_model(params: &DeviceParams) -> Result<EmitterPairModel> {
    params.validate()?;
    if !(params.kappa > 0.0) {
        return Err(invalid("kappa", "the bad-cavity model needs kappa > 0"));
    }
    let s = emitter_lowering().into_matrix();
    let id = CMatrix::identity(3, 3);
    let sigma1 = Operator::new(kron(&s, &id))?;
    let sigma2 = Operator::new(kron(&id, &s))?;
    let c1 = Complex64::from_polar(params.g1 * FRAC_1_SQRT_2, -params.theta);
    let c2 = Complex64::from_polar(params.g2 * FRAC_1_SQRT_2, -params.phi);
    let pref = 2.0 / params.kappa.sqrt();
    let jump_cw = &sigma1.scale(c1 * pref) + &sigma2.scale(c2 * pref);
    let jump_ccw = &sigma1.scale(c1.conj() * pref) + &sigma2.scale(c2.conj() * pref);

    let n1 = &sigma1.adjoint() * &sigma1;
    let n2 = &sigma2.adjoint() * &sigma2;
    let (d1, d2) = params.emitter_detunings();
    let hamiltonian = &n1.scale_real(d1) + &n2.scale_real(d2);
    let collapse = vec![
        CollapseOperator::new("cw_channel", 1.0, jump_cw.clone())?,
        CollapseOperator::new("ccw_channel", 1.0, jump_ccw.clone())?,
        CollapseOperator::new("emitter1_decay", params.gamma1, sigma1.clone())?,
        CollapseOperator::new("emitter2_decay", params.gamma2, sigma2.clone())?,
        CollapseOperator::new("emitter1_dephasing", params.gamma_d1, n1)?,
        CollapseOperator::new("emitter2_dephasing", params.gamma_d2, n2)?,
    ];
    let channel = 4.0 * (c1.norm() + c2.norm()).powi(2) / params.kappa;
    let rate_scale = [
        channel,
        params.gamma1,
        params.gamma2,
        params.gamma_d1,
        params.gamma_d2,
        d1.abs(),
        d2.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(EmitterPairModel {
        params: *params,
        system: OpenSystem {
            hamiltonian,
            collapse,
            rate_scale,
        },
        sigma1,
        sigma2,
        jump_cw,
        jump_ccw,
    })
}

impl EmitterPairModel {
    /// Basis indices with neither emitter in the dark level.
    pub fn bright_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for a in [Level::Up, Level::Excited] {
            for b in [Level::Up, Level::Excited] {
                out.push(a.index() * 3 + b.index());
            }
        }
        out.sort_unstable();
        out
    }

    pub fn pumped(&self, pump_rate: f64) -> Result<OpenSystem> {
        pumped_open_system(self.system.clone(), &[&self.sigma1, &self.sigma2], pump_rate)
    }

    pub fn steady_state(&self, pump_rate: f64) -> Result<DensityState> {
        steady_state_in_sector(&self.pumped(pump_rate)?, &self.bright_indices(), SteadyStateMethod::NullSpace)
    }

    /// CW auto-correlation and CW→CCW cross-correlation at the given pump.
    pub fn g2_pair(
        &self,
        pump_rate: f64,
        tau_grid: &[f64],
        opts: &EvolveOptions,
    ) -> Result<(SpectrumSeries, SpectrumSeries)> {
        let sys = self.pumped(pump_rate)?;
        let rho = steady_state_in_sector(&sys, &self.bright_indices(), SteadyStateMethod::NullSpace)?;
        g2_auto_cross(&sys, &rho, &self.jump_cw, &self.jump_ccw, tau_grid, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn identical_pair(phi: f64) -> DeviceParams {
        DeviceParams {
            g2: DeviceParams::default().g1,
            gamma2: DeviceParams::default().gamma1,
            gamma_d2: DeviceParams::default().gamma_d1,
            delta: 0.0,
            detuning: 0.0,
            theta: 0.0,
            phi,
            ..Default::default()
        }
    }

    #[test]
    fn single_emitter_is_antibunched() {
        let p = DeviceParams {
            g2: 0.0,
            ..identical_pair(0.0)
        };
        let m = bad_cavity_model(&p).unwrap();
        let (auto, _) = m.g2_pair(0.01 * p.gamma1, &[0.0], &EvolveOptions::default()).unwrap();
        assert!(auto.values()[0].abs() < 1e-6);
    }

    #[test]
    fn zero_phase_makes_channels_identical() {
        let p = identical_pair(0.0);
        let m = bad_cavity_model(&p).unwrap();
        let grid: Vec<f64> = (0..50).map(|k| k as f64 * 0.5).collect();
        let (auto, cross) = m.g2_pair(0.01 * p.gamma1, &grid, &EvolveOptions::default()).unwrap();
        for (a, c) in auto.values().iter().zip(cross.values()) {
            assert!((a - c).abs() < 1e-6);
        }
    }

    #[test]
    fn quarter_wave_spacing_is_chiral() {
        let p = identical_pair(PI / 2.0);
        let m = bad_cavity_model(&p).unwrap();
        let (auto, cross) = m.g2_pair(0.01 * p.gamma1, &[0.0], &EvolveOptions::default()).unwrap();
        assert!(cross.values()[0] < 1e-4);
        assert!(auto.values()[0] > 0.1);
    }

    #[test]
    fn correlations_relax_to_one() {
        let p = identical_pair(PI / 3.0);
        let m = bad_cavity_model(&p).unwrap();
        let lifetime = 1.0 / p.gamma1;
        let (auto, cross) = m
            .g2_pair(0.01 * p.gamma1, &[0.0, 20.0 * lifetime], &EvolveOptions::default())
            .unwrap();
        assert!((auto.values()[1] - 1.0).abs() < 0.02);
        assert!((cross.values()[1] - 1.0).abs() < 0.02);
    }
}
