use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::units::{from_ghz, from_mhz};

/// Physical rates and phases of the cavity–emitter system.
///
/// All rates are angular frequencies in rad/ns. `gamma1`/`gamma2` are the
/// emitters' population decay rates outside the cavity mode and
/// `gamma_d1`/`gamma_d2` their pure-dephasing rates, so an emitter's optical
/// linewidth (FWHM, angular) is `gamma + gamma_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Cavity resonance, as an offset from the reference frequency.
    pub omega0: f64,
    pub kappa: f64,
    pub kappa_c: f64,
    pub kappa_d: f64,
    pub g1: f64,
    pub g2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_d1: f64,
    pub gamma_d2: f64,
    /// Emitter–emitter splitting δ (emitter 2 sits above emitter 1).
    pub delta: f64,
    /// Detuning Δ of the emitter pair's centre from the cavity.
    pub detuning: f64,
    pub theta: f64,
    pub phi: f64,
    pub alpha_port: f64,
}

impl Default for DeviceParams {
    /// The two-emitter microdisk device: κ/2π = 2.8 GHz, g/2π = 125 and
    /// 150 MHz, 11.3 ns bulk lifetime, 24 MHz excess dephasing, 0.44 GHz
    /// splitting and a 0.34π standing-wave phase.
    fn default() -> Self {
        let kappa = from_ghz(2.8);
        Self {
            omega0: 0.0,
            kappa,
            kappa_c: 0.05 * kappa,
            kappa_d: 0.05 * kappa,
            g1: from_mhz(125.0),
            g2: from_mhz(150.0),
            gamma1: 1.0 / 11.3,
            gamma2: 1.0 / 11.3,
            gamma_d1: from_mhz(24.0),
            gamma_d2: from_mhz(24.0),
            delta: from_ghz(0.44),
            detuning: 0.0,
            theta: 0.0,
            phi: 0.34 * PI,
            alpha_port: 0.5,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("kappa", self.kappa),
            ("kappa_c", self.kappa_c),
            ("kappa_d", self.kappa_d),
            ("g1", self.g1),
            ("g2", self.g2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma_d1", self.gamma_d1),
            ("gamma_d2", self.gamma_d2),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("rate must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("omega0", self.omega0),
            ("delta", self.delta),
            ("detuning", self.detuning),
            ("theta", self.theta),
            ("phi", self.phi),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha_port) {
            return Err(invalid("alpha_port", format!("{} is outside [0, 1]", self.alpha_port)));
        }
        if self.kappa + 1e-12 * self.kappa < self.kappa_c + self.kappa_d {
            return Err(invalid(
                "kappa",
                "total decay must be at least kappa_c + kappa_d",
            ));
        }
        Ok(())
    }

    /// Emitter frequencies relative to the cavity, (ω₁ − ω₀, ω₂ − ω₀).
    pub fn emitter_detunings(&self) -> (f64, f64) {
        (
            self.detuning - self.delta / 2.0,
            self.detuning + self.delta / 2.0,
        )
    }

    /// Largest rate or frequency scale in the model.
    pub fn rate_scale(&self) -> f64 {
        let (d1, d2) = self.emitter_detunings();
        [
            self.kappa,
            self.g1,
            self.g2,
            self.gamma1,
            self.gamma2,
            self.gamma_d1,
            self.gamma_d2,
            d1.abs(),
            d2.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
