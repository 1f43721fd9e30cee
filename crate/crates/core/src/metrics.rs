//! Figure-of-merit arithmetic for cavity-coupled emitters: Purcell factor,
//! cooperativity, coupling rate and excess dephasing.
//!
//! Lifetimes are in ns and decay rates in 1/ns. Linewidths and the
//! `Γ/2π`, `g/2π`, `κ/2π` values of [`EmitterRecord`] are in MHz.

use std::f64::consts::TAU;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Zero-phonon-line emission budget of the bare emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZplBudget {
    pub tau_radiative: f64,
    pub debye_waller: f64,
    pub zpl_rate: f64,
}

impl ZplBudget {
    pub fn new(tau_radiative: f64, debye_waller: f64) -> Result<Self> {
        Ok(Self {
            tau_radiative,
            debye_waller,
            zpl_rate: zpl_rate(tau_radiative, debye_waller)?,
        })
    }
}

/// `dwf / τ_rad` in 1/ns.
pub fn zpl_rate(tau_radiative: f64, dwf: f64) -> Result<f64> {
    if !(tau_radiative > 0.0 && tau_radiative.is_finite()) {
        return Err(invalid("tau_radiative", format!("must be > 0, got {tau_radiative}")));
    }
    if !(dwf > 0.0 && dwf <= 1.0) {
        return Err(invalid("debye_waller", format!("{dwf} is outside (0, 1]")));
    }
    Ok(dwf / tau_radiative)
}

/// Cavity emission rate `Γ = 1/τ_on − 1/τ₀` in 1/ns.
pub fn cavity_rate_from_lifetimes(tau_on: f64, tau_bulk: f64) -> Result<f64> {
    if !(tau_on > 0.0 && tau_on.is_finite()) {
        return Err(invalid("tau_on", format!("must be > 0, got {tau_on}")));
    }
    if !(tau_bulk.is_finite() && tau_on <= tau_bulk) {
        return Err(invalid(
            "tau_on",
            format!("on-resonance lifetime {tau_on} ns exceeds the bulk lifetime {tau_bulk} ns"),
        ));
    }
    Ok(1.0 / tau_on - 1.0 / tau_bulk)
}

/// `Γ/2π` in MHz for a decay rate in 1/ns.
pub fn rate_to_mhz(rate_per_ns: f64) -> f64 {
    rate_per_ns / TAU * 1e3
}

/// `C = Γ/γ`; both arguments in the same unit.
pub fn cooperativity(gamma_cavity: f64, linewidth: f64) -> Result<f64> {
    if !(linewidth > 0.0 && linewidth.is_finite()) {
        return Err(invalid("linewidth", format!("must be > 0, got {linewidth}")));
    }
    if !(gamma_cavity >= 0.0) {
        return Err(invalid("gamma_cavity", format!("must be >= 0, got {gamma_cavity}")));
    }
    Ok(gamma_cavity / linewidth)
}

/// `g = √(Γκ)/2`, from `Γ = 4g²/κ`; same unit in and out.
pub fn coupling_from_cavity_rate(gamma_cavity: f64, kappa: f64) -> Result<f64> {
    if !(gamma_cavity >= 0.0 && gamma_cavity.is_finite()) {
        return Err(invalid("gamma_cavity", format!("must be >= 0, got {gamma_cavity}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa", format!("must be > 0, got {kappa}")));
    }
    Ok((gamma_cavity * kappa).sqrt() / 2.0)
}

/// `F = Γ / zpl_rate` with `Γ` in 1/ns.
pub fn purcell_factor(gamma_cavity: f64, zpl: &ZplBudget) -> Result<f64> {
    if !(zpl.zpl_rate > 0.0) {
        return Err(invalid("zpl_rate", "must be > 0"));
    }
    if !(gamma_cavity >= 0.0) {
        return Err(invalid("gamma_cavity", format!("must be >= 0, got {gamma_cavity}")));
    }
    Ok(gamma_cavity / zpl.zpl_rate)
}

/// Linewidth in excess of the transform limit `1/(2π τ)`, in MHz. Negative
/// excess is clamped to zero with a warning.
pub fn excess_dephasing(linewidth_fwhm_mhz: f64, lifetime_ns: f64) -> f64 {
    let limit = 1e3 / (TAU * lifetime_ns);
    let excess = linewidth_fwhm_mhz - limit;
    if excess < 0.0 {
        log::warn!("linewidth {linewidth_fwhm_mhz} MHz is below the transform limit {limit:.3} MHz");
        0.0
    } else {
        excess
    }
}

/// Measured inputs for one emitter. Field names carry their units and
/// double as the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterInputs {
    pub label: String,
    pub tau_on_ns: f64,
    pub tau_off_ns: f64,
    pub tau_bulk_ns: f64,
    pub linewidth_on_mhz: f64,
    pub linewidth_off_mhz: f64,
}

pub const EMITTER_CSV_HEADER: [&str; 6] = [
    "label",
    "tau_on_ns",
    "tau_off_ns",
    "tau_bulk_ns",
    "linewidth_on_mhz",
    "linewidth_off_mhz",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterRecord {
    pub label: String,
    pub tau_on: f64,
    pub tau_off: f64,
    pub tau_bulk: f64,
    pub linewidth_on: f64,
    pub linewidth_off: f64,
    /// Γ/2π in MHz.
    pub gamma_cavity: f64,
    /// g/2π in MHz.
    pub coupling_g: f64,
    pub cooperativity: f64,
    pub purcell: f64,
    pub excess_dephasing_on: f64,
    pub excess_dephasing_off: f64,
}

impl EmitterRecord {
    /// Derive the figures of merit. Cooperativity uses the off-resonance
    /// linewidth, which carries the larger dephasing.
    pub fn compute(inputs: &EmitterInputs, kappa_over_2pi_mhz: f64, zpl: &ZplBudget) -> Result<Self> {
        for (name, v) in [
            ("tau_off_ns", inputs.tau_off_ns),
            ("tau_bulk_ns", inputs.tau_bulk_ns),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if inputs.tau_on_ns > inputs.tau_off_ns {
            log::warn!(
                "{}: on-resonance lifetime exceeds the off-resonance lifetime",
                inputs.label
            );
        }
        let rate = cavity_rate_from_lifetimes(inputs.tau_on_ns, inputs.tau_bulk_ns)?;
        let gamma_mhz = rate_to_mhz(rate);
        Ok(Self {
            label: inputs.label.clone(),
            tau_on: inputs.tau_on_ns,
            tau_off: inputs.tau_off_ns,
            tau_bulk: inputs.tau_bulk_ns,
            linewidth_on: inputs.linewidth_on_mhz,
            linewidth_off: inputs.linewidth_off_mhz,
            gamma_cavity: gamma_mhz,
            coupling_g: coupling_from_cavity_rate(gamma_mhz, kappa_over_2pi_mhz)?,
            cooperativity: cooperativity(gamma_mhz, inputs.linewidth_off_mhz)?,
            purcell: purcell_factor(rate, zpl)?,
            excess_dephasing_on: excess_dephasing(inputs.linewidth_on_mhz, inputs.tau_on_ns),
            excess_dephasing_off: excess_dephasing(inputs.linewidth_off_mhz, inputs.tau_off_ns),
        })
    }
}

/// Parse an emitter table. The header must match [`EMITTER_CSV_HEADER`]
/// exactly, so a column in other units is rejected.
pub fn read_emitter_table<R: Read>(reader: R) -> Result<Vec<EmitterInputs>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != EMITTER_CSV_HEADER {
        return Err(Error::Parse(format!(
            "emitter table header must be `{}`, found `{}`",
            EMITTER_CSV_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zpl() -> ZplBudget {
        ZplBudget::new(15.9, 0.085).unwrap()
    }

    #[test]
    fn zpl_rate_values() {
        let r = zpl_rate(15.9, 0.085).unwrap();
        assert!((1.0 / r - 187.0588).abs() < 1e-3);
        assert!(((1.0 / r) / 186.5 - 1.0).abs() < 0.005);
        assert_eq!(zpl_rate(3.0, 1.0).unwrap(), 1.0 / 3.0);
        assert_eq!(zpl_rate(2.0, 0.5).unwrap(), 0.25);
        assert!(zpl_rate(2.0, 0.0).is_err());
        assert!(zpl_rate(0.0, 0.5).is_err());
    }

    #[test]
    fn cavity_rates() {
        let a = rate_to_mhz(cavity_rate_from_lifetimes(4.2, 11.3).unwrap());
        let b = rate_to_mhz(cavity_rate_from_lifetimes(3.5, 11.3).unwrap());
        assert_eq!(format!("{a:.1}"), "23.8");
        assert_eq!(format!("{b:.1}"), "31.4");
        assert_eq!(cavity_rate_from_lifetimes(11.3, 11.3).unwrap(), 0.0);
        assert!(cavity_rate_from_lifetimes(12.0, 11.3).is_err());
    }

    #[test]
    fn cooperativity_and_coupling() {
        let a = rate_to_mhz(cavity_rate_from_lifetimes(4.2, 11.3).unwrap());
        let b = rate_to_mhz(cavity_rate_from_lifetimes(3.5, 11.3).unwrap());
        assert_eq!(format!("{:.1}", cooperativity(a, 37.8).unwrap()), "0.6");
        assert_eq!(format!("{:.1}", cooperativity(b, 38.6).unwrap()), "0.8");
        assert_eq!(cooperativity(0.0, 38.6).unwrap(), 0.0);
        assert!(cooperativity(1.0, 0.0).is_err());
        let ga = coupling_from_cavity_rate(a, 2800.0).unwrap();
        let gb = coupling_from_cavity_rate(b, 2800.0).unwrap();
        assert!((ga / 125.0 - 1.0).abs() < 0.04);
        assert!((gb / 150.0 - 1.0).abs() < 0.04);
        assert_eq!(coupling_from_cavity_rate(0.0, 2800.0).unwrap(), 0.0);
    }

    #[test]
    fn purcell_values() {
        let fa = purcell_factor(cavity_rate_from_lifetimes(4.2, 11.3).unwrap(), &zpl()).unwrap();
        let fb = purcell_factor(cavity_rate_from_lifetimes(3.5, 11.3).unwrap(), &zpl()).unwrap();
        assert!((fa - 28.0).abs() <= 1.0 && (fb - 37.0).abs() <= 1.0, "{fa} {fb}");
        assert_eq!(purcell_factor(0.0, &zpl()).unwrap(), 0.0);
    }

    #[test]
    fn dephasing_values() {
        assert_eq!(format!("{:.1}", excess_dephasing(54.3, 4.2)), "16.4");
        assert_eq!(format!("{:.1}", excess_dephasing(37.8, 11.3)), "23.7");
        assert_eq!(excess_dephasing(1e3 / (TAU * 4.2), 4.2), 0.0);
        assert_eq!(excess_dephasing(10.0, 4.2), 0.0);
    }

    #[test]
    fn table_parsing() {
        let text = "label,tau_on_ns,tau_off_ns,tau_bulk_ns,linewidth_on_mhz,linewidth_off_mhz\nA,4.2,10.7,11.3,54.3,37.8\n";
        let rows = read_emitter_table(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        let r = EmitterRecord::compute(&rows[0], 2800.0, &zpl()).unwrap();
        assert_eq!(format!("{:.1}", r.cooperativity), "0.6");
        let wrong = "label,tau_on_us,tau_off_ns,tau_bulk_ns,linewidth_on_mhz,linewidth_off_mhz\nA,4.2,10.7,11.3,54.3,37.8\n";
        assert!(read_emitter_table(wrong.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn relations_hold(tau_on in 0.5..11.0f64, lw in 1.0..500.0f64, kappa in 100.0..1e4f64, s in 0.01..100.0f64) {
            let tau0 = 11.3;
            let rate = cavity_rate_from_lifetimes(tau_on, tau0).unwrap();
            let g = coupling_from_cavity_rate(rate, kappa).unwrap();
            prop_assert!((4.0 * g * g / kappa - rate).abs() <= 1e-12 * rate.max(1e-300));
            let c = cooperativity(rate, lw).unwrap();
            prop_assert!((c - 4.0 * g * g / (kappa * lw)).abs() <= 1e-12 * c.max(1e-300));
            let z = ZplBudget::new(15.9, 0.085).unwrap();
            let f = purcell_factor(rate, &z).unwrap();
            prop_assert!((f * z.zpl_rate + 1.0 / tau0 - 1.0 / tau_on).abs() <= 1e-12 / tau_on);
            // unit covariance
            let gs = coupling_from_cavity_rate(rate * s, kappa * s).unwrap();
            prop_assert!((gs - g * s).abs() <= 1e-12 * g.max(1e-300) * s);
            prop_assert!((cooperativity(rate * s, lw * s).unwrap() - c).abs() <= 1e-12 * c.max(1e-300));
        }
    }
}
