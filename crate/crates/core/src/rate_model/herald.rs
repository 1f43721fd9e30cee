//! Heralded entanglement of two Λ-type emitters by detecting a scattered
//! photon.
//!
//! Each emitter has an optically bright spin state `↑` (coupled to `e`) and
//! a dark spin state `↓`. Both spins are prepared in superpositions, a weak
//! CW pulse excites the bright components, and a click on one waveguide
//! direction projects the spins. Emitter A sits at azimuthal phase φ
//! relative to B: the pulse imprints `e^{iφ}` on A's excitation, and A
//! emits into the forward (CW) and backward (CCW) directions with amplitudes
//! `e^{∓iφ}/√2` while B emits with `1/√2` into each.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{CMatrix, DensityState};

/// Ordering of the two-spin basis used by heralded states.
pub const SPIN_BASIS: [&str; 4] = ["up_up", "up_down", "down_up", "down_down"];

const UP_UP: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinSetup {
    /// `(↑ + ↓)_A (↑ − ↓)_B / 2`.
    Antisymmetric,
    /// `(↑ + ↓)_A (↑ + ↓)_B / 2`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bell {
    /// `(|↑↓⟩ + |↓↑⟩)/√2`.
    PsiPlus,
    /// `(|↑↓⟩ − |↓↑⟩)/√2`.
    PsiMinus,
}

pub fn bell_state(b: Bell) -> [Complex64; 4] {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    match b {
        Bell::PsiPlus => [z, s, s, z],
        Bell::PsiMinus => [z, s, -s, z],
    }
}

fn fidelity(rho: &DensityState, target: &[Complex64; 4]) -> f64 {
    let m = rho.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += target[i].conj() * m[(i, j)] * target[j];
        }
    }
    acc.re
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldResult {
    pub p_excite: f64,
    /// Lossless click probability on the herald channel.
    pub herald_probability: f64,
    pub infidelity_alpha: f64,
    /// Spin state in the [`SPIN_BASIS`] ordering.
    pub heralded_state: DensityState,
    pub target_bell_fidelity: f64,
}

fn check_p_excite(p_excite: f64) -> Result<()> {
    if p_excite == 0.0 {
        return Err(Error::NoEmission("p_excite = 0 never produces a herald click".into()));
    }
    if !(p_excite > 0.0 && p_excite <= 1.0) {
        return Err(invalid("p_excite", format!("{p_excite} is outside (0, 1]")));
    }
    Ok(())
}

/// Closed form of the backward-click herald: `α|↑↑⟩⟨↑↑| + (1−α)|Ψ⁺⟩⟨Ψ⁺|`
/// with `α = P_e/(P_e+2)` and click probability `P_e(P_e+2)/8`.
pub fn herald_entanglement(p_excite: f64) -> Result<HeraldResult> {
    check_p_excite(p_excite)?;
    let alpha = p_excite / (p_excite + 2.0);
    let psi = bell_state(Bell::PsiPlus);
    let mut m = CMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj() * (1.0 - alpha));
    m[(UP_UP, UP_UP)] += alpha;
    let state = DensityState::new(m)?;
    Ok(HeraldResult {
        p_excite,
        herald_probability: p_excite * (p_excite + 2.0) / 8.0,
        infidelity_alpha: alpha,
        target_bell_fidelity: fidelity(&state, &psi),
        heralded_state: state,
    })
}

/// Outcome of one click branch of the enumerated protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    pub herald_probability: f64,
    pub state: DensityState,
}

impl HeraldOutcome {
    pub fn fidelity(&self, target: Bell) -> f64 {
        fidelity(&self.state, &bell_state(target))
    }

    /// Population of `|↑↑⟩`.
    pub fn up_up_population(&self) -> f64 {
        self.state.population(UP_UP)
    }
}

// Joint emitter/waveguide amplitudes. Levels: 0 = ↓, 1 = ↑, 2 = e.
// Photon numbers per direction are truncated at MAX_PHOTONS.
const MAX_PHOTONS: usize = 2;
const NP: usize = MAX_PHOTONS + 1;
const DOWN: usize = 0;
const UP: usize = 1;
const EXC: usize = 2;

#[derive(Clone)]
struct Joint {
    amp: Vec<Complex64>,
}

impl Joint {
    fn zeros() -> Self {
        Self {
            amp: vec![Complex64::new(0.0, 0.0); 9 * NP * NP],
        }
    }

    fn idx(a: usize, b: usize, n_back: usize, n_fwd: usize) -> usize {
        ((a * 3 + b) * NP + n_back) * NP + n_fwd
    }

    /// Replace emitter `which` in `e` by `↑` and add one photon with the
    /// given directional amplitudes.
    fn decay(&self, which: usize, c_fwd: Complex64, c_back: Complex64) -> Result<Self> {
        let mut out = Self::zeros();
        for a in 0..3 {
            for b in 0..3 {
                for nb in 0..NP {
                    for nf in 0..NP {
                        let v = self.amp[Self::idx(a, b, nb, nf)];
                        if v == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let level = if which == 0 { a } else { b };
                        if level != EXC {
                            out.amp[Self::idx(a, b, nb, nf)] += v;
                            continue;
                        }
                        let (a2, b2) = if which == 0 { (UP, b) } else { (a, UP) };
                        if nf + 1 > MAX_PHOTONS || nb + 1 > MAX_PHOTONS {
                            return Err(Error::Singular("photon truncation exceeded".into()));
                        }
                        out.amp[Self::idx(a2, b2, nb, nf + 1)] += v * c_fwd * ((nf + 1) as f64).sqrt();
                        out.amp[Self::idx(a2, b2, nb + 1, nf)] += v * c_back * ((nb + 1) as f64).sqrt();
                    }
                }
            }
        }
        Ok(out)
    }
}

fn spin_index(a: usize, b: usize) -> Option<usize> {
    match (a, b) {
        (UP, UP) => Some(0),
        (UP, DOWN) => Some(1),
        (DOWN, UP) => Some(2),
        (DOWN, DOWN) => Some(3),
        _ => None,
    }
}

/// Enumerate the protocol term by term for emitters at relative phase
/// `phi` and return the spin state conditioned on a click in `channel`.
pub fn enumerate_protocol(p_excite: f64, phi: f64, setup: SpinSetup, channel: Channel) -> Result<HeraldOutcome> {
    check_p_excite(p_excite)?;
    let (sp, sq) = (p_excite.sqrt(), (1.0 - p_excite).sqrt());
    let one = Complex64::new(1.0, 0.0);
    let sign_b = match setup {
        SpinSetup::Antisymmetric => -1.0,
        SpinSetup::Symmetric => 1.0,
    };
    // Per-emitter amplitudes over (↓, ↑, e) after the pulse.
    let emitter_a = [one, one * sq, Complex64::from_polar(sp, phi)];
    let emitter_b = [one * sign_b, one * sq, one * sp];
    let mut psi = Joint::zeros();
    for a in 0..3 {
        for b in 0..3 {
            psi.amp[Joint::idx(a, b, 0, 0)] = emitter_a[a] * emitter_b[b] * 0.5;
        }
    }
    let psi = psi
        .decay(0, Complex64::from_polar(FRAC_1_SQRT_2, -phi), Complex64::from_polar(FRAC_1_SQRT_2, phi))?
        .decay(1, one * FRAC_1_SQRT_2, one * FRAC_1_SQRT_2)?;

    // Ω_click on the monitored mode, partial trace over the other mode.
    let mut rho = CMatrix::zeros(4, 4);
    for n_mon in 1..NP {
        for n_other in 0..NP {
            let (nb, nf) = match channel {
                Channel::Backward => (n_mon, n_other),
                Channel::Forward => (n_other, n_mon),
            };
            let mut ket = [Complex64::new(0.0, 0.0); 4];
            for a in 0..3 {
                for b in 0..3 {
                    let v = psi.amp[Joint::idx(a, b, nb, nf)];
                    match spin_index(a, b) {
                        Some(s) => ket[s] += v,
                        None if v != Complex64::new(0.0, 0.0) => {
                            return Err(Error::Singular("excited amplitude left after decay".into()))
                        }
                        None => {}
                    }
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    rho[(i, j)] += ket[i] * ket[j].conj();
                }
            }
        }
    }
    let p = rho.trace().re;
    if !(p > 0.0) {
        return Err(Error::NoEmission(format!("no click possible in the {channel:?} channel")));
    }
    Ok(HeraldOutcome {
        herald_probability: p,
        state: DensityState::normalized(rho)?,
    })
}

/// Enumeration counterpart of [`herald_entanglement`]: antisymmetric spin
/// preparation, emitters a quarter wave apart, backward click.
pub fn enumerate_protocol_oracle(p_excite: f64) -> Result<HeraldResult> {
    let out = enumerate_protocol(p_excite, FRAC_PI_2, SpinSetup::Antisymmetric, Channel::Backward)?;
    Ok(HeraldResult {
        p_excite,
        herald_probability: out.herald_probability,
        infidelity_alpha: out.up_up_population(),
        target_bell_fidelity: out.fidelity(Bell::PsiPlus),
        heralded_state: out.state,
    })
}
