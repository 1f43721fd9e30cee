//! Post-pulse initial states under the instantaneous-pulse approximation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quantum::{CMatrix, DensityState, Level, SpaceDescriptor};

/// Travel direction of the excitation pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Cw,
    Ccw,
}

/// How the post-pulse state is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepModel {
    /// Single-excitation mixture: coherent pair weighted `P_B²`, solitary
    /// excitations (partner dark) weighted `P_B(1−P_B)`.
    #[default]
    Weak,
    /// Product of per-emitter states `(1−P_B)|↓⟩⟨↓| + P_B|ψ⟩⟨ψ|` with
    /// `|ψ⟩ = √(1−P_e)|↑⟩ + √P_e e^{iφ}|e⟩`; keeps the double excitation.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsePrep {
    pub p_bright: f64,
    pub p_excite: f64,
    /// Phase of emitter A's excitation relative to emitter B for a CW pulse.
    pub rel_phase: f64,
    pub direction: Direction,
}

impl Default for PulsePrep {
    fn default() -> Self {
        Self {
            p_bright: 1.0,
            p_excite: 0.1,
            rel_phase: 0.0,
            direction: Direction::Cw,
        }
    }
}

impl PulsePrep {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_bright", self.p_bright), ("p_excite", self.p_excite)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(name, format!("{v} is outside [0, 1]")));
            }
        }
        if !self.rel_phase.is_finite() {
            return Err(invalid("rel_phase", "must be finite"));
        }
        Ok(())
    }

    /// Phase imprinted by a traveling pulse on emitters at azimuthal
    /// positions θ (A) and φ (B).
    pub fn imprinted_phase(theta: f64, phi: f64, direction: Direction) -> f64 {
        match direction {
            Direction::Cw => theta - phi,
            Direction::Ccw => phi - theta,
        }
    }

    /// Relative phase with the direction convention applied.
    pub fn effective_phase(&self) -> f64 {
        match self.direction {
            Direction::Cw => self.rel_phase,
            Direction::Ccw => -self.rel_phase,
        }
    }
}

/// Post-pulse state using the weak-excitation mixture.
pub fn prepare_post_pulse_state(prep: &PulsePrep, space: &SpaceDescriptor) -> Result<DensityState> {
    prepare_with_model(prep, space, PrepModel::Weak)
}

pub fn prepare_with_model(prep: &PulsePrep, space: &SpaceDescriptor, model: PrepModel) -> Result<DensityState> {
    prep.validate()?;
    let n = space.dim();
    let one = Complex64::new(1.0, 0.0);
    let ket = |a: Level, b: Level| space.index(a, b, 0, 0);
    let phase = Complex64::from_polar(1.0, prep.effective_phase());
    let pb = prep.p_bright;

    if pb == 0.0 {
        log::warn!("p_bright = 0: both emitters dark, no emission will follow");
        return Ok(DensityState::basis(n, ket(Level::Down, Level::Down)));
    }

    let mut m = CMatrix::zeros(n, n);
    match model {
        PrepModel::Weak => {
            let mut psi = vec![Complex64::new(0.0, 0.0); n];
            psi[ket(Level::Excited, Level::Up)] = phase;
            psi[ket(Level::Up, Level::Excited)] = one;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = psi[i] * psi[j].conj() * (pb * pb);
                }
            }
            let solo = pb * (1.0 - pb);
            for k in [ket(Level::Excited, Level::Down), ket(Level::Down, Level::Excited)] {
                m[(k, k)] += solo;
            }
        }
        PrepModel::Full => {
            let pe = prep.p_excite;
            let (g, e) = ((1.0 - pe).sqrt(), pe.sqrt());
            let single = |ph: Complex64| {
                let mut r = CMatrix::zeros(3, 3);
                let v = [Complex64::new(0.0, 0.0), one * g, ph * e];
                for i in 1..3 {
                    for j in 1..3 {
                        r[(i, j)] = v[i] * v[j].conj() * pb;
                    }
                }
                r[(0, 0)] = Complex64::new(1.0 - pb, 0.0);
                r
            };
            let pair = single(phase).kronecker(&single(one));
            for a in Level::ALL {
                for b in Level::ALL {
                    for c in Level::ALL {
                        for d in Level::ALL {
                            let v = pair[(a.index() * 3 + b.index(), c.index() * 3 + d.index())];
                            if v != Complex64::new(0.0, 0.0) {
                                m[(ket(a, b), ket(c, d))] = v;
                            }
                        }
                    }
                }
            }
        }
    }
    DensityState::normalized(m)
}

/// Total emitter excitation `⟨σ₁†σ₁ + σ₂†σ₂⟩` of a prepared state.
pub fn excited_population(state: &DensityState, space: &SpaceDescriptor) -> f64 {
    (0..space.dim())
        .map(|i| {
            let d = space.decompose(i);
            let count = (d[0] == Level::Excited.index()) as usize + (d[1] == Level::Excited.index()) as usize;
            count as f64 * state.population(i)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::build_space;
    use proptest::prelude::*;

    #[test]
    fn fully_bright_is_pure_pair_state() {
        let space = build_space(1).unwrap();
        let prep = PulsePrep {
            rel_phase: 0.7,
            ..Default::default()
        };
        let rho = prepare_post_pulse_state(&prep, &space).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); space.dim()];
        psi[space.index(Level::Excited, Level::Up, 0, 0)] = Complex64::from_polar(1.0, 0.7);
        psi[space.index(Level::Up, Level::Excited, 0, 0)] = Complex64::new(1.0, 0.0);
        let expect = DensityState::pure(&psi).unwrap();
        assert!(rho.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn half_bright_weights() {
        let space = build_space(1).unwrap();
        let prep = PulsePrep {
            p_bright: 0.5,
            ..Default::default()
        };
        let rho = prepare_post_pulse_state(&prep, &space).unwrap();
        let pair = rho.population(space.index(Level::Excited, Level::Up, 0, 0))
            + rho.population(space.index(Level::Up, Level::Excited, 0, 0));
        let solo = rho.population(space.index(Level::Excited, Level::Down, 0, 0))
            + rho.population(space.index(Level::Down, Level::Excited, 0, 0));
        assert!((pair - solo).abs() < 1e-15);
        assert!((pair + solo - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ccw_uses_conjugate_phase() {
        let space = build_space(1).unwrap();
        let cw = PulsePrep {
            rel_phase: 0.4,
            ..Default::default()
        };
        let ccw = PulsePrep {
            direction: Direction::Ccw,
            ..cw
        };
        let a = prepare_post_pulse_state(&cw, &space).unwrap();
        let b = prepare_post_pulse_state(&ccw, &space).unwrap();
        assert!(a.max_abs_diff(&DensityState::from_matrix_unchecked(b.matrix().conjugate())) < 1e-15);
    }

    #[test]
    fn dark_prep_is_ground() {
        let space = build_space(1).unwrap();
        let prep = PulsePrep {
            p_bright: 0.0,
            ..Default::default()
        };
        let rho = prepare_post_pulse_state(&prep, &space).unwrap();
        assert_eq!(rho.population(space.index(Level::Down, Level::Down, 0, 0)), 1.0);
        assert_eq!(excited_population(&rho, &space), 0.0);
    }

    #[test]
    fn full_model_populations() {
        let space = build_space(2).unwrap();
        let prep = PulsePrep {
            p_bright: 0.8,
            p_excite: 0.3,
            ..Default::default()
        };
        let rho = prepare_with_model(&prep, &space, PrepModel::Full).unwrap();
        let ee = rho.population(space.index(Level::Excited, Level::Excited, 0, 0));
        assert!((ee - (0.8f64 * 0.3).powi(2)).abs() < 1e-15);
        assert!((excited_population(&rho, &space) - 2.0 * 0.8 * 0.3).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn states_are_physical(pb in 0.0..=1.0f64, pe in 0.0..=1.0f64, ph in -7.0..7.0f64, full in any::<bool>()) {
            let space = build_space(1).unwrap();
            let prep = PulsePrep { p_bright: pb, p_excite: pe, rel_phase: ph, direction: Direction::Cw };
            let model = if full { PrepModel::Full } else { PrepModel::Weak };
            let rho = prepare_with_model(&prep, &space, model).unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(rho.hermiticity_defect() < 1e-14);
            prop_assert!(rho.min_eigenvalue() > -1e-12);
        }
    }
}
