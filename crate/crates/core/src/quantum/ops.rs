use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::operator::{tensor_embed, CMatrix, Operator};
use super::params::DeviceParams;
use super::space::{Level, Slot, SpaceDescriptor};
use crate::error::{invalid, Result};

/// A collapse operator `√rate · operator`.
#[derive(Debug, Clone)]
pub struct CollapseOperator {
    pub label: String,
    pub rate: f64,
    pub operator: Operator,
}

impl CollapseOperator {
    pub fn new(label: impl Into<String>, rate: f64, operator: Operator) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(invalid("rate", format!("collapse rate must be >= 0, got {rate}")));
        }
        Ok(Self {
            label: label.into(),
            rate,
            operator,
        })
    }

    pub fn weighted(&self) -> Operator {
        self.operator.scale_real(self.rate.sqrt())
    }
}

/// Generator data of a Lindblad master equation: a Hamiltonian and a list of
/// collapse operators on a common space.
#[derive(Debug, Clone)]
pub struct OpenSystem {
    pub hamiltonian: Operator,
    pub collapse: Vec<CollapseOperator>,
    /// Largest rate in the model (rad/ns); sets the default time step.
    pub rate_scale: f64,
}

impl OpenSystem {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn with_collapse(mut self, c: CollapseOperator) -> Self {
        self.rate_scale = self.rate_scale.max(c.rate);
        self.collapse.push(c);
        self
    }
}

/// Reference frame of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Rotating at the cavity frequency ω₀; ω₀ drops out of every diagonal term.
    #[default]
    Rotating,
    Lab,
}

/// System operators on the two-emitter, two-mode space.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub space: SpaceDescriptor,
    pub params: DeviceParams,
    pub sigma1: Operator,
    pub sigma2: Operator,
    pub a_cw: Operator,
    pub a_ccw: Operator,
    pub s1: Operator,
    pub s2: Operator,
    pub hamiltonian: Operator,
    pub lindblad_ops: Vec<CollapseOperator>,
}

/// Emitter lowering operator |↑⟩⟨e| on (↓, ↑, e).
pub(crate) fn emitter_lowering() -> Operator {
    let mut m = CMatrix::zeros(3, 3);
    m[(Level::Up.index(), Level::Excited.index())] = Complex64::new(1.0, 0.0);
    Operator::from_matrix_unchecked(m)
}

pub(crate) fn mode_annihilation(fock_dim: usize) -> Operator {
    let mut m = CMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Operator::from_matrix_unchecked(m)
}

/// Standing-wave combination (a_cw e^{iθ} + a_ccw e^{-iθ})/√2.
fn standing_wave(a_cw: &Operator, a_ccw: &Operator, phase: f64) -> Operator {
    let plus = Complex64::from_polar(FRAC_1_SQRT_2, phase);
    let minus = Complex64::from_polar(FRAC_1_SQRT_2, -phase);
    &a_cw.scale(plus) + &a_ccw.scale(minus)
}

pub fn build_operators(params: &DeviceParams, space: &SpaceDescriptor) -> Result<OperatorSet> {
    build_operators_in_frame(params, space, Frame::Rotating)
}

pub fn build_operators_in_frame(
    params: &DeviceParams,
    space: &SpaceDescriptor,
    frame: Frame,
) -> Result<OperatorSet> {
    params.validate()?;
    if space.n_max() < 2 {
        log::warn!(
            "n_max = {} cannot hold two photons in one mode; double-excitation dynamics will be truncated",
            space.n_max()
        );
    }
    let sigma = emitter_lowering();
    let a = mode_annihilation(space.fock_dim());
    let sigma1 = tensor_embed(&sigma, Slot::EmitterA, space)?;
    let sigma2 = tensor_embed(&sigma, Slot::EmitterB, space)?;
    let a_cw = tensor_embed(&a, Slot::Cw, space)?;
    let a_ccw = tensor_embed(&a, Slot::Ccw, space)?;
    let s1 = standing_wave(&a_cw, &a_ccw, params.theta);
    let s2 = standing_wave(&a_cw, &a_ccw, params.phi);

    let n_e1 = &sigma1.adjoint() * &sigma1;
    let n_e2 = &sigma2.adjoint() * &sigma2;
    let n_cw = &a_cw.adjoint() * &a_cw;
    let n_ccw = &a_ccw.adjoint() * &a_ccw;

    let w0 = match frame {
        Frame::Rotating => 0.0,
        Frame::Lab => params.omega0,
    };
    let (d1, d2) = params.emitter_detunings();
    let mut h = &n_e1.scale_real(w0 + d1) + &n_e2.scale_real(w0 + d2);
    h = &h + &(&n_cw + &n_ccw).scale_real(w0);
    let coupling =
        &(&s1.adjoint() * &sigma1).scale_real(params.g1) + &(&s2.adjoint() * &sigma2).scale_real(params.g2);
    h = &h + &(&coupling + &coupling.adjoint());

    let lindblad_ops = vec![
        CollapseOperator::new("emitter1_decay", params.gamma1, sigma1.clone())?,
        CollapseOperator::new("emitter2_decay", params.gamma2, sigma2.clone())?,
        CollapseOperator::new("cw_leak", params.kappa, a_cw.clone())?,
        CollapseOperator::new("ccw_leak", params.kappa, a_ccw.clone())?,
        CollapseOperator::new("emitter1_dephasing", params.gamma_d1, n_e1)?,
        CollapseOperator::new("emitter2_dephasing", params.gamma_d2, n_e2)?,
    ];

    Ok(OperatorSet {
        space: *space,
        params: *params,
        sigma1,
        sigma2,
        a_cw,
        a_ccw,
        s1,
        s2,
        hamiltonian: h,
        lindblad_ops,
    })
}

impl OperatorSet {
    pub fn open_system(&self) -> OpenSystem {
        OpenSystem {
            hamiltonian: self.hamiltonian.clone(),
            collapse: self.lindblad_ops.clone(),
            rate_scale: self.params.rate_scale(),
        }
    }

    pub fn number_cw(&self) -> Operator {
        &self.a_cw.adjoint() * &self.a_cw
    }

    pub fn number_ccw(&self) -> Operator {
        &self.a_ccw.adjoint() * &self.a_ccw
    }

    /// σ₁†σ₁ + σ₂†σ₂.
    pub fn excitation_number(&self) -> Operator {
        &(&self.sigma1.adjoint() * &self.sigma1) + &(&self.sigma2.adjoint() * &self.sigma2)
    }

    /// Output-field operator √κ a_cw.
    pub fn output_cw(&self) -> Operator {
        self.a_cw.scale_real(self.params.kappa.sqrt())
    }

    pub fn output_ccw(&self) -> Operator {
        self.a_ccw.scale_real(self.params.kappa.sqrt())
    }
}
