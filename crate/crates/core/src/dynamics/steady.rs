//! Steady state under incoherent pumping `√P σⱼ†` of both emitters.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evolve::default_dt;
use super::generator::{Generator, Rk4Work};
use crate::error::{invalid, Error, Result};
use crate::quantum::{CMatrix, CollapseOperator, DensityState, OpenSystem, Operator, OperatorSet};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SteadyStateMethod {
    /// Direct solve of the vectorized Liouvillian with a trace constraint.
    #[default]
    NullSpace,
    /// Integrate until the state stops changing; uses `O(dim²)` memory.
    LongTime { t_max_ns: f64, tol: f64 },
}

const RESIDUAL_TOL: f64 = 1e-10;
const NULL_PIVOT_TOL: f64 = 1e-11;

/// Add pump collapse operators `√P σ₁†`, `√P σ₂†` to the operator set's
/// master equation.
pub fn pumped_system(ops: &OperatorSet, pump_rate: f64) -> Result<OpenSystem> {
    pumped_open_system(ops.open_system(), &[&ops.sigma1, &ops.sigma2], pump_rate)
}

pub(crate) fn pumped_open_system(mut sys: OpenSystem, lowering: &[&Operator], pump_rate: f64) -> Result<OpenSystem> {
    if !(pump_rate > 0.0 && pump_rate.is_finite()) {
        return Err(invalid("pump_rate", format!("must be > 0, got {pump_rate}")));
    }
    for (k, s) in lowering.iter().enumerate() {
        sys = sys.with_collapse(CollapseOperator::new(format!("emitter{}_pump", k + 1), pump_rate, s.adjoint())?);
    }
    Ok(sys)
}

/// Steady state of the pumped two-emitter system, restricted to the sector
/// in which neither emitter sits in the dark level.
pub fn steady_state(ops: &OperatorSet, pump_rate: f64) -> Result<DensityState> {
    steady_state_with(ops, pump_rate, SteadyStateMethod::NullSpace)
}

pub fn steady_state_with(ops: &OperatorSet, pump_rate: f64, method: SteadyStateMethod) -> Result<DensityState> {
    let sys = pumped_system(ops, pump_rate)?;
    steady_state_in_sector(&sys, &ops.space.bright_indices(), method)
}

/// Unique stationary state of `sys` on an invariant sector.
pub fn steady_state_in_sector(sys: &OpenSystem, sector: &[usize], method: SteadyStateMethod) -> Result<DensityState> {
    if !Generator::is_invariant(sys, sector) {
        return Err(invalid("sector", "not invariant under the generator"));
    }
    let mut sorted = sector.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let gen = Generator::restricted(sys, sorted);
    let reduced = match method {
        SteadyStateMethod::NullSpace => null_space_solve(&gen)?,
        SteadyStateMethod::LongTime { t_max_ns, tol } => long_time_solve(&gen, sys.rate_scale, t_max_ns, tol)?,
    };
    DensityState::normalized(gen.embed(&reduced))
}

fn residual(gen: &Generator, rho: &CMatrix) -> f64 {
    let mut out = CMatrix::zeros(gen.dim(), gen.dim());
    gen.apply(rho, &mut out);
    out.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn null_space_solve(gen: &Generator) -> Result<CMatrix> {
    let n = gen.dim();
    let mut sup = gen.superoperator();
    let scale = sup.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let null_dim = {
        let u = sup.clone().full_piv_lu().u();
        (0..n * n).filter(|&i| u[(i, i)].norm() <= NULL_PIVOT_TOL * scale).count()
    };
    if null_dim > 1 {
        log::warn!("Liouvillian null space has dimension {null_dim}");
        return Err(Error::DegenerateSteadyState { residual: 0.0 });
    }
    // Replace the first equation by Tr ρ = 1 (rows are scaled to match).
    for c in 0..n * n {
        sup[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..n {
        sup[(0, i + i * n)] = Complex64::new(scale, 0.0);
    }
    let mut rhs = DVector::zeros(n * n);
    rhs[0] = Complex64::new(scale, 0.0);
    let x = sup
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateSteadyState { residual: f64::NAN })?;
    let mut rho = CMatrix::from_column_slice(n, n, x.as_slice());
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    check_solution(gen, &rho, scale)?;
    Ok(rho)
}

fn check_solution(gen: &Generator, rho: &CMatrix, scale: f64) -> Result<()> {
    let r = residual(gen, rho);
    if !r.is_finite() || r > RESIDUAL_TOL * scale {
        return Err(Error::DegenerateSteadyState { residual: r });
    }
    let min_ev = rho.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min_ev < -1e-8 {
        // A non-positive solution of the constrained system signals a null
        // space with more than one direction.
        return Err(Error::DegenerateSteadyState { residual: r });
    }
    Ok(())
}

fn long_time_solve(gen: &Generator, rate_scale: f64, t_max: f64, tol: f64) -> Result<CMatrix> {
    let n = gen.dim();
    let dt = default_dt(rate_scale);
    let mut rho = CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0);
    let mut work = Rk4Work::new(n);
    let check_every = ((0.1 / dt).round() as usize).max(1);
    let mut t = 0.0;
    let mut last = rho.clone();
    while t < t_max {
        for _ in 0..check_every {
            gen.rk4_step(&mut rho, dt, &mut work);
        }
        t += check_every as f64 * dt;
        if rho.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        let change = (&rho - &last).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if change < tol {
            return Ok(rho);
        }
        last.copy_from(&rho);
    }
    Err(Error::DegenerateSteadyState {
        residual: residual(gen, &rho),
    })
}

/// `max |𝓛ρ|` for a full-space state.
pub fn steady_state_residual(sys: &OpenSystem, rho: &DensityState) -> f64 {
    let gen = Generator::new(sys);
    residual(&gen, rho.matrix())
}
