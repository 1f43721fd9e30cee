//! Fixed-step RK4 integration of the master equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::generator::{Generator, Rk4Work};
use crate::error::{invalid, Error, Result};
use crate::quantum::{operator_trace_product, CMatrix, DensityState, OpenSystem, Operator, OperatorSet};

/// Upper bound on the default step in ns.
pub const MAX_DEFAULT_DT: f64 = 1e-3;
/// Default spacing of stored samples in ns.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormPolicy {
    #[default]
    Raw,
    Renormalized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Step in ns; `None` selects `min(1/(50·rate), 1e-3)`.
    pub dt: Option<f64>,
    /// Store every `stride`-th step; `None` stores about every 0.01 ns.
    pub stride: Option<usize>,
    /// Error (rather than warn) when `dt` exceeds `1/(50·rate)`.
    pub strict_step: bool,
    pub norm_policy: NormPolicy,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: None,
            stride: None,
            strict_step: true,
            norm_policy: NormPolicy::Raw,
        }
    }
}

/// Largest step allowed for a system with the given rate scale.
pub fn step_limit(rate_scale: f64) -> f64 {
    if rate_scale > 0.0 {
        1.0 / (50.0 * rate_scale)
    } else {
        f64::INFINITY
    }
}

pub fn default_dt(rate_scale: f64) -> f64 {
    step_limit(rate_scale).min(MAX_DEFAULT_DT)
}

/// Physicality diagnostics gathered over the stored samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Physicality {
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub max_hermiticity_defect: f64,
}

impl Physicality {
    fn observe(&mut self, rho: &CMatrix) {
        let tr = rho.trace();
        self.max_trace_drift = self.max_trace_drift.max((tr - Complex64::new(1.0, 0.0)).norm());
        self.max_hermiticity_defect = self
            .max_hermiticity_defect
            .max(crate::quantum::matrix_hermiticity_defect(rho));
        let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let ev = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        self.min_eigenvalue = self.min_eigenvalue.min(ev);
    }
}

/// Stored states of an evolution. States are kept on the reachable
/// subspace and embedded on demand.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<CMatrix>,
    support: Vec<usize>,
    full_dim: usize,
    pub norm_policy: NormPolicy,
    pub dt: f64,
    pub physicality: Physicality,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.full_dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Full-space state at sample `k`.
    pub fn state(&self, k: usize) -> DensityState {
        let m = &self.states[k];
        let mut out = CMatrix::zeros(self.full_dim, self.full_dim);
        for (b, &j) in self.support.iter().enumerate() {
            for (a, &i) in self.support.iter().enumerate() {
                out[(i, j)] = m[(a, b)];
            }
        }
        DensityState::from_matrix_unchecked(out)
    }

    /// `Tr[op ρ(t_k)]` without embedding.
    pub fn expectation(&self, k: usize, op: &Operator) -> Complex64 {
        let m = &self.states[k];
        let o = op.matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &i) in self.support.iter().enumerate() {
            for (b, &j) in self.support.iter().enumerate() {
                acc += o[(i, j)] * m[(b, a)];
            }
        }
        acc
    }

    pub fn expectation_series(&self, op: &Operator) -> Vec<f64> {
        (0..self.len()).map(|k| self.expectation(k, op).re).collect()
    }
}

fn check_step(dt: f64, rate_scale: f64, strict: bool) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    let limit = step_limit(rate_scale);
    if dt > limit * (1.0 + 1e-12) {
        if strict {
            return Err(Error::StepTooLarge { dt, limit });
        }
        log::warn!("time step {dt} ns exceeds 1/(50·rate) = {limit} ns");
    }
    Ok(())
}

/// Integrate `rho0` under the operator set's master equation up to `t_end`.
pub fn evolve(rho0: &DensityState, ops: &OperatorSet, t_end: f64, opts: &EvolveOptions) -> Result<Trajectory> {
    evolve_open(rho0, &ops.open_system(), t_end, opts)
}

pub fn evolve_open(rho0: &DensityState, sys: &OpenSystem, t_end: f64, opts: &EvolveOptions) -> Result<Trajectory> {
    if rho0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: rho0.dim(),
        });
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", format!("must be >= 0, got {t_end}")));
    }
    let dt_req = opts.dt.unwrap_or_else(|| default_dt(sys.rate_scale));
    check_step(dt_req, sys.rate_scale, opts.strict_step)?;
    let steps = if t_end == 0.0 {
        0
    } else {
        (t_end / dt_req - 1e-9).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 { dt_req } else { t_end / steps as f64 };
    let stride = opts
        .stride
        .unwrap_or_else(|| ((DEFAULT_SAMPLE_INTERVAL / dt).round() as usize).max(1))
        .max(1);

    let gen = Generator::for_state(sys, rho0.matrix());
    let mut rho = gen.reduce(rho0.matrix());
    let mut work = Rk4Work::new(gen.dim());
    let mut phys = Physicality {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut times = vec![0.0];
    phys.observe(&rho);
    let mut states = vec![rho.clone()];

    for k in 1..=steps {
        gen.rk4_step(&mut rho, dt, &mut work);
        let t = k as f64 * dt;
        if rho.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        if opts.norm_policy == NormPolicy::Renormalized {
            let tr = rho.trace().re;
            rho /= Complex64::new(tr, 0.0);
        }
        if k % stride == 0 || k == steps {
            phys.observe(&rho);
            times.push(t);
            states.push(rho.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        support: gen.support().to_vec(),
        full_dim: sys.dim(),
        norm_policy: opts.norm_policy,
        dt,
        physicality: phys,
    })
}

/// Propagate an arbitrary (not necessarily unit-trace) operator under the
/// generator and record `Tr[obs · X(t)]` at each requested time.
pub(crate) fn propagate_and_observe(
    sys: &OpenSystem,
    x0: &CMatrix,
    observable: &Operator,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<Complex64>> {
    let dt_req = opts.dt.unwrap_or_else(|| default_dt(sys.rate_scale));
    check_step(dt_req, sys.rate_scale, opts.strict_step)?;
    let gen = Generator::for_state(sys, x0);
    let obs = gen.reduce_operator(observable);
    let mut x = gen.reduce(x0);
    let mut work = Rk4Work::new(gen.dim());
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / dt_req - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                gen.rk4_step(&mut x, h, &mut work);
            }
            if x.iter().any(|z| !z.is_finite()) {
                return Err(Error::NonFinite { time: t });
            }
            now = t;
        }
        out.push(operator_trace_product(&obs, &x));
    }
    Ok(out)
}
