//! Lindblad generator in dense reference form and in a compiled sparse form
//! restricted to the subspace a given initial state can reach.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, DensityState, OpenSystem, Operator, OperatorSet};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense reference evaluation of `−i[H,ρ] + Σ (LρL† − ½{L†L,ρ})` over the
/// collapse list of `ops`.
pub fn lindblad_rhs(rho: &DensityState, ops: &OperatorSet) -> Result<CMatrix> {
    lindblad_rhs_open(rho.matrix(), &ops.open_system())
}

/// Dense reference evaluation for an arbitrary open system.
pub fn lindblad_rhs_open(rho: &CMatrix, sys: &OpenSystem) -> Result<CMatrix> {
    if rho.nrows() != sys.dim() || rho.ncols() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: rho.nrows(),
        });
    }
    let h = sys.hamiltonian.matrix();
    let mi = Complex64::new(0.0, -1.0);
    let mut out = (h * rho - rho * h) * mi;
    let half = Complex64::new(0.5, 0.0);
    for c in &sys.collapse {
        if c.rate == 0.0 {
            continue;
        }
        let l = c.weighted().into_matrix();
        let ld = l.adjoint();
        let ldl = &ld * &l;
        out += &l * rho * &ld - (&ldl * rho + rho * &ldl) * half;
    }
    Ok(out)
}

type Entries = Vec<(usize, usize, Complex64)>;

fn nonzeros(m: &CMatrix, support: &[usize]) -> Entries {
    let mut out = Vec::new();
    for (b, &j) in support.iter().enumerate() {
        for (a, &i) in support.iter().enumerate() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((a, b, v));
            }
        }
    }
    out
}

/// Basis states reachable from `seeds` under the Hamiltonian and every
/// collapse operator (and its `L†L`). Returned sorted.
pub fn reachable_support(sys: &OpenSystem, seeds: &[usize]) -> Vec<usize> {
    let n = sys.dim();
    let mut mats: Vec<CMatrix> = vec![sys.hamiltonian.matrix().clone()];
    for c in sys.collapse.iter().filter(|c| c.rate > 0.0) {
        let l = c.operator.matrix();
        mats.push(l.adjoint() * l);
        mats.push(l.clone());
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(c) = queue.pop_front() {
        for m in &mats {
            for r in 0..n {
                if !seen[r] && m[(r, c)] != ZERO {
                    seen[r] = true;
                    queue.push_back(r);
                }
            }
        }
    }
    (0..n).filter(|&i| seen[i]).collect()
}

/// Indices carrying weight on the diagonal of `rho`. For a positive matrix
/// these bound the support of every entry.
pub fn diagonal_support(rho: &CMatrix) -> Vec<usize> {
    (0..rho.nrows()).filter(|&i| rho[(i, i)] != ZERO).collect()
}

/// Sparse Lindblad generator acting on matrices indexed by `support`.
#[derive(Debug, Clone)]
pub struct Generator {
    support: Vec<usize>,
    full_dim: usize,
    /// Entries of `−i H_eff` with `H_eff = H − (i/2) Σ L†L`.
    drift: Entries,
    jumps: Vec<Entries>,
}

impl Generator {
    /// Generator on the full space.
    pub fn new(sys: &OpenSystem) -> Self {
        let all: Vec<usize> = (0..sys.dim()).collect();
        Self::restricted(sys, all)
    }

    /// Generator on the subspace reachable from the support of `rho0`.
    pub fn for_state(sys: &OpenSystem, rho0: &CMatrix) -> Self {
        let support = reachable_support(sys, &diagonal_support(rho0));
        Self::restricted(sys, support)
    }

    /// Generator on a caller-supplied invariant subspace.
    pub fn restricted(sys: &OpenSystem, support: Vec<usize>) -> Self {
        let mi = Complex64::new(0.0, -1.0);
        let mut h_eff: CMatrix = sys.hamiltonian.matrix().clone();
        let mut jumps = Vec::new();
        for c in sys.collapse.iter().filter(|c| c.rate > 0.0) {
            let l = c.weighted().into_matrix();
            h_eff -= (l.adjoint() * &l) * Complex64::new(0.0, 0.5);
            let e = nonzeros(&l, &support);
            if !e.is_empty() {
                jumps.push(e);
            }
        }
        let drift = nonzeros(&(h_eff * mi), &support);
        Self {
            support,
            full_dim: sys.dim(),
            drift,
            jumps,
        }
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// True when the support is closed under the generator's operators.
    pub fn is_invariant(sys: &OpenSystem, support: &[usize]) -> bool {
        let mut sorted = support.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        reachable_support(sys, &sorted) == sorted
    }

    /// Restrict a full-space matrix to the support.
    pub fn reduce(&self, m: &CMatrix) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |a, b| m[(self.support[a], self.support[b])])
    }

    /// Embed a reduced matrix back into the full space.
    pub fn embed(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.full_dim, self.full_dim);
        for (b, &j) in self.support.iter().enumerate() {
            for (a, &i) in self.support.iter().enumerate() {
                out[(i, j)] = m[(a, b)];
            }
        }
        out
    }

    /// Reduced copy of a full-space operator.
    pub fn reduce_operator(&self, op: &Operator) -> CMatrix {
        self.reduce(op.matrix())
    }

    /// `out ← 𝓛(rho)` for an arbitrary (not necessarily Hermitian) matrix.
    pub fn apply_general(&self, rho: &CMatrix, out: &mut CMatrix) {
        let n = self.dim();
        out.fill(ZERO);
        for &(r, c, v) in &self.drift {
            let vc = v.conj();
            for j in 0..n {
                out[(r, j)] += v * rho[(c, j)];
                out[(j, r)] += rho[(j, c)] * vc;
            }
        }
        self.add_jumps(rho, out);
    }

    fn add_jumps(&self, rho: &CMatrix, out: &mut CMatrix) {
        for e in &self.jumps {
            for &(r, c, v) in e {
                for &(s, d, w) in e {
                    out[(r, s)] += v * w.conj() * rho[(c, d)];
                }
            }
        }
    }

    /// `out ← 𝓛(rho)` on the reduced space; `rho` must be Hermitian.
    pub fn apply(&self, rho: &CMatrix, out: &mut CMatrix) {
        let n = self.dim();
        let mut x = CMatrix::zeros(n, n);
        for &(r, c, v) in &self.drift {
            for j in 0..n {
                x[(r, j)] += v * rho[(c, j)];
            }
        }
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] = x[(i, j)] + x[(j, i)].conj();
            }
        }
        self.add_jumps(rho, out);
    }

    /// Dense vectorized superoperator (column stacking) on the reduced space.
    pub fn superoperator(&self) -> CMatrix {
        let n = self.dim();
        let mut sup = CMatrix::zeros(n * n, n * n);
        let mut basis = CMatrix::zeros(n, n);
        let mut image = CMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                basis[(i, j)] = Complex64::new(1.0, 0.0);
                self.apply_general(&basis, &mut image);
                basis[(i, j)] = ZERO;
                let col = i + j * n;
                for q in 0..n {
                    for p in 0..n {
                        sup[(p + q * n, col)] = image[(p, q)];
                    }
                }
            }
        }
        sup
    }

    /// One classical fourth-order Runge–Kutta step, followed by
    /// Hermitian symmetrization.
    pub(crate) fn rk4_step(&self, rho: &mut CMatrix, dt: f64, work: &mut Rk4Work) {
        let n = self.dim();
        let h = Complex64::new(dt, 0.0);
        let half = Complex64::new(dt / 2.0, 0.0);
        self.apply(rho, &mut work.k1);
        work.tmp.copy_from(rho);
        work.tmp.zip_apply(&work.k1, |t, k| *t += half * k);
        self.apply(&work.tmp, &mut work.k2);
        work.tmp.copy_from(rho);
        work.tmp.zip_apply(&work.k2, |t, k| *t += half * k);
        self.apply(&work.tmp, &mut work.k3);
        work.tmp.copy_from(rho);
        work.tmp.zip_apply(&work.k3, |t, k| *t += h * k);
        self.apply(&work.tmp, &mut work.k4);
        let sixth = Complex64::new(dt / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                rho[(i, j)] += sixth
                    * (work.k1[(i, j)] + two * work.k2[(i, j)] + two * work.k3[(i, j)] + work.k4[(i, j)]);
            }
        }
        for j in 0..n {
            for i in 0..j {
                let avg = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
                rho[(i, j)] = avg;
                rho[(j, i)] = avg.conj();
            }
            rho[(j, j)].im = 0.0;
        }
    }
}

pub(crate) struct Rk4Work {
    k1: CMatrix,
    k2: CMatrix,
    k3: CMatrix,
    k4: CMatrix,
    tmp: CMatrix,
}

impl Rk4Work {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k1: CMatrix::zeros(n, n),
            k2: CMatrix::zeros(n, n),
            k3: CMatrix::zeros(n, n),
            k4: CMatrix::zeros(n, n),
            tmp: CMatrix::zeros(n, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{build_operators, build_space, DeviceParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> DensityState {
        let a = CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        DensityState::normalized(&a * a.adjoint()).unwrap()
    }

    #[test]
    fn identity_is_stationary_without_dissipation() {
        let ops = build_operators(&DeviceParams::default(), &build_space(1).unwrap()).unwrap();
        let mut sys = ops.open_system();
        sys.collapse.clear();
        let rho = DensityState::maximally_mixed(sys.dim());
        let d = lindblad_rhs_open(rho.matrix(), &sys).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn rhs_is_traceless_and_sparse_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ops = build_operators(&DeviceParams::default(), &build_space(1).unwrap()).unwrap();
        let sys = ops.open_system();
        let gen = Generator::new(&sys);
        for _ in 0..5 {
            let rho = random_state(sys.dim(), &mut rng);
            let dense = lindblad_rhs(&rho, &ops).unwrap();
            assert!(dense.trace().norm() < 1e-12);
            let mut sparse = CMatrix::zeros(sys.dim(), sys.dim());
            gen.apply(rho.matrix(), &mut sparse);
            let diff = (&dense - &sparse).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "sparse/dense mismatch {diff}");
        }
    }

    #[test]
    fn superoperator_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ops = build_operators(&DeviceParams::default(), &build_space(1).unwrap()).unwrap();
        let sys = ops.open_system();
        let bright = ops.space.bright_indices();
        let gen = Generator::restricted(&sys, bright);
        let n = gen.dim();
        let rho = random_state(n, &mut rng);
        let mut out = CMatrix::zeros(n, n);
        gen.apply(rho.matrix(), &mut out);
        let v = nalgebra::DVector::from_column_slice(rho.matrix().as_slice());
        let w = gen.superoperator() * v;
        let diff = (w - nalgebra::DVector::from_column_slice(out.as_slice()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn bright_sector_is_invariant_and_reduction_is_exact() {
        let ops = build_operators(&DeviceParams::default(), &build_space(2).unwrap()).unwrap();
        let sys = ops.open_system();
        assert!(Generator::is_invariant(&sys, &ops.space.bright_indices()));
        let seed = ops.space.index(
            crate::quantum::Level::Excited,
            crate::quantum::Level::Up,
            0,
            0,
        );
        let rho = DensityState::basis(sys.dim(), seed);
        let gen = Generator::for_state(&sys, rho.matrix());
        assert!(gen.dim() < sys.dim());
        let mut reduced = CMatrix::zeros(gen.dim(), gen.dim());
        gen.apply(&gen.reduce(rho.matrix()), &mut reduced);
        let dense = lindblad_rhs(&rho, &ops).unwrap();
        let diff = (&gen.embed(&reduced) - &dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13);
    }
}
