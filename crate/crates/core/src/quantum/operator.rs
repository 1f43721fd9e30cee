use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::{Slot, SpaceDescriptor};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-9;

/// Dense square operator with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(CMatrix);

impl Operator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidMatrix {
                what: "operator",
                reason: format!("{}x{} is not square", m.nrows(), m.ncols()),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix {
                what: "operator",
                reason: "non-finite entry".into(),
            });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    /// Build from real entries given row by row.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: rows.len(),
            });
        }
        Self::new(CMatrix::from_row_iterator(
            dim,
            dim,
            rows.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest elementwise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Embed a local operator acting on `slot` into the full space, with the
/// identity on every other slot.
pub fn tensor_embed(local: &Operator, slot: Slot, space: &SpaceDescriptor) -> Result<Operator> {
    let expected = space.local_dim(slot);
    if local.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: local.dim(),
        });
    }
    let target = SpaceDescriptor::slot_position(slot);
    let mut acc = CMatrix::identity(1, 1);
    for s in Slot::ALL {
        let factor = if SpaceDescriptor::slot_position(s) == target {
            local.0.clone()
        } else {
            CMatrix::identity(space.local_dim(s), space.local_dim(s))
        };
        acc = kron(&acc, &factor);
    }
    Ok(Operator(acc))
}

/// `Tr[op · state]`.
pub fn expectation(op: &Operator, state: &DensityState) -> Result<Complex64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: op.dim(),
        });
    }
    Ok(trace_product(&op.0, &state.0))
}

/// `Tr[a · b]` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState(CMatrix);

#[derive(Serialize, Deserialize)]
struct DensityDump {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl DensityState {
    /// Validate and wrap a density matrix. The trace must already be one.
    pub fn new(m: CMatrix) -> Result<Self> {
        let op = Operator::new(m)?;
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidMatrix {
                what: "density state",
                reason: format!("hermiticity defect {defect:e}"),
            });
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidMatrix {
                what: "density state",
                reason: format!("trace {tr} is not 1"),
            });
        }
        let min_ev = op.hermitian_eigenvalues()[0];
        if min_ev < -EIGEN_TOL {
            return Err(Error::InvalidMatrix {
                what: "density state",
                reason: format!("negative eigenvalue {min_ev:e}"),
            });
        }
        Ok(Self(op.0))
    }

    /// Normalize a Hermitian positive matrix to unit trace and validate.
    pub fn normalized(m: CMatrix) -> Result<Self> {
        let tr = m.trace();
        if tr.re <= 0.0 || !tr.re.is_finite() {
            return Err(Error::InvalidMatrix {
                what: "density state",
                reason: format!("cannot normalize trace {tr}"),
            });
        }
        Self::new(m / Complex64::new(tr.re, 0.0))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    /// `|ψ⟩⟨ψ|` for a normalized or unnormalized vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::normalized(&v * v.adjoint())
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0))
    }

    /// Projector onto a single basis state.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        Operator(self.0.clone()).hermitian_eigenvalues()[0]
    }

    pub fn population(&self, index: usize) -> f64 {
        self.0[(index, index)].re
    }

    pub fn max_abs_diff(&self, other: &DensityState) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// JSON matrix dump `{dim, re, im}` with row-major nested arrays.
    pub fn to_json(&self) -> Result<String> {
        let n = self.dim();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&self.0[(i, j)])).collect())
                .collect()
        };
        let dump = DensityDump {
            dim: n,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: DensityDump = serde_json::from_str(text)?;
        let n = dump.dim;
        if dump.re.len() != n || dump.im.len() != n {
            return Err(Error::Parse(format!("expected {n} rows")));
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            if dump.re[i].len() != n || dump.im[i].len() != n {
                return Err(Error::Parse(format!("row {i} does not have {n} columns")));
            }
            for j in 0..n {
                m[(i, j)] = Complex64::new(dump.re[i][j], dump.im[i][j]);
            }
        }
        Self::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::space::build_space;

    fn lowering3() -> Operator {
        // |↑⟩⟨e| on (↓, ↑, e)
        Operator::from_real_rows(3, &[0., 0., 0., 0., 0., 1., 0., 0., 0.]).unwrap()
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(Operator::new(CMatrix::zeros(2, 3)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(Operator::new(m).is_err());
    }

    #[test]
    fn identity_embeds_to_identity() {
        let s = build_space(1).unwrap();
        for slot in Slot::ALL {
            let e = tensor_embed(&Operator::identity(s.local_dim(slot)), slot, &s).unwrap();
            assert_eq!(e, Operator::identity(s.dim()));
        }
    }

    #[test]
    fn embedding_scales_frobenius_norm() {
        let s = build_space(1).unwrap();
        let sigma = lowering3();
        let e = tensor_embed(&sigma, Slot::EmitterA, &s).unwrap();
        assert_eq!(e.dim(), 36);
        // complementary dimension 3·2·2 = 12
        assert!((e.norm_sqr() - sigma.norm_sqr() * 12.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let s = build_space(2).unwrap();
        let a = tensor_embed(&lowering3(), Slot::EmitterA, &s).unwrap();
        let f = s.fock_dim();
        let mut ad = CMatrix::zeros(f, f);
        for n in 1..f {
            ad[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        let b = tensor_embed(&Operator::new(ad).unwrap(), Slot::Ccw, &s).unwrap();
        assert!(a.commutator(&b).norm_sqr() < 1e-24);
    }

    #[test]
    fn embedding_dimension_mismatch() {
        let s = build_space(1).unwrap();
        assert!(matches!(
            tensor_embed(&Operator::identity(3), Slot::Cw, &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn embedding_preserves_spectrum() {
        let s = build_space(1).unwrap();
        let local = Operator::from_real_rows(3, &[1., 0.5, 0., 0.5, -2., 0.25, 0., 0.25, 3.]).unwrap();
        let local_ev = local.hermitian_eigenvalues();
        let ev = tensor_embed(&local, Slot::EmitterB, &s)
            .unwrap()
            .hermitian_eigenvalues();
        // each local eigenvalue appears 12 times
        for (k, l) in local_ev.iter().enumerate() {
            for e in &ev[k * 12..(k + 1) * 12] {
                assert!((e - l).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityState::new(CMatrix::identity(2, 2)).is_err()); // trace 2
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityState::new(m).is_err());
        let mut m = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityState::new(m).is_err()); // not Hermitian
    }

    #[test]
    fn expectation_basics() {
        let rho = DensityState::maximally_mixed(4);
        let e = expectation(&Operator::identity(4), &rho).unwrap();
        assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(expectation(&Operator::identity(3), &rho).is_err());
    }

    #[test]
    fn json_dump_round_trip() {
        let psi = [
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ];
        let rho = DensityState::pure(&psi).unwrap();
        let back = DensityState::from_json(&rho.to_json().unwrap()).unwrap();
        assert_eq!(back, rho);
    }
}
