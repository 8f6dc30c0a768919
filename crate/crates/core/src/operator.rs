//! Dense complex operators on finite tensor-product spaces.
//!
//! Every quantum object in the crate (dipoles, ladder operators, density
//! matrices, joint Hamiltonians) is an [`OperatorMatrix`]: a square complex
//! matrix together with the list of factor dimensions it lives on. The factor
//! list is what makes [`partial_trace`] possible after a chain of
//! [`tensor_product`] calls. Products follow the Kronecker convention with the
//! left factor as the most significant index.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hard cap on the dimension of any operator built by tensor products.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Relative tolerance used to decide whether an input is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<C64>,
    space_tag: Vec<usize>,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix{:?}{}", self.space_tag, self.entries)
    }
}

impl OperatorMatrix {
    /// Wraps `entries` with an explicit factor structure.
    pub fn new(entries: DMatrix<C64>, space_tag: Vec<usize>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::arg(format!(
                "operator must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if space_tag.is_empty() || space_tag.iter().any(|&d| d == 0) {
            return Err(Error::arg("space tag must list positive factor dimensions"));
        }
        let prod: usize = space_tag.iter().product();
        if prod != entries.nrows() {
            return Err(Error::arg(format!(
                "space tag {:?} has product {} but operator dimension is {}",
                space_tag,
                prod,
                entries.nrows()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("operator has non-finite entries".into()));
        }
        Ok(Self { entries, space_tag })
    }

    /// Single-factor operator.
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        let n = entries.nrows();
        Self::new(entries, vec![n])
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::from_matrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim), space_tag: vec![dim] }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: DMatrix::zeros(dim, dim), space_tag: vec![dim] }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, &v) in values.iter().enumerate() {
            m[(k, k)] = C64::new(v, 0.0);
        }
        Self { entries: m, space_tag: vec![n] }
    }

    /// `|v><v|` for a state vector `v`.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        let m = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        Self { entries: m, space_tag: vec![n] }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn space_tag(&self) -> &[usize] {
        &self.space_tag
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    /// Replaces the factor structure, keeping the entries.
    pub fn with_space_tag(mut self, space_tag: Vec<usize>) -> Result<Self> {
        let prod: usize = space_tag.iter().product();
        if prod != self.dim() || space_tag.is_empty() {
            return Err(Error::arg(format!(
                "space tag {:?} incompatible with dimension {}",
                space_tag,
                self.dim()
            )));
        }
        self.space_tag = space_tag;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint(), space_tag: self.space_tag.clone() }
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { entries: &self.entries * z, space_tag: self.space_tag.clone() }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let scale = self.norm().max(1.0);
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                if (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `Tr[rho · self]`.
    pub fn expectation(&self, rho: &OperatorMatrix) -> C64 {
        // Tr[AB] = sum_ij A_ij B_ji without forming the product.
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += rho.entries[(i, j)] * self.entries[(j, i)];
            }
        }
        acc
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        check_same_dim(self, rhs)?;
        Ok(self * rhs)
    }

    /// Diagonal entries as real numbers (populations for a density matrix).
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.entries[(k, k)].re).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries * &rhs.entries, space_tag: self.space_tag.clone() }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries + &rhs.entries, space_tag: self.space_tag.clone() }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries - &rhs.entries, space_tag: self.space_tag.clone() }
    }
}

fn check_same_dim(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::arg(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Kronecker product `A ⊗ B` with the default dimension cap.
pub fn tensor_product(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    tensor_product_capped(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_product_capped(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    max_dim: usize,
) -> Result<OperatorMatrix> {
    let dim = a.dim().checked_mul(b.dim()).unwrap_or(usize::MAX);
    if dim > max_dim {
        return Err(Error::Size { dim, max: max_dim });
    }
    let mut tag = a.space_tag.clone();
    tag.extend_from_slice(&b.space_tag);
    Ok(OperatorMatrix { entries: a.entries.kronecker(&b.entries), space_tag: tag })
}

/// Tensor product of a list of operators, left to right.
pub fn tensor_all(ops: &[&OperatorMatrix], max_dim: usize) -> Result<OperatorMatrix> {
    let (first, rest) = ops.split_first().ok_or_else(|| Error::arg("empty tensor product"))?;
    rest.iter().try_fold((*first).clone(), |acc, op| tensor_product_capped(&acc, op, max_dim))
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// original order.
pub fn partial_trace(x: &OperatorMatrix, keep: &[usize]) -> Result<OperatorMatrix> {
    let tag = x.space_tag();
    if tag.len() < 2 {
        return Err(Error::arg("partial trace needs at least two factors"));
    }
    if keep.is_empty() {
        return Err(Error::arg("partial trace must keep at least one factor"));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::arg("duplicate factor index in partial trace"));
    }
    if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= tag.len()) {
        return Err(Error::arg(format!(
            "factor index {bad} out of range for {} factors",
            tag.len()
        )));
    }
    let kept: Vec<bool> = (0..tag.len()).map(|k| keep_sorted.contains(&k)).collect();
    let out_tag: Vec<usize> = keep_sorted.iter().map(|&k| tag[k]).collect();
    let out_dim: usize = out_tag.iter().product();

    // For every full index, precompute (kept index, traced index).
    let n = x.dim();
    let split: Vec<(usize, usize)> = (0..n)
        .map(|mut idx| {
            let mut digits = vec![0usize; tag.len()];
            for f in (0..tag.len()).rev() {
                digits[f] = idx % tag[f];
                idx /= tag[f];
            }
            let (mut k_idx, mut t_idx) = (0usize, 0usize);
            for f in 0..tag.len() {
                if kept[f] {
                    k_idx = k_idx * tag[f] + digits[f];
                } else {
                    t_idx = t_idx * tag[f] + digits[f];
                }
            }
            (k_idx, t_idx)
        })
        .collect();

    let mut out = DMatrix::zeros(out_dim, out_dim);
    for r in 0..n {
        let (rk, rt) = split[r];
        for c in 0..n {
            let (ck, ct) = split[c];
            if rt == ct {
                out[(rk, ck)] += x.entries[(r, c)];
            }
        }
    }
    OperatorMatrix::new(out, out_tag)
}

/// `[V, X] = VX − XV`.
pub fn commutator(v: &OperatorMatrix, x: &OperatorMatrix) -> Result<OperatorMatrix> {
    check_same_dim(v, x)?;
    Ok(&(v * x) - &(x * v))
}

/// `{V, X} = VX + XV` (no factor ½; the superoperator `V₊` adds it).
pub fn anticommutator(v: &OperatorMatrix, x: &OperatorMatrix) -> Result<OperatorMatrix> {
    check_same_dim(v, x)?;
    Ok(&(v * x) + &(x * v))
}

/// Eigendecomposition `H = U diag(λ) U†` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
    space_tag: Vec<usize>,
}

impl HermitianEigen {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if !h.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::arg("operator is not Hermitian within tolerance"));
        }
        let sym = (&h.entries + h.entries.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(h.dim(), h.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self { values, vectors, space_tag: h.space_tag.clone() })
    }

    /// `U f(Λ) U†`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> OperatorMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        OperatorMatrix { entries: scaled * self.vectors.adjoint(), space_tag: self.space_tag.clone() }
    }

    /// Matrix of `op` in the eigenbasis, `U† op U`.
    pub fn to_eigenbasis(&self, op: &OperatorMatrix) -> DMatrix<C64> {
        self.vectors.adjoint() * &op.entries * &self.vectors
    }
}

/// Applies a scalar function to a Hermitian operator through its spectrum.
pub fn hermitian_function(h: &OperatorMatrix, f: impl Fn(f64) -> C64) -> Result<OperatorMatrix> {
    Ok(HermitianEigen::new(h)?.apply(f))
}

/// Trace distance `½‖A − B‖₁` between two Hermitian operators.
pub fn trace_distance(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    let diff = a - b;
    let eig = HermitianEigen::new(&diff)?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn op(n: usize) -> impl Strategy<Value = OperatorMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let m = DMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)));
            OperatorMatrix::from_matrix(m).unwrap()
        })
    }

    proptest! {
        #[test]
        fn commutator_trace_vanishes(a in op(4), b in op(4)) {
            let t = commutator(&a, &b).unwrap().trace();
            prop_assert!(t.norm() <= 1e-12 * (1.0 + a.norm() * b.norm()));
        }

        #[test]
        fn adjoint_distributes_over_kronecker(a in op(2), b in op(3)) {
            let lhs = tensor_product(&a, &b).unwrap().adjoint();
            let rhs = tensor_product(&a.adjoint(), &b.adjoint()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        }

        #[test]
        fn partial_trace_is_linear(a in op(6), b in op(6), s in -2.0f64..2.0) {
            let a = a.with_space_tag(vec![3, 2]).unwrap();
            let b = b.with_space_tag(vec![3, 2]).unwrap();
            let combo = &a + &b.scale_re(s);
            let lhs = partial_trace(&combo, &[0]).unwrap();
            let rhs = &partial_trace(&a, &[0]).unwrap() + &partial_trace(&b, &[0]).unwrap().scale_re(s);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
            prop_assert!((lhs.trace() - combo.trace()).norm() < 1e-12);
        }
    }
}
