//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Tensor products use the
//! row-major, left-factor-slowest Kronecker convention everywhere: for
//! `A ⊗ B` the combined index is `i_a * dim(B) + i_b`, so site 0 of a
//! multi-site register is the most significant digit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CptError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance for algebraic identities (unitarity, hermiticity, traces).
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for spectral quantities (eigenvalues, evolution).
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros before taking logs.
pub const EIGEN_CLAMP: f64 = 1e-14;
/// Default cap on the total dimension of explicitly materialised tensors.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// e^{iθ}
pub fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

pub fn pauli_x() -> CMatrix {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    diag_real(&[1.0, -1.0])
}

/// Kronecker product `a ⊗ b` with the default dimension cap.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    tensor_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_capped(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= cap && c <= cap => {}
        _ => {
            return Err(CptError::Capacity(format!(
                "tensor of {}x{} and {}x{} exceeds dimension cap {cap}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )))
        }
    }
    Ok(a.kronecker(b))
}

/// Tensor product of a sequence of factors, left factor slowest.
pub fn tensor_all<'a, It>(factors: It, cap: usize) -> Result<CMatrix>
where
    It: IntoIterator<Item = &'a CMatrix>,
{
    let mut acc = CMatrix::identity(1, 1);
    for f in factors {
        acc = tensor_capped(&acc, f, cap)?;
    }
    Ok(acc)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// |ψ⟩⟨ψ|
pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on mismatched shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|b⟩
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// ‖M†M − I‖_max
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn require_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(CptError::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Real eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    require_square(m, "Hermitian operator")?;
    let h = hermiticity_residual(m);
    if h > ALGEBRAIC_TOL {
        return Err(CptError::Validation(format!(
            "operator is not Hermitian (residual {h:.3e})"
        )));
    }
    // symmetrise away rounding before handing to the solver
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Checks the density-matrix contract: Hermitian and unit trace within
/// 1e-12, smallest eigenvalue no lower than −1e-10.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    require_square(rho, "density matrix")?;
    let h = hermiticity_residual(rho);
    if h > ALGEBRAIC_TOL {
        return Err(CptError::Validation(format!(
            "density matrix not Hermitian (residual {h:.3e})"
        )));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > ALGEBRAIC_TOL {
        return Err(CptError::Validation(format!(
            "density matrix trace {tr} differs from 1"
        )));
    }
    let (values, _) = hermitian_eigen(rho)?;
    if let Some(&min) = values.first() {
        if min < -SPECTRAL_TOL {
            return Err(CptError::Validation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
    }
    Ok(())
}

/// Reduced state on the `keep` sites of a density matrix over a tensor
/// space whose site dimensions are `site_dims`. Kept sites retain their
/// original relative order.
pub fn partial_trace(rho: &CMatrix, site_dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = site_dims.iter().product();
    if !rho.is_square() || rho.nrows() != total {
        return Err(CptError::Shape(format!(
            "site dims {site_dims:?} give dimension {total}, matrix is {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= site_dims.len()) {
        return Err(CptError::Shape(format!(
            "keep set {keep:?} invalid for {} sites",
            site_dims.len()
        )));
    }
    let traced: Vec<usize> = (0..site_dims.len())
        .filter(|s| !keep_sorted.contains(s))
        .collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&s| site_dims[s]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| site_dims[s]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // strides of each site in the full row-major index
    let mut strides = vec![1usize; site_dims.len()];
    for s in (0..site_dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * site_dims[s + 1];
    }
    let offset = |sites: &[usize], dims: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for (pos, &site) in sites.iter().enumerate().rev() {
            let d = dims[pos];
            off += (idx % d) * strides[site];
            idx /= d;
        }
        off
    };
    let kept_offsets: Vec<usize> = (0..kept_total)
        .map(|i| offset(&keep_sorted, &kept_dims, i))
        .collect();
    let traced_offsets: Vec<usize> = (0..traced_total)
        .map(|i| offset(&traced, &traced_dims, i))
        .collect();

    let mut out = CMatrix::zeros(kept_total, kept_total);
    for (a, &ka) in kept_offsets.iter().enumerate() {
        for (b, &kb) in kept_offsets.iter().enumerate() {
            out[(a, b)] = traced_offsets
                .iter()
                .map(|&t| rho[(ka + t, kb + t)])
                .sum();
        }
    }
    Ok(out)
}

/// Tr ρ²
pub fn purity(rho: &CMatrix) -> f64 {
    (rho * rho).trace().re
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    validate_density(rho)?;
    let (values, _) = hermitian_eigen(rho)?;
    Ok(values
        .into_iter()
        .filter(|&l| l >= EIGEN_CLAMP)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0))
}

/// exp(−iHt) via the eigendecomposition of `h`.
pub fn propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (values, v) = hermitian_eigen(h)?;
    if t == 0.0 {
        return Ok(identity(values.len()));
    }
    let n = values.len();
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        values.iter().map(|&e| phase(-e * t)),
    ));
    Ok(&v * d * v.adjoint())
}

/// U ρ U† with U = exp(−iHt).
pub fn evolve(rho: &CMatrix, h: &CMatrix, t: f64) -> Result<CMatrix> {
    let n = require_square(rho, "density matrix")?;
    if h.shape() != (n, n) {
        return Err(CptError::Shape(format!(
            "Hamiltonian is {}x{}, state is {n}x{n}",
            h.nrows(),
            h.ncols()
        )));
    }
    let u = propagator(h, t)?;
    Ok(&u * rho * u.adjoint())
}

/// Portable text form of a matrix: `{rows, cols, entries: [[re, im], …]}`,
/// entries row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixDoc {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn from_vector(v: &CVector) -> Self {
        MatrixDoc {
            rows: v.len(),
            cols: 1,
            entries: v.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(CptError::Shape(format!(
                "{} entries for a {}x{} matrix",
                self.entries.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(CMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.entries.iter().map(|&[re, im]| c(re, im)),
        ))
    }

    pub fn to_vector(&self) -> Result<CVector> {
        let m = self.to_matrix()?;
        if m.ncols() != 1 {
            return Err(CptError::Shape(format!(
                "expected a column vector, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m.column(0).into_owned())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix documents always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CptError::Parse(e.to_string()))
    }
}
