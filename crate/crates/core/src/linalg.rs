//! Dense complex matrices and the Hermitian spectral calculus used by every
//! inequality check.
//!
//! Everything here is small-dimensional (total dimension well below 100), so
//! the kernels favour accuracy and determinism over blocking or SIMD.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// Relative tolerance on `‖h − h†‖ / (1 + ‖h‖)` accepted by the spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative positivity floor applied before log, inverse and negative powers.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Smallest eigenvalue accepted by log-like matrix functions for a spectrum
/// whose largest eigenvalue is `lambda_max`.
pub fn positivity_floor(lambda_max: f64) -> f64 {
    POSITIVITY_FLOOR * lambda_max.max(1.0)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Checked constructor: length must be `rows * cols` and every entry finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LabError::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| LabError::DimensionOverflow(format!("{rows}x{cols}")))?;
        if entries.len() != expected {
            return Err(LabError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {expected} entries, got {}",
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !z.is_finite()) {
            return Err(LabError::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(LabError::DimensionMismatch(format!(
                "real part has {} entries, imaginary part {}",
                re.len(),
                im.len()
            )));
        }
        let entries = re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect();
        Self::new(rows, cols, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diag(&vec![1.0; n])
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Column vector as an `n x 1` matrix.
    pub fn column(v: &[C64]) -> Self {
        Self { rows: v.len(), cols: 1, entries: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.im).collect()
    }

    pub fn column_vec(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LabError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * p];
        for i in 0..n {
            let row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.entries[i * m + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let other_row = &other.entries[k * p..(k + 1) * p];
                for (o, &b) in row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { rows: n, cols: p, entries: out })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(LabError::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `self - self†` (infinite when not square).
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(h + h†)/2`, the Hermitian part of a square matrix.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            out[(i, i)] = C64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    /// Symmetrizes after checking the relative Hermitian defect against `rel_tol`.
    pub fn hermitize(&self, rel_tol: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(LabError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let defect = self.hermitian_defect();
        let allowed = rel_tol * (1.0 + self.frobenius_norm());
        if !(defect <= allowed) {
            return Err(LabError::NotHermitian { defect, allowed });
        }
        Ok(self.hermitian_part())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, entries }
    }
}

/// Kronecker product: entry `[(i·p+k), (j·q+l)] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let overflow = || {
        LabError::DimensionOverflow(format!(
            "kron of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ))
    };
    let rows = a.rows.checked_mul(b.rows).ok_or_else(overflow)?;
    let cols = a.cols.checked_mul(b.cols).ok_or_else(overflow)?;
    rows.checked_mul(cols).ok_or_else(overflow)?;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for l in 0..b.cols {
                    out.entries[base + l] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Spectral decomposition `h = U diag(λ) U†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `U diag(values) U†`, computed on the upper triangle and mirrored so the
    /// result is exactly Hermitian.
    pub fn reconstruct_with(&self, values: &[f64]) -> ComplexMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            for (k, &v) in values.iter().enumerate() {
                diag += v * u[(i, k)].norm_sqr();
            }
            out[(i, i)] = C64::new(diag, 0.0);
            for j in (i + 1)..n {
                let mut z = C64::new(0.0, 0.0);
                for (k, &v) in values.iter().enumerate() {
                    z += u[(i, k)] * u[(j, k)].conj() * v;
                }
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// The input is symmetrized first; a relative Hermitian defect above
/// [`HERMITIAN_TOL`] is an error. Output is deterministic for identical input.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(LabError::NotSquare { rows: h.rows, cols: h.cols });
    }
    let mut a = h.hermitize(HERMITIAN_TOL)?;
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    let frob = a.frobenius_norm();
    let abs_floor = frob * 1e-18;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotations = 0usize;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= abs_floor {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if mag <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotations += 1;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phase = apq / mag;
                // J = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
                let j_pp = C64::new(c, 0.0);
                let j_pq = C64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;

                // A ← A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                // V ← V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
        if rotations == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LabError::NoConvergence { iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Scalar functions applied through the spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Log,
    Power(f64),
    Inverse,
    Sqrt,
    Exp,
}

impl MatrixFunction {
    fn needs_floor(self) -> bool {
        match self {
            MatrixFunction::Log | MatrixFunction::Inverse | MatrixFunction::Sqrt => true,
            MatrixFunction::Power(alpha) => alpha < 0.0,
            MatrixFunction::Exp => false,
        }
    }
}

/// `U f(Λ) U†` for Hermitian `h`. Logarithms are natural.
///
/// `Power(0)` returns the exact identity, `Power(1)` the symmetrized input and
/// `Power(-1)` is routed through `Inverse`, so the endpoints of a power family
/// reproduce the dedicated functions bit for bit.
pub fn matrix_fn(h: &ComplexMatrix, f: MatrixFunction) -> Result<ComplexMatrix> {
    match f {
        MatrixFunction::Power(alpha) if !alpha.is_finite() => {
            return Err(LabError::InvalidArgument(format!("non-finite exponent {alpha}")));
        }
        MatrixFunction::Power(alpha) if alpha == 0.0 => {
            if !h.is_square() {
                return Err(LabError::NotSquare { rows: h.rows, cols: h.cols });
            }
            h.hermitize(HERMITIAN_TOL)?;
            return Ok(ComplexMatrix::identity(h.rows));
        }
        MatrixFunction::Power(alpha) if alpha == 1.0 => {
            if !h.is_square() {
                return Err(LabError::NotSquare { rows: h.rows, cols: h.cols });
            }
            return h.hermitize(HERMITIAN_TOL);
        }
        MatrixFunction::Power(alpha) if alpha == -1.0 => {
            return matrix_fn(h, MatrixFunction::Inverse);
        }
        _ => {}
    }
    let eig = hermitian_eig(h)?;
    spectral_apply(&eig, f)
}

/// Applies `f` to an existing decomposition.
pub fn spectral_apply(eig: &HermitianEigen, f: MatrixFunction) -> Result<ComplexMatrix> {
    let lambda_min = eig.min();
    let floor = positivity_floor(eig.max());
    if f.needs_floor() && lambda_min < floor {
        return Err(LabError::Positivity { eigenvalue: lambda_min, floor });
    }
    if let MatrixFunction::Power(_) = f {
        if lambda_min < -floor {
            return Err(LabError::Positivity { eigenvalue: lambda_min, floor: -floor });
        }
    }
    let values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| match f {
            MatrixFunction::Log => l.ln(),
            MatrixFunction::Inverse => 1.0 / l,
            MatrixFunction::Sqrt => l.sqrt(),
            MatrixFunction::Exp => l.exp(),
            MatrixFunction::Power(alpha) => l.max(0.0).powf(alpha),
        })
        .collect();
    Ok(eig.reconstruct_with(&values))
}

/// Largest singular value, as `sqrt(λ_max(m†m))`.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    let gram = m.adjoint().matmul(m)?;
    let eig = hermitian_eig(&gram)?;
    Ok(eig.max().max(0.0).sqrt())
}

/// Smallest eigenvalue together with a unit eigenvector achieving it.
#[derive(Debug, Clone)]
pub struct MinEigen {
    pub value: f64,
    pub vector: Vec<C64>,
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<MinEigen> {
    let eig = hermitian_eig(h)?;
    Ok(MinEigen { value: eig.min(), vector: eig.eigenvectors.column_vec(0) })
}
