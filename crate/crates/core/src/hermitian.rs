//! Dense complex Hermitian kernel for the small matrices of the two-qubit model.
//!
//! Eigendecomposition runs cyclic Jacobi on the real symmetric embedding
//! `[[Re H, -Im H], [Im H, Re H]]`. Every eigenvalue of `H` appears twice in the
//! embedding; the duplicates are collapsed by deflating each accepted vector
//! together with its partner `J x`, where `J = [[0, -I], [I, 0]]`.
//!
//! Two-qubit matrices use the A-major basis `|0 e0>, |0 e1>, |1 e0>, |1 e1>`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|m - m^H|` accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails unless `entries.len() == dim²`
    /// and every entry is finite.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, found: entries.len() });
        }
        if let Some(k) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / dim, col: k % dim });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - self^H`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// A complex matrix that is exactly Hermitian.
///
/// Construction checks Hermiticity to [`HERMITIAN_TOL`] and then replaces the
/// input by `(m + m^H) / 2`.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let asym = m.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        Ok(Self::symmetrized(&m))
    }

    /// Hermitian part `(m + m^H) / 2` with no tolerance check.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        Self(out)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_diagonal(diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(v: &[Complex64]) -> Self {
        Self::symmetrized(&ComplexMatrix::outer(v))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Real inner product `tr(self · other)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.0[(i, j)] * other.0[(j, i)]).re;
            }
        }
        acc
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(Complex64::new(factor, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `u · self · u^H`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::symmetrized(&(&(u * &self.0) * &u.adjoint()))
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]`, row-major, dimension `2n`.
    pub fn real_embedding(&self) -> Vec<f64> {
        let n = self.dim();
        let m = 2 * n;
        let mut out = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.0[(i, j)];
                out[i * m + j] = z.re;
                out[(i + n) * m + (j + n)] = z.re;
                out[i * m + (j + n)] = -z.im;
                out[(i + n) * m + j] = z.im;
            }
        }
        out
    }

    /// Inverse of [`real_embedding`](Self::real_embedding). Any real symmetric
    /// `2n x 2n` matrix is accepted; its component commuting with `J` is kept.
    pub fn from_real_embedding(n: usize, y: &[f64]) -> Self {
        let m = 2 * n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let re = 0.5 * (y[i * m + j] + y[(i + n) * m + (j + n)]);
                let im = 0.5 * (y[(i + n) * m + j] - y[i * m + (j + n)]);
                out[(i, j)] = Complex64::new(re, im);
            }
        }
        Self::symmetrized(&out)
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian {:?}", self.0)
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl Spectrum {
    /// `Σ_k λ_k v_k v_k^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let mut out = ComplexMatrix::zeros(n);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * *lam;
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Real symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// `a` is row-major `n x n`; only symmetry up to rounding is assumed. Returns
/// eigenvalues in descending order and the eigenvectors as columns of a
/// row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != n * n {
        return Err(Error::Dimension { expected: n * n, found: a.len() });
    }
    let mut m = a.to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[b * n + b].total_cmp(&m[a * n + a]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + col] = v[i * n + k];
        }
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn symmetric_min_eigenvalue(a: &[f64], n: usize) -> Result<f64> {
    let (vals, _) = symmetric_eigen(a, n)?;
    Ok(*vals.last().expect("n > 0"))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<Spectrum> {
    let n = m.dim();
    let two_n = 2 * n;
    let (vals, vecs) = symmetric_eigen(&m.real_embedding(), two_n)?;

    let column = |k: usize| -> Vec<f64> { (0..two_n).map(|i| vecs[i * two_n + k]).collect() };
    // J x for x = (a; b) is (-b; a).
    let partner = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; two_n];
        for i in 0..n {
            out[i] = -x[n + i];
            out[n + i] = x[i];
        }
        out
    };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let scale = vals.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let cluster_tol = 1e-9 * scale;
    let mut remaining: Vec<(f64, Vec<f64>)> = (0..two_n).map(|k| (vals[k], column(k))).collect();
    let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(2 * n);
    let mut eigenvectors = Vec::with_capacity(n);

    while eigenvectors.len() < n {
        // Deflate every remaining candidate against accepted (x, Jx) pairs.
        for (_, x) in remaining.iter_mut() {
            for a in &accepted {
                let d = dot(x, a);
                for (xi, ai) in x.iter_mut().zip(a) {
                    *xi -= d * ai;
                }
            }
        }
        remaining.retain(|(_, x)| dot(x, x).sqrt() > 1e-6);
        let top = match remaining.first() {
            Some((lam, _)) => *lam,
            None => return Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS }),
        };
        let best = remaining
            .iter()
            .enumerate()
            .filter(|(_, (lam, _))| *lam >= top - cluster_tol)
            .max_by(|(_, (_, a)), (_, (_, b))| dot(a, a).total_cmp(&dot(b, b)))
            .map(|(i, _)| i)
            .expect("non-empty cluster");
        let (_, mut x) = remaining.remove(best);
        let norm = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|xi| *xi /= norm);
        let jx = partner(&x);
        eigenvectors.push((0..n).map(|i| Complex64::new(x[i], x[n + i])).collect::<Vec<_>>());
        accepted.push(x);
        accepted.push(jx);
    }

    let mat = m.matrix();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = eigenvectors
        .into_iter()
        .map(|v| {
            let mut lam = 0.0;
            for i in 0..n {
                for j in 0..n {
                    lam += (v[i].conj() * mat[(i, j)] * v[j]).re;
                }
            }
            (lam, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Eigenvalues only, descending.
pub fn eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    // The embedding spectrum is each eigenvalue twice; take every other one.
    let (vals, _) = symmetric_eigen(&m.real_embedding(), 2 * m.dim())?;
    Ok(vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Partial transpose on qubit A of a 4x4 two-qubit operator.
pub fn partial_transpose_a(rho: &HermitianMatrix) -> Result<HermitianMatrix> {
    if rho.dim() != 4 {
        return Err(Error::Dimension { expected: 4, found: rho.dim() });
    }
    let mut out = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * a + i, 2 * b + j)] = rho[(2 * b + i, 2 * a + j)];
                }
            }
        }
    }
    Ok(HermitianMatrix(out))
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(m: &HermitianMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// Negativity `||rho^{T_A}||_Tr - Tr rho`, normalized to 1 on a maximally
/// entangled two-qubit state. Unnormalized states with trace up to 1 are
/// accepted; the result is clipped at 0.
pub fn negativity(rho: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension { expected: 4, found: rho.dim() });
    }
    let min = *eigenvalues(rho)?.last().expect("dim 4");
    if min < -1e-9 {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let tr = rho.trace();
    if tr > 1.0 + 1e-9 {
        return Err(Error::TraceExceeded { trace: tr });
    }
    let pt = partial_transpose_a(rho)?;
    Ok((trace_norm(&pt)? - tr).max(0.0))
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(*eigenvalues(m)?.last().expect("non-empty") >= -tol)
}
