//! Dense complex linear algebra for Hermitian matrices.
//!
//! Everything here is exact up to floating point: eigendecomposition by
//! Householder tridiagonalisation followed by implicit-shift QL, and time
//! evolution through the resulting spectral decomposition.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest tolerated `|H_ij - conj(H_ji)|` before a matrix is rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// QL iterations allowed per eigenvalue before giving up.
pub const QL_ITERATION_BUDGET: usize = 100;

/// Unit-norm tolerance for evolution inputs.
pub const STATE_NORM_TOLERANCE: f64 = 1e-10;

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from `n*n` row-major entries.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dim(self.n, v.len())?;
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.n, other.n)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, data })
    }

    /// Entrywise `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |A†A - I|`, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().matmul(self).expect("square");
        prod.max_abs_diff(&Matrix::identity(self.n)).expect("square")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A dense Hermitian matrix.
///
/// Construction symmetrises the input to `(H + H†)/2` when its asymmetry is at
/// most [`HERMITIAN_TOLERANCE`] and rejects it otherwise, so stored entries
/// satisfy `H_ij == conj(H_ji)` bit-for-bit and the diagonal is real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: Matrix,
}

impl HermitianMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        for i in 0..m.n {
            for j in 0..m.n {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let asymmetry = m.hermitian_defect();
        if asymmetry > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { asymmetry });
        }
        let mut inner = m;
        let n = inner.n;
        for i in 0..n {
            inner[(i, i)] = C64::new(inner[(i, i)].re, 0.0);
            for j in i + 1..n {
                let sym = (inner[(i, j)] + inner[(j, i)].conj()) * 0.5;
                inner[(i, j)] = sym;
                // `+ 0.0` keeps a zero imaginary part from turning into -0.0.
                inner[(j, i)] = C64::new(sym.re, -sym.im + 0.0);
            }
        }
        Ok(Self { inner })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_real_rows(rows)?)
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: Matrix::zeros(n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Matrix::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.inner.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { inner: self.inner.scaled(s) }
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

/// A state vector in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    /// `|i⟩` in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// The uniform superposition `n^{-1/2} Σ_i |i⟩`.
    pub fn uniform(n: usize) -> Self {
        let a = 1.0 / (n as f64).sqrt();
        Self { amps: vec![C64::new(a, 0.0); n] }
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Self {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Self { amps: amps.into_iter().map(|z| z / norm).collect() }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Euclidean distance `‖self - other‖`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Eigenvalues in ascending order with the matching unitary eigenvector
/// matrix (column `k` belongs to `eigenvalues[k]`).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_of(&self.eigenvalues)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> Matrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        Matrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj()).sum()
        })
    }

    /// `e^{-iHt} ψ` for the matrix this spectrum came from.
    pub fn evolve(&self, t: f64, psi: &StateVector) -> Result<StateVector> {
        let n = self.dim();
        check_dim(n, psi.dim())?;
        check_normalised(psi)?;
        let v = &self.eigenvectors;
        let amps = psi.amplitudes();
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let c: C64 = (0..n).map(|i| v[(i, k)].conj() * amps[i]).sum();
                c * phase(-self.eigenvalues[k] * t)
            })
            .collect();
        let out = (0..n)
            .map(|i| v.row(i).iter().zip(&coeffs).map(|(a, c)| a * c).sum())
            .collect();
        Ok(StateVector::new(out))
    }

    /// The full propagator `V diag(e^{-iλt}) V†`.
    pub fn unitary(&self, t: f64) -> Matrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let phases: Vec<C64> = self.eigenvalues.iter().map(|&l| phase(-l * t)).collect();
        Matrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum()
        })
    }
}

pub(crate) fn spectral_norm_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()))
}

/// `e^{iθ}`.
pub fn phase(theta: f64) -> C64 {
    C64::new(theta.cos(), theta.sin())
}

fn check_normalised(psi: &StateVector) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > STATE_NORM_TOLERANCE {
        return Err(Error::NotNormalised { norm });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh(h: &HermitianMatrix) -> Result<Spectrum> {
    let (values, vectors) = decompose(h, true)?;
    let vectors = vectors.expect("vectors requested");
    let order = ascending_order(&values);
    let n = h.dim();
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = Matrix::from_fn(n, |i, j| vectors[(i, order[j])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation.
pub fn eigvalsh(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let (values, _) = decompose(h, false)?;
    let order = ascending_order(&values);
    Ok(order.iter().map(|&k| values[k]).collect())
}

/// Spectral norm `‖H‖` of a Hermitian matrix.
pub fn spectral_norm(h: &HermitianMatrix) -> Result<f64> {
    Ok(spectral_norm_of(&eigvalsh(h)?))
}

// Stable: equal eigenvalues keep the order in which QL delivered them.
fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn decompose(h: &HermitianMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>)> {
    let n = h.dim();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Matrix::zeros(0))));
    }
    let mut a = h.matrix().clone();
    let mut q = want_vectors.then(|| Matrix::identity(n));
    tridiagonalize(&mut a, q.as_mut());

    let mut diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    // Rotate the complex subdiagonal onto the nonnegative reals with a
    // diagonal unitary D; the eigenvectors of A are then Q·D·Z.
    let mut d = C64::new(1.0, 0.0);
    let mut phases = Vec::with_capacity(n);
    phases.push(d);
    for i in 0..n - 1 {
        let e = a[(i + 1, i)];
        let mag = e.norm();
        off[i] = mag;
        if mag > 0.0 {
            d *= e / mag;
        }
        phases.push(d);
    }
    if let Some(q) = q.as_mut() {
        for i in 0..n {
            for (j, p) in phases.iter().enumerate() {
                q[(i, j)] *= p;
            }
        }
    }
    tql2(&mut diag, &mut off, q.as_mut())?;
    Ok((diag, q))
}

// Reduces `a` to Hermitian tridiagonal form in place with Householder
// reflections, accumulating them into `q` when given.
fn tridiagonalize(a: &mut Matrix, mut q: Option<&mut Matrix>) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    let zero = C64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    for k in 0..n - 2 {
        let lo = k + 1;
        // Work with x / max|x_i| so that tiny residues cannot underflow;
        // the reflector is invariant under rescaling of v.
        let scale = (lo..n).map(|i| a[(i, k)].norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        let tail: f64 = (lo + 1..n).map(|i| (a[(i, k)] / scale).norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(lo, k)] / scale;
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -ph * xnorm;
        let m = n - lo;
        for i in 0..m {
            v[i] = a[(lo + i, k)] / scale;
        }
        v[0] -= alpha;
        let alpha = alpha * scale;
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // A <- H A on rows lo.., columns k.. (columns left of k are already zero there).
        for c in k..n {
            let s: C64 = (0..m).map(|i| v[i].conj() * a[(lo + i, c)]).sum::<C64>() * tau;
            for i in 0..m {
                a[(lo + i, c)] -= v[i] * s;
            }
        }
        // A <- A H on rows k.., columns lo..
        for r in k..n {
            let s: C64 = (0..m).map(|i| a[(r, lo + i)] * v[i]).sum::<C64>() * tau;
            for i in 0..m {
                a[(r, lo + i)] -= s * v[i].conj();
            }
        }
        // Exact zeros below the subdiagonal.
        a[(lo, k)] = alpha;
        a[(k, lo)] = alpha.conj();
        for i in lo + 1..n {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }
        if let Some(q) = q.as_deref_mut() {
            for r in 0..n {
                let s: C64 = (0..m).map(|i| q[(r, lo + i)] * v[i]).sum::<C64>() * tau;
                for i in 0..m {
                    q[(r, lo + i)] -= s * v[i].conj();
                }
            }
        }
    }
}

// Implicit-shift QL on a real symmetric tridiagonal matrix with diagonal `d`
// and subdiagonal `e` (`e[i]` couples `i` and `i+1`). Rotations are applied
// to the columns of `v` when given.
fn tql2(d: &mut [f64], e: &mut [f64], mut v: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_ITERATION_BUDGET {
                    return Err(Error::IterationFailure { index: l, budget: QL_ITERATION_BUDGET });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let hk = v[(k, i + 1)];
                            let vk = v[(k, i)];
                            v[(k, i + 1)] = vk * s + hk * c;
                            v[(k, i)] = vk * c - hk * s;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `e^{-iHt} ψ`, computed through the eigendecomposition of `H`.
pub fn evolve(h: &HermitianMatrix, t: f64, psi: &StateVector) -> Result<StateVector> {
    check_dim(h.dim(), psi.dim())?;
    check_normalised(psi)?;
    eigh(h)?.evolve(t, psi)
}

/// The propagator `e^{-iHt}`.
pub fn expm_unitary(h: &HermitianMatrix, t: f64) -> Result<Matrix> {
    Ok(eigh(h)?.unitary(t))
}

/// Tensor product with `(A⊗B)[(i·nB + k), (j·nB + l)] = A[i][j]·B[k][l]`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let nb = b.dim();
    Matrix::from_fn(a.dim() * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

/// Tensor product of Hermitian matrices, which is again Hermitian.
pub fn kron_hermitian(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix { inner: kron(a.matrix(), b.matrix()) }
}

/// Entrywise modulus `abs(H)_jk = |H_jk|`.
pub fn abs_entrywise(h: &HermitianMatrix) -> HermitianMatrix {
    let m = h.matrix();
    HermitianMatrix { inner: Matrix::from_fn(h.dim(), |i, j| C64::new(m[(i, j)].norm(), 0.0)) }
}
