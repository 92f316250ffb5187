//! Generators for the Hamiltonian families behind the lower bounds.
//!
//! * [`line_hamiltonian`]: a weighted path whose evolution for `πN/2` moves
//!   `|0⟩` to `|N⟩`.
//! * [`parity_hamiltonian`]: two disjoint copies of that path, wired by a bit
//!   string so that the far end reached from `|0,0⟩` encodes its parity.
//! * [`dense_parity_hamiltonian`]: the parity Hamiltonian tensored with the
//!   normalised all-ones matrix, which is dense but has the same dynamics on
//!   uniform superpositions.
//! * [`circulant_from_string`]: the symmetric circulant built from a sign
//!   string, whose top eigenvalue on the uniform vector is twice the sum.
//! * [`hadamard_tensor`]: `R^{⊗n}`, for which `‖abs(H)‖ = √N·‖H‖`.
//!
//! Basis orderings are fixed: `|i,j⟩ ↦ 2i + j` and `|i,j,k⟩ ↦ (2i + j)·N + k`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{spectral_norm_of, HermitianMatrix, Matrix, C64};

/// Default memory guard for [`dense_parity_hamiltonian`].
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Largest `n` accepted by [`hadamard_tensor`] (dimension `2^12`).
pub const MAX_HADAMARD_FACTORS: usize = 12;

/// A nonempty string of bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Domain("bit string must be nonempty".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..len).map(|_| rng.gen_range(0..2u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// XOR of all bits.
    pub fn parity(&self) -> u8 {
        self.0.iter().fold(0, |acc, b| acc ^ b)
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Domain(format!("invalid bit character `{other}`"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// A nonempty string over `{-1, +1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignString(Vec<i8>);

impl SignString {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Domain("sign string must be nonempty".into()));
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("sign value {s} is not ±1")));
        }
        Ok(Self(signs))
    }

    /// Uniform over all of `{-1, +1}^len`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..len).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&s| s as i64).sum()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl FromStr for SignString {
    type Err = Error;

    /// Accepts `+-+` or comma separated `1,-1,1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let signs = if s.contains(',') {
            s.split(',')
                .map(|tok| match tok.trim() {
                    "1" | "+1" | "+" => Ok(1),
                    "-1" | "-" => Ok(-1),
                    other => Err(Error::Domain(format!("invalid sign `{other}`"))),
                })
                .collect::<Result<Vec<i8>>>()?
        } else {
            s.chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    other => Err(Error::Domain(format!("invalid sign character `{other}`"))),
                })
                .collect::<Result<Vec<i8>>>()?
        };
        Self::new(signs)
    }
}

impl fmt::Display for SignString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Hopping amplitude `√((N-i)(i+1))/N` between sites `i` and `i+1`.
pub fn line_weight(n: usize, i: usize) -> f64 {
    (((n - i) * (i + 1)) as f64).sqrt() / n as f64
}

/// The weighted path on `N+1` sites.
pub fn line_hamiltonian(n: usize) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::Domain("line Hamiltonian needs N >= 1".into()));
    }
    let mut m = Matrix::zeros(n + 1);
    for i in 0..n {
        let w = C64::new(line_weight(n, i), 0.0);
        m[(i, i + 1)] = w;
        m[(i + 1, i)] = w;
    }
    HermitianMatrix::new(m)
}

/// Index of `|i,j⟩` in the parity Hamiltonian.
pub fn parity_index(i: usize, j: usize) -> usize {
    2 * i + j
}

/// Couples `|i,j⟩` to `|i+1, j⊕S_i⟩` with the line weights.
pub fn parity_hamiltonian(s: &BitString) -> Result<HermitianMatrix> {
    let n = s.len();
    let mut m = Matrix::zeros(2 * (n + 1));
    for (i, &bit) in s.bits().iter().enumerate() {
        let w = C64::new(line_weight(n, i), 0.0);
        for j in 0..2 {
            let a = parity_index(i, j as usize);
            let b = parity_index(i + 1, (j ^ bit) as usize);
            m[(a, b)] = w;
            m[(b, a)] = w;
        }
    }
    HermitianMatrix::new(m)
}

/// Index of `|i,j,k⟩` in the dense parity Hamiltonian for an `n`-bit string.
pub fn dense_parity_index(n: usize, i: usize, j: usize, k: usize) -> usize {
    parity_index(i, j) * n + k
}

pub fn dense_parity_hamiltonian(s: &BitString) -> Result<HermitianMatrix> {
    dense_parity_hamiltonian_with_cap(s, DEFAULT_DENSE_CAP)
}

/// `H₂ ⊗ J / N`: every copy `k` of `|i,j⟩` is coupled to every copy `k'` of
/// `|i+1, j⊕S_i⟩` with weight `√((N-i)(i+1))/N²`.
pub fn dense_parity_hamiltonian_with_cap(s: &BitString, cap: usize) -> Result<HermitianMatrix> {
    let n = s.len();
    if n < 2 {
        return Err(Error::Domain("dense parity Hamiltonian needs N >= 2".into()));
    }
    let dim = 2 * n * (n + 1);
    if dim > cap {
        return Err(Error::DimensionCap { requested: dim, cap });
    }
    let mut m = Matrix::zeros(dim);
    for (i, &bit) in s.bits().iter().enumerate() {
        let w = C64::new(line_weight(n, i) / n as f64, 0.0);
        for j in 0..2usize {
            let jn = j ^ bit as usize;
            for k in 0..n {
                for kp in 0..n {
                    let a = dense_parity_index(n, i, j, k);
                    let b = dense_parity_index(n, i + 1, jn, kp);
                    m[(a, b)] = w;
                    m[(b, a)] = w;
                }
            }
        }
    }
    HermitianMatrix::new(m)
}

/// The symmetric circulant of size `2M+1` with first row
/// `(0, s_1, …, s_M, s_M, …, s_1)`; row `r` is row 0 rotated right by `r`.
pub fn circulant_from_string(s: &SignString) -> HermitianMatrix {
    let first = circulant_first_row(s);
    let n = first.len();
    let m = Matrix::from_fn(n, |r, c| C64::new(first[(c + n - r) % n], 0.0));
    HermitianMatrix::new(m).expect("symmetric by construction")
}

pub fn circulant_first_row(s: &SignString) -> Vec<f64> {
    let m = s.len();
    let n = 2 * m + 1;
    let mut row = vec![0.0; n];
    for (j, &sj) in s.signs().iter().enumerate() {
        row[j + 1] = sj as f64;
        row[n - 1 - j] = sj as f64;
    }
    row
}

/// Closed-form eigenvalues of [`circulant_from_string`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirculantSpectrum {
    /// `λ_r = 2 Σ_j s_j cos(2πjr/N)` for `r = 0..N`.
    pub lambdas: Vec<f64>,
    /// `2 Σ_j s_j`, the eigenvalue on the uniform superposition.
    pub lambda0: f64,
}

impl CirculantSpectrum {
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm_of(&self.lambdas)
    }
}

/// `cos(2πm/N)` for `m = 0..N`, symmetrised so that entries `m` and `N-m`
/// are bit-identical.
pub fn cosine_table(n: usize) -> Vec<f64> {
    (0..n).map(|m| (2.0 * PI * m.min(n - m) as f64 / n as f64).cos()).collect()
}

pub fn circulant_spectrum(s: &SignString) -> CirculantSpectrum {
    circulant_spectrum_with_table(s, &cosine_table(2 * s.len() + 1))
}

/// [`circulant_spectrum`] with a precomputed [`cosine_table`] of size `2M+1`.
pub fn circulant_spectrum_with_table(s: &SignString, table: &[f64]) -> CirculantSpectrum {
    let n = 2 * s.len() + 1;
    assert_eq!(table.len(), n, "cosine table size");
    let lambdas = (0..n)
        .map(|r| {
            let sum: f64 = s
                .signs()
                .iter()
                .enumerate()
                .map(|(j, &sj)| sj as f64 * table[((j + 1) * r) % n])
                .sum();
            2.0 * sum
        })
        .collect();
    CirculantSpectrum { lambdas, lambda0: 2.0 * s.sum() as f64 }
}

/// `R^{⊗n}` with `R = [[1, 1], [1, -1]]/√2`.
pub fn hadamard_tensor(n: usize) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::Domain("Hadamard tensor power needs n >= 1".into()));
    }
    if n > MAX_HADAMARD_FACTORS {
        return Err(Error::DimensionCap { requested: 1 << n, cap: 1 << MAX_HADAMARD_FACTORS });
    }
    let scale = 0.5f64.powi((n / 2) as i32) * if n % 2 == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    let m = Matrix::from_fn(1 << n, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign * scale, 0.0)
    });
    HermitianMatrix::new(m)
}

/// Matrices attaining equality in the norm chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `I_N`: the first four links are tight.
    Identity,
    /// `J_N`: the last two links are tight.
    AllOnes,
    /// `R^{⊗n}`: `‖abs(H)‖ = √N·‖H‖`.
    Hadamard,
}

impl FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "all_ones" | "all-ones" => Ok(Self::AllOnes),
            "hadamard" => Ok(Self::Hadamard),
            other => Err(Error::UnknownWitness(other.to_string())),
        }
    }
}

/// `size` is the dimension for identity and all-ones, and the number of
/// tensor factors for Hadamard.
pub fn saturating_witness(kind: WitnessKind, size: usize) -> Result<HermitianMatrix> {
    if size == 0 {
        return Err(Error::Domain("witness size must be positive".into()));
    }
    match kind {
        WitnessKind::Identity => Ok(HermitianMatrix::identity(size)),
        WitnessKind::AllOnes => HermitianMatrix::new(Matrix::from_fn(size, |_, _| C64::new(1.0, 0.0))),
        WitnessKind::Hadamard => hadamard_tensor(size),
    }
}

/// Random Hermitian matrix with entries uniform in `[-1, 1]` (real and, when
/// `complex`, imaginary parts off the diagonal).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, complex: bool, rng: &mut R) -> HermitianMatrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..=1.0), 0.0);
        for j in i + 1..n {
            let im = if complex { rng.gen_range(-1.0..=1.0) } else { 0.0 };
            let z = C64::new(rng.gen_range(-1.0..=1.0), im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::new(m).expect("Hermitian by construction")
}

/// Random labelled tree on `n` vertices with unit-modulus complex edge
/// weights and zero diagonal.
pub fn random_tree_hamiltonian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let mut m = Matrix::zeros(n);
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        let theta = rng.gen_range(0.0..2.0 * PI);
        let z = C64::new(theta.cos(), theta.sin());
        let (a, b) = (labels[parent], labels[v]);
        m[(a, b)] = z;
        m[(b, a)] = z.conj();
    }
    HermitianMatrix::new(m).expect("Hermitian by construction")
}
