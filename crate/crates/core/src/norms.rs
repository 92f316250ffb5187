//! The norm hierarchy that governs simulation cost.
//!
//! For Hermitian `H` of dimension `N` with at most `k` nonzeros per row:
//!
//! ```text
//! max(H) ≤ mcn(H) ≤ ‖H‖ ≤ ‖abs(H)‖ ≤ ‖H‖₁ ≤ √N·mcn(H) ≤ N·max(H)
//!                                   ‖H‖₁ ≤ √k·mcn(H) ≤ k·max(H)
//! ```
//!
//! [`norm_chain_report`] evaluates every link with a relative slack so that
//! violations can be told apart from rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{abs_entrywise, eigvalsh, spectral_norm_of, HermitianMatrix};

/// Links with relative slack at or above this count as satisfied.
pub const SLACK_TOLERANCE: f64 = -1e-9;

/// Absolute floor of the slack denominator for near-zero norms.
pub const SLACK_FLOOR: f64 = 1e-12;

/// Tolerance for the two equalities checked alongside the chain.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub n: usize,
    /// Maximum number of nonzero entries in any row.
    pub k: usize,
    pub max_norm: f64,
    pub mcn: f64,
    pub spectral: f64,
    pub abs_spectral: f64,
    pub one_norm: f64,
}

/// Maximum column norm, `max_j ‖H e_j‖`.
pub fn max_column_norm(h: &HermitianMatrix) -> f64 {
    let n = h.dim();
    (0..n)
        .map(|j| (0..n).map(|i| h[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Induced 1-norm, the maximum absolute column sum.
pub fn one_norm(h: &HermitianMatrix) -> f64 {
    let n = h.dim();
    (0..n).map(|j| (0..n).map(|i| h[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_norm(h: &HermitianMatrix) -> f64 {
    h.matrix().as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row sparsity with entries counted as nonzero when `|H_ij| > zero_tol`.
pub fn row_sparsity(h: &HermitianMatrix, zero_tol: f64) -> usize {
    let n = h.dim();
    (0..n)
        .map(|i| h.matrix().row(i).iter().filter(|z| z.norm() > zero_tol).count())
        .max()
        .unwrap_or(0)
}

pub fn norm_profile(h: &HermitianMatrix) -> Result<NormProfile> {
    norm_profile_with_zero_tol(h, 0.0)
}

/// Like [`norm_profile`], but entries with `|H_ij| <= zero_tol` do not count
/// towards the row sparsity `k`.
pub fn norm_profile_with_zero_tol(h: &HermitianMatrix, zero_tol: f64) -> Result<NormProfile> {
    let spectral = spectral_norm_of(&eigvalsh(h)?);
    // abs(H) is nonnegative, so its largest eigenvalue is the Perron root.
    let abs_spectral = spectral_norm_of(&eigvalsh(&abs_entrywise(h))?);
    Ok(NormProfile {
        n: h.dim(),
        k: row_sparsity(h, zero_tol),
        max_norm: max_norm(h),
        mcn: max_column_norm(h),
        spectral,
        abs_spectral,
        one_norm: one_norm(h),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// `lhs ≤ rhs`
    AtMost,
    /// `lhs = rhs`
    Equal,
}

/// One evaluated link of a norm chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub kind: LinkKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs - lhs) / max(|lhs|, |rhs|, 1e-12)` for inequalities; minus the
    /// relative gap for equalities.
    pub slack: f64,
    pub ok: bool,
}

impl ChainLink {
    pub fn at_most(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = (rhs - lhs) / scale(lhs, rhs);
        Self { name: name.to_string(), kind: LinkKind::AtMost, lhs, rhs, slack, ok: slack >= SLACK_TOLERANCE }
    }

    pub fn equal(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = -(rhs - lhs).abs() / scale(lhs, rhs);
        Self { name: name.to_string(), kind: LinkKind::Equal, lhs, rhs, slack, ok: slack >= -IDENTITY_TOLERANCE }
    }
}

fn scale(lhs: f64, rhs: f64) -> f64 {
    lhs.abs().max(rhs.abs()).max(SLACK_FLOOR)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub profile: NormProfile,
    /// The dimension-dependent chain, six links.
    pub general_chain: Vec<ChainLink>,
    /// The sparsity-dependent chain using the measured `k`, six links.
    pub sparse_chain: Vec<ChainLink>,
    /// `mcn(abs(H)) = mcn(H)` and `‖abs(H)‖₁ = ‖H‖₁`.
    pub identities: Vec<ChainLink>,
}

impl ChainReport {
    pub fn general_chain_ok(&self) -> bool {
        self.general_chain.iter().all(|l| l.ok)
    }

    pub fn sparse_chain_ok(&self) -> bool {
        self.sparse_chain.iter().all(|l| l.ok)
    }

    pub fn all_ok(&self) -> bool {
        self.links().all(|l| l.ok)
    }

    pub fn links(&self) -> impl Iterator<Item = &ChainLink> {
        self.general_chain.iter().chain(&self.sparse_chain).chain(&self.identities)
    }

    pub fn violations(&self) -> Vec<&ChainLink> {
        self.links().filter(|l| !l.ok).collect()
    }

    /// Fixed-column CSV: one row per link.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,lhs,rhs,slack,ok\n");
        for l in self.links() {
            out.push_str(&format!("{},{},{},{},{}\n", l.name, l.lhs, l.rhs, l.slack, l.ok));
        }
        out
    }
}

fn chain_links(p: &NormProfile, size: usize, label: &str) -> Vec<ChainLink> {
    let root = (size as f64).sqrt();
    let sz = size as f64;
    vec![
        ChainLink::at_most("max<=mcn", p.max_norm, p.mcn),
        ChainLink::at_most("mcn<=spectral", p.mcn, p.spectral),
        ChainLink::at_most("spectral<=abs_spectral", p.spectral, p.abs_spectral),
        ChainLink::at_most("abs_spectral<=one_norm", p.abs_spectral, p.one_norm),
        ChainLink::at_most(&format!("one_norm<=sqrt{label}*mcn"), p.one_norm, root * p.mcn),
        ChainLink::at_most(&format!("sqrt{label}*mcn<={label}*max"), root * p.mcn, sz * p.max_norm),
    ]
}

pub fn norm_chain_report(h: &HermitianMatrix) -> Result<ChainReport> {
    norm_chain_report_with_zero_tol(h, 0.0)
}

pub fn norm_chain_report_with_zero_tol(h: &HermitianMatrix, zero_tol: f64) -> Result<ChainReport> {
    let profile = norm_profile_with_zero_tol(h, zero_tol)?;
    let general_chain = chain_links(&profile, profile.n, "N");
    let sparse_chain = chain_links(&profile, profile.k, "k");
    let abs_h = abs_entrywise(h);
    let identities = vec![
        ChainLink::equal("mcn(abs)=mcn", max_column_norm(&abs_h), profile.mcn),
        ChainLink::equal("one_norm(abs)=one_norm", one_norm(&abs_h), profile.one_norm),
    ];
    Ok(ChainReport { profile, general_chain, sparse_chain, identities })
}

/// Walk-step estimates `‖abs(H)‖·|t|/√δ` and `‖H‖₁·|t|/√δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkCostEstimate {
    pub t: f64,
    pub delta: f64,
    pub steps_abs: f64,
    pub steps_one: f64,
}

pub fn walk_cost_estimate(h: &HermitianMatrix, t: f64, delta: f64) -> Result<WalkCostEstimate> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite, got {t}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let p = norm_profile(h)?;
    Ok(walk_cost_from_profile(&p, t, delta))
}

pub fn walk_cost_from_profile(p: &NormProfile, t: f64, delta: f64) -> WalkCostEstimate {
    let scale = t.abs() / delta.sqrt();
    WalkCostEstimate { t, delta, steps_abs: p.abs_spectral * scale, steps_one: p.one_norm * scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::hadamard_tensor;
    use crate::matcore::{Matrix, C64};

    fn all_ones(n: usize) -> HermitianMatrix {
        HermitianMatrix::new(Matrix::from_fn(n, |_, _| C64::new(1.0, 0.0))).unwrap()
    }

    #[test]
    fn identity_profile() {
        let p = norm_profile(&HermitianMatrix::identity(7)).unwrap();
        assert_eq!((p.max_norm, p.mcn, p.spectral, p.abs_spectral, p.one_norm), (1.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!(p.k, 1);
    }

    #[test]
    fn identity_saturates_first_four_links() {
        let r = norm_chain_report(&HermitianMatrix::identity(5)).unwrap();
        for l in &r.general_chain[..4] {
            assert_eq!(l.slack, 0.0, "{}", l.name);
        }
        assert!(r.all_ok());
    }

    #[test]
    fn all_ones_profile_and_tight_tail() {
        let n = 9;
        let p = norm_profile(&all_ones(n)).unwrap();
        assert!((p.one_norm - n as f64).abs() < 1e-12);
        assert!((p.mcn - (n as f64).sqrt()).abs() < 1e-12);
        assert_eq!(p.max_norm, 1.0);
        let r = norm_chain_report(&all_ones(n)).unwrap();
        for l in &r.general_chain[4..] {
            assert!(l.slack.abs() < 1e-12, "{} slack {}", l.name, l.slack);
        }
    }

    #[test]
    fn hadamard_gap() {
        for n in 1..=4 {
            let p = norm_profile(&hadamard_tensor(n).unwrap()).unwrap();
            assert!((p.spectral - 1.0).abs() < 1e-12);
            assert!((p.abs_spectral - 2f64.powf(n as f64 / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_matrix_has_zero_norms() {
        let p = norm_profile(&HermitianMatrix::zeros(3)).unwrap();
        assert_eq!((p.max_norm, p.mcn, p.spectral, p.abs_spectral, p.one_norm, p.k), (0.0, 0.0, 0.0, 0.0, 0.0, 0));
        assert!(norm_chain_report(&HermitianMatrix::zeros(3)).unwrap().all_ok());
    }

    #[test]
    fn zero_tolerance_changes_sparsity() {
        let h = HermitianMatrix::from_real_rows(&[vec![1.0, 1e-15], vec![1e-15, 1.0]]).unwrap();
        assert_eq!(norm_profile(&h).unwrap().k, 2);
        assert_eq!(norm_profile_with_zero_tol(&h, 1e-12).unwrap().k, 1);
    }

    #[test]
    fn csv_has_one_row_per_link() {
        let r = norm_chain_report(&HermitianMatrix::identity(2)).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 6 + 6 + 2);
        assert!(csv.starts_with("name,lhs,rhs,slack,ok\nmax<=mcn,1,1,0,true\n"));
    }

    #[test]
    fn walk_cost_examples() {
        let w = walk_cost_estimate(&HermitianMatrix::identity(3), 1.0, 1.0).unwrap();
        assert_eq!(w.steps_abs, 1.0);
        let w = walk_cost_estimate(&hadamard_tensor(6).unwrap(), 1.0, 0.01).unwrap();
        assert!((w.steps_abs - 80.0).abs() < 1e-9);
        assert!(w.steps_abs <= w.steps_one * (1.0 + 1e-12));
    }

    #[test]
    fn walk_cost_domain() {
        let h = HermitianMatrix::identity(2);
        for delta in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(walk_cost_estimate(&h, 1.0, delta), Err(Error::Domain(_))));
        }
        assert!(matches!(walk_cost_estimate(&h, f64::INFINITY, 0.5), Err(Error::Domain(_))));
    }
}
