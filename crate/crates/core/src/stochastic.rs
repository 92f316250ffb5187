//! Promise strings, concentration of circulant norms, and the query-bound
//! arithmetic built on them.
//!
//! Logarithms are natural throughout. The promise bound `B` is an integer
//! near `√(M ln M)` with the parity of `M`, and `τ = π/(4B)`.

use std::f64::consts::PI;
use std::fmt::Display;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instances::{circulant_spectrum_with_table, cosine_table, SignString};

/// Above this `M` the promise probability is evaluated in log space.
pub const EXACT_PROMISE_LIMIT: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PromiseConfig {
    pub m: u64,
    pub b: u64,
    pub tau: f64,
}

impl PromiseConfig {
    pub fn new(m: u64, b: u64) -> Result<Self> {
        if b == 0 || b > m {
            return Err(Error::Domain(format!("promise bound {b} must lie in 1..={m}")));
        }
        if !(m - b).is_multiple_of(2) {
            return Err(Error::Parity { m, b });
        }
        Ok(Self { m, b, tau: PI / (4.0 * b as f64) })
    }

    /// Whether `s` has length `M` and `|Σs| = B`.
    pub fn admits(&self, s: &SignString) -> bool {
        s.len() as u64 == self.m && s.sum().unsigned_abs() == self.b
    }
}

pub fn derive_promise_bound(m: u64) -> Result<PromiseConfig> {
    if m < 2 {
        return Err(Error::Domain(format!("M = {m} is below 2")));
    }
    let mf = m as f64;
    let mut b = (mf * mf.ln()).sqrt().round() as u64;
    if (b + m) % 2 == 1 {
        b += 1;
    }
    PromiseConfig::new(m, b.max(if m.is_multiple_of(2) { 2 } else { 1 }))
}

/// Mixes a master seed and a trial index into an independent trial seed
/// (splitmix64 finaliser).
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master ^ trial.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sample_promise_string(cfg: &PromiseConfig, seed: u64) -> SignString {
    sample_promise_string_with(cfg, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Uniform over the promise set: a fair sign, then a uniform choice of the
/// `(M+B)/2` positions that carry it.
pub fn sample_promise_string_with<R: Rng + ?Sized>(cfg: &PromiseConfig, rng: &mut R) -> SignString {
    let m = cfg.m as usize;
    let majority: i8 = if rng.gen::<bool>() { 1 } else { -1 };
    let mut signs = vec![-majority; m];
    for i in index::sample(rng, m, (m + cfg.b as usize) / 2) {
        signs[i] = majority;
    }
    SignString::new(signs).expect("entries are ±1")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub m: u64,
    /// Circulant dimension `2M+1`.
    pub n: u64,
    pub d: f64,
    pub trials: u64,
    pub seed: u64,
    /// `4d√(M ln M)`.
    pub threshold: f64,
    pub exceed_count: u64,
    pub empirical_prob: f64,
    pub std_err: f64,
    /// `4/M^{2d²-1}`.
    pub bound_tail: f64,
    /// `2N/M^{2d²}`.
    pub bound_union: f64,
    /// Eigenvalue index used for the single-eigenvalue check.
    pub eigen_r: u64,
    pub eigen_empirical_prob: f64,
    pub eigen_std_err: f64,
    /// `2/M^{2d²}`.
    pub eigen_bound: f64,
    pub pass: bool,
}

fn binomial_std_err(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Monte Carlo tail of `‖H_s‖` for `s` uniform over all of `{±1}^M`.
/// Trial `i` uses [`trial_seed`]`(seed, i)`, so the result does not depend on
/// scheduling.
pub fn tail_estimate(m: u64, d: f64, trials: u64, seed: u64) -> Result<TailReport> {
    if m < 3 {
        return Err(Error::Domain(format!("M = {m} is below 3")));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be positive".into()));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("d = {d} must be positive")));
    }
    let mf = m as f64;
    let n = 2 * m + 1;
    let threshold = 4.0 * d * (mf * mf.ln()).sqrt();
    let table = cosine_table(n as usize);
    let eigen_r = 1usize;
    let (exceed, eigen_exceed) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i));
            let s = SignString::random(m as usize, &mut rng).expect("M ≥ 3");
            let spec = circulant_spectrum_with_table(&s, &table);
            let big = spec.spectral_norm() >= threshold;
            let eig = spec.lambdas[eigen_r].abs() >= threshold;
            (big as u64, eig as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let empirical_prob = exceed as f64 / trials as f64;
    let std_err = binomial_std_err(empirical_prob, trials);
    let eigen_empirical_prob = eigen_exceed as f64 / trials as f64;
    let eigen_std_err = binomial_std_err(eigen_empirical_prob, trials);
    let two_d2 = 2.0 * d * d;
    let bound_tail = 4.0 / mf.powf(two_d2 - 1.0);
    let bound_union = 2.0 * n as f64 / mf.powf(two_d2);
    let eigen_bound = 2.0 / mf.powf(two_d2);
    let pass = empirical_prob <= bound_tail + 3.0 * std_err
        && eigen_empirical_prob <= eigen_bound + 3.0 * eigen_std_err;
    Ok(TailReport {
        m,
        n,
        d,
        trials,
        seed,
        threshold,
        exceed_count: exceed,
        empirical_prob,
        std_err,
        bound_tail,
        bound_union,
        eigen_r: eigen_r as u64,
        eigen_empirical_prob,
        eigen_std_err,
        eigen_bound,
        pass,
    })
}

/// `exp(-2M²t²/Σ(b_j-a_j)²)`.
pub fn hoeffding_bound(m: u64, t: f64, ranges: &[(f64, f64)]) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if let Some((a, b)) = ranges.iter().find(|(a, b)| a.is_nan() || b.is_nan() || b < a) {
        return Err(Error::Domain(format!("range ({a}, {b}) is reversed")));
    }
    let width: f64 = ranges.iter().map(|(a, b)| (b - a) * (b - a)).sum();
    if width == 0.0 {
        return Err(Error::Domain("all ranges are degenerate".into()));
    }
    let mf = m as f64;
    Ok((-2.0 * mf * mf * t * t / width).exp())
}

/// `Pr(|Σs| = B)` for uniform `s ∈ {±1}^M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PromiseProbability {
    pub m: u64,
    pub b: u64,
    /// `2·C(M, (M+B)/2) / 2^M` reduced; absent when evaluated in log space.
    #[serde(serialize_with = "display_opt")]
    pub exact: Option<BigRational>,
    pub value: f64,
    /// `2·exp(-B²/(2M))/√(πM/2)`.
    pub asymptotic: f64,
    pub relative_gap: f64,
}

fn display_opt<T: Display, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

fn display<T: Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// `x·2^e` without intermediate overflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// `n/d` as a float, keeping 64 significant bits through the division.
pub fn ratio_to_f64(n: &BigUint, d: &BigUint) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let e = d.bits() as i64 - n.bits() as i64 + 64;
    let q = if e >= 0 { (n << e as u64) / d } else { n / (d << (-e) as u64) };
    ldexp(q.to_f64().expect("about 64 bits"), -e)
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

pub fn promise_probability(m: u64, b: u64) -> Result<PromiseProbability> {
    let cfg = PromiseConfig::new(m, b)?;
    let k = (cfg.m + cfg.b) / 2;
    let mf = m as f64;
    let asymptotic = 2.0 * (-(b as f64).powi(2) / (2.0 * mf)).exp() / (PI * mf / 2.0).sqrt();
    let (exact, value) = if m <= EXACT_PROMISE_LIMIT {
        let count = binomial(BigUint::from(m), BigUint::from(k)) * 2u32;
        let total = BigUint::one() << m;
        let value = ratio_to_f64(&count, &total);
        (Some(BigRational::new(count.into(), total.into())), value)
    } else {
        (None, (2f64.ln() + ln_binomial(m, k) - mf * 2f64.ln()).exp())
    };
    Ok(PromiseProbability { m, b, exact, value, asymptotic, relative_gap: (asymptotic - value).abs() / value })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub m: u64,
    pub b: u64,
    /// `C(M/2 + B/2, B)`.
    #[serde(serialize_with = "display")]
    pub big_m: BigUint,
    /// `C(M/2 + B/2 - 1, B - 1)`.
    #[serde(serialize_with = "display")]
    pub big_l: BigUint,
    #[serde(serialize_with = "display")]
    pub ratio: BigRational,
    /// Whether `m/l = (M/B + 1)/2` holds as rationals.
    pub identity_holds: bool,
    pub lower_bound: f64,
    /// Approximate-counting upper bound `2M/B`.
    pub counting_estimate: f64,
}

pub fn adversary_bound(m: u64, b: u64) -> Result<AdversaryReport> {
    if !m.is_multiple_of(2) || !b.is_multiple_of(2) {
        return Err(Error::Parity { m, b });
    }
    if b == 0 || b > m {
        return Err(Error::Domain(format!("need 0 < B ≤ M, got M = {m}, B = {b}")));
    }
    let top = m / 2 + b / 2;
    let big_m: BigUint = binomial(BigUint::from(top), BigUint::from(b));
    let big_l: BigUint = binomial(BigUint::from(top - 1), BigUint::from(b - 1));
    let ratio = BigRational::new(big_m.clone().into(), big_l.clone().into());
    let expected = BigRational::new((m + b).into(), (2 * b).into());
    let identity_holds = ratio == expected && &ratio * BigRational::from_integer(big_l.clone().into()) == BigRational::from_integer(big_m.clone().into());
    Ok(AdversaryReport {
        m,
        b,
        lower_bound: ratio_to_f64(&big_m, &big_l),
        big_m,
        big_l,
        ratio,
        identity_holds,
        counting_estimate: 2.0 * m as f64 / b as f64,
    })
}

/// The average-case cost of a hypothetical `O((‖Ht‖ ln M)^c)` simulation on
/// random promise strings, split into the small-norm and large-norm parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageCaseReport {
    pub m: u64,
    pub b: u64,
    pub c: f64,
    pub d: f64,
    /// `(πd ln M)^c`.
    pub term1: f64,
    /// `Pr(‖H_s‖ ≥ 4d√(M ln M))` over all strings, by the union bound.
    pub prob_large_all: f64,
    pub promise_prob: f64,
    /// `min(1, prob_large_all/promise_prob)`.
    pub p_large: f64,
    /// `p_large·(2M·τ·ln M)^c`.
    pub term2: f64,
    pub total: f64,
    /// `total/(ln M)^c`.
    pub normalized: f64,
    /// `√(M/ln M)`.
    pub lower_bound: f64,
    pub term1_dominates: bool,
    /// `2d² > c/2 + 2`.
    pub exponent_condition: bool,
    pub below_lower_bound: bool,
}

pub fn average_case_bound(m: u64, c: f64, d: f64) -> Result<AverageCaseReport> {
    if !(c > 0.0 && c.is_finite()) || !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("need c > 0 and d > 0, got c = {c}, d = {d}")));
    }
    if m < 3 {
        return Err(Error::Domain(format!("M = {m} is below 3")));
    }
    let cfg = derive_promise_bound(m)?;
    let mf = m as f64;
    let ln_m = mf.ln();
    let term1 = (PI * d * ln_m).powf(c);
    let prob_large_all = 2.0 * (2.0 * mf + 1.0) / mf.powf(2.0 * d * d);
    let promise_prob = promise_probability(m, cfg.b)?.value;
    let p_large = (prob_large_all / promise_prob).min(1.0);
    let term2 = p_large * (2.0 * mf * cfg.tau * ln_m).powf(c);
    let total = term1 + term2;
    let lower_bound = (mf / ln_m).sqrt();
    Ok(AverageCaseReport {
        m,
        b: cfg.b,
        c,
        d,
        term1,
        prob_large_all,
        promise_prob,
        p_large,
        term2,
        total,
        normalized: total / ln_m.powf(c),
        lower_bound,
        term1_dominates: term2 < term1,
        exponent_condition: 2.0 * d * d > c / 2.0 + 2.0,
        below_lower_bound: total < lower_bound,
    })
}
