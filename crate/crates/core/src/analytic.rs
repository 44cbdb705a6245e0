//! Closed-form quantities derived from the degeneracy spectrum.
//!
//! With `w_j = d_j/N` viewed as a distribution over violation counts, the
//! minimal gap depends on the first moment `gamma`, the negative moments
//! `gm1 = sum_{j>=1} w_j/j` and `gm2 = sum_{j>=1} w_j/j^2`, and (through
//! the `d_0/N` corrections) on the harmonic sums `h_D`, `g_D`:
//!
//! ```text
//! t_min ~ gamma gm1 / (1 + gamma gm1)
//! Delta ~ n sqrt(d_0) / (2 sqrt(N)) * f,   f = 2/(1 + gamma gm1) * sqrt(gm1^2 / gm2)
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergeom::terminating_hypergeometric;
use crate::reduced::{GapMethod, GapResult, HamiltonianParams};
use crate::scalar::{CompensatedSum, Real};
use crate::spectrum::DegeneracySpectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet<T> {
    /// `sum j w_j`, equal to `m/8`.
    pub gamma: T,
    /// `sum j^2 w_j`.
    pub gamma2: T,
    /// Standard deviation `sqrt(gamma2 - gamma^2)`.
    pub sigma: T,
    /// `sum_{j>=1} w_j / j`.
    pub gm1: T,
    /// `sum_{j>=1} w_j / j^2`.
    pub gm2: T,
    /// `sum 1/j` over retained levels `j >= 1`.
    pub h_d: T,
    /// `sum 1/j^2` over retained levels `j >= 1`.
    pub g_d: T,
}

/// Moments by ascending-`j` compensated summation. `gamma` is formed from the
/// exact integer `sum j d_j` with a single division by `N`.
pub fn moments<T: Real>(spectrum: &DegeneracySpectrum) -> MomentSet<T> {
    let dim = T::count(spectrum.dimension());
    let gamma = T::from_u128(spectrum.first_moment_count()).expect("moment count") / dim;
    let mut gamma2 = CompensatedSum::new();
    let mut gm1 = CompensatedSum::new();
    let mut gm2 = CompensatedSum::new();
    let mut h_d = CompensatedSum::new();
    let mut g_d = CompensatedSum::new();
    for (j, d) in spectrum.levels().filter(|&(j, _)| j > 0) {
        let jf = T::count(j as u64);
        let w = T::count(d) / dim;
        gamma2.add(w * jf * jf);
        gm1.add(w / jf);
        gm2.add(w / (jf * jf));
        h_d.add(T::one() / jf);
        g_d.add(T::one() / (jf * jf));
    }
    let gamma2 = gamma2.value();
    MomentSet {
        gamma,
        gamma2,
        sigma: (gamma2 - gamma * gamma).max(T::zero()).sqrt(),
        gm1: gm1.value(),
        gm2: gm2.value(),
        h_d: h_d.value(),
        g_d: g_d.value(),
    }
}

/// `gamma gm1 / (1 + gamma gm1)`; exact up to `O(d_0/N)`.
pub fn tmin_closed_form<T: Real>(mom: &MomentSet<T>) -> T {
    let x = mom.gamma * mom.gm1;
    x / (T::one() + x)
}

/// `f = 2/(1 + gamma gm1) * sqrt(gm1^2 / gm2)`.
pub fn f_factor<T: Real>(mom: &MomentSet<T>) -> T {
    T::lit(2.0) / (T::one() + mom.gamma * mom.gm1) * (mom.gm1 * mom.gm1 / mom.gm2).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormGap<T> {
    /// Canonical result: prefactor `n/2` in place of `b`.
    pub gap: GapResult<T>,
    pub f: T,
    /// Same formula with the exact `b = (n/2) N/(N-1)` as prefactor.
    pub delta_exact_b: T,
}

pub fn gap_closed_form<T: Real>(
    mom: &MomentSet<T>,
    params: &HamiltonianParams<T>,
    d0: u64,
) -> Result<ClosedFormGap<T>> {
    if d0 == 0 {
        return Err(Error::Unsatisfiable);
    }
    let f = f_factor(mom);
    let root = (T::count(d0) / T::count(params.dim())).sqrt();
    let delta = params.b_asymptotic() * root * f;
    let delta_exact_b = params.b() * root * f;
    let t_min = tmin_closed_form(mom);
    let eps0 = (T::one() - t_min) * params.b();
    let half = delta / T::lit(2.0);
    Ok(ClosedFormGap {
        gap: GapResult { t_min, delta, e0: eps0 - half, e1: eps0 + half, method: GapMethod::ClosedForm },
        f,
        delta_exact_b,
    })
}

/// Characteristic polynomial and its first two `lambda`-derivatives on the
/// line `lambda = eps_0(t)`, normalized by `(a t)^D D!`, `(a t)^(D-1) D!`
/// and `(a t)^(D-2) D!` respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineValues<T> {
    pub t: T,
    pub p: T,
    pub dp: T,
    pub d2p: T,
}

/// Exact expansion of the characteristic polynomial around `eps_0`,
/// `d_0/N` terms included:
///
/// ```text
/// p   = -rho w0
/// p'  = -a t + rho (gm1 + w0 h_D)
/// p'' = 2 a t h_D - rho (2 gm1 h_D - 2 gm2 + w0 (h_D^2 - g_D))
/// ```
pub fn derivative_line_values<T: Real>(
    mom: &MomentSet<T>,
    params: &HamiltonianParams<T>,
    d0: u64,
    t: T,
) -> LineValues<T> {
    let w0 = T::count(d0) / T::count(params.dim());
    line_values(mom, params, w0, w0, t)
}

/// `w_value` enters `p`, `w_corr` the derivative corrections; the split lets
/// tests drop the `O(d_0/N)` corrections while keeping the leading term.
fn line_values<T: Real>(
    mom: &MomentSet<T>,
    params: &HamiltonianParams<T>,
    w_value: T,
    w_corr: T,
    t: T,
) -> LineValues<T> {
    let two = T::lit(2.0);
    let rho = (T::one() - t) * params.b();
    let at = params.a() * t;
    let (h, g) = (mom.h_d, mom.g_d);
    LineValues {
        t,
        p: -rho * w_value,
        dp: -at + rho * (mom.gm1 + w_corr * h),
        d2p: two * at * h - rho * (two * mom.gm1 * h - two * mom.gm2 + w_corr * (h * h - g)),
    }
}

/// Gap from the quadratic model of the characteristic polynomial at the
/// exact zero of `p'` on the line `lambda = eps_0`.
pub fn parabolic_gap<T: Real>(mom: &MomentSet<T>, params: &HamiltonianParams<T>, d0: u64) -> Result<GapResult<T>> {
    if d0 == 0 {
        return Err(Error::Unsatisfiable);
    }
    let w0 = T::count(d0) / T::count(params.dim());
    parabolic_fit(mom, params, w0, w0)
}

fn parabolic_fit<T: Real>(
    mom: &MomentSet<T>,
    params: &HamiltonianParams<T>,
    w_value: T,
    w_corr: T,
) -> Result<GapResult<T>> {
    // p' = 0  <=>  a t = (1 - t) b G
    let big_g = mom.gm1 + w_corr * mom.h_d;
    let t = params.b() * big_g / (params.a() + params.b() * big_g);
    let lv = line_values(mom, params, w_value, w_corr, t);
    let at = params.a() * t;
    // back to a common normalization (a t)^D D!
    let (c0, c1, c2) = (lv.p, lv.dp / at, lv.d2p / (at * at));
    let disc = c1 * c1 - T::lit(2.0) * c0 * c2;
    if disc < T::zero() || c2 == T::zero() {
        return Err(Error::ParabolaInvalid(disc.as_f64()));
    }
    let root = disc.sqrt();
    let (u1, u2) = ((-c1 - root) / c2, (-c1 + root) / c2);
    let eps0 = (T::one() - t) * params.b();
    let (lo, hi) = if u1 < u2 { (u1, u2) } else { (u2, u1) };
    Ok(GapResult {
        t_min: t,
        delta: T::lit(2.0) * root / c2.abs(),
        e0: eps0 + lo,
        e1: eps0 + hi,
        method: GapMethod::ParabolicFit,
    })
}

/// Exact `(gm1, gm2)` of binomial 3-SAT with `r` triples,
///
/// ```text
/// gm1 = 7r/8^r * 2F3(1, 1, 1-r; 2, 2; -7)
/// gm2 = 7r/8^r * 3F4(1, 1, 1, 1-r; 2, 2, 2; -7)
/// ```
pub fn binomial_moments_exact(r: u32) -> Result<(BigRational, BigRational)> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let int = |x: i64| BigRational::from_integer(BigInt::from(x));
    let z = int(-7);
    let top = int(1 - i64::from(r));
    let f1 = terminating_hypergeometric(&[int(1), int(1), top.clone()], &[int(2), int(2)], &z)?;
    let f2 = terminating_hypergeometric(&[int(1), int(1), int(1), top], &[int(2), int(2), int(2)], &z)?;
    let prefactor = BigRational::new(BigInt::from(7u64 * u64::from(r)), BigInt::from(8u32).pow(r));
    Ok((&prefactor * f1, prefactor * f2))
}

pub fn binomial_moments<T: Real>(r: u32) -> Result<(T, T)> {
    let (a, b) = binomial_moments_exact(r)?;
    let cvt = |x: &BigRational| {
        x.to_f64().map(T::lit).ok_or_else(|| Error::InvalidArgument("moment not representable".into()))
    };
    Ok((cvt(&a)?, cvt(&b)?))
}

/// Leading-order `(1/gamma, 1/gamma^2)` for narrow distributions.
pub fn asymptotic_moments<T: Real>(gamma: T) -> Result<(T, T)> {
    if gamma.is_nan() || gamma <= T::zero() {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    Ok((gamma.recip(), (gamma * gamma).recip()))
}

/// `d_j = 7^j C(r, j)`.
pub fn binomial_degeneracies(r: u32) -> Vec<u64> {
    let mut d = Vec::with_capacity(r as usize + 1);
    let mut binom = BigInt::one();
    for j in 0..=u64::from(r) {
        let v = &binom * BigInt::from(7u64).pow(j as u32);
        d.push(v.to_u64().expect("degeneracy fits in u64"));
        binom = binom * BigInt::from(u64::from(r) - j) / BigInt::from(j + 1);
    }
    d
}

/// Flat key/value record of one gap computation.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GapRecord {
    pub n: u32,
    pub m: usize,
    pub alpha: f64,
    pub d0: u64,
    pub gamma: f64,
    pub gm1: f64,
    pub gm2: f64,
    pub tmin: f64,
    pub delta: f64,
    pub f: f64,
    pub e0: f64,
    pub e1: f64,
    pub method: &'static str,
}

impl GapRecord {
    /// `f` is recovered from `delta` through the canonical prefactor
    /// `n sqrt(d_0) / (2 sqrt(N))`, so numeric and closed-form records are
    /// directly comparable.
    pub fn new<T: Real>(params: &HamiltonianParams<T>, d0: u64, mom: &MomentSet<T>, gap: &GapResult<T>) -> Self {
        let n = params.n();
        let prefactor = f64::from(n) * (d0 as f64).sqrt() / (2.0 * (params.dim() as f64).sqrt());
        Self {
            n,
            m: params.m(),
            alpha: params.m() as f64 / f64::from(n),
            d0,
            gamma: mom.gamma.as_f64(),
            gm1: mom.gm1.as_f64(),
            gm2: mom.gm2.as_f64(),
            tmin: gap.t_min.as_f64(),
            delta: gap.delta.as_f64(),
            f: gap.delta.as_f64() / prefactor,
            e0: gap.e0.as_f64(),
            e1: gap.e1.as_f64(),
            method: gap.method.as_str(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
