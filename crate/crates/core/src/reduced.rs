//! The interpolated Hamiltonian restricted to the symmetric sector.
//!
//! On the span of the uniform superpositions `|j>_s` over assignments with
//! `j` violated clauses, `H(t) = (1-t) H(0) + t H(1)` acts as
//!
//! ```text
//! H_s(t) = diag(eps) - rho * x x^T,   eps_j = rho + j a t,   rho = (1-t) b,
//! x_j = sqrt(d_j / N)
//! ```
//!
//! Its eigenvalues are the roots of the secular function
//! `1/rho - sum_j w_j / (eps_j - lambda)` with `w_j = d_j / N`. They
//! interlace the diagonal: `E_0 < eps_0 < E_1 < eps_1 < ...`, so every root
//! is bracketed by two consecutive poles (or by `eps_0 - rho` and `eps_0`
//! for the ground state). Roots are located as offsets from the nearest
//! pole, with pole spacings taken as exact multiples of `a t`, which keeps
//! the gap accurate to near machine precision relative to itself.

use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::minimize::{golden_section, local_minima};
use crate::scalar::{CompensatedSum, Real};
use crate::spectrum::DegeneracySpectrum;

/// Number of uniformly spaced samples in the unimodality pre-scan.
pub const PRESCAN_SAMPLES: usize = 64;

/// Scale constants of `H(0) = b (1 - |psi><psi|)` and `H(1) = a * (violated clauses)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams<T> {
    n: u32,
    m: usize,
    dim: u64,
    a: T,
    b: T,
}

impl<T: Real> HamiltonianParams<T> {
    /// `a = 4/alpha = 4n/m` and `b = (n/2) N/(N-1)`, which fixes
    /// `tr H(0) = N n / 2`.
    pub fn new(n: u32, m: usize) -> Result<Self> {
        if !(3..=63).contains(&n) {
            return Err(Error::InvalidArgument(format!("n = {n} outside 3..=63")));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        let dim = 1u64 << n;
        let nf = T::count(u64::from(n));
        let a = T::lit(4.0) * nf / T::count(m as u64);
        let b = nf / T::lit(2.0) * (T::one() + T::one() / T::count(dim - 1));
        Ok(Self { n, m, dim, a, b })
    }

    pub fn for_spectrum(spectrum: &DegeneracySpectrum) -> Result<Self> {
        Self::new(spectrum.n(), spectrum.m())
    }

    /// Arbitrary positive scales, for alternative normalizations.
    pub fn with_constants(n: u32, m: usize, a: T, b: T) -> Result<Self> {
        let mut p = Self::new(n, m)?;
        if !(a > T::zero() && b > T::zero()) {
            return Err(Error::InvalidArgument("a and b must be positive".into()));
        }
        p.a = a;
        p.b = b;
        Ok(p)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `N = 2^n`.
    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn alpha(&self) -> Ratio<u64> {
        Ratio::new(self.m as u64, u64::from(self.n))
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    /// The large-`N` limit `n/2` of `b`.
    pub fn b_asymptotic(&self) -> T {
        T::count(u64::from(self.n)) / T::lit(2.0)
    }
}

/// `H_s(t)` on the levels `J = { j : d_j > 0 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonian<T> {
    t: T,
    levels: Vec<usize>,
    eps: Vec<T>,
    weights: Vec<T>,
    rho: T,
    step: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMethod {
    NumericMin,
    ParabolicFit,
    ClosedForm,
}

impl GapMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GapMethod::NumericMin => "numeric-min",
            GapMethod::ParabolicFit => "parabolic-fit",
            GapMethod::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for GapMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Location and size of the minimal ground-state gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult<T> {
    pub t_min: T,
    pub delta: T,
    pub e0: T,
    pub e1: T,
    pub method: GapMethod,
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::TimeOutOfRange(t.as_f64()));
    }
    Ok(())
}

pub fn build_reduced<T: Real>(
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    t: T,
) -> Result<ReducedHamiltonian<T>> {
    check_time(t)?;
    let rho = (T::one() - t) * params.b;
    let step = params.a * t;
    let dim = T::count(params.dim);
    let (levels, weights): (Vec<usize>, Vec<T>) = spectrum.levels().map(|(j, d)| (j, T::count(d) / dim)).unzip();
    let eps = levels.iter().map(|&j| rho + T::count(j as u64) * step).collect();
    Ok(ReducedHamiltonian { t, levels, eps, weights, rho, step })
}

impl<T: Real> ReducedHamiltonian<T> {
    pub fn t(&self) -> T {
        self.t
    }

    /// Dimension `|J|` of the symmetric sector.
    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Violation counts `j` of the retained levels.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn eps(&self) -> &[T] {
        &self.eps
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// `sum eps_j - rho`.
    pub fn trace(&self) -> T {
        let s: CompensatedSum<T> = self.eps.iter().copied().collect();
        s.value() - self.rho
    }

    /// Dense `(|J| x |J|)` row-major matrix, for testing.
    pub fn to_dense(&self) -> Vec<T> {
        let k = self.dim();
        let mut out = vec![T::zero(); k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = -self.rho * (self.weights[i] * self.weights[j]).sqrt();
            }
            out[i * k + i] += self.eps[i];
        }
        out
    }

    /// `eps[i] - eps[origin]` as an exact multiple of `a t`.
    #[inline]
    fn pole(&self, i: usize, origin: usize) -> T {
        let diff = self.levels[i] as i64 - self.levels[origin] as i64;
        T::from_i64(diff).expect("level difference representable") * self.step
    }

    /// Secular function `1/rho - sum w_j/(eps_j - lambda)` and its derivative
    /// at `lambda = eps[origin] + mu`, with the terms above and below
    /// `lambda` summed separately.
    fn secular(&self, origin: usize, mu: T) -> (T, T) {
        let mut above = T::zero();
        let mut below = T::zero();
        let mut slope = T::zero();
        for (i, &w) in self.weights.iter().enumerate() {
            let d = self.pole(i, origin) - mu;
            let q = w / d;
            if d > T::zero() {
                above += q;
            } else {
                below -= q;
            }
            slope += q / d;
        }
        (T::one() / self.rho + below - above, -slope)
    }

    /// Root of the secular function in `(lo, hi)`, measured from
    /// `eps[origin]`. Requires `g(lo) >= 0 >= g(hi)`.
    fn solve(&self, index: usize, origin: usize, lo: T, hi: T) -> Result<T> {
        let (lo0, hi0) = (lo, hi);
        let (mut lo, mut hi) = (lo, hi);
        let eps = T::epsilon();
        let mut x = (lo + hi) / T::lit(2.0);
        let mut width_prev = [hi - lo; 2];
        for iter in 0..400 {
            let (g, dg) = self.secular(origin, x);
            if g == T::zero() {
                return Ok(x);
            }
            if g > T::zero() {
                lo = x;
            } else {
                hi = x;
            }
            let width = hi - lo;
            if width <= T::lit(2.0) * eps * lo.abs().max(hi.abs()) || width <= T::min_positive_value() {
                let root = (lo + hi) / T::lit(2.0);
                if index > 0 && (root <= lo0 || root >= hi0) {
                    return Err(Error::BracketFailure { index });
                }
                return Ok(root);
            }
            let newton = x - g / dg;
            let stalled = width > width_prev[0] / T::lit(2.0) && iter % 2 == 1;
            x = if newton > lo && newton < hi && !stalled {
                if (newton - x).abs() <= eps * x.abs() {
                    return Ok(newton);
                }
                newton
            } else {
                (lo + hi) / T::lit(2.0)
            };
            width_prev = [width_prev[1], width];
        }
        Err(Error::NonConvergence("secular root"))
    }

    /// Offset of root `k` from `eps[origin]`, for `origin` in `{k-1, k}`
    /// (or `0` for the ground state).
    fn root_from(&self, k: usize, origin: usize) -> Result<T> {
        if k == 0 {
            debug_assert_eq!(origin, 0);
            return self.solve(0, 0, -self.rho, T::zero());
        }
        if origin + 1 == k {
            self.solve(k, origin, T::zero(), self.pole(k, origin))
        } else {
            self.solve(k, origin, self.pole(k - 1, origin), T::zero())
        }
    }

    /// Root `k` as `(origin, offset)` with the closer pole as origin.
    fn root(&self, k: usize) -> Result<(usize, T)> {
        if self.rho == T::zero() {
            return Ok((k, T::zero()));
        }
        if self.dim() == 1 {
            return Ok((0, -self.rho * self.weights[0]));
        }
        if k == 0 {
            return Ok((0, self.root_from(0, 0)?));
        }
        let mid = self.pole(k, k - 1) / T::lit(2.0);
        let (g, _) = self.secular(k - 1, mid);
        if g < T::zero() {
            Ok((k - 1, self.solve(k, k - 1, T::zero(), mid)?))
        } else {
            Ok((k, self.solve(k, k, -mid, T::zero())?))
        }
    }

    /// Lowest `k` eigenvalues in ascending order.
    pub fn secular_eigenvalues(&self, k: usize) -> Result<Vec<T>> {
        if k == 0 || k > self.dim() {
            return Err(Error::TooManyEigenvalues { requested: k, available: self.dim() });
        }
        if self.step == T::zero() {
            // t = 0: b (1 - x x^T) has eigenvalues 0 and b only
            if k > 2 {
                return Err(Error::InvalidArgument(
                    "at t = 0 the spectrum is {0, b}; at most 2 eigenvalues are meaningful".into(),
                ));
            }
            return Ok([T::zero(), self.rho][..k].to_vec());
        }
        (0..k).map(|j| self.root(j).map(|(origin, mu)| self.eps[origin] + mu)).collect()
    }

    /// `(E_0, E_1, E_1 - E_0)`; the gap is formed from offsets relative to
    /// `eps_0` rather than by subtracting absolute energies.
    pub fn lowest_pair(&self) -> Result<(T, T, T)> {
        if self.dim() < 2 {
            return Err(Error::TooManyEigenvalues { requested: 2, available: self.dim() });
        }
        if self.step == T::zero() {
            return Ok((T::zero(), self.rho, self.rho));
        }
        if self.rho == T::zero() {
            return Ok((self.eps[0], self.eps[1], self.pole(1, 0)));
        }
        let mu0 = self.root_from(0, 0)?;
        let mu1 = self.root_from(1, 0)?;
        Ok((self.eps[0] + mu0, self.eps[0] + mu1, mu1 - mu0))
    }

    pub fn gap(&self) -> Result<T> {
        self.lowest_pair().map(|(_, _, g)| g)
    }
}

pub fn secular_eigenvalues<T: Real>(h: &ReducedHamiltonian<T>, k: usize) -> Result<Vec<T>> {
    h.secular_eigenvalues(k)
}

/// `E_1(t) - E_0(t)`.
pub fn gap_at<T: Real>(spectrum: &DegeneracySpectrum, params: &HamiltonianParams<T>, t: T) -> Result<T> {
    build_reduced(spectrum, params, t)?.gap()
}

fn prescan_grid<T: Real>() -> Vec<T> {
    (1..=PRESCAN_SAMPLES).map(|i| T::count(i as u64) / T::count(PRESCAN_SAMPLES as u64 + 1)).collect()
}

/// Minimizes `f` over `(0, 1)`: a uniform pre-scan locates candidate
/// minima, each of which is refined by golden section. More than one
/// candidate is reported as [`Error::NotUnimodal`].
fn minimize_unit_interval<T: Real>(mut f: impl FnMut(T) -> Result<T>, t_tol: T) -> Result<(T, T)> {
    let grid = prescan_grid::<T>();
    let values = grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let candidates = local_minima(&values);
    let mut refined = Vec::with_capacity(candidates.len());
    for &i in &candidates {
        let lo = if i == 0 { T::zero() } else { grid[i - 1] };
        let hi = if i + 1 == grid.len() { T::one() } else { grid[i + 1] };
        refined.push(golden_section(&mut f, lo, hi, t_tol)?);
    }
    match refined.as_slice() {
        [single] => Ok(*single),
        _ => Err(Error::NotUnimodal { minima: refined.iter().map(|(t, g)| (t.as_f64(), g.as_f64())).collect() }),
    }
}

/// Numerically minimal gap over `t in (0, 1)`, located to within `t_tol`.
pub fn minimize_gap<T: Real>(
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    t_tol: T,
) -> Result<GapResult<T>> {
    let (t_min, _) = minimize_unit_interval(|t| gap_at(spectrum, params, t), t_tol)?;
    let (e0, e1, delta) = build_reduced(spectrum, params, t_min)?.lowest_pair()?;
    Ok(GapResult { t_min, delta, e0, e1, method: GapMethod::NumericMin })
}

/// Characteristic polynomial `det(H_s(t) - lambda)` divided by
/// `prod_{j in J, j > 0} (j a t)`, which for `J = {0..D}` is `(a t)^D D!`.
///
/// Evaluated as `P * ((eps_i - lambda) g_i(lambda) - rho w_i)` around the
/// pole `i` nearest to `lambda`, where `P` is the product over the other
/// poles (accumulated as sign and log-magnitude) and `g_i` the secular
/// function without its `i`-th term, so the value is finite and accurate
/// on and near every pole.
pub fn charpoly_normalized<T: Real>(
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    lambda: T,
    t: T,
) -> Result<T> {
    check_time(t)?;
    if t == T::zero() {
        return Err(Error::TimeOutOfRange(0.0));
    }
    let h = build_reduced(spectrum, params, t)?;
    let nearest = (0..h.dim())
        .min_by(|&x, &y| (h.eps[x] - lambda).abs().partial_cmp(&(h.eps[y] - lambda).abs()).expect("finite energies"))
        .expect("non-empty spectrum");
    let gap_i = h.eps[nearest] - lambda;
    let mut log_mag = T::zero();
    let mut negative = false;
    let mut partial = T::zero();
    for (k, &j) in h.levels.iter().enumerate() {
        if j > 0 {
            log_mag -= (T::count(j as u64) * h.step).ln();
        }
        if k == nearest {
            continue;
        }
        let diff = gap_i + h.pole(k, nearest);
        log_mag += diff.abs().ln();
        negative ^= diff < T::zero();
        partial += h.weights[k] / diff;
    }
    let core = gap_i * (T::one() - h.rho * partial) - h.rho * h.weights[nearest];
    let magnitude = log_mag.exp();
    Ok(if negative { -magnitude * core } else { magnitude * core })
}

/// Gap of `H_s(t)` projected onto the span of the uniform state and the
/// symmetric solution state `|0>_s`.
pub fn two_level_gap<T: Real>(spectrum: &DegeneracySpectrum, params: &HamiltonianParams<T>, t: T) -> Result<T> {
    if spectrum.d0() == 0 {
        return Err(Error::Unsatisfiable);
    }
    let h = build_reduced(spectrum, params, t)?;
    if h.dim() < 2 {
        return Err(Error::TooManyEigenvalues { requested: 2, available: 1 });
    }
    let w0 = h.weights[0];
    let rest = T::one() - w0;
    let excited: CompensatedSum<T> = (1..h.dim()).map(|k| h.pole(k, 0) * h.weights[k]).collect();
    // diagonal entries relative to eps_0
    let m11 = -h.rho * w0;
    let m22 = excited.value() / rest - h.rho * rest;
    let m12 = -h.rho * (w0 * rest).sqrt();
    let diff = m11 - m22;
    Ok((diff * diff + T::lit(4.0) * m12 * m12).sqrt())
}

/// `(t, gap)` minimizing [`two_level_gap`].
pub fn minimize_two_level_gap<T: Real>(
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    t_tol: T,
) -> Result<(T, T)> {
    minimize_unit_interval(|t| two_level_gap(spectrum, params, t), t_tol)
}

/// CSV rows `t,E_0,...,E_{k-1}` for level diagrams.
pub fn spectral_flow_csv<T: Real>(
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    times: &[T],
    k: usize,
) -> Result<String> {
    let mut out = String::from("t");
    for j in 0..k {
        out.push_str(&format!(",E_{j}"));
    }
    out.push('\n');
    for &t in times {
        let h = build_reduced(spectrum, params, t)?;
        let energies = h.secular_eigenvalues(k.min(h.dim()))?;
        out.push_str(&sig17(t.as_f64()));
        for e in energies {
            out.push(',');
            out.push_str(&sig17(e.as_f64()));
        }
        out.push('\n');
    }
    Ok(out)
}
