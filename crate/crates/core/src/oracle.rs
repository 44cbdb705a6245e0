//! Brute-force ground truth: the full `2^n`-dimensional `H(t)` diagonalized
//! densely, and a check that its spectrum splits into the symmetric sector
//! plus the levels `eps_j` with multiplicity `d_j - 1`.

use std::fmt;

use serde_json::json;

use crate::dense::{packed_index, symmetric_eigenvalues_packed};
use crate::error::{Error, Result};
use crate::instances::SatInstance;
use crate::reduced::{build_reduced, HamiltonianParams};
use crate::scalar::{CompensatedSum, Real};
use crate::spectrum::{degeneracy_spectrum, DegeneracySpectrum};

/// Default ceiling on `n` for dense construction (`N = 8192`).
pub const DEFAULT_ORACLE_CAP: u32 = 13;

/// Smallest tolerance accepted by [`verify_decomposition`]; a zero tolerance
/// can never match round-off split degenerate levels.
pub const MIN_TOLERANCE: f64 = 1e-12;

/// `H(t)` in the computational basis, stored as a packed lower triangle.
#[derive(Debug, Clone)]
pub struct FullHamiltonian<T> {
    n: u32,
    dim: usize,
    packed: Vec<T>,
}

impl<T: Real> FullHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.packed[packed_index(r, c)]
    }

    pub fn trace(&self) -> T {
        let s: CompensatedSum<T> = (0..self.dim).map(|i| self.get(i, i)).collect();
        s.value()
    }

    pub fn frobenius_norm(&self) -> T {
        let mut s = CompensatedSum::new();
        for i in 0..self.dim {
            for j in 0..=i {
                let x = self.packed[packed_index(i, j)];
                let w = if i == j { T::one() } else { T::lit(2.0) };
                s.add(w * x * x);
            }
        }
        s.value().sqrt()
    }
}

/// Entry `(i, k) = (1-t) b (delta_ik - 1/N) + t a v_i delta_ik`, where `v_i`
/// is the violation count of assignment `i`.
pub fn build_full<T: Real>(instance: &SatInstance, params: &HamiltonianParams<T>, t: T) -> Result<FullHamiltonian<T>> {
    build_full_capped(instance, params, t, DEFAULT_ORACLE_CAP)
}

pub fn build_full_capped<T: Real>(
    instance: &SatInstance,
    params: &HamiltonianParams<T>,
    t: T,
    cap: u32,
) -> Result<FullHamiltonian<T>> {
    let n = instance.n();
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::TimeOutOfRange(t.as_f64()));
    }
    let dim = 1usize << n;
    let rho = (T::one() - t) * params.b();
    let off = -rho / T::count(dim as u64);
    let at = t * params.a();
    let mut packed = vec![off; dim * (dim + 1) / 2];
    for i in 0..dim {
        let violated = instance.clauses().iter().filter(|c| c.is_violated_by(i as u64)).count();
        packed[packed_index(i, i)] = rho + off + at * T::count(violated as u64);
    }
    Ok(FullHamiltonian { n, dim, packed })
}

/// All `N` eigenvalues, ascending.
pub fn full_spectrum<T: Real>(h: &FullHamiltonian<T>) -> Result<Vec<T>> {
    symmetric_eigenvalues_packed(h.packed.clone(), h.dim)
}

/// Multiplicity check at one level `eps_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCheck<T> {
    pub j: usize,
    pub eps: T,
    /// `d_j - 1` summed over levels within tolerance of `eps`, plus any
    /// symmetric-sector eigenvalue within tolerance.
    pub expected: u64,
    /// Full-spectrum eigenvalues within tolerance of `eps`.
    pub found: u64,
}

impl<T> LevelCheck<T> {
    pub fn ok(&self) -> bool {
        self.expected == self.found
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport<T> {
    pub n: u32,
    pub t: T,
    pub tol: T,
    pub levels: Vec<LevelCheck<T>>,
    /// Eigenvalues left after removing `d_j - 1` copies of each `eps_j`.
    pub residual_count: usize,
    pub sector_dim: usize,
    /// Largest mismatch between residual and secular eigenvalues.
    pub symmetric_max_error: T,
    pub trace_full: T,
    pub trace_decomposed: T,
    pub frobenius_full: T,
    pub frobenius_decomposed: T,
    /// Human-readable description of the largest violation, if any.
    pub worst: Option<String>,
}

impl<T: Real> DecompositionReport<T> {
    pub fn antisymmetric_ok(&self) -> bool {
        self.levels.iter().all(LevelCheck::ok)
    }

    pub fn symmetric_ok(&self) -> bool {
        self.residual_count == self.sector_dim && self.symmetric_max_error <= self.tol
    }

    pub fn pass(&self) -> bool {
        self.antisymmetric_ok() && self.symmetric_ok()
    }

    /// Flat JSON record.
    pub fn to_record(&self) -> String {
        json!({
            "n": self.n,
            "t": self.t.as_f64(),
            "tol": self.tol.as_f64(),
            "sector_dim": self.sector_dim,
            "residual_count": self.residual_count,
            "antisymmetric_ok": self.antisymmetric_ok(),
            "symmetric_ok": self.symmetric_ok(),
            "symmetric_max_error": self.symmetric_max_error.as_f64(),
            "trace_full": self.trace_full.as_f64(),
            "trace_decomposed": self.trace_decomposed.as_f64(),
            "frobenius_full": self.frobenius_full.as_f64(),
            "frobenius_decomposed": self.frobenius_decomposed.as_f64(),
            "worst": self.worst,
            "pass": self.pass(),
        })
        .to_string()
    }
}

impl<T: Real> fmt::Display for DecompositionReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "decomposition check n={} t={} tol={:e}", self.n, self.t, self.tol.as_f64())?;
        for lvl in &self.levels {
            writeln!(
                f,
                "  eps_{:<3} = {:<22} multiplicity expected {:>8} found {:>8} {}",
                lvl.j,
                lvl.eps,
                lvl.expected,
                lvl.found,
                if lvl.ok() { "ok" } else { "MISMATCH" }
            )?;
        }
        writeln!(
            f,
            "  symmetric sector: {} residual vs {} secular, max error {:e}",
            self.residual_count,
            self.sector_dim,
            self.symmetric_max_error.as_f64()
        )?;
        writeln!(
            f,
            "  trace {} vs {}, frobenius {} vs {}",
            self.trace_full, self.trace_decomposed, self.frobenius_full, self.frobenius_decomposed
        )?;
        if let Some(w) = &self.worst {
            writeln!(f, "  worst: {w}")?;
        }
        write!(f, "  result: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

/// Diagonalizes `H(t)` densely and compares with the reduced picture built
/// from the instance's own spectrum.
pub fn verify_decomposition<T: Real>(
    instance: &SatInstance,
    params: &HamiltonianParams<T>,
    t: T,
    tol: T,
) -> Result<DecompositionReport<T>> {
    verify_decomposition_capped(instance, params, t, tol, DEFAULT_ORACLE_CAP)
}

/// As [`verify_decomposition`] with an explicit ceiling on `n`.
pub fn verify_decomposition_capped<T: Real>(
    instance: &SatInstance,
    params: &HamiltonianParams<T>,
    t: T,
    tol: T,
    cap: u32,
) -> Result<DecompositionReport<T>> {
    if instance.n() > cap {
        return Err(Error::OracleCap { n: instance.n(), cap });
    }
    let spectrum = degeneracy_spectrum(instance)?;
    check_against(instance, &spectrum, params, t, tol, cap)
}

/// As [`verify_decomposition`], with the degeneracies supplied by the
/// caller (possibly wrong, for negative controls).
pub fn verify_against<T: Real>(
    instance: &SatInstance,
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    t: T,
    tol: T,
) -> Result<DecompositionReport<T>> {
    check_against(instance, spectrum, params, t, tol, DEFAULT_ORACLE_CAP)
}

fn check_against<T: Real>(
    instance: &SatInstance,
    spectrum: &DegeneracySpectrum,
    params: &HamiltonianParams<T>,
    t: T,
    tol: T,
    cap: u32,
) -> Result<DecompositionReport<T>> {
    if tol.is_nan() || tol < T::lit(MIN_TOLERANCE) {
        return Err(Error::InvalidArgument(format!("tolerance {} below the minimum {MIN_TOLERANCE:e}", tol.as_f64())));
    }
    let full = build_full_capped(instance, params, t, cap)?;
    let eigen = full_spectrum(&full)?;
    let reduced = build_reduced(spectrum, params, t)?;
    let sector_dim = reduced.dim();
    let secular = if t == T::zero() {
        // the t = 0 sector spectrum is 0 once and b for the rest
        let mut s = vec![params.b(); sector_dim];
        s[0] = T::zero();
        s
    } else {
        reduced.secular_eigenvalues(sector_dim)?
    };

    let mut levels = Vec::new();
    let mut used = vec![false; eigen.len()];
    let mut worst: Option<(f64, String)> = None;
    let mut note = |size: f64, text: String| {
        if worst.as_ref().is_none_or(|(s, _)| size > *s) {
            worst = Some((size, text));
        }
    };
    let mut trace_dec = CompensatedSum::new();
    let mut frob_dec = CompensatedSum::new();
    for &e in &secular {
        trace_dec.add(e);
        frob_dec.add(e * e);
    }
    for (k, &j) in reduced.levels().iter().enumerate() {
        let eps = reduced.eps()[k];
        let copies = spectrum.counts()[j] - 1;
        let mult = T::count(copies);
        trace_dec.add(mult * eps);
        frob_dec.add(mult * eps * eps);

        // levels within tol of each other (all of them at t = 0) share a window
        let pooled: u64 = reduced
            .levels()
            .iter()
            .zip(reduced.eps())
            .filter(|(_, &other)| (other - eps).abs() <= tol)
            .map(|(&jj, _)| spectrum.counts()[jj] - 1)
            .sum();
        let coincident = secular.iter().filter(|&&e| (e - eps).abs() <= tol).count() as u64;
        let lo = eigen.partition_point(|&x| x < eps - tol);
        let hi = eigen.partition_point(|&x| x <= eps + tol);
        let check = LevelCheck { j, eps, expected: pooled + coincident, found: (hi - lo) as u64 };
        if !check.ok() {
            note(
                f64::INFINITY,
                format!("multiplicity mismatch at eps_{j}: expected {} found {}", check.expected, check.found),
            );
        }
        levels.push(check);
        take_nearest(&eigen, &mut used, eps, copies as usize);
    }

    let residual: Vec<T> = eigen.iter().zip(&used).filter(|(_, &u)| !u).map(|(&x, _)| x).collect();
    let mut symmetric_max_error = T::zero();
    if residual.len() == secular.len() {
        for (k, (&r, &s)) in residual.iter().zip(&secular).enumerate() {
            let err = (r - s).abs();
            if err > symmetric_max_error {
                symmetric_max_error = err;
            }
            if err > tol {
                note(err.as_f64(), format!("symmetric eigenvalue {k}: full {r} vs secular {s}"));
            }
        }
    } else {
        symmetric_max_error = T::infinity();
        note(
            f64::INFINITY,
            format!("{} residual eigenvalues for a {}-dimensional sector", residual.len(), secular.len()),
        );
    }

    Ok(DecompositionReport {
        n: instance.n(),
        t,
        tol,
        levels,
        residual_count: residual.len(),
        sector_dim,
        symmetric_max_error,
        trace_full: full.trace(),
        trace_decomposed: trace_dec.value(),
        frobenius_full: full.frobenius_norm(),
        frobenius_decomposed: frob_dec.value().sqrt(),
        worst: worst.map(|(_, w)| w),
    })
}

/// Marks the `count` unused entries of sorted `values` nearest to `target`.
fn take_nearest<T: Real>(values: &[T], used: &mut [bool], target: T, count: usize) {
    let split = values.partition_point(|&x| x < target);
    let mut left = split;
    let mut right = split;
    let mut taken = 0;
    while taken < count {
        while left > 0 && used[left - 1] {
            left -= 1;
        }
        while right < values.len() && used[right] {
            right += 1;
        }
        let pick = match (left > 0, right < values.len()) {
            (true, true) => {
                if target - values[left - 1] <= values[right] - target {
                    left - 1
                } else {
                    right
                }
            }
            (true, false) => left - 1,
            (false, true) => right,
            (false, false) => return,
        };
        used[pick] = true;
        taken += 1;
    }
}
