//! Exhaustive violation-count histogram over all `2^n` assignments.
//!
//! Assignments are processed 64 at a time. Within a block the lowest six
//! variables run through all 64 combinations, so their truth tables are
//! fixed words; every higher variable is constant across the block. A clause
//! therefore reduces, per block, to either nothing, a fixed 64-lane mask, or
//! "all lanes". Per-lane counts live in a bit-sliced counter and are spilled
//! into the histogram once per block.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::{Assignment, SatInstance};

/// Histogram `d_j` of assignments violating exactly `j` clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracySpectrum {
    n: u32,
    m: usize,
    d: Vec<u64>,
}

impl DegeneracySpectrum {
    /// Builds a spectrum from raw counts, trimming trailing zeros and checking
    /// `sum d_j = 2^n` and `sum j d_j = m 2^n / 8` exactly.
    pub fn from_counts(n: u32, m: usize, d: Vec<u64>) -> Result<Self> {
        let spec = Self::from_counts_unchecked(n, m, d);
        spec.check_identities()?;
        Ok(spec)
    }

    /// Builds a spectrum without checking the counting identities. Only
    /// useful for negative controls.
    pub fn from_counts_unchecked(n: u32, m: usize, mut d: Vec<u64>) -> Self {
        while d.len() > 1 && d.last() == Some(&0) {
            d.pop();
        }
        Self { n, m, d }
    }

    pub fn check_identities(&self) -> Result<()> {
        let total: u128 = self.d.iter().map(|&x| u128::from(x)).sum();
        let first: u128 = self.d.iter().enumerate().map(|(j, &x)| j as u128 * u128::from(x)).sum();
        let dim = 1u128 << self.n;
        if total != dim {
            return Err(Error::InvalidInstance(format!("sum of degeneracies {total} != 2^{}", self.n)));
        }
        if first * 8 != self.m as u128 * dim {
            return Err(Error::InvalidInstance(format!(
                "sum j*d_j = {first} but m*2^n/8 = {}",
                self.m as u128 * dim / 8
            )));
        }
        if self.d.last().is_some_and(|&x| x == 0) {
            return Err(Error::InvalidInstance("top degeneracy is zero".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Hilbert-space dimension `N = 2^n`.
    pub fn dimension(&self) -> u64 {
        1u64 << self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.d
    }

    pub fn d0(&self) -> u64 {
        self.d[0]
    }

    /// Largest violated-clause count `D`.
    pub fn max_violations(&self) -> usize {
        self.d.len() - 1
    }

    /// `(j, d_j)` for every level with `d_j > 0`.
    pub fn levels(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.d.iter().copied().enumerate().filter(|&(_, x)| x > 0)
    }

    /// Exact `sum_j j d_j`.
    pub fn first_moment_count(&self) -> u128 {
        self.d.iter().enumerate().map(|(j, &x)| j as u128 * u128::from(x)).sum()
    }

    /// CSV with header `j,d_j`; one row per level including zero counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,d_j\n");
        for (j, d) in self.d.iter().enumerate() {
            out.push_str(&format!("{j},{d}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationConfig {
    /// Largest `n` accepted for exhaustive enumeration.
    pub max_vars: u32,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self { max_vars: 34, threads: None }
    }
}

impl EnumerationConfig {
    pub fn with_threads(threads: usize) -> Self {
        Self { threads: Some(threads), ..Self::default() }
    }

    fn check(&self, n: u32) -> Result<()> {
        if n > self.max_vars {
            return Err(Error::EnumerationCap { n, cap: self.max_vars });
        }
        Ok(())
    }

    fn run<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        match self.threads {
            None => Ok(job()),
            Some(k) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(k.max(1))
                    .build()
                    .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// Number of clauses falsified by `assignment`.
pub fn violation_count(instance: &SatInstance, assignment: &Assignment) -> Result<usize> {
    if assignment.len() != instance.n() {
        return Err(Error::LengthMismatch { expected: instance.n(), got: assignment.len() });
    }
    let bits = assignment.bits();
    Ok(instance.clauses().iter().filter(|c| c.is_violated_by(bits)).count())
}

pub fn degeneracy_spectrum(instance: &SatInstance) -> Result<DegeneracySpectrum> {
    degeneracy_spectrum_with(instance, &EnumerationConfig::default())
}

pub fn degeneracy_spectrum_with(instance: &SatInstance, config: &EnumerationConfig) -> Result<DegeneracySpectrum> {
    config.check(instance.n())?;
    let kernel = Kernel::new(instance);
    let hist = config.run(|| kernel.histogram())?;
    DegeneracySpectrum::from_counts(instance.n(), instance.m(), hist)
}

/// `d_0`, the number of satisfying assignments.
pub fn solution_count(instance: &SatInstance) -> Result<u64> {
    solution_count_capped(instance, u64::MAX, &EnumerationConfig::default())
}

/// `min(d_0, limit)`. Enumeration stops as soon as `limit` solutions are
/// found, which makes "is `d_0 = 1`?" cheap on overconstrained instances.
pub fn solution_count_capped(instance: &SatInstance, limit: u64, config: &EnumerationConfig) -> Result<u64> {
    config.check(instance.n())?;
    Ok(Kernel::new(instance).count_solutions(limit))
}

const LOW_VARS: u32 = 6;

/// Truth table of variable `i < 6` across the 64 lanes of a block.
const LANE_VAR: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// `SPREAD[b]` has byte `i` equal to bit `i` of `b`.
const SPREAD: [u64; 256] = {
    let mut table = [0u64; 256];
    let mut b = 0;
    while b < 256 {
        let mut word = 0u64;
        let mut i = 0;
        while i < 8 {
            word |= (((b >> i) & 1) as u64) << (8 * i);
            i += 1;
        }
        table[b] = word;
        b += 1;
    }
    table
};

const MAX_PLANES: usize = 16;

/// A clause restricted to one block: violated in lanes `low` whenever the
/// block index matches `value` on the bits in `mask`.
#[derive(Debug, Clone, Copy)]
struct BlockClause {
    mask: u64,
    value: u64,
    low: u64,
    /// Lowest variable index >= 6 involved, if any.
    min_high: Option<u32>,
}

impl BlockClause {
    #[inline]
    fn active(&self, block: u64) -> bool {
        block & self.mask == self.value
    }
}

struct Kernel {
    m: usize,
    lanes: u64,
    blocks: u64,
    high_vars: u32,
    /// Bit-sliced per-lane counts contributed by clauses on low variables only.
    base: [u64; MAX_PLANES],
    base_clauses: Vec<u64>,
    mixed: Vec<BlockClause>,
    high_only: Vec<BlockClause>,
    planes: usize,
}

impl Kernel {
    fn new(instance: &SatInstance) -> Self {
        let n = instance.n();
        let high_vars = n.saturating_sub(LOW_VARS);
        let lanes = if n >= LOW_VARS { u64::MAX } else { (1u64 << (1u32 << n)) - 1 };
        let mut base_clauses = Vec::new();
        let mut mixed = Vec::new();
        let mut high_only = Vec::new();
        for clause in instance.clauses() {
            let mut bc = BlockClause { mask: 0, value: 0, low: lanes, min_high: None };
            let mut has_low = false;
            for lit in clause.literals() {
                if lit.var < LOW_VARS {
                    has_low = true;
                    let table = LANE_VAR[lit.var as usize];
                    bc.low &= if lit.falsifying_value() { table } else { !table };
                } else {
                    let bit = 1u64 << (lit.var - LOW_VARS);
                    bc.mask |= bit;
                    if lit.falsifying_value() {
                        bc.value |= bit;
                    }
                    bc.min_high = Some(bc.min_high.map_or(lit.var, |v: u32| v.min(lit.var)));
                }
            }
            match (has_low, bc.mask != 0) {
                (true, false) => base_clauses.push(bc.low),
                (true, true) => mixed.push(bc),
                (false, _) => high_only.push(bc),
            }
        }
        let mut base = [0u64; MAX_PLANES];
        for &mask in &base_clauses {
            add_lanes(&mut base, mask);
        }
        let lane_max = base_clauses.len() + mixed.len();
        let planes = (usize::BITS - lane_max.leading_zeros()) as usize;
        assert!(planes <= MAX_PLANES, "too many clauses for the bit-sliced counter");
        Self {
            m: instance.m(),
            lanes,
            blocks: 1u64 << high_vars,
            high_vars,
            base,
            base_clauses,
            mixed,
            high_only,
            planes,
        }
    }

    fn histogram(&self) -> Vec<u64> {
        let chunk = (self.blocks / 1024).max(1);
        let chunks = self.blocks.div_ceil(chunk);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut hist = vec![0u64; self.m + 1];
                let end = ((c + 1) * chunk).min(self.blocks);
                for block in c * chunk..end {
                    self.accumulate_block(block, &mut hist);
                }
                hist
            })
            .reduce(
                || vec![0u64; self.m + 1],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }

    #[inline]
    fn accumulate_block(&self, block: u64, hist: &mut [u64]) {
        let offset = self.high_only.iter().filter(|c| c.active(block)).count();
        let mut planes = self.base;
        for c in &self.mixed {
            if c.active(block) {
                add_lanes(&mut planes, c.low);
            }
        }
        let hist = &mut hist[offset..];
        if self.lanes == u64::MAX && self.planes <= 8 {
            for byte in 0..8 {
                let shift = 8 * byte;
                let mut packed = 0u64;
                for (k, plane) in planes[..self.planes].iter().enumerate() {
                    packed |= SPREAD[((plane >> shift) & 0xFF) as usize] << k;
                }
                for lane in 0..8 {
                    hist[((packed >> (8 * lane)) & 0xFF) as usize] += 1;
                }
            }
        } else {
            for lane in 0..64 {
                if (self.lanes >> lane) & 1 == 0 {
                    continue;
                }
                let count = planes[..self.planes]
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (k, p)| acc | ((((p >> lane) & 1) as usize) << k));
                hist[count] += 1;
            }
        }
    }

    /// Depth-first over the high variables, most significant first. A clause
    /// is decided once its lowest high variable is fixed; it then kills its
    /// low-lane mask for the whole subtree.
    fn count_solutions(&self, limit: u64) -> u64 {
        let dead = self.base_clauses.iter().fold(0u64, |acc, m| acc | m);
        let mut by_level: Vec<Vec<BlockClause>> = vec![Vec::new(); self.high_vars as usize];
        for c in self.mixed.iter().chain(&self.high_only) {
            let level = (c.min_high.expect("clause has a high variable") - LOW_VARS) as usize;
            by_level[level].push(*c);
        }
        let mut found = 0u64;
        self.dfs(self.high_vars, 0, dead, &by_level, limit, &mut found);
        found.min(limit)
    }

    fn dfs(&self, level: u32, block: u64, dead: u64, by_level: &[Vec<BlockClause>], limit: u64, found: &mut u64) {
        if dead & self.lanes == self.lanes || *found >= limit {
            return;
        }
        if level == 0 {
            *found += u64::from((self.lanes & !dead).count_ones());
            return;
        }
        let var = level - 1;
        for bit in [0u64, 1] {
            let block = block | (bit << var);
            let dead = by_level[var as usize].iter().filter(|c| c.active(block)).fold(dead, |acc, c| acc | c.low);
            self.dfs(var, block, dead, by_level, limit, found);
        }
    }
}

/// Adds one to every lane set in `mask` of a bit-sliced counter.
#[inline]
fn add_lanes(planes: &mut [u64; MAX_PLANES], mut carry: u64) {
    for plane in planes.iter_mut() {
        if carry == 0 {
            break;
        }
        let next = *plane & carry;
        *plane ^= carry;
        carry = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_binomial, gen_random, parse_dimacs, Clause, Literal};

    fn naive(instance: &SatInstance) -> Vec<u64> {
        let mut hist = vec![0u64; instance.m() + 1];
        for bits in 0..1u64 << instance.n() {
            let a = Assignment::new(bits, instance.n()).unwrap();
            hist[violation_count(instance, &a).unwrap()] += 1;
        }
        while hist.len() > 1 && hist.last() == Some(&0) {
            hist.pop();
        }
        hist
    }

    #[test]
    fn spread_table() {
        assert_eq!(SPREAD[0b1000_0001], 0x0100_0000_0000_0001);
        assert_eq!(SPREAD[0xFF], 0x0101_0101_0101_0101);
    }

    #[test]
    fn binomial_r2_matches_formula() {
        let planted = Assignment::new(0b101_011, 6).unwrap();
        let inst = gen_binomial(2, &planted, 3).unwrap();
        assert_eq!(degeneracy_spectrum(&inst).unwrap().counts(), &[1, 14, 49]);
    }

    #[test]
    fn small_and_odd_n_agree_with_naive() {
        for (n, m, seed) in [(3, 2, 1), (4, 9, 2), (5, 20, 3), (6, 30, 4), (7, 31, 5), (11, 50, 6)] {
            let inst = gen_random(n, m, seed).unwrap();
            assert_eq!(degeneracy_spectrum(&inst).unwrap().counts(), naive(&inst), "n={n}");
        }
    }

    #[test]
    fn duplicated_clause_counts_twice() {
        let inst = parse_dimacs("p cnf 3 2\n1 2 3 0\n1 2 3 0\n").unwrap();
        let all_false = Assignment::new(0, 3).unwrap();
        assert_eq!(violation_count(&inst, &all_false).unwrap(), 2);
        assert_eq!(degeneracy_spectrum(&inst).unwrap().counts(), &[7, 0, 1]);
    }

    #[test]
    fn length_mismatch() {
        let inst = gen_random(5, 3, 0).unwrap();
        let a = Assignment::new(0, 4).unwrap();
        assert_eq!(violation_count(&inst, &a), Err(Error::LengthMismatch { expected: 5, got: 4 }));
    }

    #[test]
    fn unsat_all_patterns() {
        let clauses =
            (0u8..8).map(|c| Clause::forbidding([0, 1, 2], [c & 1 == 1, c & 2 == 2, c & 4 == 4]).unwrap()).collect();
        let inst = SatInstance::new(3, clauses).unwrap();
        assert_eq!(solution_count(&inst).unwrap(), 0);
        assert_eq!(degeneracy_spectrum(&inst).unwrap().counts(), &[0, 8]);
    }

    #[test]
    fn free_variables_multiply_solutions() {
        // (x0 | x1 | x2) & (x0 | x1 | !x2) leaves 6 of 8 patterns on the
        // first triple and 7 free variables.
        let c1 = Clause::new([Literal::positive(0), Literal::positive(1), Literal::positive(2)]).unwrap();
        let c2 = Clause::new([Literal::positive(0), Literal::positive(1), Literal::negative(2)]).unwrap();
        let inst = SatInstance::new(10, vec![c1, c2]).unwrap();
        assert_eq!(solution_count(&inst).unwrap(), 6 << 7);
        assert_eq!(solution_count_capped(&inst, 5, &EnumerationConfig::default()).unwrap(), 5);
    }

    #[test]
    fn solution_count_equals_d0() {
        for seed in 0..20 {
            let inst = gen_random(14, 50, seed).unwrap();
            let spec = degeneracy_spectrum(&inst).unwrap();
            assert_eq!(solution_count(&inst).unwrap(), spec.d0());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let inst = gen_random(20, 10, 0).unwrap();
        let cfg = EnumerationConfig { max_vars: 19, threads: None };
        assert_eq!(degeneracy_spectrum_with(&inst, &cfg), Err(Error::EnumerationCap { n: 20, cap: 19 }));
    }

    #[test]
    fn csv_is_plain_integers() {
        let spec = DegeneracySpectrum::from_counts(3, 8, vec![0, 8]).unwrap();
        assert_eq!(spec.to_csv(), "j,d_j\n0,0\n1,8\n");
    }

    #[test]
    fn identities_reject_bad_counts() {
        assert!(DegeneracySpectrum::from_counts(3, 1, vec![7, 1]).is_ok());
        assert!(DegeneracySpectrum::from_counts(3, 1, vec![6, 2]).is_err());
        assert!(DegeneracySpectrum::from_counts(3, 1, vec![7, 2]).is_err());
    }
}
