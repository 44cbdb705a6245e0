//! 3-SAT instances: validation, DIMACS I/O, and the generators for the
//! uniform, single-solution and binomial ensembles.
//!
//! Every clause forbids exactly one pattern of its three variables, namely
//! the one that falsifies all three literals. A positive literal `x` is
//! falsified by `x = false`, so the forbidden value of a variable equals the
//! literal's `negated` flag.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DimacsError, Error, Result};
use crate::spectrum::{self, EnumerationConfig};

/// Seedable generator used by every ensemble. ChaCha8 output is specified
/// bit-for-bit, so instances reproduce across platforms.
pub type InstanceRng = ChaCha8Rng;

/// Exact clause density `m/n`.
pub type Density = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        Self { var, negated }
    }

    pub fn positive(var: u32) -> Self {
        Self::new(var, false)
    }

    pub fn negative(var: u32) -> Self {
        Self::new(var, true)
    }

    /// One-based signed DIMACS encoding.
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var) + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Value of the variable that makes this literal false.
    pub fn falsifying_value(self) -> bool {
        self.negated
    }
}

/// A disjunction of exactly three literals over distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: [Literal; 3],
}

impl Clause {
    pub fn new(literals: [Literal; 3]) -> Result<Self> {
        let [a, b, c] = literals;
        if a.var == b.var || a.var == c.var || b.var == c.var {
            return Err(Error::InvalidInstance(format!(
                "clause repeats a variable: {} {} {}",
                a.to_dimacs(),
                b.to_dimacs(),
                c.to_dimacs()
            )));
        }
        Ok(Self { literals })
    }

    /// The clause violated exactly when `vars[i] == pattern[i]` for all `i`.
    pub fn forbidding(vars: [u32; 3], pattern: [bool; 3]) -> Result<Self> {
        Self::new([
            Literal::new(vars[0], pattern[0]),
            Literal::new(vars[1], pattern[1]),
            Literal::new(vars[2], pattern[2]),
        ])
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.literals
    }

    pub fn vars(&self) -> [u32; 3] {
        self.literals.map(|l| l.var)
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var).max().unwrap_or(0)
    }

    /// Whether the assignment encoded in `bits` (bit `i` = variable `i`)
    /// falsifies every literal.
    #[inline]
    pub fn is_violated_by(&self, bits: u64) -> bool {
        self.literals.iter().all(|l| ((bits >> l.var) & 1 == 1) == l.falsifying_value())
    }
}

/// Provenance tag carried alongside an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ensemble {
    Random,
    SingleSolution,
    Binomial,
    #[default]
    External,
}

impl Ensemble {
    pub fn as_str(self) -> &'static str {
        match self {
            Ensemble::Random => "random",
            Ensemble::SingleSolution => "single-solution",
            Ensemble::Binomial => "binomial",
            Ensemble::External => "external",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Ensemble::Random),
            "single-solution" => Ok(Ensemble::SingleSolution),
            "binomial" => Ok(Ensemble::Binomial),
            "external" => Ok(Ensemble::External),
            other => Err(Error::InvalidArgument(format!("unknown ensemble `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metadata {
    pub ensemble: Ensemble,
    pub seed: Option<u64>,
    /// Instances discarded before acceptance (single-solution ensemble only).
    pub rejections: Option<u64>,
}

impl Metadata {
    /// Line-oriented `key=value` sidecar text.
    pub fn to_sidecar(&self) -> String {
        let mut out = format!("ensemble={}\n", self.ensemble);
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed={seed}\n"));
        }
        if let Some(r) = self.rejections {
            out.push_str(&format!("rejections={r}\n"));
        }
        out
    }

    pub fn from_sidecar(text: &str) -> Result<Self> {
        let mut meta = Metadata::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("metadata line `{line}` lacks `=`")))?;
            let parse_u64 = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("metadata `{key}` is not an integer")))
            };
            match key.trim() {
                "ensemble" => meta.ensemble = value.trim().parse()?,
                "seed" => meta.seed = Some(parse_u64(value)?),
                "rejections" => meta.rejections = Some(parse_u64(value)?),
                // unknown keys are carried by newer writers; ignore them
                _ => {}
            }
        }
        Ok(meta)
    }
}

/// A 3-SAT formula over variables `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    n: u32,
    clauses: Vec<Clause>,
    pub metadata: Metadata,
}

impl SatInstance {
    /// Checks variable ranges. An empty clause list is accepted here so that
    /// unconstrained formulas can be enumerated; [`SatInstance::validate`]
    /// rejects it.
    pub fn new(n: u32, clauses: Vec<Clause>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInstance(format!("n = {n} < 3")));
        }
        if n > 63 {
            return Err(Error::InvalidInstance(format!("n = {n} > 63")));
        }
        if let Some(c) = clauses.iter().find(|c| c.max_var() >= n) {
            return Err(Error::InvalidInstance(format!("clause references variable {} but n = {n}", c.max_var() + 1)));
        }
        Ok(Self { n, clauses, metadata: Metadata::default() })
    }

    pub fn with_metadata(mut self, metadata: Metadata) -> Self {
        self.metadata = metadata;
        self
    }

    /// Full invariant check, including `m >= 1`.
    pub fn validate(&self) -> Result<()> {
        if self.clauses.is_empty() {
            return Err(Error::InvalidInstance("instance has no clauses".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause density `m/n`, reduced.
    pub fn alpha(&self) -> Ratio<u64> {
        Ratio::new(self.m() as u64, u64::from(self.n))
    }
}

/// Truth values of `n` variables; bit `i` holds variable `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: u64,
    n: u32,
}

impl Assignment {
    pub fn new(bits: u64, n: u32) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidArgument(format!("assignment length {n} outside 1..=64")));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if bits & !mask != 0 {
            return Err(Error::InvalidArgument(format!("bits {bits:#x} exceed {n} variables")));
        }
        Ok(Self { bits, n })
    }

    pub fn from_bools(values: &[bool]) -> Result<Self> {
        let bits = values.iter().enumerate().fold(0u64, |acc, (i, &v)| acc | (u64::from(v) << i));
        Self::new(bits, values.len() as u32)
    }

    /// Uniformly random assignment.
    pub fn random(n: u32, rng: &mut impl Rng) -> Result<Self> {
        let mut bits = 0u64;
        for i in 0..n {
            bits |= u64::from(rng.gen::<bool>()) << i;
        }
        Self::new(bits, n)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, var: u32) -> bool {
        (self.bits >> var) & 1 == 1
    }
}

/// Parses DIMACS CNF. Comment lines (`c ...`) and the SATLIB `%` trailer are
/// skipped; clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<SatInstance> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<(i64, usize)> = Vec::with_capacity(3);

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader { line: line_no, text: line.into() }.into());
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((n, _)) = header else {
            return Err(DimacsError::MissingHeader { line: line_no }.into());
        };
        for token in line.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadToken { line: line_no, token: token.into() })?;
            if lit != 0 {
                if lit.unsigned_abs() > u64::from(n) {
                    return Err(DimacsError::VariableOutOfRange { line: line_no, var: lit.unsigned_abs(), n }.into());
                }
                current.push((lit, line_no));
                continue;
            }
            if current.len() != 3 {
                return Err(DimacsError::ClauseLength { line: line_no, len: current.len() }.into());
            }
            let lits: [Literal; 3] = std::array::from_fn(|i| {
                let (l, _) = current[i];
                Literal::new(l.unsigned_abs() as u32 - 1, l < 0)
            });
            let clause = Clause::new(lits).map_err(|_| {
                let dup =
                    if lits[0].var == lits[1].var || lits[0].var == lits[2].var { lits[0].var } else { lits[1].var };
                DimacsError::RepeatedVariable { line: line_no, var: dup + 1 }
            })?;
            clauses.push(clause);
            current.clear();
        }
    }

    if !current.is_empty() {
        return Err(DimacsError::Unterminated.into());
    }
    let (n, declared) = header.ok_or(DimacsError::MissingHeader { line: 0 })?;
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCount { declared, found: clauses.len() }.into());
    }
    let instance = SatInstance::new(n, clauses)?;
    instance.validate()?;
    Ok(instance)
}

fn parse_header(line: &str, line_no: usize) -> Result<(u32, usize)> {
    let malformed = || DimacsError::MalformedHeader { line: line_no, text: line.into() };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(malformed().into());
    }
    let n: u32 = fields[2].parse().map_err(|_| malformed())?;
    let m: usize = fields[3].parse().map_err(|_| malformed())?;
    if !(3..=63).contains(&n) || m == 0 {
        return Err(malformed().into());
    }
    Ok((n, m))
}

/// Writes DIMACS CNF; clause and literal order are preserved.
pub fn emit_dimacs(instance: &SatInstance) -> Result<String> {
    instance.validate()?;
    let mut out = format!("p cnf {} {}\n", instance.n(), instance.m());
    for clause in instance.clauses() {
        let [a, b, c] = clause.literals().map(Literal::to_dimacs);
        out.push_str(&format!("{a} {b} {c} 0\n"));
    }
    Ok(out)
}

fn distinct_triple(n: u32, rng: &mut impl Rng) -> [u32; 3] {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n);
    while b == a {
        b = rng.gen_range(0..n);
    }
    let mut c = rng.gen_range(0..n);
    while c == a || c == b {
        c = rng.gen_range(0..n);
    }
    let mut vars = [a, b, c];
    vars.sort_unstable();
    vars
}

fn random_clauses(n: u32, m: usize, rng: &mut impl Rng) -> Vec<Clause> {
    (0..m)
        .map(|_| {
            let vars = distinct_triple(n, rng);
            let pattern = [rng.gen::<bool>(), rng.gen::<bool>(), rng.gen::<bool>()];
            Clause::forbidding(vars, pattern).expect("distinct variables")
        })
        .collect()
}

/// Uniform random 3-SAT: each clause picks three distinct variables and
/// independent signs; clauses are drawn with replacement.
pub fn gen_random(n: u32, m: usize, seed: u64) -> Result<SatInstance> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mut rng = InstanceRng::seed_from_u64(seed);
    let clauses = random_clauses(n, m, &mut rng);
    Ok(SatInstance::new(n, clauses)?.with_metadata(Metadata {
        ensemble: Ensemble::Random,
        seed: Some(seed),
        rejections: None,
    }))
}

/// `round(alpha * n)`, halves rounded up.
pub fn clause_count(n: u32, alpha: Ratio<u64>) -> usize {
    let num = *alpha.numer() as u128 * u128::from(n);
    let den = *alpha.denom() as u128;
    ((2 * num + den) / (2 * den)) as usize
}

/// Parses a clause density given as a decimal (`4.5`) or a fraction
/// (`9/2`) into an exact ratio.
pub fn parse_density(text: &str) -> Result<Ratio<u64>> {
    let bad = || Error::InvalidArgument(format!("`{text}` is not a non-negative decimal or fraction"));
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if (int.is_empty() && frac.is_empty()) || frac.len() > 18 {
        return Err(bad());
    }
    let digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !digits(int) || !digits(frac) {
        return Err(bad());
    }
    let scale = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(scale).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
    Ok(Ratio::new(num, scale))
}

/// Single-solution random 3-SAT by rejection: uniform instances are drawn
/// until one has exactly one satisfying assignment.
///
/// Attempt `k` uses `gen_random` seeded with the `k`-th output of a ChaCha8
/// stream seeded by `seed`, so the accepted instance is reproducible from
/// `(seed, rejections)`.
pub fn gen_single_solution(n: u32, alpha: Ratio<u64>, seed: u64, max_tries: u64) -> Result<SatInstance> {
    gen_single_solution_with(n, alpha, seed, max_tries, &EnumerationConfig::default())
}

pub fn gen_single_solution_with(
    n: u32,
    alpha: Ratio<u64>,
    seed: u64,
    max_tries: u64,
    config: &EnumerationConfig,
) -> Result<SatInstance> {
    let m = clause_count(n, alpha);
    if m == 0 {
        return Err(Error::InvalidArgument(format!("alpha * n rounds to zero clauses (n = {n})")));
    }
    let mut stream = InstanceRng::seed_from_u64(seed);
    for attempt in 0..max_tries {
        let mut rng = InstanceRng::seed_from_u64(stream.gen());
        let clauses = random_clauses(n, m, &mut rng);
        let candidate = SatInstance::new(n, clauses)?;
        if spectrum::solution_count_capped(&candidate, 2, config)? == 1 {
            return Ok(candidate.with_metadata(Metadata {
                ensemble: Ensemble::SingleSolution,
                seed: Some(seed),
                rejections: Some(attempt),
            }));
        }
    }
    Err(Error::Exhausted { tries: max_tries })
}

/// Binomial 3-SAT: variables are grouped into triples `(3k, 3k+1, 3k+2)` and
/// each triple receives the 7 clauses forbidding every pattern except the
/// planted one. `seed` fixes the order in which clauses are listed.
pub fn gen_binomial(r: u32, planted: &Assignment, seed: u64) -> Result<SatInstance> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let n = 3 * r;
    if planted.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: planted.len() });
    }
    let mut clauses = Vec::with_capacity(7 * r as usize);
    for k in 0..r {
        let vars = [3 * k, 3 * k + 1, 3 * k + 2];
        let keep = vars.map(|v| planted.get(v));
        for code in 0u8..8 {
            let pattern = [code & 1 == 1, code & 2 == 2, code & 4 == 4];
            if pattern != keep {
                clauses.push(Clause::forbidding(vars, pattern)?);
            }
        }
    }
    let mut rng = InstanceRng::seed_from_u64(seed);
    for i in (1..clauses.len()).rev() {
        let j = rng.gen_range(0..=i as u32) as usize;
        clauses.swap(i, j);
    }
    Ok(SatInstance::new(n, clauses)?.with_metadata(Metadata {
        ensemble: Ensemble::Binomial,
        seed: Some(seed),
        rejections: None,
    }))
}

/// Binomial 3-SAT whose planted assignment is drawn from `seed` as well.
pub fn gen_binomial_seeded(r: u32, seed: u64) -> Result<SatInstance> {
    let n = r
        .checked_mul(3)
        .filter(|&n| (3..=63).contains(&n))
        .ok_or_else(|| Error::InvalidArgument(format!("r = {r} gives n outside 3..=63")))?;
    // a separate stream so the clause order does not depend on the planting
    let mut rng = InstanceRng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let planted = Assignment::random(n, &mut rng)?;
    gen_binomial(r, &planted, seed)
}
