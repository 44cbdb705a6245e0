use clap::ValueEnum;
use rayon::prelude::*;
use satgap::analytic::{gap_closed_form, moments};
use satgap::format::sig17;
use satgap::instances::{clause_count, gen_binomial_seeded, gen_random, gen_single_solution_with, Density};
use satgap::reduced::minimize_gap;
use satgap::spectrum::degeneracy_spectrum_with;
use satgap::{EnumerationConfig, HamiltonianParams, MomentSet, Result, SatInstance};

pub const HEADER: &str =
    "n,seed,d0,gamma,gm1,gm2,tmin,delta_numeric,delta_closed,f_numeric,f_closed,abs_diff,reference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanEnsemble {
    /// `n` must be a multiple of 3; other sizes in the range are skipped.
    Binomial,
    SingleSolution,
    Random,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub ensemble: ScanEnsemble,
    pub sizes: Vec<u32>,
    pub per_n: u64,
    pub seed: u64,
    pub alpha: Density,
    pub max_tries: u64,
    pub max_vars: u32,
    pub t_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: u32,
    pub seed: u64,
    pub d0: u64,
    pub moments: MomentSet,
    pub t_min: f64,
    pub delta_numeric: Option<f64>,
    pub delta_closed: f64,
    pub f_numeric: Option<f64>,
    pub f_closed: f64,
    pub reference: f64,
}

impl Row {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(sig17).unwrap_or_default();
        let diff = self.f_numeric.map(|f| (self.f_closed - f).abs());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.seed,
            self.d0,
            sig17(self.moments.gamma),
            sig17(self.moments.gm1),
            sig17(self.moments.gm2),
            sig17(self.t_min),
            opt(self.delta_numeric),
            sig17(self.delta_closed),
            opt(self.f_numeric),
            sig17(self.f_closed),
            opt(diff),
            sig17(self.reference),
        )
    }
}

/// One scan job's outcome plus any messages to log for it.
pub struct Outcome {
    pub row: Option<Row>,
    pub log: Vec<String>,
}

fn generate(config: &ScanConfig, n: u32, seed: u64, enumeration: &EnumerationConfig) -> Result<SatInstance> {
    match config.ensemble {
        ScanEnsemble::Binomial => gen_binomial_seeded(n / 3, seed),
        ScanEnsemble::SingleSolution => gen_single_solution_with(n, config.alpha, seed, config.max_tries, enumeration),
        ScanEnsemble::Random => gen_random(n, clause_count(n, config.alpha), seed),
    }
}

fn run_one(config: &ScanConfig, n: u32, seed: u64) -> Outcome {
    let mut log = Vec::new();
    let enumeration = EnumerationConfig { max_vars: config.max_vars, threads: None };
    let mut attempt = || -> Result<Row> {
        let instance = generate(config, n, seed, &enumeration)?;
        let spectrum = degeneracy_spectrum_with(&instance, &enumeration)?;
        let params = HamiltonianParams::for_spectrum(&spectrum)?;
        let mom: MomentSet = moments(&spectrum);
        let d0 = spectrum.d0();
        let closed = gap_closed_form(&mom, &params, d0)?;
        let dim = params.dim() as f64;
        let prefactor = f64::from(n) * (d0 as f64).sqrt() / (2.0 * dim.sqrt());
        let levels = spectrum.levels().count();
        let delta_numeric = if levels <= 10 * n as usize {
            match minimize_gap(&spectrum, &params, config.t_tol) {
                Ok(g) => Some(g.delta),
                Err(e) => {
                    log.push(format!("n={n} seed={seed}: numeric gap skipped: {e}"));
                    None
                }
            }
        } else {
            log.push(format!("n={n} seed={seed}: numeric gap skipped: {levels} levels exceed 10n"));
            None
        };
        Ok(Row {
            n,
            seed,
            d0,
            moments: mom,
            t_min: closed.gap.t_min,
            delta_numeric,
            delta_closed: closed.gap.delta,
            f_numeric: delta_numeric.map(|d| d / prefactor),
            f_closed: closed.f,
            reference: 1.0 / (2.0 * dim.sqrt()),
        })
    };
    let row = match attempt() {
        Ok(row) => Some(row),
        Err(e) => {
            log.push(format!("n={n} seed={seed}: skipped: {e}"));
            None
        }
    };
    Outcome { row, log }
}

/// Runs every `(n, seed)` job in parallel; outcomes come back sorted by
/// `(n, seed)` whatever the scheduling.
pub fn run(config: &ScanConfig) -> Vec<Outcome> {
    let jobs: Vec<(u32, u64)> = config
        .sizes
        .iter()
        .filter(|&&n| config.ensemble != ScanEnsemble::Binomial || n % 3 == 0)
        .flat_map(|&n| (0..config.per_n).map(move |k| (n, config.seed.wrapping_add(k))))
        .collect();
    let mut outcomes: Vec<((u32, u64), Outcome)> =
        jobs.into_par_iter().map(|(n, seed)| ((n, seed), run_one(config, n, seed))).collect();
    outcomes.sort_by_key(|(key, _)| *key);
    outcomes.into_iter().map(|(_, o)| o).collect()
}

pub fn to_csv(outcomes: &[Outcome]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in outcomes.iter().filter_map(|o| o.row.as_ref()) {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}
