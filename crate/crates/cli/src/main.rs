//! `satgap`: generate 3-SAT instances, compute their degeneracy spectra and
//! minimal adiabatic gaps, scan ensembles, and check the symmetric-sector
//! reduction against dense diagonalization.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 computation error.

mod io;
mod scan;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use satgap::analytic::{gap_closed_form, moments, parabolic_gap, GapRecord};
use satgap::instances::{
    emit_dimacs, gen_binomial, gen_binomial_seeded, gen_random, gen_single_solution_with, parse_density,
};
use satgap::oracle::{verify_decomposition_capped, DEFAULT_ORACLE_CAP};
use satgap::reduced::{minimize_gap, spectral_flow_csv};
use satgap::spectrum::degeneracy_spectrum_with;
use satgap::{Assignment, EnumerationConfig, Error, GapResult, HamiltonianParams, MomentSet, SatInstance};

use crate::io::{emit, read_instance, sidecar_path, write_atomic};
use crate::scan::{ScanConfig, ScanEnsemble};

#[derive(Parser, Debug)]
#[command(name = "satgap", version, about = "Minimal adiabatic gaps of 3-SAT instances")]
struct Cli {
    /// Worker threads for enumeration and scans (default: all cores).
    #[arg(long, global = true, env = "SATGAP_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance as DIMACS (with a `.meta` sidecar when written to a file).
    Generate {
        #[command(subcommand)]
        ensemble: GenerateCommand,
    },
    /// Print the degeneracy spectrum `j,d_j` as CSV.
    Spectrum(SpectrumArgs),
    /// Minimal gap by numeric minimization, parabolic fit and/or closed form.
    Gap(GapArgs),
    /// Lowest eigenvalues of the symmetric sector along a grid of times, as CSV.
    Flow(FlowArgs),
    /// Generate an ensemble over a range of sizes and tabulate gaps as CSV.
    Scan(ScanArgs),
    /// Check the decomposition of the full Hamiltonian by dense diagonalization.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum GenerateCommand {
    /// Binomial 3-SAT: 7 clauses on each of `r` disjoint triples.
    Binomial {
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Planted assignment as a 0/1 string, variable 1 first (default: drawn from the seed).
        #[arg(long)]
        planted: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Uniform random 3-SAT with `m` clauses drawn with replacement.
    Random {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random 3-SAT conditioned on exactly one satisfying assignment.
    SingleSolution {
        #[arg(long)]
        n: u32,
        /// Clause density as a decimal or a fraction, e.g. `4.5` or `9/2`.
        #[arg(long, default_value = "4.5")]
        alpha: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_tries: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// DIMACS CNF file.
    instance: PathBuf,
    /// Largest `n` accepted for exhaustive enumeration.
    #[arg(long, default_value_t = EnumerationConfig::default().max_vars)]
    max_vars: u32,
}

impl InstanceArgs {
    fn enumeration(&self) -> EnumerationConfig {
        EnumerationConfig { max_vars: self.max_vars, threads: None }
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Numeric,
    Parabolic,
    ClosedForm,
    All,
}

#[derive(Args, Debug)]
struct GapArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Bracket width at which the numeric minimizer stops.
    #[arg(long, default_value_t = 1e-10)]
    t_tol: f64,
    /// One JSON record per method instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Time grid `start:stop:count`, endpoints included.
    #[arg(long, default_value = "0.01:0.99:99")]
    grid: String,
    /// Number of lowest eigenvalues per row.
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long, value_enum)]
    ensemble: ScanEnsemble,
    #[arg(long)]
    n_min: u32,
    #[arg(long)]
    n_max: u32,
    #[arg(long, default_value_t = 1)]
    n_step: u32,
    /// Instances per size; instance `k` uses seed `seed + k`.
    #[arg(long, default_value_t = 1)]
    per_n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clause density for the random ensembles.
    #[arg(long, default_value = "4.5")]
    alpha: String,
    #[arg(long, default_value_t = 100_000)]
    max_tries: u64,
    /// Largest `n` accepted for exhaustive enumeration.
    #[arg(long, default_value_t = EnumerationConfig::default().max_vars)]
    max_vars: u32,
    #[arg(long, default_value_t = 1e-10)]
    t_tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// DIMACS CNF file.
    instance: PathBuf,
    /// Comma-separated interpolation times.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,0.75,0.9")]
    t: Vec<f64>,
    /// Absolute eigenvalue tolerance (at least 1e-12).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Largest `n` accepted for dense diagonalization.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    cap: u32,
    /// One JSON record per time instead of text.
    #[arg(long)]
    json: bool,
}

/// Failure classes that map onto the exit codes.
enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let compute = err.chain().any(|cause| {
            matches!(
                cause.downcast_ref::<Error>(),
                Some(
                    Error::Exhausted { .. }
                        | Error::EnumerationCap { .. }
                        | Error::OracleCap { .. }
                        | Error::TooManyEigenvalues { .. }
                        | Error::BracketFailure { .. }
                        | Error::NonConvergence(_)
                        | Error::NotUnimodal { .. }
                        | Error::Unsatisfiable
                        | Error::ParabolaInvalid(_)
                )
            )
        });
        if compute {
            Failure::Compute(err)
        } else {
            Failure::Usage(err)
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        anyhow::Error::new(err).into()
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate { ensemble } => cmd_generate(ensemble),
        Command::Spectrum(args) => cmd_spectrum(&args),
        Command::Gap(args) => cmd_gap(&args),
        Command::Flow(args) => cmd_flow(&args),
        Command::Scan(args) => cmd_scan(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_planted(text: &str) -> anyhow::Result<Assignment> {
    let bits = text
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => bail!("planted assignment contains `{other}`; expected 0 or 1"),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Assignment::from_bools(&bits)?)
}

fn write_instance(instance: &SatInstance, output: Option<&Path>) -> CmdResult {
    let text = emit_dimacs(instance)?;
    emit(output, &text)?;
    if let Some(path) = output {
        write_atomic(&sidecar_path(path), &instance.metadata.to_sidecar())?;
    }
    Ok(())
}

fn cmd_generate(ensemble: GenerateCommand) -> CmdResult {
    match ensemble {
        GenerateCommand::Binomial { r, seed, planted, output } => {
            let instance = match planted {
                Some(text) => gen_binomial(r, &parse_planted(&text)?, seed)?,
                None => gen_binomial_seeded(r, seed)?,
            };
            write_instance(&instance, output.as_deref())
        }
        GenerateCommand::Random { n, m, seed, output } => write_instance(&gen_random(n, m, seed)?, output.as_deref()),
        GenerateCommand::SingleSolution { n, alpha, seed, max_tries, output } => {
            let alpha = parse_density(&alpha)?;
            let instance = gen_single_solution_with(n, alpha, seed, max_tries, &EnumerationConfig::default())?;
            write_instance(&instance, output.as_deref())
        }
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> CmdResult {
    let instance = read_instance(&args.input.instance)?;
    let spectrum = degeneracy_spectrum_with(&instance, &args.input.enumeration())?;
    emit(args.output.as_deref(), &spectrum.to_csv())?;
    Ok(())
}

fn cmd_gap(args: &GapArgs) -> CmdResult {
    let instance = read_instance(&args.input.instance)?;
    instance.validate()?;
    let spectrum = degeneracy_spectrum_with(&instance, &args.input.enumeration())?;
    let params = HamiltonianParams::for_spectrum(&spectrum)?;
    let d0 = spectrum.d0();
    if d0 == 0 {
        return Err(Error::Unsatisfiable.into());
    }
    let mom: MomentSet = moments(&spectrum);
    let want = |m: MethodArg| args.method == m || args.method == MethodArg::All;

    let mut results: Vec<(GapResult, Option<f64>)> = Vec::new();
    if want(MethodArg::Numeric) {
        let g = minimize_gap(&spectrum, &params, args.t_tol).context("numeric minimization")?;
        results.push((g, None));
    }
    if want(MethodArg::Parabolic) {
        results.push((parabolic_gap(&mom, &params, d0)?, None));
    }
    if want(MethodArg::ClosedForm) {
        let cf = gap_closed_form(&mom, &params, d0)?;
        results.push((cf.gap, Some(cf.delta_exact_b)));
    }

    let mut out = String::new();
    if args.json {
        for (g, _) in &results {
            out.push_str(&GapRecord::new(&params, d0, &mom, g).to_json());
            out.push('\n');
        }
    } else {
        let _ = writeln!(
            out,
            "n={} m={} alpha={} d0={} levels={} gamma={} gm1={} gm2={}",
            params.n(),
            params.m(),
            params.alpha(),
            d0,
            spectrum.levels().count(),
            mom.gamma,
            mom.gm1,
            mom.gm2
        );
        for (g, exact_b) in &results {
            let rec = GapRecord::new(&params, d0, &mom, g);
            let _ = write!(
                out,
                "{:<14} t_min={} delta={} f={} E0={} E1={}",
                rec.method, rec.tmin, rec.delta, rec.f, rec.e0, rec.e1
            );
            if let Some(d) = exact_b {
                let _ = write!(out, " delta_exact_b={d}");
            }
            out.push('\n');
        }
    }
    emit(None, &out)?;
    Ok(())
}

fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        bail!("grid `{spec}` is not start:stop:count");
    };
    let start: f64 = start.trim().parse().context("grid start")?;
    let stop: f64 = stop.trim().parse().context("grid stop")?;
    let count: usize = count.trim().parse().context("grid count")?;
    Ok(match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
    })
}

fn cmd_flow(args: &FlowArgs) -> CmdResult {
    let times = parse_grid(&args.grid)?;
    let instance = read_instance(&args.input.instance)?;
    instance.validate()?;
    let spectrum = degeneracy_spectrum_with(&instance, &args.input.enumeration())?;
    let params = HamiltonianParams::for_spectrum(&spectrum)?;
    let csv = spectral_flow_csv(&spectrum, &params, &times, args.levels)?;
    emit(args.output.as_deref(), &csv)?;
    Ok(())
}

fn cmd_scan(args: &ScanArgs) -> CmdResult {
    if args.n_step == 0 {
        return Err(Failure::Usage(anyhow::anyhow!("--n-step must be positive")));
    }
    let config = ScanConfig {
        ensemble: args.ensemble,
        sizes: (args.n_min..=args.n_max).step_by(args.n_step as usize).collect(),
        per_n: args.per_n,
        seed: args.seed,
        alpha: parse_density(&args.alpha)?,
        max_tries: args.max_tries,
        max_vars: args.max_vars,
        t_tol: args.t_tol,
    };
    let outcomes = scan::run(&config);
    for line in outcomes.iter().flat_map(|o| &o.log) {
        eprintln!("{line}");
    }
    emit(args.output.as_deref(), &scan::to_csv(&outcomes))?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let instance = read_instance(&args.instance)?;
    instance.validate()?;
    let params = HamiltonianParams::new(instance.n(), instance.m())?;
    let mut out = String::new();
    let mut failed = 0;
    for &t in &args.t {
        let report = verify_decomposition_capped(&instance, &params, t, args.tol, args.cap)?;
        if !report.pass() {
            failed += 1;
        }
        if args.json {
            out.push_str(&report.to_record());
        } else {
            out.push_str(&report.to_string());
        }
        out.push('\n');
    }
    emit(None, &out)?;
    if failed > 0 {
        return Err(Failure::Compute(anyhow::anyhow!(
            "decomposition check failed at {failed} of {} times",
            args.t.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.2:0.8:1").unwrap(), vec![0.2]);
        assert!(parse_grid("0.2:0.8:0").unwrap().is_empty());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }

    #[test]
    fn planted_parsing() {
        let a = parse_planted("100").unwrap();
        assert!(a.get(0) && !a.get(1) && !a.get(2));
        assert!(parse_planted("10x").is_err());
    }

    #[test]
    fn failure_classes() {
        assert!(matches!(Failure::from(Error::Unsatisfiable), Failure::Compute(_)));
        assert!(matches!(Failure::from(Error::OracleCap { n: 20, cap: 13 }), Failure::Compute(_)));
        assert!(matches!(Failure::from(Error::InvalidArgument("x".into())), Failure::Usage(_)));
        let wrapped = anyhow::Error::new(Error::Exhausted { tries: 3 }).context("generating");
        assert!(matches!(Failure::from(wrapped), Failure::Compute(_)));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
