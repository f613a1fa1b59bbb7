//! `pglcover`: field construction, witness certification, exact covering
//! radius search and distance sampling for PGL₂(q).
//!
//! Exit codes: 0 success, 1 a mathematical claim failed, 2 usage error,
//! 3 search stopped at its budget.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pglcover::cover::{self, SearchMode, SearchOptions, MAX_EXACT_Q};
use pglcover::gf::{prime_power, FieldTower, GfError, TowerSummary};
use pglcover::projline::{format_permutations, parse_permutations, Group, ProjError};
use pglcover::witness::{self, WitnessContext, WitnessError};
use pglcover::{distance_to_group, expected_cr, Exec};

/// Candidates searched by `cr` without `--long`.
const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(name = "pglcover", version, about = "Covering radius of PGL(2,q) on the projective line")]
struct Cli {
    /// Worker threads; 1 runs every kernel sequentially.
    #[arg(long, global = true, env = "PGLCOVER_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    /// Field order, a prime power.
    #[arg(long, conflicts_with_all = ["p", "f"])]
    q: Option<u64>,
    /// Characteristic; use together with --f.
    #[arg(long, requires = "f")]
    p: Option<u64>,
    /// Extension degree of GF(q) over GF(p).
    #[arg(long, requires = "p")]
    f: Option<u32>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summary of the field tower GF(p) ⊂ GF(q) ⊂ GF(q²).
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
        /// 0 for the canonical ρ, k ≥ 1 for the k-th element of order 2(q+1).
        #[arg(long, default_value_t = 0)]
        rho: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Order and enumeration checksum of PGL(2,q).
    GroupInfo {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the witness permutation and certify its distance to the group.
    Certify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        rho: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the witness permutation in the permutation file format.
    Witness {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        rho: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance to the group of every permutation in a file.
    Distance {
        #[command(flatten)]
        field: FieldArgs,
        /// Permutation file: one permutation per line, `inf` allowed for q.
        #[arg(long)]
        perm: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact covering radius by exhaustive search.
    Cr {
        #[command(flatten)]
        field: FieldArgs,
        /// Lift the candidate budget and checkpoint the search.
        #[arg(long)]
        long: bool,
        /// Candidate budget; the default applies only without --long.
        #[arg(long)]
        budget: Option<u64>,
        /// Checkpoint file (default with --long: pglcover-cr-q<q>.json).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Histogram of distances to the group over random permutations.
    Sample {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// RNG seed; generated and echoed on stderr when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug)]
enum Failure {
    /// A mathematical claim failed.
    Claim(String),
    Usage(String),
    Budget,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Claim(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Budget => 3,
        }
    }
}

impl From<GfError> for Failure {
    fn from(e: GfError) -> Self {
        match e {
            GfError::RhoCertification { .. } => Failure::Claim(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<ProjError> for Failure {
    fn from(e: ProjError) -> Self {
        match e {
            ProjError::Field(f) => f.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<WitnessError> for Failure {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::Field(f) => f.into(),
            WitnessError::Proj(p) => p.into(),
            e if e.is_check_failure() => Failure::Claim(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<cover::CoverError> for Failure {
    fn from(e: cover::CoverError) -> Self {
        match e {
            cover::CoverError::Proj(p) => p.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

impl FieldArgs {
    fn q(&self) -> Result<u64, Failure> {
        match (self.q, self.p, self.f) {
            (Some(q), None, None) => {
                prime_power(q).ok_or_else(|| Failure::Usage(format!("{q} is not a prime power")))?;
                Ok(q)
            }
            (None, Some(p), Some(f)) => {
                if prime_power(p).is_none_or(|(_, e)| e != 1) {
                    return Err(Failure::Usage(format!("{p} is not prime")));
                }
                p.checked_pow(f)
                    .filter(|&q| q <= 1 << 10)
                    .ok_or_else(|| Failure::Usage(format!("{p}^{f} is too large")))
            }
            _ => Err(Failure::Usage("give either --q or both --p and --f".into())),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn reject_csv(format: Format) -> Outcome {
    if format == Format::Csv {
        return Err(Failure::Usage("csv output is only available for `sample` and `distance`".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct FieldInfo {
    #[serde(flatten)]
    summary: TowerSummary,
    modulus_poly: String,
    rho_selector: usize,
    delta_size: Option<usize>,
    rho_candidates: Option<usize>,
}

fn field_info(field: &FieldArgs, rho_selector: usize, output: &OutputArgs) -> Outcome {
    let q = field.q()?;
    let (p, f) = prime_power(q).expect("validated");
    let tower = FieldTower::new(p, f)?;
    let mut summary = tower.summary();
    let mut delta_size = None;
    let mut rho_candidates = None;
    if p != 2 {
        let rho = tower.select_rho(rho_selector)?;
        summary.rho = Some(rho.0);
        delta_size = Some(witness::build_delta(&tower, rho)?.len());
        rho_candidates = Some(tower.rho_candidates()?.len());
    }
    let modulus_poly = format_modulus(tower.modulus());
    let info = FieldInfo { summary, modulus_poly, rho_selector, delta_size, rho_candidates };
    let format = output.format.unwrap_or(Format::Json);
    reject_csv(format)?;
    let text = match format {
        Format::Text => {
            let s = &info.summary;
            let mut t = format!(
                "GF({}) = GF({}^{}) inside GF({})\nmodulus over GF(p): {}\nprimitive: {}\n",
                s.q, s.p, s.f, s.field_size, info.modulus_poly, s.primitive
            );
            if let (Some(rho), Some(d)) = (s.rho, info.delta_size) {
                t.push_str(&format!("rho: {rho}\n|Delta|: {d}\n"));
            }
            t
        }
        _ => json(&info),
    };
    emit(&output.out, &text)
}

fn format_modulus(coeffs: &[u32]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| {
            let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            }
        })
        .collect();
    terms.join(" + ")
}

fn group_info(field: &FieldArgs, output: &OutputArgs) -> Outcome {
    let group = Group::for_q(field.q()?)?;
    let info = group.info();
    let format = output.format.unwrap_or(Format::Json);
    reject_csv(format)?;
    let text = match format {
        Format::Text => format!("q = {}, |G| = {}, checksum {}\n", info.q, info.order, info.checksum),
        _ => json(&info),
    };
    emit(&output.out, &text)
}

fn certify(field: &FieldArgs, rho: usize, output: &OutputArgs, exec: Exec) -> Outcome {
    let ctx = WitnessContext::for_q(field.q()?, rho)?;
    let report = witness::certify(&ctx, exec)?;
    let format = output.format.unwrap_or(Format::Json);
    reject_csv(format)?;
    let text = match format {
        Format::Text => format!(
            "q = {}\nrho = {}\nrho order 2(q+1): pass\nsigma and tau bijective: pass\ncubing bijective on Delta: pass\nmax coincidence: {} (bound {})\nwitness distance: {} (argmin {:?})\n{}\n",
            report.q,
            report.rho_index,
            report.max_coincidence,
            report.coincidence_bound,
            report.witness_distance,
            report.argmin_triple,
            report.conclusion
        ),
        _ => json(&report),
    };
    emit(&output.out, &text)
}

fn witness_file(field: &FieldArgs, rho: usize, out: &Option<PathBuf>) -> Outcome {
    let ctx = WitnessContext::for_q(field.q()?, rho)?;
    emit(out, &format_permutations([ctx.witness()]))
}

fn distance(field: &FieldArgs, perm: &PathBuf, output: &OutputArgs, exec: Exec) -> Outcome {
    let group = Group::for_q(field.q()?)?;
    let text = fs::read_to_string(perm)?;
    let perms = parse_permutations(&text, group.q())?;
    let results = perms
        .iter()
        .map(|v| distance_to_group(v, &group, exec).expect("parsed with matching degree"))
        .collect::<Vec<_>>();
    let format = output.format.unwrap_or(Format::Json);
    let text = match format {
        Format::Json => json(&results),
        Format::Csv => {
            let mut s = String::from("distance,agreements,argmin_index\n");
            for r in &results {
                s.push_str(&format!("{},{},{}\n", r.distance, r.agreements, r.argmin_index));
            }
            s
        }
        Format::Text => results.iter().map(|r| format!("{}\n", r.distance)).collect(),
    };
    emit(&output.out, &text)
}

fn cr(
    field: &FieldArgs,
    long: bool,
    budget: Option<u64>,
    checkpoint: &Option<PathBuf>,
    output: &OutputArgs,
    exec: Exec,
) -> Outcome {
    let q = field.q()?;
    if q > MAX_EXACT_Q as u64 {
        return Err(Failure::Usage(format!("exact search supports q <= {MAX_EXACT_Q}")));
    }
    let budget = match (budget, long) {
        (Some(b), _) => Some(b),
        (None, true) => None,
        (None, false) => Some(DEFAULT_BUDGET),
    };
    let checkpoint = match checkpoint {
        Some(p) => Some(p.clone()),
        None if long => Some(PathBuf::from(format!("pglcover-cr-q{q}.json"))),
        None => None,
    };
    let opts = SearchOptions { exec, budget, checkpoint, ..SearchOptions::default() };
    let report = cover::exact_covering_radius(q, &opts)?;
    let format = output.format.unwrap_or(Format::Json);
    reject_csv(format)?;
    let text = match format {
        Format::Text => format!(
            "q = {}\ncovering radius: {}{}\nexpected: {}\ncandidates: {} of {} ({} evaluated)\n",
            report.q,
            report.covering_radius,
            if report.mode == SearchMode::Partial { " (lower bound, budget reached)" } else { "" },
            report.expected,
            report.permutations_scanned,
            report.total_candidates,
            report.leaves_evaluated
        ),
        _ => json(&report),
    };
    emit(&output.out, &text)?;
    if report.mode == SearchMode::Partial {
        eprintln!("budget reached after {} candidates; rerun with --long for the exact value", report.permutations_scanned);
        return Err(Failure::Budget);
    }
    if !report.matches_expected {
        return Err(Failure::Claim(format!(
            "covering radius {} differs from the expected {}",
            report.covering_radius, report.expected
        )));
    }
    Ok(())
}

fn sample(field: &FieldArgs, trials: u64, seed: Option<u64>, output: &OutputArgs, exec: Exec) -> Outcome {
    let q = field.q()?;
    if trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let seed = seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    });
    let group = Group::for_q(q)?;
    let report = cover::sample_distances(&group, trials, seed, exec)?;
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(),
        Format::Json => json(&report),
        Format::Text => {
            let mut s = format!("q = {}, {} trials, seed {}\n", report.q, report.trials, report.seed);
            for (d, c) in &report.histogram {
                s.push_str(&format!("d = {d}: {c}\n"));
            }
            s
        }
    };
    emit(&output.out, &text)?;
    if report.violations > 0 {
        return Err(Failure::Claim(format!(
            "CRITICAL: {} sampled permutations exceed the expected covering radius {}",
            report.violations,
            expected_cr(q).expect("prime power")
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let threads = cli.threads.unwrap_or(0);
    if threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let exec = if threads == 1 { Exec::Sequential } else { Exec::Parallel };
    match &cli.command {
        Command::FieldInfo { field, rho, output } => field_info(field, *rho, output),
        Command::GroupInfo { field, output } => group_info(field, output),
        Command::Certify { field, rho, output } => certify(field, *rho, output, exec),
        Command::Witness { field, rho, out } => witness_file(field, *rho, out),
        Command::Distance { field, perm, output } => distance(field, perm, output, exec),
        Command::Cr { field, long, budget, checkpoint, output } => cr(field, *long, *budget, checkpoint, output, exec),
        Command::Sample { field, trials, seed, output } => sample(field, *trials, *seed, output, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Claim(msg) | Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Budget => {}
            }
            ExitCode::from(failure.code())
        }
    }
}
