//! Command-line front end: argument model, validation, dispatch.
//!
//! Exit codes: 0 success, 1 computational failure (with partial results
//! flagged), 2 usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cache::CacheDir;
use crate::char_group::{CharIndex, CharacterGroup, Parity};
use crate::error::{Error, Result};
use crate::gcd_energy::{self, EnergyBudgets};
use crate::highprec::DEFAULT_LADDER;
use crate::mollifier::{self, MollifierSpec};
use crate::primes::{is_prime, primes_in_range};
use crate::report::{emit_plot_data, CsvTable, ResultEnvelope};
use crate::sieve::{self, IntegerSet, SetFamily};
use crate::theta;
use crate::verify;

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(
    name = "thml",
    version,
    about = "Theta functions of Dirichlet characters: mollified moments, non-vanishing censuses, GCD sums and multiplicative energy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the result envelope (or CSV table) here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Also emit a whitespace-delimited plot file for table payloads.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,

    /// Working mantissa width; >53 adds a high-precision rung to the ladder.
    #[arg(long, global = true, default_value_t = 53)]
    pub precision_bits: u32,

    /// Worker threads (default: all cores). Integer outputs are identical
    /// for any thread count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Cache directory for dlog tables and theta batches
    /// (overrides THML_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityArg {
    Even,
    Odd,
    Both,
}

impl ParityArg {
    fn singles(self) -> Vec<Parity> {
        match self {
            ParityArg::Even => vec![Parity::Even],
            ParityArg::Odd => vec![Parity::Odd],
            ParityArg::Both => vec![Parity::Even, Parity::Odd],
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ParityArg::Even => "even",
            ParityArg::Odd => "odd",
            ParityArg::Both => "both",
        }
    }
}

/// Sieve parameter: `auto` means exp(sqrt(log p)) (or log N for sets).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YFlag {
    Auto,
    Fixed(f64),
}

impl FromStr for YFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(YFlag::Auto)
        } else {
            s.parse::<f64>()
                .map(YFlag::Fixed)
                .map_err(|e| format!("--y expects 'auto' or a real: {e}"))
        }
    }
}

impl std::fmt::Display for YFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            YFlag::Auto => write!(f, "auto"),
            YFlag::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Inclusive prime range `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeArg {
    pub lo: u64,
    pub hi: u64,
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
        let lo = a.parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi = b.parse().map_err(|e| format!("bad upper bound: {e}"))?;
        if lo > hi {
            return Err(format!("empty range {lo}:{hi}"));
        }
        Ok(RangeArg { lo, hi })
    }
}

impl std::fmt::Display for RangeArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyArg {
    All,
    Primes,
    Rough,
    Custom,
}

impl FamilyArg {
    fn as_str(self) -> &'static str {
        match self {
            FamilyArg::All => "all",
            FamilyArg::Primes => "primes",
            FamilyArg::Rough => "rough",
            FamilyArg::Custom => "custom",
        }
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Theta values for one character or a whole parity class.
    Theta(ThetaArgs),
    /// Non-vanishing census with mollified moments and the CS lower bound.
    Census(CensusArgs),
    /// Census trend over a prime range, normalized by p / sqrt(log p).
    Scan(ScanArgs),
    /// GCD sum S(B) and ratio R(B) for a set family.
    Gcdsum(GcdsumArgs),
    /// Multiplicative energies, singly or as a family frontier table.
    Energy(EnergyArgs),
    /// Count quadruples m1 n1 = m2 n2 under a sphere bound, or fit the
    /// leading coefficient.
    Quadruples(QuadruplesArgs),
    /// Rough-number sieve utilities: Phi counts, Mertens products,
    /// harmonic sums, Brun ratios, set export.
    Sieve(SieveArgs),
    /// Run the cross-module property suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct ThetaArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    pub parity: ParityArg,
    /// Single character index: adds root number and functional-equation
    /// residual to the payload.
    #[arg(long)]
    pub j: Option<u64>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct CensusArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    pub parity: ParityArg,
    /// Mollifier sieve parameter; auto = exp(sqrt(log p)).
    #[arg(long, default_value = "auto")]
    pub y: YFlag,
    /// Also measure mean |partial character sums| at these cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub cancellation_grid: Option<Vec<u64>>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct ScanArgs {
    /// Prime range lo:hi (inclusive).
    #[arg(long)]
    pub p_range: RangeArg,
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    pub parity: ParityArg,
    #[arg(long, default_value = "auto")]
    pub y: YFlag,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct GcdsumArgs {
    /// Upper bound N of the ground interval [1, N].
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = FamilyArg::Rough)]
    pub set_family: FamilyArg,
    /// Roughness parameter for --set-family rough; auto = exp(sqrt(log N)).
    #[arg(long, default_value = "auto")]
    pub y: YFlag,
    /// Element file for --set-family custom (newline-delimited decimals).
    #[arg(long)]
    pub set_path: Option<PathBuf>,
    /// Force the quadratic brute-force path (oracle).
    #[arg(long)]
    pub naive: bool,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct EnergyArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = FamilyArg::Rough)]
    pub set_family: FamilyArg,
    #[arg(long, default_value = "auto")]
    pub y: YFlag,
    #[arg(long)]
    pub set_path: Option<PathBuf>,
    /// Compare families (all, primes, rough over the y grid) instead of
    /// reporting one set.
    #[arg(long)]
    pub frontier: bool,
    /// y grid for the frontier table.
    #[arg(long, value_delimiter = ',')]
    pub y_grid: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct QuadruplesArgs {
    /// Sphere bound x in m1^2 + n1^2 + m2^2 + n2^2 <= x.
    #[arg(long, default_value_t = 1e4)]
    pub x: f64,
    /// Fit count(x) = a x ln x + b x over these sample bounds.
    #[arg(long, value_delimiter = ',')]
    pub fit: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SieveArgs {
    /// Phi(N, y): count of y-rough numbers up to N.
    #[arg(long, num_args = 2, value_names = ["N", "Y"])]
    pub phi: Option<Vec<f64>>,
    /// Materialize the y-rough numbers up to N (use --output to export).
    #[arg(long, num_args = 2, value_names = ["N", "Y"])]
    pub rough: Option<Vec<f64>>,
    /// Mertens product over primes <= y.
    #[arg(long)]
    pub mertens: Option<f64>,
    /// Sum of 1/n over the y-rough numbers up to N.
    #[arg(long, num_args = 2, value_names = ["N", "Y"])]
    pub harmonic: Option<Vec<f64>>,
    /// Brun ratio scan Phi(N, y) zeta(1, y) / N at this N.
    #[arg(long)]
    pub brun: Option<u64>,
    /// y grid for --brun.
    #[arg(long, value_delimiter = ',')]
    pub y_grid: Option<Vec<f64>>,
    /// Validate a custom set file against the set invariants.
    #[arg(long)]
    pub check: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct VerifyArgs {
    /// Smaller instance sizes.
    #[arg(long)]
    pub quick: bool,
}

/// Usage-level failure: maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

impl Cli {
    /// Render back to an argv vector; parse_args(render(c)) == c.
    pub fn to_argv(&self) -> Vec<String> {
        let mut v = vec!["thml".to_string()];
        match &self.command {
            Command::Theta(a) => {
                v.push("theta".into());
                v.push("--p".into());
                v.push(a.p.to_string());
                v.push("--x".into());
                v.push(a.x.to_string());
                v.push("--parity".into());
                v.push(a.parity.as_str().into());
                if let Some(j) = a.j {
                    v.push("--j".into());
                    v.push(j.to_string());
                }
            }
            Command::Census(a) => {
                v.push("census".into());
                v.push("--p".into());
                v.push(a.p.to_string());
                v.push("--x".into());
                v.push(a.x.to_string());
                v.push("--parity".into());
                v.push(a.parity.as_str().into());
                v.push("--y".into());
                v.push(a.y.to_string());
                if let Some(grid) = &a.cancellation_grid {
                    v.push("--cancellation-grid".into());
                    v.push(
                        grid.iter()
                            .map(u64::to_string)
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                }
            }
            Command::Scan(a) => {
                v.push("scan".into());
                v.push("--p-range".into());
                v.push(a.p_range.to_string());
                v.push("--x".into());
                v.push(a.x.to_string());
                v.push("--parity".into());
                v.push(a.parity.as_str().into());
                v.push("--y".into());
                v.push(a.y.to_string());
            }
            Command::Gcdsum(a) => {
                v.push("gcdsum".into());
                v.push("--n".into());
                v.push(a.n.to_string());
                v.push("--set-family".into());
                v.push(a.set_family.as_str().into());
                v.push("--y".into());
                v.push(a.y.to_string());
                if let Some(p) = &a.set_path {
                    v.push("--set-path".into());
                    v.push(p.display().to_string());
                }
                if a.naive {
                    v.push("--naive".into());
                }
            }
            Command::Energy(a) => {
                v.push("energy".into());
                v.push("--n".into());
                v.push(a.n.to_string());
                v.push("--set-family".into());
                v.push(a.set_family.as_str().into());
                v.push("--y".into());
                v.push(a.y.to_string());
                if let Some(p) = &a.set_path {
                    v.push("--set-path".into());
                    v.push(p.display().to_string());
                }
                if a.frontier {
                    v.push("--frontier".into());
                }
                if let Some(grid) = &a.y_grid {
                    v.push("--y-grid".into());
                    v.push(
                        grid.iter()
                            .map(f64::to_string)
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                }
            }
            Command::Quadruples(a) => {
                v.push("quadruples".into());
                v.push("--x".into());
                v.push(a.x.to_string());
                if let Some(fit) = &a.fit {
                    v.push("--fit".into());
                    v.push(fit.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
                }
            }
            Command::Sieve(a) => {
                v.push("sieve".into());
                if let Some(vals) = &a.phi {
                    v.push("--phi".into());
                    v.push(vals[0].to_string());
                    v.push(vals[1].to_string());
                }
                if let Some(vals) = &a.rough {
                    v.push("--rough".into());
                    v.push(vals[0].to_string());
                    v.push(vals[1].to_string());
                }
                if let Some(y) = a.mertens {
                    v.push("--mertens".into());
                    v.push(y.to_string());
                }
                if let Some(vals) = &a.harmonic {
                    v.push("--harmonic".into());
                    v.push(vals[0].to_string());
                    v.push(vals[1].to_string());
                }
                if let Some(n) = a.brun {
                    v.push("--brun".into());
                    v.push(n.to_string());
                }
                if let Some(grid) = &a.y_grid {
                    v.push("--y-grid".into());
                    v.push(
                        grid.iter()
                            .map(f64::to_string)
                            .collect::<Vec<_>>()
                            .join(","),
                    );
                }
                if let Some(p) = &a.check {
                    v.push("--check".into());
                    v.push(p.display().to_string());
                }
            }
            Command::Verify(a) => {
                v.push("verify".into());
                if a.quick {
                    v.push("--quick".into());
                }
            }
        }
        if let Some(p) = &self.output {
            v.push("--output".into());
            v.push(p.display().to_string());
        }
        v.push("--format".into());
        v.push(match self.format {
            OutputFormat::Json => "json".into(),
            OutputFormat::Csv => "csv".into(),
        });
        if let Some(p) = &self.plot {
            v.push("--plot".into());
            v.push(p.display().to_string());
        }
        v.push("--precision-bits".into());
        v.push(self.precision_bits.to_string());
        if let Some(t) = self.threads {
            v.push("--threads".into());
            v.push(t.to_string());
        }
        if let Some(p) = &self.cache_dir {
            v.push("--cache-dir".into());
            v.push(p.display().to_string());
        }
        v
    }

    /// Semantic validation beyond clap's parsing; failures exit with code 2.
    pub fn validate(&self) -> std::result::Result<(), UsageError> {
        if !(2..=900).contains(&self.precision_bits) {
            return Err(UsageError(format!(
                "--precision-bits {} outside 2..=900",
                self.precision_bits
            )));
        }
        if self.threads == Some(0) {
            return Err(UsageError("--threads must be positive".into()));
        }
        let need_prime = |p: u64| -> std::result::Result<(), UsageError> {
            if !is_prime(p) || p < 3 {
                Err(UsageError(format!("--p {p}: not an odd prime")))
            } else {
                Ok(())
            }
        };
        let need_positive_x = |x: f64| -> std::result::Result<(), UsageError> {
            if !(x > 0.0) || !x.is_finite() {
                Err(UsageError(format!("--x {x}: must be positive and finite")))
            } else {
                Ok(())
            }
        };
        let check_family = |family: FamilyArg,
                            set_path: &Option<PathBuf>|
         -> std::result::Result<(), UsageError> {
            match (family, set_path) {
                (FamilyArg::Custom, None) => {
                    Err(UsageError("--set-family custom requires --set-path".into()))
                }
                (FamilyArg::Custom, Some(_)) => Ok(()),
                (_, Some(_)) => Err(UsageError(
                    "--set-path only applies to --set-family custom".into(),
                )),
                _ => Ok(()),
            }
        };
        match &self.command {
            Command::Theta(a) => {
                need_prime(a.p)?;
                need_positive_x(a.x)?;
                if a.j.is_some() && a.parity == ParityArg::Both {
                    return Err(UsageError("--j needs a single --parity".into()));
                }
                if let Some(j) = a.j {
                    if j >= a.p - 1 {
                        return Err(UsageError(format!("--j {j} out of [0, {})", a.p - 1)));
                    }
                }
            }
            Command::Census(a) => {
                need_prime(a.p)?;
                need_positive_x(a.x)?;
                if let YFlag::Fixed(y) = a.y {
                    if y < 1.0 {
                        return Err(UsageError(format!("--y {y}: need y >= 1")));
                    }
                }
                if let Some(grid) = &a.cancellation_grid {
                    if grid.iter().any(|&n| n == 0 || n > a.p) {
                        return Err(UsageError(
                            "--cancellation-grid entries must lie in [1, p]".into(),
                        ));
                    }
                }
            }
            Command::Scan(a) => {
                need_positive_x(a.x)?;
                if a.p_range.hi - a.p_range.lo > 10_000_000 {
                    return Err(UsageError("--p-range wider than 1e7".into()));
                }
            }
            Command::Gcdsum(a) => {
                if a.n == 0 {
                    return Err(UsageError("--n must be >= 1".into()));
                }
                check_family(a.set_family, &a.set_path)?;
            }
            Command::Energy(a) => {
                if a.n == 0 {
                    return Err(UsageError("--n must be >= 1".into()));
                }
                if a.frontier {
                    if a.set_family != FamilyArg::Rough || a.set_path.is_some() {
                        return Err(UsageError(
                            "--frontier scans built-in families; drop --set-family/--set-path"
                                .into(),
                        ));
                    }
                } else {
                    check_family(a.set_family, &a.set_path)?;
                    if a.y_grid.is_some() {
                        return Err(UsageError("--y-grid requires --frontier".into()));
                    }
                }
            }
            Command::Quadruples(a) => {
                if a.x < 4.0 {
                    return Err(UsageError(format!("--x {}: need x >= 4", a.x)));
                }
                if let Some(fit) = &a.fit {
                    if fit.len() < 2 {
                        return Err(UsageError("--fit needs at least two sample points".into()));
                    }
                    if fit.iter().any(|&x| x < 4.0) {
                        return Err(UsageError("--fit samples must be >= 4".into()));
                    }
                }
            }
            Command::Sieve(a) => {
                let actions = [
                    a.phi.is_some(),
                    a.rough.is_some(),
                    a.mertens.is_some(),
                    a.harmonic.is_some(),
                    a.brun.is_some(),
                    a.check.is_some(),
                ];
                let chosen = actions.iter().filter(|&&b| b).count();
                if chosen != 1 {
                    return Err(UsageError(
                        "sieve needs exactly one of --phi/--rough/--mertens/--harmonic/--brun/--check"
                            .into(),
                    ));
                }
                if a.y_grid.is_some() && a.brun.is_none() {
                    return Err(UsageError("--y-grid requires --brun".into()));
                }
                for pair in [&a.phi, &a.rough, &a.harmonic].into_iter().flatten() {
                    if pair[0] < 1.0 || pair[0].fract() != 0.0 {
                        return Err(UsageError(format!(
                            "N = {} must be a positive integer",
                            pair[0]
                        )));
                    }
                }
            }
            Command::Verify(_) => {}
        }
        Ok(())
    }
}

/// Plot payload: comment line, column names, numeric rows.
pub type PlotData = (String, Vec<&'static str>, Vec<Vec<f64>>);

/// Everything a command execution produces.
pub struct CommandOutput {
    pub payload: serde_json::Value,
    pub csv: String,
    pub summary: String,
    pub plot: Option<PlotData>,
    /// Partial results (e.g. undecided after the full ladder): exit 1.
    pub compute_failed: bool,
}

fn ladder_for(precision_bits: u32) -> Vec<u32> {
    if precision_bits <= 53 {
        DEFAULT_LADDER.to_vec()
    } else {
        vec![53, precision_bits]
    }
}

fn load_group(p: u64, cache: &Option<CacheDir>) -> Result<CharacterGroup> {
    match cache {
        Some(dir) => dir.load_or_build_group(p),
        None => CharacterGroup::build(p),
    }
}

fn build_set(
    n: u64,
    family: FamilyArg,
    y: YFlag,
    set_path: &Option<PathBuf>,
) -> Result<IntegerSet> {
    match family {
        FamilyArg::All => Ok(IntegerSet::all(n)),
        FamilyArg::Primes => Ok(IntegerSet::primes(n)),
        FamilyArg::Rough => {
            let y_eff = match y {
                YFlag::Auto => (n as f64).ln().sqrt().exp(),
                YFlag::Fixed(v) => v,
            };
            Ok(sieve::rough_set(n, y_eff))
        }
        FamilyArg::Custom => {
            let path = set_path.as_ref().expect("validated");
            IntegerSet::read_elements_file(path, Some(n))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<CommandOutput> {
    let cache = CacheDir::resolve(cli.cache_dir.clone())?;
    let ladder = ladder_for(cli.precision_bits);
    match &cli.command {
        Command::Theta(a) => run_theta(a, &cache),
        Command::Census(a) => run_census(a, &cache, &ladder),
        Command::Scan(a) => run_scan(a, &ladder),
        Command::Gcdsum(a) => run_gcdsum(a),
        Command::Energy(a) => run_energy(a),
        Command::Quadruples(a) => run_quadruples(a),
        Command::Sieve(a) => run_sieve(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn theta_batch_cached(
    group: &CharacterGroup,
    x: f64,
    parity: Parity,
    cache: &Option<CacheDir>,
) -> Result<Vec<theta::ThetaValue>> {
    if let Some(dir) = cache {
        if let Some(batch) = dir.load_theta_batch(group.p(), x, parity, 53) {
            return Ok(batch);
        }
        let batch = theta::theta_all(group, x, parity)?;
        dir.store_theta_batch(group.p(), x, parity, 53, &batch)?;
        return Ok(batch);
    }
    theta::theta_all(group, x, parity)
}

fn run_theta(a: &ThetaArgs, cache: &Option<CacheDir>) -> Result<CommandOutput> {
    let group = load_group(a.p, cache)?;
    if let Some(j) = a.j {
        let parity = a.parity.singles()[0];
        let tv = theta::theta_direct(&group, CharIndex(j), a.x, parity)?;
        let decision = theta::is_nonzero(&tv);
        let mut payload = serde_json::to_value(&tv)?;
        let obj = payload.as_object_mut().unwrap();
        obj.insert("decision".into(), serde_json::to_value(decision)?);
        if j != 0 {
            let rn = theta::root_number(&group, CharIndex(j))?;
            obj.insert("root_number".into(), serde_json::to_value(&rn)?);
            let fe = theta::functional_equation_residual(&group, CharIndex(j), a.x)?;
            obj.insert("functional_equation".into(), serde_json::to_value(fe)?);
        }
        let summary = format!(
            "theta(x={}, chi_{j} mod {}) = {} + {}i  (|.|={:.6e}, radius={:.2e}, {decision:?})",
            a.x,
            a.p,
            tv.value.re,
            tv.value.im,
            tv.value.norm(),
            tv.error_radius
        );
        return Ok(CommandOutput {
            payload,
            csv: vec![tv].to_csv(),
            summary,
            plot: None,
            compute_failed: false,
        });
    }

    let mut batches = Vec::new();
    for parity in a.parity.singles() {
        batches.extend(theta_batch_cached(&group, a.x, parity, cache)?);
    }
    let undecided = batches
        .iter()
        .filter(|t| theta::is_nonzero(t) == theta::Decision::Undecided)
        .count();
    let plot_rows: Vec<Vec<f64>> = batches
        .iter()
        .map(|t| vec![t.j.0 as f64, t.value.norm(), t.error_radius])
        .collect();
    let summary = format!(
        "p={} x={} parity={}: {} theta values, {} undecided at f64",
        a.p,
        a.x,
        a.parity.as_str(),
        batches.len(),
        undecided
    );
    Ok(CommandOutput {
        payload: serde_json::to_value(&batches)?,
        csv: batches.to_csv(),
        summary,
        plot: Some((
            format!("|theta(x={}, chi_j)| over j, p={}", a.x, a.p),
            vec!["j", "abs_theta", "error_radius"],
            plot_rows,
        )),
        compute_failed: false,
    })
}

fn run_census(a: &CensusArgs, cache: &Option<CacheDir>, ladder: &[u32]) -> Result<CommandOutput> {
    let group = load_group(a.p, cache)?;
    let y = match a.y {
        YFlag::Auto => None,
        YFlag::Fixed(v) => Some(v),
    };
    let mut reports = Vec::new();
    for parity in a.parity.singles() {
        let spec = MollifierSpec::build(a.p, y, parity)?;
        reports.push(mollifier::nonvanishing_census(
            &group,
            a.x,
            parity,
            Some(&spec),
            ladder,
        )?);
    }
    let cancellation = match &a.cancellation_grid {
        Some(grid) => Some(mollifier::first_moment_cancellation(&group, grid)?),
        None => None,
    };
    let undecided: u64 = reports.iter().map(|r| r.undecided).sum();
    let summary = reports
        .iter()
        .map(|r| {
            format!(
                "p={} x={} {}: nonvanishing={}/{} undecided={} cs_lower_bound={:.4}",
                r.p,
                r.x,
                r.parity,
                r.nonvanishing,
                (r.p - 1) / 2,
                r.undecided,
                r.cs_lower_bound
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let csv = reports
        .iter()
        .flat_map(|r| r.csv_rows())
        .collect::<Vec<_>>()
        .join("\n");
    let mut payload = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        serde_json::to_value(&reports)?
    };
    if let Some(rows) = cancellation {
        if let Some(obj) = payload.as_object_mut() {
            obj.insert(
                "first_moment_cancellation".into(),
                serde_json::to_value(rows)?,
            );
        }
    }
    Ok(CommandOutput {
        payload,
        csv: format!("{}\n{}", mollifier::MomentReport::csv_header(), csv),
        summary,
        plot: None,
        compute_failed: undecided > 0,
    })
}

fn run_scan(a: &ScanArgs, ladder: &[u32]) -> Result<CommandOutput> {
    let primes: Vec<u64> = primes_in_range(a.p_range.lo.max(3), a.p_range.hi);
    if primes.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no odd primes in {}",
            a.p_range
        )));
    }
    let y = match a.y {
        YFlag::Auto => None,
        YFlag::Fixed(v) => Some(v),
    };
    let mut rows = Vec::new();
    for parity in a.parity.singles() {
        rows.extend(mollifier::census_scan(&primes, a.x, parity, y, ladder)?);
    }
    let undecided: u64 = rows.iter().map(|r| r.undecided).sum();
    let min_norm = rows
        .iter()
        .map(|r| r.normalized)
        .fold(f64::INFINITY, f64::min);
    let plot_rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.p as f64, r.count as f64, r.cs_lower_bound, r.normalized])
        .collect();
    let summary = format!(
        "{} primes in {}: min count*sqrt(log p)/p = {:.4}, undecided = {}",
        primes.len(),
        a.p_range,
        min_norm,
        undecided
    );
    Ok(CommandOutput {
        payload: serde_json::to_value(&rows)?,
        csv: rows.to_csv(),
        summary,
        plot: Some((
            format!("census scan x={} parity={}", a.x, a.parity.as_str()),
            vec!["p", "count", "cs_lower_bound", "count_sqrt_log_p_over_p"],
            plot_rows,
        )),
        compute_failed: undecided > 0,
    })
}

fn run_gcdsum(a: &GcdsumArgs) -> Result<CommandOutput> {
    let set = build_set(a.n, a.set_family, a.y, &a.set_path)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let s = if a.naive {
        gcd_energy::gcd_sum_naive(&set)?
    } else {
        gcd_energy::gcd_sum(&set)?
    };
    let size = set.len() as u64;
    let r = a.n as f64 * (size as f64).powi(2) / s;
    let sigma = gcd_energy::sigma_minus_one_sum(&set);
    let payload = json!({
        "set": set.family().to_string(),
        "n_max": a.n,
        "size": size,
        "density": set.density(),
        "s": s,
        "r": r,
        "r_over_n_squared": r / (a.n as f64 * a.n as f64),
        "sigma_minus_one_sum": sigma,
        "path": if a.naive { "naive" } else { "auto" },
    });
    let summary = format!(
        "S({}) over [1,{}]: |B|={} S={:.6e} R={:.6e} R/N^2={:.4}",
        set.family(),
        a.n,
        size,
        s,
        r,
        r / (a.n as f64 * a.n as f64)
    );
    let csv = format!(
        "set,n_max,size,density,s,r,sigma_minus_one_sum\n{},{},{},{},{},{},{}",
        set.family(),
        a.n,
        size,
        crate::report::fmt_real(set.density()),
        crate::report::fmt_real(s),
        crate::report::fmt_real(r),
        crate::report::fmt_real(sigma),
    );
    Ok(CommandOutput {
        payload,
        csv,
        summary,
        plot: None,
        compute_failed: false,
    })
}

fn run_energy(a: &EnergyArgs) -> Result<CommandOutput> {
    if a.frontier {
        let y_auto = (a.n as f64).ln().sqrt().exp();
        let grid = a
            .y_grid
            .clone()
            .unwrap_or_else(|| vec![2.0, 10.0, 100.0, y_auto]);
        let mut families = vec![SetFamily::All, SetFamily::Primes];
        families.extend(grid.iter().map(|&y| SetFamily::Rough { y }));
        let rows = gcd_energy::energy_frontier_scan(a.n, &families)?;
        let plot_rows: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i as f64, r.density, r.e_cross_norm, r.r_norm])
            .collect();
        let labels: Vec<String> = rows.iter().map(|r| r.label.clone()).collect();
        let summary = rows
            .iter()
            .map(|r| {
                format!(
                    "{:>16}: |B|={:>8} alpha={:.4} E/(N|B|)={:>9.4} S/|B|={:>9.4} R/N^2={:.4}",
                    r.label, r.size, r.density, r.e_cross_norm, r.s_per_element, r.r_norm
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(CommandOutput {
            payload: serde_json::to_value(&rows)?,
            csv: rows.to_csv(),
            summary,
            plot: Some((
                format!(
                    "energy frontier at N={}; families: {}",
                    a.n,
                    labels.join(", ")
                ),
                vec![
                    "index",
                    "density",
                    "e_cross_over_n_size",
                    "r_over_n_squared",
                ],
                plot_rows,
            )),
            compute_failed: false,
        });
    }
    let set = build_set(a.n, a.set_family, a.y, &a.set_path)?;
    let report = gcd_energy::energy_report(&set, EnergyBudgets::default())?;
    let summary = format!(
        "E({}, N={}): |B|={} E_cross={} E_cross/(N|B|)={:.4} E_self={} R/N^2={:.4}",
        report.set,
        a.n,
        report.size,
        report.e_cross,
        report.e_cross as f64 / (a.n as f64 * report.size as f64),
        report
            .e_self
            .map_or_else(|| "over-budget".into(), |v| v.to_string()),
        report.r / (a.n as f64 * a.n as f64),
    );
    Ok(CommandOutput {
        payload: serde_json::to_value(&report)?,
        csv: report.to_csv(),
        summary,
        plot: None,
        compute_failed: false,
    })
}

fn run_quadruples(a: &QuadruplesArgs) -> Result<CommandOutput> {
    if let Some(fit_xs) = &a.fit {
        let fit = gcd_energy::quadruple_fit(fit_xs);
        let summary = format!(
            "fit count(x) = a x ln x + b x over {:?}: a = {:.5} (target 3/8 = 0.375), b = {:.5}",
            fit_xs, fit.a, fit.b
        );
        let plot_rows: Vec<Vec<f64>> = fit
            .samples
            .iter()
            .map(|&(x, c)| vec![x, c as f64, fit.a * x * x.ln() + fit.b * x])
            .collect();
        return Ok(CommandOutput {
            payload: serde_json::to_value(&fit)?,
            csv: fit.to_csv(),
            summary,
            plot: Some((
                "quadruple counts and fitted a x ln x + b x".into(),
                vec!["x", "count", "fitted"],
                plot_rows,
            )),
            compute_failed: false,
        });
    }
    let count = gcd_energy::quadruple_count(a.x);
    Ok(CommandOutput {
        payload: json!({"x": a.x, "count": count}),
        csv: format!("x,count\n{},{count}", crate::report::fmt_real(a.x)),
        summary: format!("{count}"),
        plot: None,
        compute_failed: false,
    })
}

fn run_sieve(a: &SieveArgs) -> Result<CommandOutput> {
    if let Some(vals) = &a.phi {
        let (n, y) = (vals[0] as u64, vals[1]);
        let count = sieve::phi_count(n, y);
        return Ok(CommandOutput {
            payload: json!({"n": n, "y": y, "phi": count}),
            csv: format!("n,y,phi\n{n},{y},{count}"),
            summary: format!("{count}"),
            plot: None,
            compute_failed: false,
        });
    }
    if let Some(vals) = &a.rough {
        let (n, y) = (vals[0] as u64, vals[1]);
        let set = sieve::rough_set(n, y);
        let summary = format!("{} elements", set.len());
        let csv = set
            .elements()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(CommandOutput {
            payload: serde_json::to_value(&set)?,
            csv,
            summary,
            plot: None,
            compute_failed: false,
        });
    }
    if let Some(y) = a.mertens {
        let v = sieve::mertens_product(y);
        return Ok(CommandOutput {
            payload: json!({"y": y, "zeta1y": v}),
            csv: format!("y,zeta1y\n{y},{}", crate::report::fmt_real(v)),
            summary: format!("{v}"),
            plot: None,
            compute_failed: false,
        });
    }
    if let Some(vals) = &a.harmonic {
        let (n, y) = (vals[0] as u64, vals[1]);
        let v = sieve::harmonic_rough_sum(n, y);
        let envelope = (n as f64).ln() / sieve::mertens_product(y);
        return Ok(CommandOutput {
            payload: json!({"n": n, "y": y, "sum": v, "log_weight_envelope": envelope,
                            "constant": v / envelope}),
            csv: format!(
                "n,y,sum,envelope\n{n},{y},{},{}",
                crate::report::fmt_real(v),
                crate::report::fmt_real(envelope)
            ),
            summary: format!("{v}"),
            plot: None,
            compute_failed: false,
        });
    }
    if let Some(n) = a.brun {
        let grid = a
            .y_grid
            .clone()
            .unwrap_or_else(|| vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0]);
        let rows = sieve::brun_ratio_scan(n, &grid);
        let plot_rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.y, r.ratio]).collect();
        let summary = rows
            .iter()
            .map(|r| {
                format!(
                    "y={:>8.2} Phi={:>10} ratio={:.6}{}",
                    r.y,
                    r.phi,
                    r.ratio,
                    if r.in_regime { "" } else { "  (out of regime)" }
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(CommandOutput {
            payload: serde_json::to_value(&rows)?,
            csv: rows.to_csv(),
            summary,
            plot: Some((
                format!("Brun ratio Phi(N,y) zeta(1,y)/N at N={n}"),
                vec!["y", "ratio"],
                plot_rows,
            )),
            compute_failed: false,
        });
    }
    if let Some(path) = &a.check {
        let set = IntegerSet::read_elements_file(path, None)?;
        return Ok(CommandOutput {
            payload: json!({"path": path.display().to_string(), "size": set.len(),
                            "n_max": set.n_max(), "valid": true}),
            csv: format!("size,n_max\n{},{}", set.len(), set.n_max()),
            summary: format!("valid set with {} elements", set.len()),
            plot: None,
            compute_failed: false,
        });
    }
    unreachable!("validated: exactly one sieve action")
}

fn run_verify(a: &VerifyArgs) -> Result<CommandOutput> {
    let outcomes = verify::run_suite(a.quick);
    let all_pass = outcomes.iter().all(|o| o.pass);
    let summary = outcomes
        .iter()
        .map(|o| {
            format!(
                "{} {:<32} {}",
                if o.pass { "PASS" } else { "FAIL" },
                o.name,
                o.detail
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let payload = json!({
        "checks": outcomes.iter().map(|o| json!({
            "name": o.name, "pass": o.pass, "detail": o.detail,
        })).collect::<Vec<_>>(),
        "all_pass": all_pass,
    });
    let csv = format!(
        "name,pass,detail\n{}",
        outcomes
            .iter()
            .map(|o| format!("{},{},\"{}\"", o.name, o.pass, o.detail))
            .collect::<Vec<_>>()
            .join("\n")
    );
    Ok(CommandOutput {
        payload,
        csv,
        summary,
        plot: None,
        compute_failed: !all_pass,
    })
}

/// Full run: validate, execute, emit. Returns the process exit code.
pub fn run_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap renders its own message (incl. --help/--version)
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 2 };
        }
    };
    if let Err(e) = cli.validate() {
        eprintln!("error: {e}");
        return 2;
    }
    if let Some(threads) = cli.threads {
        // ignore failure when a pool already exists (tests call run_main twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let started = std::time::Instant::now();
    let out = match execute(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let wall_ms = started.elapsed().as_millis() as u64;

    let command_name = match &cli.command {
        Command::Theta(_) => "theta",
        Command::Census(_) => "census",
        Command::Scan(_) => "scan",
        Command::Gcdsum(_) => "gcdsum",
        Command::Energy(_) => "energy",
        Command::Quadruples(_) => "quadruples",
        Command::Sieve(_) => "sieve",
        Command::Verify(_) => "verify",
    };
    let config_echo = serde_json::json!({ "argv": cli.to_argv() });

    println!("{}", out.summary);
    if let Some(path) = &cli.output {
        let result = match cli.format {
            OutputFormat::Json => {
                ResultEnvelope::new(command_name, config_echo, &out.payload, wall_ms)
                    .and_then(|env| env.to_json_pretty())
                    .and_then(|s| std::fs::write(path, s).map_err(Error::from))
            }
            OutputFormat::Csv => std::fs::write(path, &out.csv).map_err(Error::from),
        };
        if let Err(e) = result {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    } else if cli.format == OutputFormat::Csv {
        println!("{}", out.csv);
    }
    if let Some(plot_path) = &cli.plot {
        if let Some((comment, columns, rows)) = &out.plot {
            if let Err(e) = emit_plot_data(plot_path, comment, columns, rows) {
                eprintln!("error: cannot write plot {}: {e}", plot_path.display());
                return 1;
            }
        } else {
            eprintln!("error: this command has no plot payload");
            return 2;
        }
    }
    if out.compute_failed {
        1
    } else {
        0
    }
}
