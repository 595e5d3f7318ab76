//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use accumtest_core::dosage::{discovery_table, PipelineMethod};
use accumtest_core::power::{asymptotic_power, asymptotic_threshold, validate_signal_curve, Condition, SignalCurve};
use accumtest_core::seqtest::{fdp, mfdp, power_of_cutoff, select_cutoff, shift_discrete_pvalues, Method, Rule};
use accumtest_core::simlab::{default_alpha_grid, SimConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};
use crate::io::{self, PValueInput};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::numfmt::fmt_f64;
use crate::{parallel, validate};

pub const POWER_CSV: &str = "power.csv";
pub const PATHS_CSV: &str = "paths.csv";
pub const DISCOVERIES_CSV: &str = "discoveries.csv";

#[derive(Debug, Parser)]
#[command(name = "accumtest", version, about = "Accumulation tests for ordered hypotheses", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimated-FDP path and cutoff for one ordered list of p-values.
    Test(TestArgs),
    /// Monte Carlo power and FDR of several methods.
    Simulate(SimulateArgs),
    /// Limiting threshold and power for a signal curve.
    Power(PowerArgs),
    /// Dose-response permutation pipeline on an expression matrix.
    Dosage(DosageArgs),
    /// Runs the built-in invariant suite.
    Validate,
    /// Re-executes the run recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Plain,
    Plus,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV with column `p` (optional `is_null`), or a path table with `fdp_hat`.
    #[arg(long)]
    pub input: PathBuf,
    /// Method string, e.g. `forwardstop`, `seqstep:C=2`, `seqstep+:C=2`.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub alpha: f64,
    /// Overrides the rule encoded in the method string.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Offset for the plus rule (defaults to the family's C).
    #[arg(long)]
    pub c: Option<f64>,
    /// Maps permutation p-values k/P to k/(P+1) before testing.
    #[arg(long)]
    pub shift_grid: Option<u64>,
    /// Where to write the `k,fdp_hat` path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Offset for the reported mFDP (defaults to C/alpha).
    #[arg(long)]
    pub mfdp_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub n_nonnull: usize,
    #[arg(long, default_value_t = 3.0)]
    pub mu1: f64,
    #[arg(long, default_value_t = 3.0)]
    pub mu2: f64,
    /// Comma-separated levels (default 0.05 to 0.25 in steps of 0.025).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Repeatable; defaults to SeqStep, SeqStep+, ForwardStop, HingeExp (C = 2).
    #[arg(long)]
    pub method: Vec<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, env = "ACCUMTEST_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Piecewise-linear curve `f:t0,f0;t1,f1;...`.
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub mu: f64,
    /// Required steepness where f >= 1 - alpha.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DosageArgs {
    /// CSV with header `gene_id,<labels>`; labels start with C, L or H.
    #[arg(long)]
    pub input: PathBuf,
    /// Repeatable; defaults to the four accumulation tests and BH/Storey.
    #[arg(long)]
    pub method: Vec<String>,
    /// Comma-separated levels (default 0, 0.01, ..., 0.9).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Output CSV file; without it (and without --out-dir) rows go to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, env = "ACCUMTEST_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (defaults to the manifest's directory).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command, writing
/// reports to `out`.
pub fn run<W: Write>(argv: &[String], out: &mut W) -> CliResult<()> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(out, "{}", e.render())?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    // arguments after the subcommand name, for the manifest
    let tail: Vec<String> = argv.iter().skip(2).cloned().collect();
    match cli.command {
        Command::Test(a) => cmd_test(&a, &tail, out),
        Command::Simulate(a) => cmd_simulate(&a, &tail, out),
        Command::Power(a) => cmd_power(&a, out),
        Command::Dosage(a) => cmd_dosage(&a, &tail, out),
        Command::Validate => cmd_validate(out),
        Command::Replay(a) => cmd_replay(&a, out),
    }
}

fn resolve_method(a: &TestArgs) -> CliResult<Method> {
    let m: Method = a.method.as_deref().unwrap_or("forwardstop").parse()?;
    let rule = a.rule.unwrap_or(match m.rule {
        Rule::Plain => RuleArg::Plain,
        Rule::PlusC(_) => RuleArg::Plus,
    });
    match rule {
        RuleArg::Plain if a.c.is_some() => Err(CliError::Usage("--c only applies to the plus rule".into())),
        RuleArg::Plain => Ok(Method::plain(m.spec)),
        RuleArg::Plus => {
            let encoded = match m.rule {
                Rule::PlusC(c) => Some(c),
                Rule::Plain => None,
            };
            let c =
                a.c.or(encoded)
                    .or(m.spec.c_param())
                    .ok_or_else(|| CliError::Usage(format!("the plus rule for `{}` needs --c", m.spec)))?;
            Ok(Method::plus(m.spec, c)?)
        }
    }
}

fn sidecar_manifest(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn cmd_test<W: Write>(a: &TestArgs, tail: &[String], out: &mut W) -> CliResult<()> {
    let method = resolve_method(a)?;
    let path = match io::read_pvalue_table(&a.input, a.method.as_deref())? {
        PValueInput::Path(path) => {
            writeln!(out, "input=path")?;
            path
        }
        PValueInput::PValues(mut p) => {
            if let Some(grid) = a.shift_grid {
                p = shift_discrete_pvalues(&p, grid)?;
            }
            let path = method.path(&p)?;
            let k = select_cutoff(&path, a.alpha)?;
            writeln!(out, "method={method}")?;
            writeln!(out, "n={}", p.len())?;
            if let Some(mask) = p.null_mask() {
                writeln!(out, "fdp={}", fmt_f64(fdp(k, mask)?))?;
                let c = a.mfdp_c.or(method.spec.c_param().map(|c| c / a.alpha));
                if let Some(c) = c {
                    writeln!(out, "mfdp_c={}", fmt_f64(c))?;
                    writeln!(out, "mfdp={}", fmt_f64(mfdp(k, mask, c)?))?;
                }
                if mask.iter().any(|null| !null) {
                    writeln!(out, "power={}", fmt_f64(power_of_cutoff(k, mask)?))?;
                }
            }
            path
        }
    };
    let k = select_cutoff(&path, a.alpha)?;
    writeln!(out, "k_hat={k}")?;
    if let Some(output) = &a.output {
        io::write_file(output, |f| io::write_path_csv(f, &path))?;
        let mut m = RunManifest::new("test", tail, None);
        m.inputs.push(a.input.display().to_string());
        m.outputs.push(output.display().to_string());
        m.write(&sidecar_manifest(output))?;
    }
    Ok(())
}

fn parse_methods<T: std::str::FromStr<Err = accumtest_core::Error>>(
    given: &[String],
    default: impl FnOnce() -> Vec<T>,
) -> CliResult<Vec<T>> {
    if given.is_empty() {
        return Ok(default());
    }
    Ok(given.iter().map(|s| s.parse()).collect::<Result<Vec<T>, _>>()?)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_simulate<W: Write>(a: &SimulateArgs, tail: &[String], out: &mut W) -> CliResult<()> {
    let methods = parse_methods(&a.method, Method::standard_set)?;
    let config = SimConfig {
        n: a.n,
        n_nonnull: a.n_nonnull,
        mu1: a.mu1,
        mu2: a.mu2,
        alpha_grid: a.alphas.clone().unwrap_or_else(default_alpha_grid),
        trials: a.trials,
        seed: a.seed,
    };
    let agg = parallel::simulate(&config, &methods, true, a.threads)?;
    ensure_dir(&a.out_dir)?;
    io::write_file(&a.out_dir.join(POWER_CSV), |f| io::write_power_csv(f, &agg))?;
    io::write_file(&a.out_dir.join(PATHS_CSV), |f| io::write_paths_csv(f, &agg))?;
    let mut m = RunManifest::new("simulate", tail, Some(a.seed));
    m.outputs = vec![POWER_CSV.into(), PATHS_CSV.into()];
    m.write(&a.out_dir.join(MANIFEST_FILE))?;
    for name in [POWER_CSV, PATHS_CSV, MANIFEST_FILE] {
        writeln!(out, "wrote {}", a.out_dir.join(name).display())?;
    }
    Ok(())
}

fn cmd_power<W: Write>(a: &PowerArgs, out: &mut W) -> CliResult<()> {
    let mut curve: SignalCurve = a.curve.parse()?;
    if let Some(d) = a.delta {
        curve = curve.with_delta(d)?;
    }
    let report = validate_signal_curve(&curve, a.alpha);
    let describe = |v: &accumtest_core::power::Violation| {
        format!("{} (first at t = {}, value {})", v.condition, fmt_f64(v.t), fmt_f64(v.value))
    };
    if report.structurally_invalid() {
        let list: Vec<String> = report.violations.iter().map(describe).collect();
        return Err(CliError::Data(format!("signal curve rejected: {}", list.join("; "))));
    }
    for v in report.violations.iter().filter(|v| v.condition == Condition::Steepness) {
        writeln!(out, "warning: {}", describe(v))?;
    }
    let t = asymptotic_threshold(&curve, a.alpha, a.mu)?;
    writeln!(out, "T={}", fmt_f64(t))?;
    writeln!(out, "power={}", fmt_f64(asymptotic_power(&curve, a.alpha, a.mu)?))?;
    Ok(())
}

fn default_dosage_grid() -> Vec<f64> {
    (0..=90).map(|k| k as f64 / 100.0).collect()
}

fn cmd_dosage<W: Write>(a: &DosageArgs, tail: &[String], out: &mut W) -> CliResult<()> {
    let methods = parse_methods(&a.method, PipelineMethod::default_set)?;
    let alphas = a.alphas.clone().unwrap_or_else(default_dosage_grid);
    let matrix = io::read_expression_matrix(&a.input)?;
    let records = parallel::gene_records(&matrix, a.threads)?;
    let rows = discovery_table(&records, &methods, &alphas)?;
    let mut m = RunManifest::new("dosage", tail, None);
    m.inputs.push(a.input.display().to_string());
    let manifest_path = match (&a.out_dir, &a.output) {
        (Some(dir), _) => {
            ensure_dir(dir)?;
            io::write_file(&dir.join(DISCOVERIES_CSV), |f| io::write_dosage_csv(f, &rows))?;
            m.outputs.push(DISCOVERIES_CSV.into());
            dir.join(MANIFEST_FILE)
        }
        (None, Some(file)) => {
            io::write_file(file, |f| io::write_dosage_csv(f, &rows))?;
            m.outputs.push(file.display().to_string());
            sidecar_manifest(file)
        }
        (None, None) => return io::write_dosage_csv(out, &rows),
    };
    m.write(&manifest_path)?;
    writeln!(out, "wrote {}", manifest_path.with_file_name(&m.outputs[0]).display())?;
    Ok(())
}

fn cmd_validate<W: Write>(out: &mut W) -> CliResult<()> {
    let checks = validate::run_suite();
    for c in &checks {
        writeln!(out, "{}", c.line())?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Numeric(format!("{failed} of {} checks failed", checks.len())));
    }
    writeln!(out, "all {} checks passed", checks.len())?;
    Ok(())
}

fn cmd_replay<W: Write>(a: &ReplayArgs, out: &mut W) -> CliResult<()> {
    let m = RunManifest::read(&a.manifest)?;
    if m.subcommand == "replay" {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    if m.version != env!("CARGO_PKG_VERSION") {
        writeln!(out, "warning: manifest written by version {}", m.version)?;
    }
    let mut argv = vec!["accumtest".to_string()];
    argv.extend(m.replay_args());
    let writes_to_dir =
        m.subcommand == "simulate" || (m.subcommand == "dosage" && !m.args.iter().any(|s| s.starts_with("--output")));
    if writes_to_dir {
        let dir = match &a.out_dir {
            Some(d) => d.clone(),
            None => a.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        argv.push("--out-dir".into());
        argv.push(dir.display().to_string());
    }
    run(&argv, out)
}
