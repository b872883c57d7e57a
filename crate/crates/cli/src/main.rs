//! `polar-shaping`: rate curves, S-to-p calibration, BLER simulation and
//! asset inspection. Every run is a pure function of its configuration and
//! seed; simulations write a JSON manifest that replays them via `--config`.

mod config;
mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polar_shaping::analysis::{
    achievable_rate_bmd, asymptotic_p, asymptotic_shaping_bits, optimize_p, Integrator, DEFAULT_GH_ORDER,
};
use polar_shaping::nr::{PolarInterleaverPattern, ReliabilitySequence, SubblockPattern};
use polar_shaping::shaping::{CalibrationTable, Codec};
use polar_shaping::sim::{db_to_linear, run_bler, sweep_shaping_bits, SimResult};

use config::{parse_grid, parse_usize_grid, Manifest, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "polar-shaping", version, about = "Shaped polar-coded QAM: analysis, calibration and simulation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value file, or a JSON manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; without it, the main CSV goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Any config key, e.g. `--set scrambler=gold:17`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// BMD achievable rate versus SNR.
    Rate(RateArgs),
    /// Numerical S-to-p calibration next to the asymptotic relation.
    Calibrate(CalibrateArgs),
    /// BLER versus SNR for one configuration.
    Simulate(CodeArgs),
    /// Required SNR at the target BLER for a range of S.
    SweepS(CodeArgs),
    /// Dump and validate a table asset.
    Tables(TablesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    GaussHermite,
    MonteCarlo,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Ones probability of the amplitude bits, or `opt` to maximize per SNR.
    #[arg(long, default_value = "opt")]
    p: String,
    #[arg(long, default_value = "0:1:30")]
    snr_db: String,
    #[arg(long, value_enum, default_value = "gauss-hermite")]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_GH_ORDER)]
    order: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Golden-section tolerance on p for `--p opt`.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// S grid; defaults to every S from 0 to N/(M/2).
    #[arg(long)]
    s: Option<String>,
    #[arg(long, default_value_t = 500)]
    realizations: usize,
    /// Precoder list size.
    #[arg(long)]
    list: Option<usize>,
}

/// Flags mirroring config keys; each overrides the file.
#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    e: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// Shaping bits, or `auto`.
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    list: Option<String>,
    #[arg(long)]
    snr_db: Option<String>,
    #[arg(long)]
    max_trials: Option<String>,
    #[arg(long)]
    target_errors: Option<String>,
    #[arg(long)]
    target_bler: Option<String>,
    #[arg(long)]
    s_values: Option<String>,
}

impl CodeArgs {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        [
            ("a", &self.a),
            ("n", &self.n),
            ("e", &self.e),
            ("m", &self.m),
            ("s", &self.s),
            ("list", &self.list),
            ("snr_db", &self.snr_db),
            ("max_trials", &self.max_trials),
            ("target_errors", &self.target_errors),
            ("target_bler", &self.target_bler),
            ("s_values", &self.s_values),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableName {
    /// Polar reliability sequence.
    Q,
    /// Sub-block interleaver pattern.
    Subblock,
    /// Polar (bit) interleaver pattern.
    Interleaver,
    /// S-to-p calibration table.
    Calibration,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(value_enum)]
    name: TableName,
    /// Validate this file instead of the bundled asset.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    list: usize,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// File, then `--set`, then the subcommand flags, then the common flags.
fn resolve(common: &Common, flags: &[(&str, &str)]) -> Result<RunConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flag_err = |key: &str, message: String| CliError::Config {
        file: format!("--{key}"),
        line: 0,
        message,
    };
    for item in &common.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| invalid(format!("--set expects KEY=VALUE, got {item:?}")))?;
        config.set(k, v).map_err(|e| flag_err("set", e))?;
    }
    for &(k, v) in flags {
        config.set(k, v).map_err(|e| flag_err(k, e))?;
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out = Some(out.clone());
    }
    if let Some(workers) = common.workers {
        config.workers = workers;
    }
    Ok(config)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes `text` to `out/name`, or to stdout without an output directory.
fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<Option<String>, CliError> {
    match out {
        Some(dir) => {
            let path = dir.join(name);
            write_file(&path, text)?;
            eprintln!("wrote {}", path.display());
            Ok(Some(name.to_string()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            Ok(None)
        }
    }
}

fn write_manifest(config: &RunConfig, command: &str, outputs: Vec<String>) -> Result<(), CliError> {
    let Some(dir) = &config.out else {
        return Ok(());
    };
    let manifest = Manifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        run_config: config.clone(),
        outputs,
    };
    let stem = command.replace('-', "_");
    let path = dir.join(format!("{stem}.json"));
    write_file(&path, &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    // Same settings as a key-value file, for diffing against other runs.
    write_file(&dir.join(format!("{stem}.cfg")), &config.to_key_values())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn install_workers(workers: usize) {
    // Fails only if a global pool already exists, which is harmless here.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
}

fn cmd_rate(common: &Common, args: &RateArgs) -> Result<(), CliError> {
    let config = resolve(common, &[])?;
    install_workers(config.workers);
    let m = args.m.unwrap_or(config.bits_per_symbol);
    let grid = parse_grid("snr_db", &args.snr_db).map_err(invalid)?;
    let method = match args.method {
        Method::GaussHermite => Integrator::GaussHermite { order: args.order },
        Method::MonteCarlo => Integrator::MonteCarlo {
            samples: args.samples,
            seed: config.seed,
        },
    };
    let fixed_p = match args.p.as_str() {
        "opt" => None,
        p => Some(p.parse::<f64>().map_err(|e| invalid(format!("--p {p:?}: {e}")))?),
    };
    let mut csv = String::from("gamma_db,p,r_bmd,r_bmd_uniform,capacity_awgn\n");
    for g_db in grid {
        let gamma = db_to_linear(g_db);
        let uniform = achievable_rate_bmd(m, 0.5, gamma, method)?;
        let point = match fixed_p {
            Some(p) => achievable_rate_bmd(m, p, gamma, method)?,
            None => {
                let best = optimize_p(m, gamma, args.tolerance)?.best;
                // Re-evaluate the maximizer with the requested integrator.
                achievable_rate_bmd(m, best.p, gamma, method)?
            }
        };
        csv.push_str(&format!(
            "{g_db},{:.6},{:.6},{:.6},{:.6}\n",
            point.p,
            point.r_bmd,
            uniform.r_bmd,
            (1.0 + gamma).log2()
        ));
    }
    emit(config.out.as_deref(), &format!("rate_m{m}.csv"), &csv)?;
    Ok(())
}

fn cmd_calibrate(common: &Common, args: &CalibrateArgs) -> Result<(), CliError> {
    let config = resolve(common, &[])?;
    install_workers(config.workers);
    let n = args.n.unwrap_or(config.n);
    let m = args.m.unwrap_or(config.bits_per_symbol);
    let list = args.list.unwrap_or(config.precoder_list_size);
    if !matches!(m, 4 | 8) {
        return Err(invalid(format!("calibration needs M in {{4, 8}}, got {m}")));
    }
    let max_s = n / (m / 2);
    let s_values = match &args.s {
        Some(s) => parse_usize_grid("s", s).map_err(invalid)?,
        None => (0..=max_s).collect(),
    };
    if let Some(&bad) = s_values.iter().find(|&&s| s > max_s) {
        return Err(invalid(format!("S = {bad} exceeds N/(M/2) = {max_s}")));
    }
    let table = CalibrationTable::sweep(n, m, &s_values, args.realizations, list, config.seed)?;
    let mut csv = String::from("s,p_hat,realizations,p_asymptotic,s_asymptotic\n");
    for row in table.rows() {
        csv.push_str(&format!(
            "{},{:.6},{},{:.6},{}\n",
            row.s,
            row.p_hat,
            row.realizations,
            asymptotic_p(n, m, row.s as f64),
            asymptotic_shaping_bits(n, m, row.p_hat.min(0.5))
        ));
    }
    eprintln!("mean offset S - S_asymptotic(p_hat): {:.2} bits", table.mean_offset());
    emit(config.out.as_deref(), &format!("calibrate_{n}_{m}_{list}.csv"), &csv)?;
    if let Some(dir) = &config.out {
        let path = dir.join(CalibrationTable::file_name(n, m, list));
        write_file(&path, &table.to_csv())?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_simulate(common: &Common, args: &CodeArgs) -> Result<(), CliError> {
    let config = resolve(common, &args.pairs())?;
    config.validate()?;
    let s = config
        .shaping_bits
        .ok_or_else(|| invalid("simulate needs a fixed S; use sweep-s for s = auto"))?;
    let codec = Codec::new(config.code_config(s)?)?;
    let results = run_bler(&codec, &config.snr_db, &config.sim_settings())?;
    let mut csv = format!("{}\n", SimResult::csv_header());
    for r in &results {
        eprintln!(
            "snr {:.2} dB: {} errors / {} trials, BLER {:.3e} ({:.1} s)",
            r.snr_db, r.block_errors, r.trials, r.bler, r.wall_time_s
        );
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let outputs = emit(config.out.as_deref(), "simulate.csv", &csv)?;
    write_manifest(&config, "simulate", outputs.into_iter().collect())
}

fn cmd_sweep_s(common: &Common, args: &CodeArgs) -> Result<(), CliError> {
    let config = resolve(common, &args.pairs())?;
    config.validate()?;
    let s_values = config.sweep_values()?;
    let rows = sweep_shaping_bits(&config.code_config(0)?, &s_values, &config.search_settings())?;
    let mut csv = String::from("shaping_bits,required_snr_db,lo_snr_db,lo_bler,hi_snr_db,hi_bler,probes\n");
    for r in &rows {
        eprintln!("S = {}: {:.3} dB", r.shaping_bits, r.required_snr_db);
        csv.push_str(&format!(
            "{},{:.4},{:.4},{:.6e},{:.4},{:.6e},{}\n",
            r.shaping_bits,
            r.required_snr_db,
            r.lo.snr_db,
            r.lo.bler,
            r.hi.snr_db,
            r.hi.bler,
            r.probes.len()
        ));
    }
    let outputs = emit(config.out.as_deref(), "sweep_s.csv", &csv)?;
    write_manifest(&config, "sweep-s", outputs.into_iter().collect())
}

fn dump(name: &str, entries: &[usize]) -> Result<(), CliError> {
    let mut sorted = entries.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let text: String = entries.iter().map(|v| format!("{v}\n")).collect();
    emit(None, name, &text)?;
    eprintln!("{name}: {} entries, {} unique", entries.len(), sorted.len());
    Ok(())
}

fn cmd_tables(args: &TablesArgs) -> Result<(), CliError> {
    let file = args.file.as_deref();
    match args.name {
        TableName::Q => {
            let q = match file {
                Some(f) => ReliabilitySequence::from_file(f)?,
                None => ReliabilitySequence::standard().clone(),
            };
            dump("q_sequence", q.as_slice())
        }
        TableName::Subblock => {
            let p = match file {
                Some(f) => SubblockPattern::from_file(f)?,
                None => SubblockPattern::standard().clone(),
            };
            dump("subblock_pattern", p.as_slice())
        }
        TableName::Interleaver => {
            let p = match file {
                Some(f) => PolarInterleaverPattern::from_file(f)?,
                None => PolarInterleaverPattern::standard().clone(),
            };
            dump("polar_interleaver", p.as_slice())
        }
        TableName::Calibration => {
            let table = match file {
                Some(f) => CalibrationTable::from_file(f)?,
                None => CalibrationTable::bundled(args.n, args.m, args.list).ok_or_else(|| {
                    invalid(format!(
                        "no bundled calibration for N = {}, M = {}, list {}",
                        args.n, args.m, args.list
                    ))
                })?,
            };
            emit(None, "calibration", &table.to_csv())?;
            eprintln!("calibration: {} rows, mean offset {:.2} bits", table.rows().len(), table.mean_offset());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Rate(a) => cmd_rate(&cli.common, a),
        Command::Calibrate(a) => cmd_calibrate(&cli.common, a),
        Command::Simulate(a) => cmd_simulate(&cli.common, a),
        Command::SweepS(a) => cmd_sweep_s(&cli.common, a),
        Command::Tables(a) => cmd_tables(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
