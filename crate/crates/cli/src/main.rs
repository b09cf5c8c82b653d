//! `kamrot`: synthesize cocycles with planted rotation classes, run the
//! almost-reducibility scheme on them and emit machine-readable reports.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kamrot::config::merge_file_over;
use kamrot::error::EXIT_FAIL;
use kamrot::experiment::{parse_cocycle, read_file, rotation_of, write_file};
use kamrot::{
    check_dioph, merge_reports, run_experiment, synthesize_cocycle, CliError, CliResult,
    ExperimentConfig, ExperimentReport, FactorSpec, FrequencySpec, PerturbationSpec, Preset,
    Synthesis, Verdict,
};

#[derive(Parser, Debug)]
#[command(name = "kamrot", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the configured cocycle and print it with its ground truth.
    Synthesize {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write the cocycle here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize, run the scheme and compare with the ground truth.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Rotation vector only, of a cocycle file or of the configured cocycle.
    Rho {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// A `synthesize` output or a bare cocycle JSON document.
        #[arg(long)]
        cocycle: Option<PathBuf>,
    },
    /// Scan the configured frequency for violations of its declared
    /// Diophantine class up to the horizon.
    CheckDioph {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Summarise a batch of run reports.
    ReportMerge {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags mirroring the fields of the experiment configuration. A JSON file
/// passed with `--config` overrides them field by field.
#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// JSON configuration; its fields take precedence over flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named base frequency.
    #[arg(long, value_enum, conflicts_with = "alpha")]
    preset: Option<Preset>,
    /// Explicit base frequency, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    /// Angle of the base constant.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Chain factor, repeatable, in chain order:
    /// `winding:K1,K2`, `exp:BAND:AMPLITUDE:SEED` or `constant:W,X,Y,Z`.
    #[arg(long = "factor", allow_hyphen_values = true)]
    factors: Vec<FactorSpec>,
    /// Band of the seeded base perturbation.
    #[arg(long, default_value_t = 4)]
    pert_band: usize,
    /// `H^0` norm of the seeded base perturbation; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    pert_amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pert_seed: u64,
    #[arg(long)]
    n0: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    stop_tolerance: Option<f64>,
    #[arg(long)]
    safety_exponent: Option<f64>,
    #[arg(long)]
    perturbative_bound: Option<f64>,
    /// Storage band of the scheme.
    #[arg(long)]
    band: Option<usize>,
    /// Declared Diophantine constant of the frequency.
    #[arg(long)]
    gamma: Option<f64>,
    /// Declared Diophantine exponent of the frequency.
    #[arg(long)]
    tau: Option<f64>,
    /// Scan horizon of Diophantine checks.
    #[arg(long)]
    dioph_horizon: Option<u64>,
    /// Band of the synthesized cocycle.
    #[arg(long)]
    synthesis_band: Option<usize>,
    /// Search horizon of the ground-truth equivalence check.
    #[arg(long)]
    horizon: Option<u64>,
    /// Matching tolerance of the ground-truth equivalence check.
    #[arg(long)]
    truth_tolerance: Option<f64>,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV diagnostics path.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

impl ConfigArgs {
    fn to_config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        if let Some(name) = self.preset {
            cfg.frequency = FrequencySpec::Preset { name };
        }
        if let Some(values) = &self.alpha {
            cfg.frequency = FrequencySpec::Explicit {
                values: values.clone(),
            };
        }
        if let Some(t) = self.theta {
            cfg.theta = t;
        }
        cfg.chain = self.factors.clone();
        if self.pert_amplitude != 0.0 {
            cfg.perturbation = Some(PerturbationSpec {
                band: self.pert_band,
                amplitude: self.pert_amplitude,
                seed: self.pert_seed,
            });
        }
        let p = &mut cfg.params;
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set!(
            n0 => p.n0,
            sigma => p.sigma,
            nu => p.nu,
            max_steps => p.max_steps,
            stop_tolerance => p.stop_tolerance,
            safety_exponent => p.safety_exponent,
            perturbative_bound => p.perturbative_bound,
            gamma => p.dioph.gamma,
            tau => p.dioph.tau,
            dioph_horizon => p.dioph.horizon,
            horizon => cfg.horizon,
            truth_tolerance => cfg.truth_tolerance,
        );
        cfg.params.band = self.band.or(cfg.params.band);
        cfg.synthesis_band = self.synthesis_band;
        cfg.output.report = self.report.clone();
        cfg.output.diagnostics = self.diagnostics.clone();
        cfg
    }

    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let flags = self.to_config();
        let text = self.config.as_deref().map(read_file).transpose()?;
        let cfg = merge_file_over(&flags, text.as_deref())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn summary(report: &ExperimentReport) -> String {
    let verdict = match report.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Error => "ERROR",
    };
    let mut line = format!("{verdict} config {}", &report.config_hash[..12]);
    if let Some(t) = &report.ground_truth {
        line += &format!(" truth {:.12}", t.representative);
    }
    if let Some(o) = &report.outcome {
        if let Some(r) = &o.rotation {
            line += &format!(" representative {:.12}", r.representative);
        }
        line += &format!(" steps {} resonances {}", o.steps, o.ledger.len());
        if !o.within_hypotheses {
            line += " (out of theorem hypotheses)";
        }
    }
    if let Some(e) = &report.error {
        line += &format!(": {}", e.message);
    }
    line
}

fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Synthesize { cfg, out } => {
            let cfg = cfg.resolve()?;
            let (cocycle, ground_truth) = synthesize_cocycle(&cfg)?;
            let doc = Synthesis {
                config_hash: cfg.hash(),
                cocycle,
                ground_truth,
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
            Ok(0)
        }
        Command::Run { cfg } => {
            let cfg = cfg.resolve()?;
            let report = run_experiment(&cfg)?;
            if cfg.output.report.is_none() {
                emit(None, &report.to_json())?;
            }
            eprintln!("{}", summary(&report));
            Ok(report.exit_code)
        }
        Command::Rho { cfg, cocycle } => {
            let cfg = cfg.resolve()?;
            let phi = match cocycle {
                Some(path) => parse_cocycle(&read_file(&path)?)?,
                None => synthesize_cocycle(&cfg)?.0,
            };
            let rho = rotation_of(&phi, &cfg.params)?;
            emit(cfg.output.report.as_deref(), &serde_json::to_string_pretty(&rho)?)?;
            Ok(0)
        }
        Command::CheckDioph { cfg } => {
            let cfg = cfg.resolve()?;
            let alpha = cfg.frequency.resolve()?;
            let check = check_dioph(&alpha, &cfg.params.dioph)?;
            emit(cfg.output.report.as_deref(), &serde_json::to_string_pretty(&check)?)?;
            Ok(if check.holds { 0 } else { EXIT_FAIL })
        }
        Command::ReportMerge { reports, out } => {
            let parsed = reports
                .iter()
                .map(|p| Ok(serde_json::from_str::<ExperimentReport>(&read_file(p)?)?))
                .collect::<CliResult<Vec<_>>>()?;
            let merged = merge_reports(&parsed);
            emit(out.as_deref(), &serde_json::to_string_pretty(&merged)?)?;
            Ok(if merged.all_passed() { 0 } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
