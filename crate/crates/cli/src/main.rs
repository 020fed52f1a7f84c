mod commands;
mod config;
mod output;
mod validate;

use clap::Parser;
use config::{JobConfig, BUNDLED_DISC, COMMANDS};
use output::{canonical_json, git_blob_hash, ErrorRecord, Manifest, OutDir, Versions};
use std::path::PathBuf;
use std::process::ExitCode;
use wavetrace::geometry::BoundaryCurve;
use wavetrace::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Wave-trace invariants of smooth plane billiards: periodic orbits, length
/// spectra, smoothed resolvent traces and wave invariants.
#[derive(Debug, Parser)]
#[command(name = "wavetrace", version, after_help = "Commands: orbits, spectrum, disc-trace, bem-trace, invariants, validate, selftest.\nWithout --config the bundled unit-disc configuration is used.")]
struct Cli {
    /// Command to run; overrides the `command` key of the config.
    command: Option<String>,
    /// Job configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "wavetrace-out")]
    out: PathBuf,
    /// Worker threads; 0 means one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed for the randomized test points of `validate`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("wavetrace: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(c) = &cli.command {
        if !COMMANDS.contains(&c.as_str()) {
            return config_error(format!("unknown command '{c}' (expected one of {})", COMMANDS.join(", ")));
        }
    }
    let (text, source) = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => (t, p.display().to_string()),
            Err(e) => return config_error(format!("cannot read {}: {e}", p.display())),
        },
        None => (BUNDLED_DISC.to_string(), "bundled:disc.toml".to_string()),
    };
    let cfg = match JobConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return config_error(format!("config {source}: {}", e.trim_end())),
    };
    let Some(command) = cli.command.clone().or_else(|| cfg.command.clone()) else {
        return config_error("no command given on the command line or in the config");
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        return config_error(format!("thread pool: {e}"));
    }
    let curve = match BoundaryCurve::from_spec(&cfg.curve) {
        Ok(c) => Some(c),
        Err(e @ Error::InvalidCurve(_)) => return config_error(format!("config {source}: {e}")),
        Err(_) => None,
    };
    let mut out = match OutDir::create(&cli.out) {
        Ok(o) => o,
        Err(e) => return config_error(format!("cannot create {}: {e}", cli.out.display())),
    };

    let result = match curve {
        None => BoundaryCurve::from_spec(&cfg.curve).map(|_| Outcome::Done),
        Some(curve) => dispatch(&command, &cfg, &curve, cli.seed, &mut out),
    };
    let (status, error, code) = match &result {
        Ok(Outcome::Done) => ("ok", None, ExitCode::SUCCESS),
        Ok(Outcome::ChecksFailed(n)) => (
            "failed",
            Some(ErrorRecord { name: "ValidationFailed".into(), message: format!("{n} checks failed") }),
            ExitCode::from(EXIT_NUMERICAL),
        ),
        Err(e) => {
            eprintln!("wavetrace: {command}: {e}");
            ("error", Some(ErrorRecord { name: e.name().into(), message: e.to_string() }), ExitCode::from(EXIT_NUMERICAL))
        }
    };
    let mut outputs = out.records.clone();
    outputs.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        command,
        config_source: source,
        config_hash: format!("sha256:{}", git_blob_hash(text.as_bytes())),
        seed: cli.seed,
        versions: Versions::current(),
        outputs,
        status: status.into(),
        error,
    };
    if let Err(e) = output::write_atomic(&out.root().join("manifest.json"), &canonical_json(&manifest)) {
        eprintln!("wavetrace: cannot write manifest: {e}");
        return ExitCode::from(EXIT_NUMERICAL);
    }
    code
}

enum Outcome {
    Done,
    ChecksFailed(usize),
}

fn dispatch(command: &str, cfg: &JobConfig, curve: &BoundaryCurve, seed: u64, out: &mut OutDir) -> wavetrace::Result<Outcome> {
    match command {
        "orbits" => commands::orbits(cfg, curve, out)?,
        "spectrum" => commands::spectrum(cfg, curve, out)?,
        "disc-trace" => commands::disc_trace(cfg, curve, out)?,
        "bem-trace" => commands::bem_trace(cfg, curve, out)?,
        "invariants" => commands::invariants(cfg, curve, out)?,
        "selftest" => commands::selftest(out)?,
        "validate" => {
            let report = validate::run(cfg, curve, seed);
            for c in &report.checks {
                eprintln!("[{}] {}: {}", c.status, c.name, c.detail);
            }
            out.write("validate_report.json", &canonical_json(&report)).map_err(|e| Error::Io(e.to_string()))?;
            let failed = report.checks.iter().filter(|c| c.status == "fail").count();
            if failed > 0 {
                return Ok(Outcome::ChecksFailed(failed));
            }
        }
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    }
    Ok(Outcome::Done)
}
