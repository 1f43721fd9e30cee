//! `wgmqed`: simulation and fitting runs driven by a TOML configuration.

mod commands;
mod config;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Map;

use commands::{Completion, Context};
use config::Format;
use failure::{Failure, EXIT_NUMERICAL};
use manifest::{Outputs, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "wgmqed", version, about = "Two emitters in a whispering-gallery-mode resonator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; the built-in default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a config entry, e.g. `--set device.kappa_over_2pi_ghz=3.0`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Data file format (overrides output.format).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for the optimizer's restart perturbation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Drop-port transmission spectrum.
    DitSpectrum,
    /// Directional single-photon wavepackets after a pulse.
    Wavepacket,
    /// Auto- and cross-correlation under weak incoherent pumping.
    G2,
    /// Heralded entanglement rate/infidelity sweep.
    Entangle,
    /// Cooperativity, coupling and Purcell factor from lifetimes and linewidths.
    Metrics,
    /// Staged cavity/DIT fit or a single-line fit.
    Fit,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::DitSpectrum => "dit-spectrum",
            Command::Wavepacket => "wavepacket",
            Command::G2 => "g2",
            Command::Entangle => "entangle",
            Command::Metrics => "metrics",
            Command::Fit => "fit",
        }
    }
}

static WARNINGS: Mutex<Vec<String>> = Mutex::new(Vec::new());

/// Forwards to env_logger and keeps warnings for the manifest.
struct Logger(env_logger::Logger);

impl log::Log for Logger {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn || self.0.enabled(m)
    }

    fn log(&self, record: &log::Record) {
        if record.level() <= log::Level::Warn {
            if let Ok(mut w) = WARNINGS.lock() {
                w.push(record.args().to_string());
            }
        }
        if self.0.matches(record) {
            self.0.log(record);
        }
    }

    fn flush(&self) {
        self.0.flush();
    }
}

fn init_logging() {
    let inner = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).build();
    let level = inner.filter().max(log::LevelFilter::Warn);
    if log::set_boxed_logger(Box::new(Logger(inner))).is_ok() {
        log::set_max_level(level);
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let started = Instant::now();
    let mut overrides = cli.set.clone();
    if let Some(out) = &cli.out {
        overrides.push(format!("output.directory={}", toml::Value::String(out.display().to_string())));
    }
    if let Some(f) = cli.format {
        let name = match f {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Both => "both",
        };
        overrides.push(format!("output.format=\"{name}\""));
    }
    let cfg = config::load(cli.config.as_deref(), &overrides)?;
    let mut out = Outputs::create(&cfg.output.directory)?;
    let snapshot = cfg.to_toml();
    out.write("config.resolved.toml", snapshot.as_bytes())?;

    let mut summary = Map::new();
    let mut ctx = Context { cfg: &cfg, out: &mut out, summary: &mut summary, seed: cli.seed };
    let outcome = match cli.command {
        Command::DitSpectrum => commands::dit_spectrum(&mut ctx),
        Command::Wavepacket => commands::wavepacket_cmd(&mut ctx),
        Command::G2 => commands::g2(&mut ctx),
        Command::Entangle => commands::entangle(&mut ctx),
        Command::Metrics => commands::metrics(&mut ctx),
        Command::Fit => commands::fit(&mut ctx),
    };
    let (code, failure) = match outcome {
        Ok(Completion::Ok) => (0, None),
        Ok(Completion::NotConverged) => {
            log::warn!("optimizer did not converge; best-so-far results were written");
            (EXIT_NUMERICAL, None)
        }
        Err(f) => (f.code, Some(f)),
    };
    let warnings = WARNINGS.lock().map(|w| w.clone()).unwrap_or_default();
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cli.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        config: snapshot,
        outputs: Vec::new(),
        summary,
        warnings,
        exit_code: code,
    };
    let manifest = out.finish(manifest)?;
    if let Some(f) = failure {
        return Err(f);
    }
    for (k, v) in &manifest.summary {
        println!("{k}: {v}");
    }
    println!("wrote {} files to {}", manifest.outputs.len() + 1, cfg.output.directory.display());
    Ok(code)
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
