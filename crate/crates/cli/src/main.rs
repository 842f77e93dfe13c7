//! `slowlight`: runs hole-burning, propagation and Maxwell-Bloch scenarios
//! and writes CSV datasets plus a `summary.json` per run.
//!
//! Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
//! numerical routine fails.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Engine, Freq, ScenarioConfig};
use run::{Failure, Outcome, Sink};

/// Hole widths of the measured transmission curves.
const FIG5_WIDTHS: [&str; 3] = ["206kHz", "420kHz", "860kHz"];

#[derive(Parser)]
#[command(
    name = "slowlight",
    version,
    about = "Slow light through a persistent spectral hole"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pump sequence to absorption spectrum.
    Spectrum(Scenario),
    /// Pulse transmission through a Lorentzian hole.
    Propagate(Scenario),
    /// Delay against alpha*L/Gamma over a set of holes.
    DelayScan(Scenario),
    /// Time-domain run with the field/atom energy ledger.
    Bloch(Scenario),
    /// Every preset, each into its own subdirectory.
    Figures(Common),
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress progress and the result digest.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct Scenario {
    /// Scenario file (TOML).
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    config: Option<PathBuf>,
    /// Built-in scenario: fig3b, fig4, fig5, fig6 or energy.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    /// Hole FWHM, e.g. 860kHz.
    #[arg(long, value_name = "FREQ", allow_hyphen_values = true)]
    hole_width: Option<Freq>,
    /// Fraction of the background removed at the hole centre.
    #[arg(long, allow_hyphen_values = true)]
    hole_depth: Option<f64>,
    /// Background absorption coefficient (1/m).
    #[arg(long, value_name = "PER_M", allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Sample length (m).
    #[arg(long, value_name = "M", allow_hyphen_values = true)]
    length: Option<f64>,
}

impl Scenario {
    fn resolve(&self) -> Outcome<ScenarioConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                ScenarioConfig::parse(&text, &path.display().to_string())?
            }
            (None, Some(name)) => config::preset(name)?,
            (None, None) => unreachable!("clap requires one of --config and --preset"),
        };
        if let Some(e) = self.engine {
            cfg.engine.kind = e;
        }
        let flagged = self.hole_width.is_some()
            || self.hole_depth.is_some()
            || self.alpha.is_some()
            || self.length.is_some();
        if flagged {
            let m = cfg.medium.as_mut().ok_or_else(|| {
                Failure::Config(
                    "--hole-width, --hole-depth, --alpha and --length need a [medium] section"
                        .into(),
                )
            })?;
            if let Some(w) = self.hole_width {
                m.hole_width = w;
            }
            if let Some(d) = self.hole_depth {
                m.hole_depth = d;
            }
            if let Some(a) = self.alpha {
                m.alpha_per_m = a;
            }
            if let Some(l) = self.length {
                m.length_m = l;
            }
        }
        if let Some(dir) = &self.common.out {
            cfg.output.dir = Some(dir.clone());
        }
        Ok(cfg)
    }
}

type Runner = fn(&ScenarioConfig, &Sink) -> Outcome<serde_json::Value>;

fn report(sink: &Sink, headline: &serde_json::Value) {
    if !sink.quiet {
        println!("{}", serde_json::to_string_pretty(headline).expect("json"));
        eprintln!("results in {}", sink.path().display());
    }
}

fn scenario(s: &Scenario, runner: Runner) -> Outcome<()> {
    let cfg = s.resolve()?;
    let dir = cfg
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let sink = Sink::new(dir, s.common.quiet)?;
    let headline = runner(&cfg, &sink)?;
    report(&sink, &headline);
    Ok(())
}

fn figures(c: &Common) -> Outcome<()> {
    let root = Sink::new(
        c.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        c.quiet,
    )?;
    let mut all = serde_json::Map::new();
    let plain: [(&str, Runner); 4] = [
        ("fig3b", run::spectrum),
        ("fig4", run::spectrum),
        ("fig6", run::delay_scan_cmd),
        ("energy", run::bloch),
    ];
    for (name, runner) in plain {
        root.note(format!("preset {name}"));
        let cfg = config::preset(name)?;
        all.insert(name.into(), runner(&cfg, &root.child(name)?)?);
    }
    for width in FIG5_WIDTHS {
        let dir = format!("fig5_{width}");
        root.note(format!("preset fig5 at {width}"));
        let mut cfg = config::preset("fig5")?;
        if let Some(m) = cfg.medium.as_mut() {
            m.hole_width = width.parse()?;
        }
        all.insert(dir.clone(), run::propagate(&cfg, &root.child(&dir)?)?);
    }
    let doc = json!({ "version": env!("CARGO_PKG_VERSION"), "runs": all });
    let path = root.path().join("summary.json");
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    std::fs::write(&path, text)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    if !c.quiet {
        eprintln!("results in {}", root.path().display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Spectrum(s) => scenario(s, run::spectrum),
        Command::Propagate(s) => scenario(s, run::propagate),
        Command::DelayScan(s) => scenario(s, run::delay_scan_cmd),
        Command::Bloch(s) => scenario(s, run::bloch),
        Command::Figures(c) => figures(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("slowlight: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
