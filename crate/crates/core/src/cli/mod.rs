//! Command-line front end. Every subcommand reads one JSON config, writes its
//! outputs and a `manifest.json` under `--out`, and is deterministic in
//! (inputs, seed).

mod commands;
pub mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::sha256_hex;

pub use commands::{spec_from_rows, SimulateReport};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Parser)]
#[command(name = "perchlab", version, about = "Inverted ceiling landing: simulate, learn, train, evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Validate and print the plan without running it.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Fly one approach and write telemetry and the outcome.
    Simulate,
    /// Optimize every cell of a sweep and write the dataset.
    Learn,
    /// Fit the two-stage policy to a dataset.
    Train,
    /// Fly a trained policy over a grid of conditions.
    Evaluate,
    /// Polar success map of a dataset.
    Plot,
    /// Bench identification fits.
    Sysid {
        #[command(subcommand)]
        kind: SysidKind,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum SysidKind {
    /// Rotational inertia from a bifilar-pendulum gyro trace.
    Inertia,
    /// Voltage/thrust regression for battery compensation.
    Battery,
    /// Motor time constant from a tachometer trace.
    Motor,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Simulate => "simulate".into(),
            Command::Learn => "learn".into(),
            Command::Train => "train".into(),
            Command::Evaluate => "evaluate".into(),
            Command::Plot => "plot".into(),
            Command::Sysid { kind } => format!(
                "sysid {}",
                match kind {
                    SysidKind::Inertia => "inertia",
                    SysidKind::Battery => "battery",
                    SysidKind::Motor => "motor",
                }
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Option<String>,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: String,
    pub tool_version: String,
    /// Content hashes of input datasets and models.
    pub inputs: BTreeMap<String, String>,
    /// Content hashes of the files written, by path relative to `out_dir`.
    pub outputs: BTreeMap<String, String>,
}

/// What a run printed and wrote.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub messages: Vec<String>,
    pub warnings: Vec<String>,
    pub manifest: Option<RunManifest>,
}

/// Output directory that records the hash of every file written through it.
pub(crate) struct OutDir {
    root: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            outputs: BTreeMap::new(),
        })
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        write_atomic(&path, bytes)?;
        self.outputs.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = crate::json::to_string(value)?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }
}

/// Write through a sibling temp file and rename, so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Loaded config with its origin, for path resolution and the manifest.
pub(crate) struct Loaded<T> {
    pub value: T,
    pub path: Option<PathBuf>,
    pub sha256: Option<String>,
}

impl<T> Loaded<T> {
    /// Resolve a path named inside the config against the config's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match self.path.as_ref().and_then(|c| c.parent()) {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}

pub(crate) fn load_config<T: serde::de::DeserializeOwned>(
    path: Option<&Path>,
    what: &str,
    default: Option<T>,
) -> Result<Loaded<T>> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Error::FileNotFound {
                    path: p.display().to_string(),
                    expected: format!("{what} config (JSON)"),
                },
                _ => Error::Io(e),
            })?;
            Ok(Loaded {
                value: crate::json::from_str(&text)?,
                path: Some(p.to_path_buf()),
                sha256: Some(sha256_hex(text.as_bytes())),
            })
        }
        None => match default {
            Some(value) => Ok(Loaded {
                value,
                path: None,
                sha256: None,
            }),
            None => Err(Error::InvalidParameter(format!("--config is required: pass a {what} config (JSON)"))),
        },
    }
}

impl Cli {
    pub(crate) fn manifest<T>(
        &self,
        cfg: &Loaded<T>,
        seed: Option<u64>,
        inputs: BTreeMap<String, String>,
        out: OutDir,
    ) -> RunManifest {
        RunManifest {
            subcommand: self.command.name(),
            config: cfg.path.as_ref().map(|p| p.display().to_string()),
            config_sha256: cfg.sha256.clone(),
            seed,
            out_dir: self.out.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            outputs: out.outputs,
        }
    }
}

pub(crate) fn finish(cli: &Cli, manifest: RunManifest, summary: &mut RunSummary) -> Result<()> {
    let mut s = crate::json::to_string(&manifest)?;
    s.push('\n');
    write_atomic(&cli.out.join(MANIFEST_FILE), s.as_bytes())?;
    summary.manifest = Some(manifest);
    Ok(())
}

/// Run one parsed command line.
pub fn run(cli: &Cli) -> Result<RunSummary> {
    match cli.command {
        Command::Simulate => commands::simulate(cli),
        Command::Learn => commands::learn(cli),
        Command::Train => commands::train(cli),
        Command::Evaluate => commands::evaluate(cli),
        Command::Plot => commands::plot(cli),
        Command::Sysid { kind } => commands::sysid(cli, kind),
    }
}

/// Parse `std::env::args`, run, print, and map the result to an exit code.
pub fn main_entry() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            for m in &summary.messages {
                println!("{m}");
            }
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
