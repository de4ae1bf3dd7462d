//! Front end for the `unpin` binary: argument parsing, JSON run
//! configurations, artifact emission and exit-code policy.

pub mod args;
pub mod commands;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use args::{Cli, Command};
use output::{to_json, write_atomic};

/// Worker count for scans; defaults to the available parallelism.
pub const WORKERS_ENV: &str = "UNPIN_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical { kind: String, message: String },
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical { message, .. } => write!(f, "{message}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<unpin_core::Error> for CliError {
    fn from(e: unpin_core::Error) -> Self {
        use unpin_core::Error as E;
        match e {
            E::Parameter(_) | E::OutsidePinningRegime { .. } | E::Unsupported(_) | E::Stability(_) | E::Hypothesis(_) => {
                CliError::Usage(e.to_string())
            }
            other => {
                let debug = format!("{other:?}");
                let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Numerical").to_string();
                CliError::Numerical { kind, message: other.to_string() }
            }
        }
    }
}

/// A run configuration file: the command, its flags as a keyed map, and
/// the output directory.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

const CONFIG_COMMANDS: &[&str] = &["pinning", "constants", "wave", "simulate", "scan", "fit", "beta-scan", "repro"];

impl RunConfig {
    /// Equivalent command line: each key becomes `--key` (underscores turn
    /// into dashes), `true` a bare flag, arrays comma-joined lists.
    pub fn to_argv(&self) -> Result<Vec<String>, CliError> {
        if !CONFIG_COMMANDS.contains(&self.command.as_str()) {
            return Err(CliError::Usage(format!("unknown command '{}'; expected one of {}", self.command, CONFIG_COMMANDS.join(", "))));
        }
        let mut argv = vec!["unpin".to_string()];
        if let Some(dir) = &self.output_dir {
            argv.push("--out".into());
            argv.push(dir.display().to_string());
        }
        argv.push(self.command.clone());
        let scalar = |k: &str, v: &Value| -> Result<String, CliError> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(CliError::Usage(format!("parameter '{k}' must be a string, number, boolean or list"))),
            }
        };
        for (key, value) in &self.parameters {
            if self.command == "repro" && key == "preset" {
                argv.push(scalar(key, value)?);
                continue;
            }
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                Value::Bool(true) => argv.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    let parts: Result<Vec<String>, CliError> = items.iter().map(|v| scalar(key, v)).collect();
                    argv.push(flag);
                    argv.push(parts?.join(","));
                }
                v => {
                    argv.push(flag);
                    argv.push(scalar(key, v)?);
                }
            }
        }
        Ok(argv)
    }
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    command: &'a str,
    parameters: Value,
    output_dir: String,
    outputs: Vec<String>,
    notes: &'a [String],
    artifact_version: &'static str,
    workers: usize,
    created_unix: u64,
}

fn configure_workers() -> Result<usize, CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
        // A pool may already exist when embedded; the first setting wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

fn dispatch(cmd: &Command, dir: &Path) -> Result<commands::Report, CliError> {
    match cmd {
        Command::Pinning(a) => commands::pinning(a, dir),
        Command::Constants(a) => commands::constants(a, dir),
        Command::Wave(a) => commands::wave(a, dir),
        Command::Simulate(a) => commands::simulate(a, dir),
        Command::Scan(a) => commands::scan(a, dir),
        Command::Fit(a) => commands::fit(a, dir),
        Command::BetaScan(a) => commands::beta_scan_cmd(a, dir),
        Command::Repro(a) => commands::repro(a, dir),
        Command::Run(_) => Err(CliError::Usage("run configurations cannot nest".into())),
    }
}

fn metadata_name(cmd: &Command) -> String {
    match cmd {
        Command::Repro(a) => {
            let preset = serde_json::to_value(a.preset).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            format!("repro_{preset}.meta.json")
        }
        other => format!("{}.meta.json", other.name().replace('-', "_")),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let workers = configure_workers()?;
    if let Command::Run(run) = &cli.command {
        let text = std::fs::read_to_string(&run.config).map_err(|e| CliError::Usage(format!("{}: {e}", run.config.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", run.config.display())))?;
        let mut argv = cfg.to_argv()?;
        if cfg.output_dir.is_none() {
            argv.splice(1..1, ["--out".to_string(), cli.out.display().to_string()]);
        }
        let inner = Cli::try_parse_from(&argv).map_err(|e| {
            let text = e.render().to_string();
            CliError::Usage(text.trim_start_matches("error: ").trim_end().to_string())
        })?;
        return execute(inner);
    }
    let dir = cli.out.as_path();
    std::fs::create_dir_all(dir)?;
    let report = dispatch(&cli.command, dir);
    let (outputs, notes) = match &report {
        Ok(r) => (r.outputs.clone(), r.notes.clone()),
        Err(_) => (Vec::new(), Vec::new()),
    };
    let params = serde_json::to_value(&cli.command).expect("arguments serialize");
    let params = match params {
        Value::Object(m) if m.len() == 1 => m.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null),
        v => v,
    };
    let meta = Metadata {
        command: cli.command.name(),
        parameters: params,
        output_dir: dir.display().to_string(),
        outputs: outputs.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect(),
        notes: &notes,
        artifact_version: env!("CARGO_PKG_VERSION"),
        workers,
        created_unix: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    if report.is_ok() {
        write_atomic(&dir.join(metadata_name(&cli.command)), &to_json(&meta))?;
    }
    let report = report?;
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    if let Some(s) = report.summary {
        println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
    }
    Ok(())
}

/// Runs the binary on `argv` and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Numerical { kind, message } => {
                    let payload = serde_json::json!({ "error": "numerical", "kind": kind, "message": message });
                    eprintln!("{payload}");
                }
                other => eprintln!("error: {other}"),
            }
            e.exit_code()
        }
    }
}
