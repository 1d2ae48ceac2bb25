//! Command implementations behind the `uwbsync` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Error;
use crate::harness::{self, Estimator, ScenarioConfig};
use crate::scenario::{self, ConfigError};
use crate::selftest;
use crate::sync::Mode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "manifest";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("runtime error: {0}")]
    Runtime(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub estimators: Option<Vec<Estimator>>,
    pub modes: Option<Vec<Mode>>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<(), ConfigError> {
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(v) = &self.snr_db {
            cfg.snr_points_db = v.clone();
        }
        if let Some(v) = &self.estimators {
            cfg.estimators = v.clone();
        }
        if let Some(v) = &self.modes {
            cfg.modes = v.clone();
        }
        cfg.validate().map_err(|e| ConfigError { line: None, key: "override".into(), message: e.to_string() })
    }
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub version: &'static str,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    /// Scenario text plus a `[manifest]` section; the whole file parses as a
    /// scenario, so a run can be replayed from it directly.
    pub fn render(&self) -> String {
        let mut out = scenario::emit_config(&self.config);
        out.push_str("\n[manifest]\n");
        out.push_str(&format!("version = {}\n", self.version));
        out.push_str(&format!("master_seed = {}\n", self.config.master_seed));
        out.push_str(&format!("started_unix = {}\n", self.started_unix));
        out.push_str(&format!("finished_unix = {}\n", self.finished_unix));
        let outputs: Vec<String> = self.outputs.iter().map(|p| p.display().to_string()).collect();
        out.push_str(&format!("outputs = {}\n", outputs.join(", ")));
        out
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Parses, sweeps and writes `metrics.csv` and `manifest` into `out_dir`.
pub fn run(scenario_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let mut cfg = scenario::parse_scenario(scenario_path)?;
    overrides.apply(&mut cfg)?;
    let started_unix = unix_now();
    let table = match overrides.workers {
        Some(w) => harness::sweep_with_workers(&cfg, w)?,
        None => harness::sweep(&cfg)?,
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let metrics = out_dir.join(METRICS_FILE);
    fs::write(&metrics, table.to_csv()).map_err(io_err(&metrics))?;
    let manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION"),
        started_unix,
        finished_unix: unix_now(),
        outputs: vec![PathBuf::from(METRICS_FILE)],
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.render()).map_err(io_err(&manifest_path))?;
    Ok(cfg)
}

pub fn cmd_run(scenario_path: &Path, out_dir: &Path, overrides: &Overrides, stderr: &mut impl Write) -> i32 {
    match run(scenario_path, out_dir, overrides) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "uwbsync: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_selftest_with(fixture: &selftest::Fixture, out: &mut impl Write) -> i32 {
    let outcomes = selftest::run(fixture);
    for o in &outcomes {
        let status = match &o.result {
            Ok(()) => "ok".to_string(),
            Err(msg) => format!("FAILED: {msg}"),
        };
        let _ = writeln!(out, "{:<22}{status}", o.name);
    }
    match outcomes.iter().find(|o| o.result.is_err()) {
        Some(first) => {
            let _ = writeln!(out, "selftest failed: {}", first.name);
            EXIT_RUNTIME
        }
        None => EXIT_OK,
    }
}

pub fn cmd_selftest(out: &mut impl Write) -> i32 {
    cmd_selftest_with(&selftest::Fixture::default(), out)
}

/// Prints the canonical form of a scenario file or a bundled scenario name.
pub fn cmd_emit_config(source: &str, out: &mut impl Write, stderr: &mut impl Write) -> i32 {
    let parsed = match source {
        "paper_cm1" => scenario::parse_scenario_str(scenario::PAPER_CM1),
        "desk" => scenario::parse_scenario_str(scenario::DESK),
        path => scenario::parse_scenario(Path::new(path)),
    };
    match parsed {
        Ok(cfg) => {
            let _ = out.write_all(scenario::emit_config(&cfg).as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "uwbsync: config error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_reports_each_check() {
        let mut out = Vec::new();
        assert_eq!(cmd_selftest(&mut out), EXIT_OK);
        let text = String::from_utf8(out).unwrap();
        for name in ["pulse_energy", "partition_identity", "noiseless_alignment", "fine_scan_range"] {
            assert!(text.lines().any(|l| l.starts_with(name) && l.ends_with("ok")), "{text}");
        }
    }

    #[test]
    fn selftest_failure_exits_nonzero() {
        fn broken(_: &crate::FrameGeometry, _: f64) -> crate::Result<crate::waveform::Pulse> {
            Ok(crate::waveform::Pulse::from_raw(vec![0.5; 40], 50.0))
        }
        let mut out = Vec::new();
        assert_eq!(cmd_selftest_with(&selftest::Fixture { make_pulse: broken }, &mut out), EXIT_RUNTIME);
        assert!(String::from_utf8(out).unwrap().contains("selftest failed: pulse_energy"));
    }

    #[test]
    fn emit_config_bundled_and_missing() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(cmd_emit_config("desk", &mut out, &mut err), EXIT_OK);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(scenario::parse_scenario_str(&text).unwrap(), scenario::parse_scenario_str(scenario::DESK).unwrap());
        let mut out = Vec::new();
        assert_eq!(cmd_emit_config("/nonexistent/x.scenario", &mut out, &mut err), EXIT_CONFIG);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut cfg = scenario::parse_scenario_str(scenario::DESK).unwrap();
        let o = Overrides { seed: Some(9), trials: Some(3), snr_db: Some(vec![1.0]), ..Default::default() };
        o.apply(&mut cfg).unwrap();
        assert_eq!((cfg.master_seed, cfg.trials, cfg.snr_points_db.clone()), (9, 3, vec![1.0]));
        let bad = Overrides { trials: Some(0), ..Default::default() };
        assert!(bad.apply(&mut cfg).is_err());
    }

    #[test]
    fn exit_codes_by_error_kind() {
        let io = CliError::Io { path: "x".into(), source: std::io::Error::other("boom") };
        assert_eq!(io.exit_code(), EXIT_IO);
        assert_eq!(CliError::Runtime(Error::DegenerateChannel(3)).exit_code(), EXIT_RUNTIME);
        let cfg = ConfigError { line: None, key: "k".into(), message: "m".into() };
        assert_eq!(CliError::Config(cfg).exit_code(), EXIT_CONFIG);
    }
}
