//! Scenario files: a flat `key = value` format grouped into `[section]`s.
//!
//! ```text
//! # comment            blank lines and `#` comments are ignored
//! format = 1           optional top-level version; only 1 is accepted
//! [geometry]           t_p_ns t_c_ns t_f_ns n_f n_c f_s_ghz pulse_shape_factor?
//! [channel]            model = identity | cm1
//!                      cm1 only: cluster_rate_per_ns ray_rate_per_ns
//!                        cluster_decay_ns ray_decay_ns cluster_fading_db
//!                        ray_fading_db truncation_ns
//! [sync]               m (list) modes (list of nda|da) coarse_step_ns?
//!                      t_corr_ns? delta_ns? k? (integer or auto)
//! [interferers]        snr_offsets_db (list, may be empty) count?
//! [run]                snr_db (list; `noiseless` allowed) trials master_seed
//!                      estimator (coarse_only|two_stage|both)
//!                      acquisition_threshold_ns? delay_law?
//!                        (uniform | coarse_grid | grid_offset:<ns>)
//! [manifest]           ignored on input (written by `run`)
//! ```
//!
//! Lists are comma separated. Keys marked `?` are optional.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::channel::Cm1Params;
use crate::error::Error;
use crate::geometry::FrameGeometry;
use crate::harness::{ChannelModel, DelayLaw, Estimator, ScenarioConfig};
use crate::sync::{self, Mode};
use crate::waveform;

pub const FORMAT_VERSION: u32 = 1;

pub const PAPER_CM1: &str = include_str!("../scenarios/paper_cm1.scenario");
pub const DESK: &str = include_str!("../scenarios/desk.scenario");

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    /// `section.key`, or just the section when no single key is at fault.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("", &["format"]),
    ("geometry", &["t_p_ns", "t_c_ns", "t_f_ns", "n_f", "n_c", "f_s_ghz", "pulse_shape_factor"]),
    (
        "channel",
        &[
            "model",
            "cluster_rate_per_ns",
            "ray_rate_per_ns",
            "cluster_decay_ns",
            "ray_decay_ns",
            "cluster_fading_db",
            "ray_fading_db",
            "truncation_ns",
        ],
    ),
    ("sync", &["m", "modes", "coarse_step_ns", "t_corr_ns", "delta_ns", "k"]),
    ("interferers", &["snr_offsets_db", "count"]),
    ("run", &["snr_db", "trials", "master_seed", "estimator", "acquisition_threshold_ns", "delay_law"]),
];

struct Doc {
    entries: BTreeMap<(String, String), Entry>,
    sections: BTreeMap<String, usize>,
}

impl Doc {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError {
                    line: Some(line),
                    key: content.to_string(),
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim().to_string();
                if name != "manifest" && !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError { line: Some(line), key: name, message: "unknown section".into() });
                }
                if sections.insert(name.clone(), line).is_some() {
                    return Err(ConfigError { line: Some(line), key: name, message: "duplicate section".into() });
                }
                section = name;
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
                line: Some(line),
                key: qualified(&section, content),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if section == "manifest" {
                continue;
            }
            let known = KNOWN.iter().find(|(s, _)| *s == section).is_some_and(|(_, keys)| keys.contains(&key.as_str()));
            if !known {
                return Err(ConfigError {
                    line: Some(line),
                    key: qualified(&section, &key),
                    message: "unknown key".into(),
                });
            }
            let entry = Entry { value: value.trim().to_string(), line, used: false };
            if entries.insert((section.clone(), key.clone()), entry).is_some() {
                return Err(ConfigError {
                    line: Some(line),
                    key: qualified(&section, &key),
                    message: "duplicate key".into(),
                });
            }
        }
        Ok(Self { entries, sections })
    }

    fn get(&mut self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entries.get_mut(&(section.to_string(), key.to_string())).map(|e| {
            e.used = true;
            (e.value.as_str(), e.line)
        })
    }

    fn required(&mut self, section: &str, key: &str) -> Result<(String, usize), ConfigError> {
        let header = self.sections.get(section).copied();
        self.get(section, key).map(|(v, l)| (v.to_string(), l)).ok_or_else(|| ConfigError {
            line: header,
            key: qualified(section, key),
            message: "missing key".into(),
        })
    }

    fn parse_as<T: FromStr>(&mut self, section: &str, key: &str) -> Result<(T, usize), ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (v, line) = self.required(section, key)?;
        v.parse::<T>().map(|x| (x, line)).map_err(|e| type_error(section, key, line, &v, e))
    }

    fn optional_as<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<(T, usize)>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(section, key).map(|(v, l)| (v.to_string(), l)) {
            None => Ok(None),
            Some((v, line)) => {
                v.parse::<T>().map(|x| Some((x, line))).map_err(|e| type_error(section, key, line, &v, e))
            }
        }
    }

    fn list<T: FromStr>(&mut self, section: &str, key: &str) -> Result<(Vec<T>, usize), ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (v, line) = self.required(section, key)?;
        let items = split_list(&v)
            .map(|item| item.parse::<T>().map_err(|e| type_error(section, key, line, item, e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((items, line))
    }

    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|e| e.line)
            .or_else(|| self.sections.get(section).copied())
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn type_error(section: &str, key: &str, line: usize, value: &str, e: impl fmt::Display) -> ConfigError {
    ConfigError { line: Some(line), key: qualified(section, key), message: format!("cannot parse `{value}`: {e}") }
}

fn invalid(doc: &Doc, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line: doc.line_of(section, key), key: qualified(section, key), message: message.into() }
}

/// SNR list item: a number in dB or `noiseless`.
struct Snr(f64);

impl FromStr for Snr {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noiseless" | "inf" => Ok(Snr(f64::INFINITY)),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Snr)
                .ok_or_else(|| "expected a finite number or `noiseless`".into()),
        }
    }
}

/// Estimator selection as written in files and on the command line.
pub fn parse_estimators(s: &str) -> Result<Vec<Estimator>, String> {
    match s.trim() {
        "both" => Ok(vec![Estimator::CoarseOnly, Estimator::TwoStage]),
        other => Ok(vec![other.parse()?]),
    }
}

pub fn parse_modes(s: &str) -> Result<Vec<Mode>, String> {
    match s.trim() {
        "both" => Ok(vec![Mode::Nda, Mode::Da]),
        other => split_list(other).map(str::parse).collect(),
    }
}

pub fn parse_delay_law(s: &str) -> Result<DelayLaw, String> {
    match s.trim() {
        "uniform" => Ok(DelayLaw::Uniform),
        "coarse_grid" => Ok(DelayLaw::CoarseGrid),
        other => other
            .strip_prefix("grid_offset:")
            .and_then(|x| x.trim().parse::<f64>().ok())
            .filter(|x| x.is_finite() && *x >= 0.0)
            .map(DelayLaw::GridOffset)
            .ok_or_else(|| format!("unknown delay law `{other}`")),
    }
}

/// Parses and validates scenario text.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut doc = Doc::parse(text)?;

    if let Some((v, line)) = doc.optional_as::<u32>("", "format")? {
        if v != FORMAT_VERSION {
            return Err(ConfigError {
                line: Some(line),
                key: "format".into(),
                message: format!("unsupported format {v}, expected {FORMAT_VERSION}"),
            });
        }
    }

    let (t_p, _) = doc.parse_as::<f64>("geometry", "t_p_ns")?;
    let (t_c, _) = doc.parse_as::<f64>("geometry", "t_c_ns")?;
    let (t_f, _) = doc.parse_as::<f64>("geometry", "t_f_ns")?;
    let (n_f, _) = doc.parse_as::<usize>("geometry", "n_f")?;
    let (n_c, _) = doc.parse_as::<usize>("geometry", "n_c")?;
    let (f_s, _) = doc.parse_as::<f64>("geometry", "f_s_ghz")?;
    let geometry = FrameGeometry::new(t_p, t_c, t_f, n_f, n_c, f_s).map_err(|e| match e {
        Error::FrameSpill { .. } => invalid(&doc, "geometry", "t_f_ns", "frame spill: (N_c−1)·T_c + T_p > T_f"),
        other => invalid(&doc, "geometry", "", other.to_string()).with_section_key(),
    })?;
    let pulse_shape_factor =
        doc.optional_as::<f64>("geometry", "pulse_shape_factor")?.map_or(waveform::DEFAULT_SHAPE_FACTOR, |(x, _)| x);
    if let Err(e) = waveform::make_pulse(&geometry, pulse_shape_factor) {
        let key = if matches!(e, Error::PulseUnresolvable { .. }) { "t_p_ns" } else { "pulse_shape_factor" };
        return Err(invalid(&doc, "geometry", key, e.to_string()));
    }

    let (model, model_line) = doc.required("channel", "model")?;
    let channel = match model.as_str() {
        "identity" => ChannelModel::Identity,
        "cm1" => {
            let mut num = |key: &str| doc.parse_as::<f64>("channel", key).map(|(x, _)| x);
            let params = Cm1Params {
                cluster_rate: num("cluster_rate_per_ns")?,
                ray_rate: num("ray_rate_per_ns")?,
                cluster_decay: num("cluster_decay_ns")?,
                ray_decay: num("ray_decay_ns")?,
                cluster_fading_db: num("cluster_fading_db")?,
                ray_fading_db: num("ray_fading_db")?,
            };
            let truncation_ns = num("truncation_ns")?;
            if let Err(e) = params.validate() {
                return Err(ConfigError {
                    line: doc.sections.get("channel").copied(),
                    key: "channel".into(),
                    message: e.to_string(),
                });
            }
            if !(truncation_ns > 0.0 && truncation_ns < geometry.t_s()) {
                return Err(invalid(
                    &doc,
                    "channel",
                    "truncation_ns",
                    format!("must lie in (0, T_s = {} ns)", geometry.t_s()),
                ));
            }
            ChannelModel::Cm1 { params, truncation_ns }
        }
        other => {
            return Err(ConfigError {
                line: Some(model_line),
                key: "channel.model".into(),
                message: format!("unknown model `{other}` (expected identity or cm1)"),
            })
        }
    };

    let (m_values, m_line) = doc.list::<usize>("sync", "m")?;
    if m_values.is_empty() || m_values.contains(&0) {
        return Err(ConfigError {
            line: Some(m_line),
            key: "sync.m".into(),
            message: "need one or more M >= 1".into(),
        });
    }
    let (modes_raw, modes_line) = doc.required("sync", "modes")?;
    let modes = parse_modes(&modes_raw).ok().filter(|v| !v.is_empty()).ok_or_else(|| ConfigError {
        line: Some(modes_line),
        key: "sync.modes".into(),
        message: format!("bad mode list `{modes_raw}`"),
    })?;
    let coarse_step =
        doc.optional_as::<f64>("sync", "coarse_step_ns")?.map_or(sync::DEFAULT_COARSE_STEP_NS, |(x, _)| x);
    let t_corr = doc.optional_as::<f64>("sync", "t_corr_ns")?.map_or(sync::DEFAULT_T_CORR_NS, |(x, _)| x);
    let delta = doc.optional_as::<f64>("sync", "delta_ns")?.map_or(sync::DEFAULT_DELTA_NS, |(x, _)| x);
    let fine_k = match doc.get("sync", "k").map(|(v, l)| (v.to_string(), l)) {
        None => None,
        Some((v, _)) if v == "auto" => None,
        Some((v, line)) => Some(
            v.parse::<usize>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| type_error("sync", "k", line, &v, "expected a positive integer or `auto`"))?,
        ),
    };
    match geometry.exact_samples(coarse_step) {
        Some(s) if s > 0 && geometry.symbol_len() % s == 0 => {}
        _ => return Err(invalid(&doc, "sync", "coarse_step_ns", "must be a whole number of samples dividing T_s")),
    }
    if t_corr != 0.0 {
        if t_corr.is_nan() || t_corr <= 0.0 || geometry.exact_samples(t_corr).is_none() {
            return Err(invalid(
                &doc,
                "sync",
                "t_corr_ns",
                "must be 0 (disabled) or a positive whole number of samples",
            ));
        }
        if t_corr < coarse_step / 2.0 {
            return Err(invalid(&doc, "sync", "t_corr_ns", "must be at least half the coarse step"));
        }
        if !(delta > 0.0 && delta <= t_corr) || geometry.exact_samples(delta).filter(|&d| d > 0).is_none() {
            return Err(invalid(&doc, "sync", "delta_ns", "need 0 < delta <= T_corr on the sample grid"));
        }
    }

    let (offsets, off_line) = doc.list::<f64>("interferers", "snr_offsets_db")?;
    if offsets.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError {
            line: Some(off_line),
            key: "interferers.snr_offsets_db".into(),
            message: "offsets must be finite".into(),
        });
    }
    if let Some((count, line)) = doc.optional_as::<usize>("interferers", "count")? {
        if count != offsets.len() {
            return Err(ConfigError {
                line: Some(line),
                key: "interferers.count".into(),
                message: format!("count {count} does not match {} listed offsets", offsets.len()),
            });
        }
    }

    let (snrs, snr_line) = doc.list::<Snr>("run", "snr_db")?;
    if snrs.is_empty() {
        return Err(ConfigError {
            line: Some(snr_line),
            key: "run.snr_db".into(),
            message: "need at least one SNR point".into(),
        });
    }
    let (trials, trials_line) = doc.parse_as::<usize>("run", "trials")?;
    if trials == 0 {
        return Err(ConfigError {
            line: Some(trials_line),
            key: "run.trials".into(),
            message: "must be at least 1".into(),
        });
    }
    let (master_seed, _) = doc.parse_as::<u64>("run", "master_seed")?;
    let (est_raw, est_line) = doc.required("run", "estimator")?;
    let estimators = parse_estimators(&est_raw).map_err(|e| ConfigError {
        line: Some(est_line),
        key: "run.estimator".into(),
        message: e,
    })?;
    let acquisition_threshold =
        doc.optional_as::<f64>("run", "acquisition_threshold_ns")?.map_or(geometry.t_p(), |(x, _)| x);
    if !(acquisition_threshold.is_finite() && acquisition_threshold > 0.0) {
        return Err(invalid(&doc, "run", "acquisition_threshold_ns", "must be positive"));
    }
    let delay_law = match doc.get("run", "delay_law").map(|(v, l)| (v.to_string(), l)) {
        None => DelayLaw::Uniform,
        Some((v, line)) => parse_delay_law(&v).map_err(|e| ConfigError {
            line: Some(line),
            key: "run.delay_law".into(),
            message: e,
        })?,
    };
    if let DelayLaw::GridOffset(x) = delay_law {
        if geometry.exact_samples(x).is_none() {
            return Err(invalid(&doc, "run", "delay_law", "grid offset must lie on the sample grid"));
        }
    }

    let cfg = ScenarioConfig {
        geometry,
        pulse_shape_factor,
        channel,
        m_values,
        modes,
        coarse_step,
        t_corr,
        delta,
        fine_k,
        interferer_snr_offsets_db: offsets,
        snr_points_db: snrs.into_iter().map(|s| s.0).collect(),
        trials,
        master_seed,
        estimators,
        acquisition_threshold,
        delay_law,
    };
    cfg.validate().map_err(|e| ConfigError { line: None, key: "scenario".into(), message: e.to_string() })?;
    Ok(cfg)
}

impl ConfigError {
    fn with_section_key(mut self) -> Self {
        self.key = self.key.trim_end_matches('.').to_string();
        self
    }
}

pub fn parse_scenario(path: &std::path::Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: path.display().to_string(),
        message: format!("cannot read scenario: {e}"),
    })?;
    parse_scenario_str(&text)
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn snr_text(x: &f64) -> String {
    if x.is_infinite() {
        "noiseless".into()
    } else {
        x.to_string()
    }
}

/// Canonical text for a config; parses back to an equal config.
pub fn emit_config(cfg: &ScenarioConfig) -> String {
    let g = &cfg.geometry;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!("format = {FORMAT_VERSION}"));
    line(String::new());
    line("[geometry]".into());
    line(format!("t_p_ns = {}", g.t_p()));
    line(format!("t_c_ns = {}", g.t_c()));
    line(format!("t_f_ns = {}", g.t_f()));
    line(format!("n_f = {}", g.n_f()));
    line(format!("n_c = {}", g.n_c()));
    line(format!("f_s_ghz = {}", g.f_s()));
    line(format!("pulse_shape_factor = {}", cfg.pulse_shape_factor));
    line(String::new());
    line("[channel]".into());
    match &cfg.channel {
        ChannelModel::Identity => line("model = identity".into()),
        ChannelModel::Cm1 { params, truncation_ns } => {
            line("model = cm1".into());
            line(format!("cluster_rate_per_ns = {}", params.cluster_rate));
            line(format!("ray_rate_per_ns = {}", params.ray_rate));
            line(format!("cluster_decay_ns = {}", params.cluster_decay));
            line(format!("ray_decay_ns = {}", params.ray_decay));
            line(format!("cluster_fading_db = {}", params.cluster_fading_db));
            line(format!("ray_fading_db = {}", params.ray_fading_db));
            line(format!("truncation_ns = {truncation_ns}"));
        }
    }
    line(String::new());
    line("[sync]".into());
    line(format!("m = {}", join(&cfg.m_values, |m| m.to_string())));
    line(format!("modes = {}", join(&cfg.modes, |m| m.as_str().to_string())));
    line(format!("coarse_step_ns = {}", cfg.coarse_step));
    line(format!("t_corr_ns = {}", cfg.t_corr));
    line(format!("delta_ns = {}", cfg.delta));
    line(format!("k = {}", cfg.fine_k.map_or("auto".to_string(), |k| k.to_string())));
    line(String::new());
    line("[interferers]".into());
    line(format!("count = {}", cfg.interferer_snr_offsets_db.len()));
    line(format!("snr_offsets_db = {}", join(&cfg.interferer_snr_offsets_db, |x| x.to_string())));
    line(String::new());
    line("[run]".into());
    line(format!("snr_db = {}", join(&cfg.snr_points_db, snr_text)));
    line(format!("trials = {}", cfg.trials));
    line(format!("master_seed = {}", cfg.master_seed));
    let est = match cfg.estimators.as_slice() {
        [Estimator::CoarseOnly, Estimator::TwoStage] => "both".to_string(),
        [one] => one.as_str().to_string(),
        // other orders have no file spelling; fall back to both
        _ => "both".to_string(),
    };
    line(format!("estimator = {est}"));
    line(format!("acquisition_threshold_ns = {}", cfg.acquisition_threshold));
    let law = match cfg.delay_law {
        DelayLaw::Uniform => "uniform".to_string(),
        DelayLaw::CoarseGrid => "coarse_grid".to_string(),
        DelayLaw::GridOffset(x) => format!("grid_offset:{x}"),
    };
    line(format!("delay_law = {law}"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse() {
        let paper = parse_scenario_str(PAPER_CM1).unwrap();
        assert_eq!(paper.geometry, FrameGeometry::paper());
        assert_eq!(paper.m_values, vec![8, 16, 32]);
        assert_eq!(paper.interferer_snr_offsets_db, vec![-5.0, -10.0]);
        assert_eq!(paper.trials, 500);
        let desk = parse_scenario_str(DESK).unwrap();
        assert_eq!(desk.geometry, FrameGeometry::desk());
        let ChannelModel::Cm1 { params, truncation_ns } = desk.channel else { panic!("desk uses cm1") };
        assert_eq!((params.ray_rate, truncation_ns), (2.5, 60.0));
        assert_eq!(desk.estimators, vec![Estimator::CoarseOnly, Estimator::TwoStage]);
    }

    #[test]
    fn emitted_config_round_trips() {
        for text in [PAPER_CM1, DESK] {
            let cfg = parse_scenario_str(text).unwrap();
            let emitted = emit_config(&cfg);
            assert_eq!(parse_scenario_str(&emitted).unwrap(), cfg);
            assert_eq!(emit_config(&parse_scenario_str(&emitted).unwrap()), emitted);
        }
        let mut cfg = parse_scenario_str(DESK).unwrap();
        cfg.channel = ChannelModel::Identity;
        cfg.snr_points_db = vec![f64::INFINITY, 3.5];
        cfg.delay_law = DelayLaw::GridOffset(1.4);
        cfg.fine_k = Some(5);
        cfg.estimators = vec![Estimator::TwoStage];
        assert_eq!(parse_scenario_str(&emit_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn frame_spill_names_the_key() {
        let text = DESK.replace("t_f_ns = 35", "t_f_ns = 30");
        let e = parse_scenario_str(&text).unwrap_err();
        assert_eq!(e.key, "geometry.t_f_ns");
        assert!(e.message.contains("frame spill"));
        let line = DESK.lines().position(|l| l.starts_with("t_f_ns")).unwrap() + 1;
        assert_eq!(e.line, Some(line));
        assert!(e.to_string().starts_with(&format!("line {line}: geometry.t_f_ns")));
    }

    #[test]
    fn structural_errors() {
        let e = parse_scenario_str(&DESK.replace("[run]", "[runn]")).unwrap_err();
        assert_eq!(e.message, "unknown section");
        let e = parse_scenario_str(&DESK.replace("trials = 50", "trials = 50\ntrials = 5")).unwrap_err();
        assert_eq!(e.message, "duplicate key");
        let e = parse_scenario_str(&DESK.replace("trials = 50", "trails = 50")).unwrap_err();
        assert_eq!(e.key, "run.trails");
        let e = parse_scenario_str(&DESK.replace("trials = 50", "trials = many")).unwrap_err();
        assert_eq!(e.key, "run.trials");
        let e = parse_scenario_str(&DESK.replace("trials = 50\n", "")).unwrap_err();
        assert_eq!((e.key.as_str(), e.message.as_str()), ("run.trials", "missing key"));
        let e = parse_scenario_str(&DESK.replace("format = 1", "format = 2")).unwrap_err();
        assert_eq!(e.key, "format");
        assert!(parse_scenario_str(&DESK.replace("modes = nda, da", "modes = nda, xx")).is_err());
        assert!(parse_scenario_str(&DESK.replace("count = 2", "count = 3")).is_err());
    }

    #[test]
    fn manifest_section_is_ignored() {
        let text = format!("{DESK}\n[manifest]\nversion = 0.1.0\nanything = goes\n");
        assert_eq!(parse_scenario_str(&text).unwrap(), parse_scenario_str(DESK).unwrap());
    }

    #[test]
    fn list_helpers() {
        assert_eq!(parse_estimators("both").unwrap(), vec![Estimator::CoarseOnly, Estimator::TwoStage]);
        assert_eq!(parse_estimators("two_stage").unwrap(), vec![Estimator::TwoStage]);
        assert_eq!(parse_modes("da").unwrap(), vec![Mode::Da]);
        assert_eq!(parse_delay_law("grid_offset:1.4").unwrap(), DelayLaw::GridOffset(1.4));
        assert!(parse_delay_law("sideways").is_err());
    }
}
