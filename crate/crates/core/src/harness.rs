//! Seeded Monte Carlo trials and sweep aggregation.
//!
//! Timing truth is the leading edge of the desired user's received symbol:
//! the first path of its first-frame pulse. Every offset is circular on the
//! symbol period.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{self, ChannelRealization, Cm1Params, NoiseSpec, UserLink};
use crate::error::{Error, Result};
use crate::geometry::FrameGeometry;
use crate::rng::{derive_seed, substream, Role};
use crate::signal::SampledSignal;
use crate::sync::{self, Mode, SyncConfig};
use crate::waveform::{self, SymbolStream};

/// z for a two-sided 95% normal interval.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    CoarseOnly,
    TwoStage,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::CoarseOnly => "coarse_only",
            Estimator::TwoStage => "two_stage",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "coarse_only" => Ok(Estimator::CoarseOnly),
            "two_stage" => Ok(Estimator::TwoStage),
            other => Err(format!("unknown estimator `{other}` (expected coarse_only or two_stage)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// Single unit tap.
    Identity,
    Cm1 {
        params: Cm1Params,
        truncation_ns: f64,
    },
}

/// How the desired user's leading edge is placed in each trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayLaw {
    /// Uniform over the sample grid of `[0, T_s)`.
    Uniform,
    /// Uniform over the coarse candidate grid.
    CoarseGrid,
    /// A uniformly chosen coarse grid point plus a fixed offset in ns.
    GridOffset(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: FrameGeometry,
    pub pulse_shape_factor: f64,
    pub channel: ChannelModel,
    pub m_values: Vec<usize>,
    pub modes: Vec<Mode>,
    pub coarse_step: f64,
    pub t_corr: f64,
    pub delta: f64,
    /// Fine-stage symbol pairs; `None` means `K = M`.
    pub fine_k: Option<usize>,
    /// Received per-symbol energy of each interferer relative to the desired user, in dB.
    pub interferer_snr_offsets_db: Vec<f64>,
    /// `E_s/N_0` points in dB; `f64::INFINITY` is noiseless.
    pub snr_points_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub estimators: Vec<Estimator>,
    pub acquisition_threshold: f64,
    pub delay_law: DelayLaw,
}

impl ScenarioConfig {
    /// Single-user, identity-channel scenario on `geometry` with default
    /// synchronizer settings; callers adjust fields from here.
    pub fn basic(geometry: FrameGeometry) -> Self {
        Self {
            geometry,
            pulse_shape_factor: waveform::DEFAULT_SHAPE_FACTOR,
            channel: ChannelModel::Identity,
            m_values: vec![32],
            modes: vec![Mode::Nda, Mode::Da],
            coarse_step: sync::DEFAULT_COARSE_STEP_NS,
            t_corr: sync::DEFAULT_T_CORR_NS,
            delta: sync::DEFAULT_DELTA_NS,
            fine_k: None,
            interferer_snr_offsets_db: Vec::new(),
            snr_points_db: vec![f64::INFINITY],
            trials: 50,
            master_seed: 1,
            estimators: vec![Estimator::CoarseOnly, Estimator::TwoStage],
            acquisition_threshold: geometry.t_p(),
            delay_law: DelayLaw::Uniform,
        }
    }

    pub fn n_users(&self) -> usize {
        1 + self.interferer_snr_offsets_db.len()
    }

    pub fn sync_config(&self, m: usize, mode: Mode) -> SyncConfig {
        SyncConfig {
            m,
            mode,
            coarse_step: self.coarse_step,
            t_corr: self.t_corr,
            delta: self.delta,
            k: self.fine_k.unwrap_or(m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.acquisition_threshold.is_finite() && self.acquisition_threshold > 0.0) {
            return bad(format!("acquisition threshold must be positive, got {}", self.acquisition_threshold));
        }
        if self.m_values.is_empty()
            || self.modes.is_empty()
            || self.estimators.is_empty()
            || self.snr_points_db.is_empty()
        {
            return bad("m, modes, estimators and snr points must be nonempty".into());
        }
        if self.snr_points_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("snr points must be finite or noiseless".into());
        }
        if self.interferer_snr_offsets_db.iter().any(|x| !x.is_finite()) {
            return bad("interferer offsets must be finite".into());
        }
        if self.n_users() > 4096 {
            return bad("at most 4095 interferers".into());
        }
        if let ChannelModel::Cm1 { params, truncation_ns } = &self.channel {
            params.validate()?;
            if !(truncation_ns.is_finite() && *truncation_ns > 0.0) {
                return bad(format!("channel truncation must be positive, got {truncation_ns}"));
            }
            if *truncation_ns >= self.geometry.t_s() {
                return bad(format!("channel truncation {truncation_ns} ns must be below T_s"));
            }
        }
        if let DelayLaw::GridOffset(x) = self.delay_law {
            if self.geometry.exact_samples(x).is_none() {
                return bad(format!("grid offset {x} ns is not on the sample grid"));
            }
        }
        waveform::make_pulse(&self.geometry, self.pulse_shape_factor)?;
        for &m in &self.m_values {
            for &mode in &self.modes {
                self.sync_config(m, mode).validate(&self.geometry)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub true_tau: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub err_coarse: f64,
    pub err_fine: f64,
    pub seed: u64,
}

impl TrialResult {
    pub fn error(&self, estimator: Estimator) -> f64 {
        match estimator {
            Estimator::CoarseOnly => self.err_coarse,
            Estimator::TwoStage => self.err_fine,
        }
    }

    pub fn acquired(&self, estimator: Estimator, threshold: f64) -> bool {
        self.error(estimator) <= threshold
    }
}

/// `min(|a - b|, T_s - |a - b|)` for offsets on a circle of circumference `t_s`.
pub fn circular_error(a: f64, b: f64, t_s: f64) -> f64 {
    let d = (a - b).abs() % t_s;
    d.min(t_s - d)
}

/// The received observation for one trial, before noise.
#[derive(Debug, Clone)]
pub struct TrialSignal {
    pub clean: SampledSignal,
    /// Desired user's received per-symbol energy.
    pub reference_energy: f64,
    pub true_tau: f64,
    /// Desired user's symbols aligned to the observation's symbol slots.
    pub desired_symbols: SymbolStream,
    pub seed: u64,
}

/// Synthesizes the noiseless multi-user observation for trial `trial_index`.
/// The desired user is user 0; interferers are users `1..`.
pub fn synthesize_trial(cfg: &ScenarioConfig, sync_cfg: &SyncConfig, trial_index: u64) -> Result<TrialSignal> {
    let g = &cfg.geometry;
    let master = cfg.master_seed;
    let s = g.symbol_len();
    // one extra symbol covers the slot before the observation starts
    let n_obs = sync_cfg.m.max(sync_cfg.k) + 3;
    let n_tx = n_obs + 1;
    let pulse = waveform::make_pulse(g, cfg.pulse_shape_factor)?;

    let mut received = Vec::with_capacity(cfg.n_users());
    let mut reference_energy = 0.0;
    let mut true_tau = 0.0;
    let mut desired_symbols = None;
    for user in 0..cfg.n_users() as u64 {
        let code = waveform::gen_th_code(g, derive_seed(master, trial_index, Role::Code, user));
        let channel = match &cfg.channel {
            ChannelModel::Identity => ChannelRealization::identity(g.f_s()),
            ChannelModel::Cm1 { params, truncation_ns } => channel::draw_cm1(
                params,
                derive_seed(master, trial_index, Role::Channel, user),
                *truncation_ns,
                g.f_s(),
            )?,
        };
        let symbols = if user == 0 && sync_cfg.mode == Mode::Da {
            SymbolStream::training(n_tx)
        } else {
            SymbolStream::random(n_tx, &mut substream(master, trial_index, Role::Symbols, user))
        };
        let template = waveform::build_tx_template(&pulse, &code, g)?;
        let e_r = channel::convolve(&template, &channel)?.energy();

        let mut delays = substream(master, trial_index, Role::Delays, user);
        let (energy, shift) = if user == 0 {
            let edge = desired_edge(cfg, &mut delays);
            true_tau = g.samples_to_ns(edge);
            let lead = code.chips()[0] * g.chip_len();
            reference_energy = e_r;
            (1.0, (edge + s - lead % s) % s)
        } else {
            let offset = cfg.interferer_snr_offsets_db[user as usize - 1];
            let target = reference_energy * 10f64.powf(offset / 10.0);
            (target / e_r, delays.random_range(0..s))
        };

        let tx = waveform::synthesize_tx(&template, &symbols, energy, n_tx)?;
        if user == 0 {
            desired_symbols = Some(symbols.skip(1)?);
        }
        let link = UserLink::new(energy, code, g.samples_to_ns(shift), channel, symbols, g)?;
        received.push(channel::apply_link(&tx, &link)?.window(s, n_obs * s));
    }
    let mut clean = channel::superpose(&received)?;
    clean = SampledSignal::new(clean.into_samples(), g.f_s(), 0.0)?;
    Ok(TrialSignal {
        clean,
        reference_energy,
        true_tau,
        desired_symbols: desired_symbols.expect("user 0 always present"),
        seed: derive_seed(master, trial_index, Role::Trial, 0),
    })
}

fn desired_edge<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> usize {
    let g = &cfg.geometry;
    let s = g.symbol_len();
    let step = g.to_samples(cfg.coarse_step);
    match cfg.delay_law {
        DelayLaw::Uniform => rng.random_range(0..s),
        DelayLaw::CoarseGrid => rng.random_range(0..s / step) * step,
        DelayLaw::GridOffset(x) => (rng.random_range(0..s / step) * step + g.to_samples(x)) % s,
    }
}

fn noise_for(snr_db: f64, seed: u64) -> Result<NoiseSpec> {
    if snr_db == f64::INFINITY {
        Ok(NoiseSpec::noiseless())
    } else {
        NoiseSpec::new(snr_db, seed)
    }
}

fn estimate(
    cfg: &ScenarioConfig,
    sync_cfg: &SyncConfig,
    signal: &TrialSignal,
    snr_db: f64,
    trial_index: u64,
) -> Result<TrialResult> {
    let g = &cfg.geometry;
    let noise = noise_for(snr_db, derive_seed(cfg.master_seed, trial_index, Role::Noise, 0))?;
    let r = channel::add_awgn(&signal.clean, &noise, signal.reference_energy)?;
    let training = (sync_cfg.mode == Mode::Da).then_some(&signal.desired_symbols);
    let est = sync::two_stage_estimate(&r, sync_cfg, g, training)?;
    let t_s = g.t_s();
    Ok(TrialResult {
        true_tau: signal.true_tau,
        tau1: est.tau1(),
        tau2: est.tau2(),
        err_coarse: circular_error(est.tau1(), signal.true_tau, t_s),
        err_fine: circular_error(est.tau2(), signal.true_tau, t_s),
        seed: signal.seed,
    })
}

fn tag(trial: u64, seed: u64) -> impl FnOnce(Error) -> Error {
    move |e| Error::Trial { trial, seed, source: Box::new(e) }
}

/// One trial at one SNR point. Replaying the same `(cfg, sync_cfg, trial_index)`
/// is bit-identical; the noise stream does not depend on `snr_db`.
pub fn run_trial(cfg: &ScenarioConfig, sync_cfg: &SyncConfig, snr_db: f64, trial_index: u64) -> Result<TrialResult> {
    let seed = derive_seed(cfg.master_seed, trial_index, Role::Trial, 0);
    let signal = synthesize_trial(cfg, sync_cfg, trial_index).map_err(tag(trial_index, seed))?;
    estimate(cfg, sync_cfg, &signal, snr_db, trial_index).map_err(tag(trial_index, seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub normalized_mse: f64,
    pub p_acq: f64,
    /// 95% normal-approximation half-width for `p_acq`.
    pub ci_halfwidth: f64,
    /// 95% half-width for `normalized_mse` from the sample standard deviation.
    pub mse_ci_halfwidth: f64,
    pub trials: usize,
}

pub fn aggregate(results: &[TrialResult], estimator: Estimator, t_s: f64, threshold: f64) -> Result<Aggregate> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate zero trials".into()));
    }
    let n = results.len() as f64;
    let sq: Vec<f64> = results.iter().map(|r| (r.error(estimator) / t_s).powi(2)).collect();
    let normalized_mse = sq.iter().sum::<f64>() / n;
    let hits = results.iter().filter(|r| r.acquired(estimator, threshold)).count();
    let p_acq = hits as f64 / n;
    let ci_halfwidth = Z95 * (p_acq * (1.0 - p_acq) / n).sqrt();
    let mse_ci_halfwidth = if results.len() > 1 {
        let var = sq.iter().map(|x| (x - normalized_mse).powi(2)).sum::<f64>() / (n - 1.0);
        Z95 * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(Aggregate { normalized_mse, p_acq, ci_halfwidth, mse_ci_halfwidth, trials: results.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub snr_db: f64,
    pub m: usize,
    pub mode: Mode,
    pub estimator: Estimator,
    pub n_users: usize,
    pub normalized_mse: f64,
    pub p_acq: f64,
    pub trials: usize,
    pub ci_halfwidth: f64,
    pub mse_ci_halfwidth: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

pub const CSV_HEADER: &str = "snr_db,m,mode,estimator,n_users,norm_mse,p_acq,trials,ci95";

fn fmt_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

impl MetricsTable {
    pub fn find(&self, snr_db: f64, m: usize, mode: Mode, estimator: Estimator) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.snr_db == snr_db && r.m == m && r.mode == mode && r.estimator == estimator)
    }

    /// CSV with a fixed column order, 17 significant digits and LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt_float(r.snr_db),
                r.m,
                r.mode.as_str(),
                r.estimator.as_str(),
                r.n_users,
                fmt_float(r.normalized_mse),
                fmt_float(r.p_acq),
                r.trials,
                fmt_float(r.ci_halfwidth),
            ));
        }
        out
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.mode, a.m)
                .cmp(&(b.mode, b.m))
                .then(a.snr_db.total_cmp(&b.snr_db))
                .then(a.estimator.cmp(&b.estimator))
                .then(a.n_users.cmp(&b.n_users))
        });
    }
}

/// Runs every `(mode, M, snr)` point with `cfg.trials` trials on the global
/// rayon pool. Results do not depend on the pool size.
pub fn sweep(cfg: &ScenarioConfig) -> Result<MetricsTable> {
    cfg.validate()?;
    let mut table = MetricsTable::default();
    for &mode in &cfg.modes {
        for &m in &cfg.m_values {
            let sync_cfg = cfg.sync_config(m, mode);
            // trial-major: one synthesis per trial serves every SNR point
            let per_trial: Vec<Vec<TrialResult>> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let seed = derive_seed(cfg.master_seed, t, Role::Trial, 0);
                    let signal = synthesize_trial(cfg, &sync_cfg, t).map_err(tag(t, seed))?;
                    cfg.snr_points_db
                        .iter()
                        .map(|&snr| estimate(cfg, &sync_cfg, &signal, snr, t).map_err(tag(t, seed)))
                        .collect()
                })
                .collect::<Result<_>>()?;
            for (i, &snr) in cfg.snr_points_db.iter().enumerate() {
                let results: Vec<TrialResult> = per_trial.iter().map(|v| v[i]).collect();
                for &est in &cfg.estimators {
                    let a = aggregate(&results, est, cfg.geometry.t_s(), cfg.acquisition_threshold)?;
                    table.rows.push(MetricsRow {
                        snr_db: snr,
                        m,
                        mode,
                        estimator: est,
                        n_users: cfg.n_users(),
                        normalized_mse: a.normalized_mse,
                        p_acq: a.p_acq,
                        trials: a.trials,
                        ci_halfwidth: a.ci_halfwidth,
                        mse_ci_halfwidth: a.mse_ci_halfwidth,
                    });
                }
            }
        }
    }
    table.sort();
    Ok(table)
}

/// [`sweep`] on a dedicated pool of `workers` threads.
pub fn sweep_with_workers(cfg: &ScenarioConfig, workers: usize) -> Result<MetricsTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| sweep(cfg))
}
