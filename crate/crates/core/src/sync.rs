//! Dirty-template timing acquisition: the symbol-lag correlator, the coarse
//! argmax over a candidate grid (NDA and DA), and the windowed fine scan.
//!
//! All offsets are measured from sample 0 of the observation and handled on
//! the sample grid internally.

use crate::error::{Error, Result};
use crate::geometry::FrameGeometry;
use crate::signal::SampledSignal;
use crate::waveform::SymbolStream;

pub const DEFAULT_COARSE_STEP_NS: f64 = 4.0;
pub const DEFAULT_T_CORR_NS: f64 = 4.0;
pub const DEFAULT_DELTA_NS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Non-data-aided: mean of squared correlations.
    Nda,
    /// Data-aided: sign-corrected mean of correlations, then squared.
    Da,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Nda => "nda",
            Mode::Da => "da",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nda" => Ok(Mode::Nda),
            "da" => Ok(Mode::Da),
            other => Err(format!("unknown mode `{other}` (expected nda or da)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncConfig {
    /// Observation length in symbols.
    pub m: usize,
    pub mode: Mode,
    pub coarse_step: f64,
    /// Fine window width; 0 disables the fine stage.
    pub t_corr: f64,
    pub delta: f64,
    /// Symbol pairs summed by the fine stage.
    pub k: usize,
}

impl SyncConfig {
    /// Defaults: 4 ns coarse grid, 4 ns fine window, 0.2 ns fine step, `K = M`.
    pub fn new(m: usize, mode: Mode) -> Self {
        Self { m, mode, coarse_step: DEFAULT_COARSE_STEP_NS, t_corr: DEFAULT_T_CORR_NS, delta: DEFAULT_DELTA_NS, k: m }
    }

    pub fn fine_enabled(&self) -> bool {
        self.t_corr > 0.0
    }

    pub fn validate(&self, geometry: &FrameGeometry) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 {
            return bad("M must be at least 1".into());
        }
        let Some(step) = geometry.exact_samples(self.coarse_step).filter(|&s| s > 0) else {
            return bad(format!("coarse step {} ns is not a positive whole number of samples", self.coarse_step));
        };
        if !geometry.symbol_len().is_multiple_of(step) {
            return bad(format!("coarse step {} ns does not divide T_s = {} ns", self.coarse_step, geometry.t_s()));
        }
        if self.t_corr == 0.0 {
            return Ok(());
        }
        if self.t_corr.is_nan() || self.t_corr <= 0.0 || geometry.exact_samples(self.t_corr).is_none() {
            return bad(format!("T_corr {} ns is not a whole number of samples", self.t_corr));
        }
        if !(self.delta > 0.0 && self.delta <= self.t_corr) {
            return bad(format!(
                "need 0 < delta <= T_corr, got delta = {} ns, T_corr = {} ns",
                self.delta, self.t_corr
            ));
        }
        if geometry.exact_samples(self.delta).filter(|&d| d > 0).is_none() {
            return bad(format!("delta {} ns is not a positive whole number of samples", self.delta));
        }
        if self.t_corr < self.coarse_step / 2.0 {
            return bad(format!(
                "T_corr {} ns is narrower than half the coarse step {} ns",
                self.t_corr, self.coarse_step
            ));
        }
        if self.k == 0 {
            return bad("K must be at least 1".into());
        }
        Ok(())
    }

    /// Number of coarse candidates across one symbol.
    pub fn n_candidates(&self, geometry: &FrameGeometry) -> usize {
        geometry.symbol_len() / geometry.to_samples(self.coarse_step)
    }

    /// `N = ceil(T_corr / delta)`; the fine stage scans `n` in `[-N+1, N-1]`.
    pub fn fine_half_span(&self, geometry: &FrameGeometry) -> usize {
        if !self.fine_enabled() {
            return 0;
        }
        geometry.to_samples(self.t_corr).div_ceil(geometry.to_samples(self.delta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseEstimate {
    pub tau1: f64,
    /// Index of `tau1` in the candidate grid.
    pub index: usize,
    pub objective_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineEstimate {
    pub tau2: f64,
    pub n_opt: i64,
    /// `Z_n` for `n = -N+1 ..= N-1`; empty when the fine stage is disabled.
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPartition {
    pub eps_a: f64,
    pub eps_b: f64,
    pub tau_tilde: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageEstimate {
    pub coarse: CoarseEstimate,
    pub fine: FineEstimate,
}

impl TwoStageEstimate {
    pub fn tau1(&self) -> f64 {
        self.coarse.tau1
    }
    pub fn tau2(&self) -> f64 {
        self.fine.tau2
    }
}

// Plain left-to-right accumulation: equal nonzero products in equal order
// give bit-identical sums regardless of where the window starts.
fn lag_dot(r: &[f64], a: usize, b: usize, len: usize) -> f64 {
    let mut acc = 0.0;
    for (x, y) in r[a..a + len].iter().zip(&r[b..b + len]) {
        acc += x * y;
    }
    acc
}

/// Offset in samples from an offset in ns, checked against `[0, T_s)`.
fn offset_samples(tau: f64, geometry: &FrameGeometry) -> Result<usize> {
    if !(tau.is_finite() && tau >= 0.0 && tau < geometry.t_s()) {
        return Err(Error::InvalidArgument(format!("offset {tau} ns outside [0, {})", geometry.t_s())));
    }
    Ok(geometry.to_samples(tau) % geometry.symbol_len())
}

/// `x(k; tau) = int_0^{T_s} r(t + tau + (k-1)T_s) r(t + tau + k T_s) dt`.
pub fn dirty_correlate(r: &SampledSignal, tau: f64, k: usize, geometry: &FrameGeometry) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let t = offset_samples(tau, geometry)?;
    Ok(correlate_at(r.samples(), t, k, geometry.symbol_len())? * geometry.dt())
}

fn correlate_at(r: &[f64], t: usize, k: usize, s: usize) -> Result<f64> {
    let need = t + (k + 1) * s;
    if need > r.len() {
        return Err(Error::SignalTooShort { need, have: r.len() });
    }
    Ok(lag_dot(r, t + (k - 1) * s, t + k * s, s))
}

/// Splits `eps * E_R` at a circular offset `tau_tilde = (tau_u - tau) mod T_s`.
///
/// `eps_b` is the energy of `p_R` on `[0, T_s - tau_tilde)` and multiplies
/// `s(k) s(k-1)` in the noiseless correlation; `eps_a` is the remaining tail
/// `[T_s - tau_tilde, T_s)`, which multiplies `s(k-1) s(k-2)`.
pub fn energy_partition(
    p_r: &SampledSignal,
    tau_tilde: f64,
    eps: f64,
    geometry: &FrameGeometry,
) -> Result<EnergyPartition> {
    let s = geometry.symbol_len();
    if p_r.len() > s && p_r.samples()[s..].iter().any(|&x| x != 0.0) {
        return Err(Error::SupportExceedsSymbol {
            end: geometry.samples_to_ns(p_r.support_end()),
            t_s: geometry.t_s(),
        });
    }
    let t = offset_samples(tau_tilde, geometry)?;
    let x = p_r.samples();
    let cut = (s - t).min(x.len());
    let dt = geometry.dt();
    let head: f64 = x[..cut].iter().map(|v| v * v).sum::<f64>() * dt;
    let tail: f64 = x[cut..x.len().min(s)].iter().map(|v| v * v).sum::<f64>() * dt;
    Ok(EnergyPartition { eps_a: eps * tail, eps_b: eps * head, tau_tilde })
}

/// DA combining weights `s(k) s(k-1)` for `k = 1..=M`.
fn da_weights(training: &SymbolStream, m: usize) -> Result<Vec<f64>> {
    let s = training.symbols();
    if s.len() < m + 1 {
        return Err(Error::InvalidArgument(format!("DA mode needs {} training symbols, got {}", m + 1, s.len())));
    }
    Ok((1..=m).map(|k| f64::from(s[k] * s[k - 1])).collect())
}

/// Objective of candidate `index`: NDA `mean x^2`, DA `(mean w_k x)^2`.
pub fn coarse_objective(
    r: &SampledSignal,
    index: usize,
    cfg: &SyncConfig,
    geometry: &FrameGeometry,
    training: Option<&SymbolStream>,
) -> Result<f64> {
    let weights = match cfg.mode {
        Mode::Da => Some(da_weights(training.ok_or_else(missing_training)?, cfg.m)?),
        Mode::Nda => None,
    };
    objective_at(r.samples(), index, cfg, geometry, weights.as_deref())
}

fn missing_training() -> Error {
    Error::InvalidArgument("DA mode requires a training sequence".into())
}

fn objective_at(
    r: &[f64],
    index: usize,
    cfg: &SyncConfig,
    geometry: &FrameGeometry,
    weights: Option<&[f64]>,
) -> Result<f64> {
    let s = geometry.symbol_len();
    let t = index * geometry.to_samples(cfg.coarse_step);
    let dt = geometry.dt();
    let m = cfg.m as f64;
    match weights {
        None => {
            let mut acc = 0.0;
            for k in 1..=cfg.m {
                let x = correlate_at(r, t, k, s)? * dt;
                acc += x * x;
            }
            Ok(acc / m)
        }
        Some(w) => {
            let mut acc = 0.0;
            for k in 1..=cfg.m {
                acc += w[k - 1] * correlate_at(r, t, k, s)? * dt;
            }
            let mean = acc / m;
            Ok(mean * mean)
        }
    }
}

/// Picks the maximum; among exact ties, the last candidate of a circular run
/// of maxima (the latest boundary that still captures the whole symbol).
fn rising_edge_argmax(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = values.len();
    let is_max = |i: usize| values[i] == max;
    (0..n).find(|&i| is_max(i) && !is_max((i + 1) % n)).unwrap_or(0)
}

pub fn coarse_estimate(
    r: &SampledSignal,
    cfg: &SyncConfig,
    geometry: &FrameGeometry,
    training: Option<&SymbolStream>,
) -> Result<CoarseEstimate> {
    cfg.validate(geometry)?;
    if r.f_s() != geometry.f_s() {
        return Err(Error::SampleRateMismatch(r.f_s(), geometry.f_s()));
    }
    let n = cfg.n_candidates(geometry);
    let step = geometry.to_samples(cfg.coarse_step);
    let need = (n - 1) * step + (cfg.m + 1) * geometry.symbol_len();
    if need > r.len() {
        return Err(Error::InvalidArgument(format!(
            "M = {} needs {need} samples of observation, have {}",
            cfg.m,
            r.len()
        )));
    }
    let weights = match cfg.mode {
        Mode::Da => Some(da_weights(training.ok_or_else(missing_training)?, cfg.m)?),
        Mode::Nda => None,
    };
    let objective_values =
        (0..n).map(|i| objective_at(r.samples(), i, cfg, geometry, weights.as_deref())).collect::<Result<Vec<_>>>()?;
    let index = rising_edge_argmax(&objective_values);
    Ok(CoarseEstimate { tau1: geometry.samples_to_ns(index * step), index, objective_values })
}

/// Scans `[tau1 - T_corr, tau1 + T_corr]` in steps of `delta`, scoring each
/// start `tau1 + n*delta` by `Z_n = sum_k |int_w r(t + kT_s) r(t + (k+1)T_s) dt|`
/// over a window of width `T_corr`. Exact ties resolve to the end of the run
/// of maxima containing `n = 0` (or of the earliest run if none does): the
/// latest window start that still holds the pulse found by the coarse stage.
pub fn fine_search(r: &SampledSignal, tau1: f64, cfg: &SyncConfig, geometry: &FrameGeometry) -> Result<FineEstimate> {
    cfg.validate(geometry)?;
    let t1 = offset_samples(tau1, geometry)?;
    if !cfg.fine_enabled() {
        return Ok(FineEstimate { tau2: tau1, n_opt: 0, z: Vec::new() });
    }
    let s = geometry.symbol_len();
    let w = geometry.to_samples(cfg.t_corr);
    let d = geometry.to_samples(cfg.delta);
    let half = cfg.fine_half_span(geometry) as i64;
    let need = (cfg.k + 2) * s + w;
    if need > r.len() {
        return Err(Error::SignalTooShort { need, have: r.len() });
    }
    let x = r.samples();
    let dt = geometry.dt();
    let start_of = |n: i64| (t1 as i64 + n * d as i64).rem_euclid(s as i64) as usize;
    let z: Vec<f64> = (-half + 1..half)
        .map(|n| {
            let start = start_of(n);
            (0..cfg.k).map(|k| (lag_dot(x, start + k * s, start + (k + 1) * s, w) * dt).abs()).sum()
        })
        .collect();
    let n_opt = run_end_argmax(&z, (half - 1) as usize) as i64 - half + 1;
    Ok(FineEstimate { tau2: geometry.samples_to_ns(start_of(n_opt)), n_opt, z })
}

fn run_end_argmax(z: &[f64], center: usize) -> usize {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = if z[center] == max { center } else { z.iter().position(|&v| v == max).unwrap_or(0) };
    let len = z[start..].iter().take_while(|&&v| v == max).count();
    start + len.max(1) - 1
}

pub fn two_stage_estimate(
    r: &SampledSignal,
    cfg: &SyncConfig,
    geometry: &FrameGeometry,
    training: Option<&SymbolStream>,
) -> Result<TwoStageEstimate> {
    let coarse = coarse_estimate(r, cfg, geometry, training)?;
    let fine = fine_search(r, coarse.tau1, cfg, geometry)?;
    Ok(TwoStageEstimate { coarse, fine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{build_tx_template, gen_th_code, make_pulse, synthesize_tx, ThCode, DEFAULT_SHAPE_FACTOR};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn template(g: &FrameGeometry, code: &ThCode) -> SampledSignal {
        build_tx_template(&make_pulse(g, DEFAULT_SHAPE_FACTOR).unwrap(), code, g).unwrap()
    }

    /// Noiseless identity-channel observation of `n_obs` symbols in which
    /// transmitted symbol 1's first pulse starts at sample `edge`.
    fn observation(
        g: &FrameGeometry,
        code: &ThCode,
        symbols: &SymbolStream,
        edge: usize,
        n_obs: usize,
    ) -> SampledSignal {
        let s = g.symbol_len();
        let tx = synthesize_tx(&template(g, code), symbols, 1.0, symbols.len()).unwrap();
        let lead = s + code.chips()[0] * g.chip_len();
        let r = tx.window(lead - edge, n_obs * s);
        SampledSignal::new(r.into_samples(), g.f_s(), 0.0).unwrap()
    }

    fn random_symbols(n: usize, seed: u64) -> SymbolStream {
        SymbolStream::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn zero_signal_correlates_to_zero() {
        let g = FrameGeometry::desk();
        let r = SampledSignal::zeros(4 * g.symbol_len(), g.f_s()).unwrap();
        assert_eq!(dirty_correlate(&r, 13.0, 2, &g).unwrap(), 0.0);
    }

    #[test]
    fn correlate_rejects_bad_arguments() {
        let g = FrameGeometry::desk();
        let r = SampledSignal::zeros(3 * g.symbol_len(), g.f_s()).unwrap();
        assert!(dirty_correlate(&r, 0.0, 0, &g).is_err());
        assert!(dirty_correlate(&r, g.t_s(), 1, &g).is_err());
        assert!(dirty_correlate(&r, -1.0, 1, &g).is_err());
        assert!(matches!(dirty_correlate(&r, 1.0, 2, &g), Err(Error::SignalTooShort { .. })));
    }

    #[test]
    fn aligned_identical_symbols_give_template_energy() {
        let g = FrameGeometry::desk();
        let code = gen_th_code(&g, 4);
        let edge = 1234;
        let tau = g.samples_to_ns(edge);
        let same = SymbolStream::from_symbols(vec![1; 6]).unwrap();
        let r = observation(&g, &code, &same, edge, 4);
        let e_r = template(&g, &code).energy();
        // brute-force integration of the aligned product
        let s = g.symbol_len();
        let brute: f64 = (0..s).map(|n| r.samples()[edge + n] * r.samples()[edge + s + n]).sum::<f64>() * g.dt();
        let x = dirty_correlate(&r, tau, 1, &g).unwrap();
        assert!((x - e_r).abs() < 1e-12 * e_r);
        assert_eq!(x, brute);

        let flip = SymbolStream::from_symbols(vec![1, 1, -1, 1, 1, 1]).unwrap();
        let r = observation(&g, &code, &flip, edge, 4);
        assert_eq!(dirty_correlate(&r, tau, 1, &g).unwrap(), -x);
    }

    #[test]
    fn noiseless_correlation_decomposes_into_partition() {
        let g = FrameGeometry::desk();
        let s = g.symbol_len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let code = gen_th_code(&g, trial);
            let p_r = template(&g, &code);
            let syms = random_symbols(10, 100 + trial);
            let edge = rng.random_range(s / 2..s);
            let r = observation(&g, &code, &syms, edge, 8);
            // the template starts at its own sample 0; its first pulse sits c0 chips in
            let tpl_start = edge - code.chips()[0] * g.chip_len();
            let a = rng.random_range(1..=tpl_start);
            let tau = g.samples_to_ns(tpl_start - a);
            let part = energy_partition(&p_r, g.samples_to_ns(a), 1.0, &g).unwrap();
            let sy = syms.symbols();
            for k in 1..=5 {
                // window k-1 holds the tail of tx symbol k-1 and the head of k
                let (s0, s1, s2) = (f64::from(sy[k - 1]), f64::from(sy[k]), f64::from(sy[k + 1]));
                let want = s1 * (s2 * part.eps_b + s0 * part.eps_a);
                let x = dirty_correlate(&r, tau, k, &g).unwrap();
                assert!((x - want).abs() < 1e-9, "trial {trial} k {k}: {x} vs {want}");
            }
        }
    }

    #[test]
    fn partition_sums_to_total_energy() {
        for g in [FrameGeometry::desk(), FrameGeometry::paper()] {
            let p_r = template(&g, &gen_th_code(&g, 9));
            let total = p_r.energy();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..100 {
                let tau = g.samples_to_ns(rng.random_range(0..g.symbol_len()));
                let eps = rng.random_range(0.01..100.0);
                let p = energy_partition(&p_r, tau, eps, &g).unwrap();
                assert!(p.eps_a >= 0.0 && p.eps_b >= 0.0);
                assert!(((p.eps_a + p.eps_b) - eps * total).abs() <= 1e-9 * eps * total);
            }
            let p = energy_partition(&p_r, 0.0, 2.0, &g).unwrap();
            assert_eq!(p.eps_a, 0.0);
            assert!((p.eps_b - 2.0 * total).abs() < 1e-12 * total);
        }
    }

    #[test]
    fn partition_at_half_symbol_splits_frames() {
        let g = FrameGeometry::paper();
        let p_r = template(&g, &gen_th_code(&g, 2012));
        let p = energy_partition(&p_r, g.t_s() / 2.0, 3.0, &g).unwrap();
        let half = g.symbol_len() / 2;
        let first: f64 = p_r.samples()[..half].iter().map(|x| x * x).sum::<f64>() * g.dt();
        let last: f64 = p_r.samples()[half..].iter().map(|x| x * x).sum::<f64>() * g.dt();
        assert!((first - 16.0).abs() < 1e-9 && (last - 16.0).abs() < 1e-9);
        assert!((p.eps_a - 3.0 * last).abs() < 1e-9);
        assert!((p.eps_b - 3.0 * first).abs() < 1e-9);
    }

    #[test]
    fn partition_rejects_spilling_template() {
        let g = FrameGeometry::desk();
        let p = SampledSignal::new(vec![1.0; g.symbol_len() + 1], g.f_s(), 0.0).unwrap();
        assert!(matches!(energy_partition(&p, 0.0, 1.0, &g), Err(Error::SupportExceedsSymbol { .. })));
    }

    fn brute_objective(r: &SampledSignal, tau: f64, cfg: &SyncConfig, g: &FrameGeometry, w: Option<&[i8]>) -> f64 {
        let xs: Vec<f64> = (1..=cfg.m).map(|k| dirty_correlate(r, tau, k, g).unwrap()).collect();
        match w {
            None => xs.iter().map(|x| x * x).sum::<f64>() / cfg.m as f64,
            Some(s) => {
                let mean =
                    xs.iter().enumerate().map(|(i, x)| f64::from(s[i + 1] * s[i]) * x).sum::<f64>() / cfg.m as f64;
                mean * mean
            }
        }
    }

    #[test]
    fn da_noiseless_is_exact_for_every_grid_offset() {
        let g = FrameGeometry::desk();
        let cfg = SyncConfig::new(4, Mode::Da);
        let code = gen_th_code(&g, 77);
        let train = SymbolStream::training(cfg.m + 4);
        let step = g.to_samples(cfg.coarse_step);
        for i in 0..cfg.n_candidates(&g) {
            let edge = i * step;
            let r = observation(&g, &code, &train, edge, cfg.m + 3);
            let training = train.skip(1).unwrap();
            let est = coarse_estimate(&r, &cfg, &g, Some(&training)).unwrap();
            assert_eq!(est.index, i);
            assert_eq!(est.tau1, g.samples_to_ns(edge));
            if i % 10 == 0 {
                for (j, &v) in est.objective_values.iter().enumerate() {
                    let b = brute_objective(&r, g.samples_to_ns(j * step), &cfg, &g, Some(training.symbols()));
                    assert!((v - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn nda_noiseless_long_observation_lands_within_a_step() {
        let g = FrameGeometry::desk();
        let cfg = SyncConfig::new(64, Mode::Nda);
        let s = g.symbol_len();
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let mut hits = 0;
        for t in 0..100 {
            let code = gen_th_code(&g, 1000 + t);
            let syms = random_symbols(cfg.m + 4, 2000 + t);
            let edge = rng.random_range(0..s);
            let r = observation(&g, &code, &syms, edge, cfg.m + 3);
            let est = coarse_estimate(&r, &cfg, &g, None).unwrap();
            let d = (est.tau1 - g.samples_to_ns(edge)).abs();
            if d.min(g.t_s() - d) <= cfg.coarse_step {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{hits}/100");
    }

    #[test]
    fn single_symbol_observation_is_accepted() {
        let g = FrameGeometry::desk();
        let syms = random_symbols(5, 3);
        let r = observation(&g, &gen_th_code(&g, 3), &syms, 500, 3);
        let cfg = SyncConfig::new(1, Mode::Nda);
        let est = coarse_estimate(&r, &cfg, &g, None).unwrap();
        assert_eq!(est.objective_values.len(), cfg.n_candidates(&g));
        let max = est.objective_values.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(est.objective_values[est.index], max);
    }

    #[test]
    fn coarse_rejects_short_observation_and_missing_training() {
        let g = FrameGeometry::desk();
        let r = SampledSignal::zeros(5 * g.symbol_len(), g.f_s()).unwrap();
        assert!(coarse_estimate(&r, &SyncConfig::new(8, Mode::Nda), &g, None).is_err());
        assert!(coarse_estimate(&r, &SyncConfig::new(2, Mode::Da), &g, None).is_err());
        let short = SymbolStream::training(2);
        assert!(coarse_estimate(&r, &SyncConfig::new(2, Mode::Da), &g, Some(&short)).is_err());
    }

    #[test]
    fn coarse_is_sign_invariant_and_reproducible() {
        let g = FrameGeometry::desk();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise: Vec<f64> = (0..12 * g.symbol_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let neg: Vec<f64> = noise.iter().map(|x| -x).collect();
        let r = SampledSignal::new(noise, g.f_s(), 0.0).unwrap();
        let rn = SampledSignal::new(neg, g.f_s(), 0.0).unwrap();
        let train = SymbolStream::training(12);
        for mode in [Mode::Nda, Mode::Da] {
            let cfg = SyncConfig::new(8, mode);
            let a = coarse_estimate(&r, &cfg, &g, Some(&train)).unwrap();
            assert_eq!(a, coarse_estimate(&rn, &cfg, &g, Some(&train)).unwrap());
            let again = coarse_objective(&r, a.index, &cfg, &g, Some(&train)).unwrap();
            assert_eq!(again.to_bits(), a.objective_values[a.index].to_bits());
            let max = a.objective_values.iter().copied().fold(f64::MIN, f64::max);
            assert_eq!(a.objective_values[a.index], max);
        }
    }

    #[test]
    fn symbol_shift_preserves_overlapping_correlations() {
        let g = FrameGeometry::desk();
        let s = g.symbol_len();
        let syms = random_symbols(14, 8);
        let r = observation(&g, &gen_th_code(&g, 8), &syms, 900, 12);
        let shifted = SampledSignal::new(r.samples()[s..].to_vec(), g.f_s(), 0.0).unwrap();
        let cfg = SyncConfig::new(8, Mode::Nda);
        let step = g.to_samples(cfg.coarse_step);
        let est = coarse_estimate(&shifted, &cfg, &g, None).unwrap();
        for i in 0..cfg.n_candidates(&g) {
            let tau = g.samples_to_ns(i * step);
            let mut acc = 0.0;
            for k in 1..=cfg.m {
                let x = dirty_correlate(&r, tau, k + 1, &g).unwrap();
                assert!((x - dirty_correlate(&shifted, tau, k, &g).unwrap()).abs() < 1e-9);
                acc += x * x;
            }
            assert!((acc / cfg.m as f64 - est.objective_values[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn fine_span_and_bypass() {
        let g = FrameGeometry::desk();
        let cfg = SyncConfig::new(4, Mode::Nda);
        assert_eq!(cfg.fine_half_span(&g), 20);
        let r = observation(&g, &gen_th_code(&g, 1), &random_symbols(9, 1), 300, 8);
        let f = fine_search(&r, 30.0, &cfg, &g).unwrap();
        assert_eq!(f.z.len(), 39);
        let off = SyncConfig { t_corr: 0.0, ..cfg };
        assert_eq!(off.fine_half_span(&g), 0);
        let f = fine_search(&r, 30.0, &off, &g).unwrap();
        assert_eq!((f.tau2, f.n_opt, f.z.len()), (30.0, 0, 0));
        let est = two_stage_estimate(&r, &off, &g, None).unwrap();
        assert_eq!(est.tau1(), est.tau2());
    }

    #[test]
    fn fine_rejects_delta_above_window() {
        let g = FrameGeometry::desk();
        let cfg = SyncConfig { delta: 5.0, ..SyncConfig::new(4, Mode::Nda) };
        let r = SampledSignal::zeros(8 * g.symbol_len(), g.f_s()).unwrap();
        assert!(fine_search(&r, 0.0, &cfg, &g).is_err());
    }

    #[test]
    fn fine_noiseless_aligned_and_offset() {
        let g = FrameGeometry::desk();
        let cfg = SyncConfig::new(8, Mode::Nda);
        for seed in 0..20 {
            let edge = 1000 + 37 * seed as usize;
            let r = observation(&g, &gen_th_code(&g, seed), &random_symbols(12, seed), edge, 11);
            let tau_u = g.samples_to_ns(edge);
            let f = fine_search(&r, tau_u, &cfg, &g).unwrap();
            assert_eq!((f.n_opt, f.tau2), (0, tau_u));
            let f = fine_search(&r, tau_u - 1.4, &cfg, &g).unwrap();
            assert!((f.tau2 - tau_u).abs() <= cfg.delta / 2.0 + 1e-9, "seed {seed}: {}", f.tau2);
        }
    }

    #[test]
    fn two_stage_noiseless_aligned() {
        let g = FrameGeometry::desk();
        let cfg = SyncConfig::new(8, Mode::Da);
        let train = SymbolStream::training(cfg.m + 4);
        let edge = 40 * g.to_samples(cfg.coarse_step);
        let r = observation(&g, &gen_th_code(&g, 6), &train, edge, cfg.m + 3);
        let est = two_stage_estimate(&r, &cfg, &g, Some(&train.skip(1).unwrap())).unwrap();
        assert_eq!(est.tau1(), g.samples_to_ns(edge));
        assert_eq!(est.tau2(), est.tau1());
    }

    #[test]
    fn tie_rules() {
        assert_eq!(rising_edge_argmax(&[1.0, 3.0, 3.0, 2.0]), 2);
        assert_eq!(rising_edge_argmax(&[3.0, 1.0, 3.0, 3.0]), 0);
        assert_eq!(rising_edge_argmax(&[2.0, 2.0]), 0);
        assert_eq!(run_end_argmax(&[1.0, 5.0, 5.0, 5.0, 1.0, 5.0], 2), 3);
        assert_eq!(run_end_argmax(&[5.0, 1.0, 1.0, 5.0, 5.0], 2), 0);
        assert_eq!(run_end_argmax(&[1.0, 2.0, 9.0], 1), 2);
    }

    #[test]
    fn config_validation() {
        let g = FrameGeometry::desk();
        assert!(SyncConfig::new(8, Mode::Nda).validate(&g).is_ok());
        assert!(SyncConfig::new(0, Mode::Nda).validate(&g).is_err());
        let base = SyncConfig::new(8, Mode::Nda);
        assert!(SyncConfig { coarse_step: 3.0, ..base }.validate(&g).is_err());
        assert!(SyncConfig { coarse_step: 0.15, ..base }.validate(&g).is_err());
        assert!(SyncConfig { t_corr: 1.0, ..base }.validate(&g).is_err());
        assert!(SyncConfig { delta: 0.0, ..base }.validate(&g).is_err());
        assert!(SyncConfig { k: 0, ..base }.validate(&g).is_err());
        assert!("DA".parse::<Mode>().is_ok() && "x".parse::<Mode>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fine_scan_stays_in_range(seed in any::<u64>(), idx in 0usize..2800, k in 1usize..4) {
            let g = FrameGeometry::desk();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..7 * g.symbol_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = SampledSignal::new(x, g.f_s(), 0.0).unwrap();
            let cfg = SyncConfig { k, ..SyncConfig::new(4, Mode::Nda) };
            let n = cfg.fine_half_span(&g) as i64;
            let f = fine_search(&r, g.samples_to_ns(idx), &cfg, &g).unwrap();
            prop_assert_eq!(f.z.len() as i64, 2 * n - 1);
            prop_assert!(f.n_opt > -n && f.n_opt < n);
            prop_assert!(f.tau2 >= 0.0 && f.tau2 < g.t_s());
            let want = (idx as i64 + f.n_opt * 2).rem_euclid(g.symbol_len() as i64) as usize;
            prop_assert_eq!(f.tau2, g.samples_to_ns(want));
        }
    }
}
