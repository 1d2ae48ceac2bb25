//! Multipath channel realizations, link application, user superposition and
//! calibrated AWGN.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::FrameGeometry;
use crate::signal::SampledSignal;
use crate::waveform::{SymbolStream, ThCode};

/// Saleh-Valenzuela parameters. Rates in 1/ns, decay constants in ns,
/// lognormal fading standard deviations in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cm1Params {
    pub cluster_rate: f64,
    pub ray_rate: f64,
    pub cluster_decay: f64,
    pub ray_decay: f64,
    pub cluster_fading_db: f64,
    pub ray_fading_db: f64,
}

impl Cm1Params {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("cluster_rate", self.cluster_rate),
            ("ray_rate", self.ray_rate),
            ("cluster_decay", self.cluster_decay),
            ("ray_decay", self.ray_decay),
        ];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("cluster_fading_db", self.cluster_fading_db), ("ray_fading_db", self.ray_fading_db)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Excess delay in whole samples.
    pub delay: usize,
    pub amplitude: f64,
}

/// Tapped delay line. Delays are sample counts at `f_s`, sorted, starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Tap>,
    f_s: f64,
}

impl ChannelRealization {
    /// Single unit tap at zero delay.
    pub fn identity(f_s: f64) -> Self {
        Self { taps: vec![Tap { delay: 0, amplitude: 1.0 }], f_s }
    }

    /// Taps given as `(delay_ns, amplitude)`; delays must be on the sample
    /// grid, nondecreasing and start at 0. No energy normalization.
    pub fn from_taps(taps: &[(f64, f64)], f_s: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one tap".into()));
        }
        let mut out = Vec::with_capacity(taps.len());
        for &(d, a) in taps {
            let x = d * f_s;
            if !(x.is_finite() && x >= 0.0 && (x - x.round()).abs() < 1e-9 * x.max(1.0)) || !a.is_finite() {
                return Err(Error::InvalidArgument(format!("tap ({d} ns, {a}) is not on the sample grid")));
            }
            out.push(Tap { delay: x.round() as usize, amplitude: a });
        }
        if out[0].delay != 0 {
            return Err(Error::InvalidArgument("first tap delay must be 0".into()));
        }
        if out.windows(2).any(|w| w[1].delay < w[0].delay) {
            return Err(Error::InvalidArgument("tap delays must be nondecreasing".into()));
        }
        Ok(Self { taps: out, f_s })
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }
    pub fn len(&self) -> usize {
        self.taps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
    pub fn f_s(&self) -> f64 {
        self.f_s
    }
    pub fn max_delay(&self) -> usize {
        self.taps.last().map_or(0, |t| t.delay)
    }
    pub fn delay_ns(&self, tap: &Tap) -> f64 {
        tap.delay as f64 / self.f_s
    }
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.amplitude * t.amplitude).sum()
    }

    /// Power-weighted RMS excess delay in ns.
    pub fn rms_delay_spread(&self) -> f64 {
        let e = self.energy();
        let (m1, m2) = self.taps.iter().fold((0.0, 0.0), |(m1, m2), t| {
            let p = t.amplitude * t.amplitude / e;
            let d = self.delay_ns(t);
            (m1 + p * d, m2 + p * d * d)
        });
        (m2 - m1 * m1).max(0.0).sqrt()
    }
}

const MAX_DRAW_ATTEMPTS: u32 = 8;

/// One Saleh-Valenzuela realization: Poisson clusters and rays, doubly
/// exponential mean power, lognormal cluster and ray fading, random polarity.
/// Delays are rounded to the sample grid, taps beyond `truncation_ns`
/// dropped, coincident taps merged, and energy normalized to 1.
pub fn draw_cm1(params: &Cm1Params, rng_seed: u64, truncation_ns: f64, f_s: f64) -> Result<ChannelRealization> {
    params.validate()?;
    if !(truncation_ns.is_finite() && truncation_ns > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation must be positive, got {truncation_ns}")));
    }
    for attempt in 0..MAX_DRAW_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        // retries move to a fresh stream of the same key
        rng.set_stream(u64::from(attempt));
        if let Some(ch) = sv_once(params, &mut rng, truncation_ns, f_s) {
            return Ok(ch);
        }
    }
    Err(Error::DegenerateChannel(MAX_DRAW_ATTEMPTS))
}

fn sv_once<R: Rng>(p: &Cm1Params, rng: &mut R, truncation_ns: f64, f_s: f64) -> Option<ChannelRealization> {
    let cluster_gap = Exp::new(p.cluster_rate).expect("validated rate");
    let ray_gap = Exp::new(p.ray_rate).expect("validated rate");
    let ln10 = std::f64::consts::LN_10;
    // lognormal mean correction so E[beta^2] follows the exponential profile
    let bias = (p.cluster_fading_db.powi(2) + p.ray_fading_db.powi(2)) * ln10 / 20.0;
    let ray_cutoff = 10.0 * p.ray_decay;
    let cluster_cutoff = (10.0 * p.cluster_decay).min(truncation_ns);

    let n_bins = (truncation_ns * f_s).floor() as usize + 1;
    let mut bins = vec![0.0f64; n_bins];
    let mut t_cluster = 0.0;
    while t_cluster <= cluster_cutoff {
        let cluster_fade: f64 = p.cluster_fading_db * rng.sample::<f64, _>(StandardNormal);
        let mut t_ray = 0.0;
        while t_ray < ray_cutoff && t_cluster + t_ray <= truncation_ns {
            let mu = -10.0 * t_cluster / p.cluster_decay / ln10 - 10.0 * t_ray / p.ray_decay / ln10 - bias;
            let ray_fade: f64 = p.ray_fading_db * rng.sample::<f64, _>(StandardNormal);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let amp = sign * 10f64.powf((mu + cluster_fade + ray_fade) / 20.0);
            let bin = ((t_cluster + t_ray) * f_s).round() as usize;
            if bin < n_bins {
                bins[bin] += amp;
            }
            t_ray += ray_gap.sample(rng);
        }
        t_cluster += cluster_gap.sample(rng);
    }

    let mut taps: Vec<Tap> = bins
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(delay, &amplitude)| Tap { delay, amplitude })
        .collect();
    let energy: f64 = taps.iter().map(|t| t.amplitude * t.amplitude).sum();
    if taps.is_empty() || energy <= 0.0 || taps[0].delay != 0 {
        return None;
    }
    let scale = energy.sqrt().recip();
    taps.iter_mut().for_each(|t| t.amplitude *= scale);
    Some(ChannelRealization { taps, f_s })
}

/// Full linear convolution; output length is `len + max_delay`.
pub fn convolve(signal: &SampledSignal, channel: &ChannelRealization) -> Result<SampledSignal> {
    if signal.f_s() != channel.f_s() {
        return Err(Error::SampleRateMismatch(signal.f_s(), channel.f_s()));
    }
    let len = signal.len() + channel.max_delay();
    let out = convolve_into(signal.samples(), channel.taps(), 0, len);
    SampledSignal::new(out, signal.f_s(), signal.t0())
}

// Skips zero input samples; TH waveforms are mostly empty.
fn convolve_into(x: &[f64], taps: &[Tap], shift: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &v) in x.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for t in taps {
            let j = i + t.delay + shift;
            if j < len {
                out[j] += v * t.amplitude;
            }
        }
    }
    out
}

/// `p_R(t) = sum_l alpha_l p_T(t - tau_l)`, kept symbol-long.
pub fn received_template(tx_template: &SampledSignal, channel: &ChannelRealization) -> Result<SampledSignal> {
    let full = convolve(tx_template, channel)?;
    let end = full.support_end();
    if end > tx_template.len() {
        return Err(Error::SupportExceedsSymbol {
            end: end as f64 / tx_template.f_s(),
            t_s: tx_template.len() as f64 / tx_template.f_s(),
        });
    }
    Ok(full.window(0, tx_template.len()))
}

/// One user's link parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLink {
    energy: f64,
    code: ThCode,
    tau_u: f64,
    channel: ChannelRealization,
    symbols: SymbolStream,
}

impl UserLink {
    pub fn new(
        energy: f64,
        code: ThCode,
        tau_u: f64,
        channel: ChannelRealization,
        symbols: SymbolStream,
        geometry: &FrameGeometry,
    ) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::InvalidArgument(format!("user energy must be positive, got {energy}")));
        }
        if !(tau_u.is_finite() && (0.0..geometry.t_s()).contains(&tau_u)) {
            return Err(Error::InvalidArgument(format!("tau_u = {tau_u} outside [0, {})", geometry.t_s())));
        }
        if channel.f_s() != geometry.f_s() {
            return Err(Error::SampleRateMismatch(channel.f_s(), geometry.f_s()));
        }
        Ok(Self { energy, code, tau_u, channel, symbols })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }
    pub fn code(&self) -> &ThCode {
        &self.code
    }
    pub fn tau_u(&self) -> f64 {
        self.tau_u
    }
    pub fn channel(&self) -> &ChannelRealization {
        &self.channel
    }
    pub fn symbols(&self) -> &SymbolStream {
        &self.symbols
    }
}

/// Passes an already-synthesized transmit waveform through the link's
/// channel and delays it by `tau_u` (zero-filled head). The output keeps the
/// input length; anything pushed past the end is dropped.
pub fn apply_link(tx: &SampledSignal, link: &UserLink) -> Result<SampledSignal> {
    if tx.f_s() != link.channel.f_s() {
        return Err(Error::SampleRateMismatch(tx.f_s(), link.channel.f_s()));
    }
    let shift = (link.tau_u * tx.f_s()).round() as usize;
    let out = convolve_into(tx.samples(), link.channel.taps(), shift, tx.len());
    SampledSignal::new(out, tx.f_s(), tx.t0())
}

/// Sample-wise sum, accumulated in list order.
pub fn superpose(signals: &[SampledSignal]) -> Result<SampledSignal> {
    let first = signals.first().ok_or_else(|| Error::InvalidArgument("nothing to superpose".into()))?;
    let mut acc = first.samples().to_vec();
    for s in &signals[1..] {
        if s.f_s() != first.f_s() {
            return Err(Error::SampleRateMismatch(first.f_s(), s.f_s()));
        }
        if s.len() != acc.len() {
            return Err(Error::LengthMismatch(acc.len(), s.len()));
        }
        acc.iter_mut().zip(s.samples()).for_each(|(a, b)| *a += b);
    }
    SampledSignal::new(acc, first.f_s(), first.t0())
}

/// AWGN level as per-symbol `E_s/N_0` of the desired user, or noiseless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::InvalidArgument(format!("snr must be finite, got {snr_db}")));
        }
        Ok(Self { snr_db: Some(snr_db), seed })
    }

    pub fn noiseless() -> Self {
        Self { snr_db: None, seed: 0 }
    }
}

/// Per-sample noise variance `(N_0 / 2) * f_s` with `N_0 = E_s / 10^(snr/10)`.
pub fn noise_variance(snr_db: f64, reference_symbol_energy: f64, f_s: f64) -> f64 {
    let n0 = reference_symbol_energy / 10f64.powf(snr_db / 10.0);
    0.5 * n0 * f_s
}

pub fn add_awgn(signal: &SampledSignal, noise: &NoiseSpec, reference_symbol_energy: f64) -> Result<SampledSignal> {
    let Some(snr_db) = noise.snr_db else {
        return Ok(signal.clone());
    };
    if !(reference_symbol_energy.is_finite() && reference_symbol_energy > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference symbol energy must be positive, got {reference_symbol_energy}"
        )));
    }
    let sigma = noise_variance(snr_db, reference_symbol_energy, signal.f_s()).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let out = signal.samples().iter().map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    SampledSignal::new(out, signal.f_s(), signal.t0())
}
