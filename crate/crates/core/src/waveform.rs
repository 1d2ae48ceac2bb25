//! Monocycle, time-hopping codes, differential PAM symbols and the
//! per-user transmitted waveform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::FrameGeometry;
use crate::signal::SampledSignal;

/// Fewest samples a pulse may occupy.
pub const MIN_PULSE_SAMPLES: usize = 8;

/// Gaussian width as a fraction of `T_p`. At 0.5 the support `[0, T_p]`
/// holds 99.989% of the untruncated energy.
pub const DEFAULT_SHAPE_FACTOR: f64 = 0.5;

/// Unit-energy second-derivative-of-Gaussian monocycle sampled over `[0, T_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    samples: Vec<f64>,
    f_s: f64,
}

impl Pulse {
    /// Wraps raw samples without any shaping or normalization.
    pub fn from_raw(samples: Vec<f64>, f_s: f64) -> Self {
        Self { samples, f_s }
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn f_s(&self) -> f64 {
        self.f_s
    }
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.f_s
    }
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.f_s
    }
}

/// Analytic second-derivative-of-Gaussian shape centred at `t_p / 2`,
/// unnormalized. `tau_m` is the Gaussian width parameter.
pub fn ricker(t: f64, t_p: f64, tau_m: f64) -> f64 {
    let x = (t - t_p / 2.0) / tau_m;
    (1.0 - 4.0 * PI * x * x) * (-2.0 * PI * x * x).exp()
}

pub fn make_pulse(geometry: &FrameGeometry, shape_factor: f64) -> Result<Pulse> {
    if !(shape_factor.is_finite() && shape_factor > 0.0) {
        return Err(Error::InvalidArgument(format!("shape factor must be positive, got {shape_factor}")));
    }
    let raw = geometry.t_p() * geometry.f_s();
    if raw < MIN_PULSE_SAMPLES as f64 {
        return Err(Error::PulseUnresolvable { samples: raw, min: MIN_PULSE_SAMPLES });
    }
    let n = geometry.pulse_len();
    let dt = geometry.dt();
    let t_p = geometry.t_p();
    let tau_m = shape_factor * t_p;
    // sample midpoints keep the grid symmetric about t_p / 2
    let mut samples: Vec<f64> = (0..n).map(|i| ricker((i as f64 + 0.5) * dt, t_p, tau_m)).collect();
    let energy: f64 = samples.iter().map(|x| x * x).sum::<f64>() * dt;
    let scale = energy.sqrt().recip();
    samples.iter_mut().for_each(|x| *x *= scale);
    Ok(Pulse { samples, f_s: geometry.f_s() })
}

/// Per-frame chip offsets `c(i)` in `[0, N_c - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThCode {
    chips: Vec<usize>,
}

impl ThCode {
    pub fn new(chips: Vec<usize>, geometry: &FrameGeometry) -> Result<Self> {
        if chips.len() != geometry.n_f() {
            return Err(Error::InvalidArgument(format!("TH code needs {} chips, got {}", geometry.n_f(), chips.len())));
        }
        if let Some(&c) = chips.iter().find(|&&c| c >= geometry.n_c()) {
            return Err(Error::InvalidArgument(format!("chip {c} outside [0, {}]", geometry.n_c() - 1)));
        }
        Ok(Self { chips })
    }

    pub fn zeros(geometry: &FrameGeometry) -> Self {
        Self { chips: vec![0; geometry.n_f()] }
    }

    pub fn chips(&self) -> &[usize] {
        &self.chips
    }
}

/// `N_f` i.i.d. uniform chips, deterministic in `seed`.
pub fn gen_th_code(geometry: &FrameGeometry, seed: u64) -> ThCode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chips = (0..geometry.n_f()).map(|_| rng.random_range(0..geometry.n_c())).collect();
    ThCode { chips }
}

/// Information bits and their differentially encoded symbols, both `±1`.
///
/// `symbols[k] = symbols[k-1] * info_bits[k]` with an implicit `symbols[-1] = +1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    info_bits: Vec<i8>,
    symbols: Vec<i8>,
}

impl SymbolStream {
    /// Builds the stream from already-encoded symbols.
    pub fn from_symbols(symbols: Vec<i8>) -> Result<Self> {
        check_pm1(&symbols)?;
        let info_bits = diff_decode(&symbols);
        Ok(Self { info_bits, symbols })
    }

    /// `n` equiprobable information bits, differentially encoded.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let bits: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        diff_encode(&bits).expect("bits are +-1")
    }

    /// Repeating `+1, +1, -1, -1` training symbols, `n` long.
    pub fn training(n: usize) -> Self {
        const PATTERN: [i8; 4] = [1, 1, -1, -1];
        let symbols = (0..n).map(|k| PATTERN[k % 4]).collect();
        Self::from_symbols(symbols).expect("pattern is +-1")
    }

    pub fn info_bits(&self) -> &[i8] {
        &self.info_bits
    }
    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }
    pub fn len(&self) -> usize {
        self.symbols.len()
    }
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The stream with its first `n` symbols dropped.
    pub fn skip(&self, n: usize) -> Result<Self> {
        Self::from_symbols(self.symbols.iter().skip(n).copied().collect())
    }
}

fn check_pm1(v: &[i8]) -> Result<()> {
    match v.iter().position(|&b| b != 1 && b != -1) {
        Some(i) => Err(Error::InvalidArgument(format!("entry {i} is {}, expected +1 or -1", v[i]))),
        None => Ok(()),
    }
}

pub fn diff_encode(info_bits: &[i8]) -> Result<SymbolStream> {
    check_pm1(info_bits)?;
    let mut prev = 1i8;
    let symbols = info_bits
        .iter()
        .map(|&b| {
            prev *= b;
            prev
        })
        .collect();
    Ok(SymbolStream { info_bits: info_bits.to_vec(), symbols })
}

pub fn diff_decode(symbols: &[i8]) -> Vec<i8> {
    std::iter::once(1i8).chain(symbols.iter().copied()).zip(symbols).map(|(prev, &s)| prev * s).collect()
}

/// One symbol-long template: pulse `i` starts at `i*T_f + c(i)*T_c`.
pub fn build_tx_template(pulse: &Pulse, code: &ThCode, geometry: &FrameGeometry) -> Result<SampledSignal> {
    if pulse.f_s() != geometry.f_s() {
        return Err(Error::SampleRateMismatch(pulse.f_s(), geometry.f_s()));
    }
    if code.chips().len() != geometry.n_f() {
        return Err(Error::InvalidArgument("TH code length differs from N_f".into()));
    }
    let (frame, chip, s_len) = (geometry.frame_len(), geometry.chip_len(), geometry.symbol_len());
    let mut out = vec![0.0; s_len];
    for (i, &c) in code.chips().iter().enumerate() {
        let start = i * frame + c * chip;
        let end = start + pulse.samples().len();
        if end > s_len {
            return Err(Error::SupportExceedsSymbol { end: geometry.samples_to_ns(end), t_s: geometry.t_s() });
        }
        out[start..end].copy_from_slice(pulse.samples());
    }
    SampledSignal::new(out, geometry.f_s(), 0.0)
}

/// `sqrt(energy) * sum_k s(k) * template(t - k*T_s)` over `n_symbols` symbols.
pub fn synthesize_tx(
    template: &SampledSignal,
    symbols: &SymbolStream,
    energy: f64,
    n_symbols: usize,
) -> Result<SampledSignal> {
    if n_symbols == 0 {
        return Err(Error::InvalidArgument("n_symbols must be at least 1".into()));
    }
    if n_symbols > symbols.len() {
        return Err(Error::InvalidArgument(format!("asked for {n_symbols} symbols, stream has {}", symbols.len())));
    }
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidArgument(format!("energy must be positive, got {energy}")));
    }
    let amp = energy.sqrt();
    let t = template.samples();
    let mut out = Vec::with_capacity(n_symbols * t.len());
    for &s in &symbols.symbols()[..n_symbols] {
        let a = amp * f64::from(s);
        out.extend(t.iter().map(|x| a * x));
    }
    SampledSignal::new(out, template.f_s(), template.t0())
}
