use crate::error::{Error, Result};

/// Uniformly sampled real waveform. `t0` is the time of sample 0 in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    f_s: f64,
    t0: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, f_s: f64, t0: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("signal must have at least one sample".into()));
        }
        if !(f_s.is_finite() && f_s > 0.0) || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!("bad sample rate {f_s} or start time {t0}")));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples, f_s, t0 })
    }

    pub fn zeros(len: usize, f_s: f64) -> Result<Self> {
        Self::new(vec![0.0; len], f_s, 0.0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
    pub fn f_s(&self) -> f64 {
        self.f_s
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn dt(&self) -> f64 {
        1.0 / self.f_s
    }

    /// `sum x^2 * dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() * self.dt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { samples: self.samples.iter().map(|x| a * x).collect(), f_s: self.f_s, t0: self.t0 }
    }

    /// Index one past the last nonzero sample (0 for an all-zero signal).
    pub fn support_end(&self) -> usize {
        self.samples.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1)
    }

    /// Copy of samples `[start, start + len)`, zero-filled past the end.
    pub fn window(&self, start: usize, len: usize) -> Self {
        let mut out = vec![0.0; len];
        if start < self.samples.len() {
            let n = len.min(self.samples.len() - start);
            out[..n].copy_from_slice(&self.samples[start..start + n]);
        }
        Self { samples: out, f_s: self.f_s, t0: self.t0 + start as f64 / self.f_s }
    }
}
