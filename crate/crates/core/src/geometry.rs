//! Frame/chip/symbol timing and its sample-grid representation.

use crate::error::{Error, Result};

/// Tolerance for "duration is a whole number of samples".
const GRID_TOL: f64 = 1e-9;

/// Timing constants of a TH-PAM link. All durations in ns, rates in GHz.
///
/// Construction enforces `T_p <= T_c <= T_f`, no pulse spill past the end of
/// a frame, and that every duration lands on the sample grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGeometry {
    t_p: f64,
    t_c: f64,
    t_f: f64,
    n_f: usize,
    n_c: usize,
    f_s: f64,
}

impl FrameGeometry {
    pub fn new(t_p: f64, t_c: f64, t_f: f64, n_f: usize, n_c: usize, f_s: f64) -> Result<Self> {
        let finite_pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Geometry(format!("{name} must be positive and finite, got {v}")))
            }
        };
        finite_pos("T_p", t_p)?;
        finite_pos("T_c", t_c)?;
        finite_pos("T_f", t_f)?;
        finite_pos("f_s", f_s)?;
        if n_f == 0 || n_c == 0 {
            return Err(Error::Geometry("N_f and N_c must be at least 1".into()));
        }
        if t_p > t_c {
            return Err(Error::Geometry(format!("T_p ({t_p}) exceeds T_c ({t_c})")));
        }
        if t_c > t_f {
            return Err(Error::Geometry(format!("T_c ({t_c}) exceeds T_f ({t_f})")));
        }
        let spill = (n_c - 1) as f64 * t_c + t_p;
        if spill > t_f + GRID_TOL {
            return Err(Error::FrameSpill { spill, t_f });
        }
        for (name, d) in [("T_p", t_p), ("T_c", t_c), ("T_f", t_f)] {
            whole_samples(d, f_s).ok_or_else(|| {
                Error::Geometry(format!("{name} = {d} ns is not a whole number of samples at {f_s} GHz"))
            })?;
        }
        Ok(Self { t_p, t_c, t_f, n_f, n_c, f_s })
    }

    /// Full-rate profile: 0.8 ns pulse, 1 ns chips, 35 chips in a 35 ns
    /// frame, 32 frames per symbol, 50 GHz sampling.
    pub fn paper() -> Self {
        Self::new(0.8, 1.0, 35.0, 32, 35, 50.0).expect("paper profile is valid")
    }

    /// Reduced profile for CI: same pulse and frame timing, 8 frames per
    /// symbol, 10 GHz sampling (the coarsest rate that still puts 8 samples
    /// in a 0.8 ns pulse and keeps 0.2 ns fine steps on the grid).
    pub fn desk() -> Self {
        Self::new(0.8, 1.0, 35.0, 8, 35, 10.0).expect("desk profile is valid")
    }

    pub fn t_p(&self) -> f64 {
        self.t_p
    }
    pub fn t_c(&self) -> f64 {
        self.t_c
    }
    pub fn t_f(&self) -> f64 {
        self.t_f
    }
    pub fn n_f(&self) -> usize {
        self.n_f
    }
    pub fn n_c(&self) -> usize {
        self.n_c
    }
    pub fn f_s(&self) -> f64 {
        self.f_s
    }
    /// Symbol duration `N_f * T_f`.
    pub fn t_s(&self) -> f64 {
        self.n_f as f64 * self.t_f
    }
    /// Sample spacing in ns.
    pub fn dt(&self) -> f64 {
        1.0 / self.f_s
    }

    pub fn pulse_len(&self) -> usize {
        self.to_samples(self.t_p)
    }
    pub fn chip_len(&self) -> usize {
        self.to_samples(self.t_c)
    }
    pub fn frame_len(&self) -> usize {
        self.to_samples(self.t_f)
    }
    pub fn symbol_len(&self) -> usize {
        self.n_f * self.frame_len()
    }

    /// Nearest sample count for a nonnegative duration.
    pub fn to_samples(&self, ns: f64) -> usize {
        (ns * self.f_s).round().max(0.0) as usize
    }

    /// Sample count for a duration that must lie on the grid.
    pub fn exact_samples(&self, ns: f64) -> Option<usize> {
        whole_samples(ns, self.f_s)
    }

    pub fn samples_to_ns(&self, n: usize) -> f64 {
        n as f64 / self.f_s
    }
}

fn whole_samples(ns: f64, f_s: f64) -> Option<usize> {
    let x = ns * f_s;
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= GRID_TOL * r.max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}
