//! Fast oracle checks runnable from the command line.

use crate::channel::{self, Cm1Params};
use crate::error::Result;
use crate::geometry::FrameGeometry;
use crate::harness::{self, ChannelModel, DelayLaw, ScenarioConfig};
use crate::scenario;
use crate::signal::SampledSignal;
use crate::sync::{self, Mode, SyncConfig};
use crate::waveform::{self, Pulse, DEFAULT_SHAPE_FACTOR};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Swappable pieces, so tests can inject faults.
#[derive(Clone, Copy)]
pub struct Fixture {
    pub make_pulse: fn(&FrameGeometry, f64) -> Result<Pulse>,
}

impl Default for Fixture {
    fn default() -> Self {
        Self { make_pulse: waveform::make_pulse }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub result: std::result::Result<(), String>,
}

type Check = fn(&Fixture) -> std::result::Result<(), String>;

const CHECKS: &[(&str, Check)] = &[
    ("pulse_energy", pulse_energy),
    ("partition_identity", partition_identity),
    ("noiseless_alignment", noiseless_alignment),
    ("fine_scan_range", fine_scan_range),
];

pub fn run(fixture: &Fixture) -> Vec<CheckOutcome> {
    CHECKS.iter().map(|(name, check)| CheckOutcome { name, result: check(fixture) }).collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn pulse_energy(fx: &Fixture) -> std::result::Result<(), String> {
    for g in [FrameGeometry::paper(), FrameGeometry::desk()] {
        let p = (fx.make_pulse)(&g, DEFAULT_SHAPE_FACTOR).map_err(err)?;
        let e = p.energy();
        if (e - 1.0).abs() >= 1e-6 {
            return Err(format!("pulse energy {e} at {} GHz", g.f_s()));
        }
    }
    Ok(())
}

/// CM1 parameters from the bundled desk scenario.
pub fn bundled_cm1() -> (Cm1Params, f64) {
    match scenario::parse_scenario_str(scenario::DESK).map(|c| c.channel) {
        Ok(ChannelModel::Cm1 { params, truncation_ns }) => (params, truncation_ns),
        _ => unreachable!("bundled desk scenario uses cm1"),
    }
}

/// A CM1-shaped received template whose support fits inside one symbol:
/// the channel is truncated to the room left after the template's last pulse.
pub fn fitted_cm1_template(g: &FrameGeometry, seed: u64) -> Result<SampledSignal> {
    let (params, truncation) = bundled_cm1();
    let pulse = waveform::make_pulse(g, DEFAULT_SHAPE_FACTOR)?;
    let template = waveform::build_tx_template(&pulse, &waveform::gen_th_code(g, seed), g)?;
    let room = g.samples_to_ns(template.len() - template.support_end());
    let trunc = truncation.min(room - g.dt()).max(g.dt());
    let ch = channel::draw_cm1(&params, seed ^ 0x5eed, trunc, g.f_s())?;
    channel::received_template(&template, &ch)
}

fn partition_identity(_: &Fixture) -> std::result::Result<(), String> {
    let g = FrameGeometry::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..10 {
        let p_r = fitted_cm1_template(&g, seed).map_err(err)?;
        let total = p_r.energy();
        for _ in 0..10 {
            let tau = g.samples_to_ns(rng.random_range(0..g.symbol_len()));
            let part = sync::energy_partition(&p_r, tau, 2.5, &g).map_err(err)?;
            let rel = ((part.eps_a + part.eps_b) - 2.5 * total).abs() / (2.5 * total);
            if rel > 1e-9 {
                return Err(format!("eps_A + eps_B off by {rel:e} at tau~ = {tau}"));
            }
        }
    }
    Ok(())
}

fn noiseless_alignment(_: &Fixture) -> std::result::Result<(), String> {
    let mut cfg = ScenarioConfig::basic(FrameGeometry::desk());
    cfg.delay_law = DelayLaw::CoarseGrid;
    let sync_cfg = cfg.sync_config(8, Mode::Da);
    for t in 0..10 {
        let r = harness::run_trial(&cfg, &sync_cfg, f64::INFINITY, t).map_err(err)?;
        if r.tau1 != r.true_tau || r.tau2 != r.true_tau {
            return Err(format!("trial {t}: truth {} got tau1 {} tau2 {}", r.true_tau, r.tau1, r.tau2));
        }
    }
    Ok(())
}

fn fine_scan_range(_: &Fixture) -> std::result::Result<(), String> {
    let g = FrameGeometry::desk();
    let cfg = SyncConfig::new(4, Mode::Nda);
    let n = cfg.fine_half_span(&g);
    if n != 20 {
        return Err(format!("N = {n}, expected 20 for T_corr = 4 ns, delta = 0.2 ns"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise: Vec<f64> = (0..7 * g.symbol_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r = SampledSignal::new(noise, g.f_s(), 0.0).map_err(err)?;
    for tau1 in [0.0, 1.3, 139.0, 279.9] {
        let f = sync::fine_search(&r, tau1, &cfg, &g).map_err(err)?;
        if f.z.len() != 2 * n - 1 || f.n_opt.unsigned_abs() as usize >= n {
            return Err(format!("tau1 {tau1}: |Z| = {}, n_opt = {}", f.z.len(), f.n_opt));
        }
        if !(0.0..g.t_s()).contains(&f.tau2) {
            return Err(format!("tau2 {} outside [0, T_s)", f.tau2));
        }
    }
    Ok(())
}
