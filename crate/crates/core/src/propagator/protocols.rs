//! Measurement protocols built on the stepper: seeded-mode spectroscopy and noise ensembles.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ensemble::run_ensemble_range;
use super::measure::{measure_omega, G2Accumulator, MemberStats, NkAccumulator, NkTable, Trace};
use super::state::{cw_state, FieldState, SeedKind};
use super::{Observer, Propagator, SchemeConfig};
use crate::bogoliubov::{NoiseSpectrum, Physics};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Records a_k(t) of selected bins every `stride` steps.
#[derive(Debug, Clone)]
pub struct ModeTrace {
    bins: Vec<usize>,
    stride: usize,
    counter: usize,
    pub times: Vec<f64>,
    pub samples: Vec<Vec<Complex64>>,
}

impl ModeTrace {
    /// Starts a trace that includes the current sample of `state`.
    pub fn new(state: &FieldState, bins: &[usize], stride: usize) -> Self {
        let mut trace = Self {
            bins: bins.to_vec(),
            stride: stride.max(1),
            counter: 0,
            times: Vec::new(),
            samples: vec![Vec::new(); bins.len()],
        };
        trace.record(state);
        trace
    }

    fn record(&mut self, state: &FieldState) {
        self.times.push(state.t);
        for (slot, &b) in self.samples.iter_mut().zip(&self.bins) {
            slot.push(state.mode_amplitude(b));
        }
    }

    /// Samples of bin number `which` as a uniformly spaced trace.
    pub fn trace(&self, which: usize) -> Trace {
        let dt = if self.times.len() > 1 { self.times[1] - self.times[0] } else { 0.0 };
        Trace { t0: self.times[0], dt, values: self.samples[which].clone() }
    }
}

impl Observer for ModeTrace {
    fn observe(&mut self, state: &FieldState) {
        self.counter += 1;
        if self.counter % self.stride == 0 {
            self.record(state);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeededOmegaOptions {
    /// Seed amplitude relative to |psi0|.
    pub amplitude: f64,
    /// Record length in oscillation periods (stable modes).
    pub periods: f64,
    /// Record length in e-folds (unstable modes).
    pub efolds: f64,
    pub samples_per_period: usize,
    /// The stability guard is enforced up to `band_factor * |k|`.
    pub band_factor: f64,
    /// Single-tone residual tolerance of the frequency fit.
    pub tolerance: f64,
}

impl Default for SeededOmegaOptions {
    fn default() -> Self {
        Self {
            amplitude: 1e-4,
            periods: 3.5,
            efolds: 3.0,
            samples_per_period: 32,
            band_factor: 2.0,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeededOmega {
    pub k: f64,
    /// Eigenfrequency of the excitation predicted by the linearization (sign(ω0) ω_k or iγ_k).
    pub theory: Complex64,
    /// Same quantity extracted from the +k component of the simulated field.
    pub measured: Complex64,
    /// Extracted from the -k partner component.
    pub measured_partner: Complex64,
    /// Lab-frame frequency of the +k component: α δc + n_p U_0 + v k + measured.
    pub lab_frequency: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Seeds the Bogoliubov eigen-excitation at grid bin `index` on the CW background, propagates
/// for a few periods and extracts its frequency from both components.
pub fn seeded_omega(
    physics: &Physics,
    grid: &Grid,
    base: &SchemeConfig,
    index: usize,
    opts: &SeededOmegaOptions,
) -> Result<SeededOmega> {
    let k = grid.k(index);
    if k == 0.0 {
        return Err(Error::invalid("seed index", "k = 0 is the background"));
    }
    let partner = grid
        .index_of_mode(-grid.mode_number(index))
        .ok_or_else(|| Error::invalid("seed index", "partner bin falls outside the grid"))?;
    let (_, _, theory) = physics.pair_mode(k);

    let mut cfg = SchemeConfig { guard_band: Some(opts.band_factor * k.abs()), ..*base };
    cfg.dt = 0.99 * cfg.max_stable_dt(physics, grid);
    if !cfg.dt.is_finite() {
        cfg.dt = base.dt;
    }
    let (duration, interval) = if theory.im > 0.0 {
        let d = opts.efolds / theory.im;
        (d, d / 128.0)
    } else {
        let period = 2.0 * PI / theory.re.abs();
        (opts.periods * period, period / opts.samples_per_period as f64)
    };
    let stride = ((interval / cfg.dt).floor() as usize).max(1);
    // Land the record on a whole number of samples.
    let samples = (duration / (stride as f64 * cfg.dt)).ceil() as usize;
    let t_final = samples as f64 * stride as f64 * cfg.dt;

    let mut prop = Propagator::new(grid, physics, &cfg)?;
    let mut state = cw_state(grid, &physics.cw);
    state.seed_mode(index, opts.amplitude * physics.cw.psi0_mag, SeedKind::PairMode, physics)?;
    let mut trace = ModeTrace::new(&state, &[index, partner], stride);
    let steps = prop.propagate(&mut state, t_final, &mut trace)?;

    let v = physics.polariton.v;
    let cw = prop.scheme_linear_frequency(0.0);
    let carrier_u = cw + v * k;
    let carrier_p = cw - v * k;
    let fit_u = measure_omega(&trace.trace(0), carrier_u, opts.tolerance)?;
    let fit_p = measure_omega(&trace.trace(1), carrier_p, opts.tolerance)?;
    let measured = fit_u.omega - carrier_u;
    let measured_partner = -(fit_p.omega - carrier_p).conj();
    Ok(SeededOmega {
        k,
        theory,
        measured,
        measured_partner,
        lab_frequency: fit_u.omega.re,
        dt: cfg.dt,
        steps,
    })
}

/// Ensemble observables at each requested time.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub nk: Vec<NkTable>,
    pub g2: Vec<G2Accumulator>,
}

/// Propagates `members` noisy copies of the CW background to each of `times` (ascending),
/// accumulating N_k and intensity correlations in member order.
pub fn run_noise_ensemble(
    template: &Propagator,
    noise: &NoiseSpectrum,
    members: usize,
    master_seed: u64,
    workers: usize,
    times: &[f64],
) -> Result<EnsembleSummary> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::invalid("times", "must be non-negative and ascending"));
    }
    let grid = *template.grid();
    let cw = template.physics().cw;
    let mut nk: Vec<NkAccumulator> = times.iter().map(|_| NkAccumulator::new(&grid)).collect();
    let mut g2: Vec<G2Accumulator> = times.iter().map(|_| G2Accumulator::new(&grid)).collect();
    let threads = if workers == 0 { rayon::current_num_threads() } else { workers };
    let chunk = (4 * threads).max(1);
    let mut start = 0;
    while start < members {
        let end = (start + chunk).min(members);
        let results = run_ensemble_range(start..end, master_seed, workers, |_, seed| {
            let mut prop = template.clone();
            let mut state = cw_state(&grid, &cw);
            state.seed_noise(noise, seed);
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                prop.propagate(&mut state, t, &mut ())?;
                out.push(MemberStats::from_state(&state, prop.transforms()));
            }
            Ok(out)
        })?;
        for member in &results {
            for (i, stats) in member.iter().enumerate() {
                nk[i].add(&stats.power);
                g2[i].add(stats);
            }
        }
        start = end;
    }
    Ok(EnsembleSummary {
        times: times.to_vec(),
        nk: nk.iter().map(|a| a.finish()).collect(),
        g2,
    })
}
