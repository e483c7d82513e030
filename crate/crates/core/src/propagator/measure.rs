//! Estimators applied to trajectories and ensembles.

use num_complex::Complex64;

use super::state::{FieldState, Transforms};
use crate::error::{positive, Error, Result};
use crate::grid::Grid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Uniformly sampled complex signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl Trace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |n| self.t0 + n as f64 * self.dt)
    }

    pub fn duration(&self) -> f64 {
        self.values.len().saturating_sub(1) as f64 * self.dt
    }

    /// Multiplies by e^{+i carrier t}, removing a known e^{-i carrier t} factor.
    pub fn demodulated(&self, carrier: f64) -> Trace {
        let values = self
            .values
            .iter()
            .zip(self.times())
            .map(|(&x, t)| x * Complex64::from_polar(1.0, carrier * t))
            .collect();
        Trace { t0: self.t0, dt: self.dt, values }
    }
}

/// Component amplitude * e^{-i omega t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub omega: Complex64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaFit {
    /// Fitted frequency; Im > 0 is growth.
    pub omega: Complex64,
    /// Relative one-step prediction residual.
    pub residual: f64,
}

fn omega_from_ratio(z: Complex64, dt: f64) -> Complex64 {
    I * z.ln() / dt
}

fn check_coverage(omega: Complex64, duration: f64) -> Result<()> {
    if omega.im.abs() > omega.re.abs() {
        let efolds = omega.im.abs() * duration;
        if efolds < 2.0 {
            return Err(Error::RecordTooShort { covered: efolds, required: 2.0 });
        }
    } else {
        let periods = omega.re.abs() * duration / (2.0 * std::f64::consts::PI);
        if periods < 3.0 {
            return Err(Error::RecordTooShort { covered: periods, required: 3.0 });
        }
    }
    Ok(())
}

/// Frequency of a single-tone record after removing `carrier`. Returns carrier + fitted tone.
///
/// The tone is obtained by one-step linear prediction; records whose residual exceeds
/// `tolerance` are refitted with two tones and reported as [`Error::Beating`].
pub fn measure_omega(trace: &Trace, carrier: f64, tolerance: f64) -> Result<OmegaFit> {
    positive("trace.dt", trace.dt)?;
    if trace.values.len() < 8 {
        return Err(Error::invalid("trace", "needs at least 8 samples"));
    }
    let y = trace.demodulated(carrier).values;
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for w in y.windows(2) {
        num += w[1] * w[0].conj();
        den += w[0].norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::invalid("trace", "signal is identically zero"));
    }
    let z = num / den;
    let (mut res, mut norm) = (0.0, 0.0);
    for w in y.windows(2) {
        res += (w[1] - z * w[0]).norm_sqr();
        norm += w[1].norm_sqr();
    }
    let residual = (res / norm).sqrt();
    let fitted = omega_from_ratio(z, trace.dt);
    if residual > tolerance {
        let (a, b, _) = fit_two_tones(&Trace { t0: trace.t0, dt: trace.dt, values: y })?;
        return Err(Error::Beating {
            primary_re: carrier + a.omega.re,
            primary_im: a.omega.im,
            secondary_re: carrier + b.omega.re,
            secondary_im: b.omega.im,
        });
    }
    check_coverage(fitted, trace.duration())?;
    Ok(OmegaFit { omega: fitted + carrier, residual })
}

fn solve2(a: [[Complex64; 2]; 2], b: [Complex64; 2]) -> Option<[Complex64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}

/// Two-tone Prony fit; the tone with the larger amplitude comes first. Also returns the
/// relative residual of the two-tone model.
pub fn fit_two_tones(trace: &Trace) -> Result<(Tone, Tone, f64)> {
    let y = &trace.values;
    if y.len() < 8 {
        return Err(Error::invalid("trace", "needs at least 8 samples"));
    }
    // y[n+2] = p1 y[n+1] + p0 y[n] in the least-squares sense.
    let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut r = [Complex64::new(0.0, 0.0); 2];
    for w in y.windows(3) {
        let row = [w[1], w[0]];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] += row[i].conj() * row[j];
            }
            r[i] += row[i].conj() * w[2];
        }
    }
    let fail = || Error::invalid("trace", "two-tone model is singular");
    let [p1, p0] = solve2(g, r).ok_or_else(fail)?;
    let disc = (p1 * p1 + 4.0 * p0).sqrt();
    let (z1, z2) = (0.5 * (p1 + disc), 0.5 * (p1 - disc));
    // Amplitudes: y[n] = c1 z1^n + c2 z2^n.
    let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut q = [Complex64::new(0.0, 0.0); 2];
    let (mut e1, mut e2) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut basis = Vec::with_capacity(y.len());
    for &yn in y {
        let row = [e1, e2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] += row[i].conj() * row[j];
            }
            q[i] += row[i].conj() * yn;
        }
        basis.push(row);
        e1 *= z1;
        e2 *= z2;
    }
    let [c1, c2] = solve2(h, q).ok_or_else(fail)?;
    let (mut res, mut norm) = (0.0, 0.0);
    for (row, &yn) in basis.iter().zip(y) {
        res += (yn - c1 * row[0] - c2 * row[1]).norm_sqr();
        norm += yn.norm_sqr();
    }
    let t1 = Tone { omega: omega_from_ratio(z1, trace.dt), amplitude: c1 };
    let t2 = Tone { omega: omega_from_ratio(z2, trace.dt), amplitude: c2 };
    let residual = (res / norm).sqrt();
    Ok(if c1.norm() >= c2.norm() { (t1, t2, residual) } else { (t2, t1, residual) })
}

/// Per-trajectory reductions used by the ensemble estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberStats {
    /// |a_k|^2 in FFT order.
    pub power: Vec<f64>,
    /// (1/n) Σ_j I_j I_{j+s} for every shift s.
    pub autocorr: Vec<f64>,
    pub mean_intensity: f64,
}

impl MemberStats {
    pub fn from_state(state: &FieldState, tr: &Transforms) -> Self {
        let n = state.grid.n();
        let power = state.mode_amplitudes_with(tr).iter().map(|a| a.norm_sqr()).collect();
        let intensity = state.intensity();
        let mean_intensity = intensity.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<Complex64> = intensity.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        tr.forward.process(&mut buf);
        buf.iter_mut().for_each(|c| *c = Complex64::new(c.norm_sqr(), 0.0));
        tr.inverse.process(&mut buf);
        let scale = 1.0 / (n as f64 * n as f64);
        let autocorr = buf.iter().map(|c| c.re * scale).collect();
        Self { power, autocorr, mean_intensity }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NkTable {
    pub k: Vec<f64>,
    pub n_k: Vec<f64>,
    /// Standard error of the ensemble mean.
    pub sem: Vec<f64>,
    pub members: usize,
}

/// Running N_k = <|a_k|^2>; members must be added in a fixed order for bit-identical output.
#[derive(Debug, Clone)]
pub struct NkAccumulator {
    grid: Grid,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: usize,
}

impl NkAccumulator {
    pub fn new(grid: &Grid) -> Self {
        Self { grid: *grid, sum: vec![0.0; grid.n()], sum_sq: vec![0.0; grid.n()], count: 0 }
    }

    pub fn add(&mut self, power: &[f64]) {
        for ((s, q), &p) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(power) {
            *s += p;
            *q += p * p;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> NkTable {
        let m = self.count.max(1) as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / m).collect();
        let sem = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, mu)| {
                if self.count < 2 {
                    return 0.0;
                }
                let var = ((q / m - mu * mu) * m / (m - 1.0)).max(0.0);
                (var / m).sqrt()
            })
            .collect();
        NkTable { k: self.grid.wavenumbers(), n_k: mean, sem, members: self.count }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Table {
    pub dz: Vec<f64>,
    pub g2: Vec<f64>,
    /// Standard error from the spread of single-trajectory estimates.
    pub sigma: Vec<f64>,
    pub members: usize,
}

/// Running g2(s) = <I(z)I(z+s)> / <I>^2 with translation and ensemble averaging.
#[derive(Debug, Clone)]
pub struct G2Accumulator {
    grid: Grid,
    sum_corr: Vec<f64>,
    sum_g: Vec<f64>,
    sum_g_sq: Vec<f64>,
    sum_mean: f64,
    count: usize,
}

impl G2Accumulator {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n();
        Self {
            grid: *grid,
            sum_corr: vec![0.0; n],
            sum_g: vec![0.0; n],
            sum_g_sq: vec![0.0; n],
            sum_mean: 0.0,
            count: 0,
        }
    }

    pub fn add(&mut self, stats: &MemberStats) {
        let norm = stats.mean_intensity * stats.mean_intensity;
        for (s, &r) in stats.autocorr.iter().enumerate() {
            self.sum_corr[s] += r;
            let g = r / norm;
            self.sum_g[s] += g;
            self.sum_g_sq[s] += g * g;
        }
        self.sum_mean += stats.mean_intensity;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    fn shift(&self, dz: f64) -> Result<usize> {
        let x = dz / self.grid.dz();
        let s = x.round();
        if !x.is_finite() || (x - s).abs() > 1e-6 * s.abs().max(1.0) {
            return Err(Error::invalid("dz", format!("{dz:e} m is not a multiple of the grid spacing")));
        }
        Ok((s as i64).rem_euclid(self.grid.n() as i64) as usize)
    }

    pub fn finish(&self, dz: &[f64]) -> Result<G2Table> {
        if self.count < 2 {
            return Err(Error::invalid("ensemble", "g2 needs at least two members"));
        }
        let m = self.count as f64;
        let mean = self.sum_mean / m;
        let mut out = G2Table { dz: Vec::new(), g2: Vec::new(), sigma: Vec::new(), members: self.count };
        for &d in dz {
            let s = self.shift(d)?;
            let g_mean = self.sum_g[s] / m;
            let var = ((self.sum_g_sq[s] / m - g_mean * g_mean) * m / (m - 1.0)).max(0.0);
            out.dz.push(d);
            out.g2.push(self.sum_corr[s] / m / (mean * mean));
            out.sigma.push((var / m).sqrt());
        }
        Ok(out)
    }
}

pub fn measure_nk(states: &[FieldState]) -> Result<NkTable> {
    let first = states.first().ok_or_else(|| Error::invalid("ensemble", "is empty"))?;
    let tr = Transforms::new(first.grid.n());
    let mut acc = NkAccumulator::new(&first.grid);
    for s in states {
        let power: Vec<f64> = s.mode_amplitudes_with(&tr).iter().map(|a| a.norm_sqr()).collect();
        acc.add(&power);
    }
    Ok(acc.finish())
}

pub fn measure_g2(states: &[FieldState], dz: &[f64]) -> Result<G2Table> {
    let first = states.first().ok_or_else(|| Error::invalid("ensemble", "is empty"))?;
    let tr = Transforms::new(first.grid.n());
    let mut acc = G2Accumulator::new(&first.grid);
    for s in states {
        acc.add(&MemberStats::from_state(s, &tr));
    }
    acc.finish(dz)
}
