use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::bogoliubov::{CwBackground, NoiseSpectrum, Physics};
use crate::error::{finite, Error, Result};
use crate::grid::Grid;

/// Complex envelope Ψ(z) on a periodic grid at propagation time t.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub psi: Vec<Complex64>,
    pub t: f64,
    pub grid: Grid,
}

/// Shape of a seeded perturbation at grid wavenumber k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    /// Bogoliubov eigen-excitation u e^{ikz} - v* e^{-ikz}, scaled so the e^{ikz} amplitude is 1.
    PairMode,
    /// cos(kz).
    PlainCosine,
    /// e^{ikz} alone.
    PlaneWave,
}

/// Cached forward/inverse transforms for one grid size.
#[derive(Clone)]
pub struct Transforms {
    pub(crate) forward: Arc<dyn Fft<f64>>,
    pub(crate) inverse: Arc<dyn Fft<f64>>,
}

impl Transforms {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

impl std::fmt::Debug for Transforms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Transforms(n = {})", self.forward.len())
    }
}

pub fn cw_state(grid: &Grid, cw: &CwBackground) -> FieldState {
    FieldState {
        psi: vec![cw.psi0(); grid.n()],
        t: 0.0,
        grid: *grid,
    }
}

impl FieldState {
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dz()
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Mode amplitudes a_k in Ψ = Σ_k a_k e^{ikz} / sqrt(D), FFT order.
    pub fn mode_amplitudes_with(&self, tr: &Transforms) -> Vec<Complex64> {
        let mut buf = self.psi.clone();
        tr.forward.process(&mut buf);
        let scale = self.grid.length().sqrt() / self.grid.n() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn mode_amplitudes(&self) -> Vec<Complex64> {
        self.mode_amplitudes_with(&Transforms::new(self.grid.n()))
    }

    /// Single amplitude a_k by direct summation.
    pub fn mode_amplitude(&self, index: usize) -> Complex64 {
        let n = self.grid.n() as i64;
        let m = self.grid.mode_number(index);
        let base = -2.0 * std::f64::consts::PI / n as f64;
        let sum: Complex64 = self
            .psi
            .iter()
            .enumerate()
            .map(|(j, &p)| p * Complex64::from_polar(1.0, base * (j as i64 * m).rem_euclid(n) as f64))
            .sum();
        sum * (self.grid.length().sqrt() / n as f64)
    }

    /// Adds a perturbation of absolute amplitude `amplitude` [1/sqrt(m)] at grid bin `index`,
    /// phase-locked to the background phase.
    pub fn seed_mode(
        &mut self,
        index: usize,
        amplitude: f64,
        kind: SeedKind,
        physics: &Physics,
    ) -> Result<()> {
        finite("seed amplitude", amplitude)?;
        if index >= self.grid.n() {
            return Err(Error::invalid("seed index", format!("{index} outside the grid")));
        }
        if amplitude == 0.0 {
            return Ok(());
        }
        let psi0 = physics.cw.psi0_mag;
        if psi0 > 0.0 && amplitude.abs() >= 0.1 * psi0 {
            log::warn!(
                "seed amplitude {:.3e} is not small against |psi0| = {:.3e}; outside the Bogoliubov regime",
                amplitude,
                psi0
            );
        }
        let k = self.grid.k(index);
        let phase = Complex64::from_polar(amplitude, physics.cw.phi);
        let partner = match kind {
            SeedKind::PairMode => {
                let (u, v, _) = physics.pair_mode(k);
                -(v / u).conj()
            }
            SeedKind::PlainCosine => Complex64::new(0.0, 0.0),
            SeedKind::PlaneWave => Complex64::new(0.0, 0.0),
        };
        for (j, p) in self.psi.iter_mut().enumerate() {
            let z = self.grid.z(j);
            let e = Complex64::from_polar(1.0, k * z);
            *p += phase
                * match kind {
                    SeedKind::PairMode => e + partner * e.conj(),
                    SeedKind::PlainCosine => Complex64::new((k * z).cos(), 0.0),
                    SeedKind::PlaneWave => e,
                };
        }
        Ok(())
    }

    /// Adds circular complex Gaussian amplitudes with <|a_k|^2> = N_k on every k != 0 bin.
    pub fn seed_noise(&mut self, noise: &NoiseSpectrum, rng_seed: u64) {
        if noise.n0 == 0.0 {
            return;
        }
        let n = self.grid.n();
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        for (i, slot) in a.iter_mut().enumerate().skip(1) {
            let sd = (0.5 * noise.n_k(self.grid.k(i))).sqrt();
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            *slot = Complex64::new(sd * x, sd * y);
        }
        Transforms::new(n).inverse.process(&mut a);
        let scale = 1.0 / self.grid.length().sqrt();
        for (p, d) in self.psi.iter_mut().zip(&a) {
            *p += d * scale;
        }
    }
}
