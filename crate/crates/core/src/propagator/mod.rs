//! Split-step spectral integration of the propagation equation
//!
//! ∂tΨ = -v∂zΨ - iα(δc + δNL)Ψ + s·i(δc + δNL)Cv²∂z²Ψ,   δNL = α∫U(z-z')|Ψ(z')|²dz',
//!
//! in the lab frame on a periodic domain. `s` is selected by [`DispersionSign`].

mod checkpoint;
mod ensemble;
mod measure;
mod protocols;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use ensemble::{derive_seed, run_ensemble, run_ensemble_range};
pub use measure::{
    fit_two_tones, measure_g2, measure_nk, measure_omega, G2Accumulator, G2Table, MemberStats,
    NkAccumulator, NkTable, OmegaFit, Tone, Trace,
};
pub use protocols::{
    run_noise_ensemble, seeded_omega, EnsembleSummary, ModeTrace, SeededOmega, SeededOmegaOptions,
};
pub use state::{cw_state, FieldState, SeedKind, Transforms};

use num_complex::Complex64;

use crate::grid::Grid;
use crate::bogoliubov::Physics;
use crate::error::{positive, Error, Result};
use crate::potential::{ConvolutionMode, DiscreteKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Dispersion coefficient replaced by its mean-field value; two exact substeps.
    #[default]
    MeanField,
    /// Adds the residual, spatially varying dispersion as a third substep.
    FullThreeTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Composition {
    Lie,
    #[default]
    Strang,
}

/// Sign of the k^2 dispersion term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispersionSign {
    /// +i(δc+δNL)Cv²∂z²: free dispersion ω = αδc + vk + (δc + δNL)Cv²k², consistent with the
    /// linearized spectrum ω_k = sqrt(ω0(ω0 + 2 n_p U_k)).
    #[default]
    Bogoliubov,
    /// -i(δc+δNL)Cv²∂z², which reverses the sign of ω_k^0.
    Literal,
}

impl DispersionSign {
    pub fn factor(self) -> f64 {
        match self {
            DispersionSign::Bogoliubov => 1.0,
            DispersionSign::Literal => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub composition: Composition,
    /// Minimum number of explicit-midpoint substeps for the residual dispersion.
    pub residual_substeps: usize,
    /// Upper bound on dt max|ω0 + 2 n_p U_k|.
    pub guard: f64,
    /// Wavenumber band over which the guard is enforced; defaults to the physics cutoff.
    pub guard_band: Option<f64>,
    pub dispersion_sign: DispersionSign,
    pub convolution: ConvolutionMode,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::MeanField,
            dt: 1e-9,
            composition: Composition::Strang,
            residual_substeps: 1,
            guard: 0.1,
            guard_band: None,
            dispersion_sign: DispersionSign::Bogoliubov,
            convolution: ConvolutionMode::Circular,
        }
    }
}

impl SchemeConfig {
    fn band(&self, physics: &Physics, grid: &Grid) -> f64 {
        self.guard_band
            .unwrap_or_else(|| physics.default_k_max())
            .min(grid.nyquist())
    }

    /// max |ω0 + 2 n_p U_k| over grid wavenumbers inside the guard band.
    pub fn fastest_rate(&self, physics: &Physics, grid: &Grid) -> f64 {
        let band = self.band(physics, grid);
        let n_p = physics.cw.n_p;
        (0..=grid.n() / 2)
            .map(|i| i as f64 * grid.dk())
            .take_while(|&k| k <= band)
            .map(|k| (physics.omega0(k) + 2.0 * n_p * physics.u_k(k)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest dt allowed by the guard.
    pub fn max_stable_dt(&self, physics: &Physics, grid: &Grid) -> f64 {
        let rate = self.fastest_rate(physics, grid);
        if rate > 0.0 {
            self.guard / rate
        } else {
            f64::INFINITY
        }
    }

    pub fn validate(&self, physics: &Physics, grid: &Grid) -> Result<()> {
        positive("scheme.dt", self.dt)?;
        positive("scheme.guard", self.guard)?;
        if let Some(b) = self.guard_band {
            positive("scheme.guard_band", b)?;
        }
        if self.residual_substeps == 0 {
            return Err(Error::invalid("scheme.residual_substeps", "must be >= 1"));
        }
        let product = self.dt * self.fastest_rate(physics, grid);
        if product >= self.guard {
            return Err(Error::StepTooLarge { dt: self.dt, product, guard: self.guard });
        }
        Ok(())
    }
}

/// Per-step callback.
pub trait Observer {
    fn observe(&mut self, state: &FieldState);
}

impl Observer for () {
    fn observe(&mut self, _: &FieldState) {}
}

impl<F: FnMut(&FieldState)> Observer for F {
    fn observe(&mut self, state: &FieldState) {
        self(state)
    }
}

/// Stepper bound to one grid, physics and scheme.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    physics: Physics,
    cfg: SchemeConfig,
    kernel: DiscreteKernel,
    tr: Transforms,
    padded_tr: Option<Transforms>,
    k: Vec<f64>,
    /// Mean nonlinear detuning n_p U_0 / α, with U_0 from the discrete kernel.
    mean_nl: f64,
    linear_half: Vec<Complex64>,
    linear_full: Vec<Complex64>,
    detuning: Vec<f64>,
    work: Vec<Complex64>,
    stage: Vec<Complex64>,
    deriv: Vec<Complex64>,
    padded: Vec<Complex64>,
    last_good: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: &Grid, physics: &Physics, cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate(physics, grid)?;
        let kernel = DiscreteKernel::new(&physics.potential, grid, cfg.convolution)?;
        let n = grid.n();
        let mean_nl = physics.cw.n_p * kernel.u0() / physics.alpha();
        let padded_tr = kernel.padded_spectrum().map(|_| Transforms::new(2 * n));
        let zero = Complex64::new(0.0, 0.0);
        let mut p = Self {
            grid: *grid,
            physics: *physics,
            cfg: *cfg,
            kernel,
            tr: Transforms::new(n),
            padded_tr,
            k: grid.wavenumbers(),
            mean_nl,
            linear_half: Vec::new(),
            linear_full: Vec::new(),
            detuning: vec![0.0; n],
            work: vec![zero; n],
            stage: vec![zero; n],
            deriv: vec![zero; n],
            padded: vec![zero; 2 * n],
            last_good: vec![zero; n],
        };
        p.rebuild_linear();
        Ok(p)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn physics(&self) -> &Physics {
        &self.physics
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &DiscreteKernel {
        &self.kernel
    }

    pub fn transforms(&self) -> &Transforms {
        &self.tr
    }

    pub fn dt(&self) -> f64 {
        self.cfg.dt
    }

    /// Changes the step, re-checking the stability guard.
    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        let cfg = SchemeConfig { dt, ..self.cfg };
        cfg.validate(&self.physics, &self.grid)?;
        self.cfg = cfg;
        self.rebuild_linear();
        Ok(())
    }

    fn dispersion_factor(&self) -> f64 {
        let v = self.physics.polariton.v;
        self.cfg.dispersion_sign.factor() * self.physics.polariton.dispersion * v * v
    }

    /// Linear rate of bin k: kv + s (δc + δ̄NL) C v² k². Ψ_k evolves as e^{-i rate t}.
    fn linear_rate(&self, k: f64) -> f64 {
        k * self.physics.polariton.v
            + self.dispersion_factor() * (self.physics.delta_c + self.mean_nl) * k * k
    }

    fn linear_multiplier(&self, h: f64) -> Vec<Complex64> {
        let inv_n = 1.0 / self.grid.n() as f64;
        self.k
            .iter()
            .map(|&k| Complex64::from_polar(inv_n, -self.linear_rate(k) * h))
            .collect()
    }

    fn rebuild_linear(&mut self) {
        self.linear_half = self.linear_multiplier(0.5 * self.cfg.dt);
        self.linear_full = self.linear_multiplier(self.cfg.dt);
    }

    /// Linear eigenfrequency of bin k as realized by the scheme (exact for constant coefficients).
    pub fn scheme_linear_frequency(&self, k: f64) -> f64 {
        self.linear_rate(k) + self.physics.alpha() * (self.physics.delta_c + self.mean_nl)
    }

    fn apply_linear(&mut self, psi: &mut [Complex64], half: bool) {
        self.tr.forward.process(psi);
        let mult = if half { &self.linear_half } else { &self.linear_full };
        psi.iter_mut().zip(mult).for_each(|(p, m)| *p *= m);
        self.tr.inverse.process(psi);
    }

    /// Fills `self.detuning` with δNL(z) = α ∫U(z-z')|Ψ(z')|²dz'.
    fn nonlinear_detuning(&mut self, psi: &[Complex64]) {
        let alpha = self.physics.alpha();
        let n = self.grid.n();
        if self.kernel.is_local() {
            let c = alpha * self.kernel.u0();
            for (d, p) in self.detuning.iter_mut().zip(psi) {
                *d = c * p.norm_sqr();
            }
            return;
        }
        match (self.kernel.padded_spectrum(), &self.padded_tr) {
            (Some(spec), Some(tr)) => {
                for (j, slot) in self.padded.iter_mut().enumerate() {
                    *slot = if j < n {
                        Complex64::new(psi[j].norm_sqr(), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
                tr.forward.process(&mut self.padded);
                self.padded.iter_mut().zip(spec).for_each(|(a, u)| *a *= u);
                tr.inverse.process(&mut self.padded);
                let scale = alpha / (2 * n) as f64;
                for (d, a) in self.detuning.iter_mut().zip(&self.padded) {
                    *d = a.re * scale;
                }
            }
            _ => {
                for (w, p) in self.work.iter_mut().zip(psi) {
                    *w = Complex64::new(p.norm_sqr(), 0.0);
                }
                self.tr.forward.process(&mut self.work);
                self.work
                    .iter_mut()
                    .zip(self.kernel.spectrum())
                    .for_each(|(w, u)| *w *= u);
                self.tr.inverse.process(&mut self.work);
                let scale = alpha / n as f64;
                for (d, w) in self.detuning.iter_mut().zip(&self.work) {
                    *d = w.re * scale;
                }
            }
        }
    }

    /// Exact pointwise phase e^{-iα(δc + δNL(z))h}; |Ψ| and hence δNL are invariant under it.
    fn apply_phase(&mut self, psi: &mut [Complex64], h: f64) {
        self.nonlinear_detuning(psi);
        let alpha = self.physics.alpha();
        let dc = self.physics.delta_c;
        for (p, d) in psi.iter_mut().zip(&self.detuning) {
            *p *= Complex64::from_polar(1.0, -alpha * (dc + d) * h);
        }
    }

    /// F(Ψ) = s i Cv² (δNL(z) - δ̄NL) ∂z²Ψ into `self.deriv`.
    fn residual_rhs(&mut self, psi: &[Complex64]) -> f64 {
        self.nonlinear_detuning(psi);
        self.deriv.copy_from_slice(psi);
        self.tr.forward.process(&mut self.deriv);
        let inv_n = 1.0 / self.grid.n() as f64;
        for (d, &k) in self.deriv.iter_mut().zip(&self.k) {
            *d *= -k * k * inv_n;
        }
        self.tr.inverse.process(&mut self.deriv);
        let coef = Complex64::new(0.0, self.dispersion_factor());
        let mut max_dev: f64 = 0.0;
        for (d, &nl) in self.deriv.iter_mut().zip(&self.detuning) {
            let dev = nl - self.mean_nl;
            max_dev = max_dev.max(dev.abs());
            *d *= coef * dev;
        }
        max_dev
    }

    /// Residual dispersion over h by explicit-midpoint substeps, re-evaluating δNL at each stage.
    fn apply_residual(&mut self, psi: &mut [Complex64], h: f64) {
        let k_max = self.grid.nyquist();
        let mut stage = std::mem::take(&mut self.stage);
        let max_dev = self.residual_rhs(psi);
        // Keep |λ h_sub| <= 0.1 for the stiffest bin, where the midpoint rule's growth is O((λh)^4).
        let stiff = self.dispersion_factor().abs() * max_dev * k_max * k_max * h;
        let substeps = self.cfg.residual_substeps.max((stiff / 0.1).ceil() as usize);
        let hs = h / substeps as f64;
        for sub in 0..substeps {
            if sub > 0 {
                self.residual_rhs(psi);
            }
            for ((s, p), d) in stage.iter_mut().zip(psi.iter()).zip(&self.deriv) {
                *s = p + d * (0.5 * hs);
            }
            self.residual_rhs(&stage);
            for (p, d) in psi.iter_mut().zip(&self.deriv) {
                *p += d * hs;
            }
        }
        self.stage = stage;
    }

    /// Advances `state` by one step dt.
    pub fn step(&mut self, state: &mut FieldState) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::invalid("state", "grid differs from the propagator grid"));
        }
        self.last_good.copy_from_slice(&state.psi);
        let dt = self.cfg.dt;
        let psi = &mut state.psi;
        match (self.cfg.scheme, self.cfg.composition) {
            (Scheme::MeanField, Composition::Lie) => {
                self.apply_linear(psi, false);
                self.apply_phase(psi, dt);
            }
            (Scheme::MeanField, Composition::Strang) => {
                self.apply_linear(psi, true);
                self.apply_phase(psi, dt);
                self.apply_linear(psi, true);
            }
            (Scheme::FullThreeTerm, Composition::Lie) => {
                self.apply_linear(psi, false);
                self.apply_phase(psi, dt);
                self.apply_residual(psi, dt);
            }
            (Scheme::FullThreeTerm, Composition::Strang) => {
                self.apply_linear(psi, true);
                self.apply_phase(psi, 0.5 * dt);
                self.apply_residual(psi, dt);
                self.apply_phase(psi, 0.5 * dt);
                self.apply_linear(psi, true);
            }
        }
        state.t += dt;
        let peak = psi.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        if !peak.is_finite() || peak > 1e250 || psi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Diverged { t: state.t, k: self.dominant_mode() });
        }
        Ok(())
    }

    /// Wavenumber of the strongest non-background mode in the last finite state.
    fn dominant_mode(&mut self) -> f64 {
        let mut buf = self.last_good.clone();
        self.tr.forward.process(&mut buf);
        buf.iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| self.grid.k(i))
            .unwrap_or(0.0)
    }

    /// Steps to `t_final` with uniform steps no larger than dt, landing on `t_final` exactly.
    /// The observer sees the state after every step. Returns the number of steps taken.
    pub fn propagate(
        &mut self,
        state: &mut FieldState,
        t_final: f64,
        observer: &mut dyn Observer,
    ) -> Result<usize> {
        let remaining = t_final - state.t;
        if !(remaining >= 0.0) {
            return Err(Error::invalid("t_final", format!("{t_final} precedes state time {}", state.t)));
        }
        if remaining == 0.0 {
            return Ok(0);
        }
        let nominal = self.cfg.dt;
        let steps = ((remaining / nominal) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = remaining / steps as f64;
        if h != nominal {
            self.set_dt(h)?;
        }
        let t0 = state.t;
        let result = (|| {
            for i in 1..=steps {
                self.step(state)?;
                state.t = if i == steps { t_final } else { t0 + i as f64 * h };
                observer.observe(state);
            }
            Ok(steps)
        })();
        if h != nominal {
            self.set_dt(nominal)?;
        }
        result
    }
}
