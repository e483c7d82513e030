//! Linearized dynamics around the CW background: spectrum, Bogoliubov coefficients,
//! squeezing, occupations and intensity correlations.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{finite, non_negative, positive, Error, Result};
use crate::medium::PolaritonParams;
use crate::potential::PotentialSpec;
use crate::quadrature;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwBackground {
    /// Photon density n_p [1/m].
    pub n_p: f64,
    pub phi: f64,
    /// |psi_0| = sqrt(n_p) / alpha.
    pub psi0_mag: f64,
}

impl CwBackground {
    pub fn new(n_p: f64, phi: f64, alpha: f64) -> Result<Self> {
        non_negative("background.photon_density", n_p)?;
        finite("background.phase", phi)?;
        positive("alpha", alpha)?;
        Ok(Self { n_p, phi, psi0_mag: n_p.sqrt() / alpha })
    }

    pub fn psi0(&self) -> Complex64 {
        Complex64::from_polar(self.psi0_mag, self.phi)
    }
}

/// Initial fluctuation spectrum N_k = N_0 exp(-(k/q_tr)^2). Even in k by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpectrum {
    pub n0: f64,
    pub q_tr: f64,
}

impl NoiseSpectrum {
    pub fn new(n0: f64, q_tr: f64) -> Result<Self> {
        non_negative("noise.n0", n0)?;
        positive("noise.q_tr", q_tr)?;
        Ok(Self { n0, q_tr })
    }

    pub fn n_k(&self, k: f64) -> f64 {
        self.n0 * (-(k / self.q_tr).powi(2)).exp()
    }
}

/// Whether vacuum (+1) contributions are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistics {
    #[default]
    Classical,
    Quantum,
}

impl Statistics {
    fn vacuum(self) -> f64 {
        match self {
            Statistics::Classical => 0.0,
            Statistics::Quantum => 1.0,
        }
    }
}

/// Which branch of vk ± ω_k an observed component follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovResult {
    pub k: f64,
    pub omega0: f64,
    pub omega: Complex64,
    pub gamma_k: f64,
    pub mu: Complex64,
    pub nu: Complex64,
    pub g_k: f64,
    pub n_k_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Options {
    /// Upper integration limit; defaults to `Physics::default_k_max`.
    pub k_max: Option<f64>,
    /// Absolute tolerance on g2 - 1.
    pub tolerance: f64,
    pub max_intervals: usize,
}

impl Default for G2Options {
    fn default() -> Self {
        Self { k_max: None, tolerance: 1e-4, max_intervals: 4000 }
    }
}

/// Everything the linearization needs: coefficients, kernel, background and coupling detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub polariton: PolaritonParams,
    pub potential: PotentialSpec,
    pub cw: CwBackground,
    pub delta_c: f64,
}

impl Physics {
    pub fn new(
        polariton: PolaritonParams,
        potential: PotentialSpec,
        cw: CwBackground,
        delta_c: f64,
    ) -> Result<Self> {
        potential.validate()?;
        finite("delta_c", delta_c)?;
        let alpha = polariton.sin2_theta;
        if alpha <= 0.0 {
            return Err(Error::invalid("alpha", "the background needs a non-zero atomic fraction"));
        }
        let mismatch = (cw.psi0_mag * cw.psi0_mag * alpha * alpha - cw.n_p).abs();
        if mismatch > 1e-9 * cw.n_p.max(1e-300) {
            return Err(Error::invalid("background", "psi0_mag^2 alpha^2 must equal n_p"));
        }
        Ok(Self { polariton, potential, cw, delta_c })
    }

    pub fn alpha(&self) -> f64 {
        self.polariton.sin2_theta
    }

    pub fn u_k(&self, k: f64) -> f64 {
        self.potential.kernel_ft(k)
    }

    pub fn u0(&self) -> f64 {
        self.u_k(0.0)
    }

    /// Mean nonlinear detuning n_p U_0 / alpha.
    pub fn mean_nl_detuning(&self) -> f64 {
        self.cw.n_p * self.u0() / self.alpha()
    }

    /// Total coupling detuning of the background, delta_c + n_p U_0 / alpha.
    pub fn total_detuning(&self) -> f64 {
        self.delta_c + self.mean_nl_detuning()
    }

    /// CW phase rate alpha delta_c + n_p U_0: the background evolves as e^{-i rate t}.
    pub fn cw_frequency(&self) -> f64 {
        self.alpha() * self.delta_c + self.cw.n_p * self.u0()
    }

    /// Coefficient of k^2 in the free dispersion, (delta_c + n_p U_0/alpha) C v^2.
    pub fn dispersion_coefficient(&self) -> f64 {
        let v = self.polariton.v;
        self.total_detuning() * self.polariton.dispersion * v * v
    }

    pub fn omega0(&self, k: f64) -> f64 {
        self.dispersion_coefficient() * k * k
    }

    /// w0 (w0 + 2 n_p U_k); negative exactly on the unstable set.
    pub fn radicand(&self, k: f64) -> f64 {
        let w0 = self.omega0(k);
        w0 * (w0 + 2.0 * self.cw.n_p * self.u_k(k))
    }

    /// Bogoliubov frequency with Re >= 0, and +i sqrt(|.|) on the growth branch.
    pub fn spectrum(&self, k: f64) -> Complex64 {
        let r = self.radicand(k);
        if r >= 0.0 {
            Complex64::new(r.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-r).sqrt())
        }
    }

    pub fn growth_rate(&self, k: f64) -> f64 {
        self.spectrum(k).im
    }

    /// Eigenfrequency of the positive-norm excitation: sign(w0) ω_k on the stable band.
    pub fn signed_frequency(&self, k: f64) -> Result<f64> {
        let r = self.radicand(k);
        if r < 0.0 {
            return Err(Error::UnstableMode { k, growth: (-r).sqrt() });
        }
        let a = self.omega0(k) + self.cw.n_p * self.u_k(k);
        Ok(a.signum() * r.sqrt())
    }

    /// Oscillation frequency (relative to the carrier) of a fluctuation component at wavenumber k:
    /// alpha delta_c + n_p U_0 + v k ± ω_k. An excitation whose upper component sits at k has its
    /// partner at -k on the lower branch, so the branch follows the sign of k for the usual
    /// positive-k seeding.
    pub fn full_dispersion(&self, k: f64, branch: Branch) -> Result<f64> {
        let w = self.signed_frequency(k)?;
        let shift = self.polariton.v * k
            + match branch {
                Branch::Upper => w,
                Branch::Lower => -w,
            };
        Ok(self.cw_frequency() + shift)
    }

    /// Branch chosen by the sign of k.
    pub fn full_dispersion_signed(&self, k: f64) -> Result<f64> {
        let branch = if k >= 0.0 { Branch::Upper } else { Branch::Lower };
        self.full_dispersion(k, branch)
    }

    /// Dynamic Bogoliubov coefficients (μ_k(t), ν_k(t)).
    ///
    /// Evaluated in real arithmetic: cos(ωt) and sin(ωt)/ω are even in ω, so both are real
    /// functions of r = ω^2 (trigonometric for r > 0, hyperbolic for r < 0).
    pub fn mu_nu(&self, k: f64, t: f64) -> (Complex64, Complex64) {
        let w0 = self.omega0(k);
        let b = self.cw.n_p * self.u_k(k);
        let a = w0 + b;
        let r = w0 * (w0 + 2.0 * b);
        let x = r * t * t;
        let (c, s) = if x.abs() < 1e-12 {
            (1.0 - x / 2.0 + x * x / 24.0, t * (1.0 - x / 6.0 + x * x / 120.0))
        } else if r > 0.0 {
            let w = r.sqrt();
            ((w * t).cos(), (w * t).sin() / w)
        } else {
            let g = (-r).sqrt();
            ((g * t).cosh(), (g * t).sinh() / g)
        };
        (Complex64::new(c, -a * s), Complex64::new(0.0, -b * s))
    }

    pub fn squeezing_spectrum(&self, k: f64, t: f64) -> f64 {
        let (mu, nu) = self.mu_nu(k, t);
        (mu.norm() - nu.norm()).powi(2)
    }

    pub fn mode_occupation(&self, k: f64, t: f64, noise: &NoiseSpectrum, stats: Statistics) -> f64 {
        let (mu, nu) = self.mu_nu(k, t);
        let n = noise.n_k(k);
        mu.norm_sqr() * n + nu.norm_sqr() * (n + stats.vacuum())
    }

    pub fn analyze(&self, k: f64, t: f64, noise: &NoiseSpectrum, stats: Statistics) -> BogoliubovResult {
        let omega = self.spectrum(k);
        let (mu, nu) = self.mu_nu(k, t);
        let n = noise.n_k(k);
        BogoliubovResult {
            k,
            omega0: self.omega0(k),
            omega,
            gamma_k: omega.im,
            mu,
            nu,
            g_k: (mu.norm() - nu.norm()).powi(2),
            n_k_t: mu.norm_sqr() * n + nu.norm_sqr() * (n + stats.vacuum()),
        }
    }

    /// Mode and pair amplitudes (u, v) of the eigen-excitation at k, with its eigenfrequency.
    /// Stable modes are normalized to |u|^2 - |v|^2 = 1; unstable ones (growing branch) to u = 1.
    pub fn pair_mode(&self, k: f64) -> (Complex64, Complex64, Complex64) {
        let w0 = self.omega0(k);
        let b = self.cw.n_p * self.u_k(k);
        let a = w0 + b;
        if b == 0.0 {
            return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(w0, 0.0));
        }
        let r = w0 * (w0 + 2.0 * b);
        if r >= 0.0 {
            let lambda = a.signum() * r.sqrt();
            let ratio = (a - lambda) / b;
            let u = 1.0 / (1.0 - ratio * ratio).sqrt();
            (Complex64::new(u, 0.0), Complex64::new(u * ratio, 0.0), Complex64::new(lambda, 0.0))
        } else {
            let lambda = I * (-r).sqrt();
            (Complex64::new(1.0, 0.0), (a - lambda) / b, lambda)
        }
    }

    /// Integration cutoff max(5 q_tr, k_R + 20/l); 5 q_tr for the local kernel.
    pub fn default_k_max(&self) -> f64 {
        let base = 5.0 * self.polariton.q_tr;
        match self.potential.k_r() {
            Some(k_r) => base.max(k_r.abs() + 20.0 / self.potential.range()),
            None => base,
        }
    }

    fn g2_integrand(&self, k: f64, t: f64, noise: &NoiseSpectrum, stats: Statistics) -> f64 {
        let (mu, nu) = self.mu_nu(k, t);
        let n = noise.n_k(k);
        let q = stats.vacuum();
        // |μ||ν|cos(arg μν) = Re(μν)
        mu.norm_sqr() * n + nu.norm_sqr() * (n + q) + (2.0 * n + q) * (mu * nu).re
    }

    fn g2_breakpoints(&self, k_max: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        if let Some(k_r) = self.potential.k_r() {
            let l = self.potential.range();
            for m in [-8.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
                pts.push(k_r.abs() + m / l);
            }
        }
        let q = self.polariton.q_tr;
        pts.extend([0.5 * q, q, 2.0 * q, 3.0 * q]);
        pts.retain(|&x| x > 0.0 && x < k_max);
        pts
    }

    /// Normalized intensity correlation g2 at separation dz after propagation time t.
    pub fn g2(
        &self,
        dz: f64,
        t: f64,
        noise: &NoiseSpectrum,
        stats: Statistics,
        opts: &G2Options,
    ) -> Result<f64> {
        finite("dz", dz)?;
        finite("t", t)?;
        positive("background.photon_density", self.cw.n_p)?;
        positive("g2 tolerance", opts.tolerance)?;
        let k_max = positive("k_max", opts.k_max.unwrap_or_else(|| self.default_k_max()))?;
        let alpha = self.alpha();
        let prefactor = 2.0 * alpha * alpha / (PI * self.cw.n_p);
        let integrand = |k: f64| self.g2_integrand(k, t, noise, stats) * (k * dz).cos();
        let breaks = self.g2_breakpoints(k_max);
        let tol = 1e-2 * opts.tolerance / prefactor;
        let body = quadrature::integrate(integrand, 0.0, k_max, &breaks, tol, opts.max_intervals);
        let tail = quadrature::integrate(
            |k: f64| self.g2_integrand(k, t, noise, stats).abs(),
            k_max,
            2.0 * k_max,
            &[],
            tol,
            200,
        );
        let tail_est = prefactor * tail.value;
        let err_est = prefactor * body.error;
        if tail_est > opts.tolerance || err_est > opts.tolerance {
            return Err(Error::Quadrature { tail: tail_est.max(err_est), tol: opts.tolerance });
        }
        Ok(1.0 + prefactor * body.value)
    }
}

/// Location and size of the characteristic spectral features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub k: f64,
    pub value: f64,
}

impl Physics {
    fn scan(&self, k_hi: f64, points: usize) -> impl Iterator<Item = f64> {
        let dk = k_hi / points as f64;
        (1..=points).map(move |i| i as f64 * dk)
    }

    /// Deepest interaction-induced lowering of the stable spectrum below the free dispersion:
    /// argmin over stable k in (0, k_hi] of Re ω_k - |ω_k^0|. `value` is the (positive) depth.
    pub fn roton_dip(&self, k_hi: f64, points: usize) -> Option<Feature> {
        self.scan(k_hi, points)
            .filter(|&k| self.radicand(k) >= 0.0)
            .map(|k| (k, self.spectrum(k).re - self.omega0(k).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|&(_, d)| d < 0.0)
            .map(|(k, d)| Feature { k, value: -d })
    }

    /// Interior local maxima of Re ω_k on the stable band of (0, k_hi].
    pub fn local_maxima(&self, k_hi: f64, points: usize) -> Vec<Feature> {
        let ks: Vec<f64> = self.scan(k_hi, points).collect();
        let w: Vec<Option<f64>> = ks
            .iter()
            .map(|&k| (self.radicand(k) >= 0.0).then(|| self.spectrum(k).re))
            .collect();
        (1..ks.len().saturating_sub(1))
            .filter_map(|i| match (w[i - 1], w[i], w[i + 1]) {
                (Some(a), Some(b), Some(c)) if b > a && b >= c => Some(Feature { k: ks[i], value: b }),
                _ => None,
            })
            .collect()
    }

    /// Local maximum of Re ω_k closest to k_R.
    pub fn anti_roton_peak(&self, k_hi: f64, points: usize) -> Option<Feature> {
        let k_r = self.potential.k_r()?;
        self.local_maxima(k_hi, points)
            .into_iter()
            .min_by(|a, b| (a.k - k_r).abs().total_cmp(&(b.k - k_r).abs()))
    }

    /// Maximum growth rate on (0, k_hi].
    pub fn growth_peak(&self, k_hi: f64, points: usize) -> Option<Feature> {
        self.scan(k_hi, points)
            .map(|k| Feature { k, value: self.growth_rate(k) })
            .filter(|f| f.value > 0.0)
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{polariton_params, EitParams, MediumParams};

    fn physics(n_p: f64, u_l: f64, delta_c: f64) -> Physics {
        let medium = MediumParams {
            atom_density: 16e6,
            mode_area: 4.42e-12,
            length: 0.0268,
            cross_section: 1.7145e-13,
            linewidth: 1.43291e7,
            light_speed: 299_792_458.0,
            k0: 7.0236e6,
        };
        let eit = EitParams { omega: 1.2e8, delta_c };
        let pol = polariton_params(&medium, &eit, 68_982.0).unwrap();
        let pot = PotentialSpec::LocalDelta { u_l, range: 0.0027 };
        let cw = CwBackground::new(n_p, 0.3, pol.sin2_theta).unwrap();
        Physics::new(pol, pot, cw, delta_c).unwrap()
    }

    #[test]
    fn identity_at_t0() {
        let p = physics(4e5, 5693.0, -3.64e6);
        let (mu, nu) = p.mu_nu(1000.0, 0.0);
        assert_eq!(mu, Complex64::new(1.0, 0.0));
        assert_eq!(nu, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn free_evolution_without_interaction() {
        let p = physics(4e5, 0.0, -3.64e6);
        for &(k, t) in &[(300.0, 1e-6), (2500.0, 3e-6), (9000.0, 7e-7)] {
            let (mu, nu) = p.mu_nu(k, t);
            let expect = Complex64::from_polar(1.0, -p.omega0(k) * t);
            assert!((mu - expect).norm() < 1e-12);
            assert_eq!(nu.norm(), 0.0);
            assert_eq!(p.squeezing_spectrum(k, t), 1.0);
        }
    }

    #[test]
    fn free_dispersion_without_photons() {
        let p = physics(0.0, 5693.0, -3.64e6);
        for k in [0.0, 100.0, 4000.0] {
            assert_eq!(p.spectrum(k), Complex64::new(p.omega0(k).abs(), 0.0));
        }
        assert_eq!(p.full_dispersion(0.0, Branch::Upper).unwrap(), p.alpha() * p.delta_c);
    }

    #[test]
    fn vacuum_seeding_gives_pair_creation() {
        let p = physics(4e5, -5693.0, -3.64e6);
        let none = NoiseSpectrum::new(0.0, 1795.0).unwrap();
        let (_, nu) = p.mu_nu(2000.0, 5e-6);
        let n = p.mode_occupation(2000.0, 5e-6, &none, Statistics::Quantum);
        assert!((n - nu.norm_sqr()).abs() < 1e-12 * n.max(1.0));
        assert_eq!(p.mode_occupation(2000.0, 5e-6, &none, Statistics::Classical), 0.0);
    }

    #[test]
    fn occupation_at_t0_is_initial() {
        let p = physics(4e5, -5693.0, -3.64e6);
        let noise = NoiseSpectrum::new(5.0, 1795.0).unwrap();
        for stats in [Statistics::Classical, Statistics::Quantum] {
            assert_eq!(p.mode_occupation(700.0, 0.0, &noise, stats), noise.n_k(700.0));
        }
    }

    #[test]
    fn no_fluctuations_no_correlations() {
        let p = physics(4e5, 5693.0, -3.64e6);
        let none = NoiseSpectrum::new(0.0, 1795.0).unwrap();
        for dz in [0.0, 1e-3, 5e-3] {
            let g = p.g2(dz, 6e-6, &none, Statistics::Classical, &G2Options::default()).unwrap();
            assert_eq!(g, 1.0);
        }
    }

    #[test]
    fn unstable_dispersion_rejected() {
        let p = physics(4e5, -5693.0, -3.64e6);
        let k = 2000.0;
        assert!(p.growth_rate(k) > 0.0);
        assert!(matches!(p.full_dispersion(k, Branch::Upper), Err(Error::UnstableMode { .. })));
    }

    #[test]
    fn pair_mode_is_an_eigenvector() {
        for (u_l, k) in [(5693.0, 2000.0), (-5693.0, 2000.0), (-5693.0, 30_000.0)] {
            let p = physics(4e5, u_l, -3.64e6);
            let (u, v, lambda) = p.pair_mode(k);
            let b = p.cw.n_p * p.u_k(k);
            let a = p.omega0(k) + b;
            // M (u, -v) = λ (u, -v), M = [[a, b], [-b, -a]]
            let r1 = a * u - b * v - lambda * u;
            let r2 = -b * u + a * v + lambda * v;
            assert!(r1.norm() < 1e-9 * a.abs(), "{r1}");
            assert!(r2.norm() < 1e-9 * a.abs(), "{r2}");
        }
    }
}
