//! Laser-induced interaction kernels U(z) and their Fourier transforms U_k = ∫U(z)e^{-ikz}dz.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{finite, non_negative, positive, Error, Result};
use crate::grid::Grid;

/// Shortest periodic domain, in units of the interaction range, that still neglects edges.
pub const MIN_DOMAIN_RANGES: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// U(z) = -(U_L/2) cos(k_lz z) cos(k_b z) e^{-|z|/l}.
    Grating {
        u_l: f64,
        range: f64,
        k_lz: f64,
        k_b: f64,
    },
    /// U(z) = (U_L l / 8) δ(z); `u_l` carries the sign of the interaction.
    LocalDelta { u_l: f64, range: f64 },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::Grating { u_l, range, k_lz, k_b } => {
                finite("potential.u_l", u_l)?;
                positive("potential.range", range)?;
                non_negative("potential.k_lz", k_lz)?;
                non_negative("potential.k_b", k_b)?;
            }
            PotentialSpec::LocalDelta { u_l, range } => {
                finite("potential.u_l", u_l)?;
                positive("potential.range", range)?;
            }
        }
        Ok(())
    }

    pub fn u_l(&self) -> f64 {
        match *self {
            PotentialSpec::Grating { u_l, .. } | PotentialSpec::LocalDelta { u_l, .. } => u_l,
        }
    }

    pub fn range(&self) -> f64 {
        match *self {
            PotentialSpec::Grating { range, .. } | PotentialSpec::LocalDelta { range, .. } => range,
        }
    }

    /// Roton wavenumber k_R = k_lz - k_b (grating only).
    pub fn k_r(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Grating { k_lz, k_b, .. } => Some(k_lz - k_b),
            PotentialSpec::LocalDelta { .. } => None,
        }
    }

    pub fn with_u_l(mut self, value: f64) -> Self {
        match &mut self {
            PotentialSpec::Grating { u_l, .. } | PotentialSpec::LocalDelta { u_l, .. } => {
                *u_l = value
            }
        }
        self
    }

    pub fn kernel_value(&self, z: f64) -> Result<f64> {
        match *self {
            PotentialSpec::Grating { u_l, range, k_lz, k_b } => {
                Ok(-0.5 * u_l * (k_lz * z).cos() * (k_b * z).cos() * (-z.abs() / range).exp())
            }
            PotentialSpec::LocalDelta { .. } => Err(Error::PointwiseLocalKernel),
        }
    }

    /// Exact transform: four Lorentzians at ±(k_lz - k_b) and ±(k_lz + k_b).
    pub fn kernel_ft(&self, k: f64) -> f64 {
        match *self {
            PotentialSpec::Grating { u_l, range, k_lz, k_b } => {
                let l = range;
                let lor = |q: f64| 1.0 / (1.0 + l * l * (k - q) * (k - q));
                let (kr, kp) = (k_lz - k_b, k_lz + k_b);
                -0.25 * u_l * l * ((lor(kr) + lor(-kr)) + (lor(kp) + lor(-kp)))
            }
            PotentialSpec::LocalDelta { u_l, range } => u_l * range / 8.0,
        }
    }

    /// Transform restricted to the envelope band: only the pair at ±k_R is kept.
    pub fn envelope_ft(&self, k: f64) -> f64 {
        match *self {
            PotentialSpec::Grating { u_l, range, k_lz, k_b } => {
                let l = range;
                let kr = k_lz - k_b;
                let lor = |q: f64| 1.0 / (1.0 + l * l * (k - q) * (k - q));
                -0.25 * u_l * l * (lor(kr) + lor(-kr))
            }
            PotentialSpec::LocalDelta { .. } => self.kernel_ft(k),
        }
    }

    /// Real-space envelope kernel -(U_L/4) cos(k_R z) e^{-|z|/l}, whose transform is `envelope_ft`.
    pub fn envelope_value(&self, z: f64) -> Result<f64> {
        match *self {
            PotentialSpec::Grating { u_l, range, k_lz, k_b } => {
                Ok(-0.25 * u_l * ((k_lz - k_b) * z).cos() * (-z.abs() / range).exp())
            }
            PotentialSpec::LocalDelta { .. } => Err(Error::PointwiseLocalKernel),
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, PotentialSpec::LocalDelta { .. })
    }
}

/// Drive strength of the interaction-inducing laser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaserDrive {
    Rabi(f64),
    /// Omega_L^2 = intensity * rabi_sq_per_intensity.
    Intensity {
        intensity: f64,
        rabi_sq_per_intensity: f64,
    },
}

impl LaserDrive {
    pub fn rabi_sq(&self) -> f64 {
        match *self {
            LaserDrive::Rabi(w) => w * w,
            LaserDrive::Intensity {
                intensity,
                rabi_sq_per_intensity,
            } => intensity * rabi_sq_per_intensity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiddiParams {
    pub drive: LaserDrive,
    /// Laser detuning delta_L [1/s].
    pub delta_l: f64,
    /// Guided-to-free-space emission ratio.
    pub eta: f64,
    /// Atomic half-width [1/s].
    pub gamma: f64,
    /// Laser wavenumber [1/m].
    pub k_l: f64,
    /// Tilt angle of the laser relative to the waveguide axis [rad].
    pub theta_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiddiStrength {
    pub u_l: f64,
    /// Free-space scattering rate R_fs [1/s].
    pub r_fs: f64,
}

pub fn liddi_strength(p: &LiddiParams) -> Result<LiddiStrength> {
    finite("laser.detuning", p.delta_l)?;
    if p.delta_l == 0.0 {
        return Err(Error::invalid(
            "laser.detuning",
            "resonant illumination lies outside the far-detuned model",
        ));
    }
    positive("laser.eta", p.eta)?;
    positive("gamma", p.gamma)?;
    let rabi_sq = non_negative("laser rabi^2", p.drive.rabi_sq())?;
    if p.delta_l * p.delta_l < 100.0 * rabi_sq {
        log::warn!(
            "laser detuning {:.3e} 1/s is not far beyond the Rabi frequency {:.3e} 1/s",
            p.delta_l,
            rabi_sq.sqrt()
        );
    }
    let r_fs = p.gamma * rabi_sq / (2.0 * p.delta_l * p.delta_l);
    Ok(LiddiStrength {
        u_l: 2.0 * p.eta * r_fs,
        r_fs,
    })
}

pub fn projected_wavenumber(k_l: f64, theta_l: f64) -> f64 {
    k_l * theta_l.cos()
}

/// How the nonlocal convolution treats the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMode {
    /// Periodic domain, circular convolution.
    #[default]
    Circular,
    /// Literal ∫_0^D with zero padding, no wrap-around.
    FiniteWindow,
}

/// Kernel prepared for FFT convolution on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    grid: Grid,
    mode: ConvolutionMode,
    local: bool,
    /// Envelope spectrum at the grid wavenumbers (FFT order).
    spectrum: Vec<f64>,
    /// Transform of the zero-padded real-space kernel (length 2n), finite-window mode only.
    padded: Option<Vec<Complex64>>,
}

impl DiscreteKernel {
    pub fn new(spec: &PotentialSpec, grid: &Grid, mode: ConvolutionMode) -> Result<Self> {
        spec.validate()?;
        let min = MIN_DOMAIN_RANGES * spec.range();
        if grid.length() < min {
            return Err(Error::DomainTooShort {
                length: grid.length(),
                min,
                min_ranges: MIN_DOMAIN_RANGES,
            });
        }
        let spectrum: Vec<f64> = grid.wavenumbers().iter().map(|&k| spec.envelope_ft(k)).collect();
        let padded = match (mode, spec.is_local()) {
            (ConvolutionMode::FiniteWindow, false) => {
                let n = grid.n();
                let dz = grid.dz();
                let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
                for j in 0..n {
                    let u = spec.envelope_value(j as f64 * dz)? * dz;
                    buf[j] = Complex64::new(u, 0.0);
                    if j > 0 {
                        buf[2 * n - j] = Complex64::new(u, 0.0);
                    }
                }
                FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
                Some(buf)
            }
            _ => None,
        };
        Ok(Self {
            grid: *grid,
            mode,
            local: spec.is_local(),
            spectrum,
            padded,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mode(&self) -> ConvolutionMode {
        self.mode
    }

    pub fn is_local(&self) -> bool {
        self.local
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// U_0 as seen by the solver.
    pub fn u0(&self) -> f64 {
        self.spectrum[0]
    }

    pub(crate) fn padded_spectrum(&self) -> Option<&[Complex64]> {
        self.padded.as_deref()
    }

    /// Real-space samples of the periodized kernel; their discrete transform times dz is `spectrum`.
    /// For the local kernel this is a single cell of weight U_L l / (8 dz).
    pub fn samples(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self.spectrum.iter().map(|&u| Complex64::new(u, 0.0)).collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let norm = 1.0 / self.grid.length();
        buf.iter().map(|c| c.re * norm).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grating() -> PotentialSpec {
        PotentialSpec::Grating {
            u_l: 1.138632e6,
            range: 0.0027,
            k_lz: projected_wavenumber(8_002_904.558_230_396, 0.131),
            k_b: PI / 396e-9,
        }
    }

    #[test]
    fn value_at_origin() {
        assert_eq!(grating().kernel_value(0.0).unwrap(), -0.5 * 1.138632e6);
    }

    #[test]
    fn local_kernel_has_no_pointwise_value() {
        let p = PotentialSpec::LocalDelta { u_l: 1.0, range: 1.0 };
        assert!(matches!(p.kernel_value(0.0), Err(Error::PointwiseLocalKernel)));
        assert_eq!(p.kernel_ft(123.0), 1.0 / 8.0);
    }

    #[test]
    fn projection_limits() {
        assert_eq!(projected_wavenumber(5.0, 0.0), 5.0);
        assert!(projected_wavenumber(5.0, PI / 2.0).abs() < 1e-15);
        let k_r = grating().k_r().unwrap();
        assert!((k_r - 1019.0).abs() < 1e-2, "k_R = {k_r}");
    }

    #[test]
    fn undriven_laser_gives_no_interaction() {
        let p = LiddiParams {
            drive: LaserDrive::Rabi(0.0),
            delta_l: -4e9,
            eta: 12.0,
            gamma: 1.4e7,
            k_l: 8e6,
            theta_l: 0.1,
        };
        let s = liddi_strength(&p).unwrap();
        assert_eq!((s.u_l, s.r_fs), (0.0, 0.0));
        let resonant = LiddiParams { delta_l: 0.0, ..p };
        assert!(liddi_strength(&resonant).is_err());
    }

    #[test]
    fn local_discrete_kernel_is_flat_single_cell() {
        let grid = Grid::new(1024, 0.05).unwrap();
        let spec = PotentialSpec::LocalDelta { u_l: -5693.16, range: 0.0027 };
        let dk = DiscreteKernel::new(&spec, &grid, ConvolutionMode::Circular).unwrap();
        let flat = -5693.16 * 0.0027 / 8.0;
        assert!(dk.spectrum().iter().all(|&u| (u - flat).abs() <= 1e-12 * flat.abs()));
        let s = dk.samples();
        assert!((s[0] - flat / grid.dz()).abs() < 1e-9 * (flat / grid.dz()).abs());
        assert!(s[1..].iter().all(|x| x.abs() < 1e-9 * (flat / grid.dz()).abs()));
    }

    #[test]
    fn short_domain_rejected() {
        let grid = Grid::new(1024, 5.0 * 0.0027).unwrap();
        assert!(matches!(
            DiscreteKernel::new(&grating(), &grid, ConvolutionMode::Circular),
            Err(Error::DomainTooShort { .. })
        ));
    }
}
