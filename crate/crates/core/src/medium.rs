//! Atomic medium, coupling field and the derived polariton coefficients.

use crate::error::{finite, non_negative, positive, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic ensemble inside the waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Linear atom density n_a [1/m].
    pub atom_density: f64,
    /// Effective mode area A [m^2].
    pub mode_area: f64,
    /// Medium length L [m].
    pub length: f64,
    /// Resonant absorption cross-section sigma_a [m^2].
    pub cross_section: f64,
    /// Half-width gamma of the excited level [1/s].
    pub linewidth: f64,
    /// Vacuum light speed c [m/s].
    pub light_speed: f64,
    /// Probe carrier wavenumber k0 [1/m].
    pub k0: f64,
}

impl MediumParams {
    pub fn validate(&self) -> Result<()> {
        positive("atom_density", self.atom_density)?;
        positive("mode_area", self.mode_area)?;
        positive("length", self.length)?;
        positive("cross_section", self.cross_section)?;
        positive("linewidth", self.linewidth)?;
        positive("light_speed", self.light_speed)?;
        positive("k0", self.k0)?;
        Ok(())
    }

    /// Optical depth (n_a/A) L sigma_a.
    pub fn optical_depth(&self) -> f64 {
        self.atom_density / self.mode_area * self.length * self.cross_section
    }

    /// Single-atom probe coupling g^2 = w0 d^2 / (2 eps0 hbar A) for a transition dipole `dipole` [C m].
    pub fn coupling_g2(&self, dipole: f64) -> f64 {
        let omega0 = self.light_speed * self.k0;
        omega0 * dipole * dipole / (2.0 * VACUUM_PERMITTIVITY * HBAR * self.mode_area)
    }
}

/// Coupling (control) field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EitParams {
    /// Rabi frequency Omega [1/s].
    pub omega: f64,
    /// Detuning delta_c [1/s], signed.
    pub delta_c: f64,
}

impl EitParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega", self.omega)?;
        finite("delta_c", self.delta_c)?;
        Ok(())
    }
}

/// Coefficients of the propagation equation plus the transparency window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonParams {
    pub tan2_theta: f64,
    /// alpha = sin^2(theta), the atomic fraction of the polariton.
    pub sin2_theta: f64,
    /// Group velocity v = c cos^2(theta) [m/s].
    pub v: f64,
    /// Dispersion constant C [s^2].
    pub dispersion: f64,
    pub delta_tr: f64,
    pub q_tr: f64,
    pub od: f64,
}

impl PolaritonParams {
    pub fn alpha(&self) -> f64 {
        self.sin2_theta
    }
}

/// tan^2(theta) = n_a g^2 / Omega^2.
pub fn tan2_theta_from_coupling(atom_density: f64, g2: f64, omega: f64) -> Result<f64> {
    non_negative("atom_density", atom_density)?;
    non_negative("g2", g2)?;
    positive("omega", omega)?;
    Ok(atom_density * g2 / (omega * omega))
}

pub fn polariton_params(
    medium: &MediumParams,
    eit: &EitParams,
    tan2_theta: f64,
) -> Result<PolaritonParams> {
    medium.validate()?;
    eit.validate()?;
    non_negative("tan2_theta", tan2_theta)?;
    let od = medium.optical_depth();
    if od <= 0.0 || !od.is_finite() {
        return Err(Error::invalid("optical_depth", format!("must be > 0, got {od}")));
    }
    let alpha = tan2_theta / (1.0 + tan2_theta);
    let v = medium.light_speed / (1.0 + tan2_theta);
    let dispersion = alpha * (2.0 - 3.0 * alpha) / (eit.omega * eit.omega);
    let delta_tr = transparency_window(eit.omega, medium.linewidth, od)?;
    Ok(PolaritonParams {
        tan2_theta,
        sin2_theta: alpha,
        v,
        dispersion,
        delta_tr,
        q_tr: delta_tr / v,
        od,
    })
}

/// delta_tr = Omega^2 / (gamma sqrt(OD)).
pub fn transparency_window(omega: f64, gamma: f64, od: f64) -> Result<f64> {
    positive("omega", omega)?;
    positive("gamma", gamma)?;
    positive("od", od)?;
    Ok(omega * omega / (gamma * od.sqrt()))
}

/// Probe loss rate at probe detuning `delta_p` for total coupling detuning `delta_c_total`.
pub fn eit_loss_rate(
    delta_p: f64,
    delta_c_total: f64,
    medium: &MediumParams,
    eit: &EitParams,
    v: f64,
) -> Result<f64> {
    finite("delta_p", delta_p)?;
    finite("delta_c_total", delta_c_total)?;
    finite("v", v)?;
    positive("omega", eit.omega)?;
    let g = medium.linewidth;
    let d = delta_p - delta_c_total;
    let num = 2.0 * d * d * g * g;
    let rabi_term = eit.omega * eit.omega - 4.0 * delta_p * d;
    let den = 4.0 * g * g * d * d + rabi_term * rabi_term;
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(v * medium.optical_depth() / medium.length * num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn medium() -> MediumParams {
        MediumParams {
            atom_density: 16e6,
            mode_area: 4.42e-12,
            length: 0.0268,
            cross_section: 1.7145e-13,
            linewidth: 1.43291e7,
            light_speed: 3e8,
            k0: 7.0236e6,
        }
    }

    #[test]
    fn vacuum_limit() {
        let eit = EitParams { omega: 4e8, delta_c: 0.0 };
        let p = polariton_params(&medium(), &eit, 0.0).unwrap();
        assert_eq!(p.sin2_theta, 0.0);
        assert_eq!(p.v, 3e8);
        assert_eq!(p.dispersion, 0.0);
    }

    #[test]
    fn dispersion_vanishes_at_two_thirds() {
        let eit = EitParams { omega: 4e8, delta_c: 0.0 };
        let p = polariton_params(&medium(), &eit, 2.0).unwrap();
        assert_relative_eq!(p.sin2_theta, 2.0 / 3.0);
        assert!(p.dispersion.abs() < 1e-32);
    }

    #[test]
    fn group_velocity_from_alpha() {
        // alpha = 0.999839 with c = 3e8 gives v = c(1 - alpha) = 48300.
        let alpha: f64 = 0.999839;
        let t2 = alpha / (1.0 - alpha);
        let eit = EitParams { omega: 4e8, delta_c: 0.0 };
        let p = polariton_params(&medium(), &eit, t2).unwrap();
        assert_relative_eq!(p.v, 3e8 * (1.0 - alpha), max_relative = 1e-9);
        assert!((p.v - 48216.0).abs() / 48216.0 < 5e-3);
    }

    #[test]
    fn window_scaling() {
        assert_eq!(transparency_window(2.0, 4.0, 1.0).unwrap(), 1.0);
        let a = transparency_window(4e8, 1.4e7, 16000.0).unwrap();
        let b = transparency_window(8e8, 1.4e7, 16000.0).unwrap();
        assert_relative_eq!(b / a, 4.0, max_relative = 1e-14);
        assert!(transparency_window(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let eit = EitParams { omega: 4e8, delta_c: 0.0 };
        assert!(polariton_params(&medium(), &eit, f64::NAN).is_err());
        let mut m = medium();
        m.cross_section = 0.0;
        assert!(polariton_params(&m, &eit, 1.0).is_err());
    }

    #[test]
    fn loss_vanishes_on_two_photon_resonance() {
        let eit = EitParams { omega: 4e8, delta_c: -3.84e7 };
        let r = eit_loss_rate(1.3e7, 1.3e7, &medium(), &eit, 48000.0).unwrap();
        assert_eq!(r, 0.0);
        assert!(eit_loss_rate(0.0, 1e6, &medium(), &eit, 48000.0).unwrap() > 0.0);
    }

    #[test]
    fn loss_exponent_is_two_for_small_detuning() {
        let eit = EitParams { omega: 4e8, delta_c: 0.0 };
        let m = medium();
        let (d1, d2) = (1e5, 1e7);
        let r1 = eit_loss_rate(0.0, d1, &m, &eit, 48000.0).unwrap();
        let r2 = eit_loss_rate(0.0, d2, &m, &eit, 48000.0).unwrap();
        let slope = (r2 / r1).ln() / (d2 / d1).ln();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }
}
