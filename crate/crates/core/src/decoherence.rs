//! Loss and dephasing budget, compared against the spectral feature it would blur.

use serde::{Deserialize, Serialize};

use crate::bogoliubov::{CwBackground, Feature, Physics};
use crate::error::{non_negative, positive, Error, Result};
use crate::medium::{eit_loss_rate, polariton_params, EitParams, MediumParams, PolaritonParams};
use crate::potential::{liddi_strength, LiddiParams, PotentialSpec};

/// Sampling density of the feature scans.
const FEATURE_SCAN_POINTS: usize = 40_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceParams {
    /// Width κ of the guided band-edge modes [1/s].
    pub kappa: f64,
    /// Laser detuning from the upper band edge δ_u = ω_u - ω_L [1/s].
    pub delta_u: f64,
    pub medium: MediumParams,
    pub eit: EitParams,
    pub polariton: PolaritonParams,
    pub potential: PotentialSpec,
    pub liddi: LiddiParams,
    pub cw: CwBackground,
}

impl DecoherenceParams {
    pub fn validate(&self) -> Result<()> {
        non_negative("decoherence.kappa", self.kappa)?;
        positive("decoherence.band_edge_detuning", self.delta_u)?;
        self.medium.validate()?;
        self.eit.validate()?;
        self.potential.validate()?;
        Ok(())
    }

    pub fn physics(&self) -> Result<Physics> {
        Physics::new(self.polariton, self.potential, self.cw, self.eit.delta_c)
    }
}

/// Which spectral feature sets the resolution a rate is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    /// Depth of the interaction-induced dip below the free dispersion.
    RotonDip,
    /// Height of the local maximum of ω_k nearest k_R.
    AntiRotonPeak,
    /// Largest growth rate γ_k.
    GrowthPeak,
}

pub fn feature(physics: &Physics, kind: FeatureKind) -> Result<Feature> {
    let k_hi = physics.default_k_max();
    let found = match kind {
        FeatureKind::RotonDip => physics.roton_dip(k_hi, FEATURE_SCAN_POINTS),
        FeatureKind::AntiRotonPeak => physics.anti_roton_peak(k_hi, FEATURE_SCAN_POINTS),
        FeatureKind::GrowthPeak => physics.growth_peak(k_hi, FEATURE_SCAN_POINTS),
    };
    found.ok_or_else(|| Error::invalid("feature", format!("no {kind:?} in the spectrum")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Below a tenth of the feature scale.
    Negligible,
    Marginal,
    /// At or above the feature scale.
    Obscures,
}

impl Verdict {
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio < 0.1 {
            Verdict::Negligible
        } else if ratio < 1.0 {
            Verdict::Marginal
        } else {
            Verdict::Obscures
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub name: String,
    pub value: f64,
    pub ratio: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Free-space scattering of the interaction laser.
    pub r_fs: f64,
    /// Residual EIT absorption at the background's total coupling detuning.
    pub r_eit: f64,
    /// Single-polariton loss through the imaginary part of the interaction.
    pub r_im1: f64,
    /// Cooperative loss through the imaginary part of the interaction, ∝ n_p.
    pub r_im2: f64,
    /// Loss of the photonic component, κ cos²θ.
    pub r_prop: f64,
    pub feature_scale: f64,
    pub entries: Vec<RateEntry>,
}

pub fn budget(p: &DecoherenceParams, feature_scale: f64) -> Result<Budget> {
    p.validate()?;
    positive("feature_scale", feature_scale)?;
    let physics = p.physics()?;
    let strength = liddi_strength(&p.liddi)?;
    let ratio = p.kappa / p.delta_u;
    let r_fs = strength.r_fs;
    let r_eit = eit_loss_rate(0.0, physics.total_detuning(), &p.medium, &p.eit, p.polariton.v)?;
    let r_im1 = 0.25 * p.potential.u_l().abs() * ratio;
    let r_im2 = 0.5 * ratio * p.cw.n_p * physics.u0().abs();
    let r_prop = p.kappa * (1.0 - p.polariton.sin2_theta);
    let entries = [("r_fs", r_fs), ("r_eit", r_eit), ("r_im1", r_im1), ("r_im2", r_im2), ("r_prop", r_prop)]
        .into_iter()
        .map(|(name, value)| RateEntry {
            name: name.to_string(),
            value,
            ratio: value / feature_scale,
            verdict: Verdict::from_ratio(value / feature_scale),
        })
        .collect();
    Ok(Budget { r_fs, r_eit, r_im1, r_im2, r_prop, feature_scale, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescueKnob {
    /// Multiply the coupling Rabi frequency Ω (changes θ, v, C and δ_tr).
    OmegaFactor,
    /// Multiply both n_p and δ_c.
    NpDeltacFactor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescueReport {
    pub knob: RescueKnob,
    pub factor: f64,
    pub feature_before: f64,
    pub feature_after: f64,
    pub feature_k_before: f64,
    pub feature_k_after: f64,
    pub before: Budget,
    pub after: Budget,
}

impl RescueReport {
    /// after/before for each rate, in budget order.
    pub fn rate_changes(&self) -> Vec<(String, f64)> {
        self.before
            .entries
            .iter()
            .zip(&self.after.entries)
            .map(|(b, a)| (b.name.clone(), a.value / b.value))
            .collect()
    }
}

/// Parameters after applying a rescue knob.
pub fn rescaled(p: &DecoherenceParams, knob: RescueKnob, factor: f64) -> Result<DecoherenceParams> {
    positive("factor", factor)?;
    let mut q = *p;
    match knob {
        RescueKnob::OmegaFactor => {
            q.eit.omega *= factor;
            // tan²θ = n_a g² / Ω²
            let tan2 = p.polariton.tan2_theta / (factor * factor);
            q.polariton = polariton_params(&q.medium, &q.eit, tan2)?;
            q.cw = CwBackground::new(p.cw.n_p, p.cw.phi, q.polariton.sin2_theta)?;
        }
        RescueKnob::NpDeltacFactor => {
            q.eit.delta_c *= factor;
            q.cw = CwBackground::new(p.cw.n_p * factor, p.cw.phi, q.polariton.sin2_theta)?;
        }
    }
    Ok(q)
}

pub fn rescue_scan(
    p: &DecoherenceParams,
    knob: RescueKnob,
    factor: f64,
    kind: FeatureKind,
) -> Result<RescueReport> {
    let q = rescaled(p, knob, factor)?;
    let f_before = feature(&p.physics()?, kind)?;
    let f_after = feature(&q.physics()?, kind)?;
    if f_after.value >= q.polariton.delta_tr {
        log::warn!(
            "feature scale {:.3e} 1/s is not inside the transparency window {:.3e} 1/s",
            f_after.value,
            q.polariton.delta_tr
        );
    }
    Ok(RescueReport {
        knob,
        factor,
        feature_before: f_before.value,
        feature_after: f_after.value,
        feature_k_before: f_before.k,
        feature_k_after: f_after.k,
        before: budget(p, f_before.value)?,
        after: budget(&q, f_after.value)?,
    })
}

/// Lowest-order complex interaction U' + iU'' with U' = U and U'' = (κ/2δ_u) U.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexKernel {
    spec: PotentialSpec,
    pub ratio: f64,
}

impl ComplexKernel {
    pub fn eval(&self, z: f64) -> Result<(f64, f64)> {
        let u = self.spec.kernel_value(z)?;
        Ok((u, self.ratio * u))
    }
}

pub fn complex_kernel(spec: &PotentialSpec, p: &DecoherenceParams) -> Result<ComplexKernel> {
    if spec.is_local() {
        return Err(Error::PointwiseLocalKernel);
    }
    non_negative("decoherence.kappa", p.kappa)?;
    positive("decoherence.band_edge_detuning", p.delta_u)?;
    Ok(ComplexKernel { spec: *spec, ratio: p.kappa / (2.0 * p.delta_u) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_ratio(0.0), Verdict::Negligible);
        assert_eq!(Verdict::from_ratio(0.099), Verdict::Negligible);
        assert_eq!(Verdict::from_ratio(0.1), Verdict::Marginal);
        assert_eq!(Verdict::from_ratio(0.999), Verdict::Marginal);
        assert_eq!(Verdict::from_ratio(1.0), Verdict::Obscures);
    }

    #[test]
    fn lossless_guide_has_no_imperfection_rates() {
        let s = Scenario::preset("roton").unwrap();
        let mut p = s.decoherence;
        p.kappa = 0.0;
        let b = budget(&p, 1e5).unwrap();
        assert_eq!((b.r_im1, b.r_im2, b.r_prop), (0.0, 0.0, 0.0));
        assert!(b.r_fs > 0.0 && b.r_eit > 0.0);
        assert_eq!(b.entries.len(), 5);
    }

    #[test]
    fn imaginary_kernel_is_a_fixed_fraction() {
        let s = Scenario::preset("roton").unwrap();
        let p = s.decoherence;
        let ck = complex_kernel(&s.potential, &p).unwrap();
        assert_eq!(ck.ratio, p.kappa / (2.0 * p.delta_u));
        for z in [0.0, 1e-4, 3e-3] {
            let (re, im) = ck.eval(z).unwrap();
            assert!((im - ck.ratio * re).abs() <= 1e-15 * re.abs());
        }
        let local = Scenario::preset("local-control").unwrap();
        assert!(matches!(complex_kernel(&local.potential, &p), Err(Error::PointwiseLocalKernel)));
    }

    #[test]
    fn unit_factor_rescue_changes_nothing() {
        let s = Scenario::preset("instability").unwrap();
        for knob in [RescueKnob::OmegaFactor, RescueKnob::NpDeltacFactor] {
            let r = rescue_scan(&s.decoherence, knob, 1.0, FeatureKind::GrowthPeak).unwrap();
            for (_, change) in r.rate_changes() {
                assert!((change - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cooperative_loss_is_linear_in_density() {
        let s = Scenario::preset("antiroton").unwrap();
        let q = rescaled(&s.decoherence, RescueKnob::NpDeltacFactor, 3.0).unwrap();
        let (b0, b1) = (budget(&s.decoherence, 1.0).unwrap(), budget(&q, 1.0).unwrap());
        assert!((b1.r_im2 / b0.r_im2 - 3.0).abs() < 1e-12);
        assert_eq!(b1.r_im1, b0.r_im1);
    }
}
