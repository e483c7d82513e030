//! Run configuration (TOML) and the shipped scenario presets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bogoliubov::{CwBackground, NoiseSpectrum, Physics};
use crate::decoherence::{DecoherenceParams, FeatureKind};
use crate::error::{positive, Error, Result};
use crate::grid::Grid;
use crate::medium::{
    polariton_params, tan2_theta_from_coupling, EitParams, MediumParams, PolaritonParams,
    SPEED_OF_LIGHT,
};
use crate::potential::{
    liddi_strength, projected_wavenumber, ConvolutionMode, LaserDrive, LiddiParams, LiddiStrength,
    PotentialSpec,
};
use crate::propagator::{Composition, DispersionSign, Scheme, SchemeConfig};

const PRESETS: [(&str, &str); 4] = [
    ("roton", include_str!("../presets/roton.toml")),
    ("antiroton", include_str!("../presets/antiroton.toml")),
    ("instability", include_str!("../presets/instability.toml")),
    ("local-control", include_str!("../presets/local-control.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_toml(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            Error::Config(format!("unknown preset `{name}` (known: {})", preset_names().join(", ")))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub feature: FeatureKind,
    pub medium: MediumConfig,
    pub coupling: CouplingConfig,
    pub laser: LaserConfig,
    pub potential: PotentialConfig,
    pub background: BackgroundConfig,
    pub noise: NoiseConfig,
    pub decoherence: DecoherenceConfig,
    pub grid: GridConfig,
    pub scheme: SchemeSection,
    pub ensemble: EnsembleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    /// [1/m]
    pub atom_density: f64,
    /// [m^2]
    pub mode_area: f64,
    /// [m]
    pub length: f64,
    /// [m^2]
    pub cross_section: f64,
    /// Excited-state half-width [1/s].
    pub linewidth: f64,
    /// Probe vacuum wavelength [m].
    pub carrier_wavelength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    /// Ω [1/s]
    pub rabi: f64,
    /// δ_c [1/s]
    pub detuning: f64,
    /// Probe transition dipole [C m]; gives tan²θ = n_a g²/Ω².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole: Option<f64>,
    /// Direct tan²θ, exclusive with `dipole`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tan2_theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    /// Intensity [W/m^2], used with `rabi_sq_per_intensity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    /// Ω_L² per unit intensity [m^2/(W s^2)].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_sq_per_intensity: Option<f64>,
    /// Ω_L [1/s], exclusive with `intensity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<f64>,
    /// δ_L [1/s]
    pub detuning: f64,
    pub eta: f64,
    /// k_L [1/m]
    pub wavenumber: f64,
    /// θ_L [rad]
    pub tilt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Grating,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// l [m]
    pub range: f64,
    /// Grating period Λ [m]; k_B = π/Λ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bragg_period: Option<f64>,
    /// Sign applied to U_L (local kernel: +1 repulsive, -1 attractive).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub polarity: f64,
    /// Overrides the laser-derived U_L [1/s].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    /// n_p [1/m]
    pub photon_density: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub phase: f64,
    /// CW power [W]; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub n0: f64,
    /// Gaussian cutoff [1/m]; defaults to q_tr.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    /// κ [1/s]
    pub kappa: f64,
    /// δ_u [1/s]
    pub band_edge_detuning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    /// Domain length in units of the interaction range l.
    pub length_in_ranges: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    MeanField,
    FullThreeTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositionKind {
    Lie,
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignKind {
    Bogoliubov,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvolutionKind {
    Circular,
    FiniteWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    pub composition: CompositionKind,
    /// Fixed step [s]; otherwise `dt_fraction` of the largest step the guard allows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub dt_fraction: f64,
    pub residual_substeps: usize,
    pub guard: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_band: Option<f64>,
    pub dispersion_sign: SignKind,
    pub convolution: ConvolutionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub members: usize,
    pub seed: u64,
    /// Observation times in units of the transit time L/v.
    pub times: Vec<f64>,
}

fn one() -> f64 {
    1.0
}
fn is_one(x: &f64) -> bool {
    *x == 1.0
}
fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml_str(preset_toml(name)?)
    }

    /// Parses `text`, applies `key.path=value` overrides, and validates the result.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Sets `path.to.key` in a TOML table from `path.to.key=value`. The value is read as a TOML
/// literal when possible (numbers, booleans, arrays, quoted strings) and as a bare string
/// otherwise. Missing intermediate tables are created, so typos surface as unknown fields.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("non-empty path");
    let mut table = doc;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{k}` in `{path}` is not a section")))?;
    }
    // Integers given where the schema expects floats are accepted by coercing on conflict.
    let value = match (table.get(*last), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    table.insert(last.to_string(), value);
    Ok(())
}

/// A configuration resolved into domain objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub medium: MediumParams,
    pub eit: EitParams,
    pub polariton: PolaritonParams,
    pub liddi: LiddiParams,
    pub liddi_strength: LiddiStrength,
    pub potential: PotentialSpec,
    pub cw: CwBackground,
    pub noise: NoiseSpectrum,
    pub decoherence: DecoherenceParams,
    pub physics: Physics,
    pub grid: Grid,
    pub scheme: SchemeConfig,
}

impl Scenario {
    pub fn preset(name: &str) -> Result<Self> {
        Self::from_config(ScenarioConfig::preset(name)?)
    }

    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        let m = &config.medium;
        positive("medium.carrier_wavelength", m.carrier_wavelength)?;
        let medium = MediumParams {
            atom_density: m.atom_density,
            mode_area: m.mode_area,
            length: m.length,
            cross_section: m.cross_section,
            linewidth: m.linewidth,
            light_speed: m.light_speed.unwrap_or(SPEED_OF_LIGHT),
            k0: 2.0 * PI / m.carrier_wavelength,
        };
        medium.validate()?;
        let c = &config.coupling;
        let eit = EitParams { omega: c.rabi, delta_c: c.detuning };
        eit.validate()?;
        let tan2 = match (c.dipole, c.tan2_theta) {
            (Some(d), None) => tan2_theta_from_coupling(medium.atom_density, medium.coupling_g2(d), eit.omega)?,
            (None, Some(t)) => t,
            _ => {
                return Err(Error::Config(
                    "coupling: give exactly one of `dipole` and `tan2_theta`".into(),
                ))
            }
        };
        let polariton = polariton_params(&medium, &eit, tan2)?;

        let l = &config.laser;
        let drive = match (l.rabi, l.intensity, l.rabi_sq_per_intensity) {
            (Some(w), None, None) => LaserDrive::Rabi(w),
            (None, Some(intensity), Some(rabi_sq_per_intensity)) => {
                LaserDrive::Intensity { intensity, rabi_sq_per_intensity }
            }
            _ => {
                return Err(Error::Config(
                    "laser: give either `rabi`, or `intensity` with `rabi_sq_per_intensity`".into(),
                ))
            }
        };
        let liddi = LiddiParams {
            drive,
            delta_l: l.detuning,
            eta: l.eta,
            gamma: medium.linewidth,
            k_l: l.wavenumber,
            theta_l: l.tilt,
        };
        let strength = liddi_strength(&liddi)?;

        let p = &config.potential;
        if p.polarity.abs() != 1.0 {
            return Err(Error::Config("potential.polarity must be +1 or -1".into()));
        }
        let u_l = p.polarity * p.strength.unwrap_or(strength.u_l);
        let potential = match p.kind {
            PotentialKind::Grating => {
                let period = p.bragg_period.ok_or_else(|| {
                    Error::Config("potential.bragg_period is required for a grating".into())
                })?;
                positive("potential.bragg_period", period)?;
                PotentialSpec::Grating {
                    u_l,
                    range: p.range,
                    k_lz: projected_wavenumber(l.wavenumber, l.tilt),
                    k_b: PI / period,
                }
            }
            PotentialKind::Local => PotentialSpec::LocalDelta { u_l, range: p.range },
        };
        potential.validate()?;

        let cw = CwBackground::new(
            config.background.photon_density,
            config.background.phase,
            polariton.sin2_theta,
        )?;
        let noise = NoiseSpectrum::new(config.noise.n0, config.noise.cutoff.unwrap_or(polariton.q_tr))?;
        let decoherence = DecoherenceParams {
            kappa: config.decoherence.kappa,
            delta_u: config.decoherence.band_edge_detuning,
            medium,
            eit,
            polariton,
            potential,
            liddi,
            cw,
        };
        decoherence.validate()?;
        let physics = Physics::new(polariton, potential, cw, eit.delta_c)?;

        positive("grid.length_in_ranges", config.grid.length_in_ranges)?;
        let grid = Grid::new(config.grid.points, config.grid.length_in_ranges * potential.range())?;

        let s = &config.scheme;
        let mut scheme = SchemeConfig {
            scheme: match s.kind {
                SchemeKind::MeanField => Scheme::MeanField,
                SchemeKind::FullThreeTerm => Scheme::FullThreeTerm,
            },
            dt: 0.0,
            composition: match s.composition {
                CompositionKind::Lie => Composition::Lie,
                CompositionKind::Strang => Composition::Strang,
            },
            residual_substeps: s.residual_substeps,
            guard: s.guard,
            guard_band: s.guard_band,
            dispersion_sign: match s.dispersion_sign {
                SignKind::Bogoliubov => DispersionSign::Bogoliubov,
                SignKind::Literal => DispersionSign::Literal,
            },
            convolution: match s.convolution {
                ConvolutionKind::Circular => ConvolutionMode::Circular,
                ConvolutionKind::FiniteWindow => ConvolutionMode::FiniteWindow,
            },
        };
        positive("scheme.guard", s.guard)?;
        scheme.dt = match s.dt {
            Some(dt) => dt,
            None => {
                if !(s.dt_fraction > 0.0 && s.dt_fraction < 1.0) {
                    return Err(Error::Config("scheme.dt_fraction must lie in (0, 1)".into()));
                }
                let max = scheme.max_stable_dt(&physics, &grid);
                if max.is_finite() {
                    s.dt_fraction * max
                } else {
                    // No interaction: resolve the fastest free oscillation on the grid instead.
                    let w = physics.omega0(grid.nyquist().min(physics.default_k_max())).abs();
                    if w > 0.0 { s.dt_fraction * scheme.guard / w } else { polariton.delta_tr.recip() }
                }
            }
        };
        scheme.validate(&physics, &grid)?;

        Ok(Self {
            config,
            medium,
            eit,
            polariton,
            liddi,
            liddi_strength: strength,
            potential,
            cw,
            noise,
            decoherence,
            physics,
            grid,
            scheme,
        })
    }

    /// Transit time L/v.
    pub fn transit_time(&self) -> f64 {
        self.medium.length / self.polariton.v
    }

    pub fn feature_kind(&self) -> FeatureKind {
        self.config.feature
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in preset_names() {
            let cfg = ScenarioConfig::preset(name).unwrap();
            let text = cfg.to_toml_string().unwrap();
            let back = ScenarioConfig::from_toml_str(&text).unwrap();
            assert_eq!(cfg, back, "{name}");
            assert_eq!(text, back.to_toml_string().unwrap());
            Scenario::from_config(cfg).unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = preset_toml("roton").unwrap();
        let err = ScenarioConfig::from_toml_with_overrides(text, &["medium.lenght=0.01".into()]);
        assert!(matches!(err, Err(Error::Config(_))));
        let typo = format!("{text}\n[extra]\nx = 1\n");
        assert!(ScenarioConfig::from_toml_str(&typo).is_err());
    }

    #[test]
    fn overrides_apply() {
        let text = preset_toml("roton").unwrap();
        let cfg = ScenarioConfig::from_toml_with_overrides(
            text,
            &["noise.n0=0".into(), "decoherence.kappa = 0".into(), "scheme.kind=full-three-term".into()],
        )
        .unwrap();
        assert_eq!(cfg.noise.n0, 0.0);
        assert_eq!(cfg.decoherence.kappa, 0.0);
        assert_eq!(cfg.scheme.kind, SchemeKind::FullThreeTerm);
        assert!(ScenarioConfig::from_toml_with_overrides(text, &["nokey".into()]).is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(Scenario::preset("phonon"), Err(Error::Config(_))));
    }
}
