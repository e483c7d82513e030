//! Python module `polariton`: scenarios, analytic spectra and correlations, loss budgets and
//! small noise-ensemble simulations.

use std::collections::BTreeMap;

use num_complex::Complex64;
use polariton_core::decoherence::RescueKnob;
use polariton_core::propagator::run_noise_ensemble;
use polariton_core::scenario::preset_names as core_preset_names;
use polariton_core::{
    budget, feature, Error, ErrorKind, G2Options, Propagator, Scenario as CoreScenario, ScenarioConfig,
    Statistics,
};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Config => PyValueError::new_err(msg),
        ErrorKind::Numerical => PyArithmeticError::new_err(msg),
        ErrorKind::Io => PyOSError::new_err(msg),
    }
}

fn stats(quantum: bool) -> Statistics {
    if quantum {
        Statistics::Quantum
    } else {
        Statistics::Classical
    }
}

/// A fully resolved scenario: medium, interaction, background, noise and solver settings.
#[pyclass(frozen, module = "polariton")]
struct Scenario {
    inner: CoreScenario,
}

impl Scenario {
    fn build(config: ScenarioConfig) -> PyResult<Self> {
        Ok(Self { inner: CoreScenario::from_config(config).map_err(to_py)? })
    }

    fn time(&self, t: Option<f64>) -> f64 {
        t.unwrap_or_else(|| self.inner.transit_time())
    }
}

#[pymethods]
impl Scenario {
    /// Shipped scenario `name` with optional `key.path=value` overrides.
    #[staticmethod]
    #[pyo3(signature = (name, overrides = Vec::new()))]
    fn preset(name: &str, overrides: Vec<String>) -> PyResult<Self> {
        let text = polariton_core::scenario::preset_toml(name).map_err(to_py)?;
        Self::build(ScenarioConfig::from_toml_with_overrides(text, &overrides).map_err(to_py)?)
    }

    #[staticmethod]
    #[pyo3(signature = (text, overrides = Vec::new()))]
    fn from_toml(text: &str, overrides: Vec<String>) -> PyResult<Self> {
        Self::build(ScenarioConfig::from_toml_with_overrides(text, &overrides).map_err(to_py)?)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.config.to_toml_string().map_err(to_py)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.config.name.clone()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.physics.alpha()
    }

    /// Group velocity v [m/s].
    #[getter]
    fn v(&self) -> f64 {
        self.inner.polariton.v
    }

    #[getter]
    fn q_tr(&self) -> f64 {
        self.inner.polariton.q_tr
    }

    #[getter]
    fn k_r(&self) -> Option<f64> {
        self.inner.potential.k_r()
    }

    #[getter]
    fn u_l(&self) -> f64 {
        self.inner.potential.u_l()
    }

    #[getter]
    fn photon_density(&self) -> f64 {
        self.inner.cw.n_p
    }

    /// Time of flight through the medium, L/v [s].
    #[getter]
    fn transit_time(&self) -> f64 {
        self.inner.transit_time()
    }

    fn u_k(&self, k: f64) -> f64 {
        self.inner.physics.u_k(k)
    }

    /// Free and interacting dispersion at each k: columns k, omega0, re_omega, im_omega, u_k.
    fn spectrum(&self, k: Vec<f64>) -> BTreeMap<&'static str, Vec<f64>> {
        let p = &self.inner.physics;
        let mut out = BTreeMap::new();
        out.insert("omega0", k.iter().map(|&x| p.omega0(x)).collect());
        out.insert("re_omega", k.iter().map(|&x| p.spectrum(x).re).collect());
        out.insert("im_omega", k.iter().map(|&x| p.spectrum(x).im).collect());
        out.insert("u_k", k.iter().map(|&x| p.u_k(x)).collect());
        out.insert("k", k);
        out
    }

    /// Bogoliubov coefficients (mu, nu) at wavenumber k after time t.
    fn mu_nu(&self, k: f64, t: f64) -> (Complex64, Complex64) {
        self.inner.physics.mu_nu(k, t)
    }

    /// Quadrature squeezing G_k; t defaults to one transit time.
    #[pyo3(signature = (k, t = None))]
    fn squeezing(&self, k: f64, t: Option<f64>) -> f64 {
        self.inner.physics.squeezing_spectrum(k, self.time(t))
    }

    #[pyo3(signature = (k, t = None, quantum = false))]
    fn occupation(&self, k: f64, t: Option<f64>, quantum: bool) -> f64 {
        self.inner.physics.mode_occupation(k, self.time(t), &self.inner.noise, stats(quantum))
    }

    /// Linear-response intensity correlation g2 at each separation.
    #[pyo3(signature = (dz, t = None, quantum = false))]
    fn g2(&self, dz: Vec<f64>, t: Option<f64>, quantum: bool) -> PyResult<Vec<f64>> {
        let t = self.time(t);
        let opts = G2Options::default();
        dz.iter()
            .map(|&d| self.inner.physics.g2(d, t, &self.inner.noise, stats(quantum), &opts))
            .collect::<Result<_, _>>()
            .map_err(to_py)
    }

    /// Location and size (k, value) of the scenario's characteristic spectral feature.
    fn feature(&self) -> PyResult<(f64, f64)> {
        let f = feature(&self.inner.physics, self.inner.feature_kind()).map_err(to_py)?;
        Ok((f.k, f.value))
    }

    /// Loss rates [1/s] by name, compared against the feature scale.
    #[pyo3(signature = (feature_scale = None))]
    fn budget(&self, feature_scale: Option<f64>) -> PyResult<BTreeMap<String, (f64, f64, String)>> {
        let scale = match feature_scale {
            Some(v) => v,
            None => self.feature()?.1,
        };
        let b = budget(&self.inner.decoherence, scale).map_err(to_py)?;
        Ok(b.entries
            .into_iter()
            .map(|e| (e.name, (e.value, e.ratio, format!("{:?}", e.verdict).to_lowercase())))
            .collect())
    }

    /// Rates after rescaling Omega (`"omega"`) or n_p and delta_c together (`"np-deltac"`).
    fn rescue(&self, knob: &str, factor: f64) -> PyResult<BTreeMap<String, (f64, f64)>> {
        let knob = match knob {
            "omega" => RescueKnob::OmegaFactor,
            "np-deltac" => RescueKnob::NpDeltacFactor,
            other => return Err(PyValueError::new_err(format!("unknown knob `{other}`"))),
        };
        let r = polariton_core::rescue_scan(&self.inner.decoherence, knob, factor, self.inner.feature_kind())
            .map_err(to_py)?;
        Ok(r.before
            .entries
            .iter()
            .zip(&r.after.entries)
            .map(|(b, a)| (b.name.clone(), (b.value, a.value)))
            .collect())
    }

    /// Propagates a noise ensemble and returns the symmetrized N_k at each time (in transit times),
    /// with the simulated g2 at `dz` (snapped to the grid) for the last time.
    #[pyo3(signature = (members, transits, seed = None, workers = 0, dz = Vec::new()))]
    fn simulate(
        &self,
        py: Python<'_>,
        members: usize,
        transits: Vec<f64>,
        seed: Option<u64>,
        workers: usize,
        dz: Vec<f64>,
    ) -> PyResult<SimulationResult> {
        let s = &self.inner;
        let times: Vec<f64> = transits.iter().map(|x| x * s.transit_time()).collect();
        let seed = seed.unwrap_or(s.config.ensemble.seed);
        let grid = s.grid;
        let summary = py
            .detach(|| {
                let template = Propagator::new(&grid, &s.physics, &s.scheme)?;
                run_noise_ensemble(&template, &s.noise, members, seed, workers, &times)
            })
            .map_err(to_py)?;
        let k_limit = s.physics.default_k_max().min(grid.nyquist());
        let modes: Vec<i64> = (1..(grid.n() / 2) as i64).filter(|&m| m as f64 * grid.dk() <= k_limit).collect();
        let k = modes.iter().map(|&m| m as f64 * grid.dk()).collect();
        let n_k = summary
            .nk
            .iter()
            .map(|nk| {
                modes
                    .iter()
                    .map(|&m| {
                        let (ip, im) = (grid.index_of_mode(m).unwrap(), grid.index_of_mode(-m).unwrap());
                        0.5 * (nk.n_k[ip] + nk.n_k[im])
                    })
                    .collect()
            })
            .collect();
        let (g2_dz, g2, g2_err) = match summary.g2.last() {
            Some(acc) if !dz.is_empty() => {
                let snapped: Vec<f64> = dz.iter().map(|d| (d / grid.dz()).round() * grid.dz()).collect();
                let table = acc.finish(&snapped).map_err(to_py)?;
                (table.dz, table.g2, table.sigma)
            }
            _ => (Vec::new(), Vec::new(), Vec::new()),
        };
        Ok(SimulationResult { times, k, n_k, g2_dz, g2, g2_err, members })
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?}, v={:.1} m/s)", self.inner.config.name, self.inner.polariton.v)
    }
}

/// Ensemble observables returned by `Scenario.simulate`.
#[pyclass(frozen, get_all, module = "polariton")]
struct SimulationResult {
    /// Output times [s].
    times: Vec<f64>,
    /// Positive grid wavenumbers [1/m].
    k: Vec<f64>,
    /// Symmetrized occupation per time, aligned with `k`.
    n_k: Vec<Vec<f64>>,
    g2_dz: Vec<f64>,
    g2: Vec<f64>,
    g2_err: Vec<f64>,
    members: usize,
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    core_preset_names()
}

#[pymodule]
fn polariton(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<SimulationResult>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
