use std::fs;
use std::io::BufWriter;

use chrono::Utc;
use clap::{Args, Subcommand, ValueEnum};
use polariton_core::decoherence::RateEntry;
use polariton_core::propagator::{
    cw_state, derive_seed, run_noise_ensemble, seeded_omega, write_checkpoint, SeededOmegaOptions,
};
use polariton_core::scenario::{preset_names, preset_toml};
use polariton_core::{
    budget, feature, rescue_scan, Budget, Error, FeatureKind, G2Options, Propagator, RescueKnob, Result,
    Scenario, ScenarioConfig, Statistics,
};
use serde::Serialize;

use crate::output::{timestamp, Cell, Manifest, OutputDir, Table};
use crate::{Cli, Command, SchemeArg};

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Lowest wavenumber [1/m].
    #[arg(long, default_value_t = 0.0)]
    pub k_min: f64,
    /// Highest wavenumber [1/m]; defaults to the integration cutoff of the scenario.
    #[arg(long)]
    pub k_max: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub k_count: usize,
    /// Evaluation time for squeezing and occupation, in transit times L/v.
    #[arg(long, default_value_t = 1.0)]
    pub transits: f64,
    /// Keep the vacuum contributions in the occupation.
    #[arg(long)]
    pub quantum: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimulateMode {
    /// Noise ensemble: N_k at each requested time.
    Ensemble,
    /// Seeded eigen-excitations: fitted frequency per wavenumber.
    Seeded,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = SimulateMode::Ensemble)]
    pub mode: SimulateMode,
    /// Output time(s) in transit times L/v; defaults to ensemble.times.
    #[arg(long, value_delimiter = ',')]
    pub transits: Vec<f64>,
    /// Single output time in seconds (overrides --transits).
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Ensemble size (replaces ensemble.members).
    #[arg(long)]
    pub members: Option<usize>,
    /// Also write the field of member 0 at each output time as a binary checkpoint.
    #[arg(long)]
    pub checkpoint: bool,
    /// Seeded wavenumbers [1/m], snapped to grid bins.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<f64>,
    /// Evenly spaced seeded wavenumbers from --k-min to --k-max when --k is not given.
    #[arg(long, default_value_t = 200.0)]
    pub k_min: f64,
    #[arg(long, default_value_t = 3000.0)]
    pub k_max: f64,
    #[arg(long, default_value_t = 15)]
    pub k_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelationMode {
    Analytic,
    Simulated,
    Both,
}

#[derive(Debug, Args)]
pub struct CorrelationsArgs {
    #[arg(long, value_enum, default_value_t = CorrelationMode::Both)]
    pub mode: CorrelationMode,
    /// Propagation time in transit times L/v.
    #[arg(long, default_value_t = 1.0)]
    pub transits: f64,
    /// Largest separation [m]; defaults to six interaction ranges or half the domain.
    #[arg(long)]
    pub dz_max: Option<f64>,
    #[arg(long, default_value_t = 121)]
    pub dz_count: usize,
    #[arg(long)]
    pub members: Option<usize>,
    /// Keep the vacuum contributions in the analytic curve.
    #[arg(long)]
    pub quantum: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FeatureArg {
    RotonDip,
    AntiRotonPeak,
    GrowthPeak,
}

impl From<FeatureArg> for FeatureKind {
    fn from(f: FeatureArg) -> Self {
        match f {
            FeatureArg::RotonDip => FeatureKind::RotonDip,
            FeatureArg::AntiRotonPeak => FeatureKind::AntiRotonPeak,
            FeatureArg::GrowthPeak => FeatureKind::GrowthPeak,
        }
    }
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Compare rates against this value [1/s] instead of the computed feature.
    #[arg(long)]
    pub feature_scale: Option<f64>,
    /// Which spectral feature sets the scale; defaults to the scenario's.
    #[arg(long, value_enum)]
    pub feature: Option<FeatureArg>,
    /// Rescale a parameter and compare: `omega:<factor>` or `np-deltac:<factor>`.
    #[arg(long, value_parser = parse_rescue)]
    pub rescue: Option<(RescueKnob, f64)>,
}

fn parse_rescue(s: &str) -> std::result::Result<(RescueKnob, f64), String> {
    let (knob, factor) = s.split_once(':').ok_or("expected <knob>:<factor>")?;
    let knob = match knob {
        "omega" => RescueKnob::OmegaFactor,
        "np-deltac" => RescueKnob::NpDeltacFactor,
        other => return Err(format!("unknown knob `{other}`; use omega or np-deltac")),
    };
    let factor: f64 = factor.parse().map_err(|e| format!("factor: {e}"))?;
    if !(factor > 0.0 && factor.is_finite()) {
        return Err("factor must be positive".into());
    }
    Ok((knob, factor))
}

#[derive(Debug, Subcommand)]
pub enum PresetCommand {
    /// Names and one-line descriptions.
    List,
    /// Print a scenario as TOML, with any --set overrides applied.
    Show { name: String },
}

struct Run {
    scenario: Scenario,
    manifest: Manifest,
}

impl Run {
    fn new(cli: &Cli, command: &str) -> Result<Self> {
        let g = &cli.global;
        let mut overrides = g.overrides.clone();
        if let Some(seed) = g.seed {
            overrides.push(format!("ensemble.seed={seed}"));
        }
        if let Some(s) = g.scheme {
            let kind = match s {
                SchemeArg::MeanField => "mean-field",
                SchemeArg::FullThreeTerm => "full-three-term",
            };
            overrides.push(format!("scheme.kind=\"{kind}\""));
        }
        let text = match (&g.preset, &g.config) {
            (Some(name), _) => preset_toml(name)?.to_string(),
            (None, Some(path)) => fs::read_to_string(path)?,
            (None, None) => return Err(Error::Config("give --preset <name> or --config <file>".into())),
        };
        let config = ScenarioConfig::from_toml_with_overrides(&text, &overrides)?;
        let scenario_toml = config.to_toml_string()?;
        let scenario = Scenario::from_config(config)?;
        let manifest = Manifest {
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            preset: g.preset.clone(),
            config_path: g.config.clone(),
            overrides,
            seed: Some(scenario.config.ensemble.seed),
            workers: g.workers,
            version: env!("CARGO_PKG_VERSION"),
            started: timestamp(Utc::now()),
            finished: String::new(),
            scenario_toml: Some(scenario_toml),
            outputs: Vec::new(),
        };
        Ok(Self { scenario, manifest })
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Spectrum(a) => spectrum(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Correlations(a) => correlations(cli, a),
        Command::Budget(a) => budget_cmd(cli, a),
        Command::Preset(p) => preset_cmd(cli, p),
    }
}

fn finish(out: OutputDir, run: Run) -> Result<()> {
    for path in out.finish(run.manifest)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn spectrum(cli: &Cli, a: &SpectrumArgs) -> Result<()> {
    let run = Run::new(cli, "spectrum")?;
    let s = &run.scenario;
    let p = &s.physics;
    let k_max = a.k_max.unwrap_or_else(|| p.default_k_max());
    if a.k_count == 0 || !(k_max >= a.k_min) || !a.k_min.is_finite() || !k_max.is_finite() {
        return Err(Error::Config("need k_count >= 1 and k_min <= k_max".into()));
    }
    let t = a.transits * s.transit_time();
    let stats = if a.quantum { Statistics::Quantum } else { Statistics::Classical };
    let mut table = Table::new(&[
        ("k", "1/m"),
        ("omega0", "1/s"),
        ("re_omega", "1/s"),
        ("im_omega", "1/s"),
        ("u_k", "m/s"),
        ("squeezing", "1"),
        ("occupation", "1"),
    ]);
    for i in 0..a.k_count {
        let k = if a.k_count == 1 {
            a.k_min
        } else {
            a.k_min + (k_max - a.k_min) * i as f64 / (a.k_count - 1) as f64
        };
        let r = p.analyze(k, t, &s.noise, stats);
        table.push(vec![
            k.into(),
            r.omega0.into(),
            r.omega.re.into(),
            r.omega.im.into(),
            p.u_k(k).into(),
            r.g_k.into(),
            r.n_k_t.into(),
        ]);
    }
    let mut out = OutputDir::create(&cli.global.out)?;
    out.table("spectrum.csv", &table)?;
    if let Ok(f) = feature(p, s.feature_kind()) {
        log::info!("{:?}: k = {:.1} 1/m, scale {:.4e} 1/s", s.feature_kind(), f.k, f.value);
    }
    finish(out, run)
}

fn output_times(s: &Scenario, transits: &[f64], t_final: Option<f64>) -> Result<Vec<f64>> {
    let mut times: Vec<f64> = match t_final {
        Some(t) => vec![t],
        None if !transits.is_empty() => transits.iter().map(|x| x * s.transit_time()).collect(),
        None => s.config.ensemble.times.iter().map(|x| x * s.transit_time()).collect(),
    };
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Config("output times must be finite and non-negative".into()));
    }
    times.sort_by(f64::total_cmp);
    Ok(times)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let mut run = Run::new(cli, "simulate")?;
    let mut out = OutputDir::create(&cli.global.out)?;
    match a.mode {
        SimulateMode::Ensemble => simulate_ensemble(cli, a, &mut run, &mut out)?,
        SimulateMode::Seeded => simulate_seeded(a, &mut run, &mut out)?,
    }
    finish(out, run)
}

fn simulate_ensemble(cli: &Cli, a: &SimulateArgs, run: &mut Run, out: &mut OutputDir) -> Result<()> {
    let s = &run.scenario;
    let times = output_times(s, &a.transits, a.t_final)?;
    let members = a.members.unwrap_or(s.config.ensemble.members);
    if members == 0 {
        return Err(Error::Config("ensemble needs at least one member".into()));
    }
    let seed = s.config.ensemble.seed;
    let template = Propagator::new(&s.grid, &s.physics, &s.scheme)?;
    log::info!("{members} members, dt = {:.4e} s, {} output times", s.scheme.dt, times.len());
    let summary = run_noise_ensemble(&template, &s.noise, members, seed, cli.global.workers, &times)?;

    let grid = s.grid;
    let k_limit = s.physics.default_k_max().min(grid.nyquist());
    let mut bins: Vec<usize> = (0..grid.n()).filter(|&i| grid.k(i).abs() <= k_limit).collect();
    bins.sort_by(|&x, &y| grid.k(x).total_cmp(&grid.k(y)));
    let mut table = Table::new(&[
        ("t", "s"),
        ("k", "1/m"),
        ("n_k", "1"),
        ("sem", "1"),
        ("n_k_theory", "1"),
        ("members", "1"),
    ]);
    for (t, nk) in times.iter().zip(&summary.nk) {
        for &i in &bins {
            let k = grid.k(i);
            let theory = (k != 0.0).then(|| s.physics.mode_occupation(k, *t, &s.noise, Statistics::Classical));
            table.push(vec![
                (*t).into(),
                k.into(),
                nk.n_k[i].into(),
                nk.sem[i].into(),
                theory.into(),
                Cell::U(members as u64),
            ]);
        }
    }
    out.table("nk.csv", &table)?;

    if a.checkpoint {
        let mut prop = template.clone();
        let mut state = cw_state(&grid, &s.physics.cw);
        state.seed_noise(&s.noise, derive_seed(seed, 0));
        for (j, &t) in times.iter().enumerate() {
            prop.propagate(&mut state, t, &mut ())?;
            let path = out.path(&format!("checkpoint_{j}.bin"));
            write_checkpoint(BufWriter::new(fs::File::create(&path)?), &state)?;
            out.record(path);
        }
    }
    run.manifest.seed = Some(seed);
    Ok(())
}

fn simulate_seeded(a: &SimulateArgs, run: &mut Run, out: &mut OutputDir) -> Result<()> {
    let s = &run.scenario;
    let grid = s.grid;
    let ks: Vec<f64> = if !a.k.is_empty() {
        a.k.clone()
    } else if a.k_count == 1 {
        vec![a.k_min]
    } else {
        (0..a.k_count)
            .map(|i| a.k_min + (a.k_max - a.k_min) * i as f64 / (a.k_count.max(2) - 1) as f64)
            .collect()
    };
    let mut bins = Vec::new();
    for k in ks {
        let i = grid
            .nearest_index(k)
            .filter(|&i| grid.k(i) > 0.0)
            .ok_or_else(|| Error::Config(format!("k = {k} 1/m does not map to a positive grid bin")))?;
        if !bins.contains(&i) {
            bins.push(i);
        }
    }
    let opts = SeededOmegaOptions::default();
    let mut table = Table::new(&[
        ("k", "1/m"),
        ("theory_re", "1/s"),
        ("theory_im", "1/s"),
        ("measured_re", "1/s"),
        ("measured_im", "1/s"),
        ("partner_re", "1/s"),
        ("partner_im", "1/s"),
        ("lab_frequency", "1/s"),
        ("dt", "s"),
        ("steps", "1"),
    ]);
    for i in bins {
        let r = seeded_omega(&s.physics, &grid, &s.scheme, i, &opts)?;
        log::info!("k = {:.1}: measured {:.6e} vs {:.6e}", r.k, r.measured, r.theory);
        table.push(vec![
            r.k.into(),
            r.theory.re.into(),
            r.theory.im.into(),
            r.measured.re.into(),
            r.measured.im.into(),
            r.measured_partner.re.into(),
            r.measured_partner.im.into(),
            r.lab_frequency.into(),
            r.dt.into(),
            Cell::U(r.steps as u64),
        ]);
    }
    out.table("omega.csv", &table)?;
    run.manifest.seed = None;
    Ok(())
}

fn correlations(cli: &Cli, a: &CorrelationsArgs) -> Result<()> {
    let run = Run::new(cli, "correlations")?;
    let s = &run.scenario;
    let t = a.transits * s.transit_time();
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Config("transits must be finite and non-negative".into()));
    }
    let grid = s.grid;
    let dz_max = a.dz_max.unwrap_or((6.0 * s.potential.range()).min(0.5 * grid.length()));
    if a.dz_count == 0 || !(dz_max >= 0.0) || dz_max > 0.5 * grid.length() {
        return Err(Error::Config(format!(
            "need dz_count >= 1 and 0 <= dz_max <= half the domain ({:.4e} m)",
            0.5 * grid.length()
        )));
    }
    let simulated = a.mode != CorrelationMode::Analytic;
    let analytic = a.mode != CorrelationMode::Simulated;
    let dz: Vec<f64> = if simulated {
        // Simulated separations are whole multiples of the grid spacing.
        let stride = if a.dz_count > 1 { (dz_max / (a.dz_count - 1) as f64 / grid.dz()).round().max(1.0) } else { 1.0 };
        (0..a.dz_count).map(|j| j as f64 * stride * grid.dz()).take_while(|&d| d <= dz_max * (1.0 + 1e-12)).collect()
    } else if a.dz_count == 1 {
        vec![0.0]
    } else {
        (0..a.dz_count).map(|j| dz_max * j as f64 / (a.dz_count - 1) as f64).collect()
    };

    let theory: Vec<Option<f64>> = if analytic {
        let stats = if a.quantum { Statistics::Quantum } else { Statistics::Classical };
        let opts = G2Options::default();
        dz.iter()
            .map(|&d| s.physics.g2(d, t, &s.noise, stats, &opts).map(Some))
            .collect::<Result<_>>()?
    } else {
        vec![None; dz.len()]
    };
    let (sim, err): (Vec<Option<f64>>, Vec<Option<f64>>) = if simulated {
        let members = a.members.unwrap_or(s.config.ensemble.members);
        if members < 2 {
            return Err(Error::Config("simulated correlations need at least two members".into()));
        }
        let template = Propagator::new(&grid, &s.physics, &s.scheme)?;
        let summary =
            run_noise_ensemble(&template, &s.noise, members, s.config.ensemble.seed, cli.global.workers, &[t])?;
        let table = summary.g2[0].finish(&dz)?;
        (table.g2.into_iter().map(Some).collect(), table.sigma.into_iter().map(Some).collect())
    } else {
        (vec![None; dz.len()], vec![None; dz.len()])
    };

    let mut table = Table::new(&[("dz", "m"), ("g2_theory", "1"), ("g2_sim", "1"), ("sim_err", "1")]);
    for j in 0..dz.len() {
        table.push(vec![dz[j].into(), theory[j].into(), sim[j].into(), err[j].into()]);
    }
    let mut out = OutputDir::create(&cli.global.out)?;
    out.table("g2.csv", &table)?;
    finish(out, run)
}

#[derive(Serialize)]
struct BudgetReport<'a> {
    preset: Option<&'a str>,
    feature: FeatureKind,
    feature_k: Option<f64>,
    budget: &'a Budget,
    #[serde(skip_serializing_if = "Option::is_none")]
    rescue: Option<&'a polariton_core::RescueReport>,
    note: &'static str,
}

const RATE_LABEL_NOTE: &str = "r_fs is free-space scattering of the interaction laser; r_eit is residual \
EIT absorption. Published instability-regime figures near 0.86e5 1/s match r_eit, not r_fs.";

fn print_rates(title: &str, b: &Budget) {
    println!("{title} (feature scale {:.4e} 1/s)", b.feature_scale);
    println!("  {:<8} {:>14} {:>12}  verdict", "rate", "value [1/s]", "ratio");
    for RateEntry { name, value, ratio, verdict } in &b.entries {
        println!("  {name:<8} {value:>14.4e} {ratio:>12.4e}  {verdict:?}");
    }
}

fn budget_rows(table: &mut Table, stage: &str, b: &Budget) {
    for e in &b.entries {
        table.push(vec![
            Cell::S(stage.to_string()),
            Cell::S(e.name.clone()),
            e.value.into(),
            e.ratio.into(),
            b.feature_scale.into(),
            Cell::S(format!("{:?}", e.verdict).to_lowercase()),
        ]);
    }
}

fn budget_cmd(cli: &Cli, a: &BudgetArgs) -> Result<()> {
    let run = Run::new(cli, "budget")?;
    let s = &run.scenario;
    let kind: FeatureKind = a.feature.map(Into::into).unwrap_or(s.feature_kind());
    let (scale, feature_k) = match a.feature_scale {
        Some(v) => (v, None),
        None => {
            let f = feature(&s.physics, kind)?;
            (f.value, Some(f.k))
        }
    };
    let b = budget(&s.decoherence, scale)?;
    print_rates("budget", &b);

    let rescue = match a.rescue {
        Some((knob, factor)) => {
            let r = rescue_scan(&s.decoherence, knob, factor, kind)?;
            print_rates(&format!("after {knob:?} x {factor}"), &r.after);
            for (name, change) in r.rate_changes() {
                println!("  {name:<8} changes by x{change:.4}");
            }
            Some(r)
        }
        None => None,
    };

    let mut table = Table::new(&[
        ("stage", "-"),
        ("rate", "-"),
        ("value", "1/s"),
        ("ratio", "1"),
        ("feature_scale", "1/s"),
        ("verdict", "-"),
    ]);
    budget_rows(&mut table, "before", &b);
    if let Some(r) = &rescue {
        budget_rows(&mut table, "after", &r.after);
    }
    let report = BudgetReport {
        preset: cli.global.preset.as_deref(),
        feature: kind,
        feature_k,
        budget: &b,
        rescue: rescue.as_ref(),
        note: RATE_LABEL_NOTE,
    };
    let mut out = OutputDir::create(&cli.global.out)?;
    out.json("budget.json", &report)?;
    out.table("budget.csv", &table)?;
    finish(out, run)
}

fn preset_cmd(cli: &Cli, p: &PresetCommand) -> Result<()> {
    match p {
        PresetCommand::List => {
            for name in preset_names() {
                let cfg = ScenarioConfig::preset(name)?;
                println!("{name:<14} {}", cfg.description.unwrap_or_default());
            }
            Ok(())
        }
        PresetCommand::Show { name } => {
            let cfg = ScenarioConfig::from_toml_with_overrides(preset_toml(name)?, &cli.global.overrides)?;
            Scenario::from_config(cfg.clone())?;
            print!("{}", cfg.to_toml_string()?);
            Ok(())
        }
    }
}
