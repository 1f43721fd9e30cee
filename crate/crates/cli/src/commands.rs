//! Subcommand pipelines. Each writes its data files through [`Outputs`]
//! and fills the manifest summary.

use serde_json::{json, Map, Value};
use wgm_qed::dit::{spectrum_sweep, DitParams, FanoParams};
use wgm_qed::dynamics::{
    bad_cavity_model, beat_period, evolve, g2_auto_cross, prepare_with_model, pumped_system, steady_state, wavepacket,
    EvolveOptions,
};
use wgm_qed::fitting::{
    dit_fit_with, fano_cavity_fit_with, lorentzian_fit_with, DitFitInputs, FitResult, MinimizeOptions,
};
use wgm_qed::metrics::{read_emitter_table, EmitterRecord, ZplBudget};
use wgm_qed::quantum::{build_operators, build_space};
use wgm_qed::rate_model::{enumerate_protocol_oracle, herald_entanglement};
use wgm_qed::spectrum::{SeriesKind, SpectrumSeries};
use wgm_qed::units::to_ghz;

use crate::config::{FitKind, G2Model, RunConfig};
use crate::failure::Failure;
use crate::manifest::Outputs;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a mut Outputs,
    pub summary: &'a mut Map<String, Value>,
    pub seed: u64,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Ok,
    /// Outputs were written but an optimizer did not converge.
    NotConverged,
}

impl Context<'_> {
    fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    fn series(&mut self, stem: &str, s: &SpectrumSeries) -> Result<(), Failure> {
        let format = self.cfg.output.format;
        if format.csv() {
            self.out.write(&format!("{stem}.csv"), s.to_csv_string().as_bytes())?;
        }
        if format.json() {
            self.out.write(&format!("{stem}.json"), s.to_json()?.as_bytes())?;
        }
        Ok(())
    }

    fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            dt: self.cfg.simulation.dt_ns,
            strict_step: self.cfg.simulation.strict_step,
            ..Default::default()
        }
    }

    fn minimize_options(&self) -> MinimizeOptions {
        let mut o = MinimizeOptions { seed: self.seed, ..Default::default() };
        if let Some(n) = self.cfg.fit.max_iterations {
            o.max_iterations = n;
        }
        o
    }

    fn fit_outputs(&mut self, stem: &str, result: &FitResult, data: &SpectrumSeries) -> Result<(), Failure> {
        self.out.write(&format!("{stem}.json"), result.to_json()?.as_bytes())?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Failure::io(e.to_string());
        w.write_record(["freq_offset_ghz", "data", "model"]).map_err(csv_err)?;
        for (x, d, m) in result.overlay(data)? {
            w.write_record([format!("{x:.16e}"), format!("{d:.16e}"), format!("{m:.16e}")])
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
        self.out.write(&format!("{stem}_overlay.csv"), &bytes)?;
        let params: Map<String, Value> = result.params.iter().map(|p| (p.name.clone(), json!(p.value))).collect();
        self.note(stem, json!({
            "params": params,
            "residual_norm": result.residual_norm,
            "converged": result.converged,
            "flags": result.flags,
        }));
        Ok(())
    }
}

pub fn dit_spectrum(ctx: &mut Context) -> Result<Completion, Failure> {
    let device = ctx.cfg.device.params()?;
    let grid = ctx.cfg.simulation.frequency_grid()?;
    let series = spectrum_sweep(&grid, &DitParams::from(&device), &FanoParams::identity())?;
    let values = series.values();
    ctx.note("points", json!(series.len()));
    ctx.note("min_transmission", json!(values.iter().copied().fold(f64::INFINITY, f64::min)));
    ctx.note("max_transmission", json!(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
    ctx.series("dit_spectrum", &series)?;
    Ok(Completion::Ok)
}

pub fn wavepacket_cmd(ctx: &mut Context) -> Result<Completion, Failure> {
    let device = ctx.cfg.device.params()?;
    let sim = &ctx.cfg.simulation;
    if !(sim.t_end_ns >= 0.0 && sim.t_end_ns.is_finite()) {
        return Err(Failure::config("simulation.t_end_ns must be finite and >= 0"));
    }
    let space = build_space(sim.n_max)?;
    let ops = build_operators(&device, &space)?;
    let prep = ctx.cfg.prep.pulse(&device)?;
    let rho = prepare_with_model(&prep, &space, ctx.cfg.prep.model)?;
    let traj = evolve(&rho, &ops, sim.t_end_ns, &ctx.evolve_options())?;
    let wp = wavepacket(&traj, &ops)?;
    let total = wp.total_photons();
    if !(total > 1e-12) {
        log::warn!("empty signal: no photons are emitted for this preparation");
    }
    let beat = |s: &SpectrumSeries| if total > 1e-12 { beat_period(s) } else { None };
    ctx.note("beat_period_ns", json!(beat(&wp.cw)));
    ctx.note("beat_period_ccw_ns", json!(beat(&wp.ccw)));
    ctx.note("max_abs_cw_minus_ccw", json!(wp.max_abs_difference()));
    ctx.note("total_photons", json!(total));
    ctx.note("physicality", serde_json::to_value(traj.physicality).map_err(|e| Failure::io(e.to_string()))?);
    ctx.series("wavepacket_cw", &wp.cw)?;
    ctx.series("wavepacket_ccw", &wp.ccw)?;
    Ok(Completion::Ok)
}

pub fn g2(ctx: &mut Context) -> Result<Completion, Failure> {
    let device = ctx.cfg.device.params()?;
    let sim = &ctx.cfg.simulation;
    let grid = sim.tau_grid()?;
    let pump = sim.pump_rate_per_ns.unwrap_or(0.01 * device.gamma1);
    if !(pump > 0.0 && pump.is_finite()) {
        return Err(Failure::config("simulation.pump_rate_per_ns must be > 0 (set it when tau1_ns = inf)"));
    }
    let opts = ctx.evolve_options();
    let (auto, cross) = match sim.g2_model {
        G2Model::BadCavity => bad_cavity_model(&device)?.g2_pair(pump, &grid, &opts)?,
        G2Model::Full => {
            let ops = build_operators(&device, &build_space(sim.n_max)?)?;
            let sys = pumped_system(&ops, pump)?;
            let rho = steady_state(&ops, pump)?;
            g2_auto_cross(&sys, &rho, &ops.output_cw(), &ops.output_ccw(), &grid, &opts)?
        }
    };
    ctx.note("pump_rate_per_ns", json!(pump));
    ctx.note("g2_auto_0", json!(auto.values()[0]));
    ctx.note("g2_cross_0", json!(cross.values()[0]));
    ctx.series("g2_auto", &auto)?;
    ctx.series("g2_cross", &cross)?;
    Ok(Completion::Ok)
}

pub fn entangle(ctx: &mut Context) -> Result<Completion, Failure> {
    let sweep = &ctx.cfg.prep.p_excite_sweep;
    if let Some(p) = sweep.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Failure::config(format!("prep.p_excite_sweep: {p} is outside (0, 1]")));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::io(e.to_string());
    w.write_record(["p_excite", "herald_prob", "infidelity", "oracle_abs_diff"]).map_err(csv_err)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &p in sweep {
        let closed = herald_entanglement(p)?;
        let oracle = enumerate_protocol_oracle(p)?;
        let diff = (closed.infidelity_alpha - oracle.infidelity_alpha)
            .abs()
            .max((closed.herald_probability - oracle.herald_probability).abs());
        worst = worst.max(diff);
        w.write_record([
            format!("{p:.16e}"),
            format!("{:.16e}", closed.herald_probability),
            format!("{:.16e}", closed.infidelity_alpha),
            format!("{diff:.16e}"),
        ])
        .map_err(csv_err)?;
        rows.push(json!({
            "p_excite": p,
            "herald_prob": closed.herald_probability,
            "infidelity": closed.infidelity_alpha,
            "oracle_abs_diff": diff,
        }));
    }
    let bytes = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
    if ctx.cfg.output.format.csv() {
        ctx.out.write("entangle.csv", &bytes)?;
    }
    if ctx.cfg.output.format.json() {
        ctx.out.write("entangle.json", Value::Array(rows).to_string().as_bytes())?;
    }
    ctx.note("rows", json!(sweep.len()));
    ctx.note("max_oracle_abs_diff", json!(worst));
    Ok(Completion::Ok)
}

pub fn metrics(ctx: &mut Context) -> Result<Completion, Failure> {
    let m = &ctx.cfg.metrics;
    let inputs = match &m.emitter_table {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
            read_emitter_table(file)?
        }
        None => m.emitters.clone(),
    };
    let zpl = ZplBudget::new(m.tau_radiative_ns, m.debye_waller)?;
    let kappa_mhz = ctx.cfg.device.kappa_over_2pi_ghz * 1e3;
    let records = inputs
        .iter()
        .map(|e| EmitterRecord::compute(e, kappa_mhz, &zpl))
        .collect::<Result<Vec<_>, _>>()?;
    if ctx.cfg.output.format.csv() {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &records {
            w.serialize(r).map_err(|e| Failure::io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
        ctx.out.write("metrics.csv", &bytes)?;
    }
    if ctx.cfg.output.format.json() {
        let text = serde_json::to_string_pretty(&records).map_err(|e| Failure::io(e.to_string()))?;
        ctx.out.write("metrics.json", text.as_bytes())?;
    }
    for r in &records {
        ctx.note(
            &format!("emitter_{}", r.label),
            json!({ "cooperativity": r.cooperativity, "purcell": r.purcell, "coupling_g_over_2pi_mhz": r.coupling_g }),
        );
    }
    Ok(Completion::Ok)
}

fn read_scan(path: &std::path::Path, kind: SeriesKind) -> Result<SpectrumSeries, Failure> {
    if !path.exists() {
        return Err(Failure::io(format!("{}: file not found", path.display())));
    }
    Ok(SpectrumSeries::from_csv_path(path, kind)?)
}

pub fn fit(ctx: &mut Context) -> Result<Completion, Failure> {
    let cfg = ctx.cfg;
    let opts = ctx.minimize_options();
    let mut converged = true;
    match cfg.fit.model {
        FitKind::Lorentzian => {
            let path = cfg
                .fit
                .ple_scan
                .as_ref()
                .ok_or_else(|| Failure::config("fit.ple_scan is required for the lorentzian model"))?;
            let data = read_scan(path, SeriesKind::Ple)?;
            let r = lorentzian_fit_with(&data, &opts)?;
            converged &= r.converged;
            ctx.fit_outputs("lorentzian_fit", &r, &data)?;
        }
        FitKind::Staged => {
            let f = &cfg.fit;
            if f.wide_scan.is_none() && f.close_scan.is_none() {
                return Err(Failure::config("fit needs fit.wide_scan and/or fit.close_scan"));
            }
            if f.close_scan.is_some() && f.wide_scan.is_none() && f.fano_result.is_none() {
                return Err(Failure::config(
                    "the close-scan fit needs the cavity fit first: set fit.wide_scan or fit.fano_result",
                ));
            }
            let device = cfg.device.params()?;
            let cavity = match (&f.wide_scan, &f.fano_result) {
                (Some(path), _) => {
                    let wide = read_scan(path, SeriesKind::Transmission)?;
                    let r = fano_cavity_fit_with(&wide, &DitParams::from(&device), &opts)?;
                    converged &= r.converged;
                    ctx.fit_outputs("fano_fit", &r, &wide)?;
                    r
                }
                (None, Some(path)) => {
                    let text =
                        std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<FitResult>(&text)
                        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
                }
                (None, None) => unreachable!("checked above"),
            };
            match &f.close_scan {
                Some(path) => {
                    let close = read_scan(path, SeriesKind::Transmission)?;
                    let inputs = DitFitInputs {
                        delta_ghz: to_ghz(device.delta),
                        detuning_ghz: to_ghz(device.detuning),
                        g1_ghz: to_ghz(device.g1),
                        g2_ghz: to_ghz(device.g2),
                        gamma1_ghz: to_ghz(device.gamma1 + device.gamma_d1),
                        gamma2_ghz: to_ghz(device.gamma2 + device.gamma_d2),
                    };
                    let r = dit_fit_with(&close, &cavity, &inputs, &opts)?;
                    converged &= r.converged;
                    ctx.fit_outputs("dit_fit", &r, &close)?;
                }
                None => {
                    log::warn!("no close scan configured: DIT stage skipped");
                    ctx.note("dit_fit", Value::Null);
                }
            }
        }
    }
    Ok(if converged { Completion::Ok } else { Completion::NotConverged })
}
