use std::f64::consts::TAU;
use std::path::PathBuf;

use mesoleads::floquet::{solve_limit_cycle, FloquetOptions, FloquetSolution};
use mesoleads::lyapunov::{default_dt, steady_state, EvolveOptions};
use mesoleads::model::diagonal_occupations;
use mesoleads::oracle::{chain_evolve, chain_map, landauer_currents, pauli_evolve, ChainBath, ChainOptions};
use mesoleads::spectral::{build_lead, effective_spectral};
use mesoleads::thermo::{
    coupling_dissipation, energy_current, evolve_thermo, external_currents, heat_current, mean_currents,
    particle_current, rectification, InstantThermo,
};
use mesoleads::{ExtendedGenerator, SpectralFunction};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, Scenario};
use crate::output::{num, CsvOut, Manifest};
use crate::{Cli, CliError, Command};

struct Run {
    cfg: ExperimentConfig,
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    fn start(cli: &Cli, command: &str) -> Result<Self, CliError> {
        let path = cli
            .config
            .as_deref()
            .ok_or_else(|| CliError::config("--config", "required for this subcommand"))?;
        let cfg = ExperimentConfig::load(path)?;
        let dir = cli
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let workers = cli.workers.unwrap_or_else(rayon::current_num_threads);
        let mut manifest = Manifest::new(command, Some(path), cli.seedless, workers);
        manifest.config = serde_json::to_value(&cfg).expect("config is plain data");
        Ok(Self { cfg, dir, manifest })
    }

    fn csv(&self, file: &str, schema: &str, columns: &[String]) -> Result<CsvOut, CliError> {
        CsvOut::create(&self.dir, file, schema, columns)
    }

    fn finish_csv(&mut self, out: CsvOut) -> Result<(), CliError> {
        let path = out.finish()?;
        self.manifest.add_output(&path);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.manifest.warnings.push(msg);
    }

    fn done(self) -> Result<(), CliError> {
        self.manifest.write(&self.dir)
    }

    fn names(&self) -> Vec<String> {
        self.cfg.baths.iter().map(|b| b.name.clone()).collect()
    }

    fn generator(&self) -> Result<ExtendedGenerator, CliError> {
        Ok(self.cfg.model()?.assemble()?)
    }
}

pub fn run(cli: &Cli, cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Grid => grid(Run::start(cli, "grid")?),
        Command::Evolve => evolve(Run::start(cli, "evolve")?),
        Command::Steady => steady(Run::start(cli, "steady")?),
        Command::Floquet => floquet(Run::start(cli, "floquet")?),
        Command::FloquetSweep => sweep(Run::start(cli, "floquet-sweep")?, cli.workers),
        Command::ChainOracle => chain(Run::start(cli, "chain-oracle")?),
        Command::PauliOracle => pauli(Run::start(cli, "pauli-oracle")?),
        Command::Compare(_) => unreachable!("handled by compare::run"),
    }
}

fn per_bath(names: &[String], fields: &[&str]) -> Vec<String> {
    names
        .iter()
        .flat_map(|n| fields.iter().map(move |f| format!("{f}_{n}")))
        .collect()
}

const BATH_FIELDS: [&str; 6] = ["JP", "JE", "JQ", "IP", "IE", "HSL"];
const SYSTEM_FIELDS: [&str; 6] = ["ES", "NS", "S", "dSdt", "P_drive", "sigma_dot"];

/// `t`, per-bath currents, then system observables.
fn instant_columns(names: &[String]) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(per_bath(names, &BATH_FIELDS));
    cols.extend(SYSTEM_FIELDS.iter().map(|s| s.to_string()));
    cols
}

fn instant_values(m: &InstantThermo) -> Vec<f64> {
    let mut v = vec![m.t];
    for a in 0..m.particle.len() {
        v.extend([
            m.particle[a],
            m.energy[a],
            m.heat[a],
            m.external_particle[a],
            m.external_energy[a],
            m.coupling_energy[a],
        ]);
    }
    v.extend([
        m.system_energy,
        m.system_number,
        m.entropy,
        m.entropy_rate,
        m.drive_power,
        m.entropy_production_rate,
    ]);
    v
}

fn grid(mut run: Run) -> Result<(), CliError> {
    let specs = run.cfg.bath_specs()?;
    let names = run.names();
    let mut table = run.csv(
        "grid.csv",
        "lead-grid",
        &["bath", "site", "k", "energy", "spacing", "coupling", "damping", "occupation"].map(String::from),
    )?;
    let mut leads = Vec::new();
    let mut diag = Vec::new();
    for ((spec, name), bath) in specs.iter().zip(&names).zip(&run.cfg.baths) {
        let lead = build_lead(spec)?;
        for (k, m) in lead.iter().enumerate() {
            table.row([
                name.clone(),
                bath.site.to_string(),
                k.to_string(),
                num(m.energy),
                num(m.spacing),
                num(m.coupling),
                num(m.damping),
                num(m.occupation),
            ])?;
        }
        diag.push(json!({
            "bath": name,
            "n_linear": spec.scheme.n_linear,
            "n_log": spec.scheme.n_log,
            "modes": lead.len(),
        }));
        leads.push(lead);
    }
    run.finish_csv(table)?;

    let w = specs.iter().map(|s| s.spectral.cutoff).fold(0.0, f64::max);
    let n = run.cfg.numerics.spectral_points;
    let mut cols = vec!["omega".to_string()];
    cols.extend(per_bath(&names, &["J", "Jeff"]));
    let mut spectral = run.csv("spectral.csv", "effective-spectral", &cols)?;
    let mut worst = vec![0.0f64; specs.len()];
    for i in 0..n {
        let omega = -w + 2.0 * w * i as f64 / (n - 1) as f64;
        let mut row = vec![omega];
        for (a, (spec, lead)) in specs.iter().zip(&leads).enumerate() {
            let (j, jeff) = (spec.spectral.evaluate(omega), effective_spectral(lead, omega));
            if omega.abs() <= spec.scheme.inner_window {
                worst[a] = worst[a].max((jeff / j - 1.0).abs());
            }
            row.extend([j, jeff]);
        }
        spectral.numbers(&row)?;
    }
    run.finish_csv(spectral)?;
    for (d, w) in diag.iter_mut().zip(worst) {
        d["max_relative_deviation_inner_window"] = json!(w);
    }
    run.manifest.diagnostics = json!({ "baths": diag });
    run.done()
}

fn evolve(mut run: Run) -> Result<(), CliError> {
    let gen = run.generator()?;
    let c0 = gen.initial_state(&diagonal_occupations(&run.cfg.system.occupations))?;
    let dt = run.cfg.numerics.dt.unwrap_or_else(|| default_dt(&gen));
    let opts = EvolveOptions::new(run.cfg.numerics.t_final, dt).with_stride(run.cfg.numerics.stride);
    let records = evolve_thermo(&gen, &c0, &opts)?;

    let names = run.names();
    let mut cols = instant_columns(&names);
    cols.extend(names.iter().map(|n| format!("Q_{n}")));
    cols.extend(
        ["W_chem", "W_ext", "W_drive", "dU", "dS", "Sigma", "first_law_residual"].map(String::from),
    );
    let mut out = run.csv("thermo.csv", "thermo-timeseries", &cols)?;
    let mut worst_first_law: f64 = 0.0;
    let mut min_sigma = f64::INFINITY;
    for r in &records {
        let mut row = instant_values(&r.instant);
        row.extend(&r.heat);
        row.extend([
            r.chemical_work,
            r.external_work,
            r.drive_work,
            r.delta_u,
            r.delta_s,
            r.entropy_production,
            r.first_law_residual(),
        ]);
        out.numbers(&row)?;
        worst_first_law = worst_first_law.max(r.first_law_residual().abs() / r.total_work().abs().max(1.0));
        min_sigma = min_sigma.min(r.entropy_production);
    }
    run.finish_csv(out)?;
    run.manifest.diagnostics = json!({
        "dt": dt,
        "steps": opts.steps(),
        "samples": records.len(),
        "max_relative_first_law_residual": worst_first_law,
        "min_entropy_production": min_sigma,
    });
    run.done()
}

fn steady(mut run: Run) -> Result<(), CliError> {
    if !run.cfg.is_static() {
        return Err(CliError::config("system.amplitude", "steady needs an undriven system"));
    }
    let gen = run.generator()?;
    let c = steady_state(&gen)?;
    let mut out = run.csv(
        "steady.csv",
        "steady-currents",
        &["bath", "site", "JP", "JE", "JQ", "IP", "IE", "D"].map(String::from),
    )?;
    for (a, b) in run.cfg.baths.iter().enumerate() {
        let (ip, ie) = external_currents(&gen, &c.matrix, a);
        out.row([
            b.name.clone(),
            b.site.to_string(),
            num(particle_current(&gen, &c.matrix, a)),
            num(energy_current(&gen, &c.matrix, a)),
            num(heat_current(&gen, &c.matrix, a)),
            num(ip),
            num(ie),
            num(coupling_dissipation(&gen, &c.matrix, a)),
        ])?;
    }
    run.finish_csv(out)?;

    let mut diag = json!({ "system_occupations": (0..gen.layout().system).map(|i| c.matrix[[i, i]].re).collect::<Vec<_>>() });
    if run.cfg.scenario == Scenario::ResonantLevel {
        let specs = run.cfg.bath_specs()?;
        let l = landauer_currents(run.cfg.system.hamiltonian[0][0], &specs[0], &specs[1])?;
        let jp = particle_current(&gen, &c.matrix, 0);
        let mut out = run.csv(
            "landauer.csv",
            "landauer-comparison",
            &["JP_steady", "JP_landauer", "JE_landauer", "relative_error"].map(String::from),
        )?;
        let rel = (jp - l.particle).abs() / l.particle.abs();
        out.numbers(&[jp, l.particle, l.energy, rel])?;
        run.finish_csv(out)?;
        diag["landauer_relative_error"] = json!(rel);
    }
    run.manifest.diagnostics = diag;
    run.done()
}

fn floquet_options(cfg: &ExperimentConfig) -> FloquetOptions {
    FloquetOptions {
        tol: cfg.numerics.tol,
        max_sweeps: cfg.numerics.max_sweeps,
        n_max: cfg.numerics.n_max,
        n_max_limit: cfg.numerics.n_max_limit,
    }
}

fn floquet(mut run: Run) -> Result<(), CliError> {
    let gen = run.generator()?;
    let sol = solve_limit_cycle(&gen, &floquet_options(&run.cfg))?;
    let names = run.names();

    let mut out = run.csv("harmonics.csv", "floquet-harmonics", &["n".into(), "max_abs".into()])?;
    for (n, norm) in sol.harmonic_norms() {
        out.row([n.to_string(), num(norm)])?;
    }
    run.finish_csv(out)?;

    let times = if gen.is_static() {
        vec![0.0]
    } else {
        sol.sample_times(run.cfg.numerics.cycle_samples.unwrap_or_else(|| sol.default_samples()))
    };
    let mut out = run.csv("cycle.csv", "limit-cycle", &instant_columns(&names))?;
    for &t in &times {
        let m = InstantThermo::evaluate(&gen, t, &sol.reconstruct(t).matrix, &sol.derivative(t))?;
        out.numbers(&instant_values(&m))?;
    }
    run.finish_csv(out)?;

    let mean = mean_currents(&gen, &sol);
    let mut out = run.csv(
        "mean.csv",
        "cycle-average",
        &["bath", "JP", "JE", "JQ", "IP", "IE"].map(String::from),
    )?;
    for (a, n) in names.iter().enumerate() {
        out.row([
            n.clone(),
            num(mean.particle[a]),
            num(mean.energy[a]),
            num(mean.heat[a]),
            num(mean.external_particle[a]),
            num(mean.external_energy[a]),
        ])?;
    }
    run.finish_csv(out)?;
    run.manifest.diagnostics = json!({
        "residual": sol.residual,
        "sweeps": sol.sweeps,
        "n_max": sol.n_max,
        "cycle_samples": times.len(),
        "mean_entropy_production": mean.entropy_production_rate,
    });
    run.done()
}

struct SweepRow {
    lambda: f64,
    omega: f64,
    ratio: f64,
    values: Vec<f64>,
    diag: serde_json::Value,
}

fn sweep_point(cfg: &ExperimentConfig, lambda: f64, ratio: f64) -> Result<SweepRow, CliError> {
    let omega = lambda * ratio;
    let opts = floquet_options(cfg);
    let gf = cfg.two_dot(lambda, omega, false)?.assemble()?;
    let gb = cfg.two_dot(lambda, omega, true)?.assemble()?;
    let sf: FloquetSolution = solve_limit_cycle(&gf, &opts)?;
    let sb = solve_limit_cycle(&gb, &opts)?;
    let r = rectification(&sf, &sb, &gf, &gb)?;
    Ok(SweepRow {
        lambda,
        omega,
        ratio,
        values: vec![
            r.coefficient,
            r.forward_entropy_production,
            r.backward_entropy_production,
            r.forward_current,
            r.backward_current,
            r.forward_particle,
            r.backward_particle,
        ],
        diag: json!({
            "lambda": lambda,
            "omega": omega,
            "residual": [sf.residual, sb.residual],
            "sweeps": [sf.sweeps, sb.sweeps],
            "n_max": [sf.n_max, sb.n_max],
        }),
    })
}

fn sweep(mut run: Run, workers: Option<usize>) -> Result<(), CliError> {
    let sw = run
        .cfg
        .sweep
        .clone()
        .ok_or_else(|| CliError::config("sweep", "missing section"))?;
    if run.cfg.scenario != Scenario::TwoDotRectification {
        return Err(CliError::config("scenario", "floquet-sweep needs two-dot-rectification"));
    }
    let mut points: Vec<(f64, f64)> = sw
        .lambdas
        .iter()
        .flat_map(|&l| sw.ratios.iter().map(move |&r| (l, r)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::config("--workers", e))?;
    let cfg = &run.cfg;
    // collect keeps input order, so rows come out sorted whatever finishes first
    let rows: Vec<Result<SweepRow, CliError>> =
        pool.install(|| points.par_iter().map(|&(l, r)| sweep_point(cfg, l, r)).collect());
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut out = run.csv(
        "sweep.csv",
        "rectification-sweep",
        &[
            "lambda", "omega", "omega_over_lambda", "R", "sigma_fwd", "sigma_bwd", "JE_fwd", "JE_bwd", "JP_fwd",
            "JP_bwd",
        ]
        .map(String::from),
    )?;
    for r in &rows {
        let mut v = vec![r.lambda, r.omega, r.ratio];
        v.extend(&r.values);
        out.numbers(&v)?;
    }
    run.finish_csv(out)?;
    run.manifest.diagnostics = json!({ "points": rows.iter().map(|r| r.diag.clone()).collect::<Vec<_>>() });
    run.done()
}

/// Step for the oracles when none is configured.
fn oracle_dt(cfg: &ExperimentConfig) -> f64 {
    cfg.numerics.dt.unwrap_or_else(|| {
        let mut dt: f64 = 0.01;
        if !cfg.is_static() {
            dt = dt.min(0.02 * TAU / cfg.system.frequency);
        }
        dt
    })
}

fn chain(mut run: Run) -> Result<(), CliError> {
    let model = run.cfg.model()?;
    let (length, star_modes) = (run.cfg.chain.length, run.cfg.chain.star_modes);
    let mut cache: Vec<(SpectralFunction, ChainBath)> = Vec::new();
    let mut chains = Vec::new();
    for c in &model.couplings {
        let hit = cache.iter().find(|(s, _)| *s == c.bath.spectral).map(|(_, ch)| ch.clone());
        let ch = match hit {
            Some(ch) => ch,
            None => {
                let ch = chain_map(&c.bath.spectral, length, star_modes)?;
                cache.push((c.bath.spectral, ch.clone()));
                ch
            }
        };
        chains.push(ch);
    }
    let names = run.names();
    let mut out = run.csv(
        "chain_coefficients.csv",
        "chain-coefficients",
        &["bath", "p", "epsilon", "g"].map(String::from),
    )?;
    for (n, ch) in names.iter().zip(&chains) {
        for p in 0..ch.len() {
            out.row([n.clone(), p.to_string(), num(ch.energies[p]), num(ch.hoppings[p])])?;
        }
    }
    run.finish_csv(out)?;

    let dt = oracle_dt(&run.cfg);
    let opts = ChainOptions {
        t_final: run.cfg.numerics.t_final,
        dt,
        stride: run.cfg.numerics.stride,
    };
    let res = chain_evolve(&model, &chains, &diagonal_occupations(&run.cfg.system.occupations), &opts)?;
    let mut cols = vec!["t".to_string()];
    cols.extend(per_bath(&names, &["JP", "JE", "JQ", "HSL"]));
    cols.extend(["ES", "NS", "S", "dSdt", "sigma_dot", "N_total"].map(String::from));
    let mut out = run.csv("chain_thermo.csv", "chain-timeseries", &cols)?;
    for r in &res.records {
        let mut v = vec![r.t];
        for a in 0..names.len() {
            v.extend([r.particle[a], r.energy[a], r.heat[a], r.coupling_energy[a]]);
        }
        v.extend([
            r.system_energy,
            r.system_number,
            r.entropy,
            r.entropy_rate,
            r.entropy_production_rate,
            r.total_number,
        ]);
        out.numbers(&v)?;
    }
    run.finish_csv(out)?;
    if res.beyond_horizon {
        run.warn(format!(
            "t_final = {} exceeds the chain validity horizon {:.6}",
            opts.t_final, res.horizon
        ));
    }
    if let Some(t) = res.boundary_flag {
        run.warn(format!("chain far-end occupations moved at t = {t}"));
    }
    run.manifest.diagnostics = json!({
        "dt": dt,
        "horizon": res.horizon,
        "boundary_flag": res.boundary_flag,
        "valid_until": res.valid_until,
        "chains": chains.iter().zip(&names).map(|(c, n)| json!({
            "bath": n,
            "tail_hopping": c.tail_hopping,
            "tail_energy": c.tail_energy,
            "tail_deviation": c.tail_deviation,
            "orthogonality_error": c.orthogonality_error,
        })).collect::<Vec<_>>(),
    });
    run.done()
}

fn pauli(mut run: Run) -> Result<(), CliError> {
    if run.cfg.system.hamiltonian.len() != 1 {
        return Err(CliError::config("scenario", "pauli-oracle needs a single level"));
    }
    let model = run.cfg.model()?;
    let baths: Vec<(f64, f64)> = run
        .cfg
        .baths
        .iter()
        .map(|b| (b.temperature, b.chemical_potential))
        .collect();
    let dt = oracle_dt(&run.cfg);
    let samples = pauli_evolve(
        run.cfg.pauli_rate,
        &baths,
        run.cfg.system.hamiltonian[0][0],
        &model.drive,
        run.cfg.system.occupations[0],
        run.cfg.numerics.t_final,
        dt,
        run.cfg.numerics.stride,
    )?;
    let mut out = run.csv("pauli.csv", "pauli-timeseries", &["t", "p", "S"].map(String::from))?;
    for s in &samples {
        out.numbers(&[s.t, s.population, s.entropy])?;
    }
    run.finish_csv(out)?;
    run.manifest.diagnostics = json!({ "dt": dt, "samples": samples.len() });
    run.done()
}
