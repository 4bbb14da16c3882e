use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use edcal::dataio::{
    gen_synthetic_with_annotations, initial_guess, load_annotations, load_dataset,
    save_annotations, write_dataset, Dataset, InitialGuessOptions,
};
use edcal::edmodel::{
    calibration_cells, census_log_from_records, decision_pairs, extract_kpis, feasible_pairs,
    hourly_census, Kpi, KpiMode, KpiSampleSet, PatientRecord, ScenarioConfig, Tag, Unit,
};
use edcal::metrics::{ecdf, mean_ecdf, CalibrationTarget, KpiStats, StepFunction, Tolerances};
use edcal::optimizer::{Bounds, CalibrationProblem, Granularity, ParamVector, SolveOptions};
use edcal::simcore::{run_replication_with, trace, RunOptions};
use rayon::prelude::*;

use crate::error::{CliError, Context};
use crate::stats::mean_ci;
use crate::ModelArgs;

type CmdResult = Result<(), CliError>;

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    let cfg = match path {
        Some(p) => ScenarioConfig::load(p).input(|| format!("loading {}", p.display()))?,
        None => ScenarioConfig::default_scenario(),
    };
    cfg.validate().input(|| "validating the scenario".into())?;
    Ok(cfg)
}

fn load_params(path: Option<&Path>) -> Result<ParamVector, CliError> {
    match path {
        Some(p) => ParamVector::load(p).input(|| format!("loading {}", p.display())),
        None => Ok(ParamVector::reference()),
    }
}

fn load_model(m: &ModelArgs) -> Result<(ScenarioConfig, ParamVector), CliError> {
    Ok((
        load_config(m.config.as_deref())?,
        load_params(m.params.as_deref())?,
    ))
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let ds = load_dataset(path).input(|| format!("loading {}", path.display()))?;
    ds.validate()
        .input(|| format!("validating {}", path.display()))?;
    Ok(ds)
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).runtime(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).runtime(|| format!("creating {}", dir.display()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Hour-of-day census per (tag, unit). `offset` is the hour of day at time 0.
fn census_table(
    log: &BTreeMap<(Tag, Unit), Vec<(f64, i8)>>,
    offset: f64,
    hours: f64,
) -> edcal::Result<BTreeMap<(Tag, Unit), [f64; 24]>> {
    let mut out = BTreeMap::new();
    for pair in feasible_pairs() {
        let shifted: Vec<(f64, i8)> = log
            .get(&pair)
            .map(|l| l.iter().map(|(t, d)| (t + offset, *d)).collect())
            .unwrap_or_default();
        out.insert(pair, hourly_census(&shifted, (offset, offset + hours))?);
    }
    Ok(out)
}

/// Times rounded as a dataset file stores them, so that simulated tables
/// and tables built from a written dataset agree exactly.
fn as_stored(r: &PatientRecord) -> PatientRecord {
    let round = |t: f64| format!("{t:.4}").parse::<f64>().expect("formatted float");
    PatientRecord {
        t0: round(r.t0),
        t2: r.t2.map(round),
        t5: r.t5.map(round),
        t6: r.t6.map(round),
        ..r.clone()
    }
}

/// Table rows: Red/RA patients are counted with Red/MU.
fn count_pair(tag: Tag, unit: Unit) -> (Tag, Unit) {
    if (tag, unit) == (Tag::Red, Unit::RA) {
        (Tag::Red, Unit::MU)
    } else {
        (tag, unit)
    }
}

pub fn simulate(
    model: &ModelArgs,
    reps: usize,
    seed: u64,
    out: &Path,
    want_trace: bool,
) -> CmdResult {
    let (cfg, params) = load_model(model)?;
    if reps == 0 {
        return Err(CliError::Input(anyhow::anyhow!(
            "--reps must be at least 1"
        )));
    }
    let outputs = (0..reps)
        .into_par_iter()
        .map(|r| {
            let opts = RunOptions {
                trace: want_trace && r == 0,
            };
            run_replication_with(&cfg, &params, r as u64, seed, &opts)
        })
        .collect::<edcal::Result<Vec<_>>>()?;

    let offset = cfg.warmup.rem_euclid(24.0);
    let hours = cfg.window_hours();
    let mut kpis = String::from("rep,tag,unit,kpi,value\n");
    let mut census = String::from("rep,tag,unit,hour,value\n");
    let mut counts: BTreeMap<(Tag, Unit), Vec<f64>> = BTreeMap::new();
    let mut tallies = Vec::new();
    for (r, o) in outputs.iter().enumerate() {
        let records: Vec<PatientRecord> = o.records.iter().map(as_stored).collect();
        for (cell, samples) in extract_kpis(&records, KpiMode::Simulated)?.iter() {
            for v in samples {
                let _ = writeln!(
                    kpis,
                    "{r},{},{},{},{v}",
                    cell.tag,
                    cell.unit,
                    cell.kpi.name()
                );
            }
        }
        let table = census_table(&census_log_from_records(&records), offset, hours)?;
        for ((tag, unit), row) in &table {
            for (h, v) in row.iter().enumerate() {
                let _ = writeln!(census, "{r},{tag},{unit},{h},{v}");
            }
        }
        let mut per_rep: BTreeMap<(Tag, Unit), f64> =
            decision_pairs().into_iter().map(|p| (p, 0.0)).collect();
        for ((tag, unit), n) in &o.patient_counts {
            *per_rep.entry(count_pair(*tag, *unit)).or_default() += *n as f64;
        }
        for (p, n) in per_rep {
            counts.entry(p).or_default().push(n);
        }
        tallies.push(serde_json::json!({
            "created": o.tally.created,
            "diverted": o.tally.diverted,
            "deceased": o.tally.deceased,
            "lwbs": o.tally.lwbs,
            "left_during_exams": o.tally.left_during_exams,
            "transferred": o.tally.transferred,
            "discharged": o.tally.discharged,
            "in_system": o.tally.in_system,
        }));
    }
    if reps < 2 {
        log::warn!("a single replication gives no confidence intervals; CI fields left empty");
    }
    let mut table = String::from("tag,unit,mean,ci_low,ci_high\n");
    for ((tag, unit), v) in &counts {
        let (m, ci) = mean_ci(v);
        let _ = writeln!(
            table,
            "{tag},{unit},{m},{},{}",
            fmt_opt(ci.map(|c| c.0)),
            fmt_opt(ci.map(|c| c.1))
        );
    }
    let run = serde_json::json!({
        "reps": reps,
        "seed": seed,
        "window_hours": hours,
        "window_start_day": cfg.window_start_day(),
        "tallies": tallies,
    });

    create_dir(out)?;
    write_file(&out.join("kpis.csv"), &kpis)?;
    write_file(&out.join("census.csv"), &census)?;
    write_file(&out.join("patient_counts.csv"), &table)?;
    write_file(&out.join("run.json"), &format!("{:#}\n", run))?;
    if let Some(t) = outputs.first().and_then(|o| o.trace.as_ref()) {
        write_file(&out.join("trace_rep0.tsv"), &trace::to_tsv(t))?;
    }
    log::info!("{reps} replications written to {}", out.display());
    Ok(())
}

pub fn gen_synthetic(
    model: &ModelArgs,
    seed: u64,
    out: &Path,
    annotations: Option<&Path>,
) -> CmdResult {
    let (cfg, params) = load_model(model)?;
    let (ds, notes) = gen_synthetic_with_annotations(&params, &cfg, seed)?;
    write_dataset(out, &ds).runtime(|| format!("writing {}", out.display()))?;
    if let Some(a) = annotations {
        save_annotations(a, &notes).runtime(|| format!("writing {}", a.display()))?;
    }
    log::info!("{} records written to {}", ds.records.len(), out.display());
    Ok(())
}

pub struct CalibrateArgs {
    pub config: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub auto_start: bool,
    pub annotations: Option<PathBuf>,
    pub dataset: PathBuf,
    pub budget: usize,
    pub reps: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub out: PathBuf,
}

pub fn calibrate(a: &CalibrateArgs) -> CmdResult {
    let cfg = load_config(a.config.as_deref())?;
    let ds = read_dataset(&a.dataset)?;
    let start = if a.auto_start {
        let notes = match &a.annotations {
            Some(p) => load_annotations(p).input(|| format!("loading {}", p.display()))?,
            None => {
                log::warn!("no exam-request annotations; visit and exams laws use defaults");
                Vec::new()
            }
        };
        initial_guess(&ds, &notes, &cfg, &InitialGuessOptions::default())?.params
    } else {
        load_params(a.params.as_deref())?
    };
    let real = extract_kpis(&ds.records, KpiMode::Real)?;
    let tolerances = match a.tolerance {
        Some(t) => Tolerances::uniform(&calibration_cells(), t),
        None => Tolerances::case_study(),
    };
    let target = CalibrationTarget::new(&real, tolerances)?;
    let problem = CalibrationProblem {
        cfg,
        target,
        n_reps: a.reps,
        base_seed: a.seed,
        bounds: Bounds::case_study(start.keys()),
        granularity: Granularity::default(),
    };
    let opts = SolveOptions {
        budget: a.budget,
        seed: a.seed,
        ..Default::default()
    };
    let start = start.with_values(problem.bounds.clamp(start.values()))?;
    let res = problem.run(&start, &opts)?;

    create_dir(&a.out)?;
    write_file(&a.out.join("start_params.json"), &start.to_json())?;
    write_file(&a.out.join("best_params.json"), &res.best.to_json())?;
    let report = serde_json::to_string_pretty(&res.report).runtime(|| "encoding report".into())?;
    write_file(&a.out.join("solve_report.json"), &(report + "\n"))?;
    write_file(&a.out.join("history.csv"), &res.report.history_csv())?;
    let mut diag = Vec::new();
    res.diagnostics.write_csv(&mut diag)?;
    write_file(
        &a.out.join("diagnostics.csv"),
        &String::from_utf8(diag).runtime(|| "encoding diagnostics".into())?,
    )?;
    let mut resid = String::from("cell,integral,mu_sim,mu_real,sd_sim,sd_real,g,h\n");
    if let Some(e) = &res.evaluation {
        for c in &e.cells {
            let _ = writeln!(
                resid,
                "{},{},{},{},{},{},{},{}",
                c.cell,
                c.integral,
                c.mu_sim,
                c.mu_real,
                c.sd_sim,
                c.sd_real,
                fmt_opt(c.g),
                fmt_opt(c.h)
            );
        }
    }
    write_file(&a.out.join("residuals.csv"), &resid)?;

    let r = &res.report;
    log::info!(
        "f = {}, max violation = {}, {} evaluations, stop: {:?}",
        r.best_f,
        r.best_max_violation,
        r.evaluations_used,
        r.stop_reason
    );
    match &res.evaluation {
        Some(e) if e.is_feasible() => Ok(()),
        Some(e) => Err(CliError::Infeasible(format!(
            "max violation {} (best point written)",
            e.max_violation()
        ))),
        None => Err(CliError::Infeasible(
            "simulation failed at the best point".into(),
        )),
    }
}

fn parse_err(path: &Path, line: usize, msg: &str) -> CliError {
    CliError::Input(anyhow::anyhow!("{}:{line}: {msg}", path.display()))
}

/// Rows of a headed CSV file, header checked.
fn read_rows(path: &Path, header: &str) -> Result<Vec<Vec<String>>, CliError> {
    let text = fs::read_to_string(path).input(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(parse_err(path, 1, &format!("expected header {header}")));
    }
    Ok(lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect())
}

struct SimOutputs {
    reps: usize,
    kpis: Vec<KpiSampleSet>,
    census: BTreeMap<(Tag, Unit), Vec<[f64; 24]>>,
}

fn load_sim(dir: &Path) -> Result<SimOutputs, CliError> {
    let run_path = dir.join("run.json");
    let run: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(&run_path).input(|| format!("reading {}", run_path.display()))?,
    )
    .input(|| format!("parsing {}", run_path.display()))?;
    let reps = run["reps"]
        .as_u64()
        .filter(|r| *r > 0)
        .ok_or_else(|| parse_err(&run_path, 1, "missing reps"))? as usize;

    let path = dir.join("kpis.csv");
    let mut kpis = vec![KpiSampleSet::new(); reps];
    for (i, row) in read_rows(&path, "rep,tag,unit,kpi,value")?
        .iter()
        .enumerate()
    {
        let bad = || parse_err(&path, i + 2, "malformed row");
        let [r, tag, unit, kpi, v] = row.as_slice() else {
            return Err(bad());
        };
        let r: usize = r.parse().map_err(|_| bad())?;
        let cell = edcal::edmodel::CellKey::new(
            tag.parse().map_err(|_| bad())?,
            unit.parse().map_err(|_| bad())?,
            kpi.parse::<Kpi>().map_err(|_| bad())?,
        );
        kpis.get_mut(r)
            .ok_or_else(bad)?
            .push(cell, v.parse().map_err(|_| bad())?);
    }

    let path = dir.join("census.csv");
    let mut census: BTreeMap<(Tag, Unit), Vec<[f64; 24]>> = BTreeMap::new();
    for (i, row) in read_rows(&path, "rep,tag,unit,hour,value")?
        .iter()
        .enumerate()
    {
        let bad = || parse_err(&path, i + 2, "malformed row");
        let [r, tag, unit, h, v] = row.as_slice() else {
            return Err(bad());
        };
        let r: usize = r.parse().map_err(|_| bad())?;
        let h: usize = h.parse().map_err(|_| bad())?;
        if r >= reps || h >= 24 {
            return Err(bad());
        }
        let rows = census
            .entry((
                tag.parse().map_err(|_| bad())?,
                unit.parse().map_err(|_| bad())?,
            ))
            .or_insert_with(|| vec![[0.0; 24]; reps]);
        rows[r][h] = v.parse().map_err(|_| bad())?;
    }
    Ok(SimOutputs { reps, kpis, census })
}

fn merged_grid(a: &StepFunction, b: &StepFunction) -> Vec<f64> {
    let mut g: Vec<f64> = a
        .breakpoints()
        .iter()
        .chain(b.breakpoints())
        .copied()
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub fn report(sim_dir: &Path, dataset: &Path, out: &Path) -> CmdResult {
    let sim = load_sim(sim_dir)?;
    let ds = read_dataset(dataset)?;
    let real = extract_kpis(&ds.records, KpiMode::Real)?;
    if sim.reps < 2 {
        log::warn!("a single replication gives no confidence intervals; CI fields left empty");
    }

    let real_census = census_table(
        &census_log_from_records(&ds.records),
        0.0,
        ds.period_hours(),
    )?;
    let mut census = String::from("tag,unit,hour,real,sim_mean,ci_low,ci_high,diff\n");
    for (pair, real_row) in &real_census {
        let Some(reps) = sim.census.get(pair) else {
            continue;
        };
        for (h, rv) in real_row.iter().enumerate() {
            let vals: Vec<f64> = reps.iter().map(|r| r[h]).collect();
            let (m, ci) = mean_ci(&vals);
            let _ = writeln!(
                census,
                "{},{},{h},{rv},{m},{},{},{}",
                pair.0,
                pair.1,
                fmt_opt(ci.map(|c| c.0)),
                fmt_opt(ci.map(|c| c.1)),
                m - rv
            );
        }
    }

    let mut ecdfs = String::from("tag,unit,kpi,t,real_f,sim_f,diff\n");
    let mut means = String::from("tag,unit,kpi,real_mean,sim_mean,ci_low,ci_high,diff\n");
    for cell in calibration_cells() {
        let r = real.get(&cell);
        let per_rep: Vec<&[f64]> = sim
            .kpis
            .iter()
            .map(|k| k.get(&cell))
            .filter(|s| !s.is_empty())
            .collect();
        if r.is_empty() || per_rep.is_empty() {
            log::warn!("{cell}: no samples on one side; skipped");
            continue;
        }
        let fr = ecdf(r)?;
        let fs = mean_ecdf(
            &per_rep
                .iter()
                .map(|s| ecdf(s))
                .collect::<edcal::Result<Vec<_>>>()?,
        )?;
        for t in merged_grid(&fr, &fs) {
            let (a, b) = (fr.eval(t), fs.eval(t));
            let _ = writeln!(
                ecdfs,
                "{},{},{},{t},{a},{b},{}",
                cell.tag,
                cell.unit,
                cell.kpi.name(),
                b - a
            );
        }
        let rm = KpiStats::from_samples(r)?.mean;
        let rep_means: Vec<f64> = per_rep
            .iter()
            .map(|s| KpiStats::from_samples(s).map(|k| k.mean))
            .collect::<edcal::Result<_>>()?;
        let (m, ci) = mean_ci(&rep_means);
        let _ = writeln!(
            means,
            "{},{},{},{rm},{m},{},{},{}",
            cell.tag,
            cell.unit,
            cell.kpi.name(),
            fmt_opt(ci.map(|c| c.0)),
            fmt_opt(ci.map(|c| c.1)),
            m - rm
        );
    }

    create_dir(out)?;
    write_file(&out.join("census_compare.csv"), &census)?;
    write_file(&out.join("ecdf_compare.csv"), &ecdfs)?;
    write_file(&out.join("mean_compare.csv"), &means)?;
    log::info!("report written to {}", out.display());
    Ok(())
}

pub fn validate(model: &ModelArgs, dataset: Option<&Path>) -> CmdResult {
    let (_, params) = load_model(model)?;
    let bounds = Bounds::case_study(params.keys());
    for ((k, v), (lo, up)) in params
        .keys()
        .iter()
        .zip(params.values())
        .zip(bounds.lower.iter().zip(&bounds.upper))
    {
        if v < lo || v > up {
            log::warn!("{k} = {v} lies outside [{lo}, {up}]");
        }
    }
    if let Some(p) = dataset {
        let ds = read_dataset(p)?;
        let real = extract_kpis(&ds.records, KpiMode::Real)?;
        let empty: Vec<String> = calibration_cells()
            .iter()
            .filter(|c| real.get(c).is_empty())
            .map(|c| c.to_string())
            .collect();
        if !empty.is_empty() {
            return Err(CliError::Input(anyhow::anyhow!(
                "{}: no observed samples for {}",
                p.display(),
                empty.join(", ")
            )));
        }
        log::info!("{}: {} records", p.display(), ds.records.len());
    }
    log::info!("inputs are valid");
    Ok(())
}
