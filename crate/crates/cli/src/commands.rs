use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use lasvegas::fitting::{self, FamilyFit, Summary};
use lasvegas::io as csvio;
use lasvegas::multiwalk::{bootstrap_speedup, measure_parallel_speedup};
use lasvegas::solver::collect as collect_runs;
use lasvegas::{EmpiricalSample, FitReport, RuntimeDistribution, Unit};
use serde_json::{json, Value};

use crate::config::solver_params;
use crate::report::{join, ComparisonReport, FitSummary};
use crate::{CmdResult, CollectArgs, Failure, FitArgs, ParallelArgs, PredictArgs, ReportArgs, SimulateArgs};

fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<File, Failure> {
    Ok(File::open(path).with_context(|| format!("cannot open {}", path.display()))?)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `<output>.meta.json` next to a file output; nothing for stdout.
fn write_sidecar(output: Option<&Path>, meta: Value) -> CmdResult {
    if let Some(path) = output {
        let side = sidecar_path(path);
        fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")
            .with_context(|| format!("cannot write {}", side.display()))?;
    }
    Ok(())
}

fn read_sidecar(path: &Path) -> Option<Value> {
    let text = fs::read_to_string(sidecar_path(path)).ok()?;
    serde_json::from_str(&text).ok()
}

fn label_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn read_sample(path: &Path, unit: Unit) -> Result<EmpiricalSample, Failure> {
    csvio::read_sample(open(path)?, unit, label_of(path)).map_err(|e| anyhow!("{}: {e}", path.display()).into())
}

fn summary_table(label: &str, rows: &[(&str, Summary, bool)]) -> String {
    let fmt = |v: f64, integral: bool| if integral { format!("{v:.0}") } else { format!("{v:.4}") };
    let header = ["Problem", "Unit", "Min", "Mean", "Median", "Max"];
    let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for (unit, s, integral) in rows {
        table.push(vec![
            label.to_string(),
            unit.to_string(),
            fmt(s.min, *integral),
            if *integral { format!("{:.1}", s.mean) } else { fmt(s.mean, false) },
            fmt(s.median, *integral),
            fmt(s.max, *integral),
        ]);
    }
    let widths: Vec<usize> = (0..header.len()).map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &table {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (v, w))| if c < 2 { format!("{v:<w$}") } else { format!("{v:>w$}") })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out
}

pub fn collect(args: CollectArgs) -> CmdResult {
    let (problem, params) = solver_params(&args.solver)?;
    let runs = collect_runs(&problem, &params, args.runs as usize, args.jobs as usize, &|_| {})?;
    let output = args.output.as_deref();
    let mut out = create(output)?;
    csvio::write_runs(&mut out, &runs.runs)?;
    out.flush()?;
    write_sidecar(
        output,
        json!({
            "command": "collect",
            "problem": problem,
            "runs": args.runs,
            "base_seed": params.rng_seed,
            "jobs": args.jobs,
            "solver": params,
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;

    let solved = runs.runs.iter().filter(|r| r.solved).count();
    let mut rows = Vec::new();
    let iterations = runs.iterations_sample().ok();
    let seconds = runs.wall_time_sample().ok();
    if let Some(s) = &iterations {
        rows.push(("iterations", s.summary(), true));
    }
    if let Some(s) = &seconds {
        rows.push(("seconds", s.summary(), false));
    }
    let table = summary_table(&problem.label(), &rows);
    let note = format!("{solved}/{} runs solved", runs.runs.len());
    // Keep stdout clean for the CSV when no output file was given.
    if output.is_some() {
        print!("{table}");
        println!("{note}");
    } else {
        eprint!("{table}");
        eprintln!("{note}");
    }
    Ok(())
}

pub fn fit(args: FitArgs) -> CmdResult {
    let unit = args.unit.into();
    let sample = read_sample(&args.input, unit)?;
    let families = args.family.families();
    let json = if families.len() == 1 {
        let est = fitting::estimate(families[0], &sample)?;
        let mut report = fitting::ks_test_with_threshold(&sample, &est.dist, args.threshold)?;
        report.notes = est.notes;
        eprintln!("{}", describe(&report));
        serde_json::to_string_pretty(&report)?
    } else {
        let fits = fitting::fit_all(&sample, &families, args.threshold)?;
        for f in &fits {
            match (&f.report, &f.error) {
                (Some(r), _) => eprintln!("{}", describe(r)),
                (None, Some(e)) => eprintln!("{}: not fitted ({e})", f.family),
                (None, None) => {}
            }
        }
        serde_json::to_string_pretty(&fits)?
    };
    let output = args.output.as_deref();
    let mut out = create(output)?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

fn describe(r: &FitReport) -> String {
    format!(
        "{}: D = {:.4}, p = {:.4} -> {:?} at {} ({})",
        r.dist.family(),
        r.ks_statistic,
        r.p_value,
        r.verdict,
        r.threshold,
        serde_json::to_string(&r.dist).unwrap_or_default()
    )
}

/// What a fit file contributes downstream.
struct Chosen {
    dist: RuntimeDistribution,
    report: Option<FitReport>,
}

/// Accepts the output of `fit` (one report or a ranked list) or a bare
/// distribution object. From a list, the best accepted family is chosen,
/// falling back to the best-ranked one.
fn load_fit(path: &Path) -> Result<Chosen, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    let bad = |e: serde_json::Error| Failure::Data(anyhow!("{}: {e}", path.display()));
    if value.is_array() {
        let fits: Vec<FamilyFit> = serde_json::from_value(value).map_err(bad)?;
        let reports: Vec<&FitReport> = fits.iter().filter_map(|f| f.report.as_ref()).collect();
        let best = reports
            .iter()
            .find(|r| r.accepted())
            .or_else(|| reports.first())
            .ok_or_else(|| Failure::Data(anyhow!("{}: no family could be fitted", path.display())))?;
        Ok(Chosen { dist: best.dist, report: Some((*best).clone()) })
    } else if value.get("dist").is_some() {
        let report: FitReport = serde_json::from_value(value).map_err(bad)?;
        Ok(Chosen { dist: report.dist, report: Some(report) })
    } else {
        let dist: RuntimeDistribution = serde_json::from_value(value).map_err(bad)?;
        Ok(Chosen { dist, report: None })
    }
}

pub fn predict(args: PredictArgs) -> CmdResult {
    let chosen = load_fit(&args.fit)?;
    if let Some(report) = chosen.report.as_ref().filter(|r| !r.accepted()) {
        let msg = format!(
            "the {} fit was rejected (p = {:.4} < {})",
            report.dist.family(),
            report.p_value,
            report.threshold
        );
        if !args.force {
            return Err(Failure::Rejected(format!("{msg}; pass --force to predict anyway")));
        }
        eprintln!("warning: {msg}; predicting anyway");
    }
    let cores = args.cores.list();
    let curve = chosen.dist.speedup_curve(&cores).map_err(|e| Failure::Usage(e.to_string()))?;
    let output = args.output.as_deref();
    let mut out = create(output)?;
    csvio::write_curve(&mut out, &curve, "speedup")?;
    out.flush()?;
    write_sidecar(
        output,
        json!({
            "command": "predict",
            "fit": args.fit.display().to_string(),
            "dist": chosen.dist,
            "fit_accepted": chosen.report.as_ref().map(|r| r.accepted()),
            "p_value": chosen.report.as_ref().map(|r| r.p_value),
            "sample_size": chosen.report.as_ref().map(|r| r.sample_size),
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let sample = read_sample(&args.input, args.unit.into())?;
    let cores = args.cores.list();
    lasvegas::distributions::validate_cores(&cores).map_err(|e| Failure::Usage(e.to_string()))?;
    let curve = bootstrap_speedup(&sample, &cores, args.resamples as usize, args.seed)?;
    let output = args.output.as_deref();
    let mut out = create(output)?;
    csvio::write_curve(&mut out, &curve, "bootstrap_speedup")?;
    out.flush()?;
    write_sidecar(
        output,
        json!({
            "command": "simulate",
            "input": args.input.display().to_string(),
            "sample_size": sample.len(),
            "resamples": args.resamples,
            "seed": args.seed,
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )
}

pub fn parallel(args: ParallelArgs) -> CmdResult {
    let (problem, params) = solver_params(&args.solver)?;
    if !args.baseline.exists() {
        return Err(Failure::Data(anyhow!("baseline file {} does not exist", args.baseline.display())));
    }
    let baseline = read_sample(&args.baseline, Unit::Iterations)?;

    let mut measured = Vec::new();
    for &workers in &args.workers {
        let m = measure_parallel_speedup(&problem, &params, workers as usize, args.trials as usize, &baseline)?;
        if m.oversubscribed {
            eprintln!("warning: {workers} workers exceed the available hardware threads; wall times are inflated");
        }
        eprintln!(
            "{} workers: speedup {:.3} (95% CI {:.3}..{:.3}) over {} trials",
            workers, m.mean_speedup, m.confidence_interval.0, m.confidence_interval.1, m.trials
        );
        measured.push(m);
    }

    let records: Vec<_> = measured.iter().flat_map(|m| m.records.iter().cloned()).collect();
    let output = args.output.as_deref();
    let mut out = create(output)?;
    csvio::write_parallel(&mut out, &records)?;
    out.flush()?;
    if let Some(path) = &args.measured {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        csvio::write_measured(BufWriter::new(file), &measured)?;
    }
    let meta = json!({
        "command": "parallel",
        "problem": problem,
        "workers": args.workers,
        "trials": args.trials,
        "base_seed": params.rng_seed,
        "trial_seed_rule": "trial t, worker i uses base_seed + t * workers + i",
        "solver": params,
        "baseline": args.baseline.display().to_string(),
        "baseline_runs": baseline.len(),
        "oversubscribed": measured.iter().any(|m| m.oversubscribed),
        "failed_workers": records.iter().map(|r| r.failures.len()).sum::<usize>(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_sidecar(output, meta.clone())?;
    write_sidecar(args.measured.as_deref(), meta)
}

pub fn report(args: ReportArgs) -> CmdResult {
    let read_curve = |p: &PathBuf| -> Result<_, Failure> {
        csvio::read_curve(open(p)?).map_err(|e| Failure::Data(anyhow!("{}: {e}", p.display())))
    };
    let predicted = args.predicted.as_ref().map(read_curve).transpose()?;
    let bootstrap = args.bootstrap.as_ref().map(read_curve).transpose()?;
    let measured = args
        .measured
        .as_ref()
        .map(|p| csvio::read_measured(open(p)?).map_err(|e| Failure::Data(anyhow!("{}: {e}", p.display()))))
        .transpose()?;
    let fit = args.fit.as_deref().map(load_fit).transpose()?;

    let mut rows = join(predicted.as_ref(), bootstrap.as_ref(), measured.as_deref()).map_err(|e| anyhow!(e))?;
    let mut notes = Vec::new();
    let fit_summary = fit.as_ref().and_then(|c| c.report.as_ref()).map(FitSummary::from);
    if let Some(summary) = fit_summary.as_ref().filter(|s| s.verdict == lasvegas::Verdict::Rejected) {
        if rows.iter().any(|r| r.predicted_speedup.is_some()) {
            rows.iter_mut().for_each(|r| r.predicted_speedup = None);
            notes.push(format!(
                "predicted speedups omitted: the {} fit was rejected (p = {:.4})",
                summary.dist.family(),
                summary.p_value
            ));
        }
    }

    let mut metadata = serde_json::Map::new();
    for (role, path) in [
        ("predicted", &args.predicted),
        ("bootstrap", &args.bootstrap),
        ("measured", &args.measured),
    ] {
        if let Some(meta) = path.as_deref().and_then(read_sidecar) {
            metadata.insert(role.into(), meta);
        }
    }

    let report = ComparisonReport {
        label: args.label.clone(),
        rows,
        fit: fit_summary,
        limit: predicted.as_ref().and_then(|c| c.limit),
        notes,
        metadata,
    };
    print!("{}", report.render());
    if let Some(path) = &args.csv {
        fs::write(path, report.to_csv()?).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
