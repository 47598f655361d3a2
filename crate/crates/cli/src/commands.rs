use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use log::{info, warn};

use circflow::analytics::convergence::convergence_from_series;
use circflow::analytics::{default_hill_k, hill_estimator, inequality_report};
use circflow::io::{
    read_snapshots, read_wealth, write_drift, write_final, write_matrix, write_snapshots,
    Fingerprint, SnapshotFile, SnapshotRows,
};
use circflow::oracle::{dense_step, equivalence_check, DenseMatrix, ORACLE_NMAX};
use circflow::{
    run_simulation, SimulationTrace, SnapshotPolicy, SnapshotTimes, StepFactor, WealthState,
};

use crate::config::{self, Loaded};
use crate::setup::{self, InitialWealth};
use crate::{Classify, ConfigArgs, Failure};

const DEFAULT_OUT: &str = "circflow-out";

fn load(args: &ConfigArgs) -> Result<Loaded, Failure> {
    config::load(&args.config, args.seed).config_err()
}

fn out_dir(cfg: &Loaded, flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag
        .or_else(|| cfg.config.output.dir.as_ref().map(|d| cfg.path(d)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .runtime_err()?;
    Ok(dir)
}

fn fingerprint(cfg: &Loaded) -> Result<Fingerprint, Failure> {
    Ok(Fingerprint::new(Some(cfg.seed()), cfg.hash().config_err()?))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .runtime_err()
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut w = create(path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {}", path.display()))
        .runtime_err()
}

fn write_resolved(cfg: &Loaded, fp: &Fingerprint, dir: &Path) -> Result<(), Failure> {
    let text = cfg.resolved_toml().runtime_err()?;
    write_with(&dir.join("resolved_config.toml"), |w| {
        writeln!(w, "{fp}")?;
        w.write_all(text.as_bytes())
    })
}

pub fn gen(args: &ConfigArgs, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load(args)?;
    let fp = fingerprint(&cfg)?;
    let matrices = setup::matrices(&cfg).config_err()?;
    let dir = out_dir(&cfg, out)?;
    let single = matrices.len() == 1;
    for (r, m) in matrices.iter().enumerate() {
        let name = if single {
            "matrix.cfm".to_string()
        } else {
            format!("matrix_{}.cfm", r + 1)
        };
        let path = dir.join(name);
        write_with(&path, |w| write_matrix(w, m, Some(&fp)))?;
        info!("wrote {}", path.display());
    }
    write_resolved(&cfg, &fp, &dir)
}

pub fn run(args: &ConfigArgs, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load(args)?;
    let fp = fingerprint(&cfg)?;
    let x0 = setup::initial_wealth(&cfg).config_err()?;
    let matrices = setup::matrices(&cfg).config_err()?;
    let schedule = setup::schedule(&cfg, matrices).config_err()?;
    let dir = out_dir(&cfg, out)?;
    let policy = cfg.snapshot_policy();
    let steps = cfg.steps();
    let started = Instant::now();
    match x0 {
        InitialWealth::Float(x) => {
            let trace = run_simulation(&schedule, x, steps, &policy)
                .runtime_err()?
                .with_provenance(cfg.seed(), fp.config.clone());
            write_trace(&trace, &fp, &dir)?;
        }
        InitialWealth::Units(x) => {
            let trace = run_simulation(&schedule, x, steps, &policy)
                .runtime_err()?
                .with_provenance(cfg.seed(), fp.config.clone());
            write_trace(&trace, &fp, &dir)?;
        }
    }
    info!(
        "{steps} steps in {:.2}s, output in {}",
        started.elapsed().as_secs_f64(),
        dir.display()
    );
    write_resolved(&cfg, &fp, &dir)
}

fn write_trace<S: WealthState>(trace: &SimulationTrace<S>, fp: &Fingerprint, dir: &Path) -> Result<(), Failure> {
    write_with(&dir.join("snapshots.csv"), |w| write_snapshots(w, trace, Some(fp)))?;
    write_with(&dir.join("drift.csv"), |w| write_drift(w, trace, Some(fp)))?;
    write_with(&dir.join("final.csv"), |w| write_final(w, trace, Some(fp)))?;
    info!(
        "monetary base {}, max relative drift {:e}",
        trace.monetary_base_f64(),
        trace.max_relative_drift()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Inequality,
    Tail,
    Convergence,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Output directory of `circflow run`, or a single snapshot CSV file.
    trace: PathBuf,

    /// Reports to produce. By default all of them, skipping those the
    /// trace cannot support; naming one makes its failure an error.
    #[arg(long, value_enum, value_delimiter = ',')]
    what: Vec<Analysis>,

    /// Order statistics used by the Hill estimator (default: max(10, m/100)
    /// for m agents with positive wealth).
    #[arg(long)]
    hill_k: Option<usize>,

    /// Wealth vector the convergence report measures distances to.
    #[arg(long, value_name = "FILE")]
    reference: Option<PathBuf>,

    /// Distance to the reference counted as converged.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
}

fn read_trace_file(path: &Path) -> Result<SnapshotFile, Failure> {
    let f = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .config_err()?;
    read_snapshots(BufReader::new(f))
        .with_context(|| format!("reading {}", path.display()))
        .config_err()
}

pub fn analyze(args: &AnalyzeArgs, out: Option<PathBuf>) -> Result<(), Failure> {
    let explicit = !args.what.is_empty();
    let wanted = |a: Analysis| !explicit || args.what.contains(&a);

    let (snapshots_path, final_path, default_out) = if args.trace.is_dir() {
        (
            args.trace.join("snapshots.csv"),
            args.trace.join("final.csv"),
            args.trace.clone(),
        )
    } else {
        let parent = args.trace.parent().map(Path::to_path_buf).unwrap_or_default();
        (args.trace.clone(), args.trace.clone(), parent)
    };
    let dir = out.unwrap_or(default_out);
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .runtime_err()?;

    let snapshots = read_trace_file(&snapshots_path)?;
    let last = if final_path == snapshots_path {
        snapshots.clone()
    } else {
        read_trace_file(&final_path)?
    };
    let fp = snapshots
        .fingerprint
        .clone()
        .unwrap_or_else(|| Fingerprint::new(None, "-"));

    let mut report: Vec<(String, String)> = Vec::new();
    let final_row = match &last.rows {
        SnapshotRows::Full(rows) => rows.last().cloned(),
        SnapshotRows::Summary(_) => None,
    };

    if wanted(Analysis::Inequality) || wanted(Analysis::Tail) {
        let Some((tau, total, x)) = final_row.clone() else {
            return Err(Failure::Config(anyhow!(
                "{} holds no full wealth vector; inequality and tail reports need one \
                 (use a run directory, whose final.csv is always full, or a snapshot file \
                 written with [snapshots] content = \"full\")",
                final_path.display()
            )));
        };
        report.push(("tau".into(), tau.to_string()));
        report.push(("agents".into(), x.len().to_string()));
        report.push(("total".into(), total.to_string()));

        if wanted(Analysis::Inequality) {
            match inequality_report(tau, &x) {
                Ok(r) => {
                    report.push(("gini".into(), r.gini.to_string()));
                    for (q, share) in &r.top_shares {
                        report.push((format!("top{}_share", (q * 100.0).round()), share.to_string()));
                    }
                    write_with(&dir.join("lorenz.csv"), |w| {
                        writeln!(w, "{fp}")?;
                        writeln!(w, "# columns: population_share,wealth_share (poorest first)")?;
                        for (p, s) in &r.lorenz {
                            writeln!(w, "{p},{s}")?;
                        }
                        Ok(())
                    })?;
                }
                Err(e) if explicit => return Err(Failure::Config(e.into())),
                Err(e) => {
                    warn!("inequality report skipped: {e}");
                    report.push(("gini".into(), "undefined".into()));
                }
            }
        }

        if wanted(Analysis::Tail) {
            let positive = x.iter().filter(|&&v| v > 0.0).count();
            let k = args.hill_k.unwrap_or_else(|| default_hill_k(positive));
            match hill_estimator(&x, k) {
                Ok(t) => {
                    report.push(("hill_alpha".into(), t.hill_alpha.to_string()));
                    report.push(("hill_k".into(), t.k_used.to_string()));
                    report.push(("hill_threshold".into(), t.fit_range.0.to_string()));
                    report.push(("hill_max".into(), t.fit_range.1.to_string()));
                    report.push(("hill_ks_distance".into(), t.ks_distance.to_string()));
                    report.push(("positive_agents".into(), t.positive_count.to_string()));
                    write_with(&dir.join("ccdf.csv"), |w| {
                        writeln!(w, "{fp}")?;
                        writeln!(
                            w,
                            "# columns: wealth,ccdf (share of agents with positive wealth holding at least this much, over the fitted range)"
                        )?;
                        for (level, p) in &t.ccdf {
                            writeln!(w, "{level},{p}")?;
                        }
                        Ok(())
                    })?;
                }
                Err(e) if explicit => return Err(Failure::Config(anyhow!("tail fit: {e}"))),
                Err(e) => {
                    warn!("tail fit skipped: {e}");
                    report.push(("hill_alpha".into(), "undefined".into()));
                }
            }
        }
    }

    if wanted(Analysis::Convergence) {
        match convergence(args, &snapshots, &snapshots_path) {
            Ok(c) => {
                report.push((
                    "convergence_first_crossing".into(),
                    c.first_crossing.map_or("none".into(), |t| t.to_string()),
                ));
                if let Some(&(_, d)) = c.step_distances.last() {
                    report.push(("convergence_last_step_distance".into(), d.to_string()));
                }
                write_with(&dir.join("convergence.csv"), |w| {
                    writeln!(w, "{fp}")?;
                    writeln!(
                        w,
                        "# columns: tau,step_distance,reference_distance (L1 distances relative to the monetary base; step distance to the previous snapshot; reference distance empty without --reference)"
                    )?;
                    for (i, (tau, d)) in c.step_distances.iter().enumerate() {
                        let r = c
                            .reference_distances
                            .as_ref()
                            .map(|r| r[i + 1].1.to_string())
                            .unwrap_or_default();
                        writeln!(w, "{tau},{d},{r}")?;
                    }
                    Ok(())
                })?;
            }
            Err(e) if explicit => return Err(e),
            Err(e) => {
                let msg = match &e {
                    Failure::Config(e) | Failure::Runtime(e) => format!("{e:#}"),
                    Failure::Verify(m) => m.clone(),
                };
                warn!("convergence report skipped: {msg}");
            }
        }
    }

    let path = dir.join("report.txt");
    write_with(&path, |w| {
        writeln!(w, "{fp}")?;
        let keys: Vec<&str> = report.iter().map(|(k, _)| k.as_str()).collect();
        writeln!(w, "# keys: {}", keys.join(", "))?;
        for (k, v) in &report {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    })?;
    info!("wrote reports to {}", dir.display());
    Ok(())
}

fn convergence(
    args: &AnalyzeArgs,
    snapshots: &SnapshotFile,
    path: &Path,
) -> Result<circflow::analytics::ConvergenceReport, Failure> {
    let rows = match &snapshots.rows {
        SnapshotRows::Full(rows) => rows,
        SnapshotRows::Summary(_) => {
            return Err(Failure::Config(anyhow!(
                "{} holds summary rows only; the convergence report needs full snapshot \
                 content. Rerun with [snapshots] content = \"full\" or pass --what inequality,tail",
                path.display()
            )))
        }
    };
    let reference = match &args.reference {
        Some(p) => {
            let f = File::open(p)
                .with_context(|| format!("opening {}", p.display()))
                .config_err()?;
            Some(read_wealth(BufReader::new(f)).config_err()?)
        }
        None => None,
    };
    let series: Vec<(u64, Vec<f64>)> = rows.iter().map(|(t, _, x)| (*t, x.clone())).collect();
    let base = rows.first().map_or(0.0, |r| r.1);
    convergence_from_series(&series, base, reference.as_deref(), args.threshold)
        .with_context(|| format!("convergence report for {}", path.display()))
        .config_err()
}

pub fn verify(args: &ConfigArgs, out: Option<PathBuf>, tolerance: f64) -> Result<(), Failure> {
    let cfg = load(args)?;
    let n = cfg.config.economy.n;
    if n > ORACLE_NMAX {
        return Err(Failure::Config(anyhow!(
            "refusing to verify n = {n}: the dense oracle is limited to n <= {ORACLE_NMAX} \
             (it stores n^2 entries per matrix and costs n^2 per step)"
        )));
    }
    let fp = fingerprint(&cfg)?;
    let x0 = setup::initial_wealth(&cfg).config_err()?.to_f64();
    let matrices = setup::matrices(&cfg).config_err()?;
    let schedule = setup::schedule(&cfg, matrices).config_err()?;
    let steps = cfg.steps();

    let policy = SnapshotPolicy::new(SnapshotTimes::FinalOnly, circflow::SnapshotContent::Full);
    let trace = run_simulation(&schedule, x0.clone(), steps, &policy).runtime_err()?;

    let dense: Vec<DenseMatrix> = schedule
        .pool()
        .iter()
        .map(|m| DenseMatrix::from_sparse(m))
        .collect::<Result<_, _>>()
        .runtime_err()?;
    let mut x = x0.as_slice().to_vec();
    for t in 0..steps {
        if let Some(StepFactor::Matrix(m)) = schedule.get(t) {
            let idx = schedule
                .pool()
                .iter()
                .position(|p| std::ptr::eq(&**p, m))
                .expect("schedule factors come from the pool");
            x = dense_step(&dense[idx], &x).runtime_err()?;
        }
    }

    let base = x0.total();
    let abs_tol = if base > 0.0 { tolerance * base } else { tolerance };
    let report = equivalence_check(trace.final_state.as_slice(), &x, abs_tol).runtime_err()?;
    let rel = if base > 0.0 { report.max_abs / base } else { report.max_abs };
    let lines = [
        format!("agents={n}"),
        format!("steps={steps}"),
        format!("monetary_base={base}"),
        format!("max_abs_difference={:e}", report.max_abs),
        format!("max_relative_difference={rel:e}"),
        format!("l1_difference={:e}", report.l1),
        format!("worst_agent={}", report.worst_index.map_or("none".into(), |i| (i + 1).to_string())),
        format!("tolerance={tolerance:e}"),
        format!("result={}", if report.passed { "pass" } else { "fail" }),
    ];
    for l in &lines {
        println!("{l}");
    }
    if out.is_some() || cfg.config.output.dir.is_some() {
        let dir = out_dir(&cfg, out)?;
        write_with(&dir.join("verify.txt"), |w| {
            writeln!(w, "{fp}")?;
            writeln!(w, "# keys: agents, steps, monetary_base, max_abs_difference, max_relative_difference, l1_difference, worst_agent, tolerance, result")?;
            for l in &lines {
                writeln!(w, "{l}")?;
            }
            Ok(())
        })?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verify(format!(
            "sparse and dense engines differ by {rel:e} of the monetary base (tolerance {tolerance:e})"
        )))
    }
}
