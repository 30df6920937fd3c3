use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Mode, RunConfig};
use super::data::{initial_data, random_band_limited, random_coulomb_data};
use super::snapshot::{save_snapshot, write_atomic, CONVENTIONS, CONVENTION_VERSION};
use crate::analysis::{admissible_params, estimate_ensemble, kt_check, scaling_residual, EnsembleSpec};
use crate::ame::{elliptic_solve_a0, evolve, picard_solve, Trajectory};
use crate::error::{Error, Result};
use crate::gaugeforms::{coulomb_project, exp_field, gauge_transform, unitarity_deviation, Connection};
use crate::spectral::{wave_energy, LieField};

/// Version of the `summary.json` layout.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Columns of `diagnostics.csv` written by `simulate`.
pub const DIAGNOSTICS_COLUMNS: [&str; 15] = [
    "time",
    "monopole_0",
    "monopole_1",
    "monopole_2",
    "e2",
    "coord1",
    "coord2",
    "difference",
    "elliptic",
    "coulomb",
    "max_relative",
    "energy",
    "elliptic_iterations",
    "contraction",
    "smallness",
];

/// One pass/fail check of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Gate {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// All gates passed.
    pub passed: bool,
    pub summary: Value,
    /// Files written, relative to the output directory.
    pub files: Vec<PathBuf>,
}

struct ModeOutput {
    results: Value,
    gates: Vec<Gate>,
    files: Vec<PathBuf>,
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

fn write_csv(out: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(header).map_err(map)?;
    for r in rows {
        w.write_record(r).map_err(map)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    write_atomic(&out.join(name), &bytes)?;
    Ok(PathBuf::from(name))
}

fn write_json(out: &Path, name: &str, v: &Value) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write_atomic(&out.join(name), text.as_bytes())?;
    Ok(PathBuf::from(name))
}

fn save_trajectory_snapshots(out: &Path, tr: &Trajectory) -> Result<Vec<PathBuf>> {
    tr.snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rel = PathBuf::from(format!("snapshots/aux_{i:05}.bin"));
            save_snapshot(s, &out.join(&rel))?;
            Ok(rel)
        })
        .collect()
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<ModeOutput> {
    let aux = initial_data(cfg)?;
    let tr = evolve(&aux, cfg.t_final, &cfg.evolve_settings())?;
    let with_reports = tr.reports.len() == tr.phys.len();
    let el = cfg.elliptic();
    let mut rows = Vec::with_capacity(tr.phys.len());
    for (i, (s, ph)) in tr.snapshots.iter().zip(&tr.phys).enumerate() {
        let energy = wave_energy(&s.u, &s.ut) + wave_energy(&s.v, &s.vt);
        let sol = elliptic_solve_a0(&ph.df1, &ph.df2, &ph.phi, None, &el)?;
        let mut row = vec![f(s.t)];
        if with_reports {
            let r = &tr.reports[i];
            row.extend(r.monopole.iter().map(|&v| f(v)));
            row.extend([r.e2, r.coord1, r.coord2, r.difference, r.elliptic, r.coulomb, r.max_relative()].map(f));
        } else {
            row.extend(std::iter::repeat(String::new()).take(10));
        }
        row.extend([f(energy), sol.iterations.to_string(), f(sol.contraction), f(sol.measure)]);
        rows.push(row);
    }
    let mut files = vec![write_csv(out, "diagnostics.csv", &DIAGNOSTICS_COLUMNS, &rows)?];
    files.extend(save_trajectory_snapshots(out, &tr)?);
    let gates = vec![
        Gate::at_most("max_relative_residual", tr.max_relative_residual(), cfg.residual_gate),
        Gate::at_most("max_coulomb", tr.max_coulomb(), cfg.coulomb_gate),
    ];
    Ok(ModeOutput {
        results: json!({
            "stats": tr.stats,
            "snapshots": tr.snapshots.len(),
            "final_time": tr.final_state().t,
            "max_relative_residual": tr.max_relative_residual(),
            "max_coulomb": tr.max_coulomb(),
            "reports": tr.reports,
        }),
        gates,
        files,
    })
}

fn picard(cfg: &RunConfig, out: &Path) -> Result<ModeOutput> {
    let aux = initial_data(cfg)?;
    let settings = cfg.evolve_settings();
    let pr = picard_solve(&aux, cfg.t_final, cfg.picard_iterations, &settings)?;
    let ev = evolve(&aux, cfg.t_final, &settings)?;
    let fin = pr.final_state();
    let gap = fin.u.sub(&ev.final_state().u)?.l2_norm() + fin.v.sub(&ev.final_state().v)?.l2_norm();
    let ratios = pr.ratios();
    let rows: Vec<Vec<String>> = pr
        .differences
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let r = if j == 0 { String::new() } else { f(ratios[j - 1]) };
            vec![(j + 1).to_string(), f(*d), r]
        })
        .collect();
    let mut files = vec![write_csv(out, "picard.csv", &["iteration", "difference", "ratio"], &rows)?];
    let rel = PathBuf::from("snapshots/picard_final.bin");
    save_snapshot(fin, &out.join(&rel))?;
    files.push(rel);
    // ratios from j = 2 on; differences at round-off level carry no rate
    let floor = 1e-13 * pr.differences.first().copied().unwrap_or(0.0).max(1e-300);
    let worst = ratios
        .iter()
        .zip(&pr.differences)
        .skip(1)
        .filter(|(_, d)| **d > floor)
        .map(|(r, _)| *r)
        .fold(0.0, f64::max);
    Ok(ModeOutput {
        results: json!({
            "differences": pr.differences,
            "ratios": ratios,
            "distance_to_evolve": gap,
            "stats": pr.stats,
        }),
        gates: vec![Gate::at_most("picard_ratio", worst, cfg.picard_ratio_gate)],
        files,
    })
}

fn gaugefix(cfg: &RunConfig, out: &Path) -> Result<ModeOutput> {
    let grid = cfg.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (a1, a2, _) = random_coulomb_data(grid, cfg.rank, cfg.band, cfg.amplitude, &mut rng)?;
    let chi = random_band_limited(grid, cfg.rank, cfg.band, &mut rng);
    let chi = chi.scale_real(cfg.amplitude * grid.side() / chi.l2_norm().max(1e-300));
    let g = exp_field(&chi);
    let zero = LieField::zeros(grid, cfg.rank);
    let (ag, _) = gauge_transform(&Connection::spatial(a1, a2)?, &zero, &g, None)?;
    let before = ag.coulomb_ratio();
    let proj = coulomb_project(&ag, &cfg.coulomb())?;
    let after = proj.a.coulomb_ratio();
    let rows: Vec<Vec<String>> = proj
        .history
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), f(*r)])
        .collect();
    let files = vec![write_csv(out, "gaugefix.csv", &["iteration", "coulomb_ratio"], &rows)?];
    Ok(ModeOutput {
        results: json!({
            "coulomb_ratio_before": before,
            "coulomb_ratio_after": after,
            "iterations": proj.iterations,
            "unitarity_deviation": unitarity_deviation(&proj.g),
        }),
        gates: vec![Gate::at_most("coulomb_ratio", after, cfg.coulomb_gate)],
        files,
    })
}

fn estimates(cfg: &RunConfig, out: &Path) -> Result<ModeOutput> {
    let spec = EnsembleSpec {
        grid: cfg.grid()?,
        rank: cfg.rank,
        frames: cfg.frames,
        duration: cfg.duration,
        window: cfg.window,
        amplitude: cfg.amplitude,
        family: cfg.family_spec(),
    };
    let params = cfg.estimate_params();
    let mut rows = Vec::new();
    let mut per_kind = serde_json::Map::new();
    let mut bad = 0usize;
    for &kind in &cfg.estimates {
        let st = estimate_ensemble(kind, &spec, &params, cfg.samples, cfg.seed)?;
        for (i, v) in st.values.iter().enumerate() {
            bad += usize::from(!v.ratio.is_finite());
            rows.push(vec![kind.name().to_string(), i.to_string(), f(v.numerator), f(v.denominator), f(v.ratio)]);
        }
        per_kind.insert(
            kind.name().into(),
            json!({ "max": st.max, "mean": st.mean, "min": st.min, "samples": st.samples }),
        );
    }
    let files = vec![write_csv(
        out,
        "estimates.csv",
        &["kind", "sample", "numerator", "denominator", "ratio"],
        &rows,
    )?];
    Ok(ModeOutput {
        results: json!({
            "ensemble": spec,
            "params": params,
            "kinds": per_kind,
            "note": "space-time norms are of Hann-windowed samples; ratios are indicative and carry no constant",
        }),
        gates: vec![Gate::at_most("non_finite_ratios", bad as f64, 0.0)],
        files,
    })
}

fn admissible(cfg: &RunConfig, out: &Path) -> Result<ModeOutput> {
    let w = admissible_params(cfg.s, cfg.a);
    let kt = kt_check(cfg.sigma, cfg.p, cfg.q, cfg.s1, cfg.s2);
    let v = json!({ "window": w, "kt": kt });
    let files = vec![write_json(out, "window.json", &v)?];
    Ok(ModeOutput {
        results: v,
        gates: Vec::new(),
        files,
    })
}

fn residuals(cfg: &RunConfig, out: &Path) -> Result<ModeOutput> {
    let aux = initial_data(cfg)?;
    let tr = evolve(&aux, cfg.t_final, &cfg.evolve_settings())?;
    let cmp = scaling_residual(&tr.phys[..tr.reports.len()], &tr.rates, cfg.scale_lambda)?;
    let rows: Vec<Vec<String>> = cmp
        .iter()
        .map(|c| {
            vec![
                f(c.t),
                f(c.original.max_residual()),
                f(c.original.max_relative()),
                f(c.rescaled.max_residual()),
                f(c.rescaled.max_relative()),
                f(c.relative_ratio()),
            ]
        })
        .collect();
    let files = vec![write_csv(
        out,
        "residuals.csv",
        &[
            "time",
            "max_residual",
            "max_relative",
            "rescaled_max_residual",
            "rescaled_max_relative",
            "relative_ratio",
        ],
        &rows,
    )?];
    let spread = cmp
        .iter()
        .map(|c| {
            let r = c.relative_ratio();
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max);
    Ok(ModeOutput {
        results: json!({ "lambda": cfg.scale_lambda, "comparisons": cmp }),
        gates: vec![
            Gate::at_most("max_relative_residual", tr.max_relative_residual(), cfg.residual_gate),
            Gate::at_most("rescaled_relative_spread", spread, 2.0),
        ],
        files,
    })
}

/// Header fields shared by every JSON document the CLI writes.
pub fn document_header(schema: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(schema));
    m.insert("schema_version".into(), json!(SUMMARY_SCHEMA_VERSION));
    m.insert("conventions_version".into(), json!(CONVENTION_VERSION));
    m.insert("conventions".into(), json!(CONVENTIONS));
    m
}

/// Runs `cfg.mode`, writing its files and `summary.json` under `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let res = match cfg.mode {
        Mode::Simulate => simulate(cfg, out)?,
        Mode::Picard => picard(cfg, out)?,
        Mode::Gaugefix => gaugefix(cfg, out)?,
        Mode::Estimates => estimates(cfg, out)?,
        Mode::Admissible => admissible(cfg, out)?,
        Mode::Residuals => residuals(cfg, out)?,
    };
    let passed = res.gates.iter().all(|g| g.passed);
    let mut doc = document_header("monopole-summary");
    doc.insert("mode".into(), json!(cfg.mode.name()));
    doc.insert("seed".into(), json!(cfg.seed));
    doc.insert("config".into(), json!(cfg.to_text()));
    doc.insert("results".into(), res.results);
    doc.insert("gates".into(), json!(res.gates));
    doc.insert("passed".into(), json!(passed));
    let mut files = res.files;
    files.push(PathBuf::from("summary.json"));
    doc.insert("files".into(), json!(files));
    let summary = Value::Object(doc);
    write_json(out, "summary.json", &summary)?;
    Ok(RunOutcome {
        passed,
        summary,
        files,
    })
}

/// Writes `error.json` for a failed run.
pub fn write_error(out: &Path, err: &Error) -> Result<PathBuf> {
    let mut doc = document_header("monopole-error");
    doc.insert("kind".into(), json!(err.kind()));
    doc.insert("message".into(), json!(err.to_string()));
    write_json(out, "error.json", &Value::Object(doc))
}
