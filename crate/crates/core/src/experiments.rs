//! Drivers for the three numerical experiments: feasibility of retractions
//! over long steps, nearest symplectic matrix, and symplectic subspace fit.
//!
//! Every run draws its data from its own generator `Rng::derive(seed, run)`,
//! so results do not depend on scheduling and CSV output is reproducible.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::matfun::{rand_stiefel_point, rand_stiefel_tangent, sinv, spectral_norm, CayScale, Rng};
use crate::optim::{
    descend, DescentConfig, ManifoldMode, NearestSymplectic, Objective, Problem, Retraction,
    SubspaceFit, TraceEntry,
};
use crate::par::{map_collect, Exec};
use crate::sp_stiefel::{
    CayleyCurve, PseudoGeodesic, QuasiGeodesic, RiemGeodesic, StCurve, StPoint,
};

/// Curves compared in the feasibility experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeasCurve {
    RiemGeodesic,
    Cayley,
    PseudoGeodesic,
    QuasiGeodesic,
}

impl FeasCurve {
    pub const ALL: [FeasCurve; 4] = [
        FeasCurve::RiemGeodesic,
        FeasCurve::Cayley,
        FeasCurve::PseudoGeodesic,
        FeasCurve::QuasiGeodesic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeasCurve::RiemGeodesic => "riem_geodesic",
            FeasCurve::Cayley => "cayley",
            FeasCurve::PseudoGeodesic => "pseudo_geodesic",
            FeasCurve::QuasiGeodesic => "quasi_geodesic",
        }
    }

    /// True for the curves evaluated through matrix exponentials.
    pub fn uses_expm(self) -> bool {
        self != FeasCurve::Cayley
    }
}

impl fmt::Display for FeasCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeasCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeasCurve::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown feasibility curve '{s}'")))
    }
}

/// A (metric, retraction) pair run by the descent experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Combo {
    pub mode: ManifoldMode,
    pub retraction: Retraction,
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.mode, self.retraction)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub runs: usize,
    pub curves: Vec<FeasCurve>,
    pub retractions: Vec<Retraction>,
    pub metrics: Vec<ManifoldMode>,
    pub t_max: f64,
    pub t_samples: usize,
    pub max_iters: usize,
    /// 2-norm of the nearest-matrix target.
    pub scale_a: f64,
    /// 2-norm of the noise added to the subspace data; 0 disables it.
    pub noise: f64,
    pub timing: bool,
    pub exec: Exec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 100,
            k: 10,
            seed: 42,
            runs: 10,
            curves: FeasCurve::ALL.to_vec(),
            retractions: vec![Retraction::Geodesic, Retraction::Cayley],
            metrics: vec![ManifoldMode::StiefelG],
            t_max: 1e3,
            t_samples: 500,
            max_iters: 100,
            scale_a: 1.0,
            noise: 1.0,
            timing: false,
            exec: Exec::Parallel,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.k >= 1 && self.k <= self.n, "need n >= k >= 1"),
            (self.runs >= 1, "need runs >= 1"),
            (self.t_samples >= 2, "need t_samples >= 2"),
            (
                self.t_max > 0.0 && self.t_max.is_finite(),
                "need a positive finite t_max",
            ),
            (
                self.scale_a > 0.0 && self.scale_a.is_finite(),
                "need a positive finite scale_a",
            ),
            (
                self.noise >= 0.0 && self.noise.is_finite(),
                "need a non-negative finite noise level",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::Config((*msg).into())),
            None => Ok(()),
        }
    }

    fn descent(&self) -> DescentConfig {
        DescentConfig {
            max_iters: self.max_iters,
            timing: self.timing,
            ..DescentConfig::default()
        }
    }

    fn combos(&self) -> Vec<Combo> {
        self.metrics
            .iter()
            .flat_map(|&mode| {
                self.retractions
                    .iter()
                    .map(move |&retraction| Combo { mode, retraction })
            })
            .collect()
    }
}

/// `samples` points log-spaced on `[t_max · 1e-6, t_max]`.
pub fn log_spaced(t_max: f64, samples: usize) -> Vec<f64> {
    let lo = (t_max * 1e-6).log10();
    let hi = t_max.log10();
    (0..samples)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (samples - 1) as f64))
        .collect()
}

/// Mean feasibility `‖U(t)⁺U(t) − I‖_F` per curve and sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityTable {
    pub t: Vec<f64>,
    pub curves: Vec<FeasCurve>,
    /// `values[c][i]` for curve `c` at `t[i]`; `NaN` where a run failed.
    pub values: Vec<Vec<f64>>,
}

impl FeasibilityTable {
    pub fn column(&self, curve: FeasCurve) -> Option<&[f64]> {
        self.curves
            .iter()
            .position(|&c| c == curve)
            .map(|i| self.values[i].as_slice())
    }

    /// Largest value of `curve` over `t ∈ [lo, hi]`, with `NaN` read as `+∞`.
    pub fn worst(&self, curve: FeasCurve, lo: f64, hi: f64) -> Option<f64> {
        let col = self.column(curve)?;
        Some(
            self.t
                .iter()
                .zip(col)
                .filter(|(&t, _)| t >= lo && t <= hi)
                .map(|(_, &v)| if v.is_nan() { f64::INFINITY } else { v })
                .fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

fn feasibility_run(cfg: &ExperimentConfig, run: usize, t: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut rng = Rng::derive(cfg.seed, run as u64);
    let u = StPoint::new(rand_stiefel_point(&mut rng, cfg.n, cfg.k, CayScale::One)?)?;
    let d = rand_stiefel_tangent(&mut rng, &u, false);
    let mut out = Vec::with_capacity(cfg.curves.len());
    for &c in &cfg.curves {
        let curve: Box<dyn StCurve> = match c {
            FeasCurve::RiemGeodesic => Box::new(RiemGeodesic::new(&d)?),
            FeasCurve::Cayley => Box::new(CayleyCurve::new(&d)),
            FeasCurve::PseudoGeodesic => Box::new(PseudoGeodesic::new(&d)),
            FeasCurve::QuasiGeodesic => Box::new(QuasiGeodesic::new(&d)),
        };
        out.push(
            t.iter()
                .map(|&s| curve.at(s).map(|p| p.feasibility()).unwrap_or(f64::NAN))
                .collect(),
        );
    }
    Ok(out)
}

/// Feasibility of each curve `R_U(tΔ)`, `‖Δ‖_F = 1`, averaged over runs.
pub fn run_feasibility(cfg: &ExperimentConfig) -> Result<FeasibilityTable> {
    cfg.validate()?;
    let t = log_spaced(cfg.t_max, cfg.t_samples);
    let per_run = map_collect(cfg.exec, (0..cfg.runs).collect(), |run| {
        feasibility_run(cfg, run, &t).map_err(|e| e.in_context(format!("feasibility run {run}")))
    });
    let mut sums = vec![vec![0.0; t.len()]; cfg.curves.len()];
    for run in per_run {
        for (acc, col) in sums.iter_mut().zip(run?) {
            for (a, v) in acc.iter_mut().zip(col) {
                *a += v;
            }
        }
    }
    let runs = cfg.runs as f64;
    let values = sums
        .into_iter()
        .map(|c| c.into_iter().map(|s| s / runs).collect())
        .collect();
    Ok(FeasibilityTable {
        t,
        curves: cfg.curves.clone(),
        values,
    })
}

/// Outcome of one descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub combo: Combo,
    pub iters: usize,
    pub converged: bool,
    pub final_f: f64,
    pub final_grad: f64,
    pub feasibility: f64,
    /// Seconds, `NaN` when timing is off.
    pub runtime: f64,
    pub warnings: usize,
    pub trace: Vec<TraceEntry>,
}

/// Per-combo averages over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub combo: Combo,
    pub runs: usize,
    pub converged: usize,
    pub mean_iters: f64,
    pub mean_runtime: f64,
    pub mean_final_f: f64,
    /// `(f − f_min) / max(1, |f_min|)` with `f_min` the best final value of
    /// the same run over all combos.
    pub mean_rel_dev: f64,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

fn descent_run<O: Objective + Clone + 'static>(
    cfg: &ExperimentConfig,
    run: usize,
    combo: Combo,
    objective: &O,
    u0: &StPoint,
) -> Result<RunRecord> {
    let problem = Problem::new(objective.clone(), combo.mode, combo.retraction);
    let start = Instant::now();
    let state = descend(&problem, u0.clone(), &cfg.descent())
        .map_err(|e| e.in_context(format!("{combo}, run {run}")))?;
    let runtime = if cfg.timing {
        start.elapsed().as_secs_f64()
    } else {
        f64::NAN
    };
    Ok(RunRecord {
        run,
        combo,
        iters: state.iter,
        converged: state.converged,
        final_f: state.fval,
        final_grad: state.grad.frobenius(),
        feasibility: state.iterate.feasibility(),
        runtime,
        warnings: state.warnings(),
        trace: state.trace,
    })
}

fn run_descent<O, F>(cfg: &ExperimentConfig, make: F) -> Result<DescentReport>
where
    O: Objective + Clone + Send + Sync + 'static,
    F: Fn(&mut Rng) -> Result<(O, StPoint)> + Sync + Send,
{
    cfg.validate()?;
    let combos = cfg.combos();
    if combos.is_empty() {
        return Err(Error::Config(
            "no metric/retraction combination selected".into(),
        ));
    }
    let data = map_collect(cfg.exec, (0..cfg.runs).collect(), |run| {
        make(&mut Rng::derive(cfg.seed, run as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Combo)> = (0..cfg.runs)
        .flat_map(|run| combos.iter().map(move |&c| (run, c)))
        .collect();
    let records = map_collect(cfg.exec, jobs, |(run, combo)| {
        let (obj, u0) = &data[run];
        descent_run(cfg, run, combo, obj, u0)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records, &combos, cfg.runs);
    Ok(DescentReport { records, summary })
}

fn summarize(records: &[RunRecord], combos: &[Combo], runs: usize) -> Vec<SummaryRow> {
    let f_min: Vec<f64> = (0..runs)
        .map(|r| {
            records
                .iter()
                .filter(|x| x.run == r)
                .map(|x| x.final_f)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    combos
        .iter()
        .map(|&combo| {
            let mine: Vec<&RunRecord> = records.iter().filter(|x| x.combo == combo).collect();
            let count = mine.len() as f64;
            let mean =
                |f: &dyn Fn(&RunRecord) -> f64| mine.iter().map(|x| f(x)).sum::<f64>() / count;
            let dev = |x: &RunRecord| (x.final_f - f_min[x.run]) / f_min[x.run].abs().max(1.0);
            SummaryRow {
                combo,
                runs: mine.len(),
                converged: mine.iter().filter(|x| x.converged).count(),
                mean_iters: mean(&|x| x.iters as f64),
                mean_runtime: mean(&|x| x.runtime),
                mean_final_f: mean(&|x| x.final_f),
                mean_rel_dev: mean(&dev),
                max_rel_dev: mine.iter().map(|x| dev(x)).fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Nearest symplectic Stiefel matrix to a Gaussian `A` with `‖A‖₂ = scale_a`,
/// started from `cay(X/2)E`.
pub fn run_nearest(cfg: &ExperimentConfig) -> Result<DescentReport> {
    run_descent(cfg, |rng| {
        let a = rng.normal_matrix(2 * cfg.n, 2 * cfg.k);
        let a = &a * (cfg.scale_a / spectral_norm(&a));
        let u0 = StPoint::new(rand_stiefel_point(rng, cfg.n, cfg.k, CayScale::Half)?)?;
        Ok((NearestSymplectic { target: a }, u0))
    })
}

/// Best symplectic subspace for `S = AA⁺ + E`, with `A` a random Stiefel
/// point and `E` Gaussian with `‖E‖₂ = noise`.
pub fn run_subspace(cfg: &ExperimentConfig) -> Result<DescentReport> {
    run_descent(cfg, |rng| {
        let dim = 2 * cfg.n;
        let a = rand_stiefel_point(rng, cfg.n, cfg.k, CayScale::Half)?;
        let e = rng.normal_matrix(dim, dim);
        let mut s = &a * sinv(&a);
        if cfg.noise > 0.0 {
            s += &e * (cfg.noise / spectral_norm(&e));
        }
        let u0 = StPoint::new(rand_stiefel_point(rng, cfg.n, cfg.k, CayScale::Half)?)?;
        Ok((SubspaceFit { data: s }, u0))
    })
}

/// Number formatting for CSV: shortest round-trip scientific notation,
/// `nan`, `inf`, `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:e}")
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("writing CSV failed: {e}"))
}

/// Columns `t`, then one column per curve.
pub fn write_feasibility_csv<W: Write>(table: &FeasibilityTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(table.curves.iter().map(|c| c.name().to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (i, &t) in table.t.iter().enumerate() {
        let mut row = vec![fmt_num(t)];
        row.extend(table.values.iter().map(|c| fmt_num(c[i])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing CSV failed: {e}")))
}

/// Long format, one row per (run, combo, iteration).
pub fn write_trace_csv<W: Write>(report: &DescentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "metric",
        "retraction",
        "run",
        "iter",
        "fval",
        "gradnorm",
        "step_t",
        "wall_time",
    ])
    .map_err(csv_err)?;
    for r in &report.records {
        for e in &r.trace {
            w.write_record([
                r.combo.mode.name().to_string(),
                r.combo.retraction.name().to_string(),
                r.run.to_string(),
                e.iter.to_string(),
                fmt_num(e.fval),
                fmt_num(e.grad_norm),
                fmt_num(e.step_t),
                fmt_num(e.wall_time),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing CSV failed: {e}")))
}

const SUMMARY_HEADER: [&str; 9] = [
    "metric",
    "retraction",
    "runs",
    "converged",
    "mean_iters",
    "mean_runtime_s",
    "mean_final_f",
    "mean_rel_dev",
    "max_rel_dev",
];

fn summary_fields(row: &SummaryRow) -> [String; 9] {
    [
        row.combo.mode.name().to_string(),
        row.combo.retraction.name().to_string(),
        row.runs.to_string(),
        row.converged.to_string(),
        fmt_num(row.mean_iters),
        fmt_num(row.mean_runtime),
        fmt_num(row.mean_final_f),
        fmt_num(row.mean_rel_dev),
        fmt_num(row.max_rel_dev),
    ]
}

pub fn write_summary_csv<W: Write>(report: &DescentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for row in &report.summary {
        w.write_record(summary_fields(row)).map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("writing CSV failed: {e}")))
}

/// The summary as an aligned text table.
pub fn format_summary(report: &DescentReport) -> String {
    let rows: Vec<[String; 9]> = report.summary.iter().map(summary_fields).collect();
    let widths: Vec<usize> = (0..9)
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([SUMMARY_HEADER[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(SUMMARY_HEADER.to_vec());
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: 8,
            k: 2,
            runs: 3,
            t_samples: 20,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn log_spacing_endpoints() {
        let t = log_spaced(1e3, 7);
        assert!((t[0] - 1e-3).abs() <= 1e-18);
        assert!((t[6] - 1e3).abs() <= 1e-9);
        assert!((t[3] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn feasibility_table_shape_and_start() {
        let table = run_feasibility(&small()).unwrap();
        assert_eq!(table.values.len(), 4);
        assert_eq!(table.t.len(), 20);
        for c in FeasCurve::ALL {
            assert!(table.column(c).unwrap()[0] <= 1e-10, "{c}");
        }
    }

    #[test]
    fn results_do_not_depend_on_execution() {
        let render = |exec| {
            let cfg = ExperimentConfig { exec, ..small() };
            let mut out = Vec::new();
            write_feasibility_csv(&run_feasibility(&cfg).unwrap(), &mut out).unwrap();
            out
        };
        assert_eq!(render(Exec::Parallel), render(Exec::Sequential));
    }

    #[test]
    fn nearest_summary() {
        let report = run_nearest(&small()).unwrap();
        assert_eq!(report.records.len(), 6);
        for row in &report.summary {
            assert_eq!(row.converged, 3);
            assert!(row.max_rel_dev <= 1e-10);
            assert!(row.mean_runtime.is_nan());
        }
        let text = format_summary(&report);
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("metric"));
    }

    #[test]
    fn csv_is_reproducible() {
        let cfg = ExperimentConfig {
            metrics: vec![ManifoldMode::GrassmannG, ManifoldMode::StiefelG],
            ..small()
        };
        let render = || {
            let report = run_subspace(&cfg).unwrap();
            let mut a = Vec::new();
            write_trace_csv(&report, &mut a).unwrap();
            write_summary_csv(&report, &mut a).unwrap();
            a
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(0.00125), "1.25e-3");
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = ExperimentConfig { k: 0, ..small() };
        assert!(matches!(run_feasibility(&cfg), Err(Error::Config(_))));
        let cfg = ExperimentConfig {
            t_samples: 1,
            ..small()
        };
        assert!(matches!(run_feasibility(&cfg), Err(Error::Config(_))));
    }
}
