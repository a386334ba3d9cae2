//! Run configuration, task dispatch and report emission.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::basis::Mode;
use crate::eig1d::DEFAULT_K;
use crate::eignd::solve_nd;
use crate::error::{Error, Result};
use crate::heat::{
    compare_fit, fit_spectrum, log_grid, predicted_coefficients, reliable_t_min, trace_series,
    Expansion, Exponent, FitComparison, FitWindow, HeatTraceSeries, RELIABILITY,
};
use crate::identities::{
    factorization_identity, refinement, reflection_identity_1d, sample_pairs,
    telescoped_dirichlet_trace, torus_image_identity_2d, trace_pairing_identity,
    trace_quadrupling_2d, IdentityOptions, IdentityReport, RefinementReport, SolveCache,
    DEFAULT_SAMPLES,
};
use crate::invariants::{
    bundle, compare, separability_diagnosis, BundleParams, CompareTolerances, SEPARABLE_TOLERANCE,
};
use crate::model::{
    build_potential, directional_decomposition, irrationality_scan, Bc, BoxProblem, CosineSpec,
    TrigPotential,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    HeatTrace,
    Fit,
    Decompose,
    Invariants,
    Compare,
    Verify,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Spectrum => "spectrum",
            Task::HeatTrace => "heat-trace",
            Task::Fit => "fit",
            Task::Decompose => "decompose",
            Task::Invariants => "invariants",
            Task::Compare => "compare",
            Task::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    /// Box-side basis size; defaults to 64 in 1D and 20 in 2D.
    pub size: Option<usize>,
    pub samples: usize,
    /// Also rerun each identity at half the size and require the residual
    /// to shrink.
    pub refine: bool,
    pub max_tail: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            size: None,
            samples: DEFAULT_SAMPLES,
            refine: true,
            max_tail: crate::identities::DEFAULT_MAX_TAIL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskParams {
    pub sizes: Option<Vec<usize>>,
    pub mode: Option<Mode>,
    /// Eigenvalues to report; defaults to the trusted count.
    pub count: Option<usize>,
    pub t_grid: Option<TimeGrid>,
    pub window: FitWindow,
    pub exponents: Option<Vec<Exponent>>,
    pub guards: Option<Vec<Exponent>>,
    /// Exponents whose predicted coefficients are subtracted before fitting.
    pub subtract: Vec<Exponent>,
    /// Relative tolerance for fitted coefficients.
    pub coefficient_tolerance: f64,
    pub bundle: BundleParams,
    pub compare: CompareTolerances,
    pub separable_tolerance: f64,
    pub verify: VerifyParams,
}

impl Default for TaskParams {
    fn default() -> Self {
        Self {
            sizes: None,
            mode: None,
            count: None,
            t_grid: None,
            window: FitWindow::default(),
            exponents: None,
            guards: None,
            subtract: Vec::new(),
            coefficient_tolerance: 0.02,
            bundle: BundleParams::default(),
            compare: CompareTolerances::default(),
            separable_tolerance: SEPARABLE_TOLERANCE,
            verify: VerifyParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: BoxProblem,
    /// Zero potential when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<CosineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default)]
    pub params: TaskParams,
    /// Second potential for `compare`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_potential: Option<CosineSpec>,
    /// Output directory; the command line takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |spec: &CosineSpec, what: &str| -> Result<()> {
            let same = spec.sides.len() == self.problem.dim()
                && spec
                    .sides
                    .iter()
                    .zip(self.problem.sides())
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * b);
            if !same {
                return Err(Error::ParameterMismatch(format!(
                    "{what} sides {:?} differ from problem sides {:?}",
                    spec.sides,
                    self.problem.sides()
                )));
            }
            spec.validate()
        };
        if let Some(p) = &self.potential {
            check(p, "potential")?;
        }
        if let Some(p) = &self.second_potential {
            check(p, "second_potential")?;
        }
        let p = &self.params;
        positive("coefficient_tolerance", p.coefficient_tolerance)?;
        positive("separable_tolerance", p.separable_tolerance)?;
        positive("compare.spectrum", p.compare.spectrum)?;
        positive("compare.integral", p.compare.integral)?;
        positive("compare.heat", p.compare.heat)?;
        positive("verify.max_tail", p.verify.max_tail)?;
        p.window.validate()?;
        p.bundle.validate()?;
        if let Some(s) = &p.sizes {
            if s.len() != self.problem.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.problem.dim(),
                    got: s.len(),
                });
            }
        }
        if let Some(g) = &p.t_grid {
            positive("t_grid.t_min", g.t_min)?;
            if !(g.t_max > g.t_min) || g.points < 2 {
                return Err(Error::InvalidInput(
                    "t_grid needs t_max > t_min and at least 2 points".into(),
                ));
            }
        }
        if self.task == Some(Task::Compare) && self.second_potential.is_none() {
            return Err(Error::InvalidInput("compare needs second_potential".into()));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<TrigPotential> {
        match &self.potential {
            Some(p) => build_potential(p),
            None => Ok(TrigPotential::zero(self.problem.sides().to_vec())),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    fn sizes(&self) -> Vec<usize> {
        self.params.sizes.clone().unwrap_or_else(|| {
            let k = match self.problem.dim() {
                1 => DEFAULT_K,
                2 => 48,
                _ => 12,
            };
            vec![k; self.problem.dim()]
        })
    }
}

/// Result of one task: the JSON payload, optional CSV data and whether
/// every check in it passed.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskOutput {
    pub task: Task,
    pub result: Value,
    pub csv: Option<String>,
    pub pass: bool,
    /// Failed checks are a verification failure rather than an
    /// informational outcome.
    pub verification: bool,
}

impl TaskOutput {
    pub fn exit_code(&self) -> i32 {
        if self.verification && !self.pass {
            2
        } else {
            0
        }
    }
}

pub fn run(config: &RunConfig, task: Task, seed: u64) -> Result<TaskOutput> {
    config.validate()?;
    if task == Task::Compare && config.second_potential.is_none() {
        return Err(Error::InvalidInput("compare needs second_potential".into()));
    }
    let p = config.potential()?;
    let b = &config.problem;
    let params = &config.params;
    let info = |result: Value, csv: Option<String>| TaskOutput {
        task,
        result,
        csv,
        pass: true,
        verification: false,
    };
    match task {
        Task::Spectrum => {
            let mode = params.mode.clone().unwrap_or(Mode::IntervalFaces);
            let s = solve_nd(&p, b, &config.sizes(), &mode, false)?;
            let count = params.count.unwrap_or(s.trusted);
            if count > s.trusted {
                return Err(Error::CountTooLarge {
                    requested: count,
                    available: s.trusted,
                });
            }
            let eigs = &s.eigenvalues[..count];
            Ok(info(
                json!({
                    "eigenvalues": eigs,
                    "trusted": s.trusted,
                    "basis": s.basis,
                    "potential_hash": s.potential_hash,
                }),
                Some(spectrum_csv(eigs)?),
            ))
        }
        Task::HeatTrace => {
            let s = solve_nd(&p, b, &config.sizes(), &Mode::IntervalFaces, false)?;
            let grid = match &params.t_grid {
                Some(g) => log_grid(g.t_min, g.t_max, g.points),
                None => {
                    let t0 = reliable_t_min(&s, RELIABILITY);
                    log_grid(t0, 8.0 * t0, 40)
                }
            };
            let series = trace_series(&s, &grid)?;
            let csv = series_csv(&series)?;
            Ok(info(json!({ "series": series }), Some(csv)))
        }
        Task::Fit => {
            let comparison = fit_task(config, &p)?;
            let csv = fit_csv(&comparison.1)?;
            Ok(TaskOutput {
                pass: comparison.1.pass,
                ..info(
                    json!({ "fit": comparison.0, "comparison": comparison.1 }),
                    Some(csv),
                )
            })
        }
        Task::Decompose => {
            let q = p.subtract_mean();
            let comps: Vec<Value> = directional_decomposition(&q)?
                .into_iter()
                .map(|c| {
                    json!({
                        "direction": c.direction,
                        "series": c.series,
                        "dual_norm": c.dual_norm,
                        "guaranteed": c.nonzero_components() > 1,
                    })
                })
                .collect();
            Ok(info(
                json!({
                    "mean": p.mean(),
                    "directional": comps,
                    "irrationality": irrationality_scan(b, 12)?,
                }),
                None,
            ))
        }
        Task::Invariants => {
            let bun = bundle(&p, b, &params.bundle)?;
            let sep = separability_diagnosis(&bun, params.separable_tolerance);
            Ok(info(json!({ "bundle": bun, "separability": sep }), None))
        }
        Task::Compare => {
            let second = build_potential(config.second_potential.as_ref().expect("checked above"))?;
            let (x, y) = rayon::join(
                || bundle(&p, b, &params.bundle),
                || bundle(&second, b, &params.bundle),
            );
            let report = compare(&x?, &y?, &params.compare)?;
            Ok(TaskOutput {
                pass: report.consistent,
                ..info(json!({ "comparison": report }), None)
            })
        }
        Task::Verify => {
            let (reports, refinements) = verify_task(config, &p, seed)?;
            let pass = reports.iter().all(|r| r.pass) && refinements.iter().all(|r| r.pass);
            Ok(TaskOutput {
                task,
                result: json!({ "identities": reports, "refinement": refinements }),
                csv: None,
                pass,
                verification: true,
            })
        }
    }
}

fn fit_task(
    config: &RunConfig,
    p: &TrigPotential,
) -> Result<(crate::heat::AsymptoticFit, FitComparison)> {
    let params = &config.params;
    let b = &config.problem;
    let n = b.dim() as i32;
    let s = solve_nd(p, b, &config.sizes(), &Mode::IntervalFaces, false)?;
    let predicted = predicted_coefficients(b, p)?;
    let subtract = (!params.subtract.is_empty()).then(|| {
        Expansion(
            params
                .subtract
                .iter()
                .map(|e| (*e, predicted.get(*e).unwrap_or(0.0)))
                .collect(),
        )
    });
    let exps = params
        .exponents
        .clone()
        .unwrap_or_else(|| Exponent::range(Exponent(-n), Exponent(1)));
    let guards = params
        .guards
        .clone()
        .unwrap_or_else(|| vec![Exponent(2), Exponent(3)]);
    let (mut fit, _) = fit_spectrum(&s, &exps, &guards, subtract.as_ref(), &params.window)?;
    fit.predicted = Some(predicted.clone());
    let cmp = compare_fit(
        &fit,
        &predicted,
        &BTreeMap::new(),
        (params.coefficient_tolerance, true),
    )?;
    Ok((fit, cmp))
}

/// Tolerances of the identity suite.
pub mod tolerances {
    pub const REFLECTION: f64 = 1e-7;
    pub const IMAGE: f64 = 1e-5;
    pub const QUADRUPLING: f64 = 1e-5;
    pub const PAIRING: f64 = 1e-8;
    pub const TELESCOPED: f64 = 1e-7;
    pub const FACTORIZATION: f64 = 1e-8;
}

fn verify_task(
    config: &RunConfig,
    p: &TrigPotential,
    seed: u64,
) -> Result<(Vec<IdentityReport>, Vec<RefinementReport>)> {
    let b = &config.problem;
    let vp = &config.params.verify;
    let a = b.sides()[0];
    let cache = SolveCache::new();
    let mut reports = Vec::new();
    let mut refinements = Vec::new();
    let size = vp.size.unwrap_or(if b.dim() == 1 { 64 } else { 20 });
    let mut check = |tol: f64,
                     refine: bool,
                     f: &dyn Fn(&IdentityOptions) -> Result<IdentityReport>|
     -> Result<()> {
        let o = IdentityOptions {
            max_tail: vp.max_tail,
            ..IdentityOptions::scaled(a, tol, size)
        };
        let fine = f(&o)?;
        if refine && vp.refine {
            let coarse = f(&o.with_size(size / 2).unbudgeted())?;
            refinements.push(refinement(&coarse, &fine));
        }
        reports.push(fine);
        Ok(())
    };
    match b.dim() {
        1 => {
            let pts: Vec<(f64, f64)> = sample_pairs(b.sides(), vp.samples, seed)?
                .into_iter()
                .map(|(x, y)| (x[0], y[0]))
                .collect();
            for bc in [
                (Bc::Dirichlet, Bc::Dirichlet),
                (Bc::Dirichlet, Bc::Neumann),
                (Bc::Neumann, Bc::Dirichlet),
                (Bc::Neumann, Bc::Neumann),
            ] {
                check(tolerances::REFLECTION, true, &|o| {
                    reflection_identity_1d(&cache, p, bc, &pts, o)
                })?;
            }
            check(tolerances::PAIRING, true, &|o| {
                trace_pairing_identity(&cache, p, o)
            })?;
            check(tolerances::TELESCOPED, true, &|o| {
                telescoped_dirichlet_trace(&cache, p, o)
            })?;
        }
        2 => {
            let pts = sample_pairs(b.sides(), vp.samples, seed)?;
            check(tolerances::IMAGE, true, &|o| {
                torus_image_identity_2d(&cache, p, b, &pts, o)
            })?;
            if b.bc()
                .iter()
                .all(|&bc| bc == (Bc::Dirichlet, Bc::Dirichlet))
            {
                check(tolerances::QUADRUPLING, true, &|o| {
                    trace_quadrupling_2d(&cache, p, b, o)
                })?;
            }
            for axis in 0..2 {
                check(tolerances::FACTORIZATION, false, &|o| {
                    factorization_identity(&cache, p, b, axis, &pts, o)
                })?;
            }
        }
        n => return Err(Error::UnsupportedDimension(n)),
    }
    Ok((reports, refinements))
}

/// The full report document for one task.
pub fn report_json(config: &RunConfig, out: &TaskOutput, seed: u64) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "library_version": VERSION,
        "config_hash": config.hash(),
        "task": out.task.to_string(),
        "seed": seed,
        "pass": out.pass,
        "config": config,
        "result": out.result,
    })
}

/// Write `<task>.json` and, when present, `<task>.csv` into `dir`.
pub fn write_outputs(
    dir: &Path,
    config: &RunConfig,
    out: &TaskOutput,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join(format!("{}.json", out.task));
    let mut text = serde_json::to_string_pretty(&report_json(config, out, seed))?;
    text.push('\n');
    fs::write(&json_path, text)?;
    written.push(json_path);
    if let Some(csv) = &out.csv {
        let csv_path = dir.join(format!("{}.csv", out.task));
        fs::write(&csv_path, csv)?;
        written.push(csv_path);
    }
    Ok(written)
}

fn csv_text<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Columns `t,value,tail_bound`.
pub fn series_csv(series: &HeatTraceSeries) -> Result<String> {
    csv_text(
        &["t", "value", "tail_bound"],
        series
            .points
            .iter()
            .map(|p| vec![num(p.t), num(p.value), num(p.tail_bound)]),
    )
}

/// Columns `exponent,fitted,predicted,deviation`.
pub fn fit_csv(cmp: &FitComparison) -> Result<String> {
    csv_text(
        &["exponent", "fitted", "predicted", "deviation"],
        cmp.rows.iter().map(|r| {
            vec![
                r.exponent.to_string(),
                num(r.fitted),
                num(r.predicted),
                num(r.abs_deviation),
            ]
        }),
    )
}

/// Columns `index,eigenvalue`.
pub fn spectrum_csv(eigs: &[f64]) -> Result<String> {
    csv_text(
        &["index", "eigenvalue"],
        eigs.iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), num(*v)]),
    )
}
