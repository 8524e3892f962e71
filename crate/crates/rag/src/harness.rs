//! Reproducible multi-replicate experiments.
//!
//! Replicate `k` of a run draws its positions from the stream
//! `(master_seed, k)`, so any record can be regenerated on its own and the
//! thread schedule never reaches the output. Records are gathered in
//! replicate order and every reduction runs sequentially in that order.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use log::{info, warn};
use rag_core::{
    clustering_coefficient, count_graph, ks_distance, sample_positions, sigma2_cubature, sigma2_monte_carlo,
    standardized_statistic, AnnulusParams, KernelParams, NeumaierSum, RngSeed, SigmaEstimate, SigmaMethod,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::format;

/// Largest outer radius accepted for CLT runs.
pub const MAX_CLT_R1: f64 = 0.1;
/// Smallest `n * r1` accepted for CLT runs.
pub const MIN_CLT_NR1: f64 = 20.0;
/// Largest tolerated share of replicates without any 2-path.
pub const MAX_EXCLUDED_SHARE: f64 = 0.1;
/// Stream reserved for Monte Carlo estimates of `sigma^2`; replicates use
/// streams `0..replicates`.
pub const SIGMA_STREAM: u64 = u64::MAX;
/// Default budgets: a cubature grid or a Monte Carlo sample count.
pub const DEFAULT_CUBATURE_GRID: u64 = 4000;
pub const DEFAULT_MC_SAMPLES: u64 = 10_000_000;

/// Verdict bands for a CLT run of `R` usable replicates: KS distance at most
/// `1.63 / sqrt(R)` (Kolmogorov, alpha = 0.01), mean within `±0.2`, standard
/// deviation within `[0.8, 1.2]`.
pub const KS_COEFFICIENT: f64 = 1.63;
pub const MEAN_BAND: f64 = 0.2;
pub const SD_BAND: (f64, f64) = (0.8, 1.2);

const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] rag_core::Error),
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("{excluded} of {replicates} replicates had no 2-paths (more than 10%); parameters are outside the CLT regime in practice")]
    TooManyExclusions { excluded: usize, replicates: usize },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// True for rejected inputs, as opposed to failures while running.
    pub fn is_validation(&self) -> bool {
        matches!(self, HarnessError::Model(_) | HarnessError::InvalidSpec(_))
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: AnnulusParams,
    pub replicates: usize,
    pub master_seed: u64,
    pub sigma_method: SigmaMethod,
    /// Cubature grid or Monte Carlo sample count, depending on the method.
    pub sigma_budget: u64,
    /// Where the records CSV goes, if anywhere.
    pub output_path: Option<PathBuf>,
    /// Fill `duration_ms`. Timings differ between runs, so records files are
    /// only byte-reproducible with this off.
    pub record_timing: bool,
}

impl ExperimentSpec {
    /// A spec with cubature at the default grid, no output file and no timing.
    pub fn new(params: AnnulusParams, replicates: usize, master_seed: u64) -> Self {
        Self {
            params,
            replicates,
            master_seed,
            sigma_method: SigmaMethod::Cubature,
            sigma_budget: DEFAULT_CUBATURE_GRID,
            output_path: None,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(HarnessError::InvalidSpec("replicates must be at least 1".into()));
        }
        Ok(())
    }

    /// Desk-scale CLT gates: `2 r2 < r1`, `r1 <= 0.1` and `n r1 >= 20`.
    pub fn validate_clt(&self) -> Result<()> {
        self.validate()?;
        check_clt_params(&self.params)
    }
}

pub fn check_clt_params(p: &AnnulusParams) -> Result<()> {
    if !p.clt_regime() {
        return Err(rag_core::Error::RegimeViolation { r1: p.r1(), r2: p.r2() }.into());
    }
    if p.r1() > MAX_CLT_R1 {
        return Err(HarnessError::InvalidSpec(format!("r1 = {} exceeds {MAX_CLT_R1} (CLT runs need small r1)", p.r1())));
    }
    let nr1 = p.n() as f64 * p.r1();
    if nr1 < MIN_CLT_NR1 {
        return Err(HarnessError::InvalidSpec(format!(
            "n * r1 = {nr1} is below {MIN_CLT_NR1} (CLT runs need large n * r1)"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub replicate: usize,
    /// Master seed; the stream id is the replicate index.
    pub seed: u64,
    /// `None` when the graph has no 2-paths.
    pub cn: Option<f64>,
    pub ordered_triangles: u64,
    pub ordered_paths: u64,
    pub standardized: Option<f64>,
    pub duration_ms: Option<f64>,
}

/// Estimates `sigma^2` for the spec's radii with its method and budget.
pub fn estimate_sigma(kp: &KernelParams, method: SigmaMethod, budget: u64, master_seed: u64) -> Result<SigmaEstimate> {
    let est = match method {
        SigmaMethod::Cubature => {
            let grid = u32::try_from(budget)
                .map_err(|_| HarnessError::InvalidSpec(format!("cubature grid {budget} is too large")))?;
            sigma2_cubature(kp, grid)?
        }
        SigmaMethod::MonteCarlo => sigma2_monte_carlo(kp, budget, RngSeed::new(master_seed, SIGMA_STREAM))?,
    };
    Ok(est)
}

/// Samples, counts and standardises replicate `k`.
pub fn run_replicate(spec: &ExperimentSpec, k: usize, sigma: &SigmaEstimate) -> Result<ExperimentRecord> {
    if k >= spec.replicates {
        return Err(HarnessError::InvalidSpec(format!("replicate {k} out of range 0..{}", spec.replicates)));
    }
    let start = Instant::now();
    let ps = sample_positions(&spec.params, RngSeed::new(spec.master_seed, k as u64));
    let counts = count_graph(&ps, &spec.params);
    let cn = clustering_coefficient(&counts);
    let standardized = match cn {
        Some(c) => Some(standardized_statistic(c, &spec.params, sigma)?),
        None => None,
    };
    let duration_ms = spec.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(ExperimentRecord {
        replicate: k,
        seed: spec.master_seed,
        cn,
        ordered_triangles: counts.ordered_triangles,
        ordered_paths: counts.ordered_paths,
        standardized,
        duration_ms,
    })
}

fn run_replicates(spec: &ExperimentSpec, sigma: &SigmaEstimate) -> Result<Vec<ExperimentRecord>> {
    (0..spec.replicates).into_par_iter().map(|k| run_replicate(spec, k, sigma)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub q01: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub q99: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltSummary {
    pub replicates: usize,
    pub sample_count: usize,
    pub excluded_count: usize,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single sample.
    pub variance: f64,
    pub sd: f64,
    pub ks_distance: f64,
    pub quantiles: Quantiles,
}

impl CltSummary {
    /// Summarises the standardised statistics of `records`; `None` when no
    /// replicate produced one.
    pub fn from_records(records: &[ExperimentRecord]) -> Option<Self> {
        let mut z: Vec<f64> = records.iter().filter_map(|r| r.standardized).collect();
        if z.is_empty() {
            return None;
        }
        let n = z.len() as f64;
        let mean = z.iter().copied().collect::<NeumaierSum>().value() / n;
        let ss = z.iter().map(|x| (x - mean) * (x - mean)).collect::<NeumaierSum>().value();
        let variance = if z.len() > 1 { ss / (n - 1.0) } else { 0.0 };
        let ks = ks_distance(&z).expect("finite, nonempty sample");
        z.sort_unstable_by(f64::total_cmp);
        let q = QUANTILE_LEVELS.map(|p| quantile_sorted(&z, p));
        Some(Self {
            replicates: records.len(),
            sample_count: z.len(),
            excluded_count: records.len() - z.len(),
            mean,
            variance,
            sd: variance.sqrt(),
            ks_distance: ks,
            quantiles: Quantiles { q01: q[0], q05: q[1], q25: q[2], q50: q[3], q75: q[4], q95: q[5], q99: q[6] },
        })
    }

    pub fn verdict(&self) -> CltVerdict {
        let ks_critical = KS_COEFFICIENT / (self.sample_count as f64).sqrt();
        let ks_ok = self.ks_distance <= ks_critical;
        let mean_ok = self.mean.abs() <= MEAN_BAND;
        let sd_ok = SD_BAND.0 <= self.sd && self.sd <= SD_BAND.1;
        CltVerdict { ks_critical, ks_ok, mean_ok, sd_ok, pass: ks_ok && mean_ok && sd_ok }
    }
}

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltVerdict {
    pub ks_critical: f64,
    pub ks_ok: bool,
    pub mean_ok: bool,
    pub sd_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltRun {
    pub sigma: SigmaEstimate,
    pub summary: CltSummary,
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
}

/// Runs every replicate of a CLT experiment against one shared `sigma^2`,
/// writes the records file when `output_path` is set, and summarises.
pub fn run_clt_experiment(spec: &ExperimentSpec) -> Result<CltRun> {
    spec.validate_clt()?;
    let kp = KernelParams::from_params(&spec.params)?;
    let sigma = estimate_sigma(&kp, spec.sigma_method, spec.sigma_budget, spec.master_seed)?;
    info!("sigma^2 = {} ({}, budget {})", sigma.value, sigma.method.as_str(), sigma.samples_or_grid);

    let records = run_replicates(spec, &sigma)?;
    if let Some(path) = &spec.output_path {
        write_records_file(path, &records)?;
    }
    check_exclusions(&records)?;
    let summary = CltSummary::from_records(&records).expect("at least one usable replicate");
    Ok(CltRun { sigma, summary, records })
}

/// Number of replicates without a 2-path; an error above 10% of the run.
pub fn check_exclusions(records: &[ExperimentRecord]) -> Result<usize> {
    let excluded = records.iter().filter(|r| r.cn.is_none()).count();
    if excluded > 0 {
        warn!("{excluded} of {} replicates had no 2-paths and were excluded", records.len());
    }
    if excluded as f64 > MAX_EXCLUDED_SHARE * records.len() as f64 {
        return Err(HarnessError::TooManyExclusions { excluded, replicates: records.len() });
    }
    Ok(excluded)
}

pub fn write_records_file(path: &std::path::Path, records: &[ExperimentRecord]) -> Result<()> {
    let file = File::create(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    format::write_records(BufWriter::new(file), records)
        .map_err(|source| HarnessError::Csv { path: path.into(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub replicates: usize,
    pub excluded: usize,
    pub limit: f64,
    pub mean_cn: f64,
    /// Mean of `|C_n - limit|` over usable replicates.
    pub mean_abs_deviation: f64,
    /// Sample standard deviation of `C_n`.
    pub sd: f64,
}

/// For each `n`, runs `base.replicates` graphs at the base radii and reports
/// how far `C_n` sits from its limit. Replicate `k` uses stream
/// `(master_seed, k)` for every `n`.
pub fn run_convergence_experiment(base: &ExperimentSpec, n_values: &[usize]) -> Result<Vec<ConvergenceRow>> {
    base.validate()?;
    let kp = KernelParams::from_params(&base.params)?;
    let specs = n_values
        .iter()
        .map(|&n| {
            let spec = ExperimentSpec { params: base.params.with_n(n)?, output_path: None, ..base.clone() };
            spec.validate_clt()?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(specs.len());
    for spec in &specs {
        let cns: Vec<Option<f64>> = (0..spec.replicates)
            .into_par_iter()
            .map(|k| {
                let ps = sample_positions(&spec.params, RngSeed::new(spec.master_seed, k as u64));
                clustering_coefficient(&count_graph(&ps, &spec.params))
            })
            .collect();
        let usable: Vec<f64> = cns.iter().flatten().copied().collect();
        let m = usable.len() as f64;
        let mean_cn = usable.iter().copied().collect::<NeumaierSum>().value() / m;
        let mad = usable.iter().map(|c| (c - kp.limit).abs()).collect::<NeumaierSum>().value() / m;
        let ss = usable.iter().map(|c| (c - mean_cn) * (c - mean_cn)).collect::<NeumaierSum>().value();
        let sd = if usable.len() > 1 { (ss / (m - 1.0)).sqrt() } else { 0.0 };
        info!("n = {}: mean C_n = {mean_cn}, mean |C_n - limit| = {mad}", spec.params.n());
        rows.push(ConvergenceRow {
            n: spec.params.n(),
            replicates: spec.replicates,
            excluded: cns.len() - usable.len(),
            limit: kp.limit,
            mean_cn,
            mean_abs_deviation: mad,
            sd,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub r1: f64,
    pub r2: f64,
    pub method: SigmaMethod,
    pub budget: u64,
    pub sigma2: f64,
    pub std_error: f64,
    /// `sigma^2 / r1^3`.
    pub ratio: f64,
    pub ratio_std_error: f64,
}

/// `sigma^2` at `r2 = r1 / lambda` for each `r1`, with the ratio to `r1^3`.
pub fn run_sigma_scaling(
    lambda: f64,
    r1_values: &[f64],
    method: SigmaMethod,
    budget: u64,
    master_seed: u64,
) -> Result<Vec<ScalingRow>> {
    if !(lambda > 2.0) {
        return Err(HarnessError::InvalidSpec(format!("lambda = {lambda} must exceed 2")));
    }
    r1_values
        .iter()
        .map(|&r1| {
            if !(r1 <= MAX_CLT_R1) {
                return Err(HarnessError::InvalidSpec(format!("r1 = {r1} exceeds {MAX_CLT_R1}")));
            }
            let params = AnnulusParams::with_ratio(1, r1, lambda)?;
            let kp = KernelParams::from_params(&params)?;
            let est = estimate_sigma(&kp, method, budget, master_seed)?;
            let cube = r1 * r1 * r1;
            Ok(ScalingRow {
                r1,
                r2: params.r2(),
                method,
                budget,
                sigma2: est.value,
                std_error: est.std_error,
                ratio: est.value / cube,
                ratio_std_error: est.std_error / cube,
            })
        })
        .collect()
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    Ok(builder.build()?.install(f))
}
