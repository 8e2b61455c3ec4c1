//! Suite execution and reporting: seeded random inputs, a fixed regression
//! family, parallel factorization runs, and JSON/CSV report writers.
//!
//! Everything here is deterministic. Random inputs come from an explicit
//! counter-based scheme, so identical `(seed, dim)` pairs yield bit-identical
//! operators across runs, and identical configurations yield byte-identical
//! JSON reports. Wall-clock timings are measured but never serialized.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorizer::{factorize, FactorizeOpts, PipelineTrace};
use crate::generators::{shift_reflection_word, shift_triangular_word, GeneratorId};
use crate::kernel::{BlockOperator, StructuredOperator};

/// ChaCha8 stream keyed by the little-endian bytes of `seed` and `dim`,
/// zero padded to the full key width.
fn seeded_rng(seed: u64, dim: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&dim.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform on (0, 1] with 53 significant bits; never zero, so logs are finite.
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard complex Gaussian with E|z|^2 = 1, from one Box-Muller pair.
fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let radius = (-2.0 * unit_open(rng).ln()).sqrt();
    let angle = std::f64::consts::TAU * unit_open(rng);
    Complex64::new(radius * angle.cos(), radius * angle.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed `n x n` unitary: Gaussian fill in row-major order, then
/// modified Gram-Schmidt in column order with a second re-orthogonalization
/// pass per column and positive real normalizers.
fn haar_matrix(seed: u64, n: usize) -> DMatrix<Complex64> {
    let mut rng = seeded_rng(seed, n as u64);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] = complex_gaussian(&mut rng);
        }
    }
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let overlap: Complex64 = (0..n).map(|r| m[(r, i)].conj() * m[(r, j)]).sum();
                for r in 0..n {
                    let basis = m[(r, i)];
                    m[(r, j)] -= overlap * basis;
                }
            }
        }
        let norm = (0..n).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            m[(r, j)] /= norm;
        }
    }
    m
}

/// Deterministic random unitary spread across both halves: a seeded Haar
/// `n x n` matrix is split at `h = ceil(n/2)`, its four corners become the
/// dense parts of the four blocks, and each diagonal block continues as the
/// identity beyond the embedded region.
///
/// The scheme is reproducible from this description alone: ChaCha8 keyed by
/// the little-endian bytes of `seed` then `n`, 53-bit uniforms on (0, 1],
/// Box-Muller pairs scaled by 1/sqrt(2), row-major fill, modified
/// Gram-Schmidt in column order with one repeat pass. Identical arguments
/// give bit-identical operators.
pub fn gen_random_input(seed: u64, n: usize) -> BlockOperator {
    let q = haar_matrix(seed, n);
    let h = n.div_ceil(2);
    let corner = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| {
        let (row0, col0) = (rows.start, cols.start);
        let mut entries = Vec::new();
        for r in rows.clone() {
            for c in cols.clone() {
                entries.push(((r - row0 + 1) as u64, (c - col0 + 1) as u64, q[(r, c)]));
            }
        }
        StructuredOperator::from_entries(entries)
    };
    let upper_left = corner(0..h, 0..h)
        .add(&StructuredOperator::tail_identity(h as u64 + 1, Complex64::ONE))
        .expect("disjoint supports");
    let lower_right = corner(h..n, h..n)
        .add(&StructuredOperator::tail_identity((n - h) as u64 + 1, Complex64::ONE))
        .expect("disjoint supports");
    BlockOperator::new(upper_left, corner(0..h, h..n), corner(h..n, 0..h), lower_right)
}

/// Regression family run by every suite: the identity, the eight generators,
/// and the shift-power targets for k = 1..=8 on both the triangular and the
/// reflection side. 25 entries, labels unique, order fixed.
pub fn fixed_family() -> Vec<(String, BlockOperator)> {
    let mut family = vec![("identity".to_string(), BlockOperator::identity())];
    for id in GeneratorId::ALL {
        family.push((format!("generator {}", id.index()), id.build()));
    }
    for k in 1..=8 {
        family.push((format!("triangular power {k}"), shift_triangular_word(k).1));
    }
    for k in 1..=8 {
        family.push((format!("reflection power {k}"), shift_reflection_word(k).1));
    }
    family
}

/// On-disk encoding produced by `write_report`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

/// Suite parameters. `window` and `tol` feed the factorizer; `out_path` and
/// `format` control the optional report file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seeds: Vec<u64>,
    pub dims: Vec<usize>,
    pub window: u64,
    pub tol: f64,
    #[serde(default)]
    pub out_path: Option<String>,
    #[serde(default)]
    pub format: ReportFormat,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seeds: vec![1, 2, 3, 4, 5],
            dims: vec![2, 4, 8, 16, 32],
            window: 64,
            tol: 1e-8,
            out_path: None,
            format: ReportFormat::Json,
        }
    }
}

/// Outcome of one factorization case. The residual fields are absent when
/// the pipeline returned an error. `wall` is measured but skipped during
/// serialization so identical runs produce identical bytes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseReport {
    pub label: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub word_len: usize,
    pub word_len_core: usize,
    #[serde(default)]
    pub residual: Option<f64>,
    #[serde(default)]
    pub max_stage_residual: Option<f64>,
    #[serde(default)]
    pub stage_residuals: Vec<(String, f64)>,
    pub flipped: bool,
    pub swapped: bool,
    pub passed: bool,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(skip)]
    pub wall: Duration,
}

/// Full suite outcome: the configuration, every case in submission order,
/// and summary fields recomputed from the cases. The random length lists
/// hold the distinct word lengths observed over the seeded cases only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SuiteConfig,
    pub cases: Vec<CaseReport>,
    pub max_residual: Option<f64>,
    pub random_word_lengths: Vec<usize>,
    pub random_core_lengths: Vec<usize>,
    pub passed: bool,
}

/// Worst residual per stage, in stage order; stages without residuals are
/// omitted.
fn stage_summary(trace: &PipelineTrace) -> Vec<(String, f64)> {
    trace
        .stages
        .iter()
        .filter(|stage| !stage.residuals.is_empty())
        .map(|stage| {
            let worst = stage.residuals.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
            (stage.name.clone(), worst)
        })
        .collect()
}

fn run_case(
    label: &str,
    dim: Option<usize>,
    seed: Option<u64>,
    input: &BlockOperator,
    opts: &FactorizeOpts,
) -> CaseReport {
    let start = Instant::now();
    match factorize(input, opts) {
        Ok((word, trace)) => CaseReport {
            label: label.to_string(),
            dim,
            seed,
            word_len: word.len(),
            word_len_core: word.core_len(),
            residual: Some(trace.final_residual),
            max_stage_residual: Some(trace.max_stage_residual()),
            stage_residuals: stage_summary(&trace),
            flipped: trace.flipped,
            swapped: trace.swapped,
            passed: trace.final_residual <= opts.tol,
            error: None,
            wall: start.elapsed(),
        },
        Err(err) => CaseReport {
            label: label.to_string(),
            dim,
            seed,
            word_len: 0,
            word_len_core: 0,
            residual: None,
            max_stage_residual: None,
            stage_residuals: Vec::new(),
            flipped: false,
            swapped: false,
            passed: false,
            error: Some(err.to_string()),
            wall: start.elapsed(),
        },
    }
}

/// Worker pool sized by the FACTORIZE_THREADS variable when set, default
/// width otherwise.
fn suite_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("FACTORIZE_THREADS") {
        let threads = raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "FACTORIZE_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

/// Runs the fixed family plus one case per `(dim, seed)` pair, in parallel,
/// and assembles the report in deterministic order. Writes the report to
/// `config.out_path` when one is set. The report's `passed` flag is the
/// conjunction over cases; mapping it to a process exit is the caller's job.
pub fn run_suite(config: &SuiteConfig) -> Result<RunReport> {
    let opts = FactorizeOpts {
        window: config.window,
        tol: config.tol,
        ..FactorizeOpts::default()
    };
    let mut jobs: Vec<(String, Option<usize>, Option<u64>, BlockOperator)> = fixed_family()
        .into_iter()
        .map(|(label, op)| (label, None, None, op))
        .collect();
    for &dim in &config.dims {
        for &seed in &config.seeds {
            jobs.push((
                format!("random dim {dim} seed {seed}"),
                Some(dim),
                Some(seed),
                gen_random_input(seed, dim),
            ));
        }
    }
    let pool = suite_pool()?;
    let cases: Vec<CaseReport> = pool.install(|| {
        jobs.par_iter()
            .map(|(label, dim, seed, input)| run_case(label, *dim, *seed, input, &opts))
            .collect()
    });
    let max_residual = cases
        .iter()
        .filter_map(|case| case.residual)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let mut random_word_lengths: Vec<usize> = cases
        .iter()
        .filter(|case| case.seed.is_some() && case.error.is_none())
        .map(|case| case.word_len)
        .collect();
    random_word_lengths.sort_unstable();
    random_word_lengths.dedup();
    let mut random_core_lengths: Vec<usize> = cases
        .iter()
        .filter(|case| case.seed.is_some() && case.error.is_none())
        .map(|case| case.word_len_core)
        .collect();
    random_core_lengths.sort_unstable();
    random_core_lengths.dedup();
    let passed = cases.iter().all(|case| case.passed);
    let report = RunReport {
        config: config.clone(),
        cases,
        max_residual,
        random_word_lengths,
        random_core_lengths,
        passed,
    };
    if let Some(path) = &config.out_path {
        write_report(&report, path, config.format)?;
    }
    Ok(report)
}

/// Report as pretty JSON with a trailing newline. Identical reports give
/// identical bytes.
pub fn report_json(report: &RunReport) -> Result<String> {
    let mut body = serde_json::to_string_pretty(report)?;
    body.push('\n');
    Ok(body)
}

/// One CSV row per case, header first. Stage residuals pack into a single
/// `name=value` list separated by `;`, and commas inside error messages are
/// replaced, so rows split on commas without a quoting layer.
pub fn report_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "label,dim,seed,word_len,word_len_core,residual,max_stage_residual,\
         flipped,swapped,passed,error,stage_residuals\n",
    );
    for case in &report.cases {
        let dim = case.dim.map_or_else(String::new, |d| d.to_string());
        let seed = case.seed.map_or_else(String::new, |s| s.to_string());
        let residual = case.residual.map_or_else(String::new, |r| r.to_string());
        let worst = case
            .max_stage_residual
            .map_or_else(String::new, |r| r.to_string());
        let error = case.error.as_deref().unwrap_or("").replace(',', ";");
        let stages = case
            .stage_residuals
            .iter()
            .map(|(name, value)| format!("{name}={value}"))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            case.label,
            dim,
            seed,
            case.word_len,
            case.word_len_core,
            residual,
            worst,
            case.flipped,
            case.swapped,
            case.passed,
            error,
            stages,
        );
    }
    out
}

/// Writes the report to `path` in the requested format.
pub fn write_report(report: &RunReport, path: &str, format: ReportFormat) -> Result<()> {
    let body = match format {
        ReportFormat::Json => report_json(report)?,
        ReportFormat::Csv => report_csv(report),
    };
    std::fs::write(path, body)?;
    Ok(())
}
