use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{best_coverage_run, BaselineParams};
use crate::corpus::{DocumentGraph, RestrictionSet};
use crate::error::{Error, Result};
use crate::pipeline::{diversify_run, PipelineConfig};
use crate::ranking::{RankParams, Variant};
use crate::VertexId;

pub const GREEDY_PHASE: &str = "GREEDY_PHASE";
pub const HILLCLIMB_PHASE: &str = "HILLCLIMB_PHASE";
pub const BEST_COVERAGE: &str = "BEST_COVERAGE";

/// Parameter axes; the grid is their cartesian product. Every axis defaults
/// to a single value giving n = 10, two seeds, λ = β = 0.8, α = 0, MIN_AVG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub variant: Vec<Variant>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub n: Vec<usize>,
    pub kg: Vec<usize>,
    pub kc: Vec<usize>,
    /// Hop radius of the baseline.
    pub ell: usize,
    pub td_ms: u64,
    pub tc_ms: Option<u64>,
    pub max_iterations: Option<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            variant: vec![Variant::MinAvg],
            lambda: vec![0.8],
            alpha: vec![0.0],
            beta: vec![0.8],
            n: vec![10],
            kg: vec![2],
            kc: vec![2],
            ell: 2,
            td_ms: 0,
            tc_ms: None,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub params: RankParams,
    pub pipeline: PipelineConfig,
    pub ell: usize,
}

impl Grid {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParams(format!("grid: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Expands the axes, outermost first in field order.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        let mut out = Vec::new();
        for &variant in &self.variant {
            for &lambda in &self.lambda {
                for &alpha in &self.alpha {
                    for &beta in &self.beta {
                        for &n in &self.n {
                            for &k_g in &self.kg {
                                for &k_c in &self.kc {
                                    let params = RankParams::new(lambda, alpha, beta, variant)?;
                                    let pipeline = PipelineConfig {
                                        n,
                                        k_g,
                                        k_c,
                                        t_d_ms: self.td_ms,
                                        t_c_ms: self.tc_ms,
                                        max_iterations: self.max_iterations,
                                    };
                                    pipeline.validate()?;
                                    BaselineParams::new(self.ell, params)?;
                                    out.push(GridPoint { params, pipeline, ell: self.ell });
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParams("grid has an empty axis".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub queries: usize,
    pub seed: u64,
    /// Grid points evaluated concurrently.
    pub workers: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { queries: 100, seed: 0, workers: 1 }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub query_id: usize,
    pub center_id: String,
    pub variant: String,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub kg: usize,
    pub kc: usize,
    pub method: String,
    pub phase: String,
    pub elapsed_ms: f64,
    pub logical_bytes_peak: u64,
    pub score: f64,
}

/// Uniform draw (with replacement) among vertices that can serve as centers.
pub fn draw_centers(graph: &DocumentGraph, count: usize, seed: u64) -> Result<Vec<VertexId>> {
    let valid: Vec<VertexId> = (0..graph.vertex_count() as VertexId).filter(|&v| graph.is_valid_center(v)).collect();
    if valid.is_empty() {
        return Err(Error::InvalidParams("no document can serve as a query center".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| *valid.choose(&mut rng).expect("non-empty")).collect())
}

fn run_point(graph: &DocumentGraph, point: &GridPoint, centers: &[VertexId]) -> Result<Vec<MetricsRecord>> {
    let all = RestrictionSet::allow_all();
    let p = &point.params;
    let cfg = &point.pipeline;
    let row =
        |query_id: usize, q: VertexId, method: &str, phase: &str, ms: f64, bytes: u64, score: f64| MetricsRecord {
            query_id,
            center_id: graph.ext_id(q).to_string(),
            variant: p.variant.as_str().to_string(),
            lambda: p.lambda,
            alpha: p.alpha,
            beta: p.beta,
            n: cfg.n,
            kg: cfg.k_g,
            kc: cfg.k_c,
            method: method.to_string(),
            phase: phase.to_string(),
            elapsed_ms: ms,
            logical_bytes_peak: bytes,
            score,
        };
    let mut out = Vec::with_capacity(3 * centers.len());
    for (i, &q) in centers.iter().enumerate() {
        let run = diversify_run(graph, q, &all, cfg, p)?;
        let best_seed = run.seeds.first().map_or(f64::NAN, |s| s.score);
        out.push(row(
            i,
            q,
            "diversify",
            GREEDY_PHASE,
            ms(run.greedy.elapsed),
            run.greedy.logical_bytes_peak,
            best_seed,
        ));
        out.push(row(
            i,
            q,
            "diversify",
            HILLCLIMB_PHASE,
            ms(run.hillclimb.elapsed),
            run.hillclimb.logical_bytes_peak,
            run.result.score,
        ));

        let bp = BaselineParams::new(point.ell, *p)?;
        let t = Instant::now();
        let bc = best_coverage_run(graph, q, cfg.n, &all, &bp);
        let elapsed = ms(t.elapsed());
        match bc {
            Ok(bc) => out.push(row(i, q, "best_coverage", BEST_COVERAGE, elapsed, bc.logical_bytes_peak, bc.set.score)),
            Err(Error::InsufficientVertices { .. }) => {
                log::warn!("best coverage ran out of vertices around {}", graph.ext_id(q));
                out.push(row(i, q, "best_coverage", BEST_COVERAGE, elapsed, 0, f64::NAN));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs every grid point over the same random query centers. Rows come out
/// grid point by grid point, then by query, then greedy, hill-climb, baseline.
/// A baseline that runs out of vertices reports a NaN score.
pub fn run_benchmark(graph: &DocumentGraph, grid: &Grid, opts: &BenchOptions) -> Result<Vec<MetricsRecord>> {
    let points = grid.points()?;
    let centers = draw_centers(graph, opts.queries, opts.seed)?;
    let workers = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
    let per_point: Vec<Result<Vec<MetricsRecord>>> =
        workers.install(|| points.par_iter().map(|pt| run_point(graph, pt, &centers)).collect());
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(records: &[MetricsRecord], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}
