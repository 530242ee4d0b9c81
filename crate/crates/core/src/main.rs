use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphdiv::api::{diversify_text_or_id, DiversifyRequest, DiversifyResponse};
use graphdiv::baseline::{oracle_best_addendum, ADDENDUM_ORACLE_MAX_VERTICES};
use graphdiv::bench::{generate_synthetic, run_benchmark, write_csv, BenchOptions, Grid, SynthConfig};
use graphdiv::corpus::{ingest_collection, load_graph, save_graph, DiameterOptions, DocumentGraph, RestrictionSet};
use graphdiv::engine::verso;
use graphdiv::ranking::{RankParams, Variant};
use graphdiv::{Error, Result, VertexId};

#[derive(Parser)]
#[command(name = "graphdiv", version, about = "Diversified top-k retrieval over document graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph file from a JSON-lines collection.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Seed of the sampled diameter estimate for large graphs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print size, degree and diameter of a graph file.
    GraphStats {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Write a random synthetic graph.
    Generate {
        #[arg(long, default_value_t = 10_000)]
        docs: usize,
        #[arg(long, default_value_t = 10)]
        links: usize,
        #[arg(long, default_value_t = 100)]
        lemmas: usize,
        #[arg(long, default_value_t = 0.1)]
        skew: f64,
        /// Vocabulary size, ten times the lemma count when omitted.
        #[arg(long)]
        vocab: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Diversified search around one center.
    Query {
        #[arg(long)]
        graph: PathBuf,
        /// Document id, or free text matched against titles and content.
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        kg: usize,
        #[arg(long, default_value_t = 2)]
        kc: usize,
        #[arg(long, default_value_t = 0.8)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        #[arg(long, default_value = "avg")]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        td_ms: u64,
        #[arg(long)]
        tc_ms: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Run the benchmark grid and write a CSV report.
    Bench {
        #[arg(long)]
        graph: PathBuf,
        /// TOML grid; the default single point when omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Compare the exact search with the brute-force oracle on random instances.
    OracleCheck {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Admissible vertices per trial; larger graphs get a random whitelist.
        #[arg(long, default_value_t = 200)]
        max_v: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Ingest { input, output, seed } => {
            let (graph, report) = ingest_collection(&input, DiameterOptions { seed, ..Default::default() })?;
            save_graph(&graph, &output)?;
            println!(
                "documents {}  links {}  dropped links {}  mean out-degree {:.3}  empty vectors {}",
                report.documents, report.links, report.dropped_links, report.mean_out_degree, report.empty_vectors
            );
        }
        Command::GraphStats { graph } => {
            let g = load_graph(&graph)?;
            let d = g.diameter_estimate();
            let centers = (0..g.vertex_count() as VertexId).filter(|&v| g.is_valid_center(v)).count();
            println!("documents       {}", g.vertex_count());
            println!("links           {}", g.edge_count());
            println!("mean out-degree {:.4}", g.mean_out_degree());
            println!("vocabulary      {}", g.vocabulary().len());
            println!("valid centers   {centers}");
            println!("diameter        {} ({})", d.value, if d.exact { "exact" } else { "estimated" });
            println!("checksum        {:016x}", g.checksum());
        }
        Command::Generate { docs, links, lemmas, skew, vocab, seed, output } => {
            let cfg = SynthConfig {
                num_docs: docs,
                links_per_doc: links,
                lemmas_per_doc: lemmas,
                zipf_skew: skew,
                vocab_size: vocab,
                rng_seed: seed,
            };
            let g = generate_synthetic(&cfg)?;
            save_graph(&g, &output)?;
            println!("documents {}  links {}  checksum {:016x}", g.vertex_count(), g.edge_count(), g.checksum());
        }
        Command::Query { graph, q, n, kg, kc, lambda, alpha, beta, variant, td_ms, tc_ms, json } => {
            let g = load_graph(&graph)?;
            let req = DiversifyRequest { n, kg, kc, lambda, alpha, beta, variant, td_ms, tc_ms, ..Default::default() };
            let resp = diversify_text_or_id(&g, &q, &req)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&resp)?);
            } else {
                print_response(&resp);
            }
        }
        Command::Bench { graph, grid, queries, seed, workers, out } => {
            let g = load_graph(&graph)?;
            let grid = match grid {
                Some(path) => Grid::load(&path)?,
                None => Grid::default(),
            };
            let rows = run_benchmark(&g, &grid, &BenchOptions { queries, seed, workers })?;
            write_csv(&rows, BufWriter::new(File::create(&out)?))?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
        Command::Serve { graph, bind } => {
            let g = Arc::new(load_graph(&graph)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(graphdiv::service::serve(g, bind))?;
        }
        Command::OracleCheck { graph, trials, max_v, seed } => {
            let g = load_graph(&graph)?;
            let mismatches = oracle_check(&g, trials, max_v, seed)?;
            println!("{trials} trials, {mismatches} mismatches");
            if mismatches > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_response(r: &DiversifyResponse) {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "center {} \"{}\"", r.center_id, r.center_title);
    let _ = writeln!(out, "{:>3}  {:<12} {:>8} {:>10} {:>4}  title", "#", "id", "rel", "gain", "hops");
    for (i, item) in r.items.iter().enumerate() {
        let hops = item.hops_from_q.map_or("-".to_string(), |h| h.to_string());
        let _ = writeln!(
            out,
            "{:>3}  {:<12} {:>8.5} {:>10.6} {:>4}  {}",
            i + 1,
            item.id,
            item.rel_distance,
            item.marginal_gain,
            hops,
            item.title
        );
    }
    let _ = writeln!(
        out,
        "score {:.9}  greedy {:.1} ms  hill-climb {:.1} ms",
        r.score, r.timings.greedy_ms, r.timings.hillclimb_ms
    );
}

/// Random single-addendum instances checked against the linear scan.
fn oracle_check(g: &DocumentGraph, trials: usize, max_v: usize, seed: u64) -> Result<usize> {
    if g.vertex_count() > ADDENDUM_ORACLE_MAX_VERTICES {
        return Err(Error::GuardExceeded {
            what: "graph size",
            actual: g.vertex_count() as u128,
            limit: ADDENDUM_ORACLE_MAX_VERTICES as u128,
        });
    }
    let nv = g.vertex_count();
    if nv < 2 || max_v == 0 {
        return Err(Error::InvalidParams("oracle check needs two vertices and max-v >= 1".into()));
    }
    let grid = [0.2, 0.5, 0.8];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for trial in 0..trials {
        let q = rng.random_range(0..nv) as VertexId;
        let k = rng.random_range(0..=3.min(nv - 1));
        let set: Vec<VertexId> = sample(&mut rng, nv, nv.min(k + 1))
            .into_iter()
            .map(|v| v as VertexId)
            .filter(|&v| v != q)
            .take(k)
            .collect();
        let variant = if rng.random_bool(0.5) { Variant::MinAvg } else { Variant::MinMax };
        let p = RankParams::new(
            grid[rng.random_range(0..3)],
            grid[rng.random_range(0..3)],
            grid[rng.random_range(0..3)],
            variant,
        )?;
        let restriction = if nv > max_v {
            RestrictionSet::whitelist(sample(&mut rng, nv, max_v).into_iter().map(|v| v as VertexId))
        } else {
            RestrictionSet::allow_all()
        };
        let got = verso(g, q, &set, &restriction, &p);
        let want = oracle_best_addendum(g, q, &set, &restriction, &p);
        match (got, want) {
            (Ok(a), Ok(b)) if a.vertex == b.vertex && a.gain.to_bits() == b.gain.to_bits() => {}
            (Err(Error::NoAdmissibleVertex), Err(Error::NoAdmissibleVertex)) => {}
            (got, want) => {
                mismatches += 1;
                eprintln!("trial {trial}: q={q} set={set:?} {p:?}: verso {got:?}, oracle {want:?}");
            }
        }
    }
    Ok(mismatches)
}
