mod common;

use graphdiv::baseline::oracle_best_set;
use graphdiv::bench::{random_graph, RandomGraphSpec};
use graphdiv::corpus::{DocumentGraph, RestrictionSet};
use graphdiv::pipeline::{diversify_run, greeverso, interverso, PipelineConfig};
use graphdiv::ranking::{score_of, RankParams, Variant};
use graphdiv::{Error, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::fixture6;

fn instance(seed: u64) -> (DocumentGraph, VertexId, usize, RankParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomGraphSpec {
        vertices: rng.random_range(8..=60),
        max_out_degree: rng.random_range(1..=6),
        vocab: rng.random_range(5..=30),
        max_terms: 5,
        seed,
    };
    let g = random_graph(&spec).unwrap();
    let q = rng.random_range(0..g.vertex_count() as VertexId);
    let grid = [0.2, 0.5, 0.8];
    let variant = if rng.random_bool(0.5) { Variant::MinAvg } else { Variant::MinMax };
    let p = RankParams::new(
        grid[rng.random_range(0..3)],
        grid[rng.random_range(0..3)],
        grid[rng.random_range(0..3)],
        variant,
    )
    .unwrap();
    (g, q, rng.random_range(2..=4), p)
}

#[test]
fn diversify_tracks_the_exact_optimum() {
    let mut close = 0;
    let total = 40;
    for seed in 0..total {
        let (g, q, n, p) = instance(seed);
        let all = RestrictionSet::allow_all();
        let cfg = PipelineConfig { n, k_g: 4, k_c: 4, ..Default::default() };
        let run = diversify_run(&g, q, &all, &cfg, &p).unwrap();
        let oracle = oracle_best_set(&g, q, n, &all, &p).unwrap();
        let exact = score_of(&g, q, &run.result.items, &p).unwrap();
        assert!((exact - run.result.score).abs() < 1e-12, "seed {seed}");
        assert!(oracle.score <= run.result.score + 1e-12, "seed {seed}: beat the oracle");
        assert!(run.result.score <= run.seeds[0].score, "seed {seed}");
        if run.result.score <= oracle.score + 0.05 * oracle.score.abs() {
            close += 1;
        }
    }
    assert!(close * 10 >= total * 8, "{close}/{total} within 5%");
}

#[test]
fn results_have_distinct_admissible_members() {
    for seed in 100..130 {
        let (g, q, n, p) = instance(seed);
        let nv = g.vertex_count() as VertexId;
        let r = RestrictionSet::blacklist((0..nv).filter(|v| v % 4 == 1));
        let cfg = PipelineConfig { n, k_g: 3, k_c: 2, ..Default::default() };
        match diversify_run(&g, q, &r, &cfg, &p) {
            Ok(run) => {
                for set in run.seeds.iter().chain(&run.refined) {
                    assert_eq!(set.len(), n);
                    assert!(set.items.iter().all(|&v| v != q && r.admits(v)));
                    assert_eq!(set.canonical().windows(2).filter(|w| w[0] == w[1]).count(), 0);
                }
                assert!(run.refined.len() <= 2 && run.seeds.len() <= 3);
            }
            Err(Error::InsufficientVertices { .. }) => assert!(r.admissible(&g, &[q]).len() < n),
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let (g, q, n, p) = instance(7);
    let cfg = PipelineConfig { n, k_g: 3, k_c: 3, ..Default::default() };
    let all = RestrictionSet::allow_all();
    let a = diversify_run(&g, q, &all, &cfg, &p).unwrap();
    let b = diversify_run(&g, q, &all, &cfg, &p).unwrap();
    assert_eq!(a.result, b.result);
    assert_eq!(a.refined, b.refined);
}

#[test]
fn interverso_improves_a_poor_seed() {
    let g = fixture6();
    let p = RankParams::default();
    let all = RestrictionSet::allow_all();
    let poor = graphdiv::ranking::ScoredSet::new(vec![4, 5], score_of(&g, 0, &[4, 5], &p).unwrap());
    let refined = interverso(&g, 0, &all, std::slice::from_ref(&poor), 2, &p).unwrap();
    assert!(refined[0].score < poor.score);
    let oracle = oracle_best_set(&g, 0, 2, &all, &p).unwrap();
    assert!(oracle.score <= refined[0].score);
    assert!(matches!(interverso(&g, 0, &all, &[], 2, &p), Err(Error::InvalidParams(_))));
}

#[test]
fn iteration_cap_stops_refinement() {
    let (g, q, n, p) = instance(11);
    let all = RestrictionSet::allow_all();
    let cfg = PipelineConfig { n, k_g: 2, k_c: 2, max_iterations: Some(1), ..Default::default() };
    let run = diversify_run(&g, q, &all, &cfg, &p).unwrap();
    assert!(run.iterations <= 1);
    let seeds = greeverso(&g, q, n, &all, 2, &p).unwrap();
    assert_eq!(seeds, run.seeds);
}
