//! Greedy seeding, hill-climbing refinement and the combined pipeline.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentGraph, RestrictionSet};
use crate::engine::{DivIterator, SearchPool};
use crate::error::{Error, Result};
use crate::ranking::{canonical, RankParams, ScoredSet, SetSummary};
use crate::{OrdF64, VertexId};

/// Subsets must improve on their parent by more than this to be re-queued.
const IMPROVEMENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Result cardinality.
    pub n: usize,
    /// Greedy seed count.
    pub k_g: usize,
    /// Refined candidate count.
    pub k_c: usize,
    /// Per-addendum time-out in milliseconds; 0 disables it.
    pub t_d_ms: u64,
    /// Hill-climbing cut-off in milliseconds; 0 disables it. When unset it is
    /// `3 * n * k_g * t_d` if `t_d` is set, otherwise disabled.
    pub t_c_ms: Option<u64>,
    /// Cap on the number of subsets refined.
    pub max_iterations: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { n: 10, k_g: 2, k_c: 2, t_d_ms: 0, t_c_ms: None, max_iterations: None }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k_g == 0 || self.k_c == 0 {
            return Err(Error::InvalidParams("n, k_g and k_c must be at least 1".into()));
        }
        Ok(())
    }

    pub fn addendum_timeout(&self) -> Option<Duration> {
        (self.t_d_ms > 0).then(|| Duration::from_millis(self.t_d_ms))
    }

    pub fn climb_timeout(&self) -> Option<Duration> {
        let ms = match self.t_c_ms {
            Some(ms) => ms,
            None => 3 * (self.n as u64) * (self.k_g as u64) * self.t_d_ms,
        };
        (ms > 0).then(|| Duration::from_millis(ms))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseStats {
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
    pub logical_bytes_peak: u64,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversifyRun {
    pub result: ScoredSet,
    /// Greedy seeds, best first.
    pub seeds: Vec<ScoredSet>,
    /// Refined candidates, best first.
    pub refined: Vec<ScoredSet>,
    pub greedy: PhaseStats,
    pub hillclimb: PhaseStats,
    /// Number of subsets the refinement examined.
    pub iterations: usize,
}

fn cmp_sets(a: &ScoredSet, b: &ScoredSet) -> Ordering {
    a.score.total_cmp(&b.score).then_with(|| a.items.cmp(&b.items))
}

fn score(pool: &SearchPool<'_>, q: VertexId, items: &[VertexId], p: &RankParams) -> f64 {
    SetSummary::of(pool, q, items, p).score
}

/// Bounded collection of full sets, one per membership, worst evictable.
struct BestSets {
    cap: usize,
    sets: Vec<ScoredSet>,
}

impl BestSets {
    fn new(cap: usize) -> Self {
        Self { cap, sets: Vec::with_capacity(cap + 1) }
    }

    fn is_full(&self) -> bool {
        self.sets.len() >= self.cap
    }

    fn worst(&self) -> Option<&ScoredSet> {
        self.sets.iter().max_by(|a, b| cmp_sets(a, b))
    }

    /// Whether `score` would enter: the collection has room or it beats the worst.
    fn admits(&self, score: f64) -> bool {
        !self.is_full() || self.worst().is_some_and(|w| score < w.score)
    }

    /// Inserts unless it is full and `set` does not beat the worst. A set
    /// with the same membership as a kept one replaces it only if better.
    /// Returns false when `set` was rejected for not beating the worst.
    fn offer(&mut self, set: ScoredSet) -> bool {
        let key = set.canonical();
        if let Some(i) = self.sets.iter().position(|s| s.canonical() == key) {
            if cmp_sets(&set, &self.sets[i]) == Ordering::Less {
                self.sets[i] = set;
            }
            return true;
        }
        if !self.admits(set.score) {
            return false;
        }
        if self.is_full() {
            let (i, _) = self.sets.iter().enumerate().max_by(|a, b| cmp_sets(a.1, b.1)).expect("full");
            self.sets.swap_remove(i);
        }
        self.sets.push(set);
        true
    }

    fn into_sorted(mut self) -> Vec<ScoredSet> {
        self.sets.sort_by(cmp_sets);
        self.sets
    }
}

struct Meter {
    peak: u64,
}

impl Meter {
    fn sample(&mut self, bytes: u64) {
        self.peak = self.peak.max(bytes);
    }
}

fn admissible_count(graph: &DocumentGraph, q: VertexId, restriction: &RestrictionSet) -> usize {
    (0..graph.vertex_count() as VertexId).filter(|&v| v != q && restriction.admits(v)).count()
}

fn check_query(graph: &DocumentGraph, q: VertexId, n: usize, restriction: &RestrictionSet) -> Result<()> {
    graph.check(q)?;
    if !graph.is_valid_center(q) {
        return Err(Error::InvalidParams(format!(
            "document {} has an empty term vector and cannot be a query center",
            graph.ext_id(q)
        )));
    }
    let available = admissible_count(graph, q, restriction);
    if available < n {
        return Err(Error::InsufficientVertices { needed: n, available });
    }
    Ok(())
}

struct Branch<'g> {
    set: ScoredSet,
    iter: DivIterator<'g>,
}

/// Greedy construction of up to `k_g` sets of `n` items each.
pub fn greeverso(
    graph: &DocumentGraph,
    q: VertexId,
    n: usize,
    restriction: &RestrictionSet,
    k_g: usize,
    params: &RankParams,
) -> Result<Vec<ScoredSet>> {
    let cfg = PipelineConfig { n, k_g, ..Default::default() };
    cfg.validate()?;
    params.validate()?;
    check_query(graph, q, n, restriction)?;
    let pool = SearchPool::new(graph);
    Ok(greeverso_in(&pool, q, &Arc::new(restriction.clone()), &cfg, params, &mut Meter { peak: 0 }))
}

fn greeverso_in<'g>(
    pool: &SearchPool<'g>,
    q: VertexId,
    restriction: &Arc<RestrictionSet>,
    cfg: &PipelineConfig,
    p: &RankParams,
    meter: &mut Meter,
) -> Vec<ScoredSet> {
    let (n, k_g) = (cfg.n, cfg.k_g);
    let timeout = cfg.addendum_timeout();
    let mut root = DivIterator::with_pool(pool.clone(), q, &[], restriction.clone(), *p)
        .expect("validated query")
        .with_timeout(timeout);
    let mut results = BestSets::new(k_g);
    let mut level: Vec<Branch<'g>> = Vec::new();
    for _ in 0..k_g {
        let Some(a) = root.next() else { break };
        let set = ScoredSet::new(vec![a.vertex], score(pool, q, &[a.vertex], p));
        if n == 1 {
            results.offer(set);
        } else {
            level.push(Branch { iter: root.expand(a.vertex).expect("emitted vertex is not a source"), set });
        }
    }
    meter.sample(pool.logical_bytes() + root.own_logical_bytes());
    drop(root);

    while !level.is_empty() {
        let mut next_level: Vec<Branch<'g>> = Vec::new();
        for mut branch in level {
            let mut counter = 0;
            while let Some(a) = branch.iter.next() {
                let mut items = branch.set.items.clone();
                items.push(a.vertex);
                let s = score(pool, q, &items, p);
                if items.len() == n {
                    if !results.offer(ScoredSet::new(items, s)) {
                        break;
                    }
                } else {
                    let iter = branch.iter.expand(a.vertex).expect("emitted vertex is not a source");
                    next_level.push(Branch { set: ScoredSet::new(items, s), iter });
                    counter += 1;
                    if counter >= k_g {
                        break;
                    }
                }
            }
            meter.sample(
                pool.logical_bytes()
                    + branch.iter.own_logical_bytes()
                    + next_level.iter().map(|b| b.iter.own_logical_bytes() + 8 * b.set.len() as u64).sum::<u64>()
                    + results.sets.iter().map(|s| 8 * s.len() as u64 + 8).sum::<u64>(),
            );
        }
        next_level.sort_by(|a, b| cmp_sets(&a.set, &b.set));
        next_level.truncate(k_g);
        level = next_level;
    }

    if results.sets.is_empty() {
        if let Some(set) = greedy_chain(pool, q, restriction, n, p, timeout) {
            results.offer(set);
        }
    }
    results.into_sorted()
}

/// Plain greedy completion without any exclusions.
fn greedy_chain(
    pool: &SearchPool<'_>,
    q: VertexId,
    restriction: &Arc<RestrictionSet>,
    n: usize,
    p: &RankParams,
    timeout: Option<Duration>,
) -> Option<ScoredSet> {
    let mut items = Vec::with_capacity(n);
    while items.len() < n {
        let mut it =
            DivIterator::with_pool(pool.clone(), q, &items, restriction.clone(), *p).ok()?.with_timeout(timeout);
        items.push(it.next()?.vertex);
    }
    let s = score(pool, q, &items, p);
    Some(ScoredSet::new(items, s))
}

struct Subset<'g> {
    set: ScoredSet,
    iter: DivIterator<'g>,
}

/// Hill-climbing refinement of equally sized seed sets into up to `k_c`
/// candidates, best first.
pub fn interverso(
    graph: &DocumentGraph,
    q: VertexId,
    restriction: &RestrictionSet,
    seeds: &[ScoredSet],
    k_c: usize,
    params: &RankParams,
) -> Result<Vec<ScoredSet>> {
    let n = seeds.first().map_or(1, |s| s.len());
    let cfg = PipelineConfig { n, k_c, ..Default::default() };
    cfg.validate()?;
    params.validate()?;
    graph.check(q)?;
    let pool = SearchPool::new(graph);
    interverso_in(&pool, q, &Arc::new(restriction.clone()), seeds, &cfg, params, &mut Meter { peak: 0 })
        .map(|(sets, _)| sets)
}

fn interverso_in<'g>(
    pool: &SearchPool<'g>,
    q: VertexId,
    restriction: &Arc<RestrictionSet>,
    seeds: &[ScoredSet],
    cfg: &PipelineConfig,
    p: &RankParams,
    meter: &mut Meter,
) -> Result<(Vec<ScoredSet>, usize)> {
    let Some(first) = seeds.first() else {
        return Err(Error::InvalidParams("no seed sets to refine".into()));
    };
    let n = first.len();
    if n == 0 || seeds.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidParams("seed sets must be non-empty and of equal size".into()));
    }
    let start = Instant::now();
    let deadline = cfg.climb_timeout();
    let timeout = cfg.addendum_timeout();
    let mut candidates = BestSets::new(cfg.k_c);

    // Seeds are rescored so every candidate carries this pool's arithmetic.
    let seeds: Vec<ScoredSet> =
        seeds.iter().map(|s| ScoredSet::new(s.items.clone(), score(pool, q, &s.items, p))).collect();
    if n == 1 {
        for seed in seeds {
            candidates.offer(seed);
        }
        return Ok((candidates.into_sorted(), 0));
    }

    let mut seq = 0u64;
    let mut queue: BinaryHeap<Reverse<(OrdF64, u64)>> = BinaryHeap::new();
    let mut waiting: rustc_hash::FxHashMap<u64, Subset<'g>> = Default::default();
    let mut seen: FxHashSet<Vec<VertexId>> = FxHashSet::default();
    let mut push = |set: ScoredSet,
                    iter: DivIterator<'g>,
                    queue: &mut BinaryHeap<_>,
                    waiting: &mut rustc_hash::FxHashMap<_, _>| {
        queue.push(Reverse((OrdF64(set.score), seq)));
        waiting.insert(seq, Subset { set, iter });
        seq += 1;
    };

    for seed in &seeds {
        for &s in &seed.items {
            let items: Vec<VertexId> = seed.items.iter().copied().filter(|&v| v != s).collect();
            if !seen.insert(canonical(&items)) {
                continue;
            }
            let iter = DivIterator::with_pool(pool.clone(), q, &items, restriction.clone(), *p)?.with_timeout(timeout);
            let set = ScoredSet::new(items.clone(), score(pool, q, &items, p));
            push(set, iter, &mut queue, &mut waiting);
        }
        candidates.offer(seed.clone());
    }

    let mut iterations = 0;
    'subsets: while let Some(Reverse((_, id))) = queue.pop() {
        if deadline.is_some_and(|d| start.elapsed() >= d) || cfg.max_iterations.is_some_and(|m| iterations >= m) {
            break;
        }
        iterations += 1;
        let Subset { set: subset, iter: mut replacements } = waiting.remove(&id).expect("queued subset");
        while let Some(a) = replacements.next() {
            let mut augmented = subset.items.clone();
            augmented.push(a.vertex);
            for &s in &subset.items {
                let items: Vec<VertexId> = augmented.iter().copied().filter(|&v| v != s).collect();
                let ns = score(pool, q, &items, p);
                if ns < subset.score - IMPROVEMENT_EPS && candidates.admits(ns) && seen.insert(canonical(&items)) {
                    let iter = replacements.replace(s, a.vertex)?;
                    push(ScoredSet::new(items, ns), iter, &mut queue, &mut waiting);
                }
            }
            let aug_score = score(pool, q, &augmented, p);
            if !candidates.offer(ScoredSet::new(augmented, aug_score)) {
                break;
            }
            if deadline.is_some_and(|d| start.elapsed() >= d) {
                break 'subsets;
            }
        }
        meter.sample(
            pool.logical_bytes()
                + replacements.own_logical_bytes()
                + waiting.values().map(|w| w.iter.own_logical_bytes() + 8 * w.set.len() as u64).sum::<u64>()
                + candidates.sets.iter().map(|s| 8 * s.len() as u64 + 8).sum::<u64>(),
        );
    }
    Ok((candidates.into_sorted(), iterations))
}

/// Greedy seeding followed by hill climbing; returns the best set found.
pub fn diversify(
    graph: &DocumentGraph,
    q: VertexId,
    restriction: &RestrictionSet,
    cfg: &PipelineConfig,
    params: &RankParams,
) -> Result<ScoredSet> {
    diversify_run(graph, q, restriction, cfg, params).map(|r| r.result)
}

pub fn diversify_run(
    graph: &DocumentGraph,
    q: VertexId,
    restriction: &RestrictionSet,
    cfg: &PipelineConfig,
    params: &RankParams,
) -> Result<DiversifyRun> {
    cfg.validate()?;
    params.validate()?;
    check_query(graph, q, cfg.n, restriction)?;
    let pool = SearchPool::new(graph);
    let restriction = Arc::new(restriction.clone());

    let t0 = Instant::now();
    let mut meter = Meter { peak: 0 };
    let seeds = greeverso_in(&pool, q, &restriction, cfg, params, &mut meter);
    let greedy = PhaseStats { elapsed: t0.elapsed(), logical_bytes_peak: meter.peak };
    if seeds.is_empty() {
        return Err(Error::InsufficientVertices { needed: cfg.n, available: admissible_count(graph, q, &restriction) });
    }

    let t1 = Instant::now();
    let mut meter = Meter { peak: pool.logical_bytes() };
    let (refined, iterations) = interverso_in(&pool, q, &restriction, &seeds, cfg, params, &mut meter)?;
    let hillclimb = PhaseStats { elapsed: t1.elapsed(), logical_bytes_peak: meter.peak };
    log::debug!(
        "diversify {}: {} searches, {} relaxations, {} iterations",
        graph.ext_id(q),
        pool.relaxations().len(),
        pool.total_relaxations(),
        iterations
    );
    let result = refined.first().cloned().expect("seeds are always candidates");
    Ok(DiversifyRun { result, seeds, refined, greedy, hillclimb, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::oracle_best_set;
    use crate::corpus::fixtures::fixture6;
    use crate::engine::verso;
    use crate::ranking::{score_of, Variant};

    #[test]
    fn single_item_is_the_best_addendum() {
        let g = fixture6();
        let p = RankParams::default();
        let all = RestrictionSet::allow_all();
        let cfg = PipelineConfig { n: 1, k_g: 1, k_c: 1, ..Default::default() };
        let got = diversify(&g, 0, &all, &cfg, &p).unwrap();
        let want = verso(&g, 0, &[], &all, &p).unwrap();
        assert_eq!(got.items, vec![want.vertex]);
        assert_eq!(got.score, want.gain);
    }

    #[test]
    fn fixture_seeds_grow_from_closest_texts() {
        let g = fixture6();
        let p = RankParams::default();
        let seeds = greeverso(&g, 0, 2, &RestrictionSet::allow_all(), 2, &p).unwrap();
        assert_eq!(seeds.len(), 2);
        // Text-only relevance: 1 shares the query's only term, 3 half of it.
        assert!(seeds.iter().all(|s| s.items[0] == 1 || s.items[0] == 3));
        assert_eq!(seeds[0].items[0], 1);
        assert_ne!(seeds[0].canonical(), seeds[1].canonical());
        for s in &seeds {
            assert_eq!(s.len(), 2);
            assert!((score_of(&g, 0, &s.items, &p).unwrap() - s.score).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_never_loses_to_seeds() {
        let g = fixture6();
        for variant in [Variant::MinAvg, Variant::MinMax] {
            let p = RankParams { variant, ..Default::default() };
            let all = RestrictionSet::allow_all();
            let cfg = PipelineConfig { n: 3, k_g: 2, k_c: 2, ..Default::default() };
            let run = diversify_run(&g, 0, &all, &cfg, &p).unwrap();
            assert!(run.result.score <= run.seeds[0].score);
            let oracle = oracle_best_set(&g, 0, 3, &all, &p).unwrap();
            assert!(oracle.score <= run.result.score + 1e-12);
        }
    }

    #[test]
    fn insufficient_vertices_is_reported() {
        let g = fixture6();
        let cfg = PipelineConfig { n: 3, ..Default::default() };
        let r = RestrictionSet::whitelist([1, 2]);
        assert!(matches!(
            diversify(&g, 0, &r, &cfg, &RankParams::default()),
            Err(Error::InsufficientVertices { needed: 3, available: 2 })
        ));
    }

    #[test]
    fn small_seed_pool_is_not_an_error() {
        let g = fixture6();
        let r = RestrictionSet::whitelist([1, 2, 3]);
        let seeds = greeverso(&g, 0, 1, &r, 4, &RankParams::default()).unwrap();
        assert_eq!(seeds.len(), 3);
    }

    #[test]
    fn climb_timeout_defaults_to_a_multiple() {
        let cfg = PipelineConfig { n: 10, k_g: 2, t_d_ms: 5, ..Default::default() };
        assert_eq!(cfg.climb_timeout(), Some(Duration::from_millis(300)));
        assert_eq!(PipelineConfig { t_c_ms: Some(0), ..cfg }.climb_timeout(), None);
        assert_eq!(PipelineConfig::default().climb_timeout(), None);
    }
}
