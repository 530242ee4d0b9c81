//! Hop-limited greedy baseline and the brute-force oracles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentGraph, RestrictionSet};
use crate::engine::{Addendum, TIE_EPS};
use crate::error::{Error, Result};
use crate::ranking::{
    diss_distance, gain_of, rel_distance, score_of, DistanceCache, GainModel, RankParams, ScoredSet, SetSummary,
};
use crate::VertexId;

pub const ADDENDUM_ORACLE_MAX_VERTICES: usize = 10_000;
pub const SET_ORACLE_MAX_COMBINATIONS: u128 = 2_000_000;
/// Largest cardinality for which the set oracle tries every ordering.
pub const SET_ORACLE_EXACT_ORDER_MAX: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Hop radius around the current result and the query center.
    pub ell: usize,
    pub params: RankParams,
}

impl BaselineParams {
    pub fn new(ell: usize, params: RankParams) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParams("ell must be at least 1".into()));
        }
        params.validate()?;
        Ok(Self { ell, params })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub set: ScoredSet,
    /// Candidate pool cap `n * δ^ℓ`.
    pub pool_cap: usize,
    /// Pool size actually ranked in each round.
    pub pool_sizes: Vec<usize>,
    pub logical_bytes_peak: u64,
}

/// Lowest id among `(vertex, gain)` entries within the tie band of the minimum.
fn band_argmin(gains: impl IntoIterator<Item = (VertexId, f64)>) -> Option<Addendum> {
    let gains: Vec<(VertexId, f64)> = gains.into_iter().collect();
    let min = gains.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    gains
        .into_iter()
        .filter(|g| g.1 <= min + TIE_EPS)
        .min_by_key(|g| g.0)
        .map(|(vertex, gain)| Addendum { vertex, gain })
}

/// Greedy selection that in each round ranks only the first `n * δ^ℓ`
/// admissible vertices (breadth-first, by hop level then id) within `ℓ` hops
/// of the query center and the current result, using the same marginal gain
/// as the exact search. δ is the mean out-degree.
pub fn best_coverage(
    graph: &DocumentGraph,
    q: VertexId,
    n: usize,
    restriction: &RestrictionSet,
    bp: &BaselineParams,
) -> Result<ScoredSet> {
    best_coverage_run(graph, q, n, restriction, bp).map(|r| r.set)
}

pub fn best_coverage_run(
    graph: &DocumentGraph,
    q: VertexId,
    n: usize,
    restriction: &RestrictionSet,
    bp: &BaselineParams,
) -> Result<BaselineRun> {
    graph.check(q)?;
    bp.params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if bp.ell == 0 {
        return Err(Error::InvalidParams("ell must be at least 1".into()));
    }
    let p = &bp.params;
    let delta = graph.mean_out_degree();
    let cap = (n as f64 * delta.powi(bp.ell as i32)).ceil();
    let pool_cap = if cap.is_finite() && cap < usize::MAX as f64 { (cap as usize).max(1) } else { usize::MAX };

    let cache = DistanceCache::new(graph);
    let mut items: Vec<VertexId> = Vec::with_capacity(n);
    let mut pool_sizes = Vec::with_capacity(n);
    let mut peak = 0u64;
    let mut rows = 1u64;
    while items.len() < n {
        let mut sources = items.clone();
        sources.push(q);
        let pool: Vec<VertexId> = graph
            .hop_ball(&sources, bp.ell)
            .into_iter()
            .map(|(v, _)| v)
            .filter(|&v| v != q && restriction.admits(v) && !items.contains(&v))
            .take(pool_cap)
            .collect();
        if pool.is_empty() {
            return Err(Error::InsufficientVertices { needed: n, available: items.len() });
        }
        let model = GainModel::for_set(&cache, q, &items, p);
        let pick =
            band_argmin(pool.iter().map(|&v| (v, gain_of(&cache, &model, q, &items, v, p).0))).expect("non-empty pool");
        pool_sizes.push(pool.len());
        rows = 1 + items.len() as u64;
        peak = peak.max(16 * pool.len() as u64 + 8 * items.len() as u64 + 16 * rows * graph.vertex_count() as u64);
        items.push(pick.vertex);
    }
    peak = peak.max(8 * items.len() as u64 + 16 * rows * graph.vertex_count() as u64);
    let score = score_of(&cache, q, &items, p)?;
    Ok(BaselineRun { set: ScoredSet::new(items, score), pool_cap, pool_sizes, logical_bytes_peak: peak })
}

/// Linear scan for the best addendum; ties within the band go to the lower id.
pub fn oracle_best_addendum(
    graph: &DocumentGraph,
    q: VertexId,
    set: &[VertexId],
    restriction: &RestrictionSet,
    params: &RankParams,
) -> Result<Addendum> {
    let gains = oracle_gains(graph, q, set, restriction, params)?;
    band_argmin(gains).ok_or(Error::NoAdmissibleVertex)
}

/// Marginal gain of every admissible vertex outside `set` and `q`, by id.
pub fn oracle_gains(
    graph: &DocumentGraph,
    q: VertexId,
    set: &[VertexId],
    restriction: &RestrictionSet,
    params: &RankParams,
) -> Result<Vec<(VertexId, f64)>> {
    let nv = graph.vertex_count();
    if nv > ADDENDUM_ORACLE_MAX_VERTICES {
        return Err(Error::GuardExceeded {
            what: "vertices",
            actual: nv as u128,
            limit: ADDENDUM_ORACLE_MAX_VERTICES as u128,
        });
    }
    params.validate()?;
    graph.check(q)?;
    for (i, &s) in set.iter().enumerate() {
        graph.check(s)?;
        if s == q || set[..i].contains(&s) {
            return Err(Error::AlreadyInSet(s));
        }
    }
    let cache = DistanceCache::new(graph);
    let model = GainModel::for_set(&cache, q, set, params);
    let mut exclude = set.to_vec();
    exclude.push(q);
    Ok(restriction
        .admissible(graph, &exclude)
        .into_iter()
        .map(|v| (v, gain_of(&cache, &model, q, set, v, params).0))
        .collect())
}

fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (m - i) as u128 / (i + 1) as u128;
        if c > u128::MAX / 1024 {
            return u128::MAX;
        }
    }
    c
}

/// Relevance and ordered dissimilarity legs among the admissible vertices.
struct LegTable {
    rel: Vec<f64>,
    diss: Vec<f64>,
    m: usize,
}

impl LegTable {
    fn diss(&self, a: usize, b: usize) -> f64 {
        self.diss[a * self.m + b]
    }

    fn score(&self, order: &[usize], p: &RankParams) -> f64 {
        let rels = order.iter().map(|&i| self.rel[i]);
        let pairs = order
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| order[i + 1..].iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.diss(a, b));
        SetSummary::from_legs(order.len(), rels, pairs, p).score
    }

    /// Best ordering of `members`: all orderings for small sets, otherwise
    /// greedy insertion by marginal gain.
    fn best_order(&self, members: &[usize], p: &RankParams) -> (f64, Vec<usize>) {
        if members.len() <= SET_ORACLE_EXACT_ORDER_MAX {
            let mut perm = members.to_vec();
            let mut best = (self.score(&perm, p), perm.clone());
            let mut c = vec![0usize; perm.len()];
            let mut i = 0;
            // Heap's algorithm.
            while i < perm.len() {
                if c[i] < i {
                    if i % 2 == 0 {
                        perm.swap(0, i);
                    } else {
                        perm.swap(c[i], i);
                    }
                    let s = self.score(&perm, p);
                    if s < best.0 || (s == best.0 && perm < best.1) {
                        best = (s, perm.clone());
                    }
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
            best
        } else {
            let mut order: Vec<usize> = Vec::with_capacity(members.len());
            let mut rest = members.to_vec();
            while !rest.is_empty() {
                let (k, _) = rest
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| {
                        order.push(c);
                        let s = self.score(&order, p);
                        order.pop();
                        (k, s)
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("non-empty");
                order.push(rest.remove(k));
            }
            (self.score(&order, p), order)
        }
    }
}

fn lex_less(a: &(f64, Vec<VertexId>), b: &(f64, Vec<VertexId>)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Exhaustive search for the minimum-score set of `n` admissible vertices
/// (excluding `q`) and its best ordering.
pub fn oracle_best_set(
    graph: &DocumentGraph,
    q: VertexId,
    n: usize,
    restriction: &RestrictionSet,
    params: &RankParams,
) -> Result<ScoredSet> {
    params.validate()?;
    graph.check(q)?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    let adm = restriction.admissible(graph, &[q]);
    let m = adm.len();
    if m < n {
        return Err(Error::InsufficientVertices { needed: n, available: m });
    }
    let combos = binomial(m, n);
    if combos > SET_ORACLE_MAX_COMBINATIONS {
        return Err(Error::GuardExceeded { what: "combinations", actual: combos, limit: SET_ORACLE_MAX_COMBINATIONS });
    }
    let cache = DistanceCache::new(graph);
    let rel = adm.iter().map(|&u| rel_distance(&cache, q, u, params)).collect();
    let diss = (0..m * m).into_par_iter().map(|k| diss_distance(&cache, adm[k / m], adm[k % m], params)).collect();
    let table = LegTable { rel, diss, m };

    let best = (0..=m - n)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<VertexId>)> = None;
            let mut idx: Vec<usize> = (first..first + n).collect();
            loop {
                let (score, order) = table.best_order(&idx, params);
                let cand = (score, order.iter().map(|&i| adm[i]).collect());
                if best.as_ref().is_none_or(|b| lex_less(&cand, b)) {
                    best = Some(cand);
                }
                // Next combination with the first index fixed.
                let mut j = n;
                loop {
                    if j <= 1 {
                        return best;
                    }
                    j -= 1;
                    if idx[j] < m - n + j {
                        idx[j] += 1;
                        for k in j + 1..n {
                            idx[k] = idx[k - 1] + 1;
                        }
                        break;
                    }
                }
            }
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if lex_less(&b, &a) { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        )
        .expect("at least one combination");
    Ok(ScoredSet::new(best.1, best.0))
}
