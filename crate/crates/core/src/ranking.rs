//! Trade-off parameters, the two set ranking functions and their marginal gains.
//!
//! Lower scores are better. Relevance distances enter positively and pairwise
//! dissimilarity enters negatively:
//!
//! ```text
//! MIN_AVG  σ(S) = λ/N · Σ d_rel(q,u)  −  (1−λ)/(N(N−1)) · Σ_{v≺w} d_diss(v,w)
//! MIN_MAX  σ(S) = λ · max d_rel(q,u)  −  (1−λ) · min_{v≺w} d_diss(v,w)
//! ```
//!
//! `v ≺ w` is insertion order; the graph leg of `d_diss` runs from the earlier
//! item to the later one. With a single item the pairwise term is zero.

use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{shortest_paths_from, DocumentGraph};
use crate::error::{Error, Result};
use crate::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "avg", alias = "MIN_AVG")]
    MinAvg,
    #[serde(rename = "max", alias = "MIN_MAX")]
    MinMax,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::MinAvg => "MIN_AVG",
            Variant::MinMax => "MIN_MAX",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "avg" | "min_avg" | "minavg" => Ok(Variant::MinAvg),
            "max" | "min_max" | "minmax" => Ok(Variant::MinMax),
            other => Err(Error::InvalidParams(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankParams {
    /// Relevance versus dissimilarity.
    pub lambda: f64,
    /// Graph versus text inside relevance.
    pub alpha: f64,
    /// Graph versus text inside dissimilarity.
    pub beta: f64,
    pub variant: Variant,
}

impl Default for RankParams {
    fn default() -> Self {
        Self { lambda: 0.8, alpha: 0.0, beta: 0.8, variant: Variant::MinAvg }
    }
}

impl RankParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64, variant: Variant) -> Result<Self> {
        let p = Self { lambda, alpha, beta, variant };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Affine mix used for both relevance (weight α) and dissimilarity (weight β).
#[inline]
pub fn mix(weight: f64, graph: f64, text: f64) -> f64 {
    weight * graph + (1.0 - weight) * text
}

/// Source of the two primitive distances, both already in `[0, 1]`.
pub trait Distances {
    fn graph_leg(&self, from: VertexId, to: VertexId) -> f64;
    fn text_leg(&self, a: VertexId, b: VertexId) -> f64;
}

/// Point-to-point searches on every call; fine for a handful of lookups.
impl Distances for DocumentGraph {
    fn graph_leg(&self, from: VertexId, to: VertexId) -> f64 {
        self.graph_distance(from, to).unwrap_or(1.0)
    }

    fn text_leg(&self, a: VertexId, b: VertexId) -> f64 {
        self.text_distance(a, b)
    }
}

/// Memoized single-source distance rows.
pub struct DistanceCache<'g> {
    graph: &'g DocumentGraph,
    rows: RwLock<FxHashMap<VertexId, Arc<[f64]>>>,
}

impl<'g> DistanceCache<'g> {
    pub fn new(graph: &'g DocumentGraph) -> Self {
        Self { graph, rows: RwLock::default() }
    }

    pub fn graph(&self) -> &'g DocumentGraph {
        self.graph
    }

    /// Normalized distances from `source` to every vertex.
    pub fn row(&self, source: VertexId) -> Arc<[f64]> {
        if let Some(row) = self.rows.read().unwrap().get(&source) {
            return row.clone();
        }
        let row: Arc<[f64]> =
            shortest_paths_from(self.graph, source).into_iter().map(|d| self.graph.normalize(d)).collect();
        self.rows.write().unwrap().entry(source).or_insert(row).clone()
    }
}

impl Distances for DistanceCache<'_> {
    fn graph_leg(&self, from: VertexId, to: VertexId) -> f64 {
        if from == to {
            0.0
        } else {
            self.row(from)[to as usize]
        }
    }

    fn text_leg(&self, a: VertexId, b: VertexId) -> f64 {
        self.graph.text_distance(a, b)
    }
}

pub fn rel_distance<D: Distances + ?Sized>(d: &D, q: VertexId, u: VertexId, p: &RankParams) -> f64 {
    mix(p.alpha, weighted_graph_leg(d, p.alpha, q, u), d.text_leg(q, u))
}

/// A graph leg under weight 0 contributes exactly nothing and is not computed.
fn weighted_graph_leg<D: Distances + ?Sized>(d: &D, weight: f64, from: VertexId, to: VertexId) -> f64 {
    if weight > 0.0 {
        d.graph_leg(from, to)
    } else {
        0.0
    }
}

/// Dissimilarity of a later item `w` from an earlier item `v`.
pub fn diss_distance<D: Distances + ?Sized>(d: &D, v: VertexId, w: VertexId, p: &RankParams) -> f64 {
    mix(p.beta, weighted_graph_leg(d, p.beta, v, w), d.text_leg(v, w))
}

/// A result list in insertion order with its score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredSet {
    pub items: Vec<VertexId>,
    pub score: f64,
}

impl ScoredSet {
    pub fn new(items: Vec<VertexId>, score: f64) -> Self {
        Self { items, score }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.items.contains(&v)
    }

    /// Membership key independent of insertion order.
    pub fn canonical(&self) -> Vec<VertexId> {
        canonical(&self.items)
    }
}

pub fn canonical(items: &[VertexId]) -> Vec<VertexId> {
    let mut key = items.to_vec();
    key.sort_unstable();
    key
}

/// Aggregates of a set that the gain of any addendum depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetSummary {
    pub len: usize,
    /// Σ d_rel (MIN_AVG) or max d_rel (MIN_MAX); `-inf` max for the empty set.
    pub rel: f64,
    /// Σ_{v≺w} d_diss (MIN_AVG) or min d_diss (MIN_MAX); `+inf` min below two items.
    pub pairs: f64,
    pub score: f64,
}

impl SetSummary {
    pub fn of<D: Distances + ?Sized>(d: &D, q: VertexId, items: &[VertexId], p: &RankParams) -> Self {
        let rels = items.iter().map(|&u| rel_distance(d, q, u, p));
        let pairs = items
            .iter()
            .enumerate()
            .flat_map(|(i, &v)| items[i + 1..].iter().map(move |&w| (v, w)))
            .map(|(v, w)| diss_distance(d, v, w, p));
        Self::from_legs(items.len(), rels, pairs, p)
    }

    /// Summary from precomputed relevance distances (set order) and pairwise
    /// dissimilarities (`v ≺ w` pairs in row-major order).
    pub fn from_legs<R, P>(n: usize, rels: R, pairs: P, p: &RankParams) -> Self
    where
        R: Iterator<Item = f64>,
        P: Iterator<Item = f64>,
    {
        let (rel, pairs) = match p.variant {
            Variant::MinAvg => (rels.fold(0.0, |a, b| a + b), pairs.fold(0.0, |a, b| a + b)),
            Variant::MinMax => (rels.fold(f64::NEG_INFINITY, f64::max), pairs.fold(f64::INFINITY, f64::min)),
        };
        let score = Self::score_from(n, rel, pairs, p);
        Self { len: n, rel, pairs, score }
    }

    fn score_from(n: usize, rel: f64, pairs: f64, p: &RankParams) -> f64 {
        let lambda = p.lambda;
        match (p.variant, n) {
            (_, 0) => 0.0,
            (Variant::MinAvg, 1) => lambda * rel,
            (Variant::MinAvg, _) => {
                let nf = n as f64;
                lambda / nf * rel - (1.0 - lambda) / (nf * (nf - 1.0)) * pairs
            }
            (Variant::MinMax, 1) => lambda * rel,
            (Variant::MinMax, _) => lambda * rel - (1.0 - lambda) * pairs,
        }
    }
}

/// Which of the four MIN_MAX branches an addendum falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinMaxCase {
    /// Neither the maximum relevance distance nor the minimum spread moves.
    Unchanged,
    /// Only the maximum relevance distance grows.
    RelevanceWorsens,
    /// Only the minimum pairwise dissimilarity shrinks.
    SpreadShrinks,
    Both,
}

/// Marginal gain of appending `u` to a fixed set, as a function of
/// `d_rel(q,u)` and the aggregate (sum or min) of `d_diss(s,u)` over the set.
///
/// Non-decreasing in the relevance leg and non-increasing in the
/// dissimilarity aggregate, including under floating-point rounding, so it can
/// be evaluated on optimistic legs to obtain lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainModel {
    summary: SetSummary,
    lambda: f64,
    variant: Variant,
    // MIN_AVG: gain = offset + rel_coef * rel − diss_coef * Σ diss
    offset: f64,
    rel_coef: f64,
    diss_coef: f64,
}

impl GainModel {
    pub fn new(summary: SetSummary, p: &RankParams) -> Self {
        let n = summary.len as f64;
        let lambda = p.lambda;
        let (offset, rel_coef, diss_coef) = match (p.variant, summary.len) {
            (Variant::MinAvg, 0) => (0.0, lambda, 0.0),
            (Variant::MinAvg, _) => {
                let rel_coef = lambda / (n + 1.0);
                let diss_coef = (1.0 - lambda) / ((n + 1.0) * n);
                (rel_coef * summary.rel - diss_coef * summary.pairs - summary.score, rel_coef, diss_coef)
            }
            (Variant::MinMax, _) => (0.0, 0.0, 0.0),
        };
        Self { summary, lambda, variant: p.variant, offset, rel_coef, diss_coef }
    }

    pub fn for_set<D: Distances + ?Sized>(d: &D, q: VertexId, items: &[VertexId], p: &RankParams) -> Self {
        Self::new(SetSummary::of(d, q, items, p), p)
    }

    pub fn summary(&self) -> &SetSummary {
        &self.summary
    }

    pub fn set_len(&self) -> usize {
        self.summary.len
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Gain for relevance leg `rel` and dissimilarity aggregate `diss`
    /// (ignored for the empty set).
    pub fn gain(&self, rel: f64, diss: f64) -> f64 {
        self.gain_with_case(rel, diss).0
    }

    pub fn gain_with_case(&self, rel: f64, diss: f64) -> (f64, Option<MinMaxCase>) {
        let lambda = self.lambda;
        let s = &self.summary;
        match (self.variant, s.len) {
            (_, 0) => (lambda * rel, None),
            (Variant::MinAvg, _) => (self.offset + self.rel_coef * rel - self.diss_coef * diss, None),
            (Variant::MinMax, 1) => (lambda * (rel.max(s.rel) - s.rel) - (1.0 - lambda) * diss, None),
            (Variant::MinMax, _) => {
                let rel_grows = rel > s.rel;
                let spread_shrinks = diss < s.pairs;
                let rel_part = lambda * (rel - s.rel);
                let spread_part = (1.0 - lambda) * (s.pairs - diss);
                let case = match (rel_grows, spread_shrinks) {
                    (false, false) => (0.0, MinMaxCase::Unchanged),
                    (true, false) => (rel_part, MinMaxCase::RelevanceWorsens),
                    (false, true) => (spread_part, MinMaxCase::SpreadShrinks),
                    (true, true) => (rel_part + spread_part, MinMaxCase::Both),
                };
                (case.0, Some(case.1))
            }
        }
    }

    /// Folds one dissimilarity leg into the aggregate the variant expects.
    #[inline]
    pub fn fold_diss(&self, acc: f64, leg: f64) -> f64 {
        match self.variant {
            Variant::MinAvg => acc + leg,
            Variant::MinMax => acc.min(leg),
        }
    }

    /// Identity element of [`GainModel::fold_diss`].
    #[inline]
    pub fn diss_identity(&self) -> f64 {
        match self.variant {
            Variant::MinAvg => 0.0,
            Variant::MinMax => f64::INFINITY,
        }
    }
}

fn check_items(graph_len: Option<usize>, items: &[VertexId]) -> Result<()> {
    for (i, &v) in items.iter().enumerate() {
        if graph_len.is_some_and(|n| v as usize >= n) {
            return Err(Error::VertexNotFound(v));
        }
        if items[..i].contains(&v) {
            return Err(Error::AlreadyInSet(v));
        }
    }
    Ok(())
}

/// σ_q(S) for a non-empty, duplicate-free ordered set.
pub fn score_of<D: Distances + ?Sized>(d: &D, q: VertexId, items: &[VertexId], p: &RankParams) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::EmptySet);
    }
    check_items(None, items)?;
    Ok(SetSummary::of(d, q, items, p).score)
}

/// `score_of(S + u) − score_of(S)` via the incremental forms.
pub fn marginal_gain<D: Distances + ?Sized>(
    d: &D,
    q: VertexId,
    items: &[VertexId],
    u: VertexId,
    p: &RankParams,
) -> Result<f64> {
    marginal_gain_with_case(d, q, items, u, p).map(|(g, _)| g)
}

pub fn marginal_gain_with_case<D: Distances + ?Sized>(
    d: &D,
    q: VertexId,
    items: &[VertexId],
    u: VertexId,
    p: &RankParams,
) -> Result<(f64, Option<MinMaxCase>)> {
    check_items(None, items)?;
    if items.contains(&u) {
        return Err(Error::AlreadyInSet(u));
    }
    let model = GainModel::for_set(d, q, items, p);
    Ok(gain_of(d, &model, q, items, u, p))
}

/// Gain of `u` under a prepared model; legs are folded in set order.
pub fn gain_of<D: Distances + ?Sized>(
    d: &D,
    model: &GainModel,
    q: VertexId,
    items: &[VertexId],
    u: VertexId,
    p: &RankParams,
) -> (f64, Option<MinMaxCase>) {
    let rel = rel_distance(d, q, u, p);
    let diss = items.iter().fold(model.diss_identity(), |acc, &s| model.fold_diss(acc, diss_distance(d, s, u, p)));
    model.gain_with_case(rel, diss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::fixture6;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn params(lambda: f64, alpha: f64, beta: f64, variant: Variant) -> RankParams {
        RankParams::new(lambda, alpha, beta, variant).unwrap()
    }

    #[test]
    fn rejects_out_of_range_params() {
        assert!(RankParams::new(1.2, 0.0, 0.0, Variant::MinAvg).is_err());
        assert!(RankParams::new(0.5, -0.1, 0.0, Variant::MinMax).is_err());
        assert!("avg".parse::<Variant>().is_ok() && "max".parse::<Variant>().is_ok());
        assert!("median".parse::<Variant>().is_err());
    }

    #[test]
    fn relevance_distance_examples() {
        let g = fixture6();
        let text_only = params(0.5, 0.0, 0.5, Variant::MinAvg);
        assert_eq!(rel_distance(&g, 0, 2, &text_only), 1.0);
        assert_eq!(rel_distance(&g, 0, 1, &text_only), 0.0);
        assert_eq!(rel_distance(&g, 1, 2, &params(0.5, 1.0, 0.5, Variant::MinAvg)), 1.0);
        // q=0, u=3, α=0.5: 0.5·(2/4) + 0.5·(1 − 1/√2)
        let expect = 0.5 * 0.5 + 0.5 * (1.0 - 1.0 / 2f64.sqrt());
        let got = rel_distance(&g, 0, 3, &params(0.5, 0.5, 0.5, Variant::MinAvg));
        assert!((got - expect).abs() < EPS);
        assert!((got - 0.396447).abs() < 1e-6);
    }

    #[test]
    fn dissimilarity_distance_examples() {
        let g = fixture6();
        assert_eq!(diss_distance(&g, 0, 3, &params(0.5, 0.0, 0.0, Variant::MinAvg)), g.text_distance(0, 3));
        assert_eq!(diss_distance(&g, 3, 3, &params(0.5, 0.0, 1.0, Variant::MinAvg)), 0.0);
        assert_eq!(diss_distance(&g, 1, 2, &params(0.5, 0.0, 0.8, Variant::MinAvg)), 1.0);
    }

    #[test]
    fn score_examples() {
        let g = fixture6();
        let p = params(0.8, 0.0, 0.8, Variant::MinAvg);
        // 0.4·(0 + 1) − 0.1·1.0
        assert!((score_of(&g, 0, &[1, 2], &p).unwrap() - 0.3).abs() < EPS);
        assert_eq!(score_of(&g, 0, &[1], &params(0.8, 0.0, 0.8, Variant::MinMax)).unwrap(), 0.0);
        assert!(matches!(score_of(&g, 0, &[], &p), Err(Error::EmptySet)));
        assert!(matches!(score_of(&g, 0, &[1, 1], &p), Err(Error::AlreadyInSet(1))));
    }

    #[test]
    fn gain_examples() {
        let g = fixture6();
        let p = params(0.8, 0.0, 0.8, Variant::MinAvg);
        assert!((marginal_gain(&g, 0, &[1], 2, &p).unwrap() - 0.3).abs() < EPS);
        assert!(matches!(marginal_gain(&g, 0, &[1], 1, &p), Err(Error::AlreadyInSet(1))));
        let single = score_of(&g, 0, &[3], &p).unwrap();
        let pair = score_of(&g, 0, &[3, 4], &p).unwrap();
        assert!((marginal_gain(&g, 0, &[3], 4, &p).unwrap() - (pair - single)).abs() < EPS);
    }

    #[test]
    fn min_max_case_one_is_zero() {
        let g = fixture6();
        // Text only. S = (2, 5): max rel = 1, min spread = 1. Vertex 4 has
        // rel 1 and spread 1 from both, so nothing moves.
        let p = params(0.5, 0.0, 0.0, Variant::MinMax);
        let (gain, case) = marginal_gain_with_case(&g, 0, &[2, 5], 4, &p).unwrap();
        assert_eq!(case, Some(MinMaxCase::Unchanged));
        assert_eq!(gain, 0.0);
    }

    #[test]
    fn lambda_extremes_ignore_the_other_mix() {
        let g = fixture6();
        for variant in [Variant::MinAvg, Variant::MinMax] {
            let a = score_of(&g, 0, &[3, 1, 4], &params(1.0, 0.3, 0.1, variant)).unwrap();
            let b = score_of(&g, 0, &[3, 1, 4], &params(1.0, 0.3, 0.9, variant)).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
            let a = score_of(&g, 0, &[3, 1, 4], &params(0.0, 0.2, 0.5, variant)).unwrap();
            let b = score_of(&g, 0, &[3, 1, 4], &params(0.0, 0.7, 0.5, variant)).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn cache_agrees_with_point_to_point() {
        let g = fixture6();
        let cache = DistanceCache::new(&g);
        for u in 0..6 {
            for v in 0..6 {
                assert_eq!(cache.graph_leg(u, v), g.graph_leg(u, v));
            }
        }
    }

    fn arb_case() -> impl Strategy<Value = (Vec<VertexId>, VertexId, RankParams)> {
        let p = (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, any::<bool>())
            .prop_map(|(l, a, b, m)| params(l, a, b, if m { Variant::MinMax } else { Variant::MinAvg }));
        (Just((1..6).collect::<Vec<VertexId>>()).prop_shuffle(), 0..4usize, p)
            .prop_map(|(perm, k, p)| (perm[..k].to_vec(), perm[k], p))
    }

    proptest! {
        #[test]
        fn gain_is_score_difference((set, u, p) in arb_case()) {
            let g = fixture6();
            let before = if set.is_empty() { 0.0 } else { score_of(&g, 0, &set, &p).unwrap() };
            let mut after_items = set.clone();
            after_items.push(u);
            let after = score_of(&g, 0, &after_items, &p).unwrap();
            let gain = marginal_gain(&g, 0, &set, u, &p).unwrap();
            prop_assert!((gain - (after - before)).abs() < 1e-9);
        }

        #[test]
        fn min_max_score_is_attained_by_members((set, u, p) in arb_case()) {
            let g = fixture6();
            let mut items = set;
            items.push(u);
            let p = RankParams { variant: Variant::MinMax, ..p };
            let score = score_of(&g, 0, &items, &p).unwrap();
            let rels: Vec<f64> = items.iter().map(|&x| rel_distance(&g, 0, x, &p)).collect();
            let mut spreads = vec![0.0];
            for i in 0..items.len() {
                for j in i + 1..items.len() {
                    spreads.push(diss_distance(&g, items[i], items[j], &p));
                }
            }
            let hit = rels.iter().any(|&a| spreads.iter().any(|&b| {
                (p.lambda * a - (1.0 - p.lambda) * b - score).abs() < 1e-12
            }));
            prop_assert!(hit);
        }
    }
}
