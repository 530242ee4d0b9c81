//! Request and response shapes shared by the HTTP service, the CLI and the C ABI.

use serde::{Deserialize, Serialize};

use crate::bench::{resolve_center, resolve_query_center};
use crate::corpus::{DocumentGraph, RestrictionSet};
use crate::error::{Error, Result};
use crate::pipeline::{diversify_run, PipelineConfig};
use crate::ranking::{marginal_gain, rel_distance, DistanceCache, RankParams, Variant};
use crate::VertexId;

/// Vertices returned by a neighborhood request at most.
pub const NEIGHBORHOOD_CAP: usize = 200;
/// Largest hop radius a neighborhood request may ask for.
pub const MAX_NEIGHBORHOOD_HOPS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiversifyRequest {
    /// Free text resolved to a center by title and content.
    pub query: Option<String>,
    /// External document id of the center.
    pub center_id: Option<String>,
    pub n: usize,
    pub kg: usize,
    pub kc: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub variant: Variant,
    pub td_ms: u64,
    pub tc_ms: Option<u64>,
}

impl Default for DiversifyRequest {
    fn default() -> Self {
        let p = RankParams::default();
        let c = PipelineConfig::default();
        Self {
            query: None,
            center_id: None,
            n: c.n,
            kg: c.k_g,
            kc: c.k_c,
            lambda: p.lambda,
            alpha: p.alpha,
            beta: p.beta,
            variant: p.variant,
            td_ms: c.t_d_ms,
            tc_ms: c.t_c_ms,
        }
    }
}

impl DiversifyRequest {
    pub fn params(&self) -> Result<RankParams> {
        RankParams::new(self.lambda, self.alpha, self.beta, self.variant)
    }

    pub fn config(&self) -> Result<PipelineConfig> {
        let cfg = PipelineConfig {
            n: self.n,
            k_g: self.kg,
            k_c: self.kc,
            t_d_ms: self.td_ms,
            t_c_ms: self.tc_ms,
            max_iterations: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The center named by `center_id`, or resolved from `query`.
    pub fn center(&self, graph: &DocumentGraph) -> Result<VertexId> {
        match (&self.center_id, &self.query) {
            (Some(id), None) => graph.lookup(id).ok_or_else(|| Error::DocumentNotFound(id.clone())),
            (None, Some(text)) => resolve_query_center(graph, text),
            _ => Err(Error::InvalidParams("give exactly one of query and center_id".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    pub id: String,
    pub title: String,
    pub rel_distance: f64,
    /// Gain of the item over the items listed before it.
    pub marginal_gain: f64,
    /// Fewest links from the center, absent when unreachable.
    pub hops_from_q: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub greedy_ms: f64,
    pub hillclimb_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversifyResponse {
    pub center_id: String,
    pub center_title: String,
    pub variant: Variant,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub kg: usize,
    pub kc: usize,
    pub items: Vec<ResultItem>,
    pub score: f64,
    pub timings: Timings,
}

pub fn diversify_request(graph: &DocumentGraph, req: &DiversifyRequest) -> Result<DiversifyResponse> {
    let q = req.center(graph)?;
    diversify_at(graph, q, req)
}

/// Runs a request for an already chosen center; the center fields of `req`
/// are ignored.
pub fn diversify_at(graph: &DocumentGraph, q: VertexId, req: &DiversifyRequest) -> Result<DiversifyResponse> {
    let p = req.params()?;
    let cfg = req.config()?;
    let run = diversify_run(graph, q, &RestrictionSet::allow_all(), &cfg, &p)?;

    let cache = DistanceCache::new(graph);
    let hops = hop_distances(graph, q);
    let items = run
        .result
        .items
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            Ok(ResultItem {
                id: graph.ext_id(v).to_string(),
                title: graph.title(v).to_string(),
                rel_distance: rel_distance(&cache, q, v, &p),
                marginal_gain: marginal_gain(&cache, q, &run.result.items[..i], v, &p)?,
                hops_from_q: hops[v as usize],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    Ok(DiversifyResponse {
        center_id: graph.ext_id(q).to_string(),
        center_title: graph.title(q).to_string(),
        variant: p.variant,
        lambda: p.lambda,
        alpha: p.alpha,
        beta: p.beta,
        n: cfg.n,
        kg: cfg.k_g,
        kc: cfg.k_c,
        items,
        score: run.result.score,
        timings: Timings {
            greedy_ms: ms(run.greedy.elapsed),
            hillclimb_ms: ms(run.hillclimb.elapsed),
            total_ms: ms(run.greedy.elapsed + run.hillclimb.elapsed),
        },
    })
}

/// CLI form: `q` is an external id or free text.
pub fn diversify_text_or_id(graph: &DocumentGraph, q: &str, req: &DiversifyRequest) -> Result<DiversifyResponse> {
    diversify_at(graph, resolve_center(graph, q)?, req)
}

fn hop_distances(graph: &DocumentGraph, q: VertexId) -> Vec<Option<usize>> {
    let mut hops = vec![None; graph.vertex_count()];
    for (v, h) in graph.hop_ball(&[q], usize::MAX) {
        hops[v as usize] = Some(h);
    }
    hops
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocView {
    pub id: String,
    pub title: String,
    pub out_degree: usize,
    pub out_links: Vec<String>,
    /// Heaviest terms first, at most ten.
    pub top_terms: Vec<TermWeight>,
}

pub fn doc_view(graph: &DocumentGraph, id: &str) -> Result<DocView> {
    let v = graph.lookup(id).ok_or_else(|| Error::DocumentNotFound(id.to_string()))?;
    let vocab = graph.vocabulary();
    let mut terms: Vec<TermWeight> = graph
        .vector(v)
        .entries()
        .iter()
        .map(|&(t, w)| TermWeight { term: vocab[t as usize].clone(), weight: w })
        .collect();
    terms.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
    terms.truncate(10);
    Ok(DocView {
        id: id.to_string(),
        title: graph.title(v).to_string(),
        out_degree: graph.out_degree(v),
        out_links: graph.out_edges(v).map(|(t, _)| graph.ext_id(t).to_string()).collect(),
        top_terms: terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborNode {
    pub id: String,
    pub title: String,
    pub hops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborEdge {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub center_id: String,
    pub hops: usize,
    pub nodes: Vec<NeighborNode>,
    pub edges: Vec<NeighborEdge>,
    /// Whether the cap cut off vertices within the radius.
    pub truncated: bool,
}

/// Subgraph induced by the nearest vertices (by hops, then id) within `hops`
/// links of `id`, capped at [`NEIGHBORHOOD_CAP`].
pub fn neighborhood(graph: &DocumentGraph, id: &str, hops: usize) -> Result<Neighborhood> {
    if hops > MAX_NEIGHBORHOOD_HOPS {
        return Err(Error::InvalidParams(format!("hops must be at most {MAX_NEIGHBORHOOD_HOPS}")));
    }
    let v = graph.lookup(id).ok_or_else(|| Error::DocumentNotFound(id.to_string()))?;
    let ball = graph.hop_ball(&[v], hops);
    let truncated = ball.len() > NEIGHBORHOOD_CAP;
    let kept = &ball[..ball.len().min(NEIGHBORHOOD_CAP)];
    let mut inside = vec![false; graph.vertex_count()];
    for &(u, _) in kept {
        inside[u as usize] = true;
    }
    let nodes = kept
        .iter()
        .map(|&(u, h)| NeighborNode { id: graph.ext_id(u).to_string(), title: graph.title(u).to_string(), hops: h })
        .collect();
    let edges = kept
        .iter()
        .flat_map(|&(u, _)| graph.out_edges(u).map(move |(t, w)| (u, t, w)))
        .filter(|&(_, t, _)| inside[t as usize])
        .map(|(u, t, w)| NeighborEdge {
            source: graph.ext_id(u).to_string(),
            target: graph.ext_id(t).to_string(),
            weight: w,
        })
        .collect();
    Ok(Neighborhood { center_id: id.to_string(), hops, nodes, edges, truncated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub documents: usize,
    pub links: usize,
    pub checksum: String,
}

pub fn health(graph: &DocumentGraph) -> Health {
    Health {
        status: "ok".into(),
        documents: graph.vertex_count(),
        links: graph.edge_count(),
        checksum: format!("{:016x}", graph.checksum()),
    }
}
