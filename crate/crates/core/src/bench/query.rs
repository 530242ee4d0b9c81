use rustc_hash::{FxHashMap, FxHashSet};

use crate::corpus::{DocumentGraph, TermVector};
use crate::error::{Error, Result};
use crate::VertexId;

/// Lower-cased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

fn jaccard(a: &FxHashSet<String>, b: &FxHashSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let common = a.intersection(b).count();
    common as f64 / (a.len() + b.len() - common) as f64
}

/// Picks the query center for free text: the valid center maximising
/// `2 * jaccard(query tokens, title tokens) + cosine(query counts, vector)`,
/// ties to the lower id.
pub fn resolve_query_center(graph: &DocumentGraph, text: &str) -> Result<VertexId> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::InvalidParams("query text has no tokens".into()));
    }
    let query: FxHashSet<String> = tokens.iter().cloned().collect();
    let ids: FxHashMap<&str, u32> =
        graph.vocabulary().iter().enumerate().map(|(i, t)| (t.as_str(), i as u32)).collect();
    let mut counts: FxHashMap<u32, f64> = FxHashMap::default();
    for t in &tokens {
        if let Some(&id) = ids.get(t.as_str()) {
            *counts.entry(id).or_default() += 1.0;
        }
    }
    let qvec = TermVector::new(counts);

    let mut best: Option<(f64, VertexId)> = None;
    for v in 0..graph.vertex_count() as VertexId {
        if !graph.is_valid_center(v) {
            continue;
        }
        let title: FxHashSet<String> = tokenize(graph.title(v)).into_iter().collect();
        let overlap = jaccard(&query, &title);
        let doc = graph.vector(v);
        let cosine = if qvec.is_empty() { 0.0 } else { qvec.dot(doc) / (qvec.norm() * doc.norm()) };
        let score = 2.0 * overlap + cosine;
        if score > 0.0 && best.is_none_or(|(b, _)| score > b) {
            best = Some((score, v));
        }
    }
    best.map(|(_, v)| v).ok_or_else(|| Error::NoMatchingCenter(text.to_string()))
}

/// Exact external id first, then free-text resolution.
pub fn resolve_center(graph: &DocumentGraph, query: &str) -> Result<VertexId> {
    match graph.lookup(query) {
        Some(v) => Ok(v),
        None => resolve_query_center(graph, query),
    }
}
