use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_tfidf, DiameterOptions, Document, DocumentGraph, TermVector, Vocabulary};
use crate::error::{Error, Result};
use crate::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_docs: usize,
    pub links_per_doc: usize,
    pub lemmas_per_doc: usize,
    pub zipf_skew: f64,
    /// Defaults to ten times `lemmas_per_doc`.
    pub vocab_size: Option<usize>,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { num_docs: 10_000, links_per_doc: 10, lemmas_per_doc: 100, zipf_skew: 0.1, vocab_size: None, rng_seed: 0 }
    }
}

impl SynthConfig {
    pub fn vocab(&self) -> usize {
        self.vocab_size.unwrap_or(10 * self.lemmas_per_doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_docs == 0 || self.links_per_doc == 0 || self.lemmas_per_doc == 0 || self.vocab() == 0 {
            return Err(Error::InvalidParams("all synthetic counts must be at least 1".into()));
        }
        if !self.zipf_skew.is_finite() || self.zipf_skew < 0.0 {
            return Err(Error::InvalidParams(format!("zipf skew {} must be finite and >= 0", self.zipf_skew)));
        }
        if self.links_per_doc >= self.num_docs {
            return Err(Error::InvalidParams(format!(
                "links per document ({}) must be below the document count ({})",
                self.links_per_doc, self.num_docs
            )));
        }
        Ok(())
    }
}

fn lemma(rank: usize) -> String {
    format!("l{rank}")
}

/// Random directed graph with `num_docs * links_per_doc` distinct edges and
/// zipf-distributed lemmas weighted by tf-idf. Deterministic in the seed.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<DocumentGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let n = cfg.num_docs;

    let target = n * cfg.links_per_doc;
    let mut edges: FxHashSet<(VertexId, VertexId)> = FxHashSet::default();
    edges.reserve(target);
    let mut out_links: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    while edges.len() < target {
        let u = rng.random_range(0..n) as VertexId;
        let v = rng.random_range(0..n) as VertexId;
        if u != v && edges.insert((u, v)) {
            out_links[u as usize].push(v);
        }
    }

    let zipf = Zipf::new(cfg.vocab() as f64, cfg.zipf_skew).map_err(|e| Error::InvalidParams(format!("zipf: {e}")))?;
    let tokens: Vec<Vec<String>> =
        (0..n).map(|_| (0..cfg.lemmas_per_doc).map(|_| lemma(zipf.sample(&mut rng) as usize)).collect()).collect();
    let mut vocab = Vocabulary::default();
    let tfidf = build_tfidf(tokens.iter().map(Vec::as_slice), &mut vocab)?;
    let terms = vocab.into_terms();

    let docs = out_links
        .into_iter()
        .zip(tfidf.vectors)
        .enumerate()
        .map(|(i, (links, vector))| Document {
            id: format!("d{i}"),
            title: synthetic_title(&vector, &terms),
            vector,
            out_links: links,
        })
        .collect();
    DocumentGraph::with_options(docs, terms, |_, _| 1.0, DiameterOptions { seed: cfg.rng_seed, ..Default::default() })
}

/// Three heaviest lemmas, ties to the lexicographically smaller term.
fn synthetic_title(v: &TermVector, terms: &[String]) -> String {
    let mut top: Vec<(f64, &str)> = v.entries().iter().map(|&(t, w)| (w, terms[t as usize].as_str())).collect();
    top.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    top.iter().take(3).map(|t| t.1).collect::<Vec<_>>().join(" ")
}

/// Shape of a small random test graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraphSpec {
    pub vertices: usize,
    pub max_out_degree: usize,
    pub vocab: usize,
    pub max_terms: usize,
    pub seed: u64,
}

/// Small graph with uniformly random out-degrees and random term weights;
/// every vertex gets at least one term. Diameter is exact.
pub fn random_graph(spec: &RandomGraphSpec) -> Result<DocumentGraph> {
    if spec.vertices == 0 || spec.vocab == 0 || spec.max_terms == 0 {
        return Err(Error::InvalidParams("random graph needs vertices, vocabulary and terms".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.vertices;
    let docs = (0..n)
        .map(|i| {
            let degree = rng.random_range(0..=spec.max_out_degree.min(n - 1));
            let out_links = sample(&mut rng, n - 1, degree)
                .into_iter()
                .map(|t| if t >= i { t + 1 } else { t } as VertexId)
                .collect();
            let k = rng.random_range(1..=spec.max_terms.min(spec.vocab));
            let vector = TermVector::new(
                sample(&mut rng, spec.vocab, k).into_iter().map(|t| (t as u32, rng.random_range(0.1..3.0))),
            );
            Document { id: format!("v{i}"), title: format!("vertex {i}"), vector, out_links }
        })
        .collect();
    let terms = (0..spec.vocab).map(|t| format!("t{t}")).collect();
    DocumentGraph::with_options(
        docs,
        terms,
        |_, _| 1.0,
        DiameterOptions { exact_threshold: usize::MAX, ..Default::default() },
    )
}
