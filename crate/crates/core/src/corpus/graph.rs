use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;

use super::frontier::Frontier;
use super::vector::{cosine_distance, TermVector};
use crate::error::{Error, Result};
use crate::{OrdF64, VertexId};

/// A document prior to graph assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub vector: TermVector,
    pub out_links: Vec<VertexId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterOptions {
    /// Graphs up to this many vertices get an exact all-sources diameter.
    pub exact_threshold: usize,
    /// Double-sweep sample count above the threshold.
    pub samples: usize,
    pub seed: u64,
}

impl Default for DiameterOptions {
    fn default() -> Self {
        Self { exact_threshold: 2000, samples: 16, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterEstimate {
    pub value: f64,
    pub exact: bool,
    /// Set when the graph has no finite non-trivial path and 1.0 was assumed.
    pub degenerate: bool,
}

/// Immutable directed document graph in compressed adjacency form.
#[derive(Debug, Clone)]
pub struct DocumentGraph {
    ext_ids: Vec<String>,
    titles: Vec<String>,
    vectors: Vec<TermVector>,
    vocabulary: Vec<String>,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
    diameter: DiameterEstimate,
    id_index: HashMap<String, VertexId>,
    uniform_weights: bool,
}

impl DocumentGraph {
    /// Assembles a graph with unit edge weights. Out-links are deduplicated and
    /// self-links removed; the diameter is computed with default options.
    pub fn new(docs: Vec<Document>, vocabulary: Vec<String>) -> Result<Self> {
        Self::with_options(docs, vocabulary, |_, _| 1.0, DiameterOptions::default())
    }

    pub fn with_options<W>(
        docs: Vec<Document>,
        vocabulary: Vec<String>,
        mut edge_weight: W,
        diameter: DiameterOptions,
    ) -> Result<Self>
    where
        W: FnMut(VertexId, VertexId) -> f64,
    {
        let mut graph = Self::assemble(docs, vocabulary, |u, v| Some(edge_weight(u, v)))?;
        graph.diameter = compute_diameter(&graph, diameter);
        if graph.diameter.degenerate {
            log::warn!("graph has no finite path between distinct vertices; diameter set to 1.0");
        }
        Ok(graph)
    }

    fn assemble<W>(docs: Vec<Document>, vocabulary: Vec<String>, mut weight: W) -> Result<Self>
    where
        W: FnMut(VertexId, VertexId) -> Option<f64>,
    {
        let n = docs.len();
        let mut ext_ids = Vec::with_capacity(n);
        let mut titles = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut id_index = HashMap::with_capacity(n);
        offsets.push(0);
        let mut seen = FxHashSet::default();
        for (v, doc) in docs.into_iter().enumerate() {
            let v = v as VertexId;
            if id_index.insert(doc.id.clone(), v).is_some() {
                return Err(Error::DuplicateDocument { line: v as usize + 1, id: doc.id });
            }
            seen.clear();
            for target in doc.out_links {
                if target as usize >= n {
                    return Err(Error::VertexNotFound(target));
                }
                if target == v || !seen.insert(target) {
                    continue;
                }
                let w = weight(v, target).unwrap_or(1.0);
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidParams(format!("edge {v}->{target} has non-positive weight {w}")));
                }
                targets.push(target);
                weights.push(w);
            }
            offsets.push(targets.len());
            ext_ids.push(doc.id);
            titles.push(doc.title);
            vectors.push(doc.vector);
        }
        let uniform_weights = weights.windows(2).all(|w| w[0] == w[1]);
        Ok(Self {
            ext_ids,
            titles,
            vectors,
            vocabulary,
            offsets,
            targets,
            weights,
            diameter: DiameterEstimate { value: 1.0, exact: false, degenerate: true },
            id_index,
            uniform_weights,
        })
    }

    /// Rebuilds a graph from stored parts without recomputing the diameter.
    pub(crate) fn from_parts(
        docs: Vec<Document>,
        link_weights: Vec<Vec<f64>>,
        vocabulary: Vec<String>,
        diameter: DiameterEstimate,
    ) -> Result<Self> {
        let mut cursor: Vec<std::vec::IntoIter<f64>> = link_weights.into_iter().map(Vec::into_iter).collect();
        let mut graph = Self::assemble(docs, vocabulary, |u, _| cursor[u as usize].next())?;
        graph.diameter = diameter;
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.ext_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn mean_out_degree(&self) -> f64 {
        if self.vertex_count() == 0 {
            0.0
        } else {
            self.edge_count() as f64 / self.vertex_count() as f64
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter.value
    }

    pub fn diameter_estimate(&self) -> DiameterEstimate {
        self.diameter
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (v as usize) < self.vertex_count()
    }

    pub fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::VertexNotFound(v))
        }
    }

    pub fn ext_id(&self, v: VertexId) -> &str {
        &self.ext_ids[v as usize]
    }

    pub fn title(&self, v: VertexId) -> &str {
        &self.titles[v as usize]
    }

    pub fn vector(&self, v: VertexId) -> &TermVector {
        &self.vectors[v as usize]
    }

    pub fn lookup(&self, ext_id: &str) -> Option<VertexId> {
        self.id_index.get(ext_id).copied()
    }

    /// Out-neighbours of `v` with their edge weights.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let range = self.offsets[v as usize]..self.offsets[v as usize + 1];
        self.targets[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }

    /// True when every edge carries the same weight.
    pub fn has_uniform_weights(&self) -> bool {
        self.uniform_weights
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// A vertex can centre a query only if its term vector is non-empty.
    pub fn is_valid_center(&self, v: VertexId) -> bool {
        self.contains(v) && !self.vectors[v as usize].is_empty()
    }

    /// Text distance between two documents. Documents with an empty vector sit
    /// at distance 1.0 from everything except themselves.
    pub fn text_distance(&self, u: VertexId, v: VertexId) -> f64 {
        let (a, b) = (&self.vectors[u as usize], &self.vectors[v as usize]);
        if u == v {
            0.0
        } else if a.is_empty() || b.is_empty() {
            1.0
        } else {
            cosine_distance(a.dot(b), a.norm(), b.norm())
        }
    }

    /// Normalized directed graph distance: shortest path weight `u -> v`
    /// divided by the diameter, capped at 1.0; unreachable pairs get 1.0.
    pub fn graph_distance(&self, u: VertexId, v: VertexId) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(0.0);
        }
        Ok(self.normalize(point_to_point(self, u, v)))
    }

    pub fn normalize(&self, weight: f64) -> f64 {
        if weight.is_finite() {
            (weight / self.diameter.value).min(1.0)
        } else {
            1.0
        }
    }

    /// Order-sensitive fingerprint of the whole graph.
    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.ext_ids.hash(&mut h);
        self.titles.hash(&mut h);
        self.vocabulary.hash(&mut h);
        self.offsets.hash(&mut h);
        self.targets.hash(&mut h);
        for w in &self.weights {
            w.to_bits().hash(&mut h);
        }
        for v in &self.vectors {
            for &(t, w) in v.entries() {
                (t, w.to_bits()).hash(&mut h);
            }
            u32::MAX.hash(&mut h);
        }
        self.diameter.value.to_bits().hash(&mut h);
        h.finish()
    }

    /// Vertices whose hop distance from any of `sources` is at most `hops`,
    /// in breadth-first order with ascending ids inside each level.
    pub fn hop_ball(&self, sources: &[VertexId], hops: usize) -> Vec<(VertexId, usize)> {
        let mut depth = vec![usize::MAX; self.vertex_count()];
        let mut level: Vec<VertexId> = sources.to_vec();
        level.sort_unstable();
        level.dedup();
        for &s in &level {
            depth[s as usize] = 0;
        }
        let mut out: Vec<(VertexId, usize)> = level.iter().map(|&s| (s, 0)).collect();
        for d in 1..=hops {
            let mut next = Vec::new();
            for &u in &level {
                for (v, _) in self.out_edges(u) {
                    if depth[v as usize] == usize::MAX {
                        depth[v as usize] = d;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_unstable();
            out.extend(next.iter().map(|&v| (v, d)));
            level = next;
        }
        out
    }
}

/// Raw shortest path weights from `source` to every vertex (`INFINITY` when
/// unreachable).
pub fn shortest_paths_from(graph: &DocumentGraph, source: VertexId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.vertex_count()];
    let mut frontier = Frontier::new(graph.has_uniform_weights(), graph.vertex_count());
    dist[source as usize] = 0.0;
    frontier.push(0.0, source);
    while let Some((d, u)) = frontier.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for (v, w) in graph.out_edges(u) {
            let nd = d + w;
            if nd < dist[v as usize] {
                dist[v as usize] = nd;
                frontier.push(nd, v);
            }
        }
    }
    dist
}

fn point_to_point(graph: &DocumentGraph, source: VertexId, target: VertexId) -> f64 {
    let mut dist: HashMap<VertexId, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, 0.0);
    heap.push(Reverse((OrdF64(0.0), source)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if u == target {
            return d;
        }
        if d > dist[&u] {
            continue;
        }
        for (v, w) in graph.out_edges(u) {
            let nd = d + w;
            if dist.get(&v).is_none_or(|&old| nd < old) {
                dist.insert(v, nd);
                heap.push(Reverse((OrdF64(nd), v)));
            }
        }
    }
    f64::INFINITY
}

/// Farthest finite vertex from `source` (ties to the lower id) and its distance.
fn eccentricity(graph: &DocumentGraph, source: VertexId) -> (VertexId, f64) {
    let dist = shortest_paths_from(graph, source);
    let mut best = (source, 0.0);
    for (v, &d) in dist.iter().enumerate() {
        if d.is_finite() && d > best.1 {
            best = (v as VertexId, d);
        }
    }
    best
}

/// Exact maximum finite shortest-path weight for small graphs, repeated
/// double-sweep lower bound above `exact_threshold` vertices.
pub fn compute_diameter(graph: &DocumentGraph, opts: DiameterOptions) -> DiameterEstimate {
    let n = graph.vertex_count();
    let (value, exact) = if n <= opts.exact_threshold {
        let max = (0..n as VertexId).into_par_iter().map(|s| eccentricity(graph, s).1).reduce(|| 0.0, f64::max);
        (max, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let starts = sample(&mut rng, n, opts.samples.min(n).max(1));
        let max = starts
            .into_iter()
            .map(|s| {
                let (far, first) = eccentricity(graph, s as VertexId);
                first.max(eccentricity(graph, far).1)
            })
            .fold(0.0, f64::max);
        (max, false)
    };
    if value > 0.0 {
        DiameterEstimate { value, exact, degenerate: false }
    } else {
        DiameterEstimate { value: 1.0, exact, degenerate: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictionMode {
    AllowAll,
    Whitelist,
    Blacklist,
}

/// Filter deciding which vertices may appear in results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionSet {
    mode: RestrictionMode,
    members: FxHashSet<VertexId>,
}

impl Default for RestrictionSet {
    fn default() -> Self {
        Self::allow_all()
    }
}

impl RestrictionSet {
    pub fn allow_all() -> Self {
        Self { mode: RestrictionMode::AllowAll, members: FxHashSet::default() }
    }

    pub fn whitelist<I: IntoIterator<Item = VertexId>>(members: I) -> Self {
        Self { mode: RestrictionMode::Whitelist, members: members.into_iter().collect() }
    }

    pub fn blacklist<I: IntoIterator<Item = VertexId>>(members: I) -> Self {
        Self { mode: RestrictionMode::Blacklist, members: members.into_iter().collect() }
    }

    pub fn mode(&self) -> RestrictionMode {
        self.mode
    }

    pub fn admits(&self, v: VertexId) -> bool {
        match self.mode {
            RestrictionMode::AllowAll => true,
            RestrictionMode::Whitelist => self.members.contains(&v),
            RestrictionMode::Blacklist => !self.members.contains(&v),
        }
    }

    /// Admissible vertices of `graph` other than `exclude`, ascending.
    pub fn admissible(&self, graph: &DocumentGraph, exclude: &[VertexId]) -> Vec<VertexId> {
        (0..graph.vertex_count() as VertexId).filter(|&v| self.admits(v) && !exclude.contains(&v)).collect()
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::fixture6;
    use super::*;
    use std::collections::VecDeque;

    fn bfs(graph: &DocumentGraph, s: VertexId) -> Vec<Option<usize>> {
        let mut d = vec![None; graph.vertex_count()];
        d[s as usize] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for (v, _) in graph.out_edges(u) {
                if d[v as usize].is_none() {
                    d[v as usize] = Some(d[u as usize].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        d
    }

    fn plain(n: usize, links: &[(VertexId, VertexId)]) -> DocumentGraph {
        let docs = (0..n)
            .map(|i| Document {
                id: i.to_string(),
                title: String::new(),
                vector: TermVector::new([(0, 1.0)]),
                out_links: links.iter().filter(|l| l.0 as usize == i).map(|l| l.1).collect(),
            })
            .collect();
        DocumentGraph::new(docs, vec!["t".into()]).unwrap()
    }

    #[test]
    fn fixture_diameter_matches_bfs_oracle() {
        let g = fixture6();
        let oracle = (0..6).flat_map(|s| bfs(&g, s)).flatten().max().unwrap();
        assert_eq!(oracle, 4);
        assert_eq!(g.diameter(), 4.0);
        assert!(g.diameter_estimate().exact);
    }

    #[test]
    fn fixture_graph_distances() {
        let g = fixture6();
        for u in 0..6 {
            assert_eq!(g.graph_distance(u, u).unwrap(), 0.0);
        }
        assert_eq!(g.graph_distance(0, 1).unwrap(), 0.25);
        assert_eq!(g.graph_distance(1, 2).unwrap(), 1.0);
        assert_eq!(g.graph_distance(0, 5).unwrap(), 1.0);
        assert_eq!(g.graph_distance(0, 4).unwrap(), 0.75);
        assert!(matches!(g.graph_distance(0, 6), Err(Error::VertexNotFound(6))));
    }

    #[test]
    fn point_to_point_agrees_with_bfs_everywhere() {
        let g = fixture6();
        for s in 0..6 {
            let hops = bfs(&g, s);
            let sssp = shortest_paths_from(&g, s);
            for t in 0..6 {
                let expect = hops[t as usize].map_or(1.0, |h| h as f64 / 4.0);
                assert_eq!(g.graph_distance(s, t).unwrap(), expect);
                assert_eq!(g.normalize(sssp[t as usize]), expect);
            }
        }
    }

    #[test]
    fn degenerate_diameters() {
        let single = plain(1, &[]);
        assert_eq!(single.diameter(), 1.0);
        assert!(single.diameter_estimate().degenerate);
        let pair = plain(2, &[(0, 1)]);
        assert_eq!(pair.diameter(), 1.0);
        assert!(!pair.diameter_estimate().degenerate);
    }

    #[test]
    fn links_are_normalized() {
        let g = plain(3, &[(0, 1), (0, 1), (0, 0), (1, 2)]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_edges(0).collect::<Vec<_>>(), vec![(1, 1.0)]);
    }

    #[test]
    fn sampled_diameter_never_below_observed_distance() {
        // A directed path of 30 vertices forced through the sampled route.
        let links: Vec<_> = (0..29).map(|i| (i, i + 1)).collect();
        let docs = (0..30)
            .map(|i| Document {
                id: i.to_string(),
                title: String::new(),
                vector: TermVector::new([(0, 1.0)]),
                out_links: links.iter().filter(|l| l.0 == i).map(|l| l.1).collect(),
            })
            .collect();
        let opts = DiameterOptions { exact_threshold: 5, samples: 4, seed: 7 };
        let g = DocumentGraph::with_options(docs, vec!["t".into()], |_, _| 1.0, opts).unwrap();
        assert!(!g.diameter_estimate().exact);
        let observed = (0..30).map(|s| eccentricity(&g, s).1).fold(0.0, f64::max);
        assert!(g.diameter() <= observed);
        assert!(g.diameter() >= 1.0);
    }

    #[test]
    fn restriction_modes() {
        let white = RestrictionSet::whitelist([4]);
        let black = RestrictionSet::blacklist([4]);
        assert!(RestrictionSet::allow_all().admits(4));
        assert!(white.admits(4) && !white.admits(3));
        assert!(!black.admits(4) && black.admits(3));
        assert_eq!(white.admissible(&fixture6(), &[0]), vec![4]);
    }

    #[test]
    fn hop_ball_is_level_ordered() {
        let g = fixture6();
        assert_eq!(g.hop_ball(&[0], 1), vec![(0, 0), (1, 1), (2, 1)]);
        assert_eq!(g.hop_ball(&[0], 2).last(), Some(&(3, 2)));
    }
}
