use std::sync::{Arc, Mutex, MutexGuard};

use rustc_hash::FxHashMap;

use crate::corpus::frontier::Frontier;
use crate::corpus::{DenseVector, DocumentGraph};
use crate::ranking::Distances;
use crate::VertexId;

pub(crate) const UNSETTLED: u32 = u32::MAX;

/// `(relevance, vertex)` pairs, ascending.
pub(crate) type RelOrder = Arc<[(f64, VertexId)]>;

/// Resumable single-source shortest path search, plus a lazy row of text
/// distances from the same source.
pub(crate) struct SourceSearch {
    pub source: VertexId,
    pub dist: Vec<f64>,
    /// Position of each vertex in `settled`, or [`UNSETTLED`].
    pub rank: Vec<u32>,
    pub settled: Vec<VertexId>,
    frontier: Frontier,
    pub relaxations: u64,
    pub exhausted: bool,
    text: Vec<f64>,
    dense: Option<DenseVector>,
    /// Vertices by ascending relevance for the keyed α, once it is known exactly.
    rel_order: Option<(u64, RelOrder)>,
}

impl SourceSearch {
    fn new(graph: &DocumentGraph, source: VertexId) -> Self {
        let n = graph.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        dist[source as usize] = 0.0;
        let mut frontier = Frontier::new(graph.has_uniform_weights(), graph.vertex_count());
        frontier.push(0.0, source);
        Self {
            source,
            dist,
            rank: vec![UNSETTLED; n],
            settled: Vec::new(),
            frontier,
            relaxations: 0,
            exhausted: false,
            text: vec![f64::NAN; n],
            dense: None,
            rel_order: None,
        }
    }

    /// Drops stale heap entries and returns the head distance, if any.
    fn head(&mut self) -> Option<f64> {
        while let Some((d, v)) = self.frontier.peek() {
            if self.rank[v as usize] != UNSETTLED || d > self.dist[v as usize] {
                self.frontier.pop();
            } else {
                return Some(d);
            }
        }
        None
    }

    /// Settles one more vertex. Returns false once nothing closer than the
    /// diameter is left.
    pub fn step(&mut self, graph: &DocumentGraph) -> bool {
        if self.exhausted {
            return false;
        }
        match self.head() {
            Some(d) if graph.normalize(d) < 1.0 => {
                let (_, u) = self.frontier.pop().expect("head exists");
                self.rank[u as usize] = self.settled.len() as u32;
                self.settled.push(u);
                for (v, w) in graph.out_edges(u) {
                    self.relaxations += 1;
                    let nd = d + w;
                    if self.rank[v as usize] == UNSETTLED && nd < self.dist[v as usize] {
                        self.dist[v as usize] = nd;
                        self.frontier.push(nd, v);
                    }
                }
                true
            }
            _ => {
                self.exhausted = true;
                self.frontier.clear();
                false
            }
        }
    }

    /// Normalized lower bound on the distance of every vertex not yet settled.
    pub fn radius(&mut self, graph: &DocumentGraph) -> f64 {
        if self.exhausted {
            return 1.0;
        }
        self.head().map_or(1.0, |d| graph.normalize(d))
    }

    /// Normalized distance to `v` if the search has settled it (1.0 once exhausted).
    pub fn leg(&self, graph: &DocumentGraph, v: VertexId) -> Option<f64> {
        if self.rank[v as usize] != UNSETTLED {
            Some(graph.normalize(self.dist[v as usize]))
        } else if self.exhausted {
            Some(1.0)
        } else {
            None
        }
    }

    /// Runs the search until `v` is settled or the search is exhausted.
    pub fn leg_to(&mut self, graph: &DocumentGraph, v: VertexId) -> f64 {
        loop {
            if let Some(g) = self.leg(graph, v) {
                return g;
            }
            self.step(graph);
        }
    }

    pub fn text(&mut self, graph: &DocumentGraph, v: VertexId) -> f64 {
        let cached = self.text[v as usize];
        if !cached.is_nan() {
            return cached;
        }
        let (s, other) = (self.source, graph.vector(v));
        let t = if s == v {
            0.0
        } else if other.is_empty() || graph.vector(s).is_empty() {
            1.0
        } else {
            let dense = self.dense.get_or_insert_with(|| DenseVector::new(graph.vector(s)));
            crate::corpus::cosine_distance(dense.dot(other), dense.norm(), other.norm())
        };
        self.text[v as usize] = t;
        t
    }

    /// Every vertex with its relevance to this source as query center,
    /// ascending, ties by id. Needs the graph legs unless `alpha` is 0.
    pub fn rel_order(&mut self, graph: &DocumentGraph, alpha: f64) -> Option<RelOrder> {
        if alpha > 0.0 && !self.exhausted {
            return None;
        }
        if let Some((key, order)) = &self.rel_order {
            if *key == alpha.to_bits() {
                return Some(order.clone());
            }
        }
        let mut order: Vec<(f64, VertexId)> = (0..graph.vertex_count() as VertexId)
            .map(|v| {
                let g = if alpha > 0.0 { self.leg(graph, v).expect("exhausted") } else { 0.0 };
                (crate::ranking::mix(alpha, g, self.text(graph, v)), v)
            })
            .collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let order: RelOrder = order.into();
        self.rel_order = Some((alpha.to_bits(), order.clone()));
        Some(order)
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }
}

pub(crate) struct PoolInner {
    pub searches: Vec<SourceSearch>,
    by_source: FxHashMap<VertexId, usize>,
}

impl PoolInner {
    pub fn search_index(&mut self, graph: &DocumentGraph, source: VertexId) -> usize {
        if let Some(&i) = self.by_source.get(&source) {
            return i;
        }
        let i = self.searches.len();
        self.searches.push(SourceSearch::new(graph, source));
        self.by_source.insert(source, i);
        i
    }

    pub fn logical_bytes(&self) -> u64 {
        self.searches.iter().map(|s| 16 * (s.frontier_len() + s.settled.len()) as u64).sum()
    }
}

/// Shortest path and text distance state shared by every iterator of one
/// query. Searches started for one iterator are resumed, never repeated, by
/// the others.
#[derive(Clone)]
pub struct SearchPool<'g> {
    graph: &'g DocumentGraph,
    inner: Arc<Mutex<PoolInner>>,
}

impl<'g> SearchPool<'g> {
    pub fn new(graph: &'g DocumentGraph) -> Self {
        Self { graph, inner: Arc::new(Mutex::new(PoolInner { searches: Vec::new(), by_source: FxHashMap::default() })) }
    }

    pub fn graph(&self) -> &'g DocumentGraph {
        self.graph
    }

    pub(crate) fn lock(&self) -> MutexGuard<'_, PoolInner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Edge relaxations per source search so far.
    pub fn relaxations(&self) -> Vec<(VertexId, u64)> {
        self.lock().searches.iter().map(|s| (s.source, s.relaxations)).collect()
    }

    pub fn total_relaxations(&self) -> u64 {
        self.lock().searches.iter().map(|s| s.relaxations).sum()
    }

    /// Census of frontier and settled entries over all searches.
    pub fn logical_bytes(&self) -> u64 {
        self.lock().logical_bytes()
    }

    pub fn same_pool(&self, other: &SearchPool<'_>) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }
}

/// Distance provider over a locked pool, for set summaries.
pub(crate) struct PoolDistances<'a, 'g> {
    pub graph: &'g DocumentGraph,
    pub inner: std::cell::RefCell<&'a mut PoolInner>,
}

impl Distances for PoolDistances<'_, '_> {
    fn graph_leg(&self, from: VertexId, to: VertexId) -> f64 {
        if from == to {
            return 0.0;
        }
        let mut inner = self.inner.borrow_mut();
        let i = inner.search_index(self.graph, from);
        inner.searches[i].leg_to(self.graph, to)
    }

    fn text_leg(&self, a: VertexId, b: VertexId) -> f64 {
        let mut inner = self.inner.borrow_mut();
        let i = inner.search_index(self.graph, a);
        inner.searches[i].text(self.graph, b)
    }
}

impl Distances for SearchPool<'_> {
    fn graph_leg(&self, from: VertexId, to: VertexId) -> f64 {
        if from == to {
            return 0.0;
        }
        let mut inner = self.lock();
        let i = inner.search_index(self.graph, from);
        inner.searches[i].leg_to(self.graph, to)
    }

    fn text_leg(&self, a: VertexId, b: VertexId) -> f64 {
        let mut inner = self.lock();
        let i = inner.search_index(self.graph, a);
        inner.searches[i].text(self.graph, b)
    }
}
