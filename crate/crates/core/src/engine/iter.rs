use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use super::pool::{PoolDistances, PoolInner, SearchPool, UNSETTLED};
use crate::corpus::{DocumentGraph, RestrictionSet};
use crate::error::{Error, Result};
use crate::ranking::{mix, DistanceCache, GainModel, RankParams};
use crate::{OrdF64, VertexId};

/// Gains closer than this are treated as tied and resolved by lower id.
pub const TIE_EPS: f64 = 1e-9;

/// Index entries whose bound is always recomputed before the scan may stop.
const HEAD_SCAN: usize = 3;

/// Settled vertices consumed per advance of one source.
const BATCH: usize = 64;

/// Environment variable that turns on the emission safety check.
pub const CHECK_BOUNDS_ENV: &str = "GRAPHDIV_CHECK_BOUNDS";

fn check_bounds_enabled() -> bool {
    static FLAG: OnceLock<bool> = OnceLock::new();
    *FLAG.get_or_init(|| std::env::var(CHECK_BOUNDS_ENV).is_ok_and(|v| !v.is_empty() && v != "0"))
}

/// One vertex returned by an iterator with its marginal gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Addendum {
    pub vertex: VertexId,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotState {
    Excluded,
    Untouched,
    Partial,
    Candidate,
    Emitted,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    state: SlotState,
    rel_known: bool,
    /// Text leg to the query center.
    t_q: f64,
    /// Dissimilarity aggregate with unknown graph legs at 1.0.
    diss: f64,
    /// Gain with an unknown relevance graph leg at 0.0; exact when complete.
    key: f64,
    /// Legs known when the slot was filed. Keys only grow as legs become
    /// known, so a key filed with fewer legs is still a lower bound.
    known: u32,
}

impl Slot {
    const EMPTY: Slot = Slot { state: SlotState::Untouched, rel_known: false, t_q: 0.0, diss: 0.0, key: 0.0, known: 0 };
}

enum Limit {
    Unseen,
    Vertex(VertexId),
}

/// Per-iterator view of the shared searches: how far each has been consumed.
struct Sources {
    pool_index: Vec<usize>,
    cursor: Vec<usize>,
    done: Vec<bool>,
}

impl Sources {
    fn knows(&self, inner: &PoolInner, i: usize, v: VertexId) -> bool {
        self.done[i] || (inner.searches[self.pool_index[i]].rank[v as usize] as usize) < self.cursor[i]
    }

    fn leg(&self, graph: &DocumentGraph, inner: &PoolInner, i: usize, v: VertexId) -> Option<f64> {
        let s = &inner.searches[self.pool_index[i]];
        let rank = s.rank[v as usize];
        if rank != UNSETTLED && (rank as usize) < self.cursor[i] {
            Some(graph.normalize(s.dist[v as usize]))
        } else if self.done[i] {
            Some(1.0)
        } else {
            None
        }
    }

    fn radius(&self, graph: &DocumentGraph, inner: &mut PoolInner, i: usize) -> f64 {
        if self.done[i] {
            return 1.0;
        }
        let s = &mut inner.searches[self.pool_index[i]];
        match s.settled.get(self.cursor[i]) {
            Some(&v) => graph.normalize(s.dist[v as usize]),
            None => s.radius(graph),
        }
    }
}

struct State {
    sources: Sources,
    model: GainModel,
    slots: Vec<Slot>,
    index: BTreeSet<(OrdF64, VertexId)>,
    candidates: BinaryHeap<Reverse<(OrdF64, VertexId)>>,
    untouched: usize,
    unseen_diss: f64,
    /// When relevance is known for every vertex, untouched vertices are
    /// admitted lazily in this order instead of through the searches.
    rel_order: Option<Arc<[(f64, VertexId)]>>,
    rel_cursor: usize,
}

impl State {
    /// Recomputes a touched vertex from the legs known so far and files it
    /// under the index or the candidates.
    fn file(&mut self, graph: &DocumentGraph, inner: &mut PoolInner, p: &RankParams, v: VertexId) {
        let src = &self.sources;
        let q_search = src.pool_index[0];
        let t_q = inner.searches[q_search].text(graph, v);
        let rel_leg = if p.alpha > 0.0 { src.leg(graph, inner, 0, v) } else { Some(0.0) };
        let mut complete = rel_leg.is_some();
        let mut known = u32::from(complete);
        let mut diss = self.model.diss_identity();
        for i in 1..src.pool_index.len() {
            let t = inner.searches[src.pool_index[i]].text(graph, v);
            let g = match src.leg(graph, inner, i, v) {
                Some(g) => {
                    known += 1;
                    g
                }
                None => {
                    complete = false;
                    1.0
                }
            };
            diss = self.model.fold_diss(diss, mix(p.beta, g, t));
        }
        let key = self.model.gain(mix(p.alpha, rel_leg.unwrap_or(0.0), t_q), diss);
        let state = if complete { SlotState::Candidate } else { SlotState::Partial };
        self.slots[v as usize] = Slot { state, rel_known: rel_leg.is_some(), t_q, diss, key, known };
        if complete {
            self.candidates.push(Reverse((OrdF64(key), v)));
        } else {
            self.index.insert((OrdF64(key), v));
        }
    }

    /// Whether legs of the partial vertex `v` became known after it was filed.
    fn stale(&self, inner: &PoolInner, p: &RankParams, v: VertexId) -> bool {
        let src = &self.sources;
        let rel = p.alpha == 0.0 || src.knows(inner, 0, v);
        let known = u32::from(rel) + (1..src.pool_index.len()).filter(|&i| src.knows(inner, i, v)).count() as u32;
        known > self.slots[v as usize].known
    }

    fn refile(&mut self, graph: &DocumentGraph, inner: &mut PoolInner, p: &RankParams, v: VertexId) {
        self.index.remove(&(OrdF64(self.slots[v as usize].key), v));
        self.file(graph, inner, p, v);
    }

    fn touch_all_untouched(&mut self, graph: &DocumentGraph, inner: &mut PoolInner, p: &RankParams) {
        if self.untouched == 0 {
            return;
        }
        let pending: Vec<VertexId> = (0..self.slots.len() as VertexId)
            .filter(|&v| self.slots[v as usize].state == SlotState::Untouched)
            .collect();
        self.untouched = 0;
        for v in pending {
            self.file(graph, inner, p, v);
        }
    }

    /// Consumes the next stretch of source `i`, running its search if this
    /// iterator has caught up with it.
    fn advance(&mut self, graph: &DocumentGraph, inner: &mut PoolInner, p: &RankParams, i: usize) {
        let search = &mut inner.searches[self.sources.pool_index[i]];
        let from = self.sources.cursor[i];
        if from == search.settled.len() {
            for _ in 0..BATCH {
                if !search.step(graph) {
                    break;
                }
            }
        }
        let to = search.settled.len().min(from + BATCH);
        let fresh: Vec<VertexId> =
            if self.rel_order.is_none() { search.settled[from..to].to_vec() } else { Vec::new() };
        self.sources.cursor[i] = to;
        let finished = to == search.settled.len() && search.exhausted;
        if finished {
            self.sources.done[i] = true;
        }
        // Partial vertices keep their older, lower keys until they reach the
        // head of the index.
        if self.rel_order.is_none() {
            for v in fresh {
                if self.slots[v as usize].state == SlotState::Untouched {
                    self.untouched -= 1;
                    self.file(graph, inner, p, v);
                }
            }
            if finished && self.sources.done.iter().all(|&d| d) {
                self.touch_all_untouched(graph, inner, p);
            }
        }
    }

    /// Moves the relevance cursor to the next untouched vertex.
    fn skip_touched(&mut self) {
        if let Some(order) = &self.rel_order {
            while self.rel_cursor < order.len()
                && self.slots[order[self.rel_cursor].1 as usize].state != SlotState::Untouched
            {
                self.rel_cursor += 1;
            }
        }
    }

    /// Files the next untouched vertices in relevance order.
    fn admit(&mut self, graph: &DocumentGraph, inner: &mut PoolInner, p: &RankParams) {
        let order = self.rel_order.clone().expect("lazy admission");
        let mut taken = 0;
        while taken < BATCH && self.rel_cursor < order.len() {
            let v = order[self.rel_cursor].1;
            self.rel_cursor += 1;
            if self.slots[v as usize].state == SlotState::Untouched {
                self.untouched -= 1;
                self.file(graph, inner, p, v);
                taken += 1;
            }
        }
        self.skip_touched();
    }

    /// Smallest optimistic gain over all vertices that are not candidates yet.
    fn min_bound(&self, inner: &PoolInner, r_q: f64, p: &RankParams) -> Option<(f64, Limit)> {
        let mut best = (self.untouched > 0).then(|| {
            let rel = match &self.rel_order {
                Some(order) => order[self.rel_cursor].0,
                None => mix(p.alpha, r_q, 0.0),
            };
            (self.model.gain(rel, self.unseen_diss), Limit::Unseen)
        });
        for (scanned, &(OrdF64(key), v)) in self.index.iter().enumerate() {
            if scanned >= HEAD_SCAN && best.as_ref().is_some_and(|b| key >= b.0) {
                break;
            }
            let slot = &self.slots[v as usize];
            // The radius only bounds vertices the center search has not settled.
            let bound = if slot.rel_known || self.sources.knows(inner, 0, v) {
                key
            } else {
                self.model.gain(mix(p.alpha, r_q, slot.t_q), slot.diss)
            };
            if best.as_ref().is_none_or(|b| bound < b.0) {
                best = Some((bound, Limit::Vertex(v)));
            }
        }
        best
    }

    fn pick_source(&self, inner: &PoolInner, p: &RankParams, limit: &Limit) -> usize {
        let src = &self.sources;
        let open = |i: &usize| !src.done[*i];
        let least = |it: &mut dyn Iterator<Item = usize>| it.min_by_key(|&i| (src.cursor[i], i));
        match *limit {
            Limit::Vertex(w) => {
                if !src.knows(inner, 0, w) {
                    return 0;
                }
                least(&mut (1..src.pool_index.len()).filter(|&i| !src.knows(inner, i, w)))
                    .expect("a partial vertex lacks some source")
            }
            Limit::Unseen => {
                if p.alpha > 0.0 && !src.done[0] {
                    return 0;
                }
                least(&mut (0..src.pool_index.len()).filter(open)).expect("untouched vertices imply an open source")
            }
        }
    }

    fn pop_band(&mut self) -> Addendum {
        let Reverse((OrdF64(head), _)) = *self.candidates.peek().expect("non-empty");
        let mut band = Vec::new();
        while let Some(&Reverse((OrdF64(g), v))) = self.candidates.peek() {
            if g > head + TIE_EPS {
                break;
            }
            self.candidates.pop();
            band.push((g, v));
        }
        let pick = band.iter().enumerate().min_by_key(|(_, &(_, v))| v).map(|(i, _)| i).unwrap_or(0);
        let (gain, vertex) = band.swap_remove(pick);
        for (g, v) in band {
            self.candidates.push(Reverse((OrdF64(g), v)));
        }
        self.slots[vertex as usize].state = SlotState::Emitted;
        Addendum { vertex, gain }
    }

    fn remaining(&self) -> usize {
        self.candidates.len() + self.index.len() + self.untouched
    }
}

/// Resumable best-first stream of addenda for a fixed query center and set.
///
/// Construction is cheap; search state is built on first use and adopts all
/// progress the shared pool has made for the same sources.
pub struct DivIterator<'g> {
    pool: SearchPool<'g>,
    q: VertexId,
    set: Vec<VertexId>,
    restriction: Arc<RestrictionSet>,
    params: RankParams,
    emitted: Vec<VertexId>,
    timeout: Option<Duration>,
    state: Option<Box<State>>,
}

impl<'g> DivIterator<'g> {
    /// Iterator with its own fresh pool.
    pub fn new(
        graph: &'g DocumentGraph,
        q: VertexId,
        set: &[VertexId],
        restriction: RestrictionSet,
        params: RankParams,
    ) -> Result<Self> {
        Self::with_pool(SearchPool::new(graph), q, set, Arc::new(restriction), params)
    }

    pub fn with_pool(
        pool: SearchPool<'g>,
        q: VertexId,
        set: &[VertexId],
        restriction: Arc<RestrictionSet>,
        params: RankParams,
    ) -> Result<Self> {
        params.validate()?;
        let graph = pool.graph();
        graph.check(q)?;
        for (i, &s) in set.iter().enumerate() {
            graph.check(s)?;
            if s == q || set[..i].contains(&s) {
                return Err(Error::AlreadySource(s));
            }
        }
        Ok(Self { pool, q, set: set.to_vec(), restriction, params, emitted: Vec::new(), timeout: None, state: None })
    }

    /// Bounds the work of each `next` call; once exceeded the best candidate
    /// found so far is returned.
    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout.filter(|t| !t.is_zero());
        self
    }

    pub fn query(&self) -> VertexId {
        self.q
    }

    pub fn set(&self) -> &[VertexId] {
        &self.set
    }

    pub fn params(&self) -> &RankParams {
        &self.params
    }

    pub fn restriction(&self) -> &Arc<RestrictionSet> {
        &self.restriction
    }

    pub fn emitted(&self) -> &[VertexId] {
        &self.emitted
    }

    pub fn pool(&self) -> &SearchPool<'g> {
        &self.pool
    }

    fn derive(&self, set: Vec<VertexId>, drop_emitted: VertexId) -> Self {
        Self {
            pool: self.pool.clone(),
            q: self.q,
            set,
            restriction: self.restriction.clone(),
            params: self.params,
            emitted: self.emitted.iter().copied().filter(|&v| v != drop_emitted).collect(),
            timeout: self.timeout,
            state: None,
        }
    }

    fn is_source(&self, v: VertexId) -> bool {
        v == self.q || self.set.contains(&v)
    }

    /// Iterator for the set extended by `s`. Search progress is shared and
    /// vertices already emitted here stay excluded; `self` is unchanged.
    pub fn expand(&self, s: VertexId) -> Result<Self> {
        self.pool.graph().check(s)?;
        if self.is_source(s) {
            return Err(Error::AlreadySource(s));
        }
        let mut set = self.set.clone();
        set.push(s);
        Ok(self.derive(set, s))
    }

    /// Iterator for the set with `out` removed and `inn` appended.
    pub fn replace(&self, out: VertexId, inn: VertexId) -> Result<Self> {
        let graph = self.pool.graph();
        graph.check(out)?;
        graph.check(inn)?;
        if !self.set.contains(&out) {
            return Err(Error::NotASource(out));
        }
        if self.is_source(inn) {
            return Err(Error::AlreadySource(inn));
        }
        let mut set: Vec<VertexId> = self.set.iter().copied().filter(|&v| v != out).collect();
        set.push(inn);
        Ok(self.derive(set, inn))
    }

    fn materialize(&mut self) {
        if self.state.is_some() {
            return;
        }
        let graph = self.pool.graph();
        let pool = self.pool.clone();
        let mut guard = pool.lock();
        let inner: &mut PoolInner = &mut guard;
        let p = self.params;

        let mut pool_index = vec![inner.search_index(graph, self.q)];
        pool_index.extend(self.set.iter().map(|&s| inner.search_index(graph, s)));
        let model = {
            let dist = PoolDistances { graph, inner: RefCell::new(&mut *inner) };
            GainModel::for_set(&dist, self.q, &self.set, &p)
        };
        let cursor: Vec<usize> = pool_index.iter().map(|&i| inner.searches[i].settled.len()).collect();
        // A graph leg under weight 0 never matters, so such sources count as done.
        let done: Vec<bool> = pool_index
            .iter()
            .enumerate()
            .map(|(k, &i)| inner.searches[i].exhausted || if k == 0 { p.alpha == 0.0 } else { p.beta == 0.0 })
            .collect();
        let rel_order = inner.searches[pool_index[0]].rel_order(graph, p.alpha);

        let mut slots = vec![Slot::EMPTY; graph.vertex_count()];
        for v in 0..slots.len() as VertexId {
            if !self.restriction.admits(v) {
                slots[v as usize].state = SlotState::Excluded;
            }
        }
        for &v in self.emitted.iter().chain(&self.set).chain([&self.q]) {
            slots[v as usize].state = SlotState::Excluded;
        }
        let untouched = slots.iter().filter(|s| s.state == SlotState::Untouched).count();
        let unseen_diss = (0..self.set.len()).fold(model.diss_identity(), |acc, _| model.fold_diss(acc, 1.0));

        let mut state = State {
            sources: Sources { pool_index, cursor, done },
            model,
            slots,
            index: BTreeSet::new(),
            candidates: BinaryHeap::new(),
            untouched,
            unseen_diss,
            rel_order,
            rel_cursor: 0,
        };

        let mut touched = Vec::new();
        let eager = if state.rel_order.is_some() { 0 } else { state.sources.pool_index.len() };
        for (i, &pi) in state.sources.pool_index.iter().enumerate().take(eager) {
            for &v in &inner.searches[pi].settled[..state.sources.cursor[i]] {
                let slot = &mut state.slots[v as usize];
                if slot.state == SlotState::Untouched {
                    slot.state = SlotState::Partial;
                    touched.push(v);
                }
            }
        }
        state.untouched -= touched.len();
        for v in touched {
            state.file(graph, inner, &p, v);
        }
        if state.rel_order.is_some() {
            state.skip_touched();
        } else if state.sources.done.iter().all(|&d| d) {
            state.touch_all_untouched(graph, inner, &p);
        }
        drop(guard);
        self.state = Some(Box::new(state));
    }

    /// Whether another admissible vertex will be emitted.
    pub fn has_next(&mut self) -> bool {
        self.materialize();
        self.state.as_ref().is_some_and(|s| s.remaining() > 0)
    }

    /// Number of admissible vertices not yet emitted.
    pub fn remaining(&mut self) -> usize {
        self.materialize();
        self.state.as_ref().map_or(0, |s| s.remaining())
    }

    fn next_addendum(&mut self) -> Option<Addendum> {
        self.materialize();
        let start = Instant::now();
        let graph = self.pool.graph();
        let pool = self.pool.clone();
        let mut guard = pool.lock();
        let inner: &mut PoolInner = &mut guard;
        let p = self.params;
        let st = self.state.as_mut().expect("materialized");
        loop {
            let r_q = st.sources.radius(graph, inner, 0);
            let bound = st.min_bound(inner, r_q, &p);
            if let Some(&Reverse((OrdF64(head), _))) = st.candidates.peek() {
                let clear = bound.as_ref().is_none_or(|b| b.0 > head + TIE_EPS);
                let timed_out = self.timeout.is_some_and(|t| start.elapsed() >= t);
                if clear || timed_out {
                    let out = st.pop_band();
                    if clear && check_bounds_enabled() {
                        drop(guard);
                        self.check_emission(out);
                    }
                    self.emitted.push(out.vertex);
                    return Some(out);
                }
            }
            let (_, limit) = bound?;
            match limit {
                Limit::Unseen if st.rel_order.is_some() => {
                    st.admit(graph, inner, &p);
                    continue;
                }
                Limit::Vertex(v) if st.stale(inner, &p, v) => {
                    st.refile(graph, inner, &p, v);
                    continue;
                }
                _ => {}
            }
            let i = st.pick_source(inner, &p, &limit);
            st.advance(graph, inner, &p, i);
        }
    }

    /// Emission safety check: the returned gain is minimal among the
    /// remaining admissible vertices, tie band and id order included.
    fn check_emission(&self, out: Addendum) {
        let graph = self.pool.graph();
        let cache = DistanceCache::new(graph);
        let st = self.state.as_ref().expect("materialized");
        let model = GainModel::for_set(&cache, self.q, &self.set, &self.params);
        let gain = |v| crate::ranking::gain_of(&cache, &model, self.q, &self.set, v, &self.params).0;
        let mut gains = vec![(out.vertex, gain(out.vertex))];
        for (v, slot) in st.slots.iter().enumerate() {
            let v = v as VertexId;
            if !matches!(slot.state, SlotState::Untouched | SlotState::Partial | SlotState::Candidate) {
                continue;
            }
            let g = gain(v);
            if slot.state != SlotState::Untouched {
                assert!(slot.key <= g, "key {} of {v} exceeds its gain {g}", slot.key);
            }
            gains.push((v, g));
        }
        assert_eq!(gains[0].1.to_bits(), out.gain.to_bits(), "emitted gain of {} is not exact", out.vertex);
        let min = gains.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
        let pick = gains.iter().filter(|g| g.1 <= min + TIE_EPS).map(|g| g.0).min();
        assert_eq!(pick, Some(out.vertex), "emitted {} with gain {}, expected {pick:?}", out.vertex, out.gain);
    }

    /// Edge relaxations of each of this iterator's sources, in source order.
    pub fn relaxations(&self) -> Vec<(VertexId, u64)> {
        let all = self.pool.relaxations();
        std::iter::once(self.q)
            .chain(self.set.iter().copied())
            .map(|s| (s, all.iter().find(|r| r.0 == s).map_or(0, |r| r.1)))
            .collect()
    }

    /// Census of this iterator's structures plus the searches it uses.
    /// Units: index entry 24, candidate 16, emitted id 8, frontier or settled
    /// entry 16. An iterator that has not been used reports 0.
    pub fn logical_bytes(&self) -> u64 {
        let Some(st) = self.state.as_ref() else { return 0 };
        let inner = self.pool.lock();
        let searches: u64 = st
            .sources
            .pool_index
            .iter()
            .map(|&i| 16 * (inner.searches[i].frontier_len() + inner.searches[i].settled.len()) as u64)
            .sum();
        self.own_logical_bytes() + searches
    }

    /// Census of this iterator's own structures, excluding the shared searches.
    pub fn own_logical_bytes(&self) -> u64 {
        self.state.as_ref().map_or(0, |st| {
            24 * st.index.len() as u64 + 16 * st.candidates.len() as u64 + 8 * self.emitted.len() as u64
        })
    }
}

impl Iterator for DivIterator<'_> {
    type Item = Addendum;

    fn next(&mut self) -> Option<Addendum> {
        self.next_addendum()
    }
}
