use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::{OrdF64, VertexId};

/// Priority queue of tentative distances, popped by (distance, id).
///
/// Graphs whose edges all carry the same weight use level buckets in place of
/// the heap; both pop in the same order. A level is put in id order by a sort
/// when small and by a bitmap sweep when large.
#[derive(Debug, Clone)]
pub(crate) enum Frontier {
    Heap(BinaryHeap<Reverse<(OrdF64, VertexId)>>),
    Levels { dist: f64, current: Vec<VertexId>, pos: usize, next_dist: f64, next: Vec<VertexId>, marks: Vec<u64> },
}

impl Frontier {
    /// `vertices` bounds the ids pushed in level mode.
    pub fn new(uniform: bool, vertices: usize) -> Self {
        if uniform {
            Frontier::Levels {
                dist: 0.0,
                current: Vec::new(),
                pos: 0,
                next_dist: 0.0,
                next: Vec::new(),
                marks: vec![0; vertices.div_ceil(64)],
            }
        } else {
            Frontier::Heap(BinaryHeap::new())
        }
    }

    /// Adds an entry. In level mode `d` must equal the current level distance
    /// (only for the first push) or the next one, and an id may be pending at
    /// most once.
    pub fn push(&mut self, d: f64, v: VertexId) {
        match self {
            Frontier::Heap(h) => h.push(Reverse((OrdF64(d), v))),
            Frontier::Levels { dist, current, pos, next_dist, next, .. } => {
                if *pos >= current.len() && next.is_empty() && current.is_empty() {
                    *dist = d;
                    current.push(v);
                } else {
                    debug_assert!(next.is_empty() || *next_dist == d);
                    *next_dist = d;
                    next.push(v);
                }
            }
        }
    }

    pub fn peek(&mut self) -> Option<(f64, VertexId)> {
        match self {
            Frontier::Heap(h) => h.peek().map(|&Reverse((OrdF64(d), v))| (d, v)),
            Frontier::Levels { dist, current, pos, next_dist, next, marks } => {
                if *pos >= current.len() {
                    if next.is_empty() {
                        return None;
                    }
                    if next.len() * 16 < marks.len() * 64 {
                        next.sort_unstable();
                        std::mem::swap(current, next);
                        next.clear();
                    } else {
                        for &v in next.iter() {
                            marks[v as usize / 64] |= 1 << (v % 64);
                        }
                        current.clear();
                        for (w, word) in marks.iter_mut().enumerate() {
                            while *word != 0 {
                                current.push((w * 64) as VertexId + word.trailing_zeros());
                                *word &= *word - 1;
                            }
                        }
                        next.clear();
                    }
                    *pos = 0;
                    *dist = *next_dist;
                }
                Some((*dist, current[*pos]))
            }
        }
    }

    pub fn pop(&mut self) -> Option<(f64, VertexId)> {
        let head = self.peek()?;
        match self {
            Frontier::Heap(h) => {
                h.pop();
            }
            Frontier::Levels { pos, .. } => *pos += 1,
        }
        Some(head)
    }

    pub fn len(&self) -> usize {
        match self {
            Frontier::Heap(h) => h.len(),
            Frontier::Levels { current, pos, next, .. } => current.len() - *pos + next.len(),
        }
    }

    pub fn clear(&mut self) {
        *self = match self {
            Frontier::Heap(_) => Frontier::Heap(BinaryHeap::new()),
            Frontier::Levels { .. } => Frontier::new(true, 0),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_pop_like_the_heap() {
        let mut heap = Frontier::new(false, 0);
        let mut levels = Frontier::new(true, 200);
        for f in [&mut heap, &mut levels] {
            f.push(0.0, 9);
        }
        let mut got = [Vec::new(), Vec::new()];
        for (i, f) in [&mut heap, &mut levels].into_iter().enumerate() {
            let mut seen = [false; 200];
            seen[9] = true;
            while let Some((d, v)) = f.pop() {
                got[i].push((d, v));
                for u in [v * 3 % 199, v / 2, (v + 1) % 200, v * 7 % 193] {
                    if !seen[u as usize] {
                        seen[u as usize] = true;
                        f.push(d + 1.0, u);
                    }
                }
            }
        }
        assert_eq!(got[0], got[1]);
        assert!(got[0].len() > 100);
        assert_eq!(levels.len(), 0);
    }
}
