#![allow(dead_code)]

use graphdiv::corpus::{Document, DocumentGraph, TermVector};
use graphdiv::VertexId;

/// Six vertices, unit edges 0->1, 0->2, 1->3, 2->3, 3->4, 4->5 (diameter 4).
/// Terms: 0 {a}, 1 {a}, 2 {b}, 3 {a, b}, 4 {c}, 5 {d, e}.
pub fn fixture6() -> DocumentGraph {
    let vocab = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
    let vec = |terms: &[u32]| TermVector::new(terms.iter().map(|&t| (t, 1.0)));
    let links: [&[VertexId]; 6] = [&[1, 2], &[3], &[3], &[4], &[5], &[]];
    let vectors = [vec(&[0]), vec(&[0]), vec(&[1]), vec(&[0, 1]), vec(&[2]), vec(&[3, 4])];
    let docs = links
        .iter()
        .zip(vectors)
        .enumerate()
        .map(|(i, (l, v))| Document {
            id: format!("d{i}"),
            title: format!("doc {i}"),
            vector: v,
            out_links: l.to_vec(),
        })
        .collect();
    DocumentGraph::new(docs, vocab).unwrap()
}
