use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::graph::{DiameterOptions, Document, DocumentGraph};
use super::tfidf::{build_tfidf, Vocabulary};
use super::vector::TermVector;
use crate::error::{Error, Result};
use crate::VertexId;

/// One line of the collection format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tfidf: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub documents: usize,
    pub links: usize,
    pub dropped_links: usize,
    pub mean_out_degree: f64,
    pub empty_vectors: usize,
}

pub fn ingest_collection(path: &Path, diameter: DiameterOptions) -> Result<(DocumentGraph, IngestReport)> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CollectionRecord =
            serde_json::from_str(&line).map_err(|e| Error::Malformed { line: i + 1, message: e.to_string() })?;
        records.push((i + 1, record));
    }
    ingest_records(records, diameter)
}

/// Builds a graph from parsed records (`(line number, record)` pairs).
pub fn ingest_records(
    records: Vec<(usize, CollectionRecord)>,
    diameter: DiameterOptions,
) -> Result<(DocumentGraph, IngestReport)> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut index: HashMap<&str, VertexId> = HashMap::with_capacity(records.len());
    for (v, (line, rec)) in records.iter().enumerate() {
        match (&rec.tokens, &rec.tfidf) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::Malformed {
                    line: *line,
                    message: "exactly one of `tokens` or `tfidf` is required".into(),
                })
            }
            _ => {}
        }
        if index.insert(rec.id.as_str(), v as VertexId).is_some() {
            return Err(Error::DuplicateDocument { line: *line, id: rec.id.clone() });
        }
    }

    let mut vocab = Vocabulary::default();
    let mut vectors: Vec<Option<TermVector>> = vec![None; records.len()];
    let token_docs: Vec<usize> = (0..records.len()).filter(|&i| records[i].1.tokens.is_some()).collect();
    let mut empty_vectors = 0;
    if !token_docs.is_empty() {
        let built =
            build_tfidf(token_docs.iter().map(|&i| records[i].1.tokens.as_deref().unwrap_or_default()), &mut vocab)?;
        empty_vectors += built.empty.len();
        for (&i, v) in token_docs.iter().zip(built.vectors) {
            vectors[i] = Some(v);
        }
    }
    for (i, (_, rec)) in records.iter().enumerate() {
        if let Some(weights) = &rec.tfidf {
            let v = TermVector::new(weights.iter().map(|(t, &w)| (vocab.intern(t), w)));
            if v.is_empty() {
                empty_vectors += 1;
            }
            vectors[i] = Some(v);
        }
    }

    let mut dropped_links = 0;
    let mut docs = Vec::with_capacity(records.len());
    for ((_, rec), vector) in records.iter().zip(vectors) {
        let mut out_links = Vec::with_capacity(rec.links.len());
        for target in &rec.links {
            match index.get(target.as_str()) {
                Some(&t) => out_links.push(t),
                None => dropped_links += 1,
            }
        }
        docs.push(Document {
            id: rec.id.clone(),
            title: rec.title.clone(),
            vector: vector.unwrap_or_default(),
            out_links,
        });
    }
    let graph = DocumentGraph::with_options(docs, vocab.into_terms(), |_, _| 1.0, diameter)?;
    let report = IngestReport {
        documents: graph.vertex_count(),
        links: graph.edge_count(),
        dropped_links,
        mean_out_degree: graph.mean_out_degree(),
        empty_vectors,
    };
    Ok((graph, report))
}

/// Writes `graph` back out in the collection format, with tf-idf weights.
pub fn write_collection(graph: &DocumentGraph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let vocab = graph.vocabulary();
    for v in 0..graph.vertex_count() as VertexId {
        let record = CollectionRecord {
            id: graph.ext_id(v).to_owned(),
            title: graph.title(v).to_owned(),
            tokens: None,
            tfidf: Some(graph.vector(v).entries().iter().map(|&(t, w)| (vocab[t as usize].clone(), w)).collect()),
            links: graph.out_edges(v).map(|(t, _)| graph.ext_id(t).to_owned()).collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
