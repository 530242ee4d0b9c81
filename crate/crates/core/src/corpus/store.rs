//! Versioned binary graph file.
//!
//! ```text
//! magic "GDIVGRPH" | version u32 | vertices u64 | edges u64 | terms u64
//! diameter f64 | diameter_exact u8 | diameter_degenerate u8
//! terms:     (len u32, utf8)*
//! documents: (id, title, nnz u32, (term u32, weight f64)*, degree u32, (target u32, weight f64)*)*
//! ```
//! All integers little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::graph::{DiameterEstimate, Document, DocumentGraph};
use super::vector::TermVector;
use crate::error::{Error, Result};
use crate::VertexId;

pub const MAGIC: &[u8; 8] = b"GDIVGRPH";
pub const VERSION: u32 = 1;

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_u32::<LE>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LE>()? as usize;
    let mut buf = vec![0; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_graph<W: Write>(graph: &DocumentGraph, w: &mut W) -> Result<()> {
    let d = graph.diameter_estimate();
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u64::<LE>(graph.vertex_count() as u64)?;
    w.write_u64::<LE>(graph.edge_count() as u64)?;
    w.write_u64::<LE>(graph.vocabulary().len() as u64)?;
    w.write_f64::<LE>(d.value)?;
    w.write_u8(d.exact as u8)?;
    w.write_u8(d.degenerate as u8)?;
    for term in graph.vocabulary() {
        write_str(w, term)?;
    }
    for v in 0..graph.vertex_count() as VertexId {
        write_str(w, graph.ext_id(v))?;
        write_str(w, graph.title(v))?;
        let entries = graph.vector(v).entries();
        w.write_u32::<LE>(entries.len() as u32)?;
        for &(t, wt) in entries {
            w.write_u32::<LE>(t)?;
            w.write_f64::<LE>(wt)?;
        }
        w.write_u32::<LE>(graph.out_degree(v) as u32)?;
        for (t, wt) in graph.out_edges(v) {
            w.write_u32::<LE>(t)?;
            w.write_f64::<LE>(wt)?;
        }
    }
    Ok(())
}

pub fn read_graph<R: Read>(r: &mut R) -> Result<DocumentGraph> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a graph file (bad magic)".into()));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let vertices = r.read_u64::<LE>()? as usize;
    let edges = r.read_u64::<LE>()? as usize;
    let terms = r.read_u64::<LE>()? as usize;
    let diameter =
        DiameterEstimate { value: r.read_f64::<LE>()?, exact: r.read_u8()? != 0, degenerate: r.read_u8()? != 0 };
    let vocabulary = (0..terms).map(|_| read_str(r)).collect::<Result<Vec<_>>>()?;
    let mut docs = Vec::with_capacity(vertices);
    let mut link_weights = Vec::with_capacity(vertices);
    for _ in 0..vertices {
        let id = read_str(r)?;
        let title = read_str(r)?;
        let nnz = r.read_u32::<LE>()? as usize;
        let mut entries = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            entries.push((r.read_u32::<LE>()?, r.read_f64::<LE>()?));
        }
        let degree = r.read_u32::<LE>()? as usize;
        let mut out_links = Vec::with_capacity(degree);
        let mut weights = Vec::with_capacity(degree);
        for _ in 0..degree {
            out_links.push(r.read_u32::<LE>()?);
            weights.push(r.read_f64::<LE>()?);
        }
        docs.push(Document { id, title, vector: TermVector::new(entries), out_links });
        link_weights.push(weights);
    }
    let graph = DocumentGraph::from_parts(docs, link_weights, vocabulary, diameter)?;
    if graph.edge_count() != edges {
        return Err(Error::Format(format!("edge count mismatch: header {edges}, body {}", graph.edge_count())));
    }
    Ok(graph)
}

pub fn save_graph(graph: &DocumentGraph, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_graph(graph, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<DocumentGraph> {
    read_graph(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::graph::fixtures::fixture6;

    #[test]
    fn roundtrip_preserves_checksum() {
        let g = fixture6();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let back = read_graph(&mut buf.as_slice()).unwrap();
        assert_eq!(back.checksum(), g.checksum());
        assert_eq!(back.diameter_estimate(), g.diameter_estimate());
    }

    #[test]
    fn rejects_foreign_files() {
        let mut bytes = b"NOTAGRPH\x01\x00\x00\x00".to_vec();
        bytes.extend([0; 32]);
        assert!(matches!(read_graph(&mut bytes.as_slice()), Err(Error::Format(_))));
        let mut buf = Vec::new();
        write_graph(&fixture6(), &mut buf).unwrap();
        buf[8] = 9;
        assert!(matches!(read_graph(&mut buf.as_slice()), Err(Error::Format(_))));
    }
}
