use std::collections::HashMap;

use super::vector::{TermId, TermVector};
use crate::error::{Error, Result};

/// Term string interner; ids are assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, TermId>,
}

impl Vocabulary {
    pub fn intern(&mut self, term: &str) -> TermId {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.to_owned());
        self.index.insert(term.to_owned(), id);
        id
    }

    pub fn get(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn into_terms(self) -> Vec<String> {
        self.terms
    }
}

#[derive(Debug)]
pub struct TfIdf {
    pub vectors: Vec<TermVector>,
    /// Positions (in input order) of documents whose vector came out empty.
    pub empty: Vec<usize>,
}

/// Weights each token by `tf * ln(N / df)`. Terms present in every document
/// get weight zero and are not stored.
pub fn build_tfidf<'a, I>(docs: I, vocab: &mut Vocabulary) -> Result<TfIdf>
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut counts: Vec<HashMap<TermId, u32>> = Vec::new();
    for tokens in docs {
        let mut tf = HashMap::new();
        for token in tokens {
            *tf.entry(vocab.intern(token)).or_insert(0) += 1;
        }
        counts.push(tf);
    }
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df = vec![0u32; vocab.len()];
    for tf in &counts {
        for &term in tf.keys() {
            df[term as usize] += 1;
        }
    }
    let n = counts.len() as f64;
    let mut empty = Vec::new();
    let vectors = counts
        .into_iter()
        .enumerate()
        .map(|(i, tf)| {
            let v = TermVector::new(tf.into_iter().map(|(t, c)| (t, c as f64 * (n / df[t as usize] as f64).ln())));
            if v.is_empty() {
                empty.push(i);
            }
            v
        })
        .collect();
    if !empty.is_empty() {
        log::warn!("{} document(s) have an empty tf-idf vector and cannot centre a query", empty.len());
    }
    Ok(TfIdf { vectors, empty })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &str) -> Vec<String> {
        words.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn ubiquitous_terms_are_dropped() {
        let docs = [toks("the cat"), toks("the dog"), toks("the")];
        let mut vocab = Vocabulary::default();
        let out = build_tfidf(docs.iter().map(Vec::as_slice), &mut vocab).unwrap();
        let the = vocab.get("the").unwrap();
        assert!(out.vectors.iter().all(|v| v.get(the).is_none()));
        assert_eq!(out.empty, vec![2]);
    }

    #[test]
    fn single_document_corpus_is_empty() {
        let docs = [toks("alpha beta beta")];
        let out = build_tfidf(docs.iter().map(Vec::as_slice), &mut Vocabulary::default()).unwrap();
        assert!(out.vectors[0].is_empty());
        assert_eq!(out.empty, vec![0]);
    }

    #[test]
    fn weight_is_tf_times_log_ratio() {
        let docs = [toks("x x y"), toks("y")];
        let mut vocab = Vocabulary::default();
        let out = build_tfidf(docs.iter().map(Vec::as_slice), &mut vocab).unwrap();
        let x = vocab.get("x").unwrap();
        assert_eq!(out.vectors[0].get(x), Some(2.0 * 2f64.ln()));
        assert_eq!(out.vectors[0].len(), 1);
    }

    #[test]
    fn empty_corpus_errors() {
        let none: [&[String]; 0] = [];
        assert!(matches!(build_tfidf(none, &mut Vocabulary::default()), Err(Error::EmptyCorpus)));
    }
}
