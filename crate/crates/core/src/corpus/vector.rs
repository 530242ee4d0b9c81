use crate::error::{Error, Result};

pub type TermId = u32;

/// Sparse non-negative term-weight vector, kept sorted by term id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermVector {
    entries: Vec<(TermId, f64)>,
    norm: f64,
}

impl TermVector {
    /// Builds a vector from arbitrary `(term, weight)` pairs. Repeated terms are
    /// summed; entries whose final weight is not strictly positive are dropped.
    pub fn new<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (TermId, f64)>,
    {
        let mut entries: Vec<(TermId, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(t, _)| t);
        let mut merged: Vec<(TermId, f64)> = Vec::with_capacity(entries.len());
        for (term, weight) in entries {
            match merged.last_mut() {
                Some((last, w)) if *last == term => *w += weight,
                _ => merged.push((term, weight)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0 && w.is_finite());
        let norm = merged.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        Self { entries: merged, norm }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn get(&self, term: TermId) -> Option<f64> {
        self.entries.binary_search_by_key(&term, |&(t, _)| t).ok().map(|i| self.entries[i].1)
    }

    /// Inner product by merge-join. Products are accumulated in ascending term
    /// order, which [`DenseVector::dot`] reproduces bit for bit.
    pub fn dot(&self, other: &TermVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// Scatter of a [`TermVector`] used when one vector is compared against many.
#[derive(Debug, Clone)]
pub struct DenseVector {
    weights: Vec<f64>,
    norm: f64,
}

impl DenseVector {
    pub fn new(v: &TermVector) -> Self {
        let len = v.entries.last().map_or(0, |&(t, _)| t as usize + 1);
        let mut weights = vec![0.0; len];
        for &(t, w) in &v.entries {
            weights[t as usize] = w;
        }
        Self { weights, norm: v.norm }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let mut sum = 0.0;
        for &(t, w) in &other.entries {
            if let Some(&mine) = self.weights.get(t as usize) {
                if mine != 0.0 {
                    sum += w * mine;
                }
            }
        }
        sum
    }
}

pub(crate) fn cosine_distance(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    (1.0 - dot / (norm_a * norm_b)).clamp(0.0, 1.0)
}

/// Cosine distance `1 - <u,v> / (|u||v|)`, clamped to `[0, 1]`.
pub fn text_distance(u: &TermVector, v: &TermVector) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::UndefinedCosine);
    }
    if u == v {
        return Ok(0.0);
    }
    Ok(cosine_distance(u.dot(v), u.norm, v.norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(pairs: &[(TermId, f64)]) -> TermVector {
        TermVector::new(pairs.iter().copied())
    }

    #[test]
    fn identical_vectors_have_zero_distance() {
        assert_eq!(text_distance(&tv(&[(0, 1.0)]), &tv(&[(0, 1.0)])).unwrap(), 0.0);
        let v = tv(&[(1, 0.3), (4, 2.5), (9, 0.01)]);
        assert_eq!(text_distance(&v, &v).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_supports_have_unit_distance() {
        assert_eq!(text_distance(&tv(&[(0, 1.0)]), &tv(&[(1, 1.0)])).unwrap(), 1.0);
    }

    #[test]
    fn half_overlap() {
        let d = text_distance(&tv(&[(0, 1.0)]), &tv(&[(0, 1.0), (1, 1.0)])).unwrap();
        assert!((d - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!((d - 0.292893).abs() < 1e-6);
    }

    #[test]
    fn empty_vector_is_undefined() {
        assert!(matches!(text_distance(&TermVector::default(), &tv(&[(0, 1.0)])), Err(Error::UndefinedCosine)));
    }

    #[test]
    fn non_positive_weights_are_dropped() {
        let v = tv(&[(0, 0.0), (1, -2.0), (2, 1.5), (2, 0.5)]);
        assert_eq!(v.entries(), &[(2, 2.0)]);
        assert_eq!(v.norm(), 2.0);
    }

    #[test]
    fn dense_dot_matches_merge_join_bitwise() {
        let a = tv(&[(0, 0.1), (3, 0.7), (5, 1.3), (8, 0.2)]);
        let b = tv(&[(1, 0.9), (3, 0.35), (5, 2.1), (8, 1e-3), (11, 4.0)]);
        let dense = DenseVector::new(&a);
        assert_eq!(dense.dot(&b).to_bits(), a.dot(&b).to_bits());
        assert_eq!(dense.dot(&b).to_bits(), b.dot(&a).to_bits());
    }
}
