//! Exact best-addendum search and the resumable iterator behind it.

mod iter;
mod pool;

pub use iter::{Addendum, DivIterator, CHECK_BOUNDS_ENV, TIE_EPS};
pub use pool::SearchPool;

use crate::corpus::{DocumentGraph, RestrictionSet};
use crate::error::{Error, Result};
use crate::ranking::RankParams;
use crate::VertexId;

/// The admissible vertex outside `set` and `q` whose insertion into `set`
/// increases the score the least, with that increase.
pub fn verso(
    graph: &DocumentGraph,
    q: VertexId,
    set: &[VertexId],
    restriction: &RestrictionSet,
    params: &RankParams,
) -> Result<Addendum> {
    DivIterator::new(graph, q, set, restriction.clone(), *params)?.next().ok_or(Error::NoAdmissibleVertex)
}
