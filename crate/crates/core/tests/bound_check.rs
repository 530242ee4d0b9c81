//! Runs the exact search with the emission safety check switched on.

use graphdiv::bench::{random_graph, RandomGraphSpec};
use graphdiv::corpus::RestrictionSet;
use graphdiv::engine::{DivIterator, CHECK_BOUNDS_ENV};
use graphdiv::ranking::{RankParams, Variant};

#[test]
fn every_emission_passes_the_safety_check() {
    std::env::set_var(CHECK_BOUNDS_ENV, "1");
    for seed in 0..40u64 {
        let spec = RandomGraphSpec { vertices: 60, max_out_degree: 4, vocab: 20, max_terms: 4, seed };
        let g = random_graph(&spec).unwrap();
        let variant = if seed % 2 == 0 { Variant::MinAvg } else { Variant::MinMax };
        let p =
            RankParams::new(0.5, [0.0, 0.5, 1.0][seed as usize % 3], [0.0, 0.5, 1.0][seed as usize / 3 % 3], variant)
                .unwrap();
        let set: Vec<u32> = (1..=(seed % 4) as u32).collect();
        let it = DivIterator::new(&g, 0, &set, RestrictionSet::allow_all(), p).unwrap();
        assert_eq!(it.count(), 60 - 1 - set.len());
    }
}
