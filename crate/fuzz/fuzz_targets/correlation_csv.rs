#![no_main]

use std::sync::Arc;

use cfgraph::dataset::{threshold_matrix, CorrelationMatrix};
use cfgraph::VertexUniverse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&flags, body)) = data.split_first() else {
        return;
    };
    let Ok(m) = CorrelationMatrix::from_csv(body, flags & 1 == 1) else {
        return;
    };
    let percentile = f64::from(flags >> 1) * 100.0 / 127.0;
    let universe = Arc::new(VertexUniverse::anonymous(m.n()).unwrap());
    let g = threshold_matrix(&m, percentile, universe).unwrap();
    assert!(g.len() <= m.upper_triangle().len());
});
