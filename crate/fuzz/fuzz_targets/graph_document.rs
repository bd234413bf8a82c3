#![no_main]

use std::sync::Arc;

use cfgraph::dataset::GraphDocument;
use cfgraph::VertexUniverse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(doc) = GraphDocument::from_json_slice(data) else {
        return;
    };
    // Caps the bitset allocation.
    if doc.n_vertices > 4096 {
        return;
    }
    let Ok(universe) = VertexUniverse::anonymous(doc.n_vertices) else {
        return;
    };
    let universe = Arc::new(universe);
    if let Ok(g) = doc.to_graph(&universe) {
        assert_eq!(g.len(), doc.edges.len());
        assert_eq!(GraphDocument::from_graph(&g).to_graph(&universe).unwrap(), g);
    }
});
