#![no_main]

use std::collections::BTreeSet;
use std::sync::Arc;

use cfgraph::protocol::{classify_request, parse_request, Request};
use cfgraph::{Graph, VertexUniverse};
use libfuzzer_sys::fuzz_target;

const N: usize = 64;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(Request::Classify { edges }) = parse_request(line, Some(N)) else {
        return;
    };
    let universe = Arc::new(VertexUniverse::anonymous(N).unwrap());
    let Ok(g) = Graph::from_edges(universe, edges.iter().copied()) else {
        return;
    };
    let encoded = classify_request(&g).to_line();
    let Ok(Request::Classify { edges: back }) = parse_request(&encoded, Some(N)) else {
        panic!("engine output rejected: {encoded}");
    };
    let want: BTreeSet<(usize, usize)> = edges.into_iter().collect();
    assert_eq!(back.into_iter().collect::<BTreeSet<_>>(), want);
});
