#![no_main]

use cfgraph::VertexSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    // Range syntax can describe huge sets from short input.
    if s.len() > 64 {
        return;
    }
    if let Ok(set) = VertexSet::parse(s) {
        assert_eq!(VertexSet::parse(&set.to_string()).unwrap(), set);
    }
});
