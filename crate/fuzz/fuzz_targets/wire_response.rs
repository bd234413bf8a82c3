#![no_main]

use cfgraph::protocol::{parse_response, Response};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(Response::Label(l)) = parse_response(line) {
        assert!(u8::from(l) <= 1);
    }
});
