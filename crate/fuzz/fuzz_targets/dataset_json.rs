#![no_main]

use cfgraph::LabeledDataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(d) = LabeledDataset::from_json_slice(data) else {
        return;
    };
    // Accepted datasets survive a save/load cycle unchanged.
    let again = LabeledDataset::from_json_str(&d.to_json_string()).expect("re-parse of own output");
    assert_eq!(again, d);
});
