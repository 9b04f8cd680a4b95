#![no_main]

use dupwatch_core::evalkit::GoldClustering;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(gold) = GoldClustering::from_json(data) {
        let again = GoldClustering::from_json(gold.to_json().as_bytes()).unwrap();
        assert_eq!(again, gold);
    }
});
