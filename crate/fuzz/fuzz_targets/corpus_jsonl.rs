#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(corpus) = dupwatch_core::corpus::parse_corpus(data) {
        // whatever parses must survive a write/read round trip
        let mut out = Vec::new();
        corpus.write_jsonl(&mut out).unwrap();
        let back = dupwatch_core::corpus::parse_corpus(&out).unwrap();
        assert_eq!(back, corpus);
    }
});
