#![no_main]

use dupwatch_core::DraftQuestion;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(draft) = serde_json::from_slice::<DraftQuestion>(data) {
        let tokens = dupwatch_core::preprocess(&draft.text());
        if draft.is_empty() {
            assert!(tokens.is_empty());
        }
    }
});
