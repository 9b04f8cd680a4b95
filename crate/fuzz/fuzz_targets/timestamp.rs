#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = dupwatch_core::corpus::parse_timestamp(text);
});
