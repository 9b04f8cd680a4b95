#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = dupwatch_core::ensemble::check_manifest(data);
});
