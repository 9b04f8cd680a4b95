#![no_main]

use dupwatch_service::EventRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(event) = EventRecord::parse(data) {
        let line = serde_json::to_vec(&event).unwrap();
        assert_eq!(EventRecord::parse(&line).unwrap(), event);
    }
});
