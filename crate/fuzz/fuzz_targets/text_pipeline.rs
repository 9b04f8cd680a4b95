#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let tokens = dupwatch_core::tokenize(text);
    for t in tokens.iter() {
        assert!(t.chars().count() >= 2);
        assert!(!t.chars().any(char::is_uppercase));
        let _ = dupwatch_core::stem(t);
    }
    // the stemmer also has to cope with input the tokenizer would never emit
    let _ = dupwatch_core::stem(text);
});
