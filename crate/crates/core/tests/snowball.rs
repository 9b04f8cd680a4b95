//! Conformance against the Snowball English reference vocabulary
//! (29,417 `word<TAB>stem` pairs).

use dupwatch_core::stem;

const FIXTURE: &str = include_str!("fixtures/snowball_english.tsv");

fn pairs() -> impl Iterator<Item = (&'static str, &'static str)> {
    FIXTURE.lines().map(|l| {
        l.split_once('\t')
            .unwrap_or_else(|| panic!("bad fixture line {l:?}"))
    })
}

#[test]
fn matches_reference_vocabulary() {
    let mut total = 0usize;
    let mut mismatches = Vec::new();
    for (word, expected) in pairs() {
        total += 1;
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    assert_eq!(total, 29_417);
    let rate = 1.0 - mismatches.len() as f64 / total as f64;
    println!(
        "snowball conformance {rate:.5} ({} mismatches)",
        mismatches.len()
    );
    assert!(
        rate >= 0.999,
        "conformance {rate:.5} below 0.999; first mismatches: {:#?}",
        &mismatches[..mismatches.len().min(20)]
    );
}

#[test]
fn fixed_points() {
    assert_eq!(stem("running"), "run");
    assert_eq!(stem("generously"), "generous");
    assert_eq!(stem("run"), "run");
}

#[test]
fn stems_of_reference_words_are_mostly_fixed_points() {
    let mut total = 0usize;
    let mut moved = 0usize;
    for (_, expected) in pairs() {
        total += 1;
        if stem(expected) != expected {
            moved += 1;
        }
    }
    let rate = 1.0 - moved as f64 / total as f64;
    println!("stem idempotence {rate:.5} ({moved} of {total} stems move again)");
    assert!(rate >= 0.96);
}
