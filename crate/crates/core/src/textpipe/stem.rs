//! English Snowball ("Porter2") stemmer.
//!
//! Follows the reference English algorithm rule for rule, including the
//! special-word lists and the `gener`/`commun`/`arsen` region prefixes.
//! Works on `char`s; anything outside `a-z` is treated as a non-vowel.

/// Returns the Snowball English stem of `word`.
///
/// `word` is expected to be lowercase; uppercase letters are not folded.
pub fn stem(word: &str) -> String {
    if let Some(special) = exception1(word) {
        return special.to_owned();
    }
    if word.chars().count() <= 2 {
        return word.to_owned();
    }
    let mut w = Word::new(word);
    w.prelude();
    w.mark_regions();
    w.step_1a();
    if !w.is_exception2() {
        w.step_1b();
        w.step_1c();
        w.step_2();
        w.step_3();
        w.step_4();
        w.step_5();
    }
    w.postlude()
}

fn exception1(word: &str) -> Option<&'static str> {
    Some(match word {
        "skis" => "ski",
        "skies" => "sky",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        "idly" => "idl",
        "gently" => "gentl",
        "ugly" => "ugli",
        "early" => "earli",
        "only" => "onli",
        "singly" => "singl",
        "sky" => "sky",
        "news" => "news",
        "howe" => "howe",
        "atlas" => "atlas",
        "cosmos" => "cosmos",
        "bias" => "bias",
        "andes" => "andes",
        _ => return None,
    })
}

const EXCEPTION2: &[&str] = &[
    "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed",
];

// Marker for a consonantal `y`; never a vowel.
const CONSONANT_Y: char = 'Y';

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_valid_li(c: char) -> bool {
    matches!(c, 'c' | 'd' | 'e' | 'g' | 'h' | 'k' | 'm' | 'n' | 'r' | 't')
}

struct Word {
    chars: Vec<char>,
    p1: usize,
    p2: usize,
    y_found: bool,
}

impl Word {
    fn new(word: &str) -> Self {
        Self {
            chars: word.chars().collect(),
            p1: 0,
            p2: 0,
            y_found: false,
        }
    }

    fn len(&self) -> usize {
        self.chars.len()
    }

    fn ends_with(&self, suffix: &str) -> bool {
        let n = suffix.chars().count();
        n <= self.len()
            && self.chars[self.len() - n..]
                .iter()
                .copied()
                .eq(suffix.chars())
    }

    /// Longest suffix in `suffixes` that the word ends with.
    fn longest_suffix<'a>(&self, suffixes: &[&'a str]) -> Option<&'a str> {
        suffixes
            .iter()
            .copied()
            .filter(|s| self.ends_with(s))
            .max_by_key(|s| s.len())
    }

    fn replace_suffix(&mut self, suffix_len: usize, with: &str) {
        let keep = self.len() - suffix_len;
        self.chars.truncate(keep);
        self.chars.extend(with.chars());
    }

    fn prelude(&mut self) {
        if self.chars.first() == Some(&'\'') {
            self.chars.remove(0);
        }
        if self.chars.first() == Some(&'y') {
            self.chars[0] = CONSONANT_Y;
            self.y_found = true;
        }
        for i in 1..self.len() {
            if self.chars[i] == 'y' && is_vowel(self.chars[i - 1]) {
                self.chars[i] = CONSONANT_Y;
                self.y_found = true;
            }
        }
    }

    /// Position just after the first non-vowel that follows a vowel,
    /// searching from `from`.
    fn region_start(&self, from: usize) -> usize {
        let n = self.len();
        let mut i = from;
        while i < n && !is_vowel(self.chars[i]) {
            i += 1;
        }
        while i < n && is_vowel(self.chars[i]) {
            i += 1;
        }
        if i < n {
            i + 1
        } else {
            n
        }
    }

    fn mark_regions(&mut self) {
        let prefix = ["gener", "commun", "arsen"]
            .iter()
            .find(|p| self.chars.iter().copied().take(p.len()).eq(p.chars()))
            .map(|p| p.len());
        self.p1 = match prefix {
            Some(len) => len,
            None => self.region_start(0),
        };
        self.p2 = self.region_start(self.p1);
    }

    fn suffix_in_r1(&self, suffix_len: usize) -> bool {
        self.len() - suffix_len >= self.p1
    }

    fn suffix_in_r2(&self, suffix_len: usize) -> bool {
        self.len() - suffix_len >= self.p2
    }

    /// Short syllable ending at `end` (exclusive).
    fn short_syllable_at(&self, end: usize) -> bool {
        let c = &self.chars;
        if end >= 3 {
            let (a, b, d) = (c[end - 3], c[end - 2], c[end - 1]);
            if !is_vowel(a) && is_vowel(b) && !is_vowel(d) && !matches!(d, 'w' | 'x' | CONSONANT_Y)
            {
                return true;
            }
        }
        end == 2 && is_vowel(c[0]) && !is_vowel(c[1])
    }

    fn has_vowel(&self, upto: usize) -> bool {
        self.chars[..upto].iter().any(|&c| is_vowel(c))
    }

    fn step_1a(&mut self) {
        if let Some(s) = self.longest_suffix(&["'", "'s'", "'s"]) {
            let n = s.chars().count();
            self.chars.truncate(self.len() - n);
        }
        let Some(suffix) = self.longest_suffix(&["sses", "ied", "ies", "s", "us", "ss"]) else {
            return;
        };
        match suffix {
            "sses" => self.replace_suffix(4, "ss"),
            "ied" | "ies" => {
                if self.len() - 3 >= 2 {
                    self.replace_suffix(3, "i");
                } else {
                    self.replace_suffix(3, "ie");
                }
            }
            "s" => {
                let before = self.len() - 1;
                if before >= 1 && self.has_vowel(before - 1) {
                    self.chars.truncate(before);
                }
            }
            _ => {}
        }
    }

    fn is_exception2(&self) -> bool {
        EXCEPTION2
            .iter()
            .any(|w| self.chars.iter().copied().eq(w.chars()))
    }

    fn step_1b(&mut self) {
        let Some(suffix) = self.longest_suffix(&["eed", "eedly", "ed", "edly", "ing", "ingly"])
        else {
            return;
        };
        let n = suffix.len();
        match suffix {
            "eed" | "eedly" => {
                if self.suffix_in_r1(n) {
                    self.replace_suffix(n, "ee");
                }
            }
            _ => {
                let stem_len = self.len() - n;
                if !self.has_vowel(stem_len) {
                    return;
                }
                self.chars.truncate(stem_len);
                if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
                    self.chars.push('e');
                } else if ["bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt"]
                    .iter()
                    .any(|d| self.ends_with(d))
                {
                    self.chars.pop();
                } else if self.p1 == self.len() && self.short_syllable_at(self.len()) {
                    self.chars.push('e');
                }
            }
        }
    }

    fn step_1c(&mut self) {
        let n = self.len();
        if n >= 3 && matches!(self.chars[n - 1], 'y' | CONSONANT_Y) && !is_vowel(self.chars[n - 2])
        {
            self.chars[n - 1] = 'i';
        }
    }

    fn step_2(&mut self) {
        const SUFFIXES: &[&str] = &[
            "tional", "enci", "anci", "abli", "entli", "izer", "ization", "ational", "ation",
            "ator", "alism", "aliti", "alli", "fulness", "ousli", "ousness", "iveness", "iviti",
            "biliti", "bli", "ogi", "fulli", "lessli", "li",
        ];
        let Some(suffix) = self.longest_suffix(SUFFIXES) else {
            return;
        };
        let n = suffix.len();
        if !self.suffix_in_r1(n) {
            return;
        }
        let replacement = match suffix {
            "tional" => "tion",
            "enci" => "ence",
            "anci" => "ance",
            "abli" => "able",
            "entli" => "ent",
            "izer" | "ization" => "ize",
            "ational" | "ation" | "ator" => "ate",
            "alism" | "aliti" | "alli" => "al",
            "fulness" => "ful",
            "ousli" | "ousness" => "ous",
            "iveness" | "iviti" => "ive",
            "biliti" | "bli" => "ble",
            "ogi" => {
                if self.len() > n && self.chars[self.len() - n - 1] == 'l' {
                    "og"
                } else {
                    return;
                }
            }
            "fulli" => "ful",
            "lessli" => "less",
            "li" => {
                if self.len() > n && is_valid_li(self.chars[self.len() - n - 1]) {
                    ""
                } else {
                    return;
                }
            }
            _ => unreachable!("suffix list and match arms out of sync"),
        };
        self.replace_suffix(n, replacement);
    }

    fn step_3(&mut self) {
        const SUFFIXES: &[&str] = &[
            "tional", "ational", "alize", "icate", "iciti", "ical", "ful", "ness", "ative",
        ];
        let Some(suffix) = self.longest_suffix(SUFFIXES) else {
            return;
        };
        let n = suffix.len();
        if !self.suffix_in_r1(n) {
            return;
        }
        match suffix {
            "tional" => self.replace_suffix(n, "tion"),
            "ational" => self.replace_suffix(n, "ate"),
            "alize" => self.replace_suffix(n, "al"),
            "icate" | "iciti" | "ical" => self.replace_suffix(n, "ic"),
            "ful" | "ness" => self.replace_suffix(n, ""),
            "ative" => {
                if self.suffix_in_r2(n) {
                    self.replace_suffix(n, "");
                }
            }
            _ => unreachable!("suffix list and match arms out of sync"),
        }
    }

    fn step_4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ism",
            "ate", "iti", "ous", "ive", "ize", "ion",
        ];
        let Some(suffix) = self.longest_suffix(SUFFIXES) else {
            return;
        };
        let n = suffix.len();
        if !self.suffix_in_r2(n) {
            return;
        }
        if suffix == "ion" {
            let stem_len = self.len() - n;
            if stem_len >= 1 && matches!(self.chars[stem_len - 1], 's' | 't') {
                self.replace_suffix(n, "");
            }
        } else {
            self.replace_suffix(n, "");
        }
    }

    fn step_5(&mut self) {
        let n = self.len();
        match self.chars.last() {
            Some('e') => {
                if self.suffix_in_r2(1) || (self.suffix_in_r1(1) && !self.short_syllable_at(n - 1))
                {
                    self.chars.pop();
                }
            }
            Some('l') if self.suffix_in_r2(1) && n >= 2 && self.chars[n - 2] == 'l' => {
                self.chars.pop();
            }
            _ => {}
        }
    }

    fn postlude(self) -> String {
        if self.y_found {
            self.chars
                .into_iter()
                .map(|c| if c == CONSONANT_Y { 'y' } else { c })
                .collect()
        } else {
            self.chars.into_iter().collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::stem;

    #[test]
    fn common_words() {
        assert_eq!(stem("running"), "run");
        assert_eq!(stem("generously"), "generous");
        assert_eq!(stem("run"), "run");
        assert_eq!(stem("searches"), "search");
        assert_eq!(stem("heuristics"), "heurist");
    }

    #[test]
    fn special_words() {
        assert_eq!(stem("skies"), "sky");
        assert_eq!(stem("innings"), "inning");
        assert_eq!(stem("news"), "news");
    }

    #[test]
    fn short_words_untouched() {
        assert_eq!(stem("ai"), "ai");
        assert_eq!(stem("a2"), "a2");
        assert_eq!(stem(""), "");
    }

    #[test]
    fn digits_do_not_panic() {
        for w in ["2019", "a2b", "x86", "1st", "ies", "eed", "'s'"] {
            let _ = stem(w);
        }
    }
}
