#![no_main]

use libfuzzer_sys::fuzz_target;
use reflect_core::lexicon::{score, LexiconSet};

fuzz_target!(|data: &str| {
    if let Ok(lexicon) = LexiconSet::from_json(data) {
        let s = score("I feel that my gut knows what I think.", &lexicon);
        assert!(s.as_array().iter().all(|v| v.is_finite() && *v >= 0.0));
    }
});
