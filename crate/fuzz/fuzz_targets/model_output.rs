#![no_main]

use libfuzzer_sys::fuzz_target;
use reflect_core::gateway::{parse_model_output, ParseMode};

fuzz_target!(|data: &str| {
    for mode in [ParseMode::Full, ParseMode::ElaborationsOnly] {
        if let Ok(parsed) = parse_model_output(data, mode) {
            if mode == ParseMode::ElaborationsOnly {
                assert!(parsed.thoughts.is_empty());
            }
        }
    }
});
