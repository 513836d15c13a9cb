#![no_main]

use libfuzzer_sys::fuzz_target;
use reflect_core::bank::ExplorationBank;

fuzz_target!(|data: &str| {
    let _ = ExplorationBank::from_json(data);
});
