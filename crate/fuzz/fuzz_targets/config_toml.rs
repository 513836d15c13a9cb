#![no_main]

use libfuzzer_sys::fuzz_target;
use reflect_core::config::ServiceConfig;

fuzz_target!(|data: &str| {
    if let Ok(config) = ServiceConfig::from_toml(data) {
        config.validate().expect("parsed config must be valid");
    }
});
