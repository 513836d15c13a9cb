#![no_main]

use libfuzzer_sys::fuzz_target;
use reflect_core::session::{parse_event_line, replay};

fuzz_target!(|data: &str| {
    if let Ok(env) = parse_event_line(data) {
        let line = serde_json::to_string(&env).unwrap();
        assert_eq!(parse_event_line(&line).unwrap(), env);
        let _ = replay(std::slice::from_ref(&env));
    }
});
