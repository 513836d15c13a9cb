#![no_main]

use libfuzzer_sys::fuzz_target;
use reflect_core::ReflectionProfile;

fuzz_target!(|data: &str| {
    if let Ok(profile) = ReflectionProfile::from_json(data) {
        profile.validate().expect("parsed profile must be valid");
        let again = ReflectionProfile::from_json(&profile.to_json().unwrap()).unwrap();
        assert_eq!(again, profile);
    }
});
