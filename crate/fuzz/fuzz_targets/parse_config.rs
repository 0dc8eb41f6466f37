#![no_main]

//! Config-file decoding must never panic; malformed TOML and unknown keys
//! come back as input errors.

use hahn_cli::config::FileConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = FileConfig::parse(text);
});
