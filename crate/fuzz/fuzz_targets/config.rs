#![no_main]

use hqram::harness::config::parse_pairs;
use hqram::harness::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_pairs(text);
    if let Ok(config) = ExperimentConfig::from_text(text) {
        let _ = config.validate();
    }
});
