#![no_main]

use hqram::harness::ExperimentReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = ExperimentReport::parse_csv(text) {
        let _ = ExperimentReport::parse_csv(&report.to_csv_string());
    }
    if let Ok(report) = ExperimentReport::parse_json(text) {
        let mut out = Vec::new();
        report.write_json(&mut out).expect("in-memory write");
    }
});
