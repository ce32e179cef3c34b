#![no_main]

use hqram::circuit::{dump_layers, parse_dump};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(layers) = parse_dump(text) {
        // Anything accepted must survive a dump and re-parse unchanged.
        let again = parse_dump(&dump_layers(&layers)).expect("dump output parses");
        assert_eq!(again, layers);
    }
});
