#![no_main]

use std::fmt::Display;
use std::str::FromStr;

use hqram::branch_state::BasisWord;
use hqram::circuit::{Architecture, RouterKind};
use hqram::harness::{DatabaseMode, DepthRange, Format};
use hqram::noise::ProfileKind;
use libfuzzer_sys::fuzz_target;

/// Whatever parses must print back to a string that parses to the same value.
fn check<T: FromStr + Display + PartialEq + std::fmt::Debug>(s: &str) {
    if let Ok(v) = s.parse::<T>() {
        let again = v.to_string().parse::<T>().ok().expect("printed value parses");
        assert_eq!(again, v);
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    check::<Architecture>(s);
    check::<ProfileKind>(s);
    check::<DepthRange>(s);
    check::<BasisWord>(s);
    let _ = s.parse::<RouterKind>();
    let _ = s.parse::<DatabaseMode>();
    let _ = s.parse::<Format>();
});
