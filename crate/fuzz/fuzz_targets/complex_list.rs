#![no_main]

use gencheb::textio::{format_complex_list, parse_complex_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(values) = parse_complex_list(text) else { return };
    assert!(values.iter().all(|v| v.is_finite()));
    assert_eq!(parse_complex_list(&format_complex_list(&values)).unwrap(), values);
});
