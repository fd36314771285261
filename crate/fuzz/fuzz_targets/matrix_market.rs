#![no_main]

use gencheb::linalg::matrix_market::{read_matrix_market_with_limit, to_matrix_market_string};
use gencheb::linalg::parse_matrix_market;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // a small dimension cap keeps row-offset allocations bounded
    let Ok(m) = read_matrix_market_with_limit(data, 4096) else { return };
    let again = parse_matrix_market(&to_matrix_market_string(&m)).expect("written matrix parses");
    assert_eq!(again, m);
});
