#![no_main]

use gencheb_cli::args::{parse_complex, KChoice};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(z) = parse_complex(text) {
        assert!(z.is_finite());
    }
    if let Ok(KChoice::Fixed(k)) = text.parse::<KChoice>() {
        assert!(k >= 1);
    }
});
