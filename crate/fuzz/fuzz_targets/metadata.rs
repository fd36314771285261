#![no_main]

use gencheb::textio::Metadata;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(meta) = Metadata::parse(text) else { return };
    assert_eq!(Metadata::parse(&meta.to_string()).unwrap(), meta);
    for (k, _) in meta.iter() {
        let _ = meta.require::<f64>(k);
        let _ = meta.require::<usize>(k);
    }
});
