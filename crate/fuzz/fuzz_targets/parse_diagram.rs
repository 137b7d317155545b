#![no_main]

use libfuzzer_sys::fuzz_target;
use trisect_core::format;

// Anything that parses must serialize and parse back to the same diagram.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = format::parse(text) {
        let again = format::parse(&format::serialize(&d)).expect("serialized diagram parses");
        assert_eq!(again, d);
        let _ = d.arr.check_structure();
    }
});
