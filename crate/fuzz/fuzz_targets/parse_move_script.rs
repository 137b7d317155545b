#![no_main]

use libfuzzer_sys::fuzz_target;
use trisect_core::moves::MoveScript;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = serde_json::from_slice::<MoveScript>(data) {
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<MoveScript>(&text).unwrap(), s);
    }
});
