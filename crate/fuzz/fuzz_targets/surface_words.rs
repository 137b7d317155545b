#![no_main]

use libfuzzer_sys::fuzz_target;
use trisect_core::surface::SurfaceComplex;

// One polygon per line, whitespace-separated signed labels.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let words: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    if let Ok(s) = SurfaceComplex::from_words(&words) {
        let chi = s.euler_characteristic();
        let back = SurfaceComplex::from_words(&s.to_words()).expect("round trip");
        assert_eq!(back.euler_characteristic(), chi);
        assert_eq!(back.is_orientable(), s.is_orientable());
        let cover = s.orientation_double_cover().cover;
        assert_eq!(cover.euler_characteristic(), 2 * chi);
        assert!(cover.is_orientable());
    }
});
