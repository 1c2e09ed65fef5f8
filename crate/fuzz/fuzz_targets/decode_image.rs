#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = hzspf::grid::decode_image(data) {
        assert!(field.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let round = hzspf::grid::decode_image(&hzspf::grid::encode_pgm(&field)).unwrap();
        assert_eq!(round, field);
    }
});
