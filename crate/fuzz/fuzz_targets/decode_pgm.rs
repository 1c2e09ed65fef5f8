#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(raw) = hzspf::pnm::decode_pgm(data) {
        assert_eq!(raw.pixels.len(), raw.width * raw.height);
        let _ = raw.into_field();
    }
});
