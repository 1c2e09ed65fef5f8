#![no_main]

use hzspf::InitShape;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(shape) = text.parse::<InitShape>() {
        let again: InitShape = shape.to_string().parse().expect("display round-trips");
        assert_eq!(again, shape);
        let _ = shape.resolve(64, 48);
    }
});
