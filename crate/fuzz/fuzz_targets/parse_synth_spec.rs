#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = hzspf::synth::SynthSpec::from_toml_str(text) else { return };
    // Keep generation cheap; validation already bounds the size.
    if spec.width * spec.height <= 1 << 16 {
        let (image, truth) = hzspf::synth::generate(&spec).expect("validated spec renders");
        assert_eq!(image.dims(), truth.dims());
    }
});
