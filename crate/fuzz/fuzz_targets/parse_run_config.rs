#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = hzspf::config::RunConfig::from_toml_str(text) {
            let back = hzspf::config::RunConfig::from_toml_str(&cfg.echo()).expect("echo parses");
            assert_eq!(back.params, cfg.params);
        }
    }
});
