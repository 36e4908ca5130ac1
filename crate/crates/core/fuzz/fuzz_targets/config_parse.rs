#![no_main]

use libfuzzer_sys::fuzz_target;
use targeting_value::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Any accepted config must echo to a document that parses back equal.
    if let Ok(config) = parse_config(text) {
        let again = parse_config(&config.echo()).expect("echo parses");
        assert_eq!(again, config);
    }
});
