#![no_main]

use crsos_cli::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = RunManifest::from_json_str(text) {
        let back = RunManifest::from_json_str(&m.to_json_string()).expect("serialized manifest parses");
        assert_eq!(back.to_json_string(), m.to_json_string());
    }
});
