#![no_main]

use crsos::HeightConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = text.parse::<HeightConfig>() {
        let hs: Vec<i64> = c.heights().iter().map(|&h| i64::from(h)).collect();
        assert!(crsos::is_restricted(&hs));
        assert_eq!(c.to_string().parse::<HeightConfig>().expect("rendered config parses"), c);
    }
});
