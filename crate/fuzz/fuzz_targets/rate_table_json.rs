#![no_main]

use crsos::RateTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = RateTable::from_json_str(text) {
        let back = RateTable::from_json_str(&table.to_json_string()).expect("serialized table parses");
        assert_eq!(back, table);
    }
});
