#![no_main]

use crsos_cli::{Engine, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::from_json_str(text) {
        let back = ExperimentConfig::from_json_str(&config.to_json_string()).expect("serialized config parses");
        // NaN never survives JSON, so compare the documents instead of the values
        assert_eq!(back.to_json_string(), config.to_json_string());
        for engine in [Engine::Enumerate, Engine::Exact, Engine::Kmc, Engine::Meanfield, Engine::Stationary, Engine::Selfsim, Engine::Compare] {
            let _ = config.validate(engine);
            let _ = config.initial_config();
        }
    }
});
