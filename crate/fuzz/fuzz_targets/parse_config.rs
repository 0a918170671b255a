#![no_main]

use libfuzzer_sys::fuzz_target;
use mirrornoise::config::{parse_config, sql_baseline, ConfigDocument};

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = parse_config(data) {
        // Anything accepted must survive validation again and give a finite,
        // nonnegative reference level.
        let again = mirrornoise::config::validate(cfg).expect("accepted config revalidates");
        assert_eq!(again, cfg);
        let sql = sql_baseline(&cfg);
        assert!(sql.is_finite() && sql >= 0.0);
        let doc = serde_json::to_vec(&ConfigDocument::from_config(&cfg)).unwrap();
        assert_eq!(parse_config(&doc).unwrap(), cfg);
    }
});
