#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = mirrornoise::parse_float_list(text) {
        assert!(values.iter().all(|v| v.is_finite()));
        assert_eq!(values.len(), text.split(',').count());
        let joined: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        assert_eq!(mirrornoise::parse_float_list(&joined.join(",")).unwrap(), values);
    }
});
