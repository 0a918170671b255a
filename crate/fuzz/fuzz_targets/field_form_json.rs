#![no_main]

use libfuzzer_sys::fuzz_target;
use mirrornoise::modes::LinearFieldForm;

fuzz_target!(|data: &[u8]| {
    if let Ok(form) = LinearFieldForm::from_json(data) {
        assert!(form.terms().all(|(_, c)| c.re.is_finite() && c.im.is_finite()));
        let back = LinearFieldForm::from_json(form.to_json().as_bytes()).expect("round trip");
        assert_eq!(back, form);
    }
});
