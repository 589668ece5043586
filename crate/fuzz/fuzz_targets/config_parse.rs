#![no_main]

use libfuzzer_sys::fuzz_target;
use scfde::harness::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Anything that validates must also expand into its receiver matrix.
    if let Ok(sc) = Scenario::from_toml_str(text) {
        let labels = sc.variant_labels();
        assert!(!labels.is_empty());
    }
});
