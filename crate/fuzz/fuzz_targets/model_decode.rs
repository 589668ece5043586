#![no_main]

use libfuzzer_sys::fuzz_target;
use scfde::postdist::ModelDump;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // A decoded dump re-encodes to a document that decodes to the same model.
    if let Ok(dump) = ModelDump::from_json(text) {
        let again = ModelDump::from_json(&dump.to_json().expect("encodes")).expect("re-decodes");
        assert_eq!(dump.to_json().ok(), again.to_json().ok());
    }
});
