#![no_main]

use libfuzzer_sys::fuzz_target;
use scfde::pa::PaModel;
use scfde::C64;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(pa) = PaModel::from_toml_str(text) {
        let x: Vec<C64> = (0..64).map(|k| C64::from_polar(0.05 * k as f64, 0.3 * k as f64)).collect();
        let _ = pa.apply_samples(&x);
        let _ = pa.peak_output();
    }
});
