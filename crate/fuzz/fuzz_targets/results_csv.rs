#![no_main]

use libfuzzer_sys::fuzz_target;
use scfde::harness::read_results;

fuzz_target!(|data: &[u8]| {
    let _ = read_results(data);
});
