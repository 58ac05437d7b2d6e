#![no_main]

use disbessel::io::parse_init_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((u0, v0)) = parse_init_file(s) {
            let _ = (u0.l1(), v0.l1(), u0.support_radius(), v0.support_radius());
        }
    }
});
