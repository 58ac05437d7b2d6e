#![no_main]

use disbessel::io::parse_range;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((a, b)) = parse_range(s) {
            assert!(a <= b);
            assert_eq!(parse_range(&format!("{a}..{b}")).unwrap(), (a, b));
        }
    }
});
