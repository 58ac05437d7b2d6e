#![no_main]

use disbessel::io::parse_real_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(xs) = parse_real_list(s) {
            let joined: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
            let again = parse_real_list(&joined.join(",")).unwrap();
            assert_eq!(xs.len(), again.len());
            assert!(xs.iter().zip(&again).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
});
