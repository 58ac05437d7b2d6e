#![no_main]

use disbessel::io::{read_wave_csv, write_wave_csv};
use libfuzzer_sys::fuzz_target;

// Accepted input must survive a write/read cycle byte for byte.
fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_wave_csv(data) {
        let mut first = Vec::new();
        write_wave_csv(&mut first, &rows).unwrap();
        let again = read_wave_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_wave_csv(&mut second, &again).unwrap();
        assert_eq!(first, second);
    }
});
