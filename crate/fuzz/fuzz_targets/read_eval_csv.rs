#![no_main]

use disbessel::io::{read_eval_csv, write_eval_csv};
use libfuzzer_sys::fuzz_target;

// Accepted input must survive a write/read cycle byte for byte.
fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_eval_csv(data) {
        let mut first = Vec::new();
        write_eval_csv(&mut first, &rows).unwrap();
        let again = read_eval_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_eval_csv(&mut second, &again).unwrap();
        assert_eq!(first, second);
    }
});
