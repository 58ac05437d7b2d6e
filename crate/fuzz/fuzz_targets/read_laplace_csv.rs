#![no_main]

use disbessel::io::{read_laplace_csv, write_laplace_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_laplace_csv(data) {
        let with_discrepancy = rows.iter().any(|r| r.discrepancy.is_some());
        let mut first = Vec::new();
        write_laplace_csv(&mut first, &rows, with_discrepancy).unwrap();
        let again = read_laplace_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_laplace_csv(&mut second, &again, with_discrepancy).unwrap();
        assert_eq!(first, second);
    }
});
