//! Randomized record round trips: whatever gets emitted as JSON re-parses
//! to the same fields, and CSV floats reconstruct bit-exactly.

use proptest::prelude::*;

use gwphase_cli::records::{format_float, render, RunRecord};
use gwphase_cli::OutputFormat;

fn finite_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL,
        prop::num::f64::SUBNORMAL,
        Just(0.0f64),
        Just(-0.0f64),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn json_reparses_field_by_field(
        floats in prop::collection::vec(finite_f64(), 1..8),
        ints in prop::collection::vec(-1_000_000i64..1_000_000, 0..4),
    ) {
        let mut record = RunRecord::new("cone");
        for (k, x) in floats.iter().enumerate() {
            record.push_f64(&format!("f{k}"), *x);
        }
        for (k, i) in ints.iter().enumerate() {
            record.push_int(&format!("i{k}"), *i);
        }
        record.push_opt_f64("maybe", None);

        let text = render(std::slice::from_ref(&record), OutputFormat::Json).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(parsed[0].clone(), record.to_json_value());
        for (k, x) in floats.iter().enumerate() {
            let back = parsed[0][format!("f{k}")].as_f64().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_float_cells_reconstruct_bits(x in finite_f64()) {
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn rendering_same_records_is_byte_stable(
        floats in prop::collection::vec(finite_f64(), 1..6),
    ) {
        let mut record = RunRecord::new("jones");
        for (k, x) in floats.iter().enumerate() {
            record.push_f64(&format!("c{k}"), *x);
        }
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let a = render(std::slice::from_ref(&record), format).unwrap();
            let b = render(std::slice::from_ref(&record), format).unwrap();
            prop_assert_eq!(a.as_bytes(), b.as_bytes());
        }
    }
}
