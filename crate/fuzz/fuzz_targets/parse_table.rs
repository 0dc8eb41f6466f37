#![no_main]

//! The table-spec parser must never panic, whatever the spec text or the
//! default value. Accepted tables must report a sorted support whose points
//! look up to their own values.

use hahn_core::LatticeTableFn;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (&str, f64)| {
    let (spec, default) = input;
    if let Ok(table) = LatticeTableFn::parse_spec(spec, default) {
        let points: Vec<f64> = table.support().collect();
        assert!(
            points.windows(2).all(|w| w[0] < w[1]),
            "support not strictly ascending: {points:?}"
        );
        for p in points {
            assert!(table.lookup(p).is_finite());
        }
    }
});
