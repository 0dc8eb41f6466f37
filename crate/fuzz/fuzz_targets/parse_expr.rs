#![no_main]

//! The expression parser must never panic: any byte string yields either an
//! AST or an error whose byte offset stays inside the input. Every parsed
//! tree must survive a print/reparse round trip structurally unchanged.

use hahn_core::{parse, HahnError, VarSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(source) = std::str::from_utf8(data) else {
        return;
    };
    for vars in [VarSet::tuv(), VarSet::only_t()] {
        match parse(source, vars) {
            Ok(expr) => {
                let printed = expr.to_string();
                let reparsed = parse(&printed, vars)
                    .unwrap_or_else(|e| panic!("printed form `{printed}` rejected: {e}"));
                assert_eq!(reparsed, expr, "round trip changed `{printed}`");
            }
            Err(HahnError::Parse { offset, .. })
            | Err(HahnError::UnknownIdentifier { offset, .. }) => {
                assert!(offset <= source.len(), "offset {offset} out of bounds");
            }
            Err(other) => panic!("unexpected error kind: {other}"),
        }
    }
});
