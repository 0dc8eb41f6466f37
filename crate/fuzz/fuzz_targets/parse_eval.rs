#![no_main]

//! Parse-then-evaluate must never panic: domain violations and non-finite
//! intermediates come back as errors for any bindings, including NaN and
//! infinities handed in by the fuzzer.

use hahn_core::expr::{eval, Bindings};
use hahn_core::{parse, HahnParams, VarSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (&str, f64, f64, f64)| {
    let (source, t, u, v) = input;
    let Ok(expr) = parse(source, VarSet::tuv()) else {
        return;
    };
    let params = HahnParams::new(0.5, 1.0).unwrap();
    let _ = eval(&expr, &Bindings::tuv(t, u, v), &params);
});
