mod common;

use rcexp_core::{evaluate, ExponentKind, Model};

#[test]
fn fixtures_validate() {
    for name in ["bsc22.json", "bsc22-envelope.json", "five-letter.json"] {
        common::fixture(name).validate().unwrap();
    }
}

// The explicit source in the BSC fixtures is the channel-induced one after
// `d_scale`, so both routes give the same exponent.
#[test]
fn explicit_and_induced_sources_agree() {
    let spec = common::fixture("bsc22.json");
    let explicit = spec.source_model().unwrap();
    let Model::Channel { q, p } = spec.channel_model().unwrap() else { panic!() };
    let induced = Model::Channel { q, p };
    for &level in &spec.scaled_levels().unwrap() {
        for &r in &[0.02, 0.1, 0.3] {
            let a = evaluate(ExponentKind::Success, &explicit, r, level).unwrap().value;
            let b = evaluate(ExponentKind::Success, &induced, r, level).unwrap().value;
            assert!(a.gap(b) < 1e-9, "R={r} D={level}: {a:?} vs {b:?}");
        }
    }
}
