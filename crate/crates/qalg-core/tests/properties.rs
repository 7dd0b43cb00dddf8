//! Property suites: substitution identities, crest invariant, Dmin lemma,
//! Q-Borel radius, parser round-trip.

mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn shift_identity(case in shift_identity_cases()) {
        check_shift_identity(case)?;
    }

    #[test]
    fn reduce_identity(case in reduce_identity_cases()) {
        check_reduce_identity(case)?;
    }

    #[test]
    fn ramify_identity(case in ramify_identity_cases()) {
        check_ramify_identity(case)?;
    }

    #[test]
    fn deflate_identity(case in deflate_identity_cases()) {
        check_deflate_identity(case)?;
    }

    #[test]
    fn scale_identity(case in scale_identity_cases()) {
        check_scale_identity(case)?;
    }

    #[test]
    fn crest_invariant(case in crest_invariant_cases()) {
        check_crest_invariant(case)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn parser_round_trip(case in parser_round_trip_cases()) {
        check_parser_round_trip(case)?;
    }
}

#[test]
fn dmin_lemma_holds_on_corpus() {
    assert!(dmin_lemma_on_corpus_crest_factors() > 0);
}

#[test]
fn q_borel_radius() {
    q_borel_radius_matches_crest_root();
}

#[test]
fn height_routes_agree() {
    assert!(height_routes_agree_on_corpus() > 0);
}
