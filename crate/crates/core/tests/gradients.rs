mod common;

use common::*;
use headvote_core::embeddings::Variant;
use headvote_core::nets::Arch;

const TOLERANCE: f64 = 1e-4;

#[test]
fn network_gradients_match_finite_differences() {
    for arch in Arch::ALL {
        for seed in 0..20 {
            let err = check_net(arch, seed);
            assert!(err < TOLERANCE, "{arch} seed {seed}: {err:e}");
        }
    }
}

#[test]
fn softmax_gradient_matches_finite_differences() {
    for seed in 0..50 {
        assert!(check_softmax(seed) < TOLERANCE);
    }
}

#[test]
fn skip_gram_gradients_reach_every_constituent() {
    for variant in Variant::ALL {
        for seed in 0..20 {
            let err = check_sgns(variant, seed);
            assert!(err < TOLERANCE, "{variant} seed {seed}: {err:e}");
        }
        let (word, sub) = touched_kinds(variant, 3);
        assert!(word);
        assert_eq!(sub, variant != Variant::Sgns, "{variant}");
    }
}

#[test]
fn hinge_subgradient_matches_away_from_kinks() {
    for seed in 0..50 {
        let err = check_hinge(seed);
        assert!(err < 1e-6, "seed {seed}: {err:e}");
    }
}
