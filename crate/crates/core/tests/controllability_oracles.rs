mod common;

use common::*;
use inputsel_core::controllability::{
    flatten_selection, generic_rank, is_structurally_controllable, is_switched_structurally_controllable,
};
use inputsel_core::model::{union_system, Mode, SwitchedStructuredSystem};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn generic_rank_matches_numeric_rank() {
    let mut r = rng(21);
    for seed in 0..150 {
        let rows = r.gen_range(1..8);
        let cols = r.gen_range(1..8);
        let sys = random_raw_system(&mut r, rows, cols);
        let p = sys.a().hcat(sys.b());
        assert_eq!(generic_rank(&p), numeric_generic_rank(&p, seed), "{p:?}");
    }
}

#[test]
fn controllability_matches_kalman_rank() {
    let mut r = rng(22);
    let mut positives = 0;
    for seed in 0..200 {
        let sys = random_raw_system(&mut r, 6, 4);
        let sel: Vec<bool> = (0..sys.m()).map(|_| r.gen_bool(0.7)).collect();
        let structural = is_structurally_controllable(&sys, &sel).controllable;
        assert_eq!(structural, kalman_controllable(&sys, &sel, seed), "{sys:?} {sel:?}");
        positives += usize::from(structural);
    }
    // Both outcomes must be exercised for the comparison to mean much.
    assert!(positives > 20 && positives < 180, "{positives}");
}

#[test]
fn switched_check_matches_independent_rebuild() {
    let mut r = rng(23);
    for _ in 0..200 {
        let sw = random_switched(&mut r, 6, 3);
        for _ in 0..4 {
            let sel: Vec<bool> = (0..sw.total_inputs()).map(|_| r.gen_bool(0.5)).collect();
            assert_eq!(
                is_switched_structurally_controllable(&sw, &sel).controllable,
                switched_oracle(&sw, &sel)
            );
        }
    }
}

#[test]
fn certificate_explains_failures() {
    let mut r = rng(24);
    for _ in 0..200 {
        let sys = random_raw_system(&mut r, 7, 4);
        let sel: Vec<bool> = (0..sys.m()).map(|_| r.gen_bool(0.5)).collect();
        let cert = is_structurally_controllable(&sys, &sel);
        let reach = bfs_reachable(sys.a(), sys.b(), &sel);
        let unreachable: Vec<usize> = (0..sys.n()).filter(|&x| !reach[x]).collect();
        assert_eq!(cert.unreachable_states, unreachable);
        assert_eq!(cert.all_reachable, unreachable.is_empty());
        assert_eq!(cert.failing_source.is_some(), !cert.all_reachable);
        assert_eq!(cert.saturating, cert.deficient.is_none());
        if cert.saturating {
            assert_eq!(cert.matching.len(), sys.n());
        }
        assert_eq!(cert.controllable, cert.all_reachable && cert.saturating);
    }
}

#[test]
fn flatten_selection_rejects_bad_indices() {
    let (sw, _) = inputsel_core::parse_switched_system(&fixture("example6.json")).unwrap();
    let mask = flatten_selection(&sw, &[vec![1, 2], vec![1]]).unwrap();
    assert_eq!(mask, vec![false, true, true, false, true, false]);
    assert!(flatten_selection(&sw, &[vec![3], vec![]]).is_none());
    assert!(flatten_selection(&sw, &[vec![0]]).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn adding_inputs_never_breaks_controllability(seed in any::<u64>(), extra in 0usize..6) {
        let mut r = rng(seed);
        let sys = random_raw_system(&mut r, 7, 5);
        let sel: Vec<bool> = (0..sys.m()).map(|_| r.gen_bool(0.5)).collect();
        let mut more = sel.clone();
        more[extra % sys.m()] = true;
        if is_structurally_controllable(&sys, &sel).controllable {
            prop_assert!(is_structurally_controllable(&sys, &more).controllable);
        }
    }

    #[test]
    fn one_mode_switched_equals_fixed(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = random_raw_system(&mut r, 7, 4);
        let sel: Vec<bool> = (0..sys.m()).map(|_| r.gen_bool(0.6)).collect();
        let (sw, stripped) = SwitchedStructuredSystem::from_fixed(&sys);
        // Zero columns are stripped from switched modes; map the selection.
        let kept: Vec<bool> = (0..sys.m())
            .filter(|&j| !stripped.iter().any(|s| s.column == j + 1))
            .map(|j| sel[j])
            .collect();
        prop_assert_eq!(
            is_structurally_controllable(&sys, &sel).controllable,
            is_switched_structurally_controllable(&sw, &kept).controllable
        );
    }

    /// A copy of a mode carries its own parameters, so it can only add
    /// rank; reachability and the union pattern stay the same.
    #[test]
    fn duplicating_a_mode_never_hurts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sw = random_switched(&mut r, 6, 3);
        let sel: Vec<bool> = (0..sw.total_inputs()).map(|_| r.gen_bool(0.5)).collect();
        let dup = sw.with_duplicated_mode(0);
        let mut dup_sel = sel.clone();
        dup_sel.extend(vec![false; sw.modes()[0].m()]);
        let before = is_switched_structurally_controllable(&sw, &sel);
        let after = is_switched_structurally_controllable(&dup, &dup_sel);
        prop_assert!(!before.controllable || after.controllable);
        prop_assert_eq!(before.all_reachable, after.all_reachable);
        prop_assert_eq!(after.controllable, switched_oracle(&dup, &dup_sel));
        prop_assert_eq!(union_system(&sw).a_union, union_system(&dup).a_union);
    }
}

#[test]
fn duplicated_mode_can_gain_rank() {
    // x2 and x3 both depend only on x1: one mode lacks a column, two
    // independent copies supply it.
    let a = pattern(3, 3, &[(1, 0), (2, 0)]);
    let b = pattern(3, 1, &[(0, 0)]);
    let mode = Mode { a, b, costs: unit_costs(1), original_columns: vec![1] };
    let (sw, _) = SwitchedStructuredSystem::new(vec![mode]).unwrap();
    assert!(!is_switched_structurally_controllable(&sw, &[true]).controllable);
    let dup = sw.with_duplicated_mode(0);
    assert!(is_switched_structurally_controllable(&dup, &[true, false]).controllable);
}
