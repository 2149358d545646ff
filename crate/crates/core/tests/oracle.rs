use selfish_cc_core::bounds::r_lb;
use selfish_cc_core::combinatorics::next_permutation;
use selfish_cc_core::demands::{circular_shifts, enumerate_circular_demands, UserPermutation};
use selfish_cc_core::oracle::{
    acyclic_set, acyclic_set_general, appearance_count_formula, appearance_counts, averaged_circular_bound,
    averaged_circular_bound_profile, index_coding_bound, is_acyclic, GeneralPlacementProfile,
};
use selfish_cc_core::placement::selfish_man_placement;
use selfish_cc_core::{Demand, FdsStructure, Rational, UserSet, DEFAULT_CAP};

fn st(k: u32, alpha: u32, f: u32) -> FdsStructure {
    FdsStructure::new(k, alpha, f).unwrap()
}

#[test]
fn six_four_one_averages_720_bounds() {
    let s = st(6, 4, 1);
    for t in 0..=4 {
        let avg = averaged_circular_bound(&s, t, DEFAULT_CAP).unwrap();
        assert_eq!(avg.bounds, 720);
        assert_eq!(Ok(avg.value), r_lb(6, 4, t));
    }
}

#[test]
fn general_acyclic_sets_pass_topological_sort() {
    for (k, a, f) in [(5, 4, 1), (5, 3, 2), (6, 3, 1)] {
        let s = st(k, a, f);
        for (dm, u) in enumerate_circular_demands(&s, DEFAULT_CAP).unwrap() {
            for r in circular_shifts(&u) {
                assert!(is_acyclic(&acyclic_set_general(&s, &dm, &r).unwrap()));
            }
        }
    }
}

#[test]
fn averaged_bound_under_mixed_profiles() {
    let s = st(5, 3, 1);
    let q = |n, d| Rational::new(n, d).unwrap();
    for x in [
        vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
        vec![q(1, 3), Rational::ZERO, q(2, 3), Rational::ZERO],
        vec![Rational::ZERO, q(1, 5), q(3, 5), q(1, 5)],
    ] {
        let expected: Rational = x
            .iter()
            .enumerate()
            .map(|(t, w)| *w * r_lb(5, 3, t as u32).unwrap())
            .sum();
        let profile = GeneralPlacementProfile::new(3, x).unwrap();
        let avg = averaged_circular_bound_profile(&s, &profile, DEFAULT_CAP).unwrap();
        assert_eq!(avg.value, expected);
    }
}

#[test]
fn appearance_counts_on_six_four_one() {
    let s = st(6, 4, 1);
    for t in 0..=4 {
        let counts = appearance_counts(&s, t, DEFAULT_CAP).unwrap();
        let expected = appearance_count_formula(&s, t).unwrap();
        assert!(counts.iter().all(|(_, c)| *c == expected), "t={t}");
    }
}

#[test]
fn best_ordering_dominates_canonical_one() {
    let s = st(5, 4, 1);
    let dm = Demand::first_files(
        ["1234", "2345", "1345", "1245", "1235"]
            .map(|d| UserSet::from_users(d.bytes().map(|b| u32::from(b - b'0'))))
            .to_vec(),
    );
    let p = selfish_man_placement(&s, 2).unwrap();
    let canonical = index_coding_bound(&p, &dm, &UserPermutation::identity(5)).unwrap();
    let mut order: Vec<u32> = (1..=5).collect();
    let mut best = Rational::ZERO;
    loop {
        let u = UserPermutation::new(order.clone()).unwrap();
        assert!(is_acyclic(&acyclic_set(&p, &dm, &u).unwrap()));
        let b = index_coding_bound(&p, &dm, &u).unwrap();
        if b > best {
            best = b;
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    assert!(best >= canonical);
    assert!(best <= Rational::new(7, 6).unwrap());
}
