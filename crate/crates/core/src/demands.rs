//! Demand families and their structure: FDS request graphs, circular demands,
//! alpha-demands and circular shifts of user orderings.

use alloc::vec::Vec;
use core::fmt;

use crate::combinatorics::{factorial, next_permutation};
use crate::fds::{ensure_valid, Demand, FdsStructure, UserSet};
use crate::{Error, Result};

/// An ordering `u = (u_1, .., u_K)` of the users, with the inverse lookup
/// `position_of(k)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserPermutation {
    order: Vec<u32>,
    /// `position[k - 1]` is the 0-based index of user `k` in `order`.
    position: Vec<usize>,
}

impl UserPermutation {
    pub fn new(order: Vec<u32>) -> Result<Self> {
        let n = order.len();
        let mut position = alloc::vec![usize::MAX; n];
        for (i, &u) in order.iter().enumerate() {
            if u == 0 || u as usize > n || position[u as usize - 1] != usize::MAX {
                return Err(Error::NotAPermutation);
            }
            position[u as usize - 1] = i;
        }
        Ok(UserPermutation { order, position })
    }

    pub fn identity(k: u32) -> Self {
        UserPermutation::new((1..=k).collect()).expect("identity is a permutation")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// User at 0-based position `i`, taken cyclically.
    pub fn at(&self, i: usize) -> u32 {
        self.order[i % self.order.len()]
    }

    /// 0-based position of `user`.
    pub fn position_of(&self, user: u32) -> usize {
        self.position[user as usize - 1]
    }

    /// The rotation that starts at 0-based position `start`.
    pub fn rotated(&self, start: usize) -> UserPermutation {
        let n = self.order.len();
        let order = (0..n).map(|i| self.order[(start + i) % n]).collect();
        UserPermutation::new(order).expect("rotation of a permutation")
    }

    /// Users at positions `start, .., start + len - 1`, cyclically.
    pub fn window(&self, start: usize, len: u32) -> UserSet {
        UserSet::from_users((0..len as usize).map(|i| self.at(start + i)))
    }
}

impl fmt::Debug for UserPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, u) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for UserPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Directed graph on users with an edge `a -> b` whenever the file requested
/// by `a` lies in the FDS of `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FdsRequestGraph {
    /// Out-neighbours of user `k` at index `k - 1`.
    out: Vec<UserSet>,
}

impl FdsRequestGraph {
    pub fn users(&self) -> u32 {
        self.out.len() as u32
    }

    pub fn has_edge(&self, from: u32, to: u32) -> bool {
        self.out[from as usize - 1].contains(to)
    }

    pub fn out_neighbours(&self, user: u32) -> UserSet {
        self.out[user as usize - 1]
    }

    pub fn edge_count(&self) -> u32 {
        self.out.iter().map(|n| n.len()).sum()
    }

    /// Unordered pairs joined in both directions.
    pub fn bidirectional_edge_count(&self) -> u32 {
        let k = self.users();
        let mut count = 0;
        for a in 1..=k {
            for b in a + 1..=k {
                if self.has_edge(a, b) && self.has_edge(b, a) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn is_complete(&self) -> bool {
        let k = self.users();
        (1..=k).all(|a| (1..=k).all(|b| a == b || self.has_edge(a, b)))
    }

    /// Isomorphism by trying every vertex bijection; only for `K <= 8`.
    pub fn is_isomorphic(&self, other: &FdsRequestGraph) -> Result<bool> {
        let k = self.users();
        if k != other.users() {
            return Ok(false);
        }
        if k > 8 {
            return Err(Error::Unsupported("isomorphism search limited to K <= 8"));
        }
        if self.edge_count() != other.edge_count() {
            return Ok(false);
        }
        let mut map: Vec<u32> = (1..=k).collect();
        loop {
            let preserved = (1..=k).all(|a| {
                (1..=k).all(|b| {
                    self.has_edge(a, b) == other.has_edge(map[a as usize - 1], map[b as usize - 1])
                })
            });
            if preserved {
                return Ok(true);
            }
            if !next_permutation(&mut map) {
                return Ok(false);
            }
        }
    }
}

pub fn fds_request_graph(s: &FdsStructure, dm: &Demand) -> Result<FdsRequestGraph> {
    ensure_valid(s, dm)?;
    let out = (1..=s.users()).map(|k| dm.class_of(k).without(k)).collect();
    Ok(FdsRequestGraph { out })
}

/// Whether `u` orders the users so that every `D_{u_i}` is the window of
/// `alpha` users starting at position `i`.
pub fn is_circular_for(s: &FdsStructure, dm: &Demand, u: &UserPermutation) -> bool {
    u.len() == s.users() as usize
        && dm.users() == s.users()
        && (0..u.len()).all(|i| dm.class_of(u.at(i)) == u.window(i, s.alpha()))
}

/// Canonical circular ordering of a demand, if one exists.
///
/// The returned ordering starts with user 1 and is the lexicographically
/// smallest valid one. The search places users left to right and rejects a
/// candidate as soon as its class membership disagrees with any already
/// placed user, so it is exact for every `K` and fast on the windows that
/// circular demands have.
pub fn circular_witness(s: &FdsStructure, dm: &Demand) -> Result<Option<UserPermutation>> {
    ensure_valid(s, dm)?;
    let k = s.users() as usize;
    let alpha = s.alpha() as usize;
    let mut order = Vec::with_capacity(k);
    order.push(1u32);
    let mut used = UserSet::singleton(1);
    if extend_circular(dm, k, alpha, &mut order, &mut used) {
        Ok(Some(UserPermutation::new(order).expect("search builds a permutation")))
    } else {
        Ok(None)
    }
}

fn extend_circular(
    dm: &Demand,
    k: usize,
    alpha: usize,
    order: &mut Vec<u32>,
    used: &mut UserSet,
) -> bool {
    let p = order.len();
    if p == k {
        return true;
    }
    for v in 1..=k as u32 {
        if used.contains(v) {
            continue;
        }
        // v at position p lies in the window of j iff p - j < alpha, and j
        // lies in v's window iff it wraps around: j + k - p < alpha.
        let consistent = order.iter().enumerate().all(|(j, &w)| {
            dm.class_of(w).contains(v) == (p - j < alpha)
                && dm.class_of(v).contains(w) == (j + k - p < alpha)
        });
        if !consistent {
            continue;
        }
        order.push(v);
        *used = used.with(v);
        if extend_circular(dm, k, alpha, order, used) {
            return true;
        }
        order.pop();
        *used = used.without(v);
    }
    false
}

/// Same contract as [`circular_witness`], by testing every ordering that
/// starts with user 1. Limited to `K <= 9`.
pub fn circular_witness_exhaustive(
    s: &FdsStructure,
    dm: &Demand,
) -> Result<Option<UserPermutation>> {
    ensure_valid(s, dm)?;
    let k = s.users();
    if k > 9 {
        return Err(Error::Unsupported("exhaustive circular search limited to K <= 9"));
    }
    let mut tail: Vec<u32> = (2..=k).collect();
    loop {
        let mut order = alloc::vec![1];
        order.extend_from_slice(&tail);
        let u = UserPermutation::new(order).expect("1 followed by a permutation of 2..=K");
        if is_circular_for(s, dm, &u) {
            return Ok(Some(u));
        }
        if !next_permutation(&mut tail) {
            return Ok(None);
        }
    }
}

/// The demand induced by ordering `u` and file indices `files` (per user).
pub fn circular_demand(s: &FdsStructure, u: &UserPermutation, files: Vec<u32>) -> Result<Demand> {
    if u.len() != s.users() as usize {
        return Err(Error::ShapeMismatch);
    }
    let mut classes = alloc::vec![UserSet::EMPTY; u.len()];
    for i in 0..u.len() {
        classes[u.at(i) as usize - 1] = u.window(i, s.alpha());
    }
    Demand::new(classes, files)
}

/// `f^K (K-1)!`.
pub fn circular_demand_count(s: &FdsStructure) -> Option<u128> {
    u128::from(s.files_per_class())
        .checked_pow(s.users())?
        .checked_mul(crate::combinatorics::checked_factorial(s.users() - 1)?)
}

/// Every circular demand paired with its canonical ordering.
///
/// Orderings starting with user 1 are visited lexicographically and, for
/// each, every file-index vector lexicographically. For `2 <= alpha <= K-1`
/// orderings and circular demands are in bijection; for `alpha` in `{1, K}`
/// every ordering fits every demand and the pairs repeat demands.
pub fn enumerate_circular_demands(s: &FdsStructure, cap: u64) -> Result<CircularDemands> {
    let required = circular_demand_count(s).unwrap_or(u128::MAX);
    if required > u128::from(cap) {
        return Err(Error::CapExceeded { required, cap });
    }
    Ok(CircularDemands {
        structure: *s,
        tail: (2..=s.users()).collect(),
        files: alloc::vec![1; s.users() as usize],
        done: false,
    })
}

#[derive(Clone, Debug)]
pub struct CircularDemands {
    structure: FdsStructure,
    tail: Vec<u32>,
    files: Vec<u32>,
    done: bool,
}

impl Iterator for CircularDemands {
    type Item = (Demand, UserPermutation);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut order = alloc::vec![1];
        order.extend_from_slice(&self.tail);
        let u = UserPermutation::new(order).expect("valid ordering");
        let dm = circular_demand(&self.structure, &u, self.files.clone()).expect("shape matches");

        let f = self.structure.files_per_class();
        let mut rolled = true;
        for pos in (0..self.files.len()).rev() {
            if self.files[pos] < f {
                self.files[pos] += 1;
                rolled = false;
                break;
            }
            self.files[pos] = 1;
        }
        if rolled && !next_permutation(&mut self.tail) {
            self.done = true;
        }
        Some((dm, u))
    }
}

/// A set `K` of `alpha` users that all request class `K` with pairwise
/// distinct file indices; the smallest such set in canonical order.
pub fn alpha_demand_witness(s: &FdsStructure, dm: &Demand) -> Result<Option<UserSet>> {
    ensure_valid(s, dm)?;
    Ok(s
        .classes()
        .find(|&group| group.iter().all(|k| dm.class_of(k) == group) && distinct_indices(dm, group)))
}

fn distinct_indices(dm: &Demand, group: UserSet) -> bool {
    let idx: Vec<u32> = group.iter().map(|k| dm.file_index_of(k)).collect();
    (0..idx.len()).all(|i| (i + 1..idx.len()).all(|j| idx[i] != idx[j]))
}

/// The `K` rotations of `u`, starting with `u` itself.
pub fn circular_shifts(u: &UserPermutation) -> Vec<UserPermutation> {
    (0..u.len()).map(|r| u.rotated(r)).collect()
}

/// Number of rotations of `u` in which `k1` precedes `k2`: `K - l`, where `l`
/// is the cyclic distance from `k1` forward to `k2`.
pub fn count_shifts_with_k1_before_k2(u: &UserPermutation, k1: u32, k2: u32) -> Result<u32> {
    check_pair(u, k1, k2)?;
    let n = u.len();
    let l = (u.position_of(k2) + n - u.position_of(k1)) % n;
    Ok((n - l) as u32)
}

/// Same count by inspecting every rotation.
pub fn count_shifts_by_rotation(u: &UserPermutation, k1: u32, k2: u32) -> Result<u32> {
    check_pair(u, k1, k2)?;
    Ok(circular_shifts(u)
        .iter()
        .filter(|r| r.position_of(k1) < r.position_of(k2))
        .count() as u32)
}

fn check_pair(u: &UserPermutation, k1: u32, k2: u32) -> Result<()> {
    let n = u.len() as u32;
    for user in [k1, k2] {
        if !(1..=n).contains(&user) {
            return Err(Error::UserOutOfRange { user, k: n });
        }
    }
    if k1 == k2 {
        return Err(Error::Unsupported("k1 and k2 must differ"));
    }
    Ok(())
}

/// `(K-1)!`, the number of canonical orderings.
pub fn canonical_ordering_count(k: u32) -> u128 {
    factorial(k.saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use std::collections::HashSet;

    use crate::fds::enumerate_valid_demands;

    fn set(digits: &str) -> UserSet {
        UserSet::from_users(digits.bytes().map(|b| u32::from(b - b'0')))
    }

    fn classes(list: &[&str]) -> Vec<UserSet> {
        list.iter().map(|d| set(d)).collect()
    }

    fn st(k: u32, alpha: u32, f: u32) -> FdsStructure {
        FdsStructure::new(k, alpha, f).unwrap()
    }

    fn perm(v: &[u32]) -> UserPermutation {
        UserPermutation::new(v.to_vec()).unwrap()
    }

    fn d1() -> Demand {
        Demand::first_files(classes(&["1234", "2345", "1345", "1245", "1235"]))
    }

    fn d2() -> Demand {
        Demand::first_files(classes(&["1234", "2345", "1235", "1245", "1345"]))
    }

    #[test]
    fn permutation_validation() {
        assert!(UserPermutation::new(vec![1, 1, 2]).is_err());
        assert!(UserPermutation::new(vec![0, 1]).is_err());
        assert!(UserPermutation::new(vec![1, 3]).is_err());
        let u = perm(&[3, 1, 2]);
        assert_eq!(u.position_of(3), 0);
        assert_eq!(u.at(4), 1);
        assert_eq!(u.window(2, 2), set("23"));
    }

    #[test]
    fn request_graph_bidirectional_counts() {
        let s = st(5, 4, 1);
        let g1 = fds_request_graph(&s, &d1()).unwrap();
        let g2 = fds_request_graph(&s, &d2()).unwrap();
        assert_eq!(g1.bidirectional_edge_count(), 5);
        assert_eq!(g2.bidirectional_edge_count(), 6);
        assert!(!g1.is_complete());
        assert_eq!(g1.is_isomorphic(&g2), Ok(false));
        // relabelling preserves isomorphism class
        let relabelled = d1().relabel(|k| [3, 5, 1, 2, 4][k as usize - 1]);
        let g3 = fds_request_graph(&s, &relabelled).unwrap();
        assert_eq!(g1.is_isomorphic(&g3), Ok(true));
    }

    #[test]
    fn request_graph_complete_when_alpha_is_k() {
        let s = st(4, 4, 4);
        for dm in enumerate_valid_demands(&s, 1_000).unwrap().take(50) {
            assert!(fds_request_graph(&s, &dm).unwrap().is_complete());
        }
    }

    #[test]
    fn circular_witness_examples() {
        let s = st(5, 4, 1);
        assert_eq!(circular_witness(&s, &d1()).unwrap(), Some(perm(&[1, 2, 3, 4, 5])));
        assert_eq!(circular_witness(&s, &d2()).unwrap(), None);
        assert_eq!(circular_witness_exhaustive(&s, &d2()).unwrap(), None);

        let s6 = st(6, 4, 1);
        let d = Demand::first_files(classes(&["1234", "2345", "3456", "1456", "1256", "1236"]));
        assert_eq!(circular_witness(&s6, &d).unwrap(), Some(UserPermutation::identity(6)));

        let invalid = Demand::first_files(classes(&["2345"; 5]));
        assert_eq!(circular_witness(&s, &invalid), Err(Error::InvalidDemand));
    }

    #[test]
    fn search_agrees_with_exhaustive_on_every_valid_demand() {
        for (k, alpha, f) in [(3, 2, 1), (4, 2, 1), (4, 3, 1), (5, 2, 1), (5, 3, 1), (5, 4, 1), (4, 2, 2)] {
            let s = st(k, alpha, f);
            for dm in enumerate_valid_demands(&s, 100_000).unwrap() {
                assert_eq!(
                    circular_witness(&s, &dm).unwrap(),
                    circular_witness_exhaustive(&s, &dm).unwrap(),
                    "{s} {dm}"
                );
            }
        }
    }

    #[test]
    fn circular_counts_cross_checked_by_filtering() {
        for (k, alpha, f, expected) in [(5, 4, 1, 24), (3, 2, 2, 16), (4, 2, 1, 6), (4, 3, 2, 96)] {
            let s = st(k, alpha, f);
            assert_eq!(circular_demand_count(&s), Some(expected));
            let enumerated: Vec<(Demand, UserPermutation)> =
                enumerate_circular_demands(&s, 10_000).unwrap().collect();
            assert_eq!(enumerated.len() as u128, expected);
            let distinct: HashSet<&Demand> = enumerated.iter().map(|(d, _)| d).collect();
            assert_eq!(distinct.len(), enumerated.len());
            let filtered = enumerate_valid_demands(&s, 1_000_000)
                .unwrap()
                .filter(|dm| circular_witness(&s, dm).unwrap().is_some())
                .count();
            assert_eq!(filtered as u128, expected, "{s}");
            for (dm, u) in &enumerated {
                assert_eq!(circular_witness(&s, dm).unwrap().as_ref(), Some(u));
            }
        }
    }

    #[test]
    fn six_four_one_has_120_circular_demands() {
        let s = st(6, 4, 1);
        assert_eq!(enumerate_circular_demands(&s, 1_000).unwrap().count(), 120);
        assert!(matches!(
            enumerate_circular_demands(&s, 119),
            Err(Error::CapExceeded { required: 120, cap: 119 })
        ));
    }

    #[test]
    fn circular_demands_hold_for_every_rotation() {
        let s = st(6, 3, 2);
        for (dm, u) in enumerate_circular_demands(&s, 100_000).unwrap() {
            for r in circular_shifts(&u) {
                assert!(is_circular_for(&s, &dm, &r));
            }
        }
    }

    #[test]
    fn alpha_demand_examples() {
        let s = st(5, 3, 3);
        let classes_v = classes(&["123", "123", "123", "124", "125"]);
        let dm = Demand::new(classes_v.clone(), vec![1, 2, 3, 1, 1]).unwrap();
        assert_eq!(alpha_demand_witness(&s, &dm).unwrap(), Some(set("123")));
        let dm = Demand::new(classes_v, vec![1, 1, 3, 1, 1]).unwrap();
        assert_eq!(alpha_demand_witness(&s, &dm).unwrap(), None);

        let s1 = st(5, 3, 1);
        for dm in enumerate_valid_demands(&s1, 1_000_000).unwrap() {
            assert_eq!(alpha_demand_witness(&s1, &dm).unwrap(), None);
        }
    }

    #[test]
    fn alpha_demand_skips_groups_with_repeated_files() {
        let s = st(6, 3, 3);
        let dm = Demand::new(
            classes(&["123", "123", "123", "456", "456", "456"]),
            vec![1, 1, 2, 1, 2, 3],
        )
        .unwrap();
        assert_eq!(alpha_demand_witness(&s, &dm).unwrap(), Some(set("456")));
        let dm = Demand::new(
            classes(&["123", "123", "123", "456", "456", "456"]),
            vec![3, 2, 1, 1, 2, 3],
        )
        .unwrap();
        assert_eq!(alpha_demand_witness(&s, &dm).unwrap(), Some(set("123")));
    }

    #[test]
    fn shifts_examples() {
        let shifts = circular_shifts(&perm(&[1, 2, 3]));
        assert_eq!(shifts, vec![perm(&[1, 2, 3]), perm(&[2, 3, 1]), perm(&[3, 1, 2])]);
        assert!(circular_shifts(&UserPermutation::identity(6)).contains(&perm(&[4, 5, 6, 1, 2, 3])));
        let all = circular_shifts(&perm(&[3, 1, 4, 2, 5]));
        let distinct: HashSet<&UserPermutation> = all.iter().collect();
        assert_eq!(distinct.len(), 5);
    }

    #[test]
    fn shift_count_examples() {
        let u = perm(&[1, 4, 3, 2, 5, 6]);
        assert_eq!(count_shifts_with_k1_before_k2(&u, 1, 2), Ok(3));
        assert_eq!(count_shifts_with_k1_before_k2(&u, 4, 3), Ok(5));
        assert!(count_shifts_with_k1_before_k2(&u, 2, 2).is_err());
        assert!(count_shifts_with_k1_before_k2(&u, 2, 7).is_err());
    }

    #[test]
    fn shift_count_matches_rotation_count_exhaustively() {
        for k in 2..=7u32 {
            let mut order: Vec<u32> = (1..=k).collect();
            loop {
                let u = UserPermutation::new(order.clone()).unwrap();
                for a in 1..=k {
                    for b in 1..=k {
                        if a != b {
                            assert_eq!(
                                count_shifts_with_k1_before_k2(&u, a, b),
                                count_shifts_by_rotation(&u, a, b)
                            );
                        }
                    }
                }
                if !next_permutation(&mut order) {
                    break;
                }
            }
        }
    }
}
