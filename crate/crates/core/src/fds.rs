//! The symmetric `(K, alpha, f)` file demand set structure.
//!
//! Users are numbered `1..=K`. The library is split into one class per
//! `alpha`-subset of users, each class holding `f` files; user `k` may only
//! ever request files from classes that contain `k`.

use alloc::vec::Vec;
use core::fmt;

use crate::combinatorics::{binom, colex_rank, subsets_of_size};
use crate::{Error, Rational, Result};

/// Largest supported number of users.
pub const MAX_USERS: u32 = 20;

/// A set of users, stored as a bitmask with bit `k` standing for user `k`.
///
/// Bit 0 is never set. Ordering is the integer value of the mask, which
/// coincides with colexicographic order among sets of equal size.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct UserSet(u32);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    /// Builds a set from raw bits.
    pub fn from_bits(bits: u32) -> Result<Self> {
        if bits & 1 != 0 || bits >> (MAX_USERS + 1) != 0 {
            return Err(Error::ShapeMismatch);
        }
        Ok(UserSet(bits))
    }

    /// # Panics
    /// If a user is outside `1..=20`.
    pub fn from_users<I: IntoIterator<Item = u32>>(users: I) -> Self {
        let mut bits = 0;
        for u in users {
            assert!((1..=MAX_USERS).contains(&u), "user {u} outside 1..=20");
            bits |= 1 << u;
        }
        UserSet(bits)
    }

    /// `{1, .., k}`.
    pub fn first(k: u32) -> Self {
        debug_assert!(k <= MAX_USERS);
        UserSet(((1u32 << k) - 1) << 1)
    }

    pub fn singleton(user: u32) -> Self {
        UserSet::from_users([user])
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, user: u32) -> bool {
        user <= MAX_USERS && self.0 & (1 << user) != 0
    }

    pub fn with(self, user: u32) -> Self {
        UserSet(self.0 | UserSet::singleton(user).0)
    }

    pub fn without(self, user: u32) -> Self {
        if user > MAX_USERS {
            return self;
        }
        UserSet(self.0 & !(1 << user))
    }

    pub fn union(self, other: Self) -> Self {
        UserSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        UserSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        UserSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = u32> + Clone {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let u = rest.trailing_zeros();
            rest &= rest - 1;
            Some(u)
        })
    }

    /// Subsets of `self` with `size` members, in canonical order.
    pub fn subsets(self, size: u32) -> impl Iterator<Item = UserSet> + Clone {
        subsets_of_size(self.0, size).map(UserSet)
    }

    /// Rank among the subsets of `[K]` of the same cardinality, colexicographic.
    pub fn rank(self) -> u128 {
        colex_rank(self.0 >> 1)
    }
}

impl fmt::Display for UserSet {
    /// Digit string (`1234`) when every member is below 10, dot-separated
    /// otherwise, `{}` for the empty set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let wide = self.iter().any(|u| u >= 10);
        for (i, u) in self.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{u}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, u) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str("}")
    }
}

/// The `(K, alpha, f)` parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FdsStructure {
    k: u32,
    alpha: u32,
    f: u32,
}

/// Table of counts derived from a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivedCounts {
    /// Number of file classes, `binom(K, alpha)`.
    pub classes: u128,
    /// Library size `N = f * classes`.
    pub library_size: u128,
    /// Files in one user's FDS, `f * binom(K-1, alpha-1)`.
    pub fds_size: u128,
    /// Fraction of users interested in one file, `alpha / K`.
    pub delta: Rational,
    /// Fraction of the library one user is interested in, `fds_size / N`.
    pub interest_fraction: Rational,
}

impl FdsStructure {
    pub fn new(k: u32, alpha: u32, f: u32) -> Result<Self> {
        if k == 0 || k > MAX_USERS || alpha == 0 || alpha > k || f == 0 {
            return Err(Error::InvalidStructure { k, alpha, f });
        }
        Ok(FdsStructure { k, alpha, f })
    }

    pub fn users(&self) -> u32 {
        self.k
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn files_per_class(&self) -> u32 {
        self.f
    }

    pub fn all_users(&self) -> UserSet {
        UserSet::first(self.k)
    }

    pub fn class_count(&self) -> u128 {
        binom(i64::from(self.k), i64::from(self.alpha))
    }

    pub fn library_size(&self) -> u128 {
        u128::from(self.f) * self.class_count()
    }

    pub fn fds_size(&self) -> u128 {
        u128::from(self.f) * binom(i64::from(self.k) - 1, i64::from(self.alpha) - 1)
    }

    pub fn derived_counts(&self) -> DerivedCounts {
        let library_size = self.library_size();
        let fds_size = self.fds_size();
        DerivedCounts {
            classes: self.class_count(),
            library_size,
            fds_size,
            delta: Rational::new(i64::from(self.alpha), i64::from(self.k))
                .expect("K is positive"),
            interest_fraction: Rational::from_counts(fds_size, library_size)
                .expect("library sizes fit in i64 for K <= 20"),
        }
    }

    /// Every file class, in canonical order.
    pub fn classes(&self) -> impl Iterator<Item = UserSet> + Clone {
        self.all_users().subsets(self.alpha)
    }

    pub fn check_user(&self, user: u32) -> Result<()> {
        if (1..=self.k).contains(&user) {
            Ok(())
        } else {
            Err(Error::UserOutOfRange { user, k: self.k })
        }
    }

    /// Classes in the FDS of `user`: the `alpha`-subsets that contain it.
    pub fn fds_of_user(&self, user: u32) -> Result<Vec<UserSet>> {
        self.check_user(user)?;
        Ok(self.classes().filter(|c| c.contains(user)).collect())
    }

    /// Every file `user` may request, ordered by class then file index.
    pub fn files_of_user(&self, user: u32) -> Result<Vec<FileRef>> {
        let classes = self.fds_of_user(user)?;
        Ok(classes
            .into_iter()
            .flat_map(|class| (1..=self.f).map(move |index| FileRef { class, index }))
            .collect())
    }

    /// Closed-form number of valid demands, `(f * binom(K-1, alpha-1))^K`.
    pub fn valid_demand_count(&self) -> Option<u128> {
        self.fds_size().checked_pow(self.k)
    }
}

impl fmt::Display for FdsStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.k, self.alpha, self.f)
    }
}

/// File `W_{index, class}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FileRef {
    pub class: UserSet,
    /// 1-based index within the class.
    pub index: u32,
}

impl FileRef {
    pub fn new(class: UserSet, index: u32) -> Self {
        FileRef { class, index }
    }
}

/// A demand: user `k` requests file `files[k-1]` of class `classes[k-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Demand {
    classes: Vec<UserSet>,
    files: Vec<u32>,
}

impl Demand {
    pub fn new(classes: Vec<UserSet>, files: Vec<u32>) -> Result<Self> {
        if classes.len() != files.len() {
            return Err(Error::ShapeMismatch);
        }
        Ok(Demand { classes, files })
    }

    /// Every user asks for file index 1 of its class.
    pub fn first_files(classes: Vec<UserSet>) -> Self {
        let files = alloc::vec![1; classes.len()];
        Demand { classes, files }
    }

    pub fn users(&self) -> u32 {
        self.classes.len() as u32
    }

    pub fn classes(&self) -> &[UserSet] {
        &self.classes
    }

    pub fn files(&self) -> &[u32] {
        &self.files
    }

    /// Class requested by `user` (1-based).
    pub fn class_of(&self, user: u32) -> UserSet {
        self.classes[user as usize - 1]
    }

    pub fn file_index_of(&self, user: u32) -> u32 {
        self.files[user as usize - 1]
    }

    pub fn requested(&self, user: u32) -> FileRef {
        FileRef::new(self.class_of(user), self.file_index_of(user))
    }

    /// Renames users by `map`: the user formerly called `k` becomes `map(k)`.
    pub fn relabel(&self, map: impl Fn(u32) -> u32) -> Demand {
        let n = self.classes.len();
        let mut classes = alloc::vec![UserSet::EMPTY; n];
        let mut files = alloc::vec![0; n];
        for k in 1..=n as u32 {
            let to = map(k) as usize - 1;
            classes[to] = UserSet::from_users(self.class_of(k).iter().map(&map));
            files[to] = self.file_index_of(k);
        }
        Demand { classes, files }
    }
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("d=(")?;
        for (i, c) in self.classes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(") f=(")?;
        for (i, x) in self.files.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

fn check_shape(s: &FdsStructure, dm: &Demand) -> Result<()> {
    let all = s.all_users();
    if dm.users() != s.users()
        || dm
            .classes
            .iter()
            .any(|c| c.len() != s.alpha() || !c.is_subset(all))
    {
        return Err(Error::ShapeMismatch);
    }
    Ok(())
}

/// Validity: every user requests a file from its own FDS, with a file index in
/// `1..=f`.
pub fn is_valid_demand(s: &FdsStructure, dm: &Demand) -> Result<bool> {
    check_shape(s, dm)?;
    Ok((1..=s.users()).all(|k| {
        dm.class_of(k).contains(k) && (1..=s.files_per_class()).contains(&dm.file_index_of(k))
    }))
}

/// [`is_valid_demand`] as a precondition.
pub fn ensure_valid(s: &FdsStructure, dm: &Demand) -> Result<()> {
    if is_valid_demand(s, dm)? {
        Ok(())
    } else {
        Err(Error::InvalidDemand)
    }
}

/// Every valid demand exactly once, in lexicographic order of the per-user
/// `(class, file index)` choices with user 1 most significant.
pub fn enumerate_valid_demands(s: &FdsStructure, cap: u64) -> Result<ValidDemands> {
    let required = s.valid_demand_count().unwrap_or(u128::MAX);
    if required > u128::from(cap) {
        return Err(Error::CapExceeded { required, cap });
    }
    let options = (1..=s.users())
        .map(|k| s.files_of_user(k))
        .collect::<Result<Vec<_>>>()?;
    let counters = alloc::vec![0; options.len()];
    Ok(ValidDemands { options, counters, done: false })
}

#[derive(Clone, Debug)]
pub struct ValidDemands {
    options: Vec<Vec<FileRef>>,
    counters: Vec<usize>,
    done: bool,
}

impl Iterator for ValidDemands {
    type Item = Demand;

    fn next(&mut self) -> Option<Demand> {
        if self.done {
            return None;
        }
        let picks = self.counters.iter().zip(&self.options).map(|(&i, opts)| opts[i]);
        let classes = picks.clone().map(|file| file.class).collect();
        let files = picks.map(|file| file.index).collect();
        // Odometer, last user fastest.
        self.done = true;
        for pos in (0..self.counters.len()).rev() {
            self.counters[pos] += 1;
            if self.counters[pos] < self.options[pos].len() {
                self.done = false;
                break;
            }
            self.counters[pos] = 0;
        }
        Some(Demand { classes, files })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use std::collections::HashSet;

    pub(crate) fn set(digits: &str) -> UserSet {
        UserSet::from_users(digits.bytes().map(|b| u32::from(b - b'0')))
    }

    fn classes(list: &[&str]) -> Vec<UserSet> {
        list.iter().map(|d| set(d)).collect()
    }

    #[test]
    fn user_set_basics() {
        let s = set("134");
        assert_eq!(s.len(), 3);
        assert!(s.contains(3) && !s.contains(2) && !s.contains(0) && !s.contains(40));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3, 4]);
        assert_eq!(s.without(3), set("14"));
        assert!(set("14").is_subset(s));
        assert_eq!(UserSet::first(4), set("1234"));
        assert_eq!(alloc::format!("{s}"), "134");
        assert_eq!(alloc::format!("{}", UserSet::from_users([2, 11])), "2.11");
        assert!(UserSet::from_bits(1).is_err());
        assert!(UserSet::from_bits(1 << 21).is_err());
    }

    #[test]
    fn structure_validation() {
        assert!(FdsStructure::new(5, 4, 1).is_ok());
        assert!(FdsStructure::new(20, 20, 1).is_ok());
        assert!(FdsStructure::new(21, 2, 1).is_err());
        assert!(FdsStructure::new(4, 5, 1).is_err());
        assert!(FdsStructure::new(4, 0, 1).is_err());
        assert!(FdsStructure::new(4, 2, 0).is_err());
        assert!(FdsStructure::new(0, 0, 1).is_err());
    }

    #[test]
    fn derived_counts_examples() {
        let c = FdsStructure::new(4, 2, 1).unwrap().derived_counts();
        assert_eq!((c.library_size, c.fds_size), (6, 3));
        let c = FdsStructure::new(4, 3, 2).unwrap().derived_counts();
        assert_eq!((c.library_size, c.fds_size), (8, 6));
        let c = FdsStructure::new(5, 3, 3).unwrap().derived_counts();
        assert_eq!((c.classes, c.library_size), (10, 30));
        assert_eq!(c.delta, Rational::new(3, 5).unwrap());
    }

    #[test]
    fn interest_fraction_equals_delta() {
        for k in 1..=MAX_USERS {
            for alpha in 1..=k {
                for f in [1, 3] {
                    let c = FdsStructure::new(k, alpha, f).unwrap().derived_counts();
                    assert_eq!(c.interest_fraction, c.delta, "K={k} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn fds_of_user_examples() {
        let s = FdsStructure::new(4, 2, 1).unwrap();
        assert_eq!(s.fds_of_user(1).unwrap(), classes(&["12", "13", "14"]));
        let s = FdsStructure::new(5, 4, 1).unwrap();
        assert_eq!(
            s.fds_of_user(5).unwrap(),
            classes(&["1235", "1245", "1345", "2345"])
        );
        let s = FdsStructure::new(6, 6, 7).unwrap();
        for k in 1..=6 {
            assert_eq!(s.fds_of_user(k).unwrap(), vec![UserSet::first(6)]);
        }
        assert_eq!(s.fds_of_user(0), Err(Error::UserOutOfRange { user: 0, k: 6 }));
        assert_eq!(s.fds_of_user(7), Err(Error::UserOutOfRange { user: 7, k: 6 }));
    }

    #[test]
    fn every_class_lies_in_exactly_alpha_fdss() {
        for (k, alpha) in [(4, 2), (5, 3), (6, 4), (7, 1), (7, 7)] {
            let s = FdsStructure::new(k, alpha, 1).unwrap();
            for class in s.classes() {
                let holders = (1..=k)
                    .filter(|&u| s.fds_of_user(u).unwrap().contains(&class))
                    .count();
                assert_eq!(holders as u32, alpha);
            }
            for u in 1..=k {
                let fds = s.fds_of_user(u).unwrap();
                assert_eq!(fds.len() as u128, binom(i64::from(k) - 1, i64::from(alpha) - 1));
                assert!(fds.iter().all(|c| c.contains(u)));
            }
        }
    }

    #[test]
    fn validity_examples() {
        let s = FdsStructure::new(4, 3, 2).unwrap();
        let bad = Demand::first_files(classes(&["234", "123", "123", "234"]));
        assert_eq!(is_valid_demand(&s, &bad), Ok(false));
        let good = Demand::first_files(classes(&["124", "123", "123", "234"]));
        assert_eq!(is_valid_demand(&s, &good), Ok(true));
        let out_of_range = Demand::new(classes(&["124", "123", "123", "234"]), vec![1, 3, 1, 1]).unwrap();
        assert_eq!(is_valid_demand(&s, &out_of_range), Ok(false));
        let short = Demand::first_files(classes(&["124", "123", "123"]));
        assert_eq!(is_valid_demand(&s, &short), Err(Error::ShapeMismatch));
        let wrong_size = Demand::first_files(classes(&["12", "123", "123", "234"]));
        assert_eq!(is_valid_demand(&s, &wrong_size), Err(Error::ShapeMismatch));

        let s = FdsStructure::new(4, 4, 4).unwrap();
        let all = Demand::new(vec![UserSet::first(4); 4], vec![1, 2, 3, 4]).unwrap();
        assert_eq!(is_valid_demand(&s, &all), Ok(true));
    }

    #[test]
    fn valid_demand_enumeration_counts() {
        for (k, alpha, f, expected) in [(2, 1, 1, 1), (3, 2, 1, 8), (4, 2, 1, 81), (3, 2, 2, 64)] {
            let s = FdsStructure::new(k, alpha, f).unwrap();
            assert_eq!(s.valid_demand_count(), Some(expected));
            let all: Vec<Demand> = enumerate_valid_demands(&s, 1_000).unwrap().collect();
            assert_eq!(all.len() as u128, expected);
            assert!(all.iter().all(|d| is_valid_demand(&s, d) == Ok(true)));
            let distinct: HashSet<&Demand> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            // lexicographic order of (class, index) choices equals derived Ord on the pairs
            let keys: Vec<Vec<FileRef>> = all
                .iter()
                .map(|d| (1..=k).map(|u| d.requested(u)).collect())
                .collect();
            assert!(keys.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn enumeration_cap_is_explicit() {
        let s = FdsStructure::new(4, 2, 1).unwrap();
        assert_eq!(
            enumerate_valid_demands(&s, 80).err(),
            Some(Error::CapExceeded { required: 81, cap: 80 })
        );
    }

    #[test]
    fn relabel_maps_classes_and_positions() {
        let d = Demand::new(classes(&["12", "23", "13"]), vec![1, 2, 3]).unwrap();
        // 1 -> 2 -> 3 -> 1
        let r = d.relabel(|k| k % 3 + 1);
        assert_eq!(r.class_of(2), set("23"));
        assert_eq!(r.class_of(3), set("13"));
        assert_eq!(r.class_of(1), set("12"));
        assert_eq!(r.files(), &[3, 1, 2]);
    }
}
