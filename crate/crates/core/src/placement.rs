//! Uncoded cache placements: the selfish MAN-style placement and the
//! unselfish MAN baseline.
//!
//! Cache contents are never stored; they are generated combinatorially from
//! `(structure, t, kind)`. [`Placement::cache`] materializes one user's cache
//! when a concrete list is needed.

use alloc::vec::Vec;
use core::fmt;

use crate::combinatorics::binom;
use crate::fds::{ensure_valid, Demand, FdsStructure, FileRef, UserSet};
use crate::{Error, Rational, Result};

/// Subfile `W_{i, S, T}`: the piece of file `W_{i, S}` cached exactly by the
/// users in `tag`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubfileId {
    pub file: FileRef,
    pub tag: UserSet,
}

impl SubfileId {
    pub fn new(file: FileRef, tag: UserSet) -> Self {
        SubfileId { file, tag }
    }
}

impl fmt::Display for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{},{},{}]", self.file.index, self.file.class, self.tag)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlacementKind {
    /// Files split into `binom(alpha, t)` pieces tagged by `t`-subsets of their
    /// own class; user `k` caches the pieces whose tag contains `k`.
    SelfishMan,
    /// Files split into `binom(K, t)` pieces tagged by `t`-subsets of `[K]`.
    UnselfishMan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    structure: FdsStructure,
    t: u32,
    kind: PlacementKind,
}

pub fn selfish_man_placement(s: &FdsStructure, t: u32) -> Result<Placement> {
    if t > s.alpha() {
        return Err(Error::OutOfRange {
            what: "t",
            value: i64::from(t),
            min: 0,
            max: i64::from(s.alpha()),
        });
    }
    Ok(Placement { structure: *s, t, kind: PlacementKind::SelfishMan })
}

pub fn unselfish_man_placement(s: &FdsStructure, t: u32) -> Result<Placement> {
    if t > s.users() {
        return Err(Error::OutOfRange {
            what: "t",
            value: i64::from(t),
            min: 0,
            max: i64::from(s.users()),
        });
    }
    Ok(Placement { structure: *s, t, kind: PlacementKind::UnselfishMan })
}

impl Placement {
    pub fn structure(&self) -> &FdsStructure {
        &self.structure
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn kind(&self) -> PlacementKind {
        self.kind
    }

    /// Number of equal pieces per file.
    pub fn subpacketization(&self) -> u128 {
        let n = match self.kind {
            PlacementKind::SelfishMan => self.structure.alpha(),
            PlacementKind::UnselfishMan => self.structure.users(),
        };
        binom(i64::from(n), i64::from(self.t))
    }

    /// Size of one subfile in file units.
    pub fn subfile_size(&self) -> Rational {
        Rational::from_counts(1, self.subpacketization()).expect("subpacketization fits in i64")
    }

    /// Cache size `M = tN/K` in file units.
    pub fn memory(&self) -> Rational {
        let s = &self.structure;
        Rational::from_counts(u128::from(self.t) * s.library_size(), u128::from(s.users()))
            .expect("memory fits in i64")
    }

    /// Universe the tags of a file in `class` are drawn from.
    fn tag_universe(&self, class: UserSet) -> UserSet {
        match self.kind {
            PlacementKind::SelfishMan => class,
            PlacementKind::UnselfishMan => self.structure.all_users(),
        }
    }

    /// Tags of the subfiles of any file in `class`, canonical order.
    pub fn tags(&self, class: UserSet) -> impl Iterator<Item = UserSet> + Clone {
        self.tag_universe(class).subsets(self.t)
    }

    pub fn subfiles_of(&self, file: FileRef) -> impl Iterator<Item = SubfileId> + Clone {
        self.tags(file.class).map(move |tag| SubfileId::new(file, tag))
    }

    /// Whether `id` names a subfile that exists under this placement.
    pub fn contains(&self, id: &SubfileId) -> bool {
        let s = &self.structure;
        let all = s.all_users();
        (1..=s.files_per_class()).contains(&id.file.index)
            && id.file.class.len() == s.alpha()
            && id.file.class.is_subset(all)
            && id.tag.len() == self.t
            && id.tag.is_subset(self.tag_universe(id.file.class))
    }

    /// Whether `user` has `id` in its cache (assumes `self.contains(id)`).
    pub fn is_cached(&self, user: u32, id: &SubfileId) -> bool {
        id.tag.contains(user)
    }

    /// Materialized cache of `user`, ordered by class, file index, tag.
    pub fn cache(&self, user: u32) -> Result<Vec<SubfileId>> {
        self.structure.check_user(user)?;
        let s = self.structure;
        let mut out = Vec::new();
        for class in s.classes() {
            for index in 1..=s.files_per_class() {
                let file = FileRef::new(class, index);
                out.extend(self.subfiles_of(file).filter(|id| id.tag.contains(user)));
            }
        }
        Ok(out)
    }

    /// Subfiles of the file `user` requests in `dm` that are not in its cache.
    pub fn desired_subfiles(&self, dm: &Demand, user: u32) -> Result<Vec<SubfileId>> {
        ensure_valid(&self.structure, dm)?;
        self.structure.check_user(user)?;
        let file = dm.requested(user);
        Ok(self
            .tag_universe(file.class)
            .without(user)
            .subsets(self.t)
            .map(|tag| SubfileId::new(file, tag))
            .collect())
    }
}

/// Selfishness: every subfile cached at user `k` belongs to a file whose class
/// contains `k`.
pub fn is_selfish(p: &Placement) -> bool {
    let s = p.structure();
    (1..=s.users()).all(|k| {
        s.classes()
            .filter(|class| !class.contains(k))
            .all(|class| !p.tags(class).any(|tag| tag.contains(k)))
    })
}

/// [`Placement::desired_subfiles`] as a free function.
pub fn desired_subfiles(p: &Placement, dm: &Demand, user: u32) -> Result<Vec<SubfileId>> {
    p.desired_subfiles(dm, user)
}
