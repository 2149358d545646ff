//! Brute-force reconstruction of the converse on small instances.
//!
//! Every bound here comes from the acyclic-subgraph argument of index coding:
//! the desired subfiles form a side-information graph, and the total size of
//! any vertex set inducing no directed cycle lower-bounds the broadcast. The
//! acyclic sets used are built from a user ordering `u`: user `u_i` keeps the
//! subfiles of its request whose tag avoids `u_1, .., u_i`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::combinatorics::{binom, checked_factorial};
use crate::demands::{
    alpha_demand_witness, circular_demand_count, circular_shifts, enumerate_circular_demands,
    UserPermutation,
};
use crate::fds::{ensure_valid, Demand, FdsStructure, FileRef, UserSet};
use crate::placement::{Placement, PlacementKind, SubfileId};
use crate::{Error, Rational, Result};

/// Desired subfile seen from the user that wants it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub owner: u32,
    pub subfile: SubfileId,
}

/// Aggregated sizes of a general selfish split: every file is cut into one
/// piece per subset of its class, and `x[j]` is the total size of the pieces
/// whose tag has `j` users. Pieces of equal tag size share `x[j]` equally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralPlacementProfile {
    alpha: u32,
    x: Vec<Rational>,
}

impl GeneralPlacementProfile {
    pub fn new(alpha: u32, x: Vec<Rational>) -> Result<Self> {
        if x.len() != alpha as usize + 1 {
            return Err(Error::ShapeMismatch);
        }
        if x.iter().any(|v| *v < 0) || x.iter().copied().sum::<Rational>() != Rational::ONE {
            return Err(Error::OutOfRange { what: "profile sum", value: 0, min: 1, max: 1 });
        }
        Ok(GeneralPlacementProfile { alpha, x })
    }

    /// All mass on tag size `t`: the MAN-style split.
    pub fn man(alpha: u32, t: u32) -> Result<Self> {
        if t > alpha {
            return Err(Error::OutOfRange {
                what: "t",
                value: i64::from(t),
                min: 0,
                max: i64::from(alpha),
            });
        }
        let mut x = alloc::vec![Rational::ZERO; alpha as usize + 1];
        x[t as usize] = Rational::ONE;
        Ok(GeneralPlacementProfile { alpha, x })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn weights(&self) -> &[Rational] {
        &self.x
    }

    /// Size of one piece with a `j`-user tag.
    pub fn piece_size(&self, j: u32) -> Rational {
        self.x[j as usize]
            / Rational::from_counts(binom(i64::from(self.alpha), i64::from(j)), 1).expect("binomial fits in i64")
    }

    /// Cache-size redundancy `sum_j j x_j`, i.e. `KM/N`.
    pub fn redundancy(&self) -> Rational {
        self.x.iter().enumerate().map(|(j, v)| Rational::integer(j as i64) * *v).sum()
    }
}

/// Index-coding side-information graph over the desired subfiles.
#[derive(Clone, Debug)]
pub struct SideInfoGraph {
    vertices: Vec<Vertex>,
    /// Out-neighbours by vertex index.
    out: Vec<Vec<usize>>,
}

impl SideInfoGraph {
    /// Edges `v1 -> v2` whenever the owner of `v2` caches `v1`.
    pub fn new(vertices: Vec<Vertex>) -> Self {
        let out = vertices
            .iter()
            .map(|v1| {
                (0..vertices.len())
                    .filter(|&j| v1.subfile.tag.contains(vertices[j].owner))
                    .collect()
            })
            .collect();
        SideInfoGraph { vertices, out }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out[from].contains(&to)
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Kahn's elimination, always removing the lowest-index source.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.vertices.len();
        let mut indeg = alloc::vec![0usize; n];
        for targets in &self.out {
            for &j in targets {
                indeg[j] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &j in &self.out[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(Error::NotAcyclic)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }
}

/// Whether the subgraph induced by `vertices` has no directed cycle.
pub fn is_acyclic(vertices: &[Vertex]) -> bool {
    SideInfoGraph::new(vertices.to_vec()).is_acyclic()
}

fn require_selfish(p: &Placement) -> Result<()> {
    if p.kind() == PlacementKind::SelfishMan {
        Ok(())
    } else {
        Err(Error::Unsupported("oracle requires the selfish placement"))
    }
}

/// Side-information graph of `dm` under the MAN-style selfish split.
pub fn side_info_graph(p: &Placement, dm: &Demand) -> Result<SideInfoGraph> {
    require_selfish(p)?;
    let mut vertices = Vec::new();
    for k in 1..=p.structure().users() {
        vertices.extend(p.desired_subfiles(dm, k)?.into_iter().map(|subfile| Vertex { owner: k, subfile }));
    }
    Ok(SideInfoGraph::new(vertices))
}

fn check_ordering(s: &FdsStructure, u: &UserPermutation) -> Result<()> {
    if u.len() == s.users() as usize {
        Ok(())
    } else {
        Err(Error::ShapeMismatch)
    }
}

/// Acyclic set from ordering `u` over pieces of every tag size (general
/// split). A subfile requested by several users is kept once, for the first
/// of them in `u`.
pub fn acyclic_set_general(s: &FdsStructure, dm: &Demand, u: &UserPermutation) -> Result<Vec<Vertex>> {
    acyclic_set_sizes(s, dm, u, None)
}

/// Acyclic set from ordering `u` under the MAN-style split of `p`.
pub fn acyclic_set(p: &Placement, dm: &Demand, u: &UserPermutation) -> Result<Vec<Vertex>> {
    require_selfish(p)?;
    acyclic_set_sizes(p.structure(), dm, u, Some(p.t()))
}

fn acyclic_set_sizes(
    s: &FdsStructure,
    dm: &Demand,
    u: &UserPermutation,
    size: Option<u32>,
) -> Result<Vec<Vertex>> {
    ensure_valid(s, dm)?;
    check_ordering(s, u)?;
    let mut seen_before = UserSet::EMPTY;
    let mut taken: BTreeSet<SubfileId> = BTreeSet::new();
    let mut out = Vec::new();
    for i in 0..u.len() {
        let owner = u.at(i);
        seen_before = seen_before.with(owner);
        let file: FileRef = dm.requested(owner);
        let avail = file.class.difference(seen_before);
        let sizes = match size {
            Some(t) => t..=t,
            None => 0..=avail.len(),
        };
        for j in sizes {
            for tag in avail.subsets(j) {
                let subfile = SubfileId::new(file, tag);
                if taken.insert(subfile) {
                    out.push(Vertex { owner, subfile });
                }
            }
        }
    }
    Ok(out)
}

/// Acyclic-set bound for ordering `u`, in file units.
pub fn index_coding_bound(p: &Placement, dm: &Demand, u: &UserPermutation) -> Result<Rational> {
    let set = acyclic_set(p, dm, u)?;
    if !is_acyclic(&set) {
        return Err(Error::NotAcyclic);
    }
    Rational::from_counts(set.len() as u128, p.subpacketization())
}

/// Acyclic-set bound for ordering `u` under a general split profile.
pub fn index_coding_bound_profile(
    s: &FdsStructure,
    profile: &GeneralPlacementProfile,
    dm: &Demand,
    u: &UserPermutation,
) -> Result<Rational> {
    if profile.alpha() != s.alpha() {
        return Err(Error::ShapeMismatch);
    }
    let set = acyclic_set_general(s, dm, u)?;
    if !is_acyclic(&set) {
        return Err(Error::NotAcyclic);
    }
    let mut total = Rational::ZERO;
    for v in &set {
        total = total.checked_add(&profile.piece_size(v.subfile.tag.len()))?;
    }
    Ok(total)
}

/// Mean of the acyclic-set bounds over every circular demand and every
/// rotation of its ordering, with the number of bounds averaged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AveragedBound {
    pub value: Rational,
    pub bounds: u128,
}

/// `f^K K!`: bounds averaged for one structure.
pub fn circular_bound_count(s: &FdsStructure) -> Option<u128> {
    circular_demand_count(s)?.checked_mul(u128::from(s.users()))
}

fn check_bound_cap(s: &FdsStructure, cap: u64) -> Result<()> {
    let required = circular_bound_count(s).unwrap_or(u128::MAX);
    if required > u128::from(cap) {
        return Err(Error::CapExceeded { required, cap });
    }
    Ok(())
}

/// Sum and count of profile bounds over the given circular demands and all
/// rotations of their orderings. Lets callers split the enumeration.
pub fn circular_bound_sum<I>(
    s: &FdsStructure,
    profile: &GeneralPlacementProfile,
    demands: I,
) -> Result<(Rational, u128)>
where
    I: IntoIterator<Item = (Demand, UserPermutation)>,
{
    let mut total = Rational::ZERO;
    let mut count = 0u128;
    for (dm, u) in demands {
        for r in circular_shifts(&u) {
            total = total.checked_add(&index_coding_bound_profile(s, profile, &dm, &r)?)?;
            count += 1;
        }
    }
    Ok((total, count))
}

/// Average of the circular bounds under the MAN-style split at `t`.
pub fn averaged_circular_bound(s: &FdsStructure, t: u32, cap: u64) -> Result<AveragedBound> {
    averaged_circular_bound_profile(s, &GeneralPlacementProfile::man(s.alpha(), t)?, cap)
}

/// Average of the circular bounds under a general split profile.
pub fn averaged_circular_bound_profile(
    s: &FdsStructure,
    profile: &GeneralPlacementProfile,
    cap: u64,
) -> Result<AveragedBound> {
    check_bound_cap(s, cap)?;
    let (total, bounds) = circular_bound_sum(s, profile, enumerate_circular_demands(s, cap)?)?;
    let value = total.checked_div(&Rational::from_counts(bounds, 1)?)?;
    Ok(AveragedBound { value, bounds })
}

/// Number of (circular demand, rotation) acyclic sets, under the MAN-style
/// split at `t`, that contain `subfile`.
pub fn subfile_appearance_count(s: &FdsStructure, t: u32, subfile: &SubfileId, cap: u64) -> Result<u128> {
    let counts = appearance_counts(s, t, cap)?;
    Ok(counts.iter().find(|(id, _)| id == subfile).map_or(0, |(_, c)| *c))
}

/// Appearance count of every subfile that appears at all, sorted by subfile.
pub fn appearance_counts(s: &FdsStructure, t: u32, cap: u64) -> Result<Vec<(SubfileId, u128)>> {
    check_bound_cap(s, cap)?;
    let p = crate::placement::selfish_man_placement(s, t)?;
    let mut counts: alloc::collections::BTreeMap<SubfileId, u128> = Default::default();
    for (dm, u) in enumerate_circular_demands(s, cap)? {
        for r in circular_shifts(&u) {
            for v in acyclic_set(&p, &dm, &r)? {
                *counts.entry(v.subfile).or_default() += 1;
            }
        }
    }
    Ok(counts.into_iter().collect())
}

/// Closed-form appearance count `(a - t) sum_{l=t}^{a-1} a_l (K - l)` with
/// `a_l = t! (a-1-t)! (K-a)! w(l, t) f^(K-1)`, where `w(l, t)` is
/// `binom(l-1, t-1)` and, for `t = 0`, 1 at `l = 0` only.
pub fn appearance_count_formula(s: &FdsStructure, t: u32) -> Result<u128> {
    let (k, a, f) = (s.users(), s.alpha(), s.files_per_class());
    if t > a {
        return Err(Error::OutOfRange { what: "t", value: i64::from(t), min: 0, max: i64::from(a) });
    }
    if t == a {
        return Ok(0);
    }
    let fact = |n: u32| checked_factorial(n).ok_or(Error::Overflow);
    let base = fact(t)?
        .checked_mul(fact(a - 1 - t)?)
        .and_then(|v| v.checked_mul(checked_factorial(k - a)?))
        .and_then(|v| v.checked_mul(u128::from(f).checked_pow(k - 1)?))
        .ok_or(Error::Overflow)?;
    let mut sum = 0u128;
    for l in t..a {
        let w = if t == 0 { u128::from(l == 0) } else { binom(i64::from(l) - 1, i64::from(t) - 1) };
        sum += base * w * u128::from(k - l);
    }
    Ok(u128::from(a - t) * sum)
}

/// An alpha-demand whose outside users keep the acyclic structure used by
/// the converse: the users of `group` request files `1..=alpha` of class
/// `group` in ascending order, and every other user `k` requests file 1 of
/// class `core + {k}`.
pub fn alpha_demand_with_acyclic_outside(s: &FdsStructure, group: UserSet, core: UserSet) -> Result<Demand> {
    if s.files_per_class() < s.alpha() {
        return Err(Error::Unsupported("an alpha-demand needs f >= alpha"));
    }
    if group.len() != s.alpha() || !group.is_subset(s.all_users()) {
        return Err(Error::ShapeMismatch);
    }
    if core.len() + 1 != s.alpha() || !core.is_subset(group) {
        return Err(Error::ShapeMismatch);
    }
    let mut classes = Vec::new();
    let mut files = Vec::new();
    let mut next = 1;
    for k in 1..=s.users() {
        if group.contains(k) {
            classes.push(group);
            files.push(next);
            next += 1;
        } else {
            classes.push(core.with(k));
            files.push(1);
        }
    }
    Demand::new(classes, files)
}

/// Converse for an alpha-demand: outside users' desired subfiles, then the
/// group users in ascending order keeping tags that avoid the group users
/// already visited. Fails with [`Error::NotAcyclic`] if the outside requests
/// create a cycle.
pub fn alpha_demand_converse(p: &Placement, dm: &Demand) -> Result<Rational> {
    require_selfish(p)?;
    let s = p.structure();
    let group = alpha_demand_witness(s, dm)?.ok_or(Error::NotAlphaDemand)?;
    let mut set = Vec::new();
    for k in s.all_users().difference(group).iter() {
        set.extend(p.desired_subfiles(dm, k)?.into_iter().map(|subfile| Vertex { owner: k, subfile }));
    }
    let mut visited = UserSet::EMPTY;
    for k in group.iter() {
        visited = visited.with(k);
        let file = dm.requested(k);
        set.extend(
            group
                .difference(visited)
                .subsets(p.t())
                .map(|tag| Vertex { owner: k, subfile: SubfileId::new(file, tag) }),
        );
    }
    SideInfoGraph::new(set.clone()).topological_order()?;
    Rational::from_counts(set.len() as u128, p.subpacketization())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::r_lb;
    use crate::placement::selfish_man_placement;
    use crate::DEFAULT_CAP;
    use alloc::vec;

    fn set(digits: &str) -> UserSet {
        UserSet::from_users(digits.bytes().map(|b| u32::from(b - b'0')))
    }

    fn st(k: u32, alpha: u32, f: u32) -> FdsStructure {
        FdsStructure::new(k, alpha, f).unwrap()
    }

    fn d1() -> Demand {
        Demand::first_files(["1234", "2345", "1345", "1245", "1235"].map(set).to_vec())
    }

    #[test]
    fn side_info_graph_shape() {
        let s = st(5, 4, 1);
        let p = selfish_man_placement(&s, 2).unwrap();
        let g = side_info_graph(&p, &d1()).unwrap();
        assert_eq!(g.vertices().len(), 15);
        for (i, v1) in g.vertices().iter().enumerate() {
            for (j, v2) in g.vertices().iter().enumerate() {
                assert_eq!(g.has_edge(i, j), v1.subfile.tag.contains(v2.owner));
            }
        }
        assert!(!g.is_acyclic());
        let p = selfish_man_placement(&s, 4).unwrap();
        assert!(side_info_graph(&p, &d1()).unwrap().vertices().is_empty());
    }

    #[test]
    fn identity_ordering_bound() {
        let s = st(5, 4, 1);
        let p = selfish_man_placement(&s, 2).unwrap();
        let u = UserPermutation::identity(5);
        let set = acyclic_set(&p, &d1(), &u).unwrap();
        assert!(is_acyclic(&set));
        // The last user sees no users left to tag with.
        assert!(set.iter().all(|v| v.owner != 5));
        let b = index_coding_bound(&p, &d1(), &u).unwrap();
        assert!(b <= Rational::new(7, 6).unwrap() && b >= 0);
        let p0 = selfish_man_placement(&s, 0).unwrap();
        assert_eq!(index_coding_bound(&p0, &d1(), &u), Ok(Rational::integer(5)));
    }

    #[test]
    fn small_averages_match_converse() {
        for (k, a, f) in [(4, 3, 1), (5, 4, 1), (4, 2, 2)] {
            let s = st(k, a, f);
            for t in 0..=a {
                let avg = averaged_circular_bound(&s, t, DEFAULT_CAP).unwrap();
                assert_eq!(Ok(avg.value), r_lb(k, a, t), "({k},{a},{f}) t={t}");
                assert_eq!(Some(avg.bounds), circular_bound_count(&s));
            }
        }
    }

    #[test]
    fn profile_average_is_linear_in_weights() {
        let s = st(5, 3, 1);
        let h = Rational::new(1, 2).unwrap();
        let profile = GeneralPlacementProfile::new(3, vec![Rational::ZERO, h, Rational::ZERO, h]).unwrap();
        let avg = averaged_circular_bound_profile(&s, &profile, DEFAULT_CAP).unwrap();
        let expected = h * r_lb(5, 3, 1).unwrap() + h * r_lb(5, 3, 3).unwrap();
        assert_eq!(avg.value, expected);
        assert_eq!(profile.redundancy(), Rational::integer(2));
        assert!(GeneralPlacementProfile::new(3, vec![h, h, h, Rational::ZERO]).is_err());
    }

    #[test]
    fn appearance_counts_match_formula() {
        for (k, a, f, t) in [(4, 3, 1, 2), (4, 3, 1, 0), (5, 3, 1, 1), (4, 2, 2, 1)] {
            let s = st(k, a, f);
            let counts = appearance_counts(&s, t, DEFAULT_CAP).unwrap();
            let expected = appearance_count_formula(&s, t).unwrap();
            let p = selfish_man_placement(&s, t).unwrap();
            let total: usize = s
                .classes()
                .flat_map(|c| (1..=f).map(move |i| FileRef::new(c, i)))
                .map(|file| p.subfiles_of(file).count())
                .sum();
            assert_eq!(counts.len(), total, "every subfile appears");
            for (id, c) in counts {
                assert_eq!(c, expected, "({k},{a},{f}) t={t} {id}");
            }
        }
    }

    #[test]
    fn alpha_demand_converse_example() {
        let s = st(5, 3, 3);
        let dm = Demand::new(["123", "123", "123", "124", "125"].map(set).to_vec(), vec![1, 2, 3, 1, 1])
            .unwrap();
        assert_eq!(alpha_demand_with_acyclic_outside(&s, set("123"), set("12")), Ok(dm.clone()));
        let p = selfish_man_placement(&s, 2).unwrap();
        assert_eq!(alpha_demand_converse(&p, &dm), Ok(Rational::ONE));
        let p0 = selfish_man_placement(&s, 0).unwrap();
        assert_eq!(alpha_demand_converse(&p0, &dm), Ok(Rational::integer(5)));

        let small = st(5, 4, 1);
        assert!(alpha_demand_with_acyclic_outside(&small, set("1234"), set("123")).is_err());
    }

    #[test]
    fn cyclic_outside_requests_rejected() {
        let s = st(5, 3, 3);
        // Users 4 and 5 each cache part of the other's request.
        let dm = Demand::new(["123", "123", "123", "145", "145"].map(set).to_vec(), vec![1, 2, 3, 1, 2])
            .unwrap();
        let p = selfish_man_placement(&s, 1).unwrap();
        assert_eq!(alpha_demand_converse(&p, &dm), Err(Error::NotAcyclic));
    }
}
