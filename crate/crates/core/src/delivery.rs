//! XOR delivery schemes, the constructive schemes for alpha-demands and
//! circular demands, the uncoded and MAN baselines, and decodability checking
//! by GF(2) span membership.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::combinatorics::binom;
use crate::demands::{alpha_demand_witness, is_circular_for, UserPermutation};
use crate::fds::{ensure_valid, Demand, FileRef, UserSet};
use crate::gf2::{BitRow, RowSpace};
use crate::placement::{Placement, PlacementKind, SubfileId};
use crate::{Error, Rational, Result};

/// Largest null-space dimension for which certificates are minimized
/// exhaustively.
const CERTIFICATE_SEARCH_DIM: usize = 16;

/// GF(2) sum of distinct subfiles, in the order given.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XorMessage {
    subfiles: Vec<SubfileId>,
}

impl XorMessage {
    pub fn new(subfiles: Vec<SubfileId>) -> Result<Self> {
        let distinct: BTreeSet<&SubfileId> = subfiles.iter().collect();
        if subfiles.is_empty() || distinct.len() != subfiles.len() {
            return Err(Error::MalformedMessage);
        }
        Ok(XorMessage { subfiles })
    }

    pub fn single(id: SubfileId) -> Self {
        XorMessage { subfiles: alloc::vec![id] }
    }

    pub fn subfiles(&self) -> &[SubfileId] {
        &self.subfiles
    }

    pub fn len(&self) -> usize {
        self.subfiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subfiles.is_empty()
    }
}

impl fmt::Display for XorMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.subfiles.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Ordered list of equal-size XOR messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliveryScheme {
    subpacketization: u128,
    messages: Vec<XorMessage>,
}

impl DeliveryScheme {
    pub fn new(subpacketization: u128, messages: Vec<XorMessage>) -> Self {
        DeliveryScheme { subpacketization, messages }
    }

    /// Empty scheme matching `p`.
    pub fn empty(p: &Placement) -> Self {
        Self::new(p.subpacketization(), Vec::new())
    }

    pub fn subpacketization(&self) -> u128 {
        self.subpacketization
    }

    pub fn messages(&self) -> &[XorMessage] {
        &self.messages
    }

    /// Number of messages over the subpacketization, in file units.
    pub fn load(&self) -> Rational {
        Rational::from_counts(self.messages.len() as u128, self.subpacketization)
            .expect("load fits in i64")
    }

    /// The scheme restricted to the messages at `keep` (0-based).
    pub fn subset(&self, keep: impl IntoIterator<Item = usize>) -> DeliveryScheme {
        let messages = keep.into_iter().map(|i| self.messages[i].clone()).collect();
        DeliveryScheme::new(self.subpacketization, messages)
    }
}

/// Decoding outcome for one user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserDecoding {
    pub user: u32,
    pub decodable: bool,
    /// For each desired subfile, the 0-based indices of messages whose XOR,
    /// after removing cached subfiles, equals it.
    pub certificates: Vec<(SubfileId, Vec<usize>)>,
    pub missing: Vec<SubfileId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeReport {
    pub users: Vec<UserDecoding>,
}

impl DecodeReport {
    pub fn all_decodable(&self) -> bool {
        self.users.iter().all(|u| u.decodable)
    }

    pub fn decodable_count(&self) -> usize {
        self.users.iter().filter(|u| u.decodable).count()
    }

    pub fn failing_users(&self) -> Vec<u32> {
        self.users.iter().filter(|u| !u.decodable).map(|u| u.user).collect()
    }

    pub fn user(&self, user: u32) -> &UserDecoding {
        &self.users[user as usize - 1]
    }

    /// Whether some certificate of `user` uses exactly `messages` (0-based).
    pub fn has_certificate(&self, user: u32, messages: &[usize]) -> bool {
        self.user(user).certificates.iter().any(|(_, c)| c == messages)
    }
}

fn check_scheme(p: &Placement, sc: &DeliveryScheme) -> Result<()> {
    if sc.subpacketization != p.subpacketization() {
        return Err(Error::ForeignSubfile);
    }
    if sc.messages.iter().flat_map(|m| &m.subfiles).all(|id| p.contains(id)) {
        Ok(())
    } else {
        Err(Error::ForeignSubfile)
    }
}

/// Linear decodability of every user.
///
/// Cached subfiles are projected out of each message; a user decodes iff each
/// desired subfile lies in the span of what remains. Certificates are the
/// sparsest such combinations, ties broken lexicographically.
pub fn verify_decodability(p: &Placement, dm: &Demand, sc: &DeliveryScheme) -> Result<DecodeReport> {
    ensure_valid(p.structure(), dm)?;
    check_scheme(p, sc)?;
    let users = (1..=p.structure().users())
        .map(|k| decode_user(p, dm, sc, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecodeReport { users })
}

fn decode_user(p: &Placement, dm: &Demand, sc: &DeliveryScheme, user: u32) -> Result<UserDecoding> {
    let desired = p.desired_subfiles(dm, user)?;
    let mut coords: BTreeMap<SubfileId, usize> = BTreeMap::new();
    for id in desired.iter().chain(sc.messages.iter().flat_map(|m| &m.subfiles)) {
        if !p.is_cached(user, id) {
            let next = coords.len();
            coords.entry(*id).or_insert(next);
        }
    }
    let width = coords.len();
    let rows: Vec<BitRow> = sc
        .messages
        .iter()
        .map(|m| {
            BitRow::from_indices(width, m.subfiles.iter().filter_map(|id| coords.get(id).copied()))
        })
        .collect();
    let space = RowSpace::new(width, &rows);
    let mut certificates = Vec::new();
    let mut missing = Vec::new();
    for id in desired {
        let target = BitRow::unit(width, coords[&id]);
        match space.min_weight_representation(&target, CERTIFICATE_SEARCH_DIM) {
            Some(comb) => certificates.push((id, comb.ones().collect())),
            None => missing.push(id),
        }
    }
    Ok(UserDecoding { user, decodable: missing.is_empty(), certificates, missing })
}

/// Re-checks a certificate directly: the XOR of the named messages, minus
/// the subfiles cached at `user`, must be exactly `target`.
pub fn verify_certificate(
    p: &Placement,
    sc: &DeliveryScheme,
    user: u32,
    target: &SubfileId,
    messages: &[usize],
) -> bool {
    let mut acc: BTreeSet<SubfileId> = BTreeSet::new();
    for &i in messages {
        let Some(m) = sc.messages.get(i) else { return false };
        for id in &m.subfiles {
            if !acc.remove(id) {
                acc.insert(*id);
            }
        }
    }
    acc.retain(|id| !p.is_cached(user, id));
    acc.len() == 1 && acc.contains(target)
}

fn require_selfish(p: &Placement) -> Result<()> {
    if p.kind() == PlacementKind::SelfishMan {
        Ok(())
    } else {
        Err(Error::Unsupported("scheme requires the selfish placement"))
    }
}

/// MAN-style XORs inside the alpha-demand group, then every desired subfile
/// of each outside user sent uncoded.
pub fn alpha_demand_scheme(p: &Placement, dm: &Demand) -> Result<DeliveryScheme> {
    require_selfish(p)?;
    let s = p.structure();
    let group = alpha_demand_witness(s, dm)?.ok_or(Error::NotAlphaDemand)?;
    let mut messages = Vec::new();
    for set in group.subsets(p.t() + 1) {
        let xs = set
            .iter()
            .map(|k| SubfileId::new(dm.requested(k), set.without(k)))
            .collect();
        messages.push(XorMessage::new(xs)?);
    }
    for k in s.all_users().difference(group).iter() {
        messages.extend(p.desired_subfiles(dm, k)?.into_iter().map(XorMessage::single));
    }
    Ok(DeliveryScheme::new(p.subpacketization(), messages))
}

/// Every desired subfile of every user as its own message.
pub fn uncoded_scheme(p: &Placement, dm: &Demand) -> Result<DeliveryScheme> {
    let mut messages = Vec::new();
    for k in 1..=p.structure().users() {
        messages.extend(p.desired_subfiles(dm, k)?.into_iter().map(XorMessage::single));
    }
    Ok(DeliveryScheme::new(p.subpacketization(), messages))
}

/// MAN delivery over the unselfish placement: one XOR per `(t+1)`-subset.
pub fn man_scheme(p: &Placement, dm: &Demand) -> Result<DeliveryScheme> {
    if p.kind() != PlacementKind::UnselfishMan {
        return Err(Error::Unsupported("MAN delivery requires the unselfish placement"));
    }
    ensure_valid(p.structure(), dm)?;
    let mut messages = Vec::new();
    for set in p.structure().all_users().subsets(p.t() + 1) {
        let xs = set
            .iter()
            .map(|k| SubfileId::new(dm.requested(k), set.without(k)))
            .collect();
        messages.push(XorMessage::new(xs)?);
    }
    Ok(DeliveryScheme::new(p.subpacketization(), messages))
}

/// One template term `(a; b, c, ..)`: the subfile of the file requested by
/// the user at position `a`, tagged by the users at positions `b, c, ..`
/// (1-based positions in the circular ordering).
type Term = (usize, &'static [usize]);

const CIRCULAR_5_4_T2: &[&[Term]] = &[
    &[(1, &[2, 3]), (2, &[3, 5]), (3, &[1, 4])],
    &[(3, &[1, 4]), (1, &[2, 4]), (4, &[1, 2])],
    &[(2, &[3, 5]), (5, &[1, 3]), (3, &[1, 5])],
    &[(1, &[3, 4]), (4, &[1, 5])],
    &[(2, &[3, 4]), (4, &[2, 5])],
    &[(2, &[4, 5]), (5, &[1, 2])],
    &[(3, &[4, 5]), (5, &[2, 3])],
];

const CIRCULAR_5_4_T3: &[&[Term]] = &[
    &[(1, &[2, 3, 4]), (2, &[3, 4, 5]), (4, &[1, 2, 5])],
    &[(1, &[2, 3, 4]), (3, &[1, 4, 5]), (5, &[1, 2, 3])],
];

const CIRCULAR_6_5_T3: &[&[Term]] = &[
    &[(1, &[2, 3, 4]), (2, &[4, 5, 6]), (4, &[2, 5, 6])],
    &[(4, &[1, 5, 6]), (1, &[2, 3, 5]), (5, &[1, 2, 3])],
    &[(1, &[2, 3, 4]), (4, &[1, 5, 6]), (6, &[1, 3, 4]), (3, &[1, 4, 6])],
    &[(2, &[3, 4, 5]), (3, &[1, 5, 6]), (5, &[1, 3, 6])],
    &[(5, &[1, 2, 6]), (2, &[3, 4, 6]), (6, &[2, 3, 4])],
    &[(2, &[3, 4, 5]), (5, &[1, 2, 6]), (1, &[2, 4, 5]), (4, &[1, 2, 5])],
    &[(3, &[4, 5, 6]), (4, &[1, 2, 6]), (6, &[1, 2, 4])],
    &[(6, &[1, 2, 3]), (3, &[1, 4, 5]), (1, &[3, 4, 5])],
    &[(3, &[4, 5, 6]), (6, &[1, 2, 3]), (2, &[3, 5, 6]), (5, &[2, 3, 6])],
];

fn instantiate(
    p: &Placement,
    dm: &Demand,
    u: &UserPermutation,
    template: &[&[Term]],
) -> Result<DeliveryScheme> {
    let at = |pos: usize| u.at(pos - 1);
    let messages = template
        .iter()
        .map(|terms| {
            let xs = terms
                .iter()
                .map(|&(a, tag)| {
                    let file: FileRef = dm.requested(at(a));
                    SubfileId::new(file, UserSet::from_users(tag.iter().map(|&b| at(b))))
                })
                .collect();
            XorMessage::new(xs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeliveryScheme::new(p.subpacketization(), messages))
}

fn check_circular(p: &Placement, dm: &Demand, u: &UserPermutation) -> Result<()> {
    require_selfish(p)?;
    ensure_valid(p.structure(), dm)?;
    if is_circular_for(p.structure(), dm, u) {
        Ok(())
    } else {
        Err(Error::NotCircular)
    }
}

/// Optimal scheme for circular demands of `(5, 4, f)` at `t` in `{2, 3}`.
pub fn circular_scheme_5_4(p: &Placement, dm: &Demand, u: &UserPermutation) -> Result<DeliveryScheme> {
    let s = p.structure();
    if (s.users(), s.alpha()) != (5, 4) {
        return Err(Error::Unsupported("scheme defined for K = 5, alpha = 4"));
    }
    let template = match p.t() {
        2 => CIRCULAR_5_4_T2,
        3 => CIRCULAR_5_4_T3,
        _ => return Err(Error::Unsupported("scheme defined for t in {2, 3}")),
    };
    check_circular(p, dm, u)?;
    instantiate(p, dm, u, template)
}

/// Optimal scheme for circular demands of `(6, 5, f)` at `t = 3`.
pub fn circular_scheme_6_5_t3(
    p: &Placement,
    dm: &Demand,
    u: &UserPermutation,
) -> Result<DeliveryScheme> {
    let s = p.structure();
    if (s.users(), s.alpha()) != (6, 5) {
        return Err(Error::Unsupported("scheme defined for K = 6, alpha = 5"));
    }
    if p.t() != 3 {
        return Err(Error::Unsupported("scheme defined for t = 3"));
    }
    check_circular(p, dm, u)?;
    instantiate(p, dm, u, CIRCULAR_6_5_T3)
}

/// Load of the alpha-demand scheme without building it.
pub fn alpha_demand_scheme_load(k: u32, alpha: u32, t: u32) -> Rational {
    let (k, a, t) = (i64::from(k), i64::from(alpha), i64::from(t));
    let msgs = binom(a, t + 1) + (k - a) as u128 * binom(a - 1, t);
    Rational::from_counts(msgs, binom(a, t)).expect("load fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demands::{circular_witness, enumerate_circular_demands};
    use crate::placement::{selfish_man_placement, unselfish_man_placement};
    use crate::FdsStructure;
    use alloc::vec;

    fn set(digits: &str) -> UserSet {
        UserSet::from_users(digits.bytes().map(|b| u32::from(b - b'0')))
    }

    fn st(k: u32, alpha: u32, f: u32) -> FdsStructure {
        FdsStructure::new(k, alpha, f).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn d1() -> Demand {
        Demand::first_files(["1234", "2345", "1345", "1245", "1235"].map(set).to_vec())
    }

    #[test]
    fn message_validation() {
        let id = SubfileId::new(FileRef::new(set("12"), 1), set("1"));
        assert_eq!(XorMessage::new(vec![]), Err(Error::MalformedMessage));
        assert_eq!(XorMessage::new(vec![id, id]), Err(Error::MalformedMessage));
    }

    #[test]
    fn circular_5_4_loads_and_decoding() {
        let s = st(5, 4, 1);
        let u = UserPermutation::identity(5);
        for (t, load) in [(2, r(7, 6)), (3, r(1, 2))] {
            let p = selfish_man_placement(&s, t).unwrap();
            let sc = circular_scheme_5_4(&p, &d1(), &u).unwrap();
            assert_eq!(sc.load(), load);
            assert!(verify_decodability(&p, &d1(), &sc).unwrap().all_decodable());
        }
    }

    #[test]
    fn dropping_last_message_breaks_users_3_and_5() {
        let s = st(5, 4, 1);
        let p = selfish_man_placement(&s, 2).unwrap();
        let sc = circular_scheme_5_4(&p, &d1(), &UserPermutation::identity(5)).unwrap();
        let report = verify_decodability(&p, &d1(), &sc.subset(0..6)).unwrap();
        assert_eq!(report.failing_users(), vec![3, 5]);
    }

    #[test]
    fn circular_scheme_rejects_wrong_inputs() {
        let s = st(5, 4, 1);
        let p = selfish_man_placement(&s, 1).unwrap();
        let u = UserPermutation::identity(5);
        assert!(matches!(circular_scheme_5_4(&p, &d1(), &u), Err(Error::Unsupported(_))));
        let p = selfish_man_placement(&s, 2).unwrap();
        let u = UserPermutation::new(vec![1, 3, 2, 4, 5]).unwrap();
        assert_eq!(circular_scheme_5_4(&p, &d1(), &u), Err(Error::NotCircular));
        assert!(circular_scheme_6_5_t3(&p, &d1(), &u).is_err());
    }

    #[test]
    fn circular_6_5_over_all_demands() {
        let s = st(6, 5, 1);
        let p = selfish_man_placement(&s, 3).unwrap();
        for (dm, u) in enumerate_circular_demands(&s, 1_000).unwrap() {
            let sc = circular_scheme_6_5_t3(&p, &dm, &u).unwrap();
            assert_eq!(sc.load(), r(9, 10));
            let report = verify_decodability(&p, &dm, &sc).unwrap();
            assert!(report.all_decodable(), "{dm}");
            for ud in &report.users {
                for (id, cert) in &ud.certificates {
                    assert!(verify_certificate(&p, &sc, ud.user, id, cert));
                }
            }
        }
    }

    #[test]
    fn alpha_demand_example() {
        let s = st(5, 3, 3);
        let dm = Demand::new(["123", "123", "123", "124", "125"].map(set).to_vec(), vec![1, 2, 3, 1, 1])
            .unwrap();
        let p = selfish_man_placement(&s, 2).unwrap();
        let sc = alpha_demand_scheme(&p, &dm).unwrap();
        assert_eq!(sc.messages().len(), 3);
        assert_eq!(sc.messages()[0].len(), 3);
        assert_eq!(sc.load(), Rational::ONE);
        assert!(verify_decodability(&p, &dm, &sc).unwrap().all_decodable());
        for t in 0..=3 {
            let p = selfish_man_placement(&s, t).unwrap();
            let sc = alpha_demand_scheme(&p, &dm).unwrap();
            assert_eq!(sc.load(), alpha_demand_scheme_load(5, 3, t));
            assert!(verify_decodability(&p, &dm, &sc).unwrap().all_decodable());
        }
        let not_alpha =
            Demand::new(["123", "123", "123", "124", "125"].map(set).to_vec(), vec![1, 1, 3, 1, 1]).unwrap();
        assert_eq!(alpha_demand_scheme(&p, &not_alpha), Err(Error::NotAlphaDemand));
    }

    #[test]
    fn baselines() {
        let s = st(5, 4, 1);
        let p = selfish_man_placement(&s, 2).unwrap();
        let sc = uncoded_scheme(&p, &d1()).unwrap();
        assert_eq!(sc.load(), r(5, 2));
        assert!(verify_decodability(&p, &d1(), &sc).unwrap().all_decodable());
        let p = selfish_man_placement(&s, 4).unwrap();
        assert_eq!(uncoded_scheme(&p, &d1()).unwrap().load(), Rational::ZERO);
        let empty = DeliveryScheme::empty(&p);
        assert!(verify_decodability(&p, &d1(), &empty).unwrap().all_decodable());

        let s = st(4, 2, 1);
        let dm = Demand::first_files(["12", "23", "34", "14"].map(set).to_vec());
        for (t, load) in [(0, r(4, 1)), (1, r(3, 2)), (2, r(2, 3)), (4, Rational::ZERO)] {
            let p = unselfish_man_placement(&s, t).unwrap();
            let sc = man_scheme(&p, &dm).unwrap();
            assert_eq!(sc.load(), load);
            assert!(verify_decodability(&p, &dm, &sc).unwrap().all_decodable());
        }
    }

    #[test]
    fn foreign_subfile_rejected() {
        let s = st(5, 4, 1);
        let p2 = selfish_man_placement(&s, 2).unwrap();
        let p3 = selfish_man_placement(&s, 3).unwrap();
        let sc = circular_scheme_5_4(&p3, &d1(), &circular_witness(&s, &d1()).unwrap().unwrap()).unwrap();
        let forged = DeliveryScheme::new(p2.subpacketization(), sc.messages().to_vec());
        assert_eq!(verify_decodability(&p2, &d1(), &forged), Err(Error::ForeignSubfile));
    }
}
