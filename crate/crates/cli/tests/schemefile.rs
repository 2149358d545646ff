use proptest::prelude::*;

use selfish_cc::schemefile::{format_scheme, format_users, parse_scheme, parse_users};
use selfish_cc_core::delivery::{DeliveryScheme, XorMessage};
use selfish_cc_core::placement::SubfileId;
use selfish_cc_core::{FileRef, UserSet};

fn user_set() -> impl Strategy<Value = UserSet> {
    (0u32..(1 << 20)).prop_map(|bits| UserSet::from_bits(bits << 1).unwrap())
}

fn subfile() -> impl Strategy<Value = SubfileId> {
    (user_set(), 1u32..500, user_set()).prop_map(|(c, i, t)| SubfileId::new(FileRef::new(c, i), t))
}

fn message() -> impl Strategy<Value = XorMessage> {
    proptest::collection::btree_set(subfile(), 1..6)
        .prop_map(|ids| XorMessage::new(ids.into_iter().collect()).unwrap())
}

proptest! {
    #[test]
    fn users_round_trip(set in user_set()) {
        prop_assert_eq!(parse_users(&format_users(set)).unwrap(), set);
    }

    #[test]
    fn schemes_round_trip_bit_exact(msgs in proptest::collection::vec(message(), 0..12), p in 1u128..1000) {
        let sc = DeliveryScheme::new(p, msgs);
        let text = format_scheme(&sc);
        let back = parse_scheme(&text, p).unwrap();
        prop_assert_eq!(back.messages(), sc.messages());
        prop_assert_eq!(format_scheme(&back), text);
    }
}
