//! Binomials, factorials and bitmask subset enumeration.

/// `binom(n, k)`, zero whenever `n < 0`, `k < 0` or `n < k`.
///
/// Returns `None` if the value does not fit in `u128`.
pub fn checked_binom(n: i64, k: i64) -> Option<u128> {
    if n < 0 || k < 0 || n < k {
        return Some(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// [`checked_binom`] for arguments known to be small.
///
/// # Panics
/// If the result overflows `u128`.
pub fn binom(n: i64, k: i64) -> u128 {
    checked_binom(n, k).expect("binomial overflow")
}

pub fn checked_factorial(n: u32) -> Option<u128> {
    (1..=u128::from(n)).try_fold(1u128, |acc, i| acc.checked_mul(i))
}

pub fn factorial(n: u32) -> u128 {
    checked_factorial(n).expect("factorial overflow")
}

/// Sub-masks of `mask` with exactly `size` bits set, in increasing numeric
/// (colexicographic) order.
pub fn subsets_of_size(mask: u32, size: u32) -> SubsetsOfSize {
    let mut positions = [0u8; 32];
    let mut len = 0u32;
    for bit in 0..32 {
        if mask & (1 << bit) != 0 {
            positions[len as usize] = bit;
            len += 1;
        }
    }
    let next = if size > len {
        None
    } else if size == 0 {
        Some(0u64)
    } else {
        Some((1u64 << size) - 1)
    };
    SubsetsOfSize { positions, len, next }
}

#[derive(Clone, Debug)]
pub struct SubsetsOfSize {
    positions: [u8; 32],
    len: u32,
    /// Current combination over indices into `positions`.
    next: Option<u64>,
}

impl Iterator for SubsetsOfSize {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let comb = self.next?;
        let mut out = 0u32;
        let mut rest = comb;
        while rest != 0 {
            let i = rest.trailing_zeros();
            out |= 1 << self.positions[i as usize];
            rest &= rest - 1;
        }
        self.next = if comb == 0 {
            None
        } else {
            // Gosper's hack.
            let lowest = comb & comb.wrapping_neg();
            let ripple = comb + lowest;
            let succ = (((ripple ^ comb) >> 2) / lowest) | ripple;
            (succ < (1u64 << self.len)).then_some(succ)
        };
        Some(out)
    }
}

/// Every sub-mask of `mask` (including 0 and `mask`), increasing.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut cur = Some(0u32);
    core::iter::from_fn(move || {
        let out = cur?;
        cur = if out == mask {
            None
        } else {
            Some((out.wrapping_sub(mask)) & mask)
        };
        Some(out)
    })
}

/// Colexicographic rank of a subset whose members are bit positions.
pub fn colex_rank(mask: u32) -> u128 {
    let mut rank = 0;
    let mut rest = mask;
    let mut i = 1;
    while rest != 0 {
        let pos = rest.trailing_zeros();
        rank += binom(i64::from(pos), i);
        rest &= rest - 1;
        i += 1;
    }
    rank
}

/// Rearranges `v` into the next lexicographic permutation; returns `false`
/// (and leaves `v` sorted ascending) after the last one.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn binomial_convention() {
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(4, 0), 1);
        assert_eq!(binom(0, 0), 1);
        assert_eq!(binom(3, 4), 0);
        assert_eq!(binom(-1, 0), 0);
        assert_eq!(binom(3, -1), 0);
        assert_eq!(binom(-1, -1), 0);
        assert_eq!(binom(20, 10), 184_756);
        assert_eq!(binom(100, 50), 100_891_344_545_564_193_334_812_497_256);
        assert_eq!(checked_binom(200, 100), None);
    }

    #[test]
    fn pascal_rule_holds() {
        for n in 1..40i64 {
            for k in 0..=n {
                assert_eq!(binom(n, k), binom(n - 1, k - 1) + binom(n - 1, k));
            }
        }
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(6), 720);
        assert_eq!(checked_factorial(40), None);
    }

    #[test]
    fn sized_subsets_of_sparse_mask() {
        let got: Vec<u32> = subsets_of_size(0b10110, 2).collect();
        assert_eq!(got, vec![0b00110, 0b10010, 0b10100]);
        assert_eq!(subsets_of_size(0b10110, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(subsets_of_size(0b10110, 3).collect::<Vec<_>>(), vec![0b10110]);
        assert_eq!(subsets_of_size(0b10110, 4).count(), 0);
        assert_eq!(subsets_of_size(0, 0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn sized_subset_counts_match_binomials() {
        let full = 0b1_1111_1111_1111_1111_1110u32; // users 1..=20
        for k in 0..=20 {
            let all: Vec<u32> = subsets_of_size(full, k).collect();
            assert_eq!(all.len() as u128, binom(20, i64::from(k)));
            assert!(all.windows(2).all(|w| w[0] < w[1]));
            assert!(all.iter().all(|m| m.count_ones() == k && m & !full == 0));
        }
    }

    #[test]
    fn submask_enumeration() {
        let got: Vec<u32> = submasks(0b1010).collect();
        assert_eq!(got, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn colex_rank_is_order_index() {
        let ranks: Vec<u128> = subsets_of_size(0b11111, 3).map(colex_rank).collect();
        let expected: Vec<u128> = (0..10).collect();
        assert_eq!(ranks, expected);
        assert_eq!(colex_rank(0b111), 0);
    }

    #[test]
    fn permutations_in_lexicographic_order() {
        let mut v = [1, 2, 3];
        let mut seen = vec![v];
        while next_permutation(&mut v) {
            seen.push(v);
        }
        assert_eq!(
            seen,
            vec![[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]]
        );
        assert_eq!(v, [1, 2, 3]);
    }
}
