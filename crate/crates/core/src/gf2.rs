//! Linear algebra over GF(2) on packed bit rows.

use alloc::vec;
use alloc::vec::Vec;

/// Fixed-width vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut r = Self::zeros(len);
        r.set(i, true);
        r
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Self::zeros(len);
        for i in ones {
            r.toggle(i);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index out of range");
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit index out of range");
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

/// Row space of a list of generator rows, kept in echelon form together with
/// the combination of generators that produced each basis row.
#[derive(Clone, Debug)]
pub struct RowSpace {
    width: usize,
    generators: usize,
    /// (pivot column, reduced row, combination over generators)
    basis: Vec<(usize, BitRow, BitRow)>,
    null: Vec<BitRow>,
}

impl RowSpace {
    pub fn new(width: usize, rows: &[BitRow]) -> Self {
        let generators = rows.len();
        let mut space = RowSpace { width, generators, basis: Vec::new(), null: Vec::new() };
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), width, "row width mismatch");
            let mut comb = BitRow::unit(generators, i);
            let mut r = row.clone();
            space.reduce(&mut r, &mut comb);
            match r.first_one() {
                Some(p) => space.basis.push((p, r, comb)),
                None => space.null.push(comb),
            }
        }
        space
    }

    fn reduce(&self, row: &mut BitRow, comb: &mut BitRow) {
        // Each basis row is zero on the pivots of earlier rows, so one pass in
        // insertion order clears every pivot.
        for (p, b, c) in &self.basis {
            if row.get(*p) {
                row.xor_assign(b);
                comb.xor_assign(c);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Basis of the generator combinations that sum to zero.
    pub fn null_space(&self) -> &[BitRow] {
        &self.null
    }

    /// Some combination of generators equal to `target`, if one exists.
    pub fn represent(&self, target: &BitRow) -> Option<BitRow> {
        let mut r = target.clone();
        let mut comb = BitRow::zeros(self.generators);
        self.reduce(&mut r, &mut comb);
        r.is_zero().then_some(comb)
    }

    pub fn contains(&self, target: &BitRow) -> bool {
        self.represent(target).is_some()
    }

    /// The sparsest combination equal to `target`, ties broken by the
    /// lexicographically smallest sorted index list.
    ///
    /// Searches all `2^d` cosets of the null space, so gives up (returning the
    /// first representation found) when `d > max_null_dim`.
    pub fn min_weight_representation(&self, target: &BitRow, max_null_dim: usize) -> Option<BitRow> {
        let base = self.represent(target)?;
        let d = self.null.len();
        if d > max_null_dim || d >= 64 {
            return Some(base);
        }
        let mut best = base.clone();
        let mut cur = base;
        // Gray-code walk over the coset.
        for step in 1u64..(1u64 << d) {
            cur.xor_assign(&self.null[step.trailing_zeros() as usize]);
            if better(&cur, &best) {
                best = cur.clone();
            }
        }
        Some(best)
    }
}

fn better(a: &BitRow, b: &BitRow) -> bool {
    let (wa, wb) = (a.count_ones(), b.count_ones());
    if wa != wb {
        return wa < wb;
    }
    a.ones().lt(b.ones())
}
