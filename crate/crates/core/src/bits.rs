//! Small index sets as 64-bit masks.
//!
//! Beliefs, winning/recurrent annotations and action supports are all
//! subsets of an indexed space of at most 64 elements. The solver
//! manipulates exponentially many of these, so they need to be `Copy`,
//! hashable and cheap to compare.

/// Capacity of a [`Mask64`]; models and strategies are capped at this
/// many states/actions/observations/memory elements.
pub const MASK_CAPACITY: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Mask64(u64);

impl Mask64 {
    pub const EMPTY: Mask64 = Mask64(0);

    pub fn singleton(i: usize) -> Mask64 {
        debug_assert!(i < MASK_CAPACITY);
        Mask64(1u64 << i)
    }

    pub fn full(n: usize) -> Mask64 {
        debug_assert!(n <= MASK_CAPACITY);
        if n == MASK_CAPACITY {
            Mask64(u64::MAX)
        } else {
            Mask64((1u64 << n) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> Mask64 {
        Mask64(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MASK_CAPACITY && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < MASK_CAPACITY);
        self.0 |= 1u64 << i;
    }

    pub fn union(self, other: Mask64) -> Mask64 {
        Mask64(self.0 | other.0)
    }

    pub fn intersect(self, other: Mask64) -> Mask64 {
        Mask64(self.0 & other.0)
    }

    pub fn minus(self, other: Mask64) -> Mask64 {
        Mask64(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Mask64) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self` that contain `forced`, enumerated with the
    /// fewest extra bits first (ties broken by mask value). `forced`
    /// must be a subset of `self`.
    pub fn supersets_within(self, forced: Mask64) -> Vec<Mask64> {
        debug_assert!(forced.is_subset(self));
        let free: Vec<usize> = self.minus(forced).iter().collect();
        let mut out: Vec<Mask64> = (0u64..(1u64 << free.len()))
            .map(|choice| {
                let mut m = forced;
                for (k, &bit) in free.iter().enumerate() {
                    if choice & (1u64 << k) != 0 {
                        m.insert(bit);
                    }
                }
                m
            })
            .collect();
        out.sort_by_key(|m| (m.len(), m.bits()));
        out
    }

    /// Non-empty subsets of `self`, smallest first.
    pub fn nonempty_subsets(self) -> Vec<Mask64> {
        let mut out = self.supersets_within(Mask64::EMPTY);
        out.retain(|m| !m.is_empty());
        out
    }
}

impl FromIterator<usize> for Mask64 {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Mask64 {
        let mut m = Mask64::EMPTY;
        for i in iter {
            m.insert(i);
        }
        m
    }
}

impl std::fmt::Debug for Mask64 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
