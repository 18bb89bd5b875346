use std::fmt;

/// Largest number of required objects the subset-indexed solvers accept.
pub const MAX_REQUIRED: usize = 20;

/// A subset of the required objects; bit `i` is set iff object `i` belongs to it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_REQUIRED);
        SubsetMask(((1u64 << k) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        SubsetMask(1 << i)
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn is_disjoint(self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    #[inline]
    pub fn union(self, other: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 | other.0)
    }

    #[inline]
    pub fn minus(self, other: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 & !other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Nonempty proper submasks `a` of `self`, each unordered split `{a, self \ a}`
    /// reported once (the half containing the lowest set bit).
    pub fn bipartitions(self) -> impl Iterator<Item = (SubsetMask, SubsetMask)> {
        let full = self.0;
        let low = full & full.wrapping_neg();
        let mut sub = full;
        std::iter::from_fn(move || loop {
            if sub == 0 {
                return None;
            }
            sub = (sub - 1) & full;
            if sub == 0 {
                return None;
            }
            if sub & low != 0 {
                return Some((SubsetMask(sub), SubsetMask(full & !sub)));
            }
        })
    }

    /// All submasks of `self`, including the empty set and `self`.
    pub fn submasks(self) -> impl Iterator<Item = SubsetMask> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(SubsetMask(cur))
        })
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
