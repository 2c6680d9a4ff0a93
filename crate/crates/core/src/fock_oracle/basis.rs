//! Two-mode Fock basis truncated to total photon number `m + n <= n_max`.
//!
//! States are stored sector by sector: sector `s = m + n` occupies the
//! contiguous index range `[s(s+1)/2, (s+1)(s+2)/2)` with `m` ascending. The
//! space is closed under beam splitters (which conserve `s`), diagonal phases,
//! and photon loss (which only lowers `s`), so none of those operations
//! introduces truncation error.

/// Index bookkeeping for a truncated two-mode basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoModeBasis {
    n_max: usize,
}

impl TwoModeBasis {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 2) / 2
    }

    #[inline]
    pub fn sector_offset(s: usize) -> usize {
        s * (s + 1) / 2
    }

    /// Index of `|m, n>`, or `None` outside the truncated space.
    #[inline]
    pub fn index(&self, m: usize, n: usize) -> Option<usize> {
        (m + n <= self.n_max).then(|| Self::sector_offset(m + n) + m)
    }

    /// `(m, n)` for a basis index.
    #[inline]
    pub fn occupation(&self, index: usize) -> (usize, usize) {
        // largest s with s(s+1)/2 <= index
        let mut s = (((8 * index + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        while Self::sector_offset(s + 1) <= index {
            s += 1;
        }
        while Self::sector_offset(s) > index {
            s -= 1;
        }
        let m = index - Self::sector_offset(s);
        (m, s - m)
    }

    /// All `(index, m, n)` triples in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let n_max = self.n_max;
        (0..=n_max).flat_map(move |s| (0..=s).map(move |m| (Self::sector_offset(s) + m, m, s - m)))
    }
}
