//! Wavevectors and the truncated mode set `0 < |n| <= N`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// Integer wavevector in Z^3.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
pub struct WaveVector(pub [i32; 3]);

impl WaveVector {
    pub const fn new(n1: i32, n2: i32, n3: i32) -> Self {
        Self([n1, n2, n3])
    }

    pub fn norm2(self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn norm(self) -> f64 {
        (self.norm2() as f64).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Lexicographically positive half of Z^3 \ {0}.
    pub fn is_positive(self) -> bool {
        self > WaveVector::default()
    }
}

impl Add for WaveVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for WaveVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for WaveVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// All wavevectors with `0 < |n| <= N`, stored in lexicographic order.
///
/// Negation reverses lexicographic order and the ball is symmetric, so the
/// conjugate partner of index `i` is `len - 1 - i`.
pub struct ModeSet {
    n_max: u32,
    vectors: Vec<WaveVector>,
    norm2: Vec<u32>,
    lookup: Vec<i32>,
    slots: Vec<u32>,
    slot_of: Vec<u32>,
}

impl fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModeSet")
            .field("n_max", &self.n_max)
            .field("len", &self.vectors.len())
            .finish()
    }
}

impl PartialEq for ModeSet {
    fn eq(&self, other: &Self) -> bool {
        self.n_max == other.n_max
    }
}

impl ModeSet {
    /// Builds the mode set for truncation radius `n_max` (must be >= 1).
    pub fn new(n_max: u32) -> Self {
        assert!(n_max >= 1, "truncation radius must be at least 1");
        let n = n_max as i32;
        let r2 = (n as i64) * (n as i64);
        let mut vectors = Vec::new();
        for a in -n..=n {
            for b in -n..=n {
                for c in -n..=n {
                    let w = WaveVector::new(a, b, c);
                    let q = w.norm2();
                    if q > 0 && q <= r2 {
                        vectors.push(w);
                    }
                }
            }
        }
        let side = (2 * n + 1) as usize;
        let mut lookup = vec![-1i32; side * side * side];
        let norm2: Vec<u32> = vectors.iter().map(|w| w.norm2() as u32).collect();
        for (i, w) in vectors.iter().enumerate() {
            lookup[Self::cube_index(n, *w)] = i as i32;
        }
        let mut slots: Vec<u32> = norm2.clone();
        slots.sort_unstable();
        slots.dedup();
        let slot_of = norm2
            .iter()
            .map(|q| slots.binary_search(q).expect("slot exists") as u32)
            .collect();
        Self {
            n_max,
            vectors,
            norm2,
            lookup,
            slots,
            slot_of,
        }
    }

    /// Process-wide shared instance for `n_max`.
    pub fn shared(n_max: u32) -> Arc<ModeSet> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ModeSet>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("mode-set cache poisoned");
        guard
            .entry(n_max)
            .or_insert_with(|| Arc::new(ModeSet::new(n_max)))
            .clone()
    }

    fn cube_index(n: i32, w: WaveVector) -> usize {
        let side = (2 * n + 1) as usize;
        let [a, b, c] = w.0;
        (((a + n) as usize) * side + (b + n) as usize) * side + (c + n) as usize
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[WaveVector] {
        &self.vectors
    }

    #[inline]
    pub fn vector(&self, i: usize) -> WaveVector {
        self.vectors[i]
    }

    #[inline]
    pub fn norm2(&self, i: usize) -> u32 {
        self.norm2[i]
    }

    #[inline]
    pub fn conj(&self, i: usize) -> usize {
        self.vectors.len() - 1 - i
    }

    /// Indices of the lexicographically positive half.
    pub fn positive(&self) -> std::ops::Range<usize> {
        self.vectors.len() / 2..self.vectors.len()
    }

    #[inline]
    pub fn index_of(&self, w: WaveVector) -> Option<usize> {
        let n = self.n_max as i32;
        if w.0.iter().any(|&c| c < -n || c > n) {
            return None;
        }
        let i = self.lookup[Self::cube_index(n, w)];
        (i >= 0).then_some(i as usize)
    }

    /// Distinct values of `|n|^2`, ascending.
    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    /// Slot (distinct `|n|^2` class) of mode `i`.
    #[inline]
    pub fn slot_of(&self, i: usize) -> usize {
        self.slot_of[i] as usize
    }

    pub fn contains(&self, w: WaveVector) -> bool {
        self.index_of(w).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conj_index_is_reversal() {
        let m = ModeSet::new(4);
        for i in 0..m.len() {
            assert_eq!(m.vector(m.conj(i)), -m.vector(i));
        }
        assert!(m.positive().all(|i| m.vector(i).is_positive()));
    }

    #[test]
    fn counts_small_balls() {
        assert_eq!(ModeSet::new(1).len(), 6);
        // 6 + 12 + 8 points with |n|^2 in {1,2,3}, plus 6 with |n|^2 = 4
        assert_eq!(ModeSet::new(2).len(), 32);
    }
}
