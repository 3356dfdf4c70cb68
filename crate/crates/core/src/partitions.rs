//! Shadowed partitions: r-tuples `(S_1, ..., S_r)` of subsets of
//! `{0, ..., n-1}` such that the blocks `S_i + j` (`0 <= j < i`) tile
//! `{0, ..., n-1}`.
//!
//! Sets are bit masks (bit `k` set iff `k ∈ S`), so `n <= 62`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_N: usize = 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShadowedPartition {
    r: usize,
    n: usize,
    sets: Vec<u64>,
}

fn mask_elems(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |&k| mask >> k & 1 == 1)
}

/// Checks the tiling condition directly.
fn tiles(r: usize, n: usize, sets: &[u64]) -> bool {
    if sets.len() != r || n > MAX_N {
        return false;
    }
    let full = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut covered = 0u64;
    for (idx, &s) in sets.iter().enumerate() {
        let i = idx + 1;
        for k in mask_elems(s) {
            if k + i > n {
                return false;
            }
            for j in 0..i {
                let bit = 1u64 << (k + j);
                if covered & bit != 0 {
                    return false;
                }
                covered |= bit;
            }
        }
    }
    covered == full
}

impl ShadowedPartition {
    /// Validating constructor from bit masks.
    pub fn from_masks(r: usize, n: usize, sets: Vec<u64>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidInput("rank must be >= 1".into()));
        }
        if !tiles(r, n, &sets) {
            return Err(Error::InvalidInput(format!("{sets:?} is not in P_{r}({n})")));
        }
        Ok(ShadowedPartition { r, n, sets })
    }

    pub fn from_sets(r: usize, n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let masks = sets
            .iter()
            .map(|s| {
                s.iter().try_fold(0u64, |m, &k| {
                    if k >= MAX_N {
                        Err(Error::InvalidInput(format!("element {k} exceeds {MAX_N}")))
                    } else {
                        Ok(m | 1 << k)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(r, n, masks)
    }

    pub fn empty(r: usize) -> Self {
        ShadowedPartition { r, n: 0, sets: vec![0; r] }
    }

    pub fn rank(&self) -> usize {
        self.r
    }
    pub fn size(&self) -> usize {
        self.n
    }
    /// Mask of `S_i`, `1 <= i <= r`.
    pub fn mask(&self, i: usize) -> u64 {
        self.sets[i - 1]
    }
    pub fn set(&self, i: usize) -> Vec<usize> {
        mask_elems(self.mask(i)).collect()
    }
    pub fn sets(&self) -> Vec<Vec<usize>> {
        (1..=self.r).map(|i| self.set(i)).collect()
    }

    /// `w(S_i) = Σ_{k ∈ S_i} q^k`.
    pub fn weight(&self, i: usize, q: u64) -> u128 {
        mask_elems(self.mask(i)).map(|k| (q as u128).pow(k as u32)).sum()
    }

    /// `Σ_i (q^i - 1) w(S_i) == q^n - 1`.
    pub fn weight_identity_holds(&self, q: u64) -> bool {
        let lhs: u128 = (1..=self.r).map(|i| ((q as u128).pow(i as u32) - 1) * self.weight(i, q)).sum();
        lhs == (q as u128).pow(self.n as u32) - 1
    }

    /// Pairs `(i, j)` with `j ∈ S_i`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..=self.r).flat_map(move |i| mask_elems(self.mask(i)).map(move |j| (i, j)))
    }

    /// Label vector: position `p` carries `i` if `p ∈ S_i`, else 0.
    fn key(&self) -> Vec<u8> {
        let mut key = vec![0u8; self.n];
        for (i, j) in self.entries() {
            key[j] = i as u8;
        }
        key
    }

    pub fn supported_on(&self, support: &[usize]) -> bool {
        (1..=self.r).all(|i| self.mask(i) == 0 || support.contains(&i))
    }
}

/// `Π_i: P_r(n-i) -> P_r^i(n)`, shift every set by `i` and add 0 to `S_i`.
pub fn pi_bijection(i: usize, s: &ShadowedPartition) -> Result<ShadowedPartition> {
    if i == 0 || i > s.r {
        return Err(Error::InvalidInput(format!("index {i} outside 1..={}", s.r)));
    }
    let n = s.n + i;
    if n > MAX_N {
        return Err(Error::InvalidInput(format!("n = {n} exceeds {MAX_N}")));
    }
    let mut sets: Vec<u64> = s.sets.iter().map(|&m| m << i).collect();
    sets[i - 1] |= 1;
    ShadowedPartition::from_masks(s.r, n, sets)
}

/// Left inverse of [`pi_bijection`].
pub fn pi_inverse(s: &ShadowedPartition) -> Result<(usize, ShadowedPartition)> {
    let i = (1..=s.r)
        .find(|&i| s.mask(i) & 1 == 1)
        .ok_or_else(|| Error::InvalidInput("partition of 0 is not in the image of any Π_i".into()))?;
    let mut sets = s.sets.clone();
    sets[i - 1] &= !1;
    let sets = sets.into_iter().map(|m| m >> i).collect();
    Ok((i, ShadowedPartition::from_masks(s.r, s.n - i, sets)?))
}

/// `Ψ_i: P_r(n-i) -> P_r(n)`, adds `n - i` to `S_i`.
pub fn psi_injection(i: usize, s: &ShadowedPartition) -> Result<ShadowedPartition> {
    if i == 0 || i > s.r {
        return Err(Error::InvalidInput(format!("index {i} outside 1..={}", s.r)));
    }
    let n = s.n + i;
    if n > MAX_N {
        return Err(Error::InvalidInput(format!("n = {n} exceeds {MAX_N}")));
    }
    let mut sets = s.sets.clone();
    sets[i - 1] |= 1 << s.n;
    ShadowedPartition::from_masks(s.r, n, sets)
}

/// All of `P_r(n)` in label-vector lexicographic order; empty for `n < 0`.
pub fn enumerate(r: usize, n: i64) -> Vec<ShadowedPartition> {
    assert!(r >= 1, "rank must be >= 1");
    if n < 0 {
        return Vec::new();
    }
    let n = n as usize;
    assert!(n <= MAX_N, "n exceeds {MAX_N}");
    let mut table: Vec<Vec<ShadowedPartition>> = vec![vec![ShadowedPartition::empty(r)]];
    for m in 1..=n {
        let mut level = Vec::new();
        for i in 1..=r.min(m) {
            for s in &table[m - i] {
                let mut sets = s.sets.clone();
                sets[i - 1] |= 1 << (m - i);
                level.push(ShadowedPartition { r, n: m, sets });
            }
        }
        table.push(level);
    }
    let mut out = table.pop().unwrap();
    out.sort_by_key(|s| s.key());
    out
}

/// Restriction to `P_r(n; φ)`: sets outside `support` must be empty.
pub fn restrict_to_support(parts: Vec<ShadowedPartition>, support: &[usize]) -> Vec<ShadowedPartition> {
    parts.into_iter().filter(|s| s.supported_on(support)).collect()
}

/// `F_n^{[r]}` from the r-step recurrence.
pub fn count(r: usize, n: i64) -> u128 {
    assert!(r >= 1);
    if n < 0 {
        return 0;
    }
    let mut f: Vec<u128> = vec![1];
    for k in 1..=n as usize {
        let lo = k.saturating_sub(r);
        f.push(f[lo..k].iter().sum());
    }
    f[n as usize]
}

/// Oracle: filter all label assignments in `{0..r}^n` by the definition.
pub fn enumerate_by_filter(r: usize, n: usize) -> Vec<ShadowedPartition> {
    let total = (r as u64 + 1).pow(n as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut sets = vec![0u64; r];
        let mut c = code;
        for p in 0..n {
            let label = (c % (r as u64 + 1)) as usize;
            c /= r as u64 + 1;
            if label > 0 {
                sets[label - 1] |= 1 << p;
            }
        }
        if tiles(r, n, &sets) {
            out.push(ShadowedPartition { r, n, sets });
        }
    }
    out.sort_by_key(|s| s.key());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn base_cases() {
        let p = enumerate(3, 0);
        assert_eq!(p, vec![ShadowedPartition::empty(3)]);
        assert!(enumerate(2, -1).is_empty());
        let p = enumerate(1, 5);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].set(1), vec![0, 1, 2, 3, 4]);
        let p = enumerate(2, 2);
        let sets: Vec<_> = p.iter().map(|s| s.sets()).collect();
        assert_eq!(sets.len(), 2);
        assert!(sets.contains(&vec![vec![0, 1], vec![]]));
        assert!(sets.contains(&vec![vec![], vec![0]]));
        assert_eq!(p, enumerate_by_filter(2, 2));
    }

    #[test]
    fn counts() {
        assert_eq!(count(2, 5), 8);
        assert_eq!(count(3, 5), 13);
        assert_eq!(count(4, 0), 1);
        for r in 1..=4 {
            for n in 0..=8 {
                assert_eq!(enumerate(r, n as i64), enumerate_by_filter(r, n), "r={r} n={n}");
            }
        }
    }

    #[test]
    fn maps() {
        let s = ShadowedPartition::from_sets(1, 2, &[vec![0, 1]]).unwrap();
        assert_eq!(pi_bijection(1, &s).unwrap().set(1), vec![0, 1, 2]);
        let e = ShadowedPartition::empty(2);
        assert_eq!(psi_injection(2, &e).unwrap().sets(), vec![vec![], vec![0]]);
        assert!(pi_bijection(3, &e).is_err());
        assert!(ShadowedPartition::from_sets(2, 3, &[vec![0], vec![0]]).is_err());
    }

    #[test]
    fn support_filter() {
        for n in [1, 3, 5, 7] {
            assert!(restrict_to_support(enumerate(2, n), &[2]).is_empty());
        }
        let p = restrict_to_support(enumerate(2, 4), &[2]);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].sets(), vec![vec![], vec![0, 2]]);
        assert_eq!(restrict_to_support(enumerate(3, 6), &[1, 2, 3]).len(), count(3, 6) as usize);
    }

    #[test]
    fn images_partition() {
        for r in 1..=4 {
            for n in 0..=10usize {
                let all: HashSet<_> = enumerate(r, n as i64).into_iter().collect();
                let mut pi_img = HashSet::new();
                let mut psi_img = HashSet::new();
                for i in 1..=r {
                    for s in enumerate(r, n as i64 - i as i64) {
                        assert!(pi_img.insert(pi_bijection(i, &s).unwrap()));
                        assert!(psi_img.insert(psi_injection(i, &s).unwrap()));
                    }
                }
                if n > 0 {
                    assert_eq!(pi_img, all);
                    assert_eq!(psi_img, all);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn enumeration_invariants(r in 1usize..=4, n in 0i64..=12, q in 2u64..=9) {
            let parts = enumerate(r, n);
            prop_assert_eq!(parts.len() as u128, count(r, n));
            for s in &parts {
                prop_assert!(tiles(r, n as usize, &s.sets));
                prop_assert!(s.weight_identity_holds(q));
                if n > 0 {
                    let (i, back) = pi_inverse(s).unwrap();
                    prop_assert_eq!(&pi_bijection(i, &back).unwrap(), s);
                }
            }
        }
    }
}
