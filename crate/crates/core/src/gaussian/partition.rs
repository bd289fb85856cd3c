use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Assignment of modes to the two trusted parties and the pairing of their
/// modes used for key extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModePartition {
    alice: Vec<usize>,
    bob: Vec<usize>,
    pairing: Vec<(usize, usize)>,
}

impl ModePartition {
    pub fn new(
        mut alice: Vec<usize>,
        mut bob: Vec<usize>,
        pairing: Vec<(usize, usize)>,
    ) -> Result<Self> {
        alice.sort_unstable();
        bob.sort_unstable();
        if alice.windows(2).any(|w| w[0] == w[1]) || bob.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Partition("repeated mode within one party".into()));
        }
        if let Some(m) = alice.iter().find(|m| bob.binary_search(m).is_ok()) {
            return Err(Error::Partition(format!(
                "mode {m} assigned to both parties"
            )));
        }
        let mut used = Vec::with_capacity(2 * pairing.len());
        for &(a, b) in &pairing {
            if alice.binary_search(&a).is_err() {
                return Err(Error::Partition(format!("paired mode {a} is not Alice's")));
            }
            if bob.binary_search(&b).is_err() {
                return Err(Error::Partition(format!("paired mode {b} is not Bob's")));
            }
            used.push(a);
            used.push(b);
        }
        used.sort_unstable();
        if used.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Partition(
                "a mode appears in more than one pair".into(),
            ));
        }
        Ok(Self {
            alice,
            bob,
            pairing,
        })
    }

    /// Lower half of the modes to Alice, upper half to Bob, mode `k` paired
    /// with mode `n/2 + k`.
    pub fn halves(n_modes: usize) -> Result<Self> {
        let half = Self::half(n_modes)?;
        Self::new(
            (0..half).collect(),
            (half..n_modes).collect(),
            (0..half).map(|k| (k, half + k)).collect(),
        )
    }

    /// Same split as [`ModePartition::halves`], but mode `k` is paired with
    /// mode `n − 1 − k` (frequency modes symmetric about the centre).
    pub fn mirrored(n_modes: usize) -> Result<Self> {
        let half = Self::half(n_modes)?;
        Self::new(
            (0..half).collect(),
            (half..n_modes).collect(),
            (0..half).map(|k| (k, n_modes - 1 - k)).collect(),
        )
    }

    fn half(n_modes: usize) -> Result<usize> {
        if n_modes < 2 || n_modes % 2 != 0 {
            return Err(Error::Partition(format!(
                "cannot split {n_modes} modes into two equal halves"
            )));
        }
        Ok(n_modes / 2)
    }

    pub fn alice(&self) -> &[usize] {
        &self.alice
    }

    pub fn bob(&self) -> &[usize] {
        &self.bob
    }

    pub fn pairing(&self) -> &[(usize, usize)] {
        &self.pairing
    }

    pub fn n_pairs(&self) -> usize {
        self.pairing.len()
    }

    /// Position of `mode` in Bob's list.
    pub fn bob_position(&self, mode: usize) -> Option<usize> {
        self.bob.binary_search(&mode).ok()
    }

    pub fn check_against(&self, n_modes: usize) -> Result<()> {
        match self.alice.iter().chain(&self.bob).find(|&&m| m >= n_modes) {
            Some(&index) => Err(Error::ModeIndex { index, n_modes }),
            None => Ok(()),
        }
    }

    /// Restricts to the listed pairs (indices into [`pairing`]).
    ///
    /// Returns the modes to keep, in increasing order, and the partition
    /// re-indexed onto the restricted state. The pairing keeps the order of
    /// `pairs`.
    ///
    /// [`pairing`]: ModePartition::pairing
    pub fn select_pairs(&self, pairs: &[usize]) -> Result<(Vec<usize>, ModePartition)> {
        let mut alice = Vec::with_capacity(pairs.len());
        let mut bob = Vec::with_capacity(pairs.len());
        for &p in pairs {
            let &(a, b) = self.pairing.get(p).ok_or_else(|| {
                Error::Partition(format!(
                    "pair {p} out of range ({} pairs)",
                    self.pairing.len()
                ))
            })?;
            alice.push(a);
            bob.push(b);
        }
        alice.sort_unstable();
        bob.sort_unstable();
        let keep: Vec<usize> = alice.iter().chain(&bob).copied().collect();
        let pos = |m: usize| keep.iter().position(|&k| k == m).expect("kept mode");
        let pairing = pairs
            .iter()
            .map(|&p| {
                let (a, b) = self.pairing[p];
                (pos(a), pos(b))
            })
            .collect();
        let n_a = alice.len();
        let part = ModePartition::new((0..n_a).collect(), (n_a..keep.len()).collect(), pairing)?;
        Ok((keep, part))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn halves_pairs_lower_with_upper() {
        let p = ModePartition::halves(6).unwrap();
        assert_eq!(p.alice(), &[0, 1, 2]);
        assert_eq!(p.bob(), &[3, 4, 5]);
        assert_eq!(p.pairing(), &[(0, 3), (1, 4), (2, 5)]);
        assert_eq!(
            ModePartition::mirrored(6).unwrap().pairing(),
            &[(0, 5), (1, 4), (2, 3)]
        );
        assert!(ModePartition::halves(5).is_err());
    }

    #[test]
    fn rejects_overlaps() {
        assert!(ModePartition::new(vec![0, 1], vec![1, 2], vec![]).is_err());
        assert!(ModePartition::new(vec![0, 1], vec![2, 3], vec![(0, 2), (1, 2)]).is_err());
        assert!(ModePartition::new(vec![0, 1], vec![2, 3], vec![(2, 0)]).is_err());
        assert!(ModePartition::new(vec![0, 0], vec![2], vec![]).is_err());
    }

    #[test]
    fn select_pairs_reindexes() {
        let p = ModePartition::halves(8).unwrap();
        let (keep, sub) = p.select_pairs(&[2, 0]).unwrap();
        assert_eq!(keep, vec![0, 2, 4, 6]);
        assert_eq!(sub.pairing(), &[(1, 3), (0, 2)]);
        assert!(p.select_pairs(&[4]).is_err());
        assert!(p.check_against(7).is_err());
    }
}
