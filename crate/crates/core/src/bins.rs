//! Covering bins: seeded random partitions of a type class such that every
//! conditioning sequence of the right type finds a jointly typical partner
//! in every bin.

use serde::Serialize;

use crate::error::Error;
use crate::ktype::{JointKType, KType, TypeClassIter};
use crate::rng::SplitMix64;
use crate::Result;

/// A partition of `T_{P_U}` into `theta` bins that covers `T_{P_S}`:
/// for every state sequence of type `P_S` and every bin, the bin holds a
/// u-sequence whose joint type with the state sequence is `P_US`.
///
/// Bins are assembled by placing each u-sequence in a uniformly seeded
/// random bin and re-drawing on failure; existence is only guaranteed for
/// long blocks, so running out of retries is a legitimate outcome.
#[derive(Debug, Clone, Serialize)]
pub struct BinFamily {
    pub theta: usize,
    /// Bin membership: `bins[l]` lists u-sequences, each of length `k`.
    pub bins: Vec<Vec<Vec<usize>>>,
    pub seed: u64,
    pub retries: u32,
    pub joint: JointKType,
}

/// `Theta = ceil(2^{k (H(U|S) - eps)})`, the bin count.
pub fn bin_count(joint: &JointKType, eps: f64) -> usize {
    let exponent = joint.k as f64 * (joint.conditional_entropy_a_given_b() - eps);
    if exponent <= 0.0 {
        1
    } else {
        (2.0_f64.powf(exponent)).ceil() as usize
    }
}

/// Builds a covering bin family for the joint type `P_US`.
///
/// Each attempt places every `u`-sequence of `T_{P_U}` into one of `Theta`
/// seeded-random bins and then checks the covering condition exhaustively
/// over `T_{P_S} x bins`; after `max_retries` failed draws the search
/// reports [`Error::CoveringNotFound`].
pub fn build_covering_bins(
    p_us: &JointKType,
    eps: f64,
    seed: u64,
    max_retries: u32,
) -> Result<BinFamily> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::OutOfRange("eps must be a nonnegative real".into()));
    }
    let theta = bin_count(p_us, eps);
    let p_u = p_us.marginal_a();
    let u_class: Vec<Vec<usize>> = TypeClassIter::new(&p_u).collect();
    let mut rng = SplitMix64::new(seed);
    for attempt in 0..=max_retries {
        let mut bins: Vec<Vec<Vec<usize>>> = vec![Vec::new(); theta];
        for u_seq in &u_class {
            let l = rng.below(theta as u64) as usize;
            bins[l].push(u_seq.clone());
        }
        let family = BinFamily {
            theta,
            bins,
            seed,
            retries: attempt,
            joint: p_us.clone(),
        };
        if family.check_covering().is_ok() {
            return Ok(family);
        }
    }
    Err(Error::CoveringNotFound {
        retries: max_retries,
    })
}

impl BinFamily {
    /// Asserts that the bins partition the type class.
    pub fn check_partition(&self) -> Result<()> {
        let p_u = self.joint.marginal_a();
        let mut members: Vec<&Vec<usize>> = self.bins.iter().flatten().collect();
        let expected = p_u.class_size();
        if members.len() as u128 != expected {
            return Err(Error::CoveringViolation(format!(
                "bins hold {} sequences, type class has {}",
                members.len(),
                expected
            )));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::CoveringViolation(
                "a sequence appears in two bins".into(),
            ));
        }
        for m in members {
            if KType::of_sequence(m, p_u.alphabet())? != p_u {
                return Err(Error::CoveringViolation(format!(
                    "sequence {m:?} is not of the bin type"
                )));
            }
        }
        Ok(())
    }

    /// Exhaustive covering check over `T_{P_S} x bins`.
    pub fn check_covering(&self) -> Result<()> {
        let p_s = self.joint.marginal_b();
        for s_seq in TypeClassIter::new(&p_s) {
            for (l, bin) in self.bins.iter().enumerate() {
                let covered = bin.iter().any(|u_seq| self.jointly_typical(u_seq, &s_seq));
                if !covered {
                    return Err(Error::CoveringViolation(format!(
                        "bin {l} has no partner for state block {s_seq:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn jointly_typical(&self, u_seq: &[usize], s_seq: &[usize]) -> bool {
        match JointKType::of_sequences(u_seq, s_seq, self.joint.na, self.joint.nb) {
            Ok(jt) => jt == self.joint,
            Err(_) => false,
        }
    }

    /// First u-sequence in bin `l` jointly typical with the state block.
    pub fn pick_partner(&self, l: usize, s_seq: &[usize]) -> Result<Vec<usize>> {
        self.bins[l]
            .iter()
            .find(|u| self.jointly_typical(u, s_seq))
            .cloned()
            .ok_or_else(|| {
                Error::CoveringViolation(format!(
                    "bin {l} has no partner for state block {s_seq:?}"
                ))
            })
    }

    /// Bin sizes, for reports.
    pub fn sizes(&self) -> Vec<usize> {
        self.bins.iter().map(|b| b.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_2x2(k: usize) -> JointKType {
        JointKType::new(2, 2, vec![k / 4; 4]).unwrap()
    }

    #[test]
    fn theta_of_uniform_type() {
        // H(U|S) = 1 bit, k = 4, eps = 0.5 -> ceil(2^2) = 4.
        assert_eq!(bin_count(&uniform_2x2(4), 0.5), 4);
    }

    #[test]
    fn large_eps_gives_single_bin() {
        let joint = uniform_2x2(4);
        assert_eq!(bin_count(&joint, 2.0), 1);
        let family = build_covering_bins(&joint, 2.0, 1, 0).unwrap();
        assert_eq!(family.theta, 1);
        assert_eq!(family.retries, 0);
        family.check_partition().unwrap();
        family.check_covering().unwrap();
    }

    #[test]
    fn returned_family_passes_both_checks() {
        let joint = uniform_2x2(8);
        match build_covering_bins(&joint, 0.5, 7, 50) {
            Ok(family) => {
                family.check_partition().unwrap();
                family.check_covering().unwrap();
            }
            Err(Error::CoveringNotFound { .. }) => {
                // Legitimate at small block lengths.
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn same_seed_same_bins() {
        let joint = uniform_2x2(4);
        let a = build_covering_bins(&joint, 2.0, 9, 3).unwrap();
        let b = build_covering_bins(&joint, 2.0, 9, 3).unwrap();
        assert_eq!(a.bins, b.bins);
    }
}
