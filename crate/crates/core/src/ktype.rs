//! Method-of-types machinery: k-types, type classes, and conditional
//! shells, with lexicographic total enumeration.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Empirical counts over a finite alphabet summing to `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KType {
    pub k: usize,
    pub counts: Vec<usize>,
}

impl KType {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::OutOfRange("a type needs a nonempty alphabet".into()));
        }
        let k = counts.iter().sum();
        if k == 0 {
            return Err(Error::OutOfRange("a type must have positive length".into()));
        }
        Ok(Self { k, counts })
    }

    /// Empirical type of a sequence over `0..alphabet`.
    pub fn of_sequence(seq: &[usize], alphabet: usize) -> Result<Self> {
        let mut counts = vec![0usize; alphabet];
        for &v in seq {
            if v >= alphabet {
                return Err(Error::OutOfRange(format!(
                    "symbol {v} outside alphabet of size {alphabet}"
                )));
            }
            counts[v] += 1;
        }
        Self::new(counts)
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    /// The type as a PMF.
    pub fn pmf(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.k as f64)
            .collect()
    }

    /// `|T_P|`, the multinomial coefficient `k! / prod counts!`.
    pub fn class_size(&self) -> u128 {
        let mut result: u128 = 1;
        let mut n = 0usize;
        for &c in &self.counts {
            for i in 1..=c {
                n += 1;
                result = result * n as u128 / i as u128;
            }
        }
        result
    }
}

/// A joint k-type over a product alphabet `A x B`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointKType {
    pub k: usize,
    pub na: usize,
    pub nb: usize,
    /// `counts[a * nb + b]`.
    pub counts: Vec<usize>,
}

impl JointKType {
    pub fn new(na: usize, nb: usize, counts: Vec<usize>) -> Result<Self> {
        if na == 0 || nb == 0 || counts.len() != na * nb {
            return Err(Error::OutOfRange(
                "joint type shape does not match its alphabets".into(),
            ));
        }
        let k = counts.iter().sum();
        if k == 0 {
            return Err(Error::OutOfRange("a type must have positive length".into()));
        }
        Ok(Self { k, na, nb, counts })
    }

    #[inline]
    pub fn count(&self, a: usize, b: usize) -> usize {
        self.counts[a * self.nb + b]
    }

    pub fn marginal_a(&self) -> KType {
        let counts = (0..self.na)
            .map(|a| (0..self.nb).map(|b| self.count(a, b)).sum())
            .collect();
        KType::new(counts).expect("marginal of a valid joint type")
    }

    pub fn marginal_b(&self) -> KType {
        let counts = (0..self.nb)
            .map(|b| (0..self.na).map(|a| self.count(a, b)).sum())
            .collect();
        KType::new(counts).expect("marginal of a valid joint type")
    }

    /// Conditional entropy `H(A|B)` in bits of the normalized joint type.
    pub fn conditional_entropy_a_given_b(&self) -> f64 {
        let k = self.k as f64;
        let mut h = 0.0;
        for b in 0..self.nb {
            let nb: usize = (0..self.na).map(|a| self.count(a, b)).sum();
            if nb == 0 {
                continue;
            }
            for a in 0..self.na {
                let c = self.count(a, b);
                if c > 0 {
                    h -= c as f64 / k * (c as f64 / nb as f64).log2();
                }
            }
        }
        h
    }

    /// Joint type of a pair of aligned sequences.
    pub fn of_sequences(a: &[usize], b: &[usize], na: usize, nb: usize) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::OutOfRange("sequences differ in length".into()));
        }
        let mut counts = vec![0usize; na * nb];
        for (&ai, &bi) in a.iter().zip(b) {
            if ai >= na || bi >= nb {
                return Err(Error::OutOfRange("symbol outside alphabet".into()));
            }
            counts[ai * nb + bi] += 1;
        }
        Self::new(na, nb, counts)
    }
}

/// Lexicographic enumeration of the type class `T_P`: all length-`k`
/// sequences with empirical counts `P`, ascending.
pub struct TypeClassIter {
    next: Option<Vec<usize>>,
}

impl TypeClassIter {
    pub fn new(ktype: &KType) -> Self {
        // Smallest sequence: symbols in ascending order.
        let mut first = Vec::with_capacity(ktype.k);
        for (sym, &c) in ktype.counts.iter().enumerate() {
            first.extend(std::iter::repeat(sym).take(c));
        }
        Self { next: Some(first) }
    }
}

impl Iterator for TypeClassIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        self.next = next_permutation(&current);
        Some(current)
    }
}

/// Next multiset permutation in lexicographic order, if any.
fn next_permutation(seq: &[usize]) -> Option<Vec<usize>> {
    let mut v = seq.to_vec();
    let n = v.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    Some(v)
}

/// All sequences jointly typical with `b_seq` under the joint type: the
/// conditional shell `{a : (a, b_seq) in T_{P_AB}}`, enumerated in
/// lexicographic order of `a`.
pub fn conditional_shell(joint: &JointKType, b_seq: &[usize]) -> Vec<Vec<usize>> {
    assert_eq!(b_seq.len(), joint.k);
    let mut result = Vec::new();
    // Positions grouped by the conditioning symbol; within each group the
    // a-symbols must realize the conditional counts, independently across
    // groups, which keeps the enumeration a product of multiset placements.
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); joint.nb];
    for (i, &b) in b_seq.iter().enumerate() {
        groups[b].push(i);
    }
    for (b, group) in groups.iter().enumerate() {
        let needed: usize = (0..joint.na).map(|a| joint.count(a, b)).sum();
        if needed != group.len() {
            return result; // b_seq is not of the right marginal type
        }
    }
    let mut assignment = vec![0usize; joint.k];
    fn rec(
        joint: &JointKType,
        groups: &[Vec<usize>],
        b: usize,
        assignment: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if b == groups.len() {
            out.push(assignment.clone());
            return;
        }
        let counts: Vec<usize> = (0..joint.na).map(|a| joint.count(a, b)).collect();
        let ktype = match KType::new(counts) {
            Ok(t) => t,
            Err(_) => {
                // No mass on this conditioning symbol; nothing to place.
                rec(joint, groups, b + 1, assignment, out);
                return;
            }
        };
        for placement in TypeClassIter::new(&ktype) {
            for (&pos, &sym) in groups[b].iter().zip(&placement) {
                assignment[pos] = sym;
            }
            rec(joint, groups, b + 1, assignment, out);
        }
    }
    rec(joint, &groups, 0, &mut assignment, &mut result);
    result.sort_unstable();
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_size_matches_enumeration() {
        for counts in [vec![2, 2], vec![1, 3], vec![2, 1, 1], vec![4, 0]] {
            let t = KType::new(counts).unwrap();
            let listed: Vec<_> = TypeClassIter::new(&t).collect();
            assert_eq!(listed.len() as u128, t.class_size());
            // Lexicographic and duplicate-free.
            for w in listed.windows(2) {
                assert!(w[0] < w[1]);
            }
            for seq in &listed {
                assert_eq!(&KType::of_sequence(seq, t.alphabet()).unwrap(), &t);
            }
        }
    }

    #[test]
    fn binomial_class_size() {
        let t = KType::new(vec![4, 4]).unwrap();
        assert_eq!(t.class_size(), 70);
    }

    #[test]
    fn conditional_entropy_uniform_pair() {
        let joint = JointKType::new(2, 2, vec![1, 1, 1, 1]).unwrap();
        assert!((joint.conditional_entropy_a_given_b() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shell_sizes_constant_across_conditioning_sequences() {
        // Shell cardinality depends on the conditioning sequence only
        // through its type.
        let joint = JointKType::new(2, 2, vec![2, 1, 1, 2]).unwrap();
        let b_type = joint.marginal_b();
        let sizes: Vec<usize> = TypeClassIter::new(&b_type)
            .map(|b_seq| conditional_shell(&joint, &b_seq).len())
            .collect();
        assert!(!sizes.is_empty());
        assert!(sizes.windows(2).all(|w| w[0] == w[1]), "{sizes:?}");
        // Every member of the shell really has the joint type.
        let b_seq: Vec<usize> = TypeClassIter::new(&b_type).next().unwrap();
        for a_seq in conditional_shell(&joint, &b_seq) {
            let jt = JointKType::of_sequences(&a_seq, &b_seq, 2, 2).unwrap();
            assert_eq!(jt, joint);
        }
    }

    #[test]
    fn shell_of_wrong_type_is_empty() {
        let joint = JointKType::new(2, 2, vec![2, 0, 0, 2]).unwrap();
        // b_seq with the wrong marginal type.
        assert!(conditional_shell(&joint, &[0, 0, 0, 0]).is_empty());
    }
}
