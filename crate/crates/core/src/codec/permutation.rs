//! Inversion vectors and the factorial number system.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::CodecError;

/// `b_j` = number of elements greater than `j` standing to the left of `j`
/// in the permutation tuple. Always `b_j <= n - j` (1-based `j`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InversionVector(Vec<usize>);

impl InversionVector {
    pub fn new(b: Vec<usize>) -> Result<Self, CodecError> {
        let n = b.len();
        for (i, &v) in b.iter().enumerate() {
            let max = n - (i + 1);
            if v > max {
                return Err(CodecError::InversionOutOfBounds {
                    position: i + 1,
                    value: v,
                    max,
                });
            }
        }
        Ok(InversionVector(b))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// True iff `b_{j+1} >= b_j` for every adjacent pair inside a job.
    /// `job_sizes` partitions `1..=n` into contiguous blocks.
    pub fn respects_jobs(&self, job_sizes: &[usize]) -> bool {
        let mut start = 0;
        job_sizes.iter().all(|&size| {
            let block = &self.0[start..start + size];
            start += size;
            block.windows(2).all(|w| w[0] <= w[1])
        })
    }

    pub fn to_permutation(&self) -> Vec<usize> {
        inversion_to_permutation(self)
    }
}

/// Inversion vector of a permutation tuple of `1..=n`.
pub fn permutation_to_inversion(perm: &[usize]) -> Result<InversionVector, CodecError> {
    let n = perm.len();
    let mut position = vec![usize::MAX; n];
    for (s, &v) in perm.iter().enumerate() {
        if v == 0 || v > n || position[v - 1] != usize::MAX {
            return Err(CodecError::NotAPermutation(perm.to_vec()));
        }
        position[v - 1] = s;
    }
    let b = (1..=n)
        .map(|j| perm[..position[j - 1]].iter().filter(|&&k| k > j).count())
        .collect();
    Ok(InversionVector(b))
}

/// Rebuilds the permutation by inserting `j = n, n-1, …, 1` at offset `b_j`
/// from the left of the partial tuple.
pub fn inversion_to_permutation(inv: &InversionVector) -> Vec<usize> {
    let mut perm = Vec::with_capacity(inv.len());
    insert_from_inversion(inv.as_slice(), &mut perm);
    perm
}

pub(crate) fn insert_from_inversion(b: &[usize], perm: &mut Vec<usize>) {
    perm.clear();
    for j in (1..=b.len()).rev() {
        perm.insert(b[j - 1], j);
    }
}

/// Digits `c_1..c_n` of a factorial-number-system numeral, `0 <= c_k < k`,
/// with value `sum c_k (k-1)!`. Displayed most significant digit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FnsDigits(Vec<usize>);

impl FnsDigits {
    /// `digits[k - 1]` is `c_k`.
    pub fn new(digits: Vec<usize>) -> Result<Self, CodecError> {
        for (i, &c) in digits.iter().enumerate() {
            if c > i {
                return Err(CodecError::DigitOutOfBase {
                    position: i + 1,
                    digit: c.to_string(),
                    base: (i + 1).to_string(),
                });
            }
        }
        Ok(FnsDigits(digits))
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    /// Pairs digits with inversion elements via `b_j = c_{n-j+1}`.
    pub fn from_inversion(inv: &InversionVector) -> Self {
        FnsDigits(inv.as_slice().iter().rev().copied().collect())
    }

    pub fn to_inversion(&self) -> InversionVector {
        InversionVector(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for FnsDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.len() > 10;
        for (i, c) in self.0.iter().rev().enumerate() {
            if wide && i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Converts `x < n_digits!` by repeated division by the bases `1, 2, …, n`.
pub fn int_to_fns(x: &BigUint, n_digits: usize) -> Result<FnsDigits, CodecError> {
    let limit: BigUint = (1..=n_digits as u64).product();
    if *x >= limit {
        return Err(CodecError::ValueOutOfRange {
            value: x.clone(),
            limit,
        });
    }
    let mut q = x.clone();
    let digits = (1..=n_digits)
        .map(|base| {
            let base = BigUint::from(base);
            let c = &q % &base;
            q /= &base;
            c.to_usize().expect("digit is below its base")
        })
        .collect();
    debug_assert!(q.is_zero());
    Ok(FnsDigits(digits))
}

pub fn fns_to_int(digits: &FnsDigits) -> BigUint {
    let mut x = BigUint::zero();
    for (k, &c) in digits.0.iter().enumerate().rev() {
        x = x * BigUint::from(k + 1) + BigUint::from(c);
    }
    x
}
