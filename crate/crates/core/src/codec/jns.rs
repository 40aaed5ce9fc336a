//! The job number system.
//!
//! Inside a job occupying inversion positions `g..=g+l`, a schedule is valid
//! iff `b_g <= b_{g+1} <= … <= b_{g+l}`. The admissible blocks of one job are
//! ranked lexicographically; the rank is that job's digit. Digits of all jobs
//! form a mixed-radix numeral whose least significant digit belongs to the
//! last job.

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};

use super::CodecError;
use crate::instance::Instance;

/// Integer types the rank/unrank routines run on: `u128` as the fast path,
/// `BigUint` when counts outgrow it.
pub(crate) trait Word: Clone + Ord + Num + FromPrimitive + ToPrimitive {}
impl<T: Clone + Ord + Num + FromPrimitive + ToPrimitive> Word for T {}

/// Pascal triangle `binom[n][k]` for `n <= max_n`.
pub(crate) fn pascal<T: Word>(max_n: usize) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut row = vec![T::one(); n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1].clone() + rows[n - 1][k].clone();
        }
        rows.push(row);
    }
    rows
}

/// Number of admissible (non-decreasing, in-bound) assignments of the
/// inversion positions `start..start+len`. Zero once the window runs past
/// position `n_op`, which is what the shifted windows of the unranking rely
/// on.
pub(crate) fn window_count<T: Word>(binom: &[Vec<T>], start: usize, len: usize, n_op: usize) -> T {
    if len == 0 {
        T::one()
    } else if start + len - 1 > n_op {
        T::zero()
    } else {
        // prod_{j=start}^{start+len-1} (n_op - j + 1) / len!
        binom[n_op - start + 1][len].clone()
    }
}

/// Fills `out` (length `len`) with the admissible block of rank `r` for the
/// positions `g..g+len`. Each element takes the smallest value whose
/// cumulative completion count exceeds what is left of `r`.
pub(crate) fn unrank_block<T: Word>(binom: &[Vec<T>], mut r: T, g: usize, n_op: usize, out: &mut [usize]) {
    let last = g + out.len() - 1;
    let mut floor = 0;
    for j in g..=last {
        let rest = last - j;
        let mut v = floor;
        loop {
            let count = window_count(binom, j + 1 + v, rest, n_op);
            if r < count {
                break;
            }
            r = r - count;
            v += 1;
        }
        out[j - g] = v;
        floor = v;
    }
}

/// Inverse of [`unrank_block`]: the number of admissible blocks that are
/// lexicographically smaller.
pub(crate) fn rank_block<T: Word>(binom: &[Vec<T>], block: &[usize], g: usize, n_op: usize) -> T {
    let last = g + block.len() - 1;
    let mut r = T::zero();
    let mut floor = 0;
    for (i, &b) in block.iter().enumerate() {
        let j = g + i;
        for v in floor..b {
            r = r + window_count(binom, j + 1 + v, last - j, n_op);
        }
        floor = b;
    }
    r
}

/// Number of admissible value combinations for a job whose inversion
/// positions have the given value counts (`N_op - j + 1` for position `j`):
/// the product of the counts divided by `len!`.
pub fn n_digit(value_counts: &[u64]) -> Result<BigUint, CodecError> {
    let product: BigUint = value_counts.iter().map(|&c| BigUint::from(c)).product();
    let factorial: BigUint = (1..=value_counts.len() as u64).product();
    let (q, rem) = product.div_rem(&factorial);
    if !rem.is_zero() {
        return Err(CodecError::NonIntegral {
            value_counts: value_counts.to_vec(),
        });
    }
    Ok(q)
}

/// Value counts `N_op - j + 1` of the inversion positions of a window.
pub fn window_value_counts(positions: RangeInclusive<usize>, n_op: usize) -> Vec<u64> {
    positions.map(|j| (n_op + 1).saturating_sub(j) as u64).collect()
}

/// Per-job digit bases `N_digit(J_k)` in job order.
pub fn job_digit_bases(instance: &Instance) -> Vec<BigUint> {
    let n = instance.n_ops();
    let binom = pascal::<BigUint>(n + 1);
    (0..instance.n_jobs())
        .map(|k| {
            let ops = instance.job_ops(k);
            window_count(&binom, *ops.start(), ops.count(), n)
        })
        .collect()
}

/// Digits `r_1..r_{N_jobs}` of the job number system. `r_i` has base
/// `N_digit(J_{N_jobs-i+1})`, so `r_1` belongs to the last job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JnsDigits {
    digits: Vec<BigUint>,
    bases: Vec<BigUint>,
}

impl JnsDigits {
    pub fn new(digits: Vec<BigUint>, bases: Vec<BigUint>) -> Result<Self, CodecError> {
        assert_eq!(digits.len(), bases.len(), "one base per digit");
        for (i, (d, b)) in digits.iter().zip(&bases).enumerate() {
            if d >= b {
                return Err(CodecError::DigitOutOfBase {
                    position: i + 1,
                    digit: d.to_string(),
                    base: b.to_string(),
                });
            }
        }
        Ok(JnsDigits { digits, bases })
    }

    /// `r_1..r_{N_jobs}`.
    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn bases(&self) -> &[BigUint] {
        &self.bases
    }

    /// The digit enumerating the blocks of job `k` (0-based).
    pub fn for_job(&self, k: usize) -> &BigUint {
        &self.digits[self.digits.len() - 1 - k]
    }
}

/// Splits `x < N_op!/prod |J_k|!` into job digits, dividing by the base of
/// the last job first.
pub fn jns_decompose(x: &BigUint, instance: &Instance) -> Result<JnsDigits, CodecError> {
    let mut bases = job_digit_bases(instance);
    bases.reverse();
    let limit: BigUint = bases.iter().product();
    if *x >= limit {
        return Err(CodecError::ValueOutOfRange {
            value: x.clone(),
            limit,
        });
    }
    let mut q = x.clone();
    let digits = bases
        .iter()
        .map(|b| {
            let (next, r) = q.div_rem(b);
            q = next;
            r
        })
        .collect();
    Ok(JnsDigits { digits, bases })
}

pub fn jns_compose(digits: &JnsDigits) -> BigUint {
    let mut x = BigUint::zero();
    for (d, b) in digits.digits.iter().zip(&digits.bases).rev() {
        x = x * b + d;
    }
    x
}

/// Admissible inversion elements `b_g..b_{g+l}` of rank `r` for a job at
/// the given inversion positions.
pub fn jns_digit_to_block(
    r: &BigUint,
    positions: RangeInclusive<usize>,
    n_op: usize,
) -> Result<Vec<usize>, CodecError> {
    let (g, len) = check_window(&positions, n_op)?;
    let binom = pascal::<BigUint>(n_op + 1);
    let limit = window_count(&binom, g, len, n_op);
    if *r >= limit {
        return Err(CodecError::ValueOutOfRange {
            value: r.clone(),
            limit,
        });
    }
    let mut block = vec![0; len];
    unrank_block(&binom, r.clone(), g, n_op, &mut block);
    Ok(block)
}

/// Rank of an admissible block among all admissible blocks of its window.
pub fn block_to_jns_digit(
    block: &[usize],
    positions: RangeInclusive<usize>,
    n_op: usize,
) -> Result<BigUint, CodecError> {
    let (g, len) = check_window(&positions, n_op)?;
    let last_bound = n_op - (g + len - 1);
    let admissible = block.len() == len
        && block.windows(2).all(|w| w[0] <= w[1])
        && block.last().is_some_and(|&b| b <= last_bound);
    if !admissible {
        return Err(CodecError::InadmissibleBlock {
            block: block.to_vec(),
        });
    }
    let binom = pascal::<BigUint>(n_op + 1);
    Ok(rank_block(&binom, block, g, n_op))
}

fn check_window(positions: &RangeInclusive<usize>, n_op: usize) -> Result<(usize, usize), CodecError> {
    let (g, last) = (*positions.start(), *positions.end());
    if g == 0 || last < g || last > n_op {
        return Err(CodecError::BadWindow {
            start: g,
            end: last,
            n_op,
        });
    }
    Ok((g, last - g + 1))
}
