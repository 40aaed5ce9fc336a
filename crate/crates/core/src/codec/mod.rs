//! Bijection between integers (qubit bitstrings) and valid schedules.
//!
//! An index `x < |valid orders| * prod |mu_i|` splits into a quotient that
//! selects the operation order and a remainder that selects the machines:
//!
//! ```text
//! x --div prod|mu_i|--> q --JNS digits--> per-job inversion blocks --> inversion vector --> order
//!   \--mod prod|mu_i|--> r --mixed radix |mu_1|, |mu_2|, ...--> machine choices
//! ```
//!
//! Every integer in range decodes to a schedule that satisfies the job
//! precedence constraint, and every such schedule has exactly one index.

mod jns;
mod permutation;
mod qubits;

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use thiserror::Error;

use crate::instance::{Instance, MachineId, OpId};
use crate::schedule::{validate_schedule, Schedule, Violation};

pub use jns::{
    block_to_jns_digit, job_digit_bases, jns_compose, jns_decompose, jns_digit_to_block, n_digit,
    window_value_counts, JnsDigits,
};
pub use permutation::{
    fns_to_int, int_to_fns, inversion_to_permutation, permutation_to_inversion, FnsDigits,
    InversionVector,
};
pub use qubits::{op_windows, qubit_count, qubit_count_time_indexed, t_max, t_min, OpWindow};

use jns::{pascal, rank_block, unrank_block, window_count, Word};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("not a permutation of 1..=n: {0:?}")]
    NotAPermutation(Vec<usize>),
    #[error("inversion element b_{position} = {value} exceeds its bound {max}")]
    InversionOutOfBounds {
        position: usize,
        value: usize,
        max: usize,
    },
    #[error("value {value} is out of range (must be below {limit})")]
    ValueOutOfRange { value: BigUint, limit: BigUint },
    #[error("digit {position} = {digit} is not below its base {base}")]
    DigitOutOfBase {
        position: usize,
        digit: String,
        base: String,
    },
    #[error("value counts {value_counts:?} do not describe a job window (non-integral digit count)")]
    NonIntegral { value_counts: Vec<u64> },
    #[error("block {block:?} is not admissible for its window")]
    InadmissibleBlock { block: Vec<usize> },
    #[error("window {start}..={end} does not fit {n_op} inversion positions")]
    BadWindow { start: usize, end: usize, n_op: usize },
    #[error("invalid schedule: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSchedule(Vec<Violation>),
    #[error("time horizon {horizon} is below the longest job ({t_min})")]
    HorizonTooShort { horizon: u64, t_min: u64 },
    #[error("bitstring has {found} characters, expected {expected}")]
    BitstringLength { expected: usize, found: usize },
    #[error("bitstring may only contain '0' and '1'")]
    BadBitstring,
}

/// How [`decode`] treats integers outside the strict domain
/// `[0, count_valid_schedules)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    /// Out-of-domain values are errors.
    #[default]
    Strict,
    /// Any value representable on the register is reduced modulo the count.
    Total,
}

/// An integer naming one schedule plus machine configuration, together with
/// the register width it lives on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeIndex {
    value: BigUint,
    width: u32,
}

impl CodeIndex {
    pub fn new(value: BigUint, width: u32) -> Result<Self, CodecError> {
        let limit = BigUint::one() << width;
        if value >= limit {
            return Err(CodecError::ValueOutOfRange { value, limit });
        }
        Ok(CodeIndex { value, width })
    }

    /// Index on the register of `instance`.
    pub fn for_instance(value: BigUint, instance: &Instance) -> Result<Self, CodecError> {
        CodeIndex::new(value, qubit_count(instance))
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Exactly `width` characters, most significant bit first (qubit 1).
    pub fn bitstring(&self) -> String {
        format!("{:0>w$}", self.value.to_str_radix(2), w = self.width as usize)
    }

    pub fn from_bitstring(bits: &str, width: u32) -> Result<Self, CodecError> {
        if bits.len() != width as usize {
            return Err(CodecError::BitstringLength {
                expected: width as usize,
                found: bits.len(),
            });
        }
        Ok(CodeIndex {
            value: parse_binary(bits)?,
            width,
        })
    }
}

/// `{"value": "<decimal>", "bitstring": "...", "width": n}`; the decimal is a
/// string so wide registers survive JSON readers limited to doubles.
impl Serialize for CodeIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CodeIndex", 3)?;
        s.serialize_field("value", &self.value.to_string())?;
        s.serialize_field("bitstring", &self.bitstring())?;
        s.serialize_field("width", &self.width)?;
        s.end()
    }
}

impl fmt::Display for CodeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, self.bitstring())
    }
}

/// Plain binary representation without padding.
pub fn to_binary(x: &BigUint) -> String {
    x.to_str_radix(2)
}

pub fn parse_binary(bits: &str) -> Result<BigUint, CodecError> {
    if bits.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(CodecError::BadBitstring);
    }
    BigUint::parse_bytes(bits.as_bytes(), 2).ok_or(CodecError::BadBitstring)
}

/// Orders respecting job precedence: `N_op! / prod |J_k|!`.
pub fn count_valid_orders(instance: &Instance) -> BigUint {
    job_digit_bases(instance).iter().product()
}

/// Machine configurations: `prod |mu_i|`.
pub fn count_machine_configs(instance: &Instance) -> BigUint {
    instance
        .ops()
        .iter()
        .map(|o| BigUint::from(o.machines().len()))
        .product()
}

/// Valid schedules times machine configurations.
pub fn count_valid_schedules(instance: &Instance) -> BigUint {
    count_valid_orders(instance) * count_machine_configs(instance)
}

struct Tables<T> {
    binom: Vec<Vec<T>>,
    // N_digit per job, in job order
    job_bases: Vec<T>,
    machine_configs: T,
    total: T,
}

impl<T: Word> Tables<T> {
    fn build(instance: &Instance) -> Self {
        let n = instance.n_ops();
        let binom = pascal::<T>(n + 1);
        let job_bases: Vec<T> = (0..instance.n_jobs())
            .map(|k| {
                let ops = instance.job_ops(k);
                window_count(&binom, *ops.start(), ops.count(), n)
            })
            .collect();
        let machine_configs = instance
            .ops()
            .iter()
            .fold(T::one(), |acc, o| acc * T::from_usize(o.machines().len()).unwrap());
        let orders = job_bases.iter().fold(T::one(), |acc, b| acc * b.clone());
        Tables {
            binom,
            job_bases,
            total: orders * machine_configs.clone(),
            machine_configs,
        }
    }
}

/// Per-instance lookup tables for repeated encoding and decoding.
///
/// Arithmetic runs on `u128` whenever the schedule count fits, and on
/// `BigUint` otherwise.
pub struct Codec {
    instance: Instance,
    big: Tables<BigUint>,
    small: Option<Tables<u128>>,
    width: u32,
}

impl Codec {
    pub fn new(instance: &Instance) -> Self {
        let big = Tables::<BigUint>::build(instance);
        // the table's largest binomial is C(n+1, (n+1)/2) <= total * something;
        // require headroom on the full Pascal triangle too
        let fits = big.total.bits() < 127
            && big.binom.last().is_some_and(|row| row.iter().all(|c| c.bits() < 127));
        let small = fits.then(|| Tables::<u128>::build(instance));
        let width = qubits::width_for(&big.total);
        Codec {
            instance: instance.clone(),
            big,
            small,
            width,
        }
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    /// Number of valid schedule/machine combinations.
    pub fn count(&self) -> &BigUint {
        &self.big.total
    }

    /// The count as `u128`, if it fits.
    pub fn count_u128(&self) -> Option<u128> {
        self.small.as_ref().map(|t| t.total)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn decode(&self, value: &BigUint, mode: DecodeMode) -> Result<Schedule, CodecError> {
        let reduced = self.reduce(value, mode)?;
        let (order, machines) = match (&self.small, reduced.to_u128()) {
            (Some(t), Some(x)) => self.split(t, x),
            _ => self.split(&self.big, reduced),
        };
        Ok(to_schedule(&order, &machines))
    }

    /// Decodes an in-domain `u128` into the operation order and the machine
    /// of every operation (indexed by operation id - 1). Falls back to big
    /// arithmetic when needed.
    pub fn decode_parts(&self, value: u128) -> (Vec<OpId>, Vec<MachineId>) {
        match &self.small {
            Some(t) => {
                assert!(value < t.total, "index {value} outside the strict domain");
                self.split(t, value)
            }
            None => self.split(&self.big, BigUint::from(value)),
        }
    }

    pub fn encode(&self, schedule: &Schedule) -> Result<CodeIndex, CodecError> {
        let violations = validate_schedule(&self.instance, schedule);
        if !violations.is_empty() {
            return Err(CodecError::InvalidSchedule(violations));
        }
        let value = match &self.small {
            Some(t) => BigUint::from(self.join(t, schedule)),
            None => self.join(&self.big, schedule),
        };
        Ok(CodeIndex {
            value,
            width: self.width,
        })
    }

    fn reduce(&self, value: &BigUint, mode: DecodeMode) -> Result<BigUint, CodecError> {
        match mode {
            DecodeMode::Strict => {
                if *value >= self.big.total {
                    return Err(CodecError::ValueOutOfRange {
                        value: value.clone(),
                        limit: self.big.total.clone(),
                    });
                }
                Ok(value.clone())
            }
            DecodeMode::Total => {
                let limit = BigUint::one() << self.width;
                if *value >= limit {
                    return Err(CodecError::ValueOutOfRange {
                        value: value.clone(),
                        limit,
                    });
                }
                Ok(value % &self.big.total)
            }
        }
    }

    fn split<T: Word>(&self, t: &Tables<T>, value: T) -> (Vec<OpId>, Vec<MachineId>) {
        let inst = &self.instance;
        let n = inst.n_ops();
        let (mut q, mut rem) = (value.clone() / t.machine_configs.clone(), value % t.machine_configs.clone());

        let mut b = vec![0usize; n];
        for k in (0..inst.n_jobs()).rev() {
            let base = t.job_bases[k].clone();
            let digit = q.clone() % base.clone();
            q = q / base;
            let ops = inst.job_ops(k);
            let g = *ops.start();
            unrank_block(&t.binom, digit, g, n, &mut b[g - 1..*ops.end()]);
        }
        let mut order = Vec::with_capacity(n);
        permutation::insert_from_inversion(&b, &mut order);

        let machines = inst
            .ops()
            .iter()
            .map(|op| {
                let size = T::from_usize(op.machines().len()).unwrap();
                let pick = rem.clone() % size.clone();
                rem = rem.clone() / size;
                op.machines()[pick.to_usize().unwrap()]
            })
            .collect();
        (order, machines)
    }

    fn join<T: Word>(&self, t: &Tables<T>, schedule: &Schedule) -> T {
        let inst = &self.instance;
        let n = inst.n_ops();
        let inv = permutation_to_inversion(&schedule.order()).expect("validated schedule");
        let b = inv.as_slice();

        let mut q = T::zero();
        for k in 0..inst.n_jobs() {
            let ops = inst.job_ops(k);
            let g = *ops.start();
            let digit = rank_block(&t.binom, &b[g - 1..*ops.end()], g, n);
            q = q * t.job_bases[k].clone() + digit;
        }

        let mut machine_of = vec![0; n];
        for e in schedule.entries() {
            machine_of[e.op - 1] = e.machine;
        }
        let mut rem = T::zero();
        for (i, op) in inst.ops().iter().enumerate().rev() {
            let pick = op
                .machines()
                .iter()
                .position(|&m| m == machine_of[i])
                .expect("validated machine");
            rem = rem * T::from_usize(op.machines().len()).unwrap() + T::from_usize(pick).unwrap();
        }
        q * t.machine_configs.clone() + rem
    }
}

fn to_schedule(order: &[OpId], machines: &[MachineId]) -> Schedule {
    Schedule::new(order.iter().map(|&op| (op, machines[op - 1])).collect())
}

/// Schedule named by `value`. In [`DecodeMode::Total`] any value below
/// `2^qubit_count` is accepted and reduced modulo the schedule count first.
pub fn decode(value: &BigUint, instance: &Instance, mode: DecodeMode) -> Result<Schedule, CodecError> {
    Codec::new(instance).decode(value, mode)
}

/// Index of a valid schedule; inverse of strict [`decode`].
pub fn encode(schedule: &Schedule, instance: &Instance) -> Result<CodeIndex, CodecError> {
    Codec::new(instance).encode(schedule)
}

/// Is the integer quotient/remainder split consistent: `x = q * P + r`.
#[doc(hidden)]
pub fn split_index(value: &BigUint, instance: &Instance) -> (BigUint, BigUint) {
    value.div_rem(&count_machine_configs(instance))
}
