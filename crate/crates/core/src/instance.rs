//! Job-shop problem instances.
//!
//! Operations are numbered `1..=n_ops` in lexicographic order, so every job is
//! a contiguous block of ids. Each operation carries an ordered set of
//! admissible machines and a duration per admissible machine.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type OpId = usize;
pub type MachineId = usize;
pub type Time = u64;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl InstanceError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        InstanceError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// One operation: its admissible machines (in instance order) and the
/// execution time on each of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    machines: Vec<MachineId>,
    durations: Vec<Time>,
}

impl Operation {
    pub fn new(machines: Vec<MachineId>, durations: Vec<Time>) -> Self {
        Operation {
            machines,
            durations,
        }
    }

    /// Single-machine operation.
    pub fn single(machine: MachineId, duration: Time) -> Self {
        Operation::new(vec![machine], vec![duration])
    }

    /// The ordered set μ of admissible machines.
    pub fn machines(&self) -> &[MachineId] {
        &self.machines
    }

    pub fn durations(&self) -> &[Time] {
        &self.durations
    }

    pub fn duration_on(&self, machine: MachineId) -> Option<Time> {
        self.machines
            .iter()
            .position(|&m| m == machine)
            .map(|i| self.durations[i])
    }

    pub fn min_duration(&self) -> Time {
        self.durations.iter().copied().min().unwrap_or(0)
    }
}

/// A JSP/FJSP instance. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    job_sizes: Vec<usize>,
    n_machines: usize,
    ops: Vec<Operation>,
    // job index (0-based) of each operation, cached
    job_of: Vec<usize>,
}

impl Instance {
    /// Builds and validates an instance from job sizes (in lexicographic
    /// order) and per-operation data.
    pub fn new(
        job_sizes: Vec<usize>,
        n_machines: usize,
        ops: Vec<Operation>,
    ) -> Result<Self, InstanceError> {
        let n_ops = ops.len();
        if n_ops == 0 {
            return Err(InstanceError::invalid("n_ops", "an instance needs at least one operation"));
        }
        if n_machines == 0 {
            return Err(InstanceError::invalid("n_machines", "an instance needs at least one machine"));
        }
        for (k, &size) in job_sizes.iter().enumerate() {
            if size == 0 {
                return Err(InstanceError::invalid(format!("jobs[{k}]"), "job must not be empty"));
            }
        }
        let covered: usize = job_sizes.iter().sum();
        if covered != n_ops {
            return Err(InstanceError::invalid(
                "jobs",
                format!("jobs cover {covered} operations but n_ops is {n_ops}"),
            ));
        }
        for (i, op) in ops.iter().enumerate() {
            let id = i + 1;
            if op.machines.is_empty() {
                return Err(InstanceError::invalid(
                    format!("ops[{i}].machines"),
                    format!("operation {id} has no admissible machine"),
                ));
            }
            if op.machines.len() != op.durations.len() {
                return Err(InstanceError::invalid(
                    format!("ops[{i}].durations"),
                    format!("operation {id} needs exactly one duration per admissible machine"),
                ));
            }
            for (k, &m) in op.machines.iter().enumerate() {
                if m == 0 || m > n_machines {
                    return Err(InstanceError::invalid(
                        format!("ops[{i}].machines[{k}]"),
                        format!("operation {id}: machine {m} is outside 1..={n_machines}"),
                    ));
                }
                if op.machines[..k].contains(&m) {
                    return Err(InstanceError::invalid(
                        format!("ops[{i}].machines[{k}]"),
                        format!("operation {id}: machine {m} listed twice"),
                    ));
                }
                if op.durations[k] == 0 {
                    return Err(InstanceError::invalid(
                        format!("ops[{i}].durations.{m}"),
                        format!("operation {id}: duration on machine {m} must be positive"),
                    ));
                }
            }
        }
        let job_of = job_sizes
            .iter()
            .enumerate()
            .flat_map(|(k, &size)| std::iter::repeat_n(k, size))
            .collect();
        Ok(Instance {
            job_sizes,
            n_machines,
            ops,
            job_of,
        })
    }

    /// JSP instance from per-job lists of `(machine, duration)`.
    pub fn from_jobs(
        n_machines: usize,
        jobs: &[Vec<(MachineId, Time)>],
    ) -> Result<Self, InstanceError> {
        let sizes = jobs.iter().map(Vec::len).collect();
        let ops = jobs
            .iter()
            .flatten()
            .map(|&(m, p)| Operation::single(m, p))
            .collect();
        Instance::new(sizes, n_machines, ops)
    }

    pub fn n_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn n_jobs(&self) -> usize {
        self.job_sizes.len()
    }

    pub fn n_machines(&self) -> usize {
        self.n_machines
    }

    pub fn job_sizes(&self) -> &[usize] {
        &self.job_sizes
    }

    /// Operation ids of job `k` (0-based job index).
    pub fn job_ops(&self, k: usize) -> std::ops::RangeInclusive<OpId> {
        let first = self.job_sizes[..k].iter().sum::<usize>() + 1;
        first..=first + self.job_sizes[k] - 1
    }

    /// 0-based job index of an operation id.
    pub fn job_of(&self, op: OpId) -> usize {
        self.job_of[op - 1]
    }

    /// The operation that must finish before `op` starts, if any.
    pub fn job_predecessor(&self, op: OpId) -> Option<OpId> {
        (op > 1 && self.job_of(op - 1) == self.job_of(op)).then(|| op - 1)
    }

    pub fn op(&self, op: OpId) -> &Operation {
        &self.ops[op - 1]
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    /// True iff every operation has exactly one admissible machine.
    pub fn is_jsp(&self) -> bool {
        self.ops.iter().all(|o| o.machines.len() == 1)
    }

    pub fn to_json(&self) -> String {
        serialize_instance(self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n_ops: usize,
    jobs: Vec<Vec<OpId>>,
    n_machines: usize,
    ops: Vec<RawOperation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperation {
    id: OpId,
    machines: Vec<MachineId>,
    durations: BTreeMap<MachineId, i64>,
}

/// Parses the JSON instance format and re-validates every invariant.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    if raw.ops.len() != raw.n_ops {
        return Err(InstanceError::invalid(
            "ops",
            format!("{} operations listed but n_ops is {}", raw.ops.len(), raw.n_ops),
        ));
    }
    let mut expected = 1;
    let mut sizes = Vec::with_capacity(raw.jobs.len());
    for (k, job) in raw.jobs.iter().enumerate() {
        if job.is_empty() {
            return Err(InstanceError::invalid(format!("jobs[{k}]"), "job must not be empty"));
        }
        for (pos, &id) in job.iter().enumerate() {
            if id != expected {
                return Err(InstanceError::invalid(
                    format!("jobs[{k}][{pos}]"),
                    format!("jobs must be contiguous and in lexicographic order: expected operation {expected}, found {id}"),
                ));
            }
            expected += 1;
        }
        sizes.push(job.len());
    }
    if expected != raw.n_ops + 1 {
        return Err(InstanceError::invalid(
            "jobs",
            format!("jobs cover operations 1..{} but n_ops is {}", expected - 1, raw.n_ops),
        ));
    }

    let mut ops: Vec<Option<Operation>> = vec![None; raw.n_ops];
    for (i, op) in raw.ops.into_iter().enumerate() {
        if op.id == 0 || op.id > raw.n_ops {
            return Err(InstanceError::invalid(
                format!("ops[{i}].id"),
                format!("operation id {} is outside 1..={}", op.id, raw.n_ops),
            ));
        }
        if ops[op.id - 1].is_some() {
            return Err(InstanceError::invalid(
                format!("ops[{i}].id"),
                format!("operation {} listed twice", op.id),
            ));
        }
        if op.durations.len() != op.machines.len()
            || op.machines.iter().any(|m| !op.durations.contains_key(m))
        {
            return Err(InstanceError::invalid(
                format!("ops[{i}].durations"),
                format!(
                    "operation {}: durations must name exactly the admissible machines",
                    op.id
                ),
            ));
        }
        let mut durations = Vec::with_capacity(op.machines.len());
        for &m in &op.machines {
            let p = op.durations[&m];
            if p <= 0 {
                return Err(InstanceError::invalid(
                    format!("ops[{i}].durations.{m}"),
                    format!("operation {}: duration on machine {m} must be positive, got {p}", op.id),
                ));
            }
            durations.push(p as Time);
        }
        ops[op.id - 1] = Some(Operation::new(op.machines, durations));
    }
    // every slot is filled: ids are distinct, in range and there are n_ops of them
    let ops = ops.into_iter().map(Option::unwrap).collect();
    Instance::new(sizes, raw.n_machines, ops)
}

/// Canonical JSON form: ops sorted by id, durations keyed by machine.
pub fn serialize_instance(instance: &Instance) -> String {
    let raw = RawInstance {
        n_ops: instance.n_ops(),
        jobs: (0..instance.n_jobs())
            .map(|k| instance.job_ops(k).collect())
            .collect(),
        n_machines: instance.n_machines,
        ops: instance
            .ops
            .iter()
            .enumerate()
            .map(|(i, op)| RawOperation {
                id: i + 1,
                machines: op.machines.clone(),
                durations: op
                    .machines
                    .iter()
                    .zip(&op.durations)
                    .map(|(&m, &p)| (m, p as i64))
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("instance serialization cannot fail")
}

/// The size distribution used for job sizes, machine counts and machine-set
/// sizes: `floor(Normal(sqrt(n) + 1/2, (sqrt(n) - 1/2) / 3))`.
#[derive(Debug, Clone, Copy)]
pub struct SizeDistribution {
    normal: Normal<f64>,
}

impl SizeDistribution {
    pub fn for_population(n: usize) -> Self {
        let root = (n as f64).sqrt();
        let normal = Normal::new(root + 0.5, (root - 0.5) / 3.0)
            .expect("standard deviation is positive for n >= 1");
        SizeDistribution { normal }
    }

    pub fn mean(&self) -> f64 {
        self.normal.mean()
    }

    pub fn std_dev(&self) -> f64 {
        self.normal.std_dev()
    }

    /// The continuous variate before flooring and clamping.
    pub fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.normal.sample(rng)
    }

    /// Floored draw clamped to `[lo, hi]`.
    pub fn sample_clamped<R: Rng + ?Sized>(&self, rng: &mut R, lo: usize, hi: usize) -> usize {
        let v = self.sample_raw(rng).floor();
        if v < lo as f64 {
            lo
        } else if v > hi as f64 {
            hi
        } else {
            v as usize
        }
    }
}

/// The generator's PRNG: ChaCha8 seeded from a 64-bit integer.
pub fn generator_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Skeleton {
    job_sizes: Vec<usize>,
    n_machines: usize,
    durations: Vec<Time>,
}

fn draw_skeleton(n_ops: usize, rng: &mut ChaCha8Rng) -> Skeleton {
    let durations = (0..n_ops)
        .map(|_| rng.random_range(1..=n_ops as Time))
        .collect();
    let sizes = SizeDistribution::for_population(n_ops);
    let mut job_sizes = Vec::new();
    let mut remaining = n_ops;
    while remaining > 0 {
        let size = sizes.sample_clamped(rng, 1, n_ops).min(remaining);
        job_sizes.push(size);
        remaining -= size;
    }
    let n_machines = sizes.sample_clamped(rng, 1, n_ops);
    Skeleton {
        job_sizes,
        n_machines,
        durations,
    }
}

/// Random JSP instance; deterministic in `(n_ops, seed)`.
///
/// Panics if `n_ops == 0`.
pub fn generate_random_jsp(n_ops: usize, seed: u64) -> Instance {
    assert!(n_ops >= 1, "n_ops must be at least 1");
    let mut rng = generator_rng(seed);
    let sk = draw_skeleton(n_ops, &mut rng);
    let ops = sk
        .durations
        .iter()
        .map(|&p| Operation::single(rng.random_range(1..=sk.n_machines), p))
        .collect();
    Instance::new(sk.job_sizes, sk.n_machines, ops).expect("generator output is valid")
}

/// Random FJSP instance; every admissible machine of an operation gets the
/// same duration.
///
/// Panics if `n_ops == 0`.
pub fn generate_random_fjsp(n_ops: usize, seed: u64) -> Instance {
    assert!(n_ops >= 1, "n_ops must be at least 1");
    let mut rng = generator_rng(seed);
    let sk = draw_skeleton(n_ops, &mut rng);
    let set_sizes = SizeDistribution::for_population(sk.n_machines);
    let ops = sk
        .durations
        .iter()
        .map(|&p| {
            let k = set_sizes.sample_clamped(&mut rng, 1, sk.n_machines);
            let mut machines: Vec<MachineId> = index::sample(&mut rng, sk.n_machines, k)
                .into_iter()
                .map(|m| m + 1)
                .collect();
            machines.sort_unstable();
            let durations = vec![p; machines.len()];
            Operation::new(machines, durations)
        })
        .collect();
    Instance::new(sk.job_sizes, sk.n_machines, ops).expect("generator output is valid")
}

/// Durations for the scaling families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyDurations {
    Unit,
    /// Uniform in `1..=n_ops`, seeded.
    Random(u64),
}

/// `jobs` jobs of `size` operations each on `n_machines` machines. Operation
/// `k` of job `i` (both 0-based) runs on machine `(i + k) % n_machines + 1`.
pub fn uniform_family(jobs: usize, size: usize, n_machines: usize, durations: FamilyDurations) -> Instance {
    assert!(jobs >= 1 && size >= 1 && n_machines >= 1, "family parameters must be positive");
    let n_ops = jobs * size;
    let mut rng = match durations {
        FamilyDurations::Random(seed) => Some(generator_rng(seed)),
        FamilyDurations::Unit => None,
    };
    let jobs: Vec<Vec<(MachineId, Time)>> = (0..jobs)
        .map(|i| {
            (0..size)
                .map(|k| {
                    let p = rng.as_mut().map_or(1, |r| r.random_range(1..=n_ops as Time));
                    ((i + k) % n_machines + 1, p)
                })
                .collect()
        })
        .collect();
    Instance::from_jobs(n_machines, &jobs).expect("family parameters are positive")
}

/// `n` jobs of `n` operations on `n` machines.
pub fn even_family(n: usize, durations: FamilyDurations) -> Instance {
    uniform_family(n, n, n, durations)
}

/// A fixed number of jobs (and machines) whose size `n` grows.
pub fn growing_family(jobs: usize, n: usize, durations: FamilyDurations) -> Instance {
    uniform_family(jobs, n, jobs, durations)
}
