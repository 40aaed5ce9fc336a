//! Register sizes: the compact encoding versus the pruned time-indexed one.

use num_bigint::BigUint;
use num_traits::One;

use super::{count_valid_schedules, CodecError};
use crate::instance::{Instance, OpId, Time};

/// `ceil(log2(count))`, at least one qubit.
pub fn qubit_count(instance: &Instance) -> u32 {
    width_for(&count_valid_schedules(instance))
}

pub(crate) fn width_for(count: &BigUint) -> u32 {
    if *count <= BigUint::one() {
        1
    } else {
        (count - 1u32).bits() as u32
    }
}

/// Earliest/latest slack of one operation inside its job: `head` is the
/// summed duration of its job predecessors, `tail` of its successors.
/// Durations are minimum durations over the admissible machines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpWindow {
    pub op: OpId,
    pub head: Time,
    pub tail: Time,
    pub duration: Time,
}

pub fn op_windows(instance: &Instance) -> Vec<OpWindow> {
    let mut out = Vec::with_capacity(instance.n_ops());
    for k in 0..instance.n_jobs() {
        let ops = instance.job_ops(k);
        let p: Vec<Time> = ops.clone().map(|op| instance.op(op).min_duration()).collect();
        let total: Time = p.iter().sum();
        let mut head = 0;
        for (op, &duration) in ops.zip(&p) {
            out.push(OpWindow {
                op,
                head,
                tail: total - head - duration,
                duration,
            });
            head += duration;
        }
    }
    out
}

/// Longest job (minimum durations): no schedule finishes earlier.
pub fn t_min(instance: &Instance) -> Time {
    (0..instance.n_jobs())
        .map(|k| {
            instance
                .job_ops(k)
                .map(|op| instance.op(op).min_duration())
                .sum::<Time>()
        })
        .max()
        .unwrap_or(0)
}

/// Sum of all (minimum) durations: some schedule always finishes by then.
pub fn t_max(instance: &Instance) -> Time {
    instance.ops().iter().map(|o| o.min_duration()).sum()
}

/// Binary variables of the time-indexed formulation after head/tail pruning,
/// `sum_j (T - r_j - q_j - p_j + 1) |mu_j|`. For single-machine operations this
/// equals `N_op T - sum_i sum_l (p_l |J_i| - 1)`.
pub fn qubit_count_time_indexed(instance: &Instance, horizon: Time) -> Result<u64, CodecError> {
    let lower = t_min(instance);
    if horizon < lower {
        return Err(CodecError::HorizonTooShort { horizon, t_min: lower });
    }
    Ok(op_windows(instance)
        .iter()
        .map(|w| {
            let starts = horizon - w.head - w.tail - w.duration + 1;
            starts * instance.op(w.op).machines().len() as u64
        })
        .sum())
}
