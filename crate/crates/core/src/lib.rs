//! Compact qubit encoding for job-shop and flexible job-shop scheduling.
//!
//! Every integer below the number of precedence-respecting schedules (times
//! the number of machine assignments) names exactly one schedule, so a
//! register of `ceil(log2 count)` qubits covers the whole search space with no
//! infeasible states. The crate also evaluates makespans, enumerates small
//! instances exhaustively and runs a filtering variational eigensolver on a
//! dense statevector simulator.

pub mod codec;
pub mod fvqe;
pub mod instance;
pub mod oracle;
pub mod qsim;
pub mod schedule;

pub use fvqe::{optimize, FvqeConfig, FvqeResult};
pub use codec::{decode, encode, qubit_count, CodeIndex, Codec, CodecError, DecodeMode};
pub use instance::{parse_instance, Instance, InstanceError, MachineId, OpId, Operation, Time};
pub use schedule::{evaluate_makespan, render_gantt, validate_schedule, Schedule, Timing};

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::instance::{Instance, Operation};
    use crate::schedule::Schedule;

    /// Two jobs on two machines: J1 = O1(M1,1) O2(M2,2) O3(M1,2), J2 = O4(M1,1) O5(M2,1).
    pub fn fig2() -> Instance {
        Instance::from_jobs(2, &[vec![(1, 1), (2, 2), (1, 2)], vec![(1, 1), (2, 1)]]).unwrap()
    }

    /// Starts (0,1,1,3,3), makespan 5.
    pub fn fig2_caption_schedule() -> Schedule {
        Schedule::new(vec![(1, 1), (2, 2), (4, 1), (3, 1), (5, 2)])
    }

    /// `fig2` with both machines admissible for every operation (original
    /// machine listed first, same duration on either).
    pub fn fig2_flexible() -> Instance {
        let base = fig2();
        let ops = base
            .ops()
            .iter()
            .map(|o| {
                let m = o.machines()[0];
                let p = o.durations()[0];
                Operation::new(vec![m, 3 - m], vec![p, p])
            })
            .collect();
        Instance::new(base.job_sizes().to_vec(), 2, ops).unwrap()
    }
}
