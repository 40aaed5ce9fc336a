//! Sequencing-list schedules and their makespan.
//!
//! A schedule lists every operation once together with the machine that runs
//! it. Scanning the list left to right, each operation starts as early as its
//! job predecessor and its machine allow, which yields a semi-active schedule
//! without any explicit machine-overlap constraint.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, MachineId, OpId, Time};

/// One reason a sequencing list is not a valid schedule for an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongLength { expected: usize, found: usize },
    UnknownOperation { position: usize, op: OpId },
    DuplicateOperation { op: OpId },
    MissingOperation { op: OpId },
    InadmissibleMachine { op: OpId, machine: MachineId },
    /// `later` appears before its job predecessor `earlier`. `job` is 1-based.
    Precedence { job: usize, earlier: OpId, later: OpId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongLength { expected, found } => {
                write!(f, "schedule has {found} entries, expected {expected}")
            }
            Violation::UnknownOperation { position, op } => {
                write!(f, "position {position}: unknown operation {op}")
            }
            Violation::DuplicateOperation { op } => write!(f, "operation {op} scheduled twice"),
            Violation::MissingOperation { op } => write!(f, "operation {op} is not scheduled"),
            Violation::InadmissibleMachine { op, machine } => {
                write!(f, "operation {op} cannot run on machine {machine}")
            }
            Violation::Precedence { job, earlier, later } => write!(
                f,
                "job {job}: operation {later} is scheduled before its predecessor {earlier}"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid schedule: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// An ordered list of `(operation, machine)` pairs. Position `s` (0-based
/// here) holds the operation `π(s + 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    entries: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub op: OpId,
    pub machine: MachineId,
}

impl Schedule {
    pub fn new(entries: Vec<(OpId, MachineId)>) -> Self {
        Schedule {
            entries: entries
                .into_iter()
                .map(|(op, machine)| Entry { op, machine })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The permutation tuple `(π(1), …, π(N))`.
    pub fn order(&self) -> Vec<OpId> {
        self.entries.iter().map(|e| e.op).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "(O{},M{})", e.op, e.machine)?;
        }
        Ok(())
    }
}

/// Start/finish times of every operation, indexed by operation id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timing {
    start: Vec<Time>,
    finish: Vec<Time>,
    machine: Vec<MachineId>,
    makespan: Time,
}

impl Timing {
    pub fn start(&self, op: OpId) -> Time {
        self.start[op - 1]
    }

    pub fn finish(&self, op: OpId) -> Time {
        self.finish[op - 1]
    }

    pub fn machine_of(&self, op: OpId) -> MachineId {
        self.machine[op - 1]
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn n_ops(&self) -> usize {
        self.start.len()
    }

    /// Start times listed in schedule order.
    pub fn starts_by_position(&self, schedule: &Schedule) -> Vec<Time> {
        schedule.entries.iter().map(|e| self.start(e.op)).collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Op {
            id: OpId,
            machine: MachineId,
            start: Time,
            finish: Time,
        }
        #[derive(Serialize)]
        struct Out {
            makespan: Time,
            ops: Vec<Op>,
        }
        let out = Out {
            makespan: self.makespan,
            ops: (1..=self.n_ops())
                .map(|id| Op {
                    id,
                    machine: self.machine_of(id),
                    start: self.start(id),
                    finish: self.finish(id),
                })
                .collect(),
        };
        serde_json::to_string(&out).expect("timing serialization cannot fail")
    }
}

/// Lists every way `schedule` fails to be a valid sequencing list for
/// `instance`. Machine overlap is not checked: the start-time recursion rules
/// it out by construction.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Vec<Violation> {
    let n = instance.n_ops();
    let mut violations = Vec::new();
    if schedule.len() != n {
        violations.push(Violation::WrongLength {
            expected: n,
            found: schedule.len(),
        });
    }
    let mut position: Vec<Option<usize>> = vec![None; n];
    for (s, e) in schedule.entries.iter().enumerate() {
        if e.op == 0 || e.op > n {
            violations.push(Violation::UnknownOperation { position: s + 1, op: e.op });
            continue;
        }
        if position[e.op - 1].is_some() {
            violations.push(Violation::DuplicateOperation { op: e.op });
            continue;
        }
        position[e.op - 1] = Some(s);
        if !instance.op(e.op).machines().contains(&e.machine) {
            violations.push(Violation::InadmissibleMachine {
                op: e.op,
                machine: e.machine,
            });
        }
    }
    for op in 1..=n {
        if position[op - 1].is_none() {
            violations.push(Violation::MissingOperation { op });
        }
    }
    for later in 2..=n {
        if let Some(earlier) = instance.job_predecessor(later) {
            if let (Some(a), Some(b)) = (position[earlier - 1], position[later - 1]) {
                if b < a {
                    violations.push(Violation::Precedence {
                        job: instance.job_of(later) + 1,
                        earlier,
                        later,
                    });
                }
            }
        }
    }
    violations
}

/// Start times by the left-to-right recursion
/// `t = max(finish of job predecessor, finish of last op on the machine)`,
/// and the makespan as the largest finish time. O(N_op) after validation.
pub fn evaluate_makespan(instance: &Instance, schedule: &Schedule) -> Result<Timing, ScheduleError> {
    let violations = validate_schedule(instance, schedule);
    if !violations.is_empty() {
        return Err(ScheduleError::Invalid(violations));
    }
    Ok(evaluate_unchecked(instance, schedule))
}

/// Same recursion without validation; the caller guarantees validity.
pub(crate) fn evaluate_unchecked(instance: &Instance, schedule: &Schedule) -> Timing {
    let n = instance.n_ops();
    let mut start = vec![0; n];
    let mut finish = vec![0; n];
    let mut machine = vec![0; n];
    let mut machine_free = vec![0 as Time; instance.n_machines() + 1];
    let mut makespan = 0;
    for e in &schedule.entries {
        let job_ready = instance
            .job_predecessor(e.op)
            .map_or(0, |prev| finish[prev - 1]);
        let t = job_ready.max(machine_free[e.machine]);
        let p = instance
            .op(e.op)
            .duration_on(e.machine)
            .expect("machine admissibility checked by caller");
        start[e.op - 1] = t;
        finish[e.op - 1] = t + p;
        machine[e.op - 1] = e.machine;
        machine_free[e.machine] = t + p;
        makespan = makespan.max(t + p);
    }
    Timing {
        start,
        finish,
        machine,
        makespan,
    }
}

/// Makespan only, skipping validation and the `Timing` allocation.
pub(crate) fn makespan_unchecked(
    instance: &Instance,
    order: &[OpId],
    machines: &[MachineId],
    finish: &mut [Time],
    machine_free: &mut [Time],
) -> Time {
    machine_free.iter_mut().for_each(|t| *t = 0);
    let mut makespan = 0;
    for &op in order {
        let m = machines[op - 1];
        let job_ready = instance.job_predecessor(op).map_or(0, |prev| finish[prev - 1]);
        let t = job_ready.max(machine_free[m]);
        let done = t + instance.op(op).duration_on(m).unwrap_or(0);
        finish[op - 1] = done;
        machine_free[m] = done;
        makespan = makespan.max(done);
    }
    makespan
}

/// Plain-text Gantt chart: one row per machine, one fixed-width cell per time
/// unit in `[0, makespan)`, operation labels filling `[start, finish)`.
pub fn render_gantt(instance: &Instance, timing: &Timing) -> String {
    let horizon = timing.makespan() as usize;
    let label_width = format!("O{}", instance.n_ops()).len();
    let cell = label_width.max(horizon.saturating_sub(1).to_string().len());
    let row_label = format!("M{}", instance.n_machines()).len();

    let mut out = String::new();
    let _ = write!(out, "{:row_label$} ", "");
    for t in 0..horizon {
        let _ = write!(out, "|{t:>cell$}");
    }
    out.push_str("|\n");
    for m in 1..=instance.n_machines() {
        let mut cells = vec![String::new(); horizon];
        for op in 1..=timing.n_ops() {
            if timing.machine_of(op) == m {
                for c in &mut cells[timing.start(op) as usize..timing.finish(op) as usize] {
                    *c = format!("O{op}");
                }
            }
        }
        let _ = write!(out, "{:<row_label$} ", format!("M{m}"));
        for c in cells {
            let _ = write!(out, "|{c:<cell$}");
        }
        out.push_str("|\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fig2, fig2_caption_schedule};
    use crate::instance::{generate_random_fjsp, generate_random_jsp};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Replay: for each listed operation, step a clock from zero one time
    /// unit at a time until both its machine and its job are idle.
    /// Independent of the max() recursion.
    fn replay(instance: &Instance, schedule: &Schedule) -> Vec<Time> {
        let mut busy_until = vec![0 as Time; instance.n_machines() + 1];
        let mut job_busy_until = vec![0 as Time; instance.n_jobs()];
        schedule
            .entries()
            .iter()
            .map(|e| {
                let job = instance.job_of(e.op);
                let mut clock = 0;
                while busy_until[e.machine] > clock || job_busy_until[job] > clock {
                    clock += 1;
                }
                let p = instance.op(e.op).duration_on(e.machine).unwrap();
                busy_until[e.machine] = clock + p;
                job_busy_until[job] = clock + p;
                clock
            })
            .collect()
    }

    pub(crate) fn random_valid_schedule(instance: &Instance, rng: &mut ChaCha8Rng) -> Schedule {
        // shuffle job labels, then number each job's occurrences in order
        let mut labels: Vec<usize> = (0..instance.n_jobs())
            .flat_map(|k| std::iter::repeat_n(k, instance.job_sizes()[k]))
            .collect();
        labels.shuffle(rng);
        let mut next: Vec<OpId> = (0..instance.n_jobs())
            .map(|k| *instance.job_ops(k).start())
            .collect();
        let entries = labels
            .into_iter()
            .map(|k| {
                let op = next[k];
                next[k] += 1;
                let mu = instance.op(op).machines();
                (op, mu[rng.random_range(0..mu.len())])
            })
            .collect();
        Schedule::new(entries)
    }

    #[test]
    fn caption_schedule_timing() {
        let inst = fig2();
        let s = fig2_caption_schedule();
        let t = evaluate_makespan(&inst, &s).unwrap();
        assert_eq!(t.starts_by_position(&s), vec![0, 1, 1, 3, 3]);
        assert_eq!(t.makespan(), 5);
    }

    #[test]
    fn single_operation() {
        let inst = Instance::from_jobs(1, &[vec![(1, 3)]]).unwrap();
        let t = evaluate_makespan(&inst, &Schedule::new(vec![(1, 1)])).unwrap();
        assert_eq!(t.start(1), 0);
        assert_eq!(t.makespan(), 3);
    }

    #[test]
    fn fig2_jobs_swapped() {
        let inst = fig2();
        let s = Schedule::new(vec![(4, 1), (5, 2), (1, 1), (2, 2), (3, 1)]);
        let t = evaluate_makespan(&inst, &s).unwrap();
        assert_eq!(t.makespan(), 6);
        assert_eq!(t.starts_by_position(&s), replay(&inst, &s));
    }

    #[test]
    fn identity_order_on_fig2() {
        // O4 queues behind O3 on M1 because O3 is listed first
        let inst = fig2();
        let s = Schedule::new(vec![(1, 1), (2, 2), (3, 1), (4, 1), (5, 2)]);
        let t = evaluate_makespan(&inst, &s).unwrap();
        assert_eq!(t.starts_by_position(&s), vec![0, 1, 3, 5, 6]);
        assert_eq!(t.makespan(), 7);
        assert_eq!(t.starts_by_position(&s), replay(&inst, &s));
    }

    #[test]
    fn validation_accepts_caption_schedule() {
        assert!(validate_schedule(&fig2(), &fig2_caption_schedule()).is_empty());
    }

    #[test]
    fn validation_reports_precedence() {
        let s = Schedule::new(vec![(2, 2), (1, 1), (4, 1), (3, 1), (5, 2)]);
        let v = validate_schedule(&fig2(), &s);
        assert_eq!(
            v,
            vec![Violation::Precedence {
                job: 1,
                earlier: 1,
                later: 2
            }]
        );
    }

    #[test]
    fn validation_reports_machine() {
        let s = Schedule::new(vec![(1, 2), (2, 2), (4, 1), (3, 1), (5, 2)]);
        let v = validate_schedule(&fig2(), &s);
        assert_eq!(v, vec![Violation::InadmissibleMachine { op: 1, machine: 2 }]);
        assert!(evaluate_makespan(&fig2(), &s).is_err());
    }

    #[test]
    fn validation_reports_duplicates_and_missing() {
        let s = Schedule::new(vec![(1, 1), (1, 1), (4, 1), (3, 1), (5, 2)]);
        let v = validate_schedule(&fig2(), &s);
        assert!(v.contains(&Violation::DuplicateOperation { op: 1 }));
        assert!(v.contains(&Violation::MissingOperation { op: 2 }));
    }

    #[test]
    fn gantt_fig2() {
        let inst = fig2();
        let t = evaluate_makespan(&inst, &fig2_caption_schedule()).unwrap();
        let expected = concat!(
            "   | 0| 1| 2| 3| 4|\n",
            "M1 |O1|O4|  |O3|O3|\n",
            "M2 |  |O2|O2|O5|  |\n",
        );
        assert_eq!(render_gantt(&inst, &t), expected);
    }

    #[test]
    fn gantt_single_cell() {
        let inst = Instance::from_jobs(1, &[vec![(1, 1)]]).unwrap();
        let t = evaluate_makespan(&inst, &Schedule::new(vec![(1, 1)])).unwrap();
        assert_eq!(render_gantt(&inst, &t), "   | 0|\nM1 |O1|\n");
    }

    #[test]
    fn timing_json() {
        let inst = fig2();
        let t = evaluate_makespan(&inst, &fig2_caption_schedule()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["makespan"], 5);
        assert_eq!(v["ops"][2]["start"], 3);
        assert_eq!(v["ops"][2]["finish"], 5);
        assert_eq!(v["ops"][4]["machine"], 2);
    }

    #[test]
    fn timing_invariants_on_random_schedules() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..300 {
            let n = 1 + (seed as usize % 8);
            let inst = if seed % 2 == 0 {
                generate_random_jsp(n, seed)
            } else {
                generate_random_fjsp(n, seed)
            };
            for _ in 0..5 {
                let s = random_valid_schedule(&inst, &mut rng);
                let t = evaluate_makespan(&inst, &s).unwrap();
                assert_eq!(t, evaluate_makespan(&inst, &s).unwrap());
                assert_eq!(t.starts_by_position(&s), replay(&inst, &s));
                let max_finish = (1..=n).map(|op| t.finish(op)).max().unwrap();
                assert_eq!(t.makespan(), max_finish);
                for a in 1..=n {
                    for b in a + 1..=n {
                        if t.machine_of(a) == t.machine_of(b) {
                            assert!(t.finish(a) <= t.start(b) || t.finish(b) <= t.start(a));
                        }
                    }
                    if let Some(p) = inst.job_predecessor(a) {
                        assert!(t.finish(p) <= t.start(a));
                    }
                }
                let chain = (0..inst.n_jobs())
                    .map(|k| inst.job_ops(k).map(|op| inst.op(op).min_duration()).sum::<Time>())
                    .max()
                    .unwrap();
                assert!(t.makespan() >= chain.max(1));
            }
        }
    }
}
