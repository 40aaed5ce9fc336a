//! Exhaustive ground truth over the strict code domain.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{Codec, CodeIndex, DecodeMode};
use crate::instance::{Instance, Time};
use crate::schedule::{evaluate_unchecked, makespan_unchecked, validate_schedule, Schedule};

/// Default limit on the number of schedules the oracle will enumerate.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {count} valid schedules, above the enumeration cap of {cap}")]
    CapExceeded { count: BigUint, cap: u64 },
}

/// One strict-domain index with its schedule and makespan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub index: CodeIndex,
    pub schedule: Schedule,
    pub makespan: Time,
}

fn checked_count(codec: &Codec, cap: u64) -> Result<u64, OracleError> {
    match codec.count().to_u64() {
        Some(c) if c <= cap => Ok(c),
        _ => Err(OracleError::CapExceeded {
            count: codec.count().clone(),
            cap,
        }),
    }
}

/// Every valid schedule, in index order.
pub fn enumerate_valid(instance: &Instance, cap: u64) -> Result<Vec<Entry>, OracleError> {
    let codec = Codec::new(instance);
    let count = checked_count(&codec, cap)?;
    Ok((0..count)
        .into_par_iter()
        .map(|x| {
            let value = BigUint::from(x);
            let schedule = codec.decode(&value, DecodeMode::Strict).expect("index in domain");
            let makespan = evaluate_unchecked(instance, &schedule).makespan();
            Entry {
                index: CodeIndex::new(value, codec.width()).expect("index below 2^width"),
                schedule,
                makespan,
            }
        })
        .collect())
}

/// Makespan of every strict-domain index; entry `x` belongs to index `x`.
pub fn makespan_table(codec: &Codec, cap: u64) -> Result<Vec<Time>, OracleError> {
    let count = checked_count(codec, cap)?;
    let inst = codec.instance();
    Ok((0..count)
        .into_par_iter()
        .map_init(
            || (vec![0; inst.n_ops()], vec![0; inst.n_machines() + 1]),
            |(finish, free), x| {
                let (order, machines) = codec.decode_parts(u128::from(x));
                makespan_unchecked(inst, &order, &machines, finish, free)
            },
        )
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundState {
    /// Optimal makespan `C_gs`.
    pub c_gs: Time,
    /// All strict-domain indices attaining `c_gs`, ascending.
    pub optimal: Vec<u64>,
    pub width: u32,
}

impl GroundState {
    pub fn from_table(table: &[Time], width: u32) -> Self {
        let c_gs = table.par_iter().copied().min().expect("non-empty code space");
        let optimal = table
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m == c_gs)
            .map(|(x, _)| x as u64)
            .collect();
        GroundState { c_gs, optimal, width }
    }

    pub fn optimal_indices(&self) -> Vec<CodeIndex> {
        self.optimal
            .iter()
            .map(|&x| CodeIndex::new(BigUint::from(x), self.width).expect("index below 2^width"))
            .collect()
    }
}

pub fn ground_state(instance: &Instance, cap: u64) -> Result<GroundState, OracleError> {
    let codec = Codec::new(instance);
    let table = makespan_table(&codec, cap)?;
    Ok(GroundState::from_table(&table, codec.width()))
}

#[derive(Debug, Error, PartialEq)]
#[error("makespan {c_opt} is below the optimum {c_gs}")]
pub struct RatioError {
    pub c_gs: Time,
    pub c_opt: Time,
}

/// `alpha = C_gs / C_opt`.
pub fn approximation_ratio(c_gs: Time, c_opt: Time) -> Result<f64, RatioError> {
    if c_gs == 0 || c_opt < c_gs {
        return Err(RatioError { c_gs, c_opt });
    }
    Ok(c_gs as f64 / c_opt as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    pub count: u64,
    pub distinct: u64,
    pub round_trip_mismatches: u64,
    pub invalid: u64,
}

impl BijectionReport {
    pub fn is_clean(&self) -> bool {
        self.distinct == self.count && self.round_trip_mismatches == 0 && self.invalid == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Decodes every strict index, then checks validity, distinctness and
/// `encode(decode(x)) == x`.
pub fn bijection_report(instance: &Instance, cap: u64) -> Result<BijectionReport, OracleError> {
    let codec = Codec::new(instance);
    let count = checked_count(&codec, cap)?;
    let checked: Vec<(Schedule, bool, bool)> = (0..count)
        .into_par_iter()
        .map(|x| {
            let value = BigUint::from(x);
            let s = codec.decode(&value, DecodeMode::Strict).expect("index in domain");
            let valid = validate_schedule(instance, &s).is_empty();
            let back = codec.encode(&s).is_ok_and(|idx| *idx.value() == value);
            (s, valid, back)
        })
        .collect();
    let mut seen = HashSet::with_capacity(checked.len());
    let mut report = BijectionReport {
        count,
        distinct: 0,
        round_trip_mismatches: 0,
        invalid: 0,
    };
    for (s, valid, back) in checked {
        report.distinct += u64::from(seen.insert(s));
        report.invalid += u64::from(!valid);
        report.round_trip_mismatches += u64::from(!back);
    }
    Ok(report)
}
