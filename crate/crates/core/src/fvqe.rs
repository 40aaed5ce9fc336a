//! Filtering variational eigensolver with the makespan as a black-box cost.
//!
//! Each iteration trains the ansatz to emulate one application of the filter
//! `f(H; tau) = H^-tau` to the previous state: it scans `tau` until the
//! gradient norm reaches a control value, takes one gradient step with the
//! parameter-shift gradient, and reads out the new state.
//!
//! Energies only enter through their values, so every measured distribution is
//! folded into a histogram over the distinct makespans of the instance. The
//! `tau` scan reweights those histograms without running new circuits.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{parse_binary, qubit_count, Codec, CodecError, DecodeMode};
use crate::instance::{Instance, Time};
use crate::oracle::{approximation_ratio, makespan_table, GroundState, DEFAULT_CAP};
use crate::qsim::{run_ansatz, sample_distribution, AnsatzParams, QsimError, StateVector, MAX_QUBITS};
use crate::schedule::Schedule;

/// Upper bound on the learning rate.
pub const ETA_MAX: f64 = 100.0;

#[derive(Debug, Error)]
pub enum FvqeError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("instance needs {n} qubits, above the simulator limit of {MAX_QUBITS}")]
    TooManyQubits { n: u32 },
    #[error("bitstring has {found} bits, the register has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expectation over an empty set of outcomes")]
    EmptyWeights,
    #[error("<F> = {0} is not positive")]
    NonPositiveExpectation(f64),
    #[error("<F^2> = {0} is not positive")]
    VanishingNorm(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Energy assigned to register values at or above the schedule count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum CostMode {
    /// Reduce modulo the schedule count, i.e. [`DecodeMode::Total`].
    #[default]
    Modulo,
    /// Flat penalty energy (must be at least 1).
    Penalty(Time),
}

/// Shots per circuit for job-shop instances.
pub fn default_shots_jsp(n_ops: usize) -> u64 {
    match n_ops {
        0..6 => 100,
        6..9 => 500,
        _ => 1000,
    }
}

/// Shots per circuit for flexible instances.
pub fn default_shots_fjsp(n_ops: usize) -> u64 {
    match n_ops {
        0..5 => 100,
        5..7 => 500,
        _ => 1000,
    }
}

pub fn default_shots(instance: &Instance) -> u64 {
    if instance.is_jsp() {
        default_shots_jsp(instance.n_ops())
    } else {
        default_shots_fjsp(instance.n_ops())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvqeConfig {
    pub max_iterations: usize,
    /// Measurements per circuit; `Some(0)` evaluates exact expectations,
    /// `None` picks [`default_shots`].
    pub shots: Option<u64>,
    /// Gradient-norm control value.
    pub g_c: f64,
    pub tau_step: f64,
    pub tau_max: f64,
    /// Relative change of the gradient norm below which the scan stops.
    pub tau_tolerance: f64,
    pub layers: usize,
    pub seed: u64,
    pub cost: CostMode,
    /// Largest schedule count for which `C_gs` is computed.
    pub oracle_cap: u64,
}

impl Default for FvqeConfig {
    fn default() -> Self {
        FvqeConfig {
            max_iterations: 30,
            shots: None,
            g_c: 0.1,
            tau_step: 0.1,
            tau_max: 20.0,
            tau_tolerance: 1e-3,
            layers: 1,
            seed: 0,
            cost: CostMode::Modulo,
            oracle_cap: DEFAULT_CAP,
        }
    }
}

impl FvqeConfig {
    fn validate(&self) -> Result<(), FvqeError> {
        let bad = |msg: &str| Err(FvqeError::Config(msg.to_owned()));
        if !(self.g_c > 0.0) {
            return bad("g_c must be positive");
        }
        if !(self.tau_step > 0.0) {
            return bad("tau step must be positive");
        }
        if !(self.tau_max >= self.tau_step) {
            return bad("tau_max must be at least the tau step");
        }
        if self.layers == 0 {
            return bad("the ansatz needs at least one layer");
        }
        if self.cost == CostMode::Penalty(0) {
            return bad("penalty energy must be at least 1");
        }
        Ok(())
    }
}

/// `E^-tau`.
pub fn filter_value(energy: f64, tau: f64) -> f64 {
    energy.powf(-tau)
}

/// `(<F>, <F^2>)` over `(energy, weight)` pairs; weights are counts or
/// probabilities and need not be normalized.
pub fn expectations(weights: &[(f64, f64)], tau: f64) -> Result<(f64, f64), FvqeError> {
    let total: f64 = weights.iter().map(|&(_, w)| w).sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(FvqeError::EmptyWeights);
    }
    let (f, f2) = weights.iter().fold((0.0, 0.0), |(f, f2), &(e, w)| {
        let v = filter_value(e, tau);
        (f + w * v, f2 + w * v * v)
    });
    Ok((f / total, f2 / total))
}

/// `4 sqrt(<F^2>) / <F>`, capped at [`ETA_MAX`]: the inverse of the cost's
/// second derivative along any single parameter at the previous point.
pub fn learning_rate(f: f64, f2: f64) -> Result<f64, FvqeError> {
    if !(f > 0.0) {
        return Err(FvqeError::NonPositiveExpectation(f));
    }
    Ok((4.0 * f2.sqrt() / f).min(ETA_MAX))
}

/// Result of a `tau` scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauChoice {
    pub tau: f64,
    pub grad_norm: f64,
    /// Every `(tau, g(tau))` visited, starting at `(0, g(0))`.
    pub scanned: Vec<(f64, f64)>,
}

/// Scans `tau = 0, step, 2 step, ...` until `g(tau) > g_c`, until `g` stops
/// changing (relative change below `tolerance`), or until `tau_max`. Returns
/// the scanned point whose `g` is closest to `g_c`, the smallest such `tau`
/// on ties.
pub fn adapt_tau(
    mut grad_norm: impl FnMut(f64) -> f64,
    g_c: f64,
    step: f64,
    tau_max: f64,
    tolerance: f64,
) -> TauChoice {
    let mut scanned = vec![(0.0, grad_norm(0.0))];
    let mut k = 1u32;
    loop {
        let tau = f64::from(k) * step;
        if tau > tau_max + 1e-9 * step {
            break;
        }
        let g = grad_norm(tau);
        let prev = scanned.last().unwrap().1;
        scanned.push((tau, g));
        if g > g_c {
            break;
        }
        let converged = if prev == 0.0 {
            g == 0.0
        } else {
            ((g - prev) / prev).abs() < tolerance
        };
        if converged {
            break;
        }
        k += 1;
    }
    let &(tau, g) = scanned
        .iter()
        .min_by(|a, b| (a.1 - g_c).abs().total_cmp(&(b.1 - g_c).abs()))
        .unwrap();
    TauChoice {
        tau,
        grad_norm: g,
        scanned,
    }
}

/// Energies of every register value together with their distinct levels.
#[derive(Debug, Clone)]
pub struct Landscape {
    n_qubits: u32,
    count: u64,
    energies: Vec<Time>,
    strict: Vec<Time>,
    levels: Vec<Time>,
    level_of: Vec<u32>,
}

impl Landscape {
    pub fn new(instance: &Instance, cost: CostMode) -> Result<Self, FvqeError> {
        let n = qubit_count(instance);
        if n > MAX_QUBITS {
            return Err(FvqeError::TooManyQubits { n });
        }
        let codec = Codec::new(instance);
        let strict = makespan_table(&codec, u64::MAX).expect("count below 2^n fits the table");
        let count = strict.len() as u64;
        let energies: Vec<Time> = (0..1u64 << n)
            .map(|x| match cost {
                _ if x < count => strict[x as usize],
                CostMode::Modulo => strict[(x % count) as usize],
                CostMode::Penalty(e) => e,
            })
            .collect();
        let mut levels = energies.clone();
        levels.sort_unstable();
        levels.dedup();
        let level_of = energies
            .iter()
            .map(|e| levels.binary_search(e).unwrap() as u32)
            .collect();
        Ok(Landscape {
            n_qubits: n,
            count,
            energies,
            strict,
            levels,
            level_of,
        })
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    /// Energy of every register value, indexed by its integer.
    pub fn energies(&self) -> &[Time] {
        &self.energies
    }

    /// Distinct energies, ascending.
    pub fn levels(&self) -> &[Time] {
        &self.levels
    }

    pub fn is_flat(&self) -> bool {
        self.levels.len() == 1
    }

    /// Folds per-value weights into per-level weights.
    pub fn histogram(&self, weights: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.levels.len()];
        for (&w, &l) in weights.iter().zip(&self.level_of) {
            h[l as usize] += w;
        }
        h
    }

    fn expectations(&self, hist: &[f64], tau: f64) -> (f64, f64) {
        let pairs: Vec<(f64, f64)> = self
            .levels
            .iter()
            .zip(hist)
            .map(|(&e, &w)| (e as f64, w))
            .collect();
        expectations(&pairs, tau).expect("histograms carry positive mass")
    }

    fn ground_state(&self) -> GroundState {
        GroundState::from_table(&self.strict, self.n_qubits)
    }
}

/// Makespan of the schedule a measured bitstring decodes to, modulo the
/// schedule count.
pub fn energy(bitstring: &str, instance: &Instance) -> Result<Time, FvqeError> {
    let codec = Codec::new(instance);
    let width = codec.width() as usize;
    if bitstring.len() != width {
        return Err(FvqeError::LengthMismatch {
            expected: width,
            found: bitstring.len(),
        });
    }
    let schedule = codec.decode(&parse_binary(bitstring)?, DecodeMode::Total)?;
    Ok(crate::schedule::evaluate_unchecked(instance, &schedule).makespan())
}

/// Exact-mode objective of one iteration: `1 - Re<prev|F|psi(theta)> / sqrt(<F^2>_prev)`.
pub fn cost(landscape: &Landscape, params: &AnsatzParams, prev: &StateVector, tau: f64) -> Result<f64, FvqeError> {
    let psi = run_ansatz(params)?;
    let (mut overlap, mut f2) = (0.0, 0.0);
    for ((a, b), &e) in prev.amplitudes().iter().zip(psi.amplitudes()).zip(&landscape.energies) {
        let f = filter_value(e as f64, tau);
        overlap += (a.conj() * b).re * f;
        f2 += a.norm_sqr() * f * f;
    }
    if !(f2 > 0.0) {
        return Err(FvqeError::VanishingNorm(f2));
    }
    Ok(1.0 - overlap / f2.sqrt())
}

/// Parameter-shift gradient of [`cost`] at `prev = psi(params)` with exact
/// expectations.
pub fn gradient(landscape: &Landscape, params: &AnsatzParams, tau: f64) -> Result<Vec<f64>, FvqeError> {
    let base = landscape.histogram(&run_ansatz(params)?.exact_distribution());
    let shifted = shifted_histograms(landscape, params, None)?;
    Ok(gradient_from(landscape, &base, &shifted, tau))
}

// [theta_1 + pi/2, theta_1 - pi/2, theta_2 + pi/2, ...]
fn shifted_histograms(
    landscape: &Landscape,
    params: &AnsatzParams,
    sampling: Option<(u64, u64, u64)>,
) -> Result<Vec<Vec<f64>>, FvqeError> {
    let m = params.theta.len();
    (0..2 * m)
        .into_par_iter()
        .map(|c| {
            let mut theta = params.theta.clone();
            theta[c / 2] += if c % 2 == 0 { FRAC_PI_2 } else { -FRAC_PI_2 };
            let state = run_ansatz(&params.with_theta(theta))?;
            let weights = match sampling {
                None => state.exact_distribution(),
                Some((shots, seed, stream)) => sampled_weights(&state, shots, seed, stream + 1 + c as u64),
            };
            Ok(landscape.histogram(&weights))
        })
        .collect()
}

fn gradient_from(landscape: &Landscape, base: &[f64], shifted: &[Vec<f64>], tau: f64) -> Vec<f64> {
    let (_, f2) = landscape.expectations(base, tau);
    let norm = 4.0 * f2.sqrt();
    shifted
        .chunks_exact(2)
        .map(|pm| {
            let (plus, _) = landscape.expectations(&pm[0], tau);
            let (minus, _) = landscape.expectations(&pm[1], tau);
            -(plus - minus) / norm
        })
        .collect()
}

fn sampled_weights(state: &StateVector, shots: u64, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    sample_distribution(&state.exact_distribution(), shots, &mut rng)
        .into_iter()
        .map(|c| c as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub tau: f64,
    pub eta: f64,
    pub grad_norm: f64,
    /// Readout of the state after this iteration: makespan -> counts (or
    /// probability in exact mode).
    pub histogram: BTreeMap<Time, f64>,
    pub mean_energy: f64,
    /// Energy of this iteration's readout.
    pub readout_energy: Time,
    pub best_energy: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvqeResult {
    pub n_qubits: u32,
    pub n_params: usize,
    /// Shots per circuit, 0 for exact expectations.
    pub shots: u64,
    pub circuits: u64,
    pub records: Vec<IterationRecord>,
    pub theta: Vec<f64>,
    pub best_index: u64,
    pub best_bitstring: String,
    pub best_schedule: Schedule,
    pub c_opt: Time,
    pub c_gs: Option<Time>,
    pub alpha: Option<f64>,
    pub ground_state_probability: Option<f64>,
    /// All energies equal: nothing to optimize.
    pub flat: bool,
}

impl FvqeResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// `iteration,tau,eta,mean_energy,best_energy,grad_norm`, one row per record.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,tau,eta,mean_energy,best_energy,grad_norm\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iteration, r.tau, r.eta, r.mean_energy, r.best_energy, r.grad_norm
            )
            .unwrap();
        }
        out
    }
}

struct Readout {
    hist: Vec<f64>,
    index: u64,
}

fn readout(landscape: &Landscape, state: &StateVector, sampling: Option<(u64, u64, u64)>) -> Readout {
    let weights = match sampling {
        None => state.exact_distribution(),
        Some((shots, seed, stream)) => sampled_weights(state, shots, seed, stream),
    };
    let index = match sampling {
        // most probable value, lowest index on ties
        None => {
            let top = weights.iter().copied().fold(0.0, f64::max);
            weights.iter().position(|&p| p >= top * (1.0 - 1e-9)).unwrap()
        }
        // lowest energy among the sampled values
        Some(_) => (0..weights.len())
            .filter(|&x| weights[x] > 0.0)
            .min_by_key(|&x| (landscape.energies[x], x))
            .unwrap(),
    };
    Readout {
        hist: landscape.histogram(&weights),
        index: index as u64,
    }
}

fn record(landscape: &Landscape, iteration: usize, tau: f64, eta: f64, grad_norm: f64, r: &Readout, best: Time) -> IterationRecord {
    let total: f64 = r.hist.iter().sum();
    let mean_energy = landscape
        .levels
        .iter()
        .zip(&r.hist)
        .map(|(&e, &w)| e as f64 * w)
        .sum::<f64>()
        / total;
    IterationRecord {
        iteration,
        tau,
        eta,
        grad_norm,
        histogram: landscape
            .levels
            .iter()
            .zip(&r.hist)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&e, &w)| (e, w))
            .collect(),
        mean_energy,
        readout_energy: landscape.energies[r.index as usize],
        best_energy: best,
    }
}

pub fn optimize(instance: &Instance, config: &FvqeConfig) -> Result<FvqeResult, FvqeError> {
    config.validate()?;
    let landscape = Landscape::new(instance, config.cost)?;
    let n = landscape.n_qubits();
    let shots = config.shots.unwrap_or_else(|| default_shots(instance));
    let m = AnsatzParams::param_count(n, config.layers);
    let per_iteration = 2 * m as u64 + 1;
    let sampling = |iteration: usize| (shots > 0).then(|| (shots, config.seed, iteration as u64 * per_iteration));

    let mut params = AnsatzParams::uniform_superposition(n, config.layers);
    let mut state = run_ansatz(&params)?;
    let mut current = readout(&landscape, &state, sampling(0));
    let mut best_index = current.index;
    let mut best = landscape.energies[best_index as usize];
    let mut records = vec![record(&landscape, 0, 0.0, 0.0, 0.0, &current, best)];
    let mut circuits = 1;

    if !landscape.is_flat() {
        for t in 1..=config.max_iterations {
            let shifted = shifted_histograms(&landscape, &params, sampling(t))?;
            let choice = adapt_tau(
                |tau| norm(&gradient_from(&landscape, &current.hist, &shifted, tau)),
                config.g_c,
                config.tau_step,
                config.tau_max,
                config.tau_tolerance,
            );
            let grad = gradient_from(&landscape, &current.hist, &shifted, choice.tau);
            let (f, f2) = landscape.expectations(&current.hist, choice.tau);
            let eta = learning_rate(f, f2)?;
            let theta = params.theta.iter().zip(&grad).map(|(th, g)| th - eta * g).collect();
            params = params.with_theta(theta);

            state = run_ansatz(&params)?;
            current = readout(&landscape, &state, sampling(t));
            circuits += per_iteration;
            let e = landscape.energies[current.index as usize];
            if e < best {
                best = e;
                best_index = current.index;
            }
            records.push(record(&landscape, t, choice.tau, eta, choice.grad_norm, &current, best));
        }
    }

    let c_gs = (landscape.count <= config.oracle_cap).then(|| landscape.ground_state().c_gs);
    let alpha = c_gs.map(|gs| approximation_ratio(gs, best).expect("sampled makespans are feasible"));
    let ground_state_probability = c_gs.map(|gs| {
        state
            .exact_distribution()
            .iter()
            .zip(&landscape.energies)
            .filter(|(_, &e)| e == gs)
            .map(|(p, _)| p)
            .sum()
    });
    let codec = Codec::new(instance);
    let best_schedule = codec.decode(&BigUint::from(best_index), DecodeMode::Total)?;
    // a penalty-mode readout above the domain still names a register value;
    // the schedule shown is its modulo image
    debug_assert!(best_index < 1 << n);
    Ok(FvqeResult {
        n_qubits: n,
        n_params: m,
        shots,
        circuits,
        records,
        theta: params.theta,
        best_index,
        best_bitstring: format!("{:0>w$b}", best_index, w = n as usize),
        best_schedule,
        c_opt: best,
        c_gs,
        alpha,
        ground_state_probability,
        flat: landscape.is_flat(),
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
