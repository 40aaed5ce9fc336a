//! Dense statevector simulator for the hardware-efficient R_y/CZ ansatz.
//!
//! Amplitude index = big-endian bitstring: qubit 1 is the most significant bit.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: u32 = 24;

#[derive(Debug, Error, PartialEq)]
pub enum QsimError {
    #[error("{n} qubits exceed the simulator limit of {MAX_QUBITS}")]
    TooManyQubits { n: u32 },
    #[error("qubit {qubit} is outside 1..={n}")]
    QubitOutOfRange { qubit: u32, n: u32 },
    #[error("controlled-Z needs two distinct qubits, got {0} twice")]
    SameQubit(u32),
    #[error("ansatz with {n} qubits and {layers} layers needs {expected} angles, got {found}")]
    ParameterCount {
        n: u32,
        layers: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: u32) -> Result<Self, QsimError> {
        if n > MAX_QUBITS {
            return Err(QsimError::TooManyQubits { n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be 2^n");
        StateVector {
            n: amps.len().trailing_zeros(),
            amps,
        }
    }

    pub fn n_qubits(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: u32) -> Result<usize, QsimError> {
        if qubit == 0 || qubit > self.n {
            return Err(QsimError::QubitOutOfRange { qubit, n: self.n });
        }
        Ok(1 << (self.n - qubit))
    }

    /// `R_y(angle) = [[cos, -sin], [sin, cos]]` of the half angle.
    pub fn apply_ry(&mut self, qubit: u32, angle: f64) -> Result<(), QsimError> {
        let bit = self.mask(qubit)?;
        let (s, c) = (angle / 2.0).sin_cos();
        // iterate over blocks of 2*bit; low half has the qubit at 0
        for block in self.amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = block.split_at_mut(bit);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = x0 * c - x1 * s;
                *a1 = x0 * s + x1 * c;
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: u32, b: u32) -> Result<(), QsimError> {
        if a == b {
            return Err(QsimError::SameQubit(a));
        }
        let both = self.mask(a)? | self.mask(b)?;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & both == both {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// `P(x) = |<x|psi>|^2` for every basis state.
    pub fn exact_distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `shots` i.i.d. measurements in the computational basis, as counts per
    /// basis index.
    pub fn sample(&self, shots: u64, seed: u64) -> Vec<u64> {
        sample_distribution(&self.exact_distribution(), shots, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

/// Draws `shots` outcomes from `probs` and returns per-index counts.
pub fn sample_distribution<R: rand::Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let dist = WeightedIndex::new(probs).expect("a normalized distribution has positive mass");
    for _ in 0..shots {
        counts[dist.sample(rng)] += 1;
    }
    counts
}

/// Angles of the layered ansatz: `layers` repetitions of (R_y layer, CZ
/// brickwork) followed by a final R_y layer, so `n * (layers + 1)` angles.
/// `theta[l * n + (q - 1)]` drives qubit `q` in layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    pub n_qubits: u32,
    pub layers: usize,
    pub theta: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(n_qubits: u32, layers: usize, theta: Vec<f64>) -> Result<Self, QsimError> {
        let expected = Self::param_count(n_qubits, layers);
        if theta.len() != expected {
            return Err(QsimError::ParameterCount {
                n: n_qubits,
                layers,
                expected,
                found: theta.len(),
            });
        }
        Ok(AnsatzParams {
            n_qubits,
            layers,
            theta,
        })
    }

    pub fn param_count(n_qubits: u32, layers: usize) -> usize {
        n_qubits as usize * (layers + 1)
    }

    /// Pre-entangling layers at 0, final layer at pi/2: the circuit prepares
    /// `|+>^n` exactly.
    pub fn uniform_superposition(n_qubits: u32, layers: usize) -> Self {
        let n = n_qubits as usize;
        let mut theta = vec![0.0; n * (layers + 1)];
        theta[n * layers..].fill(std::f64::consts::FRAC_PI_2);
        AnsatzParams {
            n_qubits,
            layers,
            theta,
        }
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), self.theta.len());
        AnsatzParams { theta, ..*self }
    }
}

pub fn run_ansatz(params: &AnsatzParams) -> Result<StateVector, QsimError> {
    let n = params.n_qubits;
    let expected = AnsatzParams::param_count(n, params.layers);
    if params.theta.len() != expected {
        return Err(QsimError::ParameterCount {
            n,
            layers: params.layers,
            expected,
            found: params.theta.len(),
        });
    }
    let mut state = StateVector::zero(n)?;
    if n == 0 {
        return Ok(state);
    }
    let mut angles = params.theta.chunks_exact(n as usize);
    for _ in 0..params.layers {
        ry_layer(&mut state, angles.next().unwrap());
        for a in (1..n).step_by(2) {
            state.apply_cz(a, a + 1)?;
        }
        for a in (2..n).step_by(2) {
            state.apply_cz(a, a + 1)?;
        }
    }
    ry_layer(&mut state, angles.next().unwrap());
    Ok(state)
}

fn ry_layer(state: &mut StateVector, angles: &[f64]) {
    for (q, &angle) in angles.iter().enumerate() {
        state.apply_ry(q as u32 + 1, angle).expect("qubit in range");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn ry_pi_flips() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(1, PI).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn ry_acts_on_the_named_qubit() {
        // qubit 1 is the most significant bit: |00> -> |10> = index 2
        let mut s = StateVector::zero(2).unwrap();
        s.apply_ry(1, PI).unwrap();
        assert!(close(s.amplitudes()[2], Complex64::new(1.0, 0.0)));
        let mut s = StateVector::zero(2).unwrap();
        s.apply_ry(2, PI).unwrap();
        assert!(close(s.amplitudes()[1], Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn cz_on_11() {
        let mut s = StateVector::from_amplitudes(real(&[0.0, 0.0, 0.0, 1.0]));
        s.apply_cz(1, 2).unwrap();
        assert!(close(s.amplitudes()[3], Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn plus_plus_then_cz() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_ry(1, FRAC_PI_2).unwrap();
        s.apply_ry(2, FRAC_PI_2).unwrap();
        s.apply_cz(1, 2).unwrap();
        let want = real(&[0.5, 0.5, 0.5, -0.5]);
        for (a, b) in s.amplitudes().iter().zip(&want) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn bad_indices() {
        let mut s = StateVector::zero(2).unwrap();
        assert_eq!(s.apply_ry(3, 1.0), Err(QsimError::QubitOutOfRange { qubit: 3, n: 2 }));
        assert_eq!(s.apply_ry(0, 1.0), Err(QsimError::QubitOutOfRange { qubit: 0, n: 2 }));
        assert_eq!(s.apply_cz(1, 1), Err(QsimError::SameQubit(1)));
        assert!(StateVector::zero(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn ansatz_initial_state_is_plus() {
        let s = run_ansatz(&AnsatzParams::new(2, 1, vec![0.0, 0.0, FRAC_PI_2, FRAC_PI_2]).unwrap()).unwrap();
        for a in s.amplitudes() {
            assert!(close(*a, Complex64::new(0.5, 0.0)));
        }
        let s = run_ansatz(&AnsatzParams::uniform_superposition(5, 2)).unwrap();
        for p in s.exact_distribution() {
            assert!((p - 1.0 / 32.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_angles_give_zero_state() {
        for n in 1..6 {
            for p in 1..3 {
                let s = run_ansatz(&AnsatzParams::new(n, p, vec![0.0; (n as usize) * (p + 1)]).unwrap()).unwrap();
                assert!(close(s.amplitudes()[0], Complex64::new(1.0, 0.0)));
            }
        }
    }

    #[test]
    fn parameter_count_is_checked() {
        assert!(AnsatzParams::new(3, 1, vec![0.0; 5]).is_err());
        let bad = AnsatzParams {
            n_qubits: 3,
            layers: 1,
            theta: vec![0.0; 5],
        };
        assert!(matches!(run_ansatz(&bad), Err(QsimError::ParameterCount { .. })));
    }

    /// Independent construction: full 2^n x 2^n matrices per gate.
    fn dense_ansatz(n: u32, layers: usize, theta: &[f64]) -> Vec<f64> {
        let dim = 1usize << n;
        let apply = |m: &dyn Fn(usize, usize) -> f64, v: &[f64]| -> Vec<f64> {
            (0..dim).map(|i| (0..dim).map(|j| m(i, j) * v[j]).sum()).collect()
        };
        let ry = |q: u32, angle: f64| {
            let bit = 1usize << (n - q);
            let (s, c) = (angle / 2.0).sin_cos();
            move |i: usize, j: usize| {
                if i & !bit != j & !bit {
                    return 0.0;
                }
                match (i & bit != 0, j & bit != 0) {
                    (false, false) | (true, true) => c,
                    (false, true) => -s,
                    (true, false) => s,
                }
            }
        };
        let cz = |a: u32, b: u32| {
            let both = (1usize << (n - a)) | (1usize << (n - b));
            move |i: usize, j: usize| {
                if i != j {
                    0.0
                } else if i & both == both {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        let nn = n as usize;
        for l in 0..=layers {
            for q in 1..=n {
                v = apply(&ry(q, theta[l * nn + q as usize - 1]), &v);
            }
            if l == layers {
                break;
            }
            let mut pairs: Vec<(u32, u32)> = (1..n).step_by(2).map(|a| (a, a + 1)).collect();
            pairs.extend((2..n).step_by(2).map(|a| (a, a + 1)));
            for (a, b) in pairs {
                v = apply(&cz(a, b), &v);
            }
        }
        v
    }

    #[test]
    fn ansatz_matches_dense_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5 {
            for layers in 1..=2 {
                let theta: Vec<f64> = (0..(n as usize) * (layers + 1)).map(|_| rng.random_range(-PI..PI)).collect();
                let s = run_ansatz(&AnsatzParams::new(n, layers, theta.clone()).unwrap()).unwrap();
                let want = dense_ansatz(n, layers, &theta);
                for (a, b) in s.amplitudes().iter().zip(&want) {
                    assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn amplitudes_are_sinusoidal_in_each_angle() {
        // a(t) = A cos(t/2) + B sin(t/2): fit A, B from t and t + pi, predict t - pi
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        let theta: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
        let at = |j: usize, t: f64| {
            let mut th = theta.clone();
            th[j] = t;
            run_ansatz(&AnsatzParams::new(n, 1, th).unwrap()).unwrap()
        };
        for j in 0..6 {
            let t = theta[j];
            let (s0, s1, s2) = (at(j, t), at(j, t + PI), at(j, t - PI));
            for i in 0..8 {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                let (a0, a1) = (s0.amplitudes()[i], s1.amplitudes()[i]);
                // [c s; -s c] [A; B] = [a0; a1]
                let a = a0 * c - a1 * s;
                let b = a0 * s + a1 * c;
                let tt = t - PI;
                let pred = a * (tt / 2.0).cos() + b * (tt / 2.0).sin();
                assert!((pred - s2.amplitudes()[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn norm_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let theta: Vec<f64> = (0..2 * n as usize).map(|_| rng.random_range(-10.0..10.0)).collect();
            let s = run_ansatz(&AnsatzParams::new(n, 1, theta).unwrap()).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((s.exact_distribution().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling() {
        let plus2 = run_ansatz(&AnsatzParams::uniform_superposition(2, 1)).unwrap();
        assert_eq!(plus2.exact_distribution().len(), 4);
        let one = StateVector::from_amplitudes(real(&[0.0, 1.0]));
        assert_eq!(one.sample(100, 0), vec![0, 100]);

        let plus = run_ansatz(&AnsatzParams::uniform_superposition(1, 1)).unwrap();
        let shots = 100_000;
        let counts = plus.sample(shots, 42);
        assert_eq!(counts.iter().sum::<u64>(), shots);
        let freq = counts[1] as f64 / shots as f64;
        let sigma = 0.5 / (shots as f64).sqrt();
        assert!((freq - 0.5).abs() < 5.0 * sigma);
        assert_eq!(plus.sample(1000, 9), plus.sample(1000, 9));
    }
}
