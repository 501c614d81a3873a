//! Dense density-matrix simulator.
//!
//! Complements the stabilizer engine: handles arbitrary noise channels
//! (including amplitude damping and the partial-swap gadget) at the price of
//! exponential memory. The state is a flat row-major `2^n x 2^n` complex
//! matrix, so the qubit count is capped at [`DENSE_QUBIT_CAP`].
//!
//! Measurements are dephase-and-defer: `MEASURE_Z q` projects out the
//! coherences of `q` immediately and records the qubit; the joint outcome
//! distribution of all recorded measurements is read off the final diagonal.
//! This yields the exact distribution in one pass but forbids touching a
//! qubit again after it has been measured (no circuit in this crate does).

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, PauliProbs};
use crate::tableau::{batch_rng, compile_plan, ExecutionResult, Step, BATCH_SHOTS};

/// Maximum qubit count for the dense engine (`2^24` complex entries, ~270 MB).
pub const DENSE_QUBIT_CAP: usize = 12;

/// Maximum number of recorded measurement bits for an exact distribution.
const EXACT_BITS_CAP: usize = 16;

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Exact joint distribution over the recorded measurement bits.
///
/// Bit `k` of an outcome word is the `k`-th measurement in circuit order,
/// matching the bit layout of [`ExecutionResult`].
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    n_bits: usize,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_outcomes(&self) -> usize {
        self.probs.len()
    }

    /// Probability of one outcome word.
    pub fn probability(&self, word: u64) -> f64 {
        self.probs.get(word as usize).copied().unwrap_or(0.0)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Marginal probability that bit `bit` is 1.
    pub fn marginal_one(&self, bit: usize) -> f64 {
        assert!(bit < self.n_bits, "bit {bit} out of range");
        self.probs
            .iter()
            .enumerate()
            .filter(|(w, _)| (w >> bit) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Dense density-matrix state with deferred measurement readout.
pub struct DenseEngine {
    n: usize,
    dim: usize,
    rho: Vec<Complex64>,
    scratch: Vec<Complex64>,
    /// Qubit index of each recorded measurement, in circuit order.
    record: Vec<usize>,
    /// Qubits that have been measured and must not be touched again.
    sealed: Vec<bool>,
}

impl DenseEngine {
    /// Fresh `|0..0><0..0|` state on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > DENSE_QUBIT_CAP {
            return Err(Error::EngineCapacity {
                qubits: n,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let dim = 1usize << n;
        let mut rho = vec![ZERO; dim * dim];
        rho[0] = ONE;
        Ok(DenseEngine {
            n,
            dim,
            rho,
            scratch: vec![ZERO; dim * dim],
            record: Vec::new(),
            sealed: vec![false; n],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of measurements recorded so far.
    pub fn n_measured(&self) -> usize {
        self.record.len()
    }

    #[cfg(test)]
    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.rho[i * self.dim + i]).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        Ok(())
    }

    fn check_open(&self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        if self.sealed[q] {
            return Err(Error::Config(format!(
                "dense engine defers measurements: qubit {q} was already measured and cannot be \
                 acted on again"
            )));
        }
        Ok(())
    }

    /// `rho <- sum_k K_k rho K_k^dagger` for a one-qubit Kraus set on `q`.
    pub fn apply_kraus_1q(&mut self, q: usize, kraus: &[Mat2]) -> Result<()> {
        self.check_open(q)?;
        let dim = self.dim;
        let mask = 1usize << q;
        self.scratch.fill(ZERO);
        // Pairs (r, c) with bit q clear enumerate every 2x2 block exactly once.
        for i in 0..dim / 2 {
            let r = ((i >> q) << (q + 1)) | (i & (mask - 1));
            for j in 0..dim / 2 {
                let col = ((j >> q) << (q + 1)) | (j & (mask - 1));
                let block = [
                    self.rho[r * dim + col],
                    self.rho[r * dim + (col | mask)],
                    self.rho[(r | mask) * dim + col],
                    self.rho[(r | mask) * dim + (col | mask)],
                ];
                for k in kraus {
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut acc = ZERO;
                            for ap in 0..2 {
                                for bp in 0..2 {
                                    acc += k[a][ap] * block[ap * 2 + bp] * k[b][bp].conj();
                                }
                            }
                            let row = if a == 0 { r } else { r | mask };
                            let cc = if b == 0 { col } else { col | mask };
                            self.scratch[row * dim + cc] += acc;
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut self.rho, &mut self.scratch);
        Ok(())
    }

    fn apply_unitary_1q(&mut self, q: usize, u: Mat2) -> Result<()> {
        self.apply_kraus_1q(q, &[u])
    }

    /// Two-qubit unitary on `(a, b)`; local basis index is `bit_a + 2*bit_b`.
    fn apply_unitary_2q(&mut self, a: usize, b: usize, u: &[[Complex64; 4]; 4]) -> Result<()> {
        self.check_open(a)?;
        self.check_open(b)?;
        if a == b {
            return Err(Error::Config("two-qubit gate needs distinct qubits".into()));
        }
        let dim = self.dim;
        let (lo, hi) = (a.min(b), a.max(b));
        let insert = |v: usize, p: usize| ((v >> p) << (p + 1)) | (v & ((1 << p) - 1));
        let idx = |base: usize, l: usize| {
            base | if l & 1 != 0 { 1 << a } else { 0 } | if l & 2 != 0 { 1 << b } else { 0 }
        };
        self.scratch.fill(ZERO);
        for i in 0..dim / 4 {
            let r = insert(insert(i, lo), hi);
            for j in 0..dim / 4 {
                let col = insert(insert(j, lo), hi);
                let mut block = [ZERO; 16];
                for (la, cell) in block.iter_mut().enumerate() {
                    *cell = self.rho[idx(r, la / 4) * dim + idx(col, la % 4)];
                }
                for la in 0..4 {
                    for lb in 0..4 {
                        let mut acc = ZERO;
                        for ap in 0..4 {
                            if u[la][ap] == ZERO {
                                continue;
                            }
                            for bp in 0..4 {
                                acc += u[la][ap] * block[ap * 4 + bp] * u[lb][bp].conj();
                            }
                        }
                        self.scratch[idx(r, la) * dim + idx(col, lb)] += acc;
                    }
                }
            }
        }
        std::mem::swap(&mut self.rho, &mut self.scratch);
        Ok(())
    }

    /// Independent Pauli channel on `q`.
    pub fn apply_pauli_channel(&mut self, q: usize, probs: &PauliProbs) -> Result<()> {
        probs.validate()?;
        if probs.is_zero() {
            return self.check_open(q);
        }
        let pi = (1.0 - probs.total()).max(0.0);
        let kraus = [
            scale_mat(pauli_mat('I'), pi.sqrt()),
            scale_mat(pauli_mat('X'), probs.x.sqrt()),
            scale_mat(pauli_mat('Y'), probs.y.sqrt()),
            scale_mat(pauli_mat('Z'), probs.z.sqrt()),
        ];
        self.apply_kraus_1q(q, &kraus)
    }

    /// Amplitude damping with decay probability `gamma` on `q`.
    pub fn apply_amplitude_damping(&mut self, q: usize, gamma: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!(
                "damping probability {gamma} outside [0, 1]"
            )));
        }
        let kraus = [
            [[ONE, ZERO], [ZERO, c((1.0 - gamma).sqrt(), 0.0)]],
            [[ZERO, c(gamma.sqrt(), 0.0)], [ZERO, ZERO]],
        ];
        self.apply_kraus_1q(q, &kraus)
    }

    /// Non-destructive Z measurement: dephases `q` now, reads the bit from
    /// the final diagonal. The qubit is sealed afterwards.
    pub fn measure_z(&mut self, q: usize) -> Result<()> {
        self.check_open(q)?;
        let dim = self.dim;
        let mask = 1usize << q;
        for r in 0..dim {
            for col in 0..dim {
                if (r & mask) != (col & mask) {
                    self.rho[r * dim + col] = ZERO;
                }
            }
        }
        self.record.push(q);
        self.sealed[q] = true;
        Ok(())
    }

    /// Reset `q` to `|0>` via the measure-and-flip channel.
    pub fn reset(&mut self, q: usize) -> Result<()> {
        // P0 rho P0 + (X P1) rho (X P1)^dagger
        let kraus = [
            [[ONE, ZERO], [ZERO, ZERO]],
            [[ZERO, ONE], [ZERO, ZERO]],
        ];
        self.apply_kraus_1q(q, &kraus)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_unitary_1q(q, [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
            }
            Gate::S(q) => self.apply_unitary_1q(q, [[ONE, ZERO], [ZERO, c(0.0, 1.0)]]),
            Gate::Sdg(q) => self.apply_unitary_1q(q, [[ONE, ZERO], [ZERO, c(0.0, -1.0)]]),
            Gate::X(q) => self.apply_unitary_1q(q, pauli_mat('X')),
            Gate::Y(q) => self.apply_unitary_1q(q, pauli_mat('Y')),
            Gate::Z(q) => self.apply_unitary_1q(q, pauli_mat('Z')),
            Gate::Cx(a, b) => {
                let mut u = [[ZERO; 4]; 4];
                // Control is the first operand (local bit 0).
                u[0][0] = ONE;
                u[2][2] = ONE;
                u[3][1] = ONE;
                u[1][3] = ONE;
                self.apply_unitary_2q(a, b, &u)
            }
            Gate::Cz(a, b) => {
                let mut u = [[ZERO; 4]; 4];
                u[0][0] = ONE;
                u[1][1] = ONE;
                u[2][2] = ONE;
                u[3][3] = -ONE;
                self.apply_unitary_2q(a, b, &u)
            }
            Gate::Swap(a, b) => {
                let mut u = [[ZERO; 4]; 4];
                u[0][0] = ONE;
                u[3][3] = ONE;
                u[2][1] = ONE;
                u[1][2] = ONE;
                self.apply_unitary_2q(a, b, &u)
            }
            Gate::PSwap(a, b, theta) => {
                let (cos, sin) = ((2.0 * theta).cos(), (2.0 * theta).sin());
                let mut u = [[ZERO; 4]; 4];
                u[0][0] = ONE;
                u[3][3] = ONE;
                u[1][1] = c(cos, 0.0);
                u[2][2] = c(cos, 0.0);
                u[1][2] = c(0.0, -sin);
                u[2][1] = c(0.0, -sin);
                self.apply_unitary_2q(a, b, &u)
            }
            Gate::MeasureZ(q) => self.measure_z(q),
            Gate::Reset(q) => self.reset(q),
        }
    }

    /// `tr(rho P)` for a signed Pauli operator on the full register.
    ///
    /// `P|j> = c_j |j ^ x>`, so the trace touches one element per column.
    pub fn pauli_expectation(&self, op: &crate::pauli::PauliOperator) -> Result<Complex64> {
        if op.n() != self.n {
            return Err(Error::DimensionMismatch(op.n(), self.n));
        }
        let mut flip = 0usize;
        for q in 0..self.n {
            if op.letter(q).bits().0 {
                flip |= 1 << q;
            }
        }
        let global = [ONE, c(0.0, 1.0), -ONE, c(0.0, -1.0)][op.phase_power() as usize];
        let mut acc = ZERO;
        for j in 0..self.dim {
            let mut amp = global;
            for q in 0..self.n {
                use crate::pauli::Pauli;
                let bit = (j >> q) & 1;
                match op.letter(q) {
                    Pauli::I | Pauli::X => {}
                    Pauli::Y => amp *= if bit == 0 { c(0.0, 1.0) } else { c(0.0, -1.0) },
                    Pauli::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                }
            }
            acc += amp * self.rho[j * self.dim + (j ^ flip)];
        }
        Ok(acc)
    }

    /// Exact joint distribution of the recorded measurements.
    pub fn distribution(&self) -> Result<ExactDistribution> {
        let n_bits = self.record.len();
        if n_bits > EXACT_BITS_CAP {
            return Err(Error::CapacityExceeded(n_bits));
        }
        let mut probs = vec![0.0; 1usize << n_bits];
        for i in 0..self.dim {
            let p = self.rho[i * self.dim + i].re;
            let mut word = 0usize;
            for (k, &q) in self.record.iter().enumerate() {
                word |= ((i >> q) & 1) << k;
            }
            probs[word] += p;
        }
        Ok(ExactDistribution { n_bits, probs })
    }
}

fn pauli_mat(letter: char) -> Mat2 {
    match letter {
        'I' => [[ONE, ZERO], [ZERO, ONE]],
        'X' => [[ZERO, ONE], [ONE, ZERO]],
        'Y' => [[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]],
        'Z' => [[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!("not a Pauli letter"),
    }
}

fn scale_mat(m: Mat2, s: f64) -> Mat2 {
    let f = c(s, 0.0);
    [[m[0][0] * f, m[0][1] * f], [m[1][0] * f, m[1][1] * f]]
}

/// How the relaxation step of a noise model is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RelaxationPath {
    /// Apply the discrete relaxation channel (amplitude damping with
    /// `gamma = delta * (2 - delta)`) directly to the density matrix.
    #[default]
    Channel,
    /// Append one reusable auxiliary qubit; reset it and partially swap
    /// with it (`sin^2 theta = delta / 2`) wherever relaxation fires.
    Gadget,
}

fn run_plan(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    path: RelaxationPath,
) -> Result<DenseEngine> {
    let delta = noise.relaxation_delta();
    let aux = match (path, delta) {
        (RelaxationPath::Gadget, Some(_)) => Some(circuit.n_qubits()),
        _ => None,
    };
    let mut engine = DenseEngine::new(circuit.n_qubits() + usize::from(aux.is_some()))?;
    let theta = delta.map(|d| (d / 2.0).sqrt().asin());
    for step in compile_plan(circuit, noise) {
        match step {
            Step::Gate(i) => engine.apply_gate(&circuit.gates()[i])?,
            Step::Noise(qubits) => {
                for q in qubits {
                    engine.apply_pauli_channel(q, &noise.probs_for(q))?;
                    // Relaxation acts at the same layer, after Pauli noise.
                    match (delta, aux) {
                        (Some(d), None) => {
                            engine.apply_amplitude_damping(q, d * (2.0 - d))?;
                        }
                        (Some(_), Some(a)) => {
                            engine.reset(a)?;
                            engine.apply_gate(&Gate::PSwap(q, a, theta.unwrap()))?;
                        }
                        (None, _) => {}
                    }
                }
            }
        }
    }
    Ok(engine)
}

/// Run `circuit` under `noise` and return the exact outcome distribution.
pub fn run_dense_exact(circuit: &CliffordCircuit, noise: &NoiseModel) -> Result<ExactDistribution> {
    run_plan(circuit, noise, RelaxationPath::Channel)?.distribution()
}

/// [`run_dense_exact`] with an explicit relaxation realization.
pub fn run_dense_exact_via(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    path: RelaxationPath,
) -> Result<ExactDistribution> {
    run_plan(circuit, noise, path)?.distribution()
}

/// Run `circuit` under `noise`, sampling `shots` outcomes from the exact
/// distribution. Bit-for-bit deterministic in `seed`.
pub fn run_dense(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
) -> Result<ExecutionResult> {
    run_dense_via(circuit, noise, shots, seed, RelaxationPath::Channel)
}

/// [`run_dense`] with an explicit relaxation realization.
pub fn run_dense_via(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
    path: RelaxationPath,
) -> Result<ExecutionResult> {
    let dist = run_dense_exact_via(circuit, noise, path)?;
    let mut cumulative = Vec::with_capacity(dist.n_outcomes());
    let mut acc = 0.0;
    for &p in dist.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let mut out = Vec::with_capacity(shots);
    let n_batches = shots.div_ceil(BATCH_SHOTS);
    for batch in 0..n_batches {
        let mut rng = batch_rng(seed, batch as u64);
        let in_batch = (shots - batch * BATCH_SHOTS).min(BATCH_SHOTS);
        for _ in 0..in_batch {
            let u: f64 = rng.gen_range(0.0..acc.max(f64::MIN_POSITIVE));
            let word = cumulative.partition_point(|&cp| cp <= u);
            out.push(word.min(dist.n_outcomes() - 1) as u64);
        }
    }
    Ok(ExecutionResult {
        n_bits: dist.n_bits(),
        shots: out,
    })
}
