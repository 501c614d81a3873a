//! Stabilizer-tableau execution engine for Clifford circuits with Pauli
//! noise, plus the shot-record container shared by all engines.
//!
//! Two sampling strategies: a full per-shot tableau simulation (always
//! valid), and a Pauli-frame fast path used when a noiseless reference run
//! shows every measurement is deterministic and no resets occur — then a
//! shot is fully described by an error frame propagated through the
//! circuit, flipping reference bits where it anticommutes.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{Error, Result};
use crate::noise::{noise_boundary, NoiseModel, PauliProbs, Placement};
use crate::pauli::{Pauli, PauliOperator, MAX_QUBITS};

/// Classical measurement records: one word per shot, bit `j` holding the
/// j-th measurement of the circuit.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ExecutionResult {
    pub n_bits: usize,
    pub shots: Vec<u64>,
}

impl ExecutionResult {
    pub fn n_shots(&self) -> usize {
        self.shots.len()
    }

    /// Outcome histogram.
    pub fn counts(&self) -> BTreeMap<u64, u64> {
        let mut map = BTreeMap::new();
        for &w in &self.shots {
            *map.entry(w).or_insert(0) += 1;
        }
        map
    }

    pub fn bit(&self, shot: usize, index: usize) -> bool {
        self.shots[shot] >> index & 1 == 1
    }

    fn bitstring(&self, word: u64) -> String {
        (0..self.n_bits).map(|j| if word >> j & 1 == 1 { '1' } else { '0' }).collect()
    }
}

/// An execution result bound to its provenance, in the on-disk format:
/// header lines (circuit hash, seed, shot and bit counts), then one
/// bitstring per shot with the first measurement leftmost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultFile {
    pub circuit: String,
    pub seed: u64,
    pub result: ExecutionResult,
}

impl ResultFile {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "CIRCUIT {}\nSEED {}\nSHOTS {}\nBITS {}\n",
            self.circuit,
            self.seed,
            self.result.n_shots(),
            self.result.n_bits
        );
        for &w in &self.result.shots {
            out.push_str(&self.result.bitstring(w));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut field = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {key} header")))?;
            line.strip_prefix(key)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected {key} header, got {line:?}")))
        };
        let circuit = field("CIRCUIT")?;
        let seed: u64 =
            field("SEED")?.parse().map_err(|_| Error::Parse("bad SEED".into()))?;
        let n_shots: usize =
            field("SHOTS")?.parse().map_err(|_| Error::Parse("bad SHOTS".into()))?;
        let n_bits: usize =
            field("BITS")?.parse().map_err(|_| Error::Parse("bad BITS".into()))?;
        if n_bits > 64 {
            return Err(Error::Parse(format!("bit count {n_bits} exceeds 64")));
        }
        let mut shots = Vec::with_capacity(n_shots);
        for line in lines.by_ref().take(n_shots) {
            let line = line.trim();
            if line.len() != n_bits {
                return Err(Error::Parse(format!(
                    "shot line has {} bits, expected {n_bits}",
                    line.len()
                )));
            }
            let mut w = 0u64;
            for (j, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => w |= 1 << j,
                    other => return Err(Error::Parse(format!("bad bit char {other:?}"))),
                }
            }
            shots.push(w);
        }
        if shots.len() != n_shots {
            return Err(Error::Parse(format!(
                "expected {n_shots} shot lines, found {}",
                shots.len()
            )));
        }
        Ok(ResultFile { circuit, seed, result: ExecutionResult { n_bits, shots } })
    }
}

/// Stabilizer tableau with destabilizers: `stabs[i]` generate the state's
/// stabilizer group, `destabs[i]` anticommutes with `stabs[i]` and commutes
/// with every other generator. Starts as |0...0>.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    stabs: Vec<PauliOperator>,
    destabs: Vec<PauliOperator>,
}

impl Tableau {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::EngineCapacity { qubits: n, cap: MAX_QUBITS });
        }
        Ok(Tableau {
            n,
            stabs: (0..n).map(|q| PauliOperator::single(n, q, Pauli::Z)).collect(),
            destabs: (0..n).map(|q| PauliOperator::single(n, q, Pauli::X)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliOperator] {
        &self.stabs
    }

    /// Applies a unitary Clifford gate by conjugating every row.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for row in self.stabs.iter_mut().chain(self.destabs.iter_mut()) {
            crate::circuit::conjugate_pauli(row, gate)?;
        }
        Ok(())
    }

    /// Applies a Pauli error (a unitary, so signs flip where it
    /// anticommutes).
    pub fn apply_error(&mut self, q: usize, p: Pauli) {
        for row in self.stabs.iter_mut().chain(self.destabs.iter_mut()) {
            match p {
                Pauli::I => {}
                Pauli::X => row.conj_x(q),
                Pauli::Y => row.conj_y(q),
                Pauli::Z => row.conj_z(q),
            }
        }
    }

    /// Measures qubit `q` in the Z basis. Returns (outcome, was_random).
    pub fn measure_z(&mut self, q: usize, rng: &mut impl Rng) -> Result<(bool, bool)> {
        match (0..self.n).find(|&i| self.stabs[i].x_bit(q)) {
            Some(p) => {
                let pivot = self.stabs[p];
                for i in 0..self.n {
                    if i != p && self.stabs[i].x_bit(q) {
                        self.stabs[i] = self.stabs[i].multiply(&pivot)?;
                    }
                    if i != p && self.destabs[i].x_bit(q) {
                        self.destabs[i] = self.destabs[i].multiply(&pivot)?;
                    }
                }
                self.destabs[p] = pivot;
                let outcome = rng.gen_bool(0.5);
                let mut z = PauliOperator::single(self.n, q, Pauli::Z);
                if outcome {
                    z.negate();
                }
                self.stabs[p] = z;
                Ok((outcome, true))
            }
            None => {
                // Z_q is in the stabilizer group; its sign is the outcome.
                // The subset is indexed by destabilizers that anticommute
                // with Z_q.
                let mut acc = PauliOperator::identity(self.n);
                for i in 0..self.n {
                    if self.destabs[i].x_bit(q) {
                        acc = acc.multiply(&self.stabs[i])?;
                    }
                }
                debug_assert_eq!(acc.letter(q), Pauli::Z);
                debug_assert_eq!(acc.weight(), 1);
                Ok((acc.sign()? < 0, false))
            }
        }
    }

    /// Forces qubit `q` to |0>: measure, then flip if needed.
    pub fn reset(&mut self, q: usize, rng: &mut impl Rng) -> Result<()> {
        let (one, _) = self.measure_z(q, rng)?;
        if one {
            self.apply_error(q, Pauli::X);
        }
        Ok(())
    }
}

/// One step of the compiled execution plan, shared by both engines.
pub(crate) enum Step {
    Gate(usize),
    /// Independent noise on each listed qubit, in order.
    Noise(Vec<usize>),
}

pub(crate) fn compile_plan(circuit: &CliffordCircuit, noise: &NoiseModel) -> Vec<Step> {
    let mut plan = Vec::new();
    let boundary = noise_boundary(circuit);
    let data: Vec<usize> = (0..circuit.n_data()).collect();
    for (i, g) in circuit.gates().iter().enumerate() {
        if noise.placement() == Placement::AfterEncoding && i == boundary {
            plan.push(Step::Noise(data.clone()));
        }
        plan.push(Step::Gate(i));
        if noise.placement() == Placement::PerGate && g.is_unitary() {
            let (a, b) = g.operands();
            let mut qs = vec![a];
            qs.extend(b);
            plan.push(Step::Noise(qs));
        }
    }
    if noise.placement() == Placement::AfterEncoding && boundary == circuit.gates().len() {
        plan.push(Step::Noise(data));
    }
    plan
}

fn sample_error(probs: &PauliProbs, rng: &mut impl Rng) -> Pauli {
    if probs.is_zero() {
        return Pauli::I;
    }
    let u: f64 = rng.gen();
    if u < probs.x {
        Pauli::X
    } else if u < probs.x + probs.y {
        Pauli::Y
    } else if u < probs.total() {
        Pauli::Z
    } else {
        Pauli::I
    }
}

/// Noiseless reference pass. Returns the reference bits when every
/// measurement is deterministic and the circuit has no resets (the frame
/// fast path's validity conditions), None otherwise.
fn reference_bits(circuit: &CliffordCircuit) -> Result<Option<Vec<bool>>> {
    if circuit.gates().iter().any(|g| matches!(g, Gate::Reset(_))) {
        return Ok(None);
    }
    let mut tab = Tableau::new(circuit.n_qubits())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut bits = Vec::new();
    for g in circuit.gates() {
        match *g {
            Gate::MeasureZ(q) => {
                let (bit, random) = tab.measure_z(q, &mut rng)?;
                if random {
                    return Ok(None);
                }
                bits.push(bit);
            }
            ref g => tab.apply(g)?,
        }
    }
    Ok(Some(bits))
}

/// Shot batches get independent, scheduler-independent random streams.
pub(crate) const BATCH_SHOTS: usize = 8192;

pub(crate) fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Samples `shots` trajectories of a Clifford circuit under Pauli noise.
/// Deterministic in (circuit, noise, shots, seed).
pub fn run_tableau(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
) -> Result<ExecutionResult> {
    if let Some(g) = circuit.gates().iter().find(|g| !g.is_clifford()) {
        return Err(Error::UnsupportedGate(g.name().to_string()));
    }
    if !noise.is_pauli_only() {
        return Err(Error::Config(
            "tableau engine cannot apply relaxation noise; use the dense engine".into(),
        ));
    }
    let n_bits = circuit.n_measurements();
    if n_bits > 64 {
        return Err(Error::CapacityExceeded(n_bits));
    }
    if circuit.n_qubits() > MAX_QUBITS {
        return Err(Error::EngineCapacity { qubits: circuit.n_qubits(), cap: MAX_QUBITS });
    }
    let plan = compile_plan(circuit, noise);
    let reference = reference_bits(circuit)?;
    let mut shots_out = Vec::with_capacity(shots);
    let mut batch = 0u64;
    let mut remaining = shots;
    while remaining > 0 {
        let count = remaining.min(BATCH_SHOTS);
        let mut rng = batch_rng(seed, batch);
        for _ in 0..count {
            let word = match &reference {
                Some(ref_bits) => frame_shot(circuit, noise, &plan, ref_bits, &mut rng)?,
                None => full_shot(circuit, noise, &plan, &mut rng)?,
            };
            shots_out.push(word);
        }
        batch += 1;
        remaining -= count;
    }
    Ok(ExecutionResult { n_bits, shots: shots_out })
}

fn full_shot(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    plan: &[Step],
    rng: &mut impl Rng,
) -> Result<u64> {
    let mut tab = Tableau::new(circuit.n_qubits())?;
    let mut word = 0u64;
    let mut bit = 0;
    for step in plan {
        match step {
            Step::Gate(i) => match circuit.gates()[*i] {
                Gate::MeasureZ(q) => {
                    let (one, _) = tab.measure_z(q, rng)?;
                    if one {
                        word |= 1 << bit;
                    }
                    bit += 1;
                }
                Gate::Reset(q) => tab.reset(q, rng)?,
                ref g => tab.apply(g)?,
            },
            Step::Noise(qubits) => {
                for &q in qubits {
                    let p = sample_error(&noise.probs_for(q), rng);
                    tab.apply_error(q, p);
                }
            }
        }
    }
    Ok(word)
}

fn frame_shot(
    circuit: &CliffordCircuit,
    noise: &NoiseModel,
    plan: &[Step],
    ref_bits: &[bool],
    rng: &mut impl Rng,
) -> Result<u64> {
    let mut frame = PauliOperator::identity(circuit.n_qubits());
    let mut word = 0u64;
    let mut bit = 0;
    for step in plan {
        match step {
            Step::Gate(i) => match circuit.gates()[*i] {
                Gate::MeasureZ(q) => {
                    if ref_bits[bit] ^ frame.x_bit(q) {
                        word |= 1 << bit;
                    }
                    bit += 1;
                }
                Gate::Reset(_) => unreachable!("frame path excludes resets"),
                ref g => crate::circuit::conjugate_pauli(&mut frame, g)?,
            },
            Step::Noise(qubits) => {
                for &q in qubits {
                    match sample_error(&noise.probs_for(q), rng) {
                        Pauli::I => {}
                        p => {
                            frame = frame.multiply(&PauliOperator::single(frame.n(), q, p))?;
                        }
                    }
                }
            }
        }
    }
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::five_one_three;
    use crate::synth::{synthesize_encoder, synthesize_syndrome_extraction};

    fn run(circuit: &CliffordCircuit, noise: &str, shots: usize, seed: u64) -> ExecutionResult {
        run_tableau(circuit, &noise.parse().unwrap(), shots, seed).unwrap()
    }

    #[test]
    fn computational_basis_measurements() {
        let mut c = CliffordCircuit::new(2);
        c.x(0);
        c.measure_z(0);
        c.measure_z(1);
        let r = run(&c, "none", 10, 1);
        assert!(r.shots.iter().all(|&w| w == 0b01));
    }

    #[test]
    fn bell_pair_is_correlated_and_random() {
        let mut c = CliffordCircuit::new(2);
        c.h(0);
        c.cx(0, 1);
        c.measure_z(0);
        c.measure_z(1);
        let r = run(&c, "none", 2000, 7);
        let counts = r.counts();
        assert_eq!(counts.keys().copied().collect::<Vec<_>>(), vec![0b00, 0b11]);
        let zeros = counts[&0] as f64;
        assert!((zeros / 2000.0 - 0.5).abs() < 0.05, "unbalanced: {zeros}");
    }

    #[test]
    fn repeated_measurement_is_stable() {
        let mut c = CliffordCircuit::new(1);
        c.h(0);
        c.measure_z(0);
        c.measure_z(0);
        let r = run(&c, "none", 500, 3);
        for &w in &r.shots {
            assert_eq!(w & 1, (w >> 1) & 1);
        }
    }

    #[test]
    fn reset_clears_entanglement() {
        let mut c = CliffordCircuit::new(2);
        c.h(0);
        c.cx(0, 1);
        c.reset(0);
        c.measure_z(0);
        let r = run(&c, "none", 200, 9);
        assert!(r.shots.iter().all(|&w| w == 0));
    }

    #[test]
    fn noiseless_syndrome_extraction_is_all_zero() {
        let code = five_one_three();
        let enc = synthesize_encoder(&code, Pauli::Z, 1).unwrap();
        let ext = synthesize_syndrome_extraction(&code, None).unwrap();
        let mut c = CliffordCircuit::with_data(ext.circuit.n_qubits(), code.n());
        for g in enc.gates() {
            c.push(g.clone());
        }
        c.mark_noise_boundary();
        for g in ext.circuit.gates() {
            c.push(g.clone());
        }
        let r = run(&c, "none", 50, 5);
        assert_eq!(r.n_bits, 4);
        assert!(r.shots.iter().all(|&w| w == 0), "nonzero syndrome on clean run");
    }

    #[test]
    fn phase_noise_flips_plus_state_at_rate() {
        // Prepare |+>, inject Pr(Z)=0.05, rotate back, measure.
        let mut c = CliffordCircuit::new(1);
        c.h(0);
        c.mark_noise_boundary();
        c.h(0);
        c.measure_z(0);
        let shots = 100_000;
        let r = run(&c, "pauli:0,0,0.05", shots, 11);
        let ones: u64 = r.shots.iter().sum();
        let rate = ones as f64 / shots as f64;
        let sigma = (0.05 * 0.95 / shots as f64).sqrt();
        assert!((rate - 0.05).abs() < 3.0 * sigma, "rate {rate}");
    }

    #[test]
    fn frame_path_matches_analytic_rate() {
        // Deterministic reference (fixed-parity readout), so the frame
        // path runs. Noise fires before the CX on both qubits; an X or Y
        // on either one flips the readout, so the flip rate is the
        // exactly-one-of-two probability.
        let mut det = CliffordCircuit::new(2);
        det.x(0);
        det.mark_noise_boundary();
        det.cx(0, 1);
        det.measure_z(1);
        let r = run(&det, "iso:0.1", 50_000, 13);
        let ones: u64 = r.shots.iter().sum();
        let rate = ones as f64 / 50_000.0;
        let p: f64 = 2.0 * 0.2 * 0.8;
        let sigma = (p * (1.0 - p) / 50_000.0).sqrt();
        assert!((1.0 - rate - p).abs() < 4.0 * sigma, "rate {rate}, expected {}", 1.0 - p);
    }

    #[test]
    fn determinism_bit_for_bit() {
        let mut c = CliffordCircuit::new(3);
        c.h(0);
        c.cx(0, 1);
        c.cx(1, 2);
        c.measure_z(0);
        c.measure_z(1);
        c.measure_z(2);
        let a = run(&c, "iso:0.03", 4000, 42);
        let b = run(&c, "iso:0.03", 4000, 42);
        assert_eq!(a, b);
        let c2 = run(&c, "iso:0.03", 4000, 43);
        assert_ne!(a, c2);
    }

    #[test]
    fn result_file_round_trip() {
        let mut c = CliffordCircuit::new(2);
        c.h(0);
        c.measure_z(0);
        c.measure_z(1);
        let result = run(&c, "none", 25, 4);
        let file = ResultFile { circuit: c.hash(), seed: 4, result };
        let parsed = ResultFile::from_text(&file.to_text()).unwrap();
        assert_eq!(parsed, file);
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let mut c = CliffordCircuit::new(2);
        c.pswap(0, 1, 0.2);
        assert!(matches!(
            run_tableau(&c, &NoiseModel::noiseless(), 1, 0),
            Err(Error::UnsupportedGate(_))
        ));
        let plain = CliffordCircuit::new(1);
        let relax = "none;relax=0.1".parse::<NoiseModel>().unwrap();
        assert!(run_tableau(&plain, &relax, 1, 0).is_err());
    }
}
