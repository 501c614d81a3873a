//! The code-benchmarking protocol.
//!
//! One run prepares a logical eigenstate `|p_in>` with the synthesized
//! encoder, lets the noise layer act on the data register, extracts the
//! syndrome `s`, and measures the logical basis operator to get `p_out`.
//! The record `(p_in, s, p_out)` feeds the evaluator.
//!
//! Three execution modes: stabilizer sampling (fast, Pauli noise only),
//! dense sampling (any noise, small registers), and an exact mode that
//! simulates only the data register and reads the full joint distribution
//! of `(s, p_out)` from Pauli expectation values rather than sampling.

use crate::circuit::CliffordCircuit;
use crate::code::CheckMatrix;
use crate::dense::{run_dense, DenseEngine};
use crate::error::{Error, Result};
use crate::eval::{ShotRecord, ShotTable};
use crate::noise::{noise_boundary, NoiseModel, Placement};
use crate::pauli::Pauli;
use crate::synth::{entangle_observable, synthesize_encoder};
use crate::tableau::{run_tableau, ExecutionResult};

/// Execution engine for the protocol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProtocolEngine {
    /// Stabilizer tableau sampling. Pauli noise only.
    #[default]
    Tableau,
    /// Density-matrix sampling of the full circuit (data + ancillas).
    DenseSampled,
    /// Density matrix of the data register only; records carry the exact
    /// outcome probabilities as weights instead of sampled unit weights.
    DenseExact,
}

/// The six-state preparation set: both eigenstates of each logical axis.
pub fn six_state_bases() -> Vec<(Pauli, i8)> {
    vec![
        (Pauli::X, 1),
        (Pauli::X, -1),
        (Pauli::Y, 1),
        (Pauli::Y, -1),
        (Pauli::Z, 1),
        (Pauli::Z, -1),
    ]
}

/// Three-state compatibility set: only the +1 eigenstates.
pub fn plus_bases() -> Vec<(Pauli, i8)> {
    vec![(Pauli::X, 1), (Pauli::Y, 1), (Pauli::Z, 1)]
}

/// Full benchmark circuit for one prepared basis: encoder, noise boundary,
/// syndrome extraction, logical readout. Register layout: data `0..n`,
/// syndrome ancillas `n..n+m`, readout ancilla `n+m`. Measurement order is
/// syndrome bits then the logical bit.
pub fn assemble_protocol_circuit(
    code: &CheckMatrix,
    basis: Pauli,
    sign: i8,
) -> Result<CliffordCircuit> {
    let n = code.n();
    let m = code.stabilizers().len();
    let mut circuit = CliffordCircuit::with_data(n + m + 1, n);
    for gate in synthesize_encoder(code, basis, sign)?.gates() {
        circuit.push(gate.clone());
    }
    circuit.mark_noise_boundary();
    for (i, stab) in code.stabilizers().iter().enumerate() {
        entangle_observable(&mut circuit, None, stab, n, n + i)?;
    }
    entangle_observable(&mut circuit, None, &code.logical_rep(0, basis)?, n, n + m)?;
    for i in 0..=m {
        circuit.measure_z(n + i);
    }
    Ok(circuit)
}

pub(crate) fn records_from_shots(
    result: &ExecutionResult,
    m: usize,
    basis: Pauli,
    sign: i8,
    out: &mut Vec<ShotRecord>,
) {
    let syndrome_mask = (1u64 << m) - 1;
    for &shot in &result.shots {
        out.push(ShotRecord {
            basis,
            sign_in: sign,
            syndrome: shot & syndrome_mask,
            sign_out: if (shot >> m) & 1 == 0 { 1 } else { -1 },
            weight: 1.0,
        });
    }
}

/// Runs the protocol and collects one record per shot (sampling engines) or
/// per outcome with its exact probability as weight ([`ProtocolEngine::DenseExact`]).
///
/// `shots` is split evenly over the prepared bases (floor division); the
/// exact engine ignores it. Each basis gets an independently derived seed.
pub fn run_protocol(
    code: &CheckMatrix,
    noise: &NoiseModel,
    engine: ProtocolEngine,
    shots: usize,
    seed: u64,
    bases: &[(Pauli, i8)],
) -> Result<ShotTable> {
    if bases.is_empty() {
        return Err(Error::Config("no preparation bases given".into()));
    }
    for &(basis, sign) in bases {
        if basis == Pauli::I || !(sign == 1 || sign == -1) {
            return Err(Error::Config(format!(
                "invalid preparation basis ({basis:?}, {sign})"
            )));
        }
    }
    let m = code.stabilizers().len();
    let mut records = Vec::new();
    if engine == ProtocolEngine::DenseExact {
        for &(basis, sign) in bases {
            exact_records(code, noise, basis, sign, &mut records)?;
        }
        return Ok(ShotTable::new(m, records));
    }

    let per_basis = shots / bases.len();
    if per_basis == 0 {
        return Err(Error::Config(format!(
            "{shots} shots cannot cover {} bases",
            bases.len()
        )));
    }
    for (b, &(basis, sign)) in bases.iter().enumerate() {
        let circuit = assemble_protocol_circuit(code, basis, sign)?;
        // Distinct RNG stream per basis.
        let basis_seed = seed ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let result = match engine {
            ProtocolEngine::Tableau => run_tableau(&circuit, noise, per_basis, basis_seed)?,
            ProtocolEngine::DenseSampled => run_dense(&circuit, noise, per_basis, basis_seed)?,
            ProtocolEngine::DenseExact => unreachable!(),
        };
        records_from_shots(&result, m, basis, sign, &mut records);
    }
    Ok(ShotTable::new(m, records))
}

/// Exact mode: evolve only the data register, then obtain the joint
/// distribution of the `m + 1` commuting observables (stabilizers and the
/// logical operator) from `2^{m+1}` Pauli expectations via a Walsh-Hadamard
/// transform of the correlation vector.
fn exact_records(
    code: &CheckMatrix,
    noise: &NoiseModel,
    basis: Pauli,
    sign: i8,
    out: &mut Vec<ShotRecord>,
) -> Result<()> {
    let n = code.n();
    let m = code.stabilizers().len();
    if m + 1 > 20 {
        return Err(Error::CapacityExceeded(m + 1));
    }
    let encoder = synthesize_encoder(code, basis, sign)?;
    let mut engine = DenseEngine::new(n)?;
    for gate in encoder.gates() {
        engine.apply_gate(gate)?;
    }
    if noise.placement() == Placement::PerGate {
        return Err(Error::Config(
            "exact protocol mode supports only the single noise layer placement".into(),
        ));
    }
    // The encoder is the whole pre-noise circuit, so the boundary is its end.
    debug_assert_eq!(noise_boundary(&encoder), encoder.gates().len());
    for q in 0..n {
        engine.apply_pauli_channel(q, &noise.probs_for(q))?;
        if let Some(d) = noise.relaxation_delta() {
            engine.apply_amplitude_damping(q, d * (2.0 - d))?;
        }
    }

    let mut observables = code.stabilizers().to_vec();
    observables.push(code.logical_rep(0, basis)?);
    // corr[t] = tr(rho * prod_{j in t} O_j); the product of commuting
    // Hermitian Paulis is Hermitian, so each trace is real.
    let size = 1usize << (m + 1);
    let mut corr = vec![0.0f64; size];
    for (t, slot) in corr.iter_mut().enumerate() {
        let mut prod = crate::pauli::PauliOperator::identity(n);
        for (j, ob) in observables.iter().enumerate() {
            if (t >> j) & 1 == 1 {
                prod = prod.multiply(ob)?;
            }
        }
        let e = engine.pauli_expectation(&prod)?;
        debug_assert!(e.im.abs() < 1e-9, "non-real correlator {e}");
        *slot = e.re;
    }
    // p(v) = 2^{-(m+1)} sum_t (-1)^{v.t} corr[t]: a Walsh-Hadamard transform.
    let mut len = 1;
    while len < size {
        for block in (0..size).step_by(len * 2) {
            for i in block..block + len {
                let (a, b) = (corr[i], corr[i + len]);
                corr[i] = a + b;
                corr[i + len] = a - b;
            }
        }
        len *= 2;
    }
    let scale = 1.0 / size as f64;
    let syndrome_mask = (1u64 << m) - 1;
    for (v, &f) in corr.iter().enumerate() {
        let p = f * scale;
        debug_assert!(p > -1e-9, "negative outcome probability {p}");
        if p <= 0.0 {
            continue;
        }
        let v = v as u64;
        out.push(ShotRecord {
            basis,
            sign_in: sign,
            syndrome: v & syndrome_mask,
            sign_out: if (v >> m) & 1 == 0 { 1 } else { -1 },
            weight: p,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{five_one_three, two_qubit_bitflip};

    #[test]
    fn noiseless_runs_are_error_free() {
        let code = five_one_three();
        let noise = NoiseModel::noiseless();
        for engine in [ProtocolEngine::Tableau, ProtocolEngine::DenseExact] {
            let table = run_protocol(&code, &noise, engine, 600, 3, &six_state_bases()).unwrap();
            assert!(!table.records().is_empty());
            for r in table.records() {
                assert_eq!(r.syndrome, 0);
                assert_eq!(r.sign_out, r.sign_in);
            }
        }
    }

    #[test]
    fn exact_weights_form_a_distribution_per_basis() {
        let code = two_qubit_bitflip();
        let noise: NoiseModel = "iso:0.03;relax=0.1".parse().unwrap();
        let bases = six_state_bases();
        let table = run_protocol(&code, &noise, ProtocolEngine::DenseExact, 0, 0, &bases).unwrap();
        for &(basis, sign) in &bases {
            let total: f64 = table
                .records()
                .iter()
                .filter(|r| r.basis == basis && r.sign_in == sign)
                .map(|r| r.weight)
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "({basis:?}, {sign}): {total}");
        }
    }

    #[test]
    fn sampled_and_exact_syndrome_rates_agree() {
        let code = five_one_three();
        let noise = NoiseModel::isotropic(0.02).unwrap();
        let bases = [(Pauli::Z, 1)];
        let exact =
            run_protocol(&code, &noise, ProtocolEngine::DenseExact, 0, 0, &bases).unwrap();
        let p_zero_exact: f64 = exact
            .records()
            .iter()
            .filter(|r| r.syndrome == 0 && r.sign_out == 1)
            .map(|r| r.weight)
            .sum();
        let shots = 60_000;
        let sampled =
            run_protocol(&code, &noise, ProtocolEngine::Tableau, shots, 11, &bases).unwrap();
        let hits = sampled
            .records()
            .iter()
            .filter(|r| r.syndrome == 0 && r.sign_out == 1)
            .count();
        let rate = hits as f64 / shots as f64;
        let sigma = (p_zero_exact * (1.0 - p_zero_exact) / shots as f64).sqrt();
        assert!(
            (rate - p_zero_exact).abs() < 4.0 * sigma + 1e-9,
            "sampled {rate} vs exact {p_zero_exact}"
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let code = CheckMatrix::bare_qubit();
        let noise = NoiseModel::noiseless();
        assert!(run_protocol(&code, &noise, ProtocolEngine::Tableau, 10, 0, &[]).is_err());
        assert!(
            run_protocol(&code, &noise, ProtocolEngine::Tableau, 2, 0, &six_state_bases())
                .is_err()
        );
        assert!(
            run_protocol(&code, &noise, ProtocolEngine::Tableau, 10, 0, &[(Pauli::I, 1)]).is_err()
        );
        let relax: NoiseModel = "none;relax=0.2".parse().unwrap();
        assert!(
            run_protocol(&code, &relax, ProtocolEngine::Tableau, 60, 0, &plus_bases()).is_err()
        );
        assert!(
            run_protocol(&code, &relax, ProtocolEngine::DenseExact, 0, 0, &plus_bases()).is_ok()
        );
    }
}
