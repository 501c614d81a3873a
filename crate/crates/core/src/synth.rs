//! Circuit synthesis: encoders that prepare codewords, syndrome-extraction
//! blocks with optional routing onto a coupling graph, a greedy generator
//! re-chooser for constrained layouts, and the relaxation gadget.

use crate::circuit::{CliffordCircuit, Gate};
use crate::code::CheckMatrix;
use crate::error::{Error, Result};
use crate::layout::CouplingGraph;
use crate::pauli::{Pauli, PauliOperator};

/// The codeword a protocol run prepares: the joint +1 eigenstate of the
/// stabilizers, of sign * logical-P on logical qubit 0, and of logical Z on
/// every other logical qubit (which are pinned to keep the state unique).
pub fn target_generators(code: &CheckMatrix, basis: Pauli, sign: i8) -> Result<Vec<PauliOperator>> {
    if basis == Pauli::I {
        return Err(Error::Config("logical basis must be X, Y, or Z".into()));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::Config(format!("sign must be +1 or -1, got {sign}")));
    }
    let mut gens = code.stabilizers().to_vec();
    let mut probe = code.logical_rep(0, basis)?;
    if sign < 0 {
        probe.negate();
    }
    gens.push(probe);
    for j in 1..code.k() {
        gens.push(code.logical_z()[j].clone());
    }
    Ok(gens)
}

/// Builds a circuit mapping |0...0> to the state stabilized by `targets`
/// (n independent commuting signed Paulis on n qubits).
///
/// Works by reducing the generator list to {+Z_0, ..., +Z_{n-1}} with
/// recorded Clifford gates plus free row operations, then emitting the
/// recorded gates inverted and reversed.
fn state_preparation(targets: &[PauliOperator], n: usize) -> Result<CliffordCircuit> {
    let mut rows = targets.to_vec();
    if rows.len() != n {
        return Err(Error::InvalidCode(format!(
            "state preparation needs {n} generators, got {}",
            rows.len()
        )));
    }
    for r in &rows {
        if r.n() != n {
            return Err(Error::DimensionMismatch(r.n(), n));
        }
        r.sign()?;
    }
    let mut recorded: Vec<Gate> = Vec::new();
    let apply = |rows: &mut Vec<PauliOperator>, recorded: &mut Vec<Gate>, g: Gate| {
        for row in rows.iter_mut() {
            crate::circuit::conjugate_pauli(row, &g).expect("clifford gate");
        }
        recorded.push(g);
    };

    for q in 0..n {
        // Reduce row q modulo the finished rows {+Z_j, j < q}: commutation
        // with +Z_j already forces x_j = 0, so only z entries need clearing.
        // Then bring an operator with support on qubit q into position q.
        let found = (q..n).find(|&r| rows[r].x_bit(q) || rows[r].z_bit(q));
        let r = match found {
            Some(r) => r,
            None => {
                return Err(Error::InvalidCode(
                    "generators are not independent".into(),
                ))
            }
        };
        rows.swap(q, r);
        for j in 0..q {
            if rows[q].z_bit(j) {
                rows[q] = rows[q].multiply(&rows[j])?;
            }
        }
        match rows[q].letter(q) {
            Pauli::Z => apply(&mut rows, &mut recorded, Gate::H(q)),
            Pauli::Y => apply(&mut rows, &mut recorded, Gate::S(q)),
            _ => {}
        }
        debug_assert_eq!(rows[q].letter(q), Pauli::X);
        // Clear the rest of row q's support, turning it into +-X_q.
        for j in 0..n {
            if j == q {
                continue;
            }
            match rows[q].letter(j) {
                Pauli::I => {}
                Pauli::Y => {
                    apply(&mut rows, &mut recorded, Gate::S(j));
                    apply(&mut rows, &mut recorded, Gate::Cx(q, j));
                }
                Pauli::Z => {
                    apply(&mut rows, &mut recorded, Gate::H(j));
                    apply(&mut rows, &mut recorded, Gate::Cx(q, j));
                }
                Pauli::X => apply(&mut rows, &mut recorded, Gate::Cx(q, j)),
            }
        }
        apply(&mut rows, &mut recorded, Gate::H(q));
        if rows[q].sign()? < 0 {
            apply(&mut rows, &mut recorded, Gate::X(q));
        }
        debug_assert_eq!(rows[q], PauliOperator::single(n, q, Pauli::Z));
        // Keep later rows clear of the finished column (free row ops).
        for r in q + 1..n {
            if rows[r].z_bit(q) {
                rows[r] = rows[r].multiply(&rows[q])?;
            }
            debug_assert!(!rows[r].x_bit(q));
        }
    }

    let mut circuit = CliffordCircuit::new(n);
    for g in recorded.into_iter().rev() {
        let inverse = match g {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            other => other, // H, X, CX are involutions
        };
        circuit.push(inverse);
    }
    Ok(circuit)
}

/// Encoder circuit: prepares the codeword fixed by all stabilizers and by
/// sign * logical-P, starting from |0...0>.
pub fn synthesize_encoder(code: &CheckMatrix, basis: Pauli, sign: i8) -> Result<CliffordCircuit> {
    let targets = target_generators(code, basis, sign)?;
    state_preparation(&targets, code.n())
}

/// A syndrome-extraction block plus the bookkeeping the protocol needs:
/// which qubit carries which stabilizer's outcome, and where each circuit
/// qubit sits on the layout (identity when unconstrained).
#[derive(Clone, Debug)]
pub struct SyndromeExtraction {
    pub circuit: CliffordCircuit,
    /// ancilla[i] = circuit qubit measured for stabilizer i.
    pub ancilla: Vec<usize>,
}

/// Appends one ancilla per stabilizer and entangles it so that measuring
/// the ancilla in Z yields the generator's eigenvalue. All measurements
/// happen at the end of the block. On a constrained layout, the circuit
/// register is the whole vertex set (data qubit q on vertex q) and
/// non-adjacent two-qubit gates are routed with there-and-back SWAP chains.
pub fn synthesize_syndrome_extraction(
    code: &CheckMatrix,
    layout: Option<&CouplingGraph>,
) -> Result<SyndromeExtraction> {
    let n = code.n();
    let m = code.stabilizers().len();
    let (n_qubits, ancilla) = match layout {
        None => (n + m, (0..m).map(|i| n + i).collect::<Vec<_>>()),
        Some(g) => {
            if g.n_vertices() < n + m {
                return Err(Error::CapacityExceeded(n + m));
            }
            (g.n_vertices(), assign_ancillas(code, g)?)
        }
    };
    let mut circuit = CliffordCircuit::with_data(n_qubits, n);
    for (i, stab) in code.stabilizers().iter().enumerate() {
        entangle_observable(&mut circuit, layout, stab, n, ancilla[i])?;
    }
    for &a in &ancilla {
        circuit.measure_z(a);
    }
    Ok(SyndromeExtraction { circuit, ancilla })
}

/// Entangles ancilla `a` with the signed observable `op` (supported on the
/// first `n` qubits) so that a later Z measurement of `a` reads off the
/// observable's eigenvalue. Shared by syndrome extraction and the logical
/// readout of the benchmark protocol.
pub(crate) fn entangle_observable(
    circuit: &mut CliffordCircuit,
    layout: Option<&CouplingGraph>,
    op: &PauliOperator,
    n: usize,
    a: usize,
) -> Result<()> {
    let support: Vec<usize> = (0..n).filter(|&q| op.letter(q) != Pauli::I).collect();
    let all_z = support.iter().all(|&q| op.letter(q) == Pauli::Z);
    if all_z {
        // Parity accumulation: data-controlled CX onto the ancilla.
        for &q in &support {
            routed(circuit, layout, Gate::Cx(q, a));
        }
    } else {
        circuit.h(a);
        for &q in &support {
            match op.letter(q) {
                Pauli::X => routed(circuit, layout, Gate::Cx(a, q)),
                Pauli::Z => routed(circuit, layout, Gate::Cz(a, q)),
                Pauli::Y => {
                    // Controlled-Y = S_q CX S_q^dag, up to the phase
                    // that Z-basis statistics cannot see.
                    circuit.sdg(q);
                    routed(circuit, layout, Gate::Cx(a, q));
                    circuit.s(q);
                }
                Pauli::I => unreachable!(),
            }
        }
        circuit.h(a);
    }
    if op.sign()? < 0 {
        circuit.x(a);
    }
    Ok(())
}

/// Greedy deterministic ancilla placement: each stabilizer's ancilla takes
/// the free vertex with the smallest total distance to the generator's
/// support (lowest vertex id on ties).
fn assign_ancillas(code: &CheckMatrix, g: &CouplingGraph) -> Result<Vec<usize>> {
    let n = code.n();
    let mut used = vec![false; g.n_vertices()];
    used.iter_mut().take(n).for_each(|u| *u = true);
    let mut out = Vec::with_capacity(code.stabilizers().len());
    for stab in code.stabilizers() {
        let support: Vec<usize> = (0..n).filter(|&q| stab.letter(q) != Pauli::I).collect();
        let best = (0..g.n_vertices())
            .filter(|&v| !used[v])
            .min_by_key(|&v| (support.iter().map(|&q| g.distance(v, q)).sum::<usize>(), v))
            .ok_or(Error::CapacityExceeded(n + code.stabilizers().len()))?;
        used[best] = true;
        out.push(best);
    }
    Ok(out)
}

/// Pushes a two-qubit gate, SWAP-routing its first operand along the
/// shortest path when the layout does not offer the edge directly. The
/// SWAP chain is undone afterwards, so the embedding is restored.
fn routed(circuit: &mut CliffordCircuit, layout: Option<&CouplingGraph>, gate: Gate) {
    let (a, b) = match gate.operands() {
        (a, Some(b)) => (a, b),
        _ => {
            circuit.push(gate);
            return;
        }
    };
    let g = match layout {
        Some(g) if !g.has_edge(a, b) => g,
        _ => {
            circuit.push(gate);
            return;
        }
    };
    let path = g.shortest_path(a, b);
    // Walk a's payload down the path until adjacent to b.
    for w in path.windows(2).take(path.len() - 2) {
        circuit.swap(w[0], w[1]);
    }
    let near = path[path.len() - 2];
    let moved = match gate {
        Gate::Cx(..) => Gate::Cx(near, b),
        Gate::Cz(..) => Gate::Cz(near, b),
        Gate::Swap(..) => Gate::Swap(near, b),
        Gate::PSwap(_, _, t) => Gate::PSwap(near, b, t),
        _ => unreachable!("one-qubit gates are never routed"),
    };
    circuit.push(moved);
    for w in path.windows(2).take(path.len() - 2).rev() {
        circuit.swap(w[0], w[1]);
    }
}

/// Greedily re-chooses stabilizer generators to cut the total inter-qubit
/// distance on `layout`: repeatedly tries replacing g_i with g_i * g_j and
/// accepts the first strict improvement, until no move helps. The
/// stabilizer group is unchanged (certified inside `with_stabilizers`).
pub fn optimize_generators(code: &CheckMatrix, layout: &CouplingGraph) -> Result<CheckMatrix> {
    let mut gens = code.stabilizers().to_vec();
    let mut cost = layout.set_cost(&gens);
    let m = gens.len();
    'outer: loop {
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let candidate = gens[i].multiply(&gens[j])?;
                let new_cost = cost - layout.generator_cost(&gens[i])
                    + layout.generator_cost(&candidate);
                if new_cost < cost {
                    gens[i] = candidate;
                    cost = new_cost;
                    continue 'outer;
                }
            }
        }
        break;
    }
    code.with_stabilizers(gens)
}

/// The dissipative gadget: a freshly reset auxiliary partially swapped
/// into the target. Qubit 0 is the target, qubit 1 the auxiliary; theta
/// is chosen so the traced-out channel matches the relaxation map of
/// strength `delta`.
pub fn relaxation_gadget(delta: f64) -> Result<CliffordCircuit> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!("delta must lie in [0,1], got {delta}")));
    }
    let theta = f64::asin((delta / 2.0).sqrt());
    let mut c = CliffordCircuit::with_data(2, 1);
    c.reset(1);
    c.pswap(0, 1, theta);
    Ok(c)
}
