//! Gate-level circuits: the Clifford gate set, Z measurements, resets, and
//! the single parametrized two-qubit interaction used by the relaxation
//! gadget.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// One circuit element. Qubit operands index into the circuit's register.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    MeasureZ(usize),
    Reset(usize),
    /// exp(-i theta (XX + YY)): swaps |01> and |10> amplitudes partially.
    /// Not a Clifford gate; only the dense engine executes it.
    PSwap(usize, usize, f64),
}

impl Gate {
    pub fn operands(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::MeasureZ(q)
            | Gate::Reset(q) => (q, None),
            Gate::Cx(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) | Gate::PSwap(a, b, _) => {
                (a, Some(b))
            }
        }
    }

    /// True for the unitary members of the gate set.
    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::MeasureZ(_) | Gate::Reset(_))
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx(..) | Gate::Cz(..) | Gate::Swap(..) | Gate::PSwap(..))
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::PSwap(..))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::S(_) => "S",
            Gate::Sdg(_) => "SDG",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Cx(..) => "CX",
            Gate::Cz(..) => "CZ",
            Gate::Swap(..) => "SWAP",
            Gate::MeasureZ(_) => "MEASURE_Z",
            Gate::Reset(_) => "RESET",
            Gate::PSwap(..) => "PSWAP",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.operands();
        write!(f, "{} {}", self.name(), a)?;
        if let Some(b) = b {
            write!(f, " {}", b)?;
        }
        if let Gate::PSwap(_, _, theta) = self {
            write!(f, " {}", theta)?;
        }
        Ok(())
    }
}

/// Conjugates a Pauli operator by a Clifford unitary gate, in place.
/// Measurement, reset, and the partial swap have no Pauli conjugation rule.
pub fn conjugate_pauli(op: &mut PauliOperator, gate: &Gate) -> Result<()> {
    match *gate {
        Gate::H(q) => op.conj_h(q),
        Gate::S(q) => op.conj_s(q),
        Gate::Sdg(q) => op.conj_sdg(q),
        Gate::X(q) => op.conj_x(q),
        Gate::Y(q) => op.conj_y(q),
        Gate::Z(q) => op.conj_z(q),
        Gate::Cx(c, t) => op.conj_cx(c, t),
        Gate::Cz(a, b) => op.conj_cz(a, b),
        Gate::Swap(a, b) => op.conj_swap(a, b),
        Gate::MeasureZ(_) | Gate::Reset(_) | Gate::PSwap(..) => {
            return Err(Error::UnsupportedGate(gate.name().to_string()));
        }
    }
    Ok(())
}

/// Resource tally of a circuit: qubit count, one-qubit unitaries, two-qubit
/// unitaries. Measurements and resets are not gates for this purpose.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateCounts {
    pub n_q: usize,
    pub n_1: usize,
    pub n_2: usize,
}

/// An ordered gate list over a fixed register. The first `n_data` qubits
/// are the data register; the rest are ancillas added by synthesis.
/// `noise_after` optionally pins the gate index where a single-layer noise
/// model fires; without it, engines fall back to a structural heuristic.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordCircuit {
    n_qubits: usize,
    n_data: usize,
    gates: Vec<Gate>,
    noise_after: Option<usize>,
}

impl CliffordCircuit {
    pub fn new(n_qubits: usize) -> Self {
        CliffordCircuit { n_qubits, n_data: n_qubits, gates: vec![], noise_after: None }
    }

    pub fn with_data(n_qubits: usize, n_data: usize) -> Self {
        assert!(n_data <= n_qubits);
        CliffordCircuit { n_qubits, n_data, gates: vec![], noise_after: None }
    }

    /// Marks the current end of the gate list as the noise injection point.
    pub fn mark_noise_boundary(&mut self) {
        self.noise_after = Some(self.gates.len());
    }

    pub fn noise_after(&self) -> Option<usize> {
        self.noise_after
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) {
        let (a, b) = gate.operands();
        assert!(a < self.n_qubits, "operand {a} out of range for {} qubits", self.n_qubits);
        if let Some(b) = b {
            assert!(b < self.n_qubits, "operand {b} out of range for {} qubits", self.n_qubits);
            assert!(a != b, "two-qubit gate needs distinct operands");
        }
        self.gates.push(gate);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        for g in gates {
            self.push(g);
        }
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Gate::H(q));
        self
    }
    pub fn s(&mut self, q: usize) -> &mut Self {
        self.push(Gate::S(q));
        self
    }
    pub fn sdg(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Sdg(q));
        self
    }
    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(Gate::X(q));
        self
    }
    pub fn y(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Y(q));
        self
    }
    pub fn z(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Z(q));
        self
    }
    pub fn cx(&mut self, c: usize, t: usize) -> &mut Self {
        self.push(Gate::Cx(c, t));
        self
    }
    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Gate::Cz(a, b));
        self
    }
    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Gate::Swap(a, b));
        self
    }
    pub fn measure_z(&mut self, q: usize) -> &mut Self {
        self.push(Gate::MeasureZ(q));
        self
    }
    pub fn reset(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Reset(q));
        self
    }
    pub fn pswap(&mut self, a: usize, b: usize, theta: f64) -> &mut Self {
        self.push(Gate::PSwap(a, b, theta));
        self
    }

    /// Tallies the resource counts from the gate list.
    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts { n_q: self.n_qubits, n_1: 0, n_2: 0 };
        for g in &self.gates {
            if !g.is_unitary() {
                continue;
            }
            if g.is_two_qubit() {
                c.n_2 += 1;
            } else {
                c.n_1 += 1;
            }
        }
        c
    }

    pub fn n_measurements(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::MeasureZ(_))).count()
    }

    /// True when every gate is Clifford (no partial swap), so the tableau
    /// engine can execute it.
    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    /// Content hash of the canonical text form, hex-encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    /// Canonical text form: a `QUBITS <total> <data>` header, then one gate
    /// per line. Floating-point parameters print in shortest round-trip
    /// form, so parsing back is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {} {}\n", self.n_qubits, self.n_data);
        if let Some(b) = self.noise_after {
            out.push_str(&format!("NOISE_AFTER {b}\n"));
        }
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit file".into()))?;
        let mut hp = header.split_whitespace();
        if hp.next() != Some("QUBITS") {
            return Err(Error::Parse(format!("expected QUBITS header, got {header:?}")));
        }
        let n_qubits: usize = hp
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad qubit count".into()))?;
        let n_data: usize = match hp.next() {
            Some(t) => t.parse().map_err(|_| Error::Parse("bad data count".into()))?,
            None => n_qubits,
        };
        if n_data > n_qubits {
            return Err(Error::Parse("data count exceeds qubit count".into()));
        }
        let mut circuit = CliffordCircuit::with_data(n_qubits, n_data);
        for line in lines {
            let mut parts = line.split_whitespace();
            let name = parts.next().unwrap();
            if name == "NOISE_AFTER" {
                let idx: usize = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse("bad NOISE_AFTER index".into()))?;
                circuit.noise_after = Some(idx);
                continue;
            }
            let mut operand = |what: &str| -> Result<usize> {
                let tok = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("{name}: missing {what}")))?;
                let q: usize =
                    tok.parse().map_err(|_| Error::Parse(format!("{name}: bad {what} {tok:?}")))?;
                if q >= n_qubits {
                    return Err(Error::QubitOutOfRange { index: q, n: n_qubits });
                }
                Ok(q)
            };
            let gate = match name {
                "H" => Gate::H(operand("qubit")?),
                "S" => Gate::S(operand("qubit")?),
                "SDG" => Gate::Sdg(operand("qubit")?),
                "X" => Gate::X(operand("qubit")?),
                "Y" => Gate::Y(operand("qubit")?),
                "Z" => Gate::Z(operand("qubit")?),
                "CX" => Gate::Cx(operand("control")?, operand("target")?),
                "CZ" => Gate::Cz(operand("qubit")?, operand("qubit")?),
                "SWAP" => Gate::Swap(operand("qubit")?, operand("qubit")?),
                "MEASURE_Z" => Gate::MeasureZ(operand("qubit")?),
                "RESET" => Gate::Reset(operand("qubit")?),
                "PSWAP" => {
                    let a = operand("qubit")?;
                    let b = operand("qubit")?;
                    let tok = parts
                        .next()
                        .ok_or_else(|| Error::Parse("PSWAP: missing angle".into()))?;
                    let theta: f64 =
                        tok.parse().map_err(|_| Error::Parse(format!("PSWAP: bad angle {tok:?}")))?;
                    Gate::PSwap(a, b, theta)
                }
                other => return Err(Error::Parse(format!("unknown gate {other:?}"))),
            };
            if let (a, Some(b)) = gate.operands() {
                if a == b {
                    return Err(Error::Parse(format!("{name}: operands must differ")));
                }
            }
            if let Some(extra) = parts.next() {
                return Err(Error::Parse(format!("{name}: trailing token {extra:?}")));
            }
            circuit.gates.push(gate);
        }
        if let Some(b) = circuit.noise_after {
            if b > circuit.gates.len() {
                return Err(Error::Parse(format!(
                    "NOISE_AFTER {b} exceeds gate count {}",
                    circuit.gates.len()
                )));
            }
        }
        Ok(circuit)
    }
}
