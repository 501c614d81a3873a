//! Pluggable execution boundary: circuits run against a [`Backend`] that
//! declares its capabilities, size cap, and connectivity up front, so the
//! rest of the system never cares whether a job ran on a local simulator or
//! a (mocked) remote device.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::CliffordCircuit;
use crate::dense::{run_dense_via, RelaxationPath, DENSE_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::eval::FidelityModel;
use crate::noise::NoiseModel;
use crate::pauli::MAX_QUBITS;
use crate::tableau::{run_tableau, ExecutionResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Capability {
    /// Clifford circuits under pure Pauli noise.
    CliffordOnly,
    /// Arbitrary supported gates and noise on a density matrix.
    Dense,
    /// Relaxation realized by the partial-swap gadget on an aux qubit.
    RelaxationGadget,
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Capability::CliffordOnly => "clifford-only",
            Capability::Dense => "dense",
            Capability::RelaxationGadget => "relaxation-gadget",
        })
    }
}

/// Which qubit pairs may host two-qubit gates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    AllToAll,
    Graph(CouplingGraph),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingGraph {
    /// Undirected edges, stored with the smaller endpoint first.
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingGraph {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        CouplingGraph {
            edges: edges
                .into_iter()
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
        }
    }

    /// Nearest-neighbor chain 0-1-2-...-(n-1).
    pub fn line(n: usize) -> Self {
        CouplingGraph::new((1..n).map(|i| (i - 1, i)))
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BackendDescriptor {
    pub name: String,
    pub capabilities: BTreeSet<Capability>,
    pub max_qubits: usize,
    pub connectivity: Connectivity,
    /// Rough throughput hint for schedulers and reports.
    pub shots_per_sec: f64,
}

impl BackendDescriptor {
    pub fn new(
        name: impl Into<String>,
        capabilities: impl IntoIterator<Item = Capability>,
        max_qubits: usize,
        connectivity: Connectivity,
        shots_per_sec: f64,
    ) -> Result<Self> {
        let capabilities: BTreeSet<Capability> = capabilities.into_iter().collect();
        if capabilities.is_empty() {
            return Err(Error::Config("backend must declare at least one capability".into()));
        }
        Ok(BackendDescriptor {
            name: name.into(),
            capabilities,
            max_qubits,
            connectivity,
            shots_per_sec,
        })
    }

    fn reject(&self, reason: impl Into<String>) -> Error {
        Error::Rejected { backend: self.name.clone(), reason: reason.into() }
    }

    /// Admission control: capability, size, and connectivity checks shared
    /// by every backend. Connectivity violations list the offending gates.
    pub fn admit(&self, circuit: &CliffordCircuit, noise: &NoiseModel) -> Result<()> {
        let caps = &self.capabilities;
        if !circuit.is_clifford() && !caps.contains(&Capability::Dense) {
            return Err(self.reject("circuit contains non-Clifford gates"));
        }
        if !noise.is_pauli_only()
            && !caps.contains(&Capability::Dense)
            && !caps.contains(&Capability::RelaxationGadget)
        {
            return Err(self.reject("noise model includes relaxation"));
        }
        if circuit.is_clifford()
            && noise.is_pauli_only()
            && !caps.contains(&Capability::CliffordOnly)
            && !caps.contains(&Capability::Dense)
        {
            return Err(self.reject("backend cannot run Clifford sampling jobs"));
        }
        if circuit.n_qubits() > self.max_qubits {
            return Err(self.reject(format!(
                "{} qubits over the {}-qubit cap",
                circuit.n_qubits(),
                self.max_qubits
            )));
        }
        if let Connectivity::Graph(graph) = &self.connectivity {
            let offending: Vec<String> = circuit
                .gates()
                .iter()
                .filter_map(|g| match g.operands() {
                    (a, Some(b)) if !graph.allows(a, b) => Some(g.to_string()),
                    _ => None,
                })
                .collect();
            if !offending.is_empty() {
                return Err(self.reject(format!(
                    "two-qubit gates off the coupling graph: {}",
                    offending.join(", ")
                )));
            }
        }
        Ok(())
    }
}

pub trait Backend {
    fn descriptor(&self) -> &BackendDescriptor;

    /// Raw execution; callers go through [`Backend::run`] so admission
    /// control always happens first.
    fn execute(
        &self,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> Result<ExecutionResult>;

    fn run(
        &self,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> Result<ExecutionResult> {
        self.descriptor().admit(circuit, noise)?;
        self.execute(circuit, noise, shots, seed)
    }
}

/// Local stabilizer-tableau sampler.
pub struct TableauBackend {
    descriptor: BackendDescriptor,
}

impl TableauBackend {
    pub fn new() -> Self {
        let descriptor = BackendDescriptor::new(
            "tableau",
            [Capability::CliffordOnly],
            MAX_QUBITS,
            Connectivity::AllToAll,
            1e6,
        )
        .unwrap();
        TableauBackend { descriptor }
    }

    pub fn with_connectivity(mut self, graph: CouplingGraph) -> Self {
        self.descriptor.connectivity = Connectivity::Graph(graph);
        self
    }
}

impl Default for TableauBackend {
    fn default() -> Self {
        TableauBackend::new()
    }
}

impl Backend for TableauBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn execute(
        &self,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> Result<ExecutionResult> {
        run_tableau(circuit, noise, shots, seed)
    }
}

/// Local density-matrix sampler; handles relaxation via the channel map or
/// the partial-swap gadget.
pub struct DenseBackend {
    descriptor: BackendDescriptor,
    path: RelaxationPath,
}

impl DenseBackend {
    pub fn new() -> Self {
        let descriptor = BackendDescriptor::new(
            "dense",
            [Capability::CliffordOnly, Capability::Dense, Capability::RelaxationGadget],
            DENSE_QUBIT_CAP,
            Connectivity::AllToAll,
            1e4,
        )
        .unwrap();
        DenseBackend { descriptor, path: RelaxationPath::Channel }
    }

    pub fn with_path(mut self, path: RelaxationPath) -> Self {
        self.path = path;
        // The gadget borrows one aux qubit from the engine's budget.
        self.descriptor.max_qubits = match path {
            RelaxationPath::Channel => DENSE_QUBIT_CAP,
            RelaxationPath::Gadget => DENSE_QUBIT_CAP - 1,
        };
        self
    }
}

impl Default for DenseBackend {
    fn default() -> Self {
        DenseBackend::new()
    }
}

impl Backend for DenseBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn execute(
        &self,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> Result<ExecutionResult> {
        run_dense_via(circuit, noise, shots, seed, self.path)
    }
}

/// Stand-in for a remote device: runs locally, then corrupts each shot with
/// probability `1 - F_ex` (the modeled machine fidelity for the submitted
/// circuit), replacing it with a uniform random bitstring. Optional latency
/// emulates the round trip.
pub struct MockRemoteBackend {
    descriptor: BackendDescriptor,
    fidelity: FidelityModel,
    latency: Duration,
}

impl MockRemoteBackend {
    pub fn new(fidelity: FidelityModel) -> Self {
        let descriptor = BackendDescriptor::new(
            "mock-remote",
            [Capability::CliffordOnly, Capability::Dense],
            DENSE_QUBIT_CAP,
            Connectivity::AllToAll,
            500.0,
        )
        .unwrap();
        MockRemoteBackend { descriptor, fidelity, latency: Duration::ZERO }
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    pub fn fidelity_for(&self, circuit: &CliffordCircuit) -> f64 {
        self.fidelity.predict(&circuit.counts()).clamp(0.0, 1.0)
    }
}

impl Backend for MockRemoteBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn execute(
        &self,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> Result<ExecutionResult> {
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        let mut result = if circuit.is_clifford() && noise.is_pauli_only() {
            run_tableau(circuit, noise, shots, seed)?
        } else {
            run_dense_via(circuit, noise, shots, seed, RelaxationPath::Channel)?
        };
        let f = self.fidelity_for(circuit);
        // Separate stream from the engine's so corruption never rewinds the
        // underlying sample sequence.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6f_636b_7265_6d6f);
        let mask = if result.n_bits == 64 { u64::MAX } else { (1u64 << result.n_bits) - 1 };
        for shot in &mut result.shots {
            if rng.gen_bool(1.0 - f) {
                *shot = rng.gen::<u64>() & mask;
            }
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CliffordCircuit;
    use crate::noise::NoiseModel;

    fn bell_circuit() -> CliffordCircuit {
        let mut c = CliffordCircuit::new(2);
        c.h(0).cx(0, 1).measure_z(0).measure_z(1);
        c
    }

    #[test]
    fn capability_gates_are_enforced() {
        let tableau = TableauBackend::new();
        let dense = DenseBackend::new();
        let mut pswap = CliffordCircuit::new(2);
        pswap.pswap(0, 1, 0.3).measure_z(0);
        let quiet = NoiseModel::noiseless();
        let relaxing = NoiseModel::noiseless().with_relaxation(0.2).unwrap();

        assert!(matches!(
            tableau.run(&pswap, &quiet, 10, 1),
            Err(Error::Rejected { .. })
        ));
        assert!(matches!(
            tableau.run(&bell_circuit(), &relaxing, 10, 1),
            Err(Error::Rejected { .. })
        ));
        assert!(dense.run(&pswap, &quiet, 10, 1).is_ok());
        assert!(dense.run(&bell_circuit(), &relaxing, 10, 1).is_ok());
    }

    #[test]
    fn coupling_graph_rejections_name_the_gates() {
        let backend = TableauBackend::new().with_connectivity(CouplingGraph::line(3));
        let quiet = NoiseModel::noiseless();
        let mut ok = CliffordCircuit::new(3);
        ok.cx(0, 1).cz(2, 1).measure_z(2);
        assert!(backend.run(&ok, &quiet, 5, 1).is_ok());

        let mut bad = CliffordCircuit::new(3);
        bad.cx(0, 2).measure_z(2);
        let err = backend.run(&bad, &quiet, 5, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("CX 0 2"), "unhelpful rejection: {msg}");
    }

    #[test]
    fn local_backends_match_the_engines_bit_for_bit() {
        let noise = NoiseModel::isotropic(0.03).unwrap();
        let circuit = bell_circuit();
        let via_backend = TableauBackend::new().run(&circuit, &noise, 500, 77).unwrap();
        let direct = run_tableau(&circuit, &noise, 500, 77).unwrap();
        assert_eq!(via_backend, direct);

        let via_backend = DenseBackend::new().run(&circuit, &noise, 500, 77).unwrap();
        let direct = crate::dense::run_dense(&circuit, &noise, 500, 77).unwrap();
        assert_eq!(via_backend, direct);
    }

    #[test]
    fn mock_remote_corrupts_at_the_modeled_rate() {
        // One idle qubit measured in |0>: every clean shot reads 0, so the
        // observed 1-rate estimates (1 - F)/2.
        let mut circuit = CliffordCircuit::new(1);
        circuit.measure_z(0);
        let f = 0.7;
        // predict() = exp(c_q * n) with one qubit and no gates.
        let model = FidelityModel { c_q: f64::ln(f), c_1: 0.0, c_2: 0.0, alpha: 1.0, residual: 0.0 };
        let backend = MockRemoteBackend::new(model);
        assert!((backend.fidelity_for(&circuit) - f).abs() < 1e-12);
        let shots = 40_000;
        let result = backend.run(&circuit, &NoiseModel::noiseless(), shots, 5).unwrap();
        let ones = result.shots.iter().filter(|&&s| s == 1).count() as f64;
        let expect = (1.0 - f) / 2.0 * shots as f64;
        let sigma = (shots as f64 * (1.0 - f) / 2.0 * (1.0 - (1.0 - f) / 2.0)).sqrt();
        assert!(
            (ones - expect).abs() < 4.0 * sigma,
            "{ones} corrupted ones vs {expect} expected"
        );
    }

    #[test]
    fn descriptor_requires_a_capability() {
        assert!(BackendDescriptor::new("hollow", [], 4, Connectivity::AllToAll, 1.0).is_err());
    }
}
