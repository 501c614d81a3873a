//! Run-record persistence: an append-only job index plus content-addressed
//! result files, so every evaluation is replayable bit-for-bit from disk.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::Backend;
use crate::circuit::CliffordCircuit;
use crate::code::CheckMatrix;
use crate::error::{Error, Result};
use crate::eval::{ShotRecord, ShotTable};
use crate::noise::NoiseModel;
use crate::pauli::Pauli;
use crate::protocol::{assemble_protocol_circuit, records_from_shots};
use crate::tableau::ExecutionResult;

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Submitted,
    Completed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    /// Hash of the canonical job spec; identical submissions share an id.
    pub id: String,
    pub backend: String,
    pub circuit_hash: String,
    pub noise: String,
    pub shots: usize,
    pub seed: u64,
    pub status: JobStatus,
    /// Content hash of the result file, set on completion.
    pub result_hash: Option<String>,
    pub error: Option<String>,
    /// Unix seconds; populated only when the store opts into wall-clock
    /// timestamps, so default runs stay byte-deterministic.
    pub submitted_at: Option<u64>,
    pub completed_at: Option<u64>,
}

/// One directory per run: `index.jsonl` (append-only; the latest line per
/// job id wins) and `results/<sha256>.json`.
pub struct JobStore {
    dir: PathBuf,
    index: HashMap<String, JobRecord>,
    order: Vec<String>,
    timestamps: bool,
}

impl JobStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("results"))?;
        let mut store =
            JobStore { dir, index: HashMap::new(), order: vec![], timestamps: false };
        let index_path = store.index_path();
        if index_path.exists() {
            for (lineno, line) in fs::read_to_string(&index_path)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: JobRecord = serde_json::from_str(line).map_err(|e| {
                    Error::Integrity(format!(
                        "corrupt index line {} in {}: {e}",
                        lineno + 1,
                        index_path.display()
                    ))
                })?;
                store.remember(record);
            }
        }
        Ok(store)
    }

    /// Stamp records with wall-clock times. Off by default: deterministic
    /// runs should not differ by when they ran.
    pub fn with_timestamps(mut self, on: bool) -> Self {
        self.timestamps = on;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join("index.jsonl")
    }

    fn result_path(&self, hash: &str) -> PathBuf {
        self.dir.join("results").join(format!("{hash}.json"))
    }

    fn now(&self) -> Option<u64> {
        self.timestamps.then(|| {
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        })
    }

    fn remember(&mut self, record: JobRecord) {
        if !self.index.contains_key(&record.id) {
            self.order.push(record.id.clone());
        }
        self.index.insert(record.id.clone(), record);
    }

    fn append(&mut self, record: JobRecord) -> Result<()> {
        let mut file =
            OpenOptions::new().create(true).append(true).open(self.index_path())?;
        let mut line = serde_json::to_string(&record)?;
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.flush()?;
        self.remember(record);
        Ok(())
    }

    /// Canonical job identity: every input that affects the result.
    pub fn job_id(
        backend: &str,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> String {
        let spec = format!(
            "backend {backend}\nshots {shots}\nseed {seed}\nnoise {}\n{}",
            noise.to_spec(),
            circuit.to_text()
        );
        sha256_hex(spec.as_bytes())
    }

    pub fn record(&self, id: &str) -> Option<&JobRecord> {
        self.index.get(id)
    }

    /// All records, in first-submission order.
    pub fn records(&self) -> impl Iterator<Item = &JobRecord> {
        self.order.iter().filter_map(|id| self.index.get(id))
    }

    /// Runs a job through `backend`, persisting the record before the
    /// results and the results before the completion record. A completed
    /// identical job (same canonical spec) with intact results is returned
    /// as-is instead of re-running.
    pub fn submit(
        &mut self,
        backend: &dyn Backend,
        circuit: &CliffordCircuit,
        noise: &NoiseModel,
        shots: usize,
        seed: u64,
    ) -> Result<JobRecord> {
        backend.descriptor().admit(circuit, noise)?;
        let id = JobStore::job_id(&backend.descriptor().name, circuit, noise, shots, seed);
        if let Some(existing) = self.index.get(&id) {
            if existing.status == JobStatus::Completed && self.replay(&id).is_ok() {
                return Ok(existing.clone());
            }
        }
        let mut record = JobRecord {
            id: id.clone(),
            backend: backend.descriptor().name.clone(),
            circuit_hash: circuit.hash(),
            noise: noise.to_spec(),
            shots,
            seed,
            status: JobStatus::Submitted,
            result_hash: None,
            error: None,
            submitted_at: self.now(),
            completed_at: None,
        };
        self.append(record.clone())?;
        let result = match backend.execute(circuit, noise, shots, seed) {
            Ok(r) => r,
            Err(e) => {
                record.status = JobStatus::Failed;
                record.error = Some(e.to_string());
                record.completed_at = self.now();
                self.append(record)?;
                return Err(e);
            }
        };
        let bytes = serde_json::to_vec(&result)?;
        let hash = sha256_hex(&bytes);
        let path = self.result_path(&hash);
        if !path.exists() {
            // Atomic publish: never expose a half-written result file.
            let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
            fs::write(&tmp, &bytes)?;
            fs::rename(&tmp, &path)?;
        }
        record.status = JobStatus::Completed;
        record.result_hash = Some(hash);
        record.completed_at = self.now();
        self.append(record.clone())?;
        Ok(record)
    }

    /// Reads a completed job's results back, verifying the content hash.
    pub fn replay(&self, id: &str) -> Result<ExecutionResult> {
        let record = self.index.get(id).ok_or_else(|| Error::UnknownJob(id.into()))?;
        let hash = match (&record.status, &record.result_hash) {
            (JobStatus::Completed, Some(h)) => h,
            _ => {
                return Err(Error::Integrity(format!(
                    "job {id} has status {:?} and no results",
                    record.status
                )))
            }
        };
        let path = self.result_path(hash);
        let bytes = fs::read(&path).map_err(|e| {
            Error::Integrity(format!("result file {} unreadable: {e}", path.display()))
        })?;
        let actual = sha256_hex(&bytes);
        if actual != *hash {
            return Err(Error::Integrity(format!(
                "result file {} hashes to {actual}, index says {hash}",
                path.display()
            )));
        }
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// Runs the benchmark protocol with every per-basis circuit submitted as a
/// persisted job, then rebuilds the shot table from the stored results, so
/// the returned table is exactly what a later replay reconstructs.
pub fn run_protocol_via(
    store: &mut JobStore,
    backend: &dyn Backend,
    code: &CheckMatrix,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
    bases: &[(Pauli, i8)],
) -> Result<(ShotTable, Vec<JobRecord>)> {
    if bases.is_empty() {
        return Err(Error::Config("no preparation bases given".into()));
    }
    let per_basis = shots / bases.len();
    if per_basis == 0 {
        return Err(Error::Config(format!("{shots} shots cannot cover {} bases", bases.len())));
    }
    let m = code.stabilizers().len();
    let mut records: Vec<ShotRecord> = Vec::new();
    let mut jobs = Vec::with_capacity(bases.len());
    for (b, &(basis, sign)) in bases.iter().enumerate() {
        let circuit = assemble_protocol_circuit(code, basis, sign)?;
        let basis_seed = seed ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let job = store.submit(backend, &circuit, noise, per_basis, basis_seed)?;
        let result = store.replay(&job.id)?;
        records_from_shots(&result, m, basis, sign, &mut records);
        jobs.push(job);
    }
    Ok((ShotTable::new(m, records), jobs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Backend, TableauBackend};
    use crate::code::two_qubit_bitflip;
    use crate::eval::evaluate;
    use crate::protocol::{run_protocol, six_state_bases, ProtocolEngine};
    use std::cell::Cell;

    /// Wrapper that counts real executions, to observe dedup.
    struct Counting<B> {
        inner: B,
        calls: Cell<usize>,
    }

    impl<B: Backend> Backend for Counting<B> {
        fn descriptor(&self) -> &crate::backend::BackendDescriptor {
            self.inner.descriptor()
        }

        fn execute(
            &self,
            circuit: &CliffordCircuit,
            noise: &NoiseModel,
            shots: usize,
            seed: u64,
        ) -> Result<ExecutionResult> {
            self.calls.set(self.calls.get() + 1);
            self.inner.execute(circuit, noise, shots, seed)
        }
    }

    fn bell_circuit() -> CliffordCircuit {
        let mut c = CliffordCircuit::new(2);
        c.h(0).cx(0, 1).measure_z(0).measure_z(1);
        c
    }

    #[test]
    fn submit_then_replay_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = JobStore::open(dir.path()).unwrap();
        let backend = TableauBackend::new();
        let noise = NoiseModel::isotropic(0.02).unwrap();
        let job = store.submit(&backend, &bell_circuit(), &noise, 300, 9).unwrap();
        assert_eq!(job.status, JobStatus::Completed);
        assert_eq!(job.circuit_hash, bell_circuit().hash());
        assert!(job.submitted_at.is_none(), "timestamps are opt-in");
        let replayed = store.replay(&job.id).unwrap();
        let direct = backend.run(&bell_circuit(), &noise, 300, 9).unwrap();
        assert_eq!(replayed, direct);
        // Index carries the submitted line then the completed line.
        let text = fs::read_to_string(store.index_path()).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn identical_submissions_reuse_the_stored_result() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = JobStore::open(dir.path()).unwrap();
        let backend = Counting { inner: TableauBackend::new(), calls: Cell::new(0) };
        let noise = NoiseModel::isotropic(0.02).unwrap();
        let first = store.submit(&backend, &bell_circuit(), &noise, 200, 4).unwrap();
        let second = store.submit(&backend, &bell_circuit(), &noise, 200, 4).unwrap();
        assert_eq!(backend.calls.get(), 1, "dedup must skip the re-run");
        assert_eq!(first, second);
        // A different seed is a different job.
        let third = store.submit(&backend, &bell_circuit(), &noise, 200, 5).unwrap();
        assert_eq!(backend.calls.get(), 2);
        assert_ne!(first.id, third.id);
    }

    #[test]
    fn replay_flags_unknown_missing_and_tampered_jobs() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = JobStore::open(dir.path()).unwrap();
        let backend = TableauBackend::new();
        let noise = NoiseModel::noiseless();
        assert!(matches!(store.replay("no-such-job"), Err(Error::UnknownJob(_))));

        let job = store.submit(&backend, &bell_circuit(), &noise, 50, 1).unwrap();
        let path = store.result_path(job.result_hash.as_ref().unwrap());
        let original = fs::read(&path).unwrap();
        fs::write(&path, b"{\"n_bits\":2,\"shots\":[0]}").unwrap();
        assert!(matches!(store.replay(&job.id), Err(Error::Integrity(_))));
        fs::remove_file(&path).unwrap();
        assert!(matches!(store.replay(&job.id), Err(Error::Integrity(_))));
        // Restoring the bytes heals the store.
        fs::write(&path, original).unwrap();
        assert!(store.replay(&job.id).is_ok());
    }

    #[test]
    fn store_reloads_its_index_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let noise = NoiseModel::isotropic(0.01).unwrap();
        let id = {
            let mut store = JobStore::open(dir.path()).unwrap();
            store.submit(&TableauBackend::new(), &bell_circuit(), &noise, 100, 2).unwrap().id
        };
        let store = JobStore::open(dir.path()).unwrap();
        assert_eq!(store.records().count(), 1);
        assert_eq!(store.record(&id).unwrap().status, JobStatus::Completed);
        assert_eq!(store.replay(&id).unwrap().n_shots(), 100);
    }

    #[test]
    fn corrupt_index_lines_are_integrity_errors() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("index.jsonl"), "not json\n").unwrap();
        fs::create_dir_all(dir.path().join("results")).unwrap();
        assert!(matches!(JobStore::open(dir.path()), Err(Error::Integrity(_))));
    }

    #[test]
    fn mock_remote_renormalization_end_to_end() {
        use crate::backend::MockRemoteBackend;
        use crate::code::five_one_three;
        use crate::eval::{renormalize, FidelityModel};

        // Machine fidelity 0.8 for every 10-qubit protocol circuit.
        let f = 0.8;
        let model =
            FidelityModel { c_q: f64::ln(f) / 10.0, c_1: 0.0, c_2: 0.0, alpha: 1.0, residual: 0.0 };
        let code = five_one_three();
        let noise = NoiseModel::isotropic(0.01).unwrap();
        let bases = six_state_bases();
        let (shots, seed) = (60_000, 21);

        // The mock corrupts the same underlying tableau stream the clean
        // run samples, so the comparison isolates the corruption.
        let dir = tempfile::tempdir().unwrap();
        let mut store = JobStore::open(dir.path()).unwrap();
        let backend = MockRemoteBackend::new(model.clone());
        let (corrupted, _) =
            run_protocol_via(&mut store, &backend, &code, &noise, shots, seed, &bases).unwrap();
        let clean =
            run_protocol(&code, &noise, ProtocolEngine::Tableau, shots, seed, &bases).unwrap();

        let circuit = assemble_protocol_circuit(&code, Pauli::Z, 1).unwrap();
        assert!((backend.fidelity_for(&circuit) - f).abs() < 1e-12);
        let (renormed, info) = renormalize(&corrupted, &model, &circuit.counts()).unwrap();
        assert!(!info.saturated && !info.degenerate);

        let p_clean = evaluate(&clean).unwrap().1.p_nd;
        let p_raw = evaluate(&corrupted).unwrap().1.p_nd;
        let p_renorm = evaluate(&renormed).unwrap().1.p_nd;
        assert!(p_raw > 2.0 * p_clean, "corruption must visibly inflate p_ND");
        assert!(
            (p_renorm - p_clean).abs() < (p_raw - p_clean).abs() / 1.5,
            "renormalization barely helped: clean {p_clean}, raw {p_raw}, renormalized {p_renorm}"
        );
    }

    #[test]
    fn protocol_via_store_matches_the_direct_run_and_replays_identically() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = JobStore::open(dir.path()).unwrap();
        let backend = Counting { inner: TableauBackend::new(), calls: Cell::new(0) };
        let code = two_qubit_bitflip();
        let noise = NoiseModel::isotropic(0.05).unwrap();
        let bases = six_state_bases();

        let (table, jobs) =
            run_protocol_via(&mut store, &backend, &code, &noise, 6000, 13, &bases).unwrap();
        assert_eq!(jobs.len(), 6);
        assert_eq!(backend.calls.get(), 6);
        let direct =
            run_protocol(&code, &noise, ProtocolEngine::Tableau, 6000, 13, &bases).unwrap();
        assert_eq!(table.to_text(), direct.to_text(), "store path must not perturb results");

        // Second pass: everything comes from disk, reports identical.
        let (replayed, _) =
            run_protocol_via(&mut store, &backend, &code, &noise, 6000, 13, &bases).unwrap();
        assert_eq!(backend.calls.get(), 6, "all six jobs must dedup");
        let (_, live_report) = evaluate(&table).unwrap();
        let (_, replay_report) = evaluate(&replayed).unwrap();
        assert_eq!(live_report.p_nd, replay_report.p_nd);
    }
}
