//! The learning loop: drives an [`Agent`] through construction-game
//! episodes, scores terminal codes with the evaluator, and ranks what was
//! found.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::AgentKind;
use crate::code::CheckMatrix;
use crate::dense::DENSE_QUBIT_CAP;
use crate::error::{Error, Result};
use crate::eval::{evaluate, renormalize, FidelityModel};
use crate::game::{Game, Terminal, DEFAULT_MAX_QUBITS};
use crate::noise::{NoiseModel, Placement};
use crate::pauli::Pauli;
use crate::protocol::{
    assemble_protocol_circuit, run_protocol, six_state_bases, ProtocolEngine,
};

/// Syndrome and logical readout bits the exact engine can enumerate.
const EXACT_READOUT_CAP: usize = 20;

#[derive(Clone, Debug)]
pub struct LearningConfig {
    pub max_qubits: usize,
    /// Total shots per sampled evaluation, split over the six bases.
    pub shots: usize,
    pub noise: NoiseModel,
    pub agent: AgentKind,
    pub episodes: usize,
    pub seed: u64,
    /// Codes up to this many physical qubits are scored with the exact
    /// dense engine; larger ones fall back to sampling.
    pub exact_threshold: usize,
    /// When set, sampled shot tables are renormalized by the predicted
    /// machine fidelity before scoring.
    pub fidelity: Option<FidelityModel>,
}

impl LearningConfig {
    pub fn new(noise: NoiseModel) -> Self {
        LearningConfig {
            max_qubits: DEFAULT_MAX_QUBITS,
            shots: 60_000,
            noise,
            agent: AgentKind::Mcts,
            episodes: 100,
            seed: 0,
            exact_threshold: DEFAULT_MAX_QUBITS,
            fidelity: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episode budget must be positive".into()));
        }
        if self.shots == 0 {
            return Err(Error::Config("shot budget must be positive".into()));
        }
        Ok(())
    }
}

/// Picks the cheapest engine that can score `code` under `noise` exactly or
/// by sampling, preferring exact enumeration for small codes.
pub fn route_evaluation(
    code: &CheckMatrix,
    noise: &NoiseModel,
    exact_threshold: usize,
) -> Result<ProtocolEngine> {
    let n = code.n();
    let m = code.stabilizers().len();
    if n <= exact_threshold.min(DENSE_QUBIT_CAP)
        && m + 1 <= EXACT_READOUT_CAP
        && noise.placement() == Placement::AfterEncoding
    {
        return Ok(ProtocolEngine::DenseExact);
    }
    if noise.is_pauli_only() {
        return Ok(ProtocolEngine::Tableau);
    }
    if n + m + 1 <= DENSE_QUBIT_CAP {
        return Ok(ProtocolEngine::DenseSampled);
    }
    Err(Error::Config(format!(
        "no engine can evaluate an [[{n}, {}]] code with {m} stabilizers under {}",
        code.k(),
        noise.to_spec()
    )))
}

/// Scores one code: runs the benchmark protocol on the routed engine,
/// optionally renormalizes sampled tables, and reads off p_ND.
pub fn evaluate_code(code: &CheckMatrix, config: &LearningConfig, seed: u64) -> Result<f64> {
    let engine = route_evaluation(code, &config.noise, config.exact_threshold)?;
    let table = run_protocol(code, &config.noise, engine, config.shots, seed, &six_state_bases())?;
    let table = match (&config.fidelity, engine) {
        (Some(model), ProtocolEngine::Tableau | ProtocolEngine::DenseSampled) => {
            // Per-basis circuits differ only in the readout entangler; the
            // Z-basis circuit stands in for the family.
            let counts = assemble_protocol_circuit(code, Pauli::Z, 1)?.counts();
            renormalize(&table, model, &counts)?.0
        }
        _ => table,
    };
    let (_, report) = evaluate(&table)?;
    Ok(report.p_nd)
}

/// One line of the episode log.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub actions: Vec<String>,
    /// Check-matrix text of the terminal code, absent for dead ends.
    pub code: Option<String>,
    pub p_nd: Option<f64>,
    pub reward: f64,
    /// True when the reward came from the cache instead of a fresh run.
    pub cached: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RankedCode {
    pub code: CheckMatrix,
    pub p_nd: f64,
    /// Episode that first reached this code.
    pub episode: usize,
}

#[derive(Debug)]
pub struct LearningOutcome {
    /// Distinct codes found, best first (p_ND, then qubit count, then
    /// discovery order).
    pub ranked: Vec<RankedCode>,
    pub episodes: Vec<EpisodeRecord>,
    /// Fresh evaluator runs (cache misses).
    pub evaluations: usize,
    pub cache_hits: usize,
}

impl LearningOutcome {
    pub fn best(&self) -> Option<&RankedCode> {
        self.ranked.first()
    }

    /// Best code found at each physical qubit count.
    pub fn best_by_qubits(&self) -> BTreeMap<usize, &RankedCode> {
        let mut out: BTreeMap<usize, &RankedCode> = BTreeMap::new();
        for r in &self.ranked {
            out.entry(r.code.n()).or_insert(r);
        }
        out
    }
}

pub fn run_learning(config: &LearningConfig) -> Result<LearningOutcome> {
    run_learning_in(&Game::standard(config.max_qubits)?, config)
}

/// As [`run_learning`] but on a caller-supplied game (custom palette).
pub fn run_learning_in(game: &Game, config: &LearningConfig) -> Result<LearningOutcome> {
    config.validate()?;
    let mut agent = config.agent.build();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Rewards keyed by the code's canonical form, so symmetric
    // constructions never re-spend evaluation shots. A failed evaluation is
    // cached too (None): it is deterministic for a given code.
    let mut cache: HashMap<String, Option<(f64, String)>> = HashMap::new();
    let mut found: HashMap<String, RankedCode> = HashMap::new();
    let mut episodes = Vec::with_capacity(config.episodes);
    let mut evaluations = 0;
    let mut cache_hits = 0;

    for episode in 0..config.episodes {
        agent.begin_episode();
        let mut state = game.initial();
        while !state.is_terminal() {
            let actions = game.legal_actions(&state);
            let action = agent.choose(&state, &actions, &mut rng);
            state = game.apply(&state, action)?;
        }
        let actions = state.history().iter().map(|a| a.to_string()).collect();
        let mut record = EpisodeRecord {
            episode,
            actions,
            code: None,
            p_nd: None,
            reward: -1.0,
            cached: false,
            error: None,
        };
        match state.terminal() {
            Some(Terminal::Degenerate) | None => {}
            Some(Terminal::Code(code)) => {
                record.code = Some(code.to_text());
                let key = code.canonical_key()?;
                let scored = match cache.get(&key) {
                    Some(hit) => {
                        cache_hits += 1;
                        record.cached = true;
                        hit.clone()
                    }
                    None => {
                        evaluations += 1;
                        let seed = config
                            .seed
                            .wrapping_add((episode as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                        let scored = match evaluate_code(code, config, seed) {
                            Ok(p_nd) => Some((p_nd, key.clone())),
                            Err(e) => {
                                record.error = Some(e.to_string());
                                None
                            }
                        };
                        cache.insert(key.clone(), scored.clone());
                        scored
                    }
                };
                if let Some((p_nd, _)) = scored {
                    record.p_nd = Some(p_nd);
                    record.reward = -p_nd;
                    found.entry(key).or_insert_with(|| RankedCode {
                        code: code.clone(),
                        p_nd,
                        episode,
                    });
                } else if record.error.is_none() {
                    record.error = Some("evaluation failed in an earlier episode".into());
                }
            }
        }
        debug_assert!((-1.0..=0.0).contains(&record.reward));
        agent.observe(&state, record.reward);
        episodes.push(record);
    }

    let mut ranked: Vec<RankedCode> = found.into_values().collect();
    ranked.sort_by_key(|r| (quantized_pnd(r.p_nd), r.code.n(), r.episode));
    Ok(LearningOutcome { ranked, episodes, evaluations, cache_hits })
}

/// Ranking key for p_ND: values within 1e-9 count as ties (so arithmetic
/// jitter between analytically equal codes cannot outrank qubit count).
pub(crate) fn quantized_pnd(p_nd: f64) -> i64 {
    (p_nd * 1e9).round() as i64
}
