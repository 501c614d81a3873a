//! Noise configuration: per-qubit Pauli error probabilities, an optional
//! relaxation strength, and where in the circuit the noise fires.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{CliffordCircuit, Gate};
use crate::error::{Error, Result};

/// Independent X/Y/Z error probabilities for one qubit location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliProbs {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PauliProbs {
    pub fn zero() -> Self {
        PauliProbs { x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Pr(X) = Pr(Y) = Pr(Z) = p.
    pub fn isotropic(p: f64) -> Self {
        PauliProbs { x: p, y: p, z: p }
    }

    pub fn total(&self) -> f64 {
        self.x + self.y + self.z
    }

    pub fn is_zero(&self) -> bool {
        self.x == 0.0 && self.y == 0.0 && self.z == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("X", self.x), ("Y", self.y), ("Z", self.z)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Config(format!("Pr({name}) = {p} out of range")));
            }
        }
        if self.total() > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "Pauli probabilities sum to {} > 1",
                self.total()
            )));
        }
        Ok(())
    }
}

/// Where noise is inserted when a circuit runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// One noise layer on every data qubit, between the encoding prefix and
    /// the rest of the circuit (the default).
    #[default]
    AfterEncoding,
    /// Noise on the operands of every unitary gate, after the gate.
    PerGate,
}

/// A complete noise description for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    probs: PauliProbs,
    overrides: BTreeMap<usize, PauliProbs>,
    relaxation_delta: Option<f64>,
    placement: Placement,
}

impl NoiseModel {
    pub fn new(probs: PauliProbs) -> Result<Self> {
        probs.validate()?;
        Ok(NoiseModel {
            probs,
            overrides: BTreeMap::new(),
            relaxation_delta: None,
            placement: Placement::default(),
        })
    }

    pub fn noiseless() -> Self {
        NoiseModel::new(PauliProbs::zero()).unwrap()
    }

    pub fn isotropic(p: f64) -> Result<Self> {
        NoiseModel::new(PauliProbs::isotropic(p))
    }

    pub fn with_override(mut self, qubit: usize, probs: PauliProbs) -> Result<Self> {
        probs.validate()?;
        self.overrides.insert(qubit, probs);
        Ok(self)
    }

    pub fn with_relaxation(mut self, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) || !delta.is_finite() {
            return Err(Error::Config(format!("relaxation delta {delta} out of range")));
        }
        self.relaxation_delta = Some(delta);
        Ok(self)
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    /// Error probabilities for a given qubit, override-aware.
    pub fn probs_for(&self, qubit: usize) -> PauliProbs {
        self.overrides.get(&qubit).copied().unwrap_or(self.probs)
    }

    pub fn base_probs(&self) -> PauliProbs {
        self.probs
    }

    pub fn relaxation_delta(&self) -> Option<f64> {
        self.relaxation_delta
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    /// True when the model contains no relaxation part, so the tableau
    /// engine can execute it.
    pub fn is_pauli_only(&self) -> bool {
        self.relaxation_delta.is_none()
    }

    pub fn is_noiseless(&self) -> bool {
        self.probs.is_zero()
            && self.overrides.values().all(PauliProbs::is_zero)
            && self.relaxation_delta.map_or(true, |d| d == 0.0)
    }

    /// The derived continuous exposure Gamma*t matching the relaxation
    /// strength: Gamma*t = 2 log[1/(1-Delta)].
    pub fn gamma_t(&self) -> Option<f64> {
        self.relaxation_delta.map(|d| 2.0 * (1.0 / (1.0 - d)).ln())
    }

    /// Canonical spec string; parses back to an equal model.
    pub fn to_spec(&self) -> String {
        let mut out = if self.probs.is_zero() {
            "none".to_string()
        } else if self.probs.x == self.probs.y && self.probs.y == self.probs.z {
            format!("iso:{}", self.probs.x)
        } else {
            format!("pauli:{},{},{}", self.probs.x, self.probs.y, self.probs.z)
        };
        for (q, p) in &self.overrides {
            out.push_str(&format!(";q{q}=pauli:{},{},{}", p.x, p.y, p.z));
        }
        if let Some(d) = self.relaxation_delta {
            out.push_str(&format!(";relax={d}"));
        }
        if self.placement == Placement::PerGate {
            out.push_str(";placement=per_gate");
        }
        out
    }
}

fn parse_probs(text: &str) -> Result<PauliProbs> {
    let bad = || Error::Parse(format!("bad noise term {text:?}"));
    let probs = if let Some(p) = text.strip_prefix("iso:") {
        PauliProbs::isotropic(p.parse().map_err(|_| bad())?)
    } else if let Some(rest) = text.strip_prefix("pauli:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        PauliProbs {
            x: parts[0].parse().map_err(|_| bad())?,
            y: parts[1].parse().map_err(|_| bad())?,
            z: parts[2].parse().map_err(|_| bad())?,
        }
    } else if text == "none" {
        PauliProbs::zero()
    } else {
        return Err(bad());
    };
    probs.validate()?;
    Ok(probs)
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// Grammar: `none` | `iso:P` | `pauli:PX,PY,PZ`, then any of
    /// `;qN=pauli:PX,PY,PZ` (per-qubit override), `;relax=DELTA`,
    /// `;placement=after_encoding|per_gate`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';');
        let head = parts.next().unwrap_or_default().trim();
        let mut model = NoiseModel::new(parse_probs(head)?)?;
        for part in parts {
            let part = part.trim();
            if let Some(d) = part.strip_prefix("relax=") {
                let delta: f64 =
                    d.parse().map_err(|_| Error::Parse(format!("bad relax value {d:?}")))?;
                model = model.with_relaxation(delta)?;
            } else if let Some(p) = part.strip_prefix("placement=") {
                model.placement = match p {
                    "after_encoding" => Placement::AfterEncoding,
                    "per_gate" => Placement::PerGate,
                    other => return Err(Error::Parse(format!("unknown placement {other:?}"))),
                };
            } else if let Some(rest) = part.strip_prefix('q') {
                let (q, val) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad override {part:?}")))?;
                let qubit: usize =
                    q.parse().map_err(|_| Error::Parse(format!("bad qubit in {part:?}")))?;
                model = model.with_override(qubit, parse_probs(val)?)?;
            } else {
                return Err(Error::Parse(format!("unknown noise clause {part:?}")));
            }
        }
        Ok(model)
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec())
    }
}

/// Index of the gate before which the single `AfterEncoding` noise layer
/// fires. An explicit `NOISE_AFTER` marker on the circuit wins; otherwise
/// the boundary is the first gate that touches a non-data qubit, measures,
/// or resets. A circuit with none of those gets the layer at the very end.
pub fn noise_boundary(circuit: &CliffordCircuit) -> usize {
    if let Some(b) = circuit.noise_after() {
        return b;
    }
    circuit
        .gates()
        .iter()
        .position(|g| {
            if matches!(g, Gate::MeasureZ(_) | Gate::Reset(_)) {
                return true;
            }
            let (a, b) = g.operands();
            a >= circuit.n_data() || b.is_some_and(|b| b >= circuit.n_data())
        })
        .unwrap_or(circuit.gates().len())
}
