//! Evaluation pipeline: correction tables, undetected-error rate, the
//! log-linear fidelity model, and shot-weight renormalization.
//!
//! A protocol record is *fixable* by a logical Pauli `P` when applying `P`
//! to the measured state restores the prepared one. Measuring the logical
//! basis operator `B` after the correction flips the recorded eigenvalue
//! exactly when `P` anticommutes with `B`, so the fix condition is
//! `sign_out * (-1)^[P anticommutes with B] == sign_in`. For each syndrome
//! the table keeps the Pauli fixing the largest weighted record count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::GateCounts;
use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// One protocol run: prepared logical state, observed syndrome, measured
/// logical eigenvalue, and a statistical weight (1 for sampled shots, the
/// outcome probability in exact mode).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub basis: Pauli,
    pub sign_in: i8,
    /// Bit i is stabilizer i's outcome flip (0 = the +1 eigenvalue).
    pub syndrome: u64,
    pub sign_out: i8,
    pub weight: f64,
}

impl ShotRecord {
    /// No syndrome flips and the prepared eigenvalue came back.
    pub fn is_error_free(&self) -> bool {
        self.syndrome == 0 && self.sign_out == self.sign_in
    }

    /// Whether correction `p` restores the prepared state.
    pub fn fixed_by(&self, p: Pauli) -> bool {
        let flips = anticommutes(p, self.basis);
        let corrected = if flips { -self.sign_out } else { self.sign_out };
        corrected == self.sign_in
    }
}

/// True when single-qubit Paulis `a` and `b` anticommute.
fn anticommutes(a: Pauli, b: Pauli) -> bool {
    a != Pauli::I && b != Pauli::I && a != b
}

/// A batch of protocol records plus the syndrome width they share.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShotTable {
    n_stabilizers: usize,
    records: Vec<ShotRecord>,
}

impl ShotTable {
    pub fn new(n_stabilizers: usize, records: Vec<ShotRecord>) -> Self {
        ShotTable {
            n_stabilizers,
            records,
        }
    }

    pub fn n_stabilizers(&self) -> usize {
        self.n_stabilizers
    }

    pub fn records(&self) -> &[ShotRecord] {
        &self.records
    }

    pub fn total_weight(&self) -> f64 {
        self.records.iter().map(|r| r.weight).sum()
    }

    /// Weighted count of error-free records (`N_0`).
    pub fn error_free_weight(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.is_error_free())
            .map(|r| r.weight)
            .sum()
    }

    fn syndrome_string(&self, s: u64) -> String {
        if self.n_stabilizers == 0 {
            return "-".into();
        }
        (0..self.n_stabilizers)
            .map(|i| if (s >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Text form, one record per line:
    /// `basis sign_in syndrome sign_out weight`, syndrome bit 0 leftmost,
    /// `-` when the code has no stabilizer.
    pub fn to_text(&self) -> String {
        let mut out = format!("STABILIZERS {}\n", self.n_stabilizers);
        for r in &self.records {
            let _ = writeln!(
                out,
                "{} {:+} {} {:+} {}",
                r.basis.as_char(),
                r.sign_in,
                self.syndrome_string(r.syndrome),
                r.sign_out,
                r.weight
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty shot table".into()))?;
        let m: usize = header
            .strip_prefix("STABILIZERS ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad shot table header: {header}")))?;
        let mut records = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Parse(format!("bad shot record: {line}")));
            }
            let basis = fields[0]
                .chars()
                .next()
                .filter(|_| fields[0].len() == 1)
                .and_then(Pauli::from_char)
                .filter(|&p| p != Pauli::I)
                .ok_or_else(|| Error::Parse(format!("bad basis: {}", fields[0])))?;
            let parse_sign = |s: &str| match s {
                "+1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => Err(Error::Parse(format!("bad sign: {other}"))),
            };
            let syndrome = if fields[2] == "-" {
                if m != 0 {
                    return Err(Error::Parse("empty syndrome in a stabilized table".into()));
                }
                0
            } else {
                if fields[2].len() != m {
                    return Err(Error::Parse(format!(
                        "syndrome {} does not have {m} bits",
                        fields[2]
                    )));
                }
                let mut s = 0u64;
                for (i, ch) in fields[2].chars().enumerate() {
                    match ch {
                        '0' => {}
                        '1' => s |= 1 << i,
                        _ => return Err(Error::Parse(format!("bad syndrome: {}", fields[2]))),
                    }
                }
                s
            };
            records.push(ShotRecord {
                basis,
                sign_in: parse_sign(fields[1])?,
                syndrome,
                sign_out: parse_sign(fields[3])?,
                weight: fields[4]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad weight: {}", fields[4])))?,
            });
        }
        Ok(ShotTable::new(m, records))
    }
}

/// Syndrome-indexed logical correction; unobserved syndromes map to I.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    map: BTreeMap<u64, Pauli>,
}

impl CorrectionTable {
    pub fn lookup(&self, syndrome: u64) -> Pauli {
        self.map.get(&syndrome).copied().unwrap_or(Pauli::I)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, Pauli)> + '_ {
        self.map.iter().map(|(&s, &p)| (s, p))
    }
}

/// For each observed syndrome, pick the correction fixing the largest
/// weighted share of records; ties resolve to the earliest of I, X, Y, Z.
pub fn build_correction_table(table: &ShotTable) -> CorrectionTable {
    let mut fixed: BTreeMap<u64, [f64; 4]> = BTreeMap::new();
    for r in table.records() {
        let counts = fixed.entry(r.syndrome).or_default();
        for (k, p) in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            if r.fixed_by(p) {
                counts[k] += r.weight;
            }
        }
    }
    let map = fixed
        .into_iter()
        .map(|(s, counts)| {
            let mut best = 0usize;
            for k in 1..4 {
                if counts[k] > counts[best] {
                    best = k;
                }
            }
            (s, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][best])
        })
        .collect();
    CorrectionTable { map }
}

/// Per-syndrome evaluation tally.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyndromeTally {
    pub syndrome: u64,
    pub correction: Pauli,
    pub weight: f64,
    pub uncorrected_weight: f64,
}

/// Outcome of evaluating records against a correction table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    /// Weighted fraction of records the optimal table fails to fix.
    pub p_nd: f64,
    pub total_weight: f64,
    pub n_records: usize,
    pub n_stabilizers: usize,
    pub syndromes: Vec<SyndromeTally>,
}

/// Weighted undetected-error rate of `table` under the given corrections.
pub fn compute_pnd(table: &ShotTable, corrections: &CorrectionTable) -> Result<EvalReport> {
    if table.records().is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut tallies: BTreeMap<u64, SyndromeTally> = BTreeMap::new();
    for r in table.records() {
        let p = corrections.lookup(r.syndrome);
        let tally = tallies.entry(r.syndrome).or_insert_with(|| SyndromeTally {
            syndrome: r.syndrome,
            correction: p,
            weight: 0.0,
            uncorrected_weight: 0.0,
        });
        tally.weight += r.weight;
        if !r.fixed_by(p) {
            tally.uncorrected_weight += r.weight;
        }
    }
    let total_weight: f64 = tallies.values().map(|t| t.weight).sum();
    if total_weight <= 0.0 {
        return Err(Error::EmptyRecords);
    }
    let uncorrected: f64 = tallies.values().map(|t| t.uncorrected_weight).sum();
    Ok(EvalReport {
        p_nd: uncorrected / total_weight,
        total_weight,
        n_records: table.records().len(),
        n_stabilizers: table.n_stabilizers(),
        syndromes: tallies.into_values().collect(),
    })
}

/// Convenience: optimal table, then the report it produces.
pub fn evaluate(table: &ShotTable) -> Result<(CorrectionTable, EvalReport)> {
    let corrections = build_correction_table(table);
    let report = compute_pnd(table, &corrections)?;
    Ok((corrections, report))
}

/// Log-linear machine fidelity model:
/// `log F_ex = c_q * N_q + c_1 * N_1 + c_2 * N_2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityModel {
    pub c_q: f64,
    pub c_1: f64,
    pub c_2: f64,
    /// Renormalization exponent applied to the predicted fidelity.
    pub alpha: f64,
    /// Euclidean norm of the log-space fit residuals.
    pub residual: f64,
}

impl FidelityModel {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Predicted executed fidelity for a circuit's resource counts.
    pub fn predict(&self, counts: &GateCounts) -> f64 {
        (self.c_q * counts.n_q as f64 + self.c_1 * counts.n_1 as f64 + self.c_2 * counts.n_2 as f64)
            .exp()
    }

    /// `F_ex^alpha`, the factor renormalization divides by.
    pub fn predict_alpha(&self, counts: &GateCounts) -> f64 {
        self.predict(counts).powf(self.alpha)
    }
}

/// Least-squares fit of `log(fraction)` against the three resource counts,
/// no intercept. Needs three runs with linearly independent count vectors.
pub fn fit_fidelity(points: &[(GateCounts, f64)]) -> Result<FidelityModel> {
    if points.len() < 3 {
        return Err(Error::Identifiability(format!(
            "{} runs cannot identify three coefficients",
            points.len()
        )));
    }
    for &(_, frac) in points {
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(Error::Config(format!(
                "error-free fraction {frac} outside (0, 1]"
            )));
        }
    }
    // Normal equations A^T A c = A^T y over the 3 coefficients.
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(counts, frac) in points {
        let row = [counts.n_q as f64, counts.n_1 as f64, counts.n_2 as f64];
        let y = frac.ln();
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * y;
        }
    }
    let c = solve3(ata, aty)?;
    let mut residual = 0.0;
    for &(counts, frac) in points {
        let row = [counts.n_q as f64, counts.n_1 as f64, counts.n_2 as f64];
        let r = frac.ln() - (c[0] * row[0] + c[1] * row[1] + c[2] * row[2]);
        residual += r * r;
    }
    Ok(FidelityModel {
        c_q: c[0],
        c_1: c[1],
        c_2: c[2],
        alpha: 1.0,
        residual: residual.sqrt(),
    })
}

/// 3x3 linear solve by Gaussian elimination with partial pivoting; a tiny
/// pivot means the design matrix is rank deficient.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-10 * scale {
            return Err(Error::Identifiability(
                "resource-count design matrix is rank deficient".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// What renormalization did to the weights.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Renormalization {
    pub f_alpha: f64,
    pub factor_error_free: f64,
    pub factor_other: f64,
    /// The error-free weight alone exceeded the total; other records were
    /// clamped to zero weight.
    pub saturated: bool,
    /// Every record was error-free; weights left unchanged.
    pub degenerate: bool,
}

/// Reweight records to undo a machine fidelity factor `f_alpha = F_ex^alpha`:
/// error-free records gain `1/f_alpha`, the rest shrink so the total weight
/// is preserved exactly.
pub fn renormalize_with(table: &ShotTable, f_alpha: f64) -> Result<(ShotTable, Renormalization)> {
    if table.records().is_empty() {
        return Err(Error::EmptyRecords);
    }
    if !(f_alpha > 0.0 && f_alpha.is_finite()) {
        return Err(Error::Config(format!("fidelity factor {f_alpha} not positive")));
    }
    let n_tot = table.total_weight();
    let n_0 = table.error_free_weight();
    let boosted = n_0 / f_alpha;
    let mut outcome = Renormalization {
        f_alpha,
        factor_error_free: 1.0 / f_alpha,
        factor_other: 0.0,
        saturated: false,
        degenerate: false,
    };
    if (n_tot - n_0).abs() <= 1e-12 * n_tot {
        // Nothing to shift weight from.
        outcome.degenerate = true;
        outcome.factor_error_free = 1.0;
        return Ok((table.clone(), outcome));
    }
    if boosted > n_tot {
        // Negative-weight corner: clamp and keep the total.
        outcome.saturated = true;
        outcome.factor_error_free = n_tot / n_0;
    } else {
        outcome.factor_other = (n_tot - boosted) / (n_tot - n_0);
    }
    let records = table
        .records()
        .iter()
        .map(|r| {
            let mut r = *r;
            r.weight *= if r.is_error_free() {
                outcome.factor_error_free
            } else {
                outcome.factor_other
            };
            r
        })
        .collect();
    Ok((ShotTable::new(table.n_stabilizers(), records), outcome))
}

/// [`renormalize_with`], predicting the fidelity factor from a fitted model
/// and the benchmark circuit's resource counts.
pub fn renormalize(
    table: &ShotTable,
    model: &FidelityModel,
    counts: &GateCounts,
) -> Result<(ShotTable, Renormalization)> {
    renormalize_with(table, model.predict_alpha(counts))
}
