//! Stabilizer codes as signed check matrices, their text format, and
//! brute-force distance.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{rref, Rref};
use crate::pauli::{Pauli, PauliOperator};

/// An [[n, k]] stabilizer code: n - k independent commuting stabilizer
/// generators plus k anticommuting logical pairs, all with +/-1 signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckMatrix {
    n: usize,
    k: usize,
    stabilizers: Vec<PauliOperator>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
}

/// Result of a bounded distance search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceBound {
    Exact(usize),
    /// No logical operator up to the requested weight.
    GreaterThan(usize),
}

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 50_000_000;

impl CheckMatrix {
    pub fn new(
        n: usize,
        stabilizers: Vec<PauliOperator>,
        logical_x: Vec<PauliOperator>,
        logical_z: Vec<PauliOperator>,
    ) -> Result<Self> {
        if logical_x.len() != logical_z.len() {
            return Err(Error::InvalidCode(format!(
                "{} logical X but {} logical Z operators",
                logical_x.len(),
                logical_z.len()
            )));
        }
        let k = logical_x.len();
        if k > n {
            return Err(Error::InvalidCode(format!("k = {k} exceeds n = {n}")));
        }
        if stabilizers.len() != n - k {
            return Err(Error::InvalidCode(format!(
                "expected {} stabilizers for an [[{n}, {k}]] code, got {}",
                n - k,
                stabilizers.len()
            )));
        }
        let code = CheckMatrix { n, k, stabilizers, logical_x, logical_z };
        code.validate()?;
        Ok(code)
    }

    /// The trivial [[1, 1]] code: no stabilizers, bare logical X and Z.
    pub fn bare_qubit() -> Self {
        CheckMatrix {
            n: 1,
            k: 1,
            stabilizers: vec![],
            logical_x: vec![PauliOperator::single(1, 0, Pauli::X)],
            logical_z: vec![PauliOperator::single(1, 0, Pauli::Z)],
        }
    }

    fn validate(&self) -> Result<()> {
        let all = self
            .stabilizers
            .iter()
            .chain(&self.logical_x)
            .chain(&self.logical_z);
        for op in all {
            if op.n() != self.n {
                return Err(Error::InvalidCode(format!(
                    "operator {op} has {} qubits, code has {}",
                    op.n(),
                    self.n
                )));
            }
            if op.sign().is_err() {
                return Err(Error::InvalidCode(format!("operator {op} has an imaginary phase")));
            }
        }
        for (i, a) in self.stabilizers.iter().enumerate() {
            if a.is_identity_word() {
                return Err(Error::InvalidCode("identity stabilizer generator".into()));
            }
            for b in &self.stabilizers[i + 1..] {
                if !a.commutes(b)? {
                    return Err(Error::InvalidCode(format!("stabilizers {a} and {b} anticommute")));
                }
            }
        }
        let r = rref(&self.stabilizers)?;
        if r.rank() != self.stabilizers.len() {
            return Err(Error::InvalidCode(format!(
                "stabilizers have rank {} but there are {}",
                r.rank(),
                self.stabilizers.len()
            )));
        }
        if r.inconsistent {
            return Err(Error::InvalidCode("-I is derivable from the stabilizers".into()));
        }
        for (name, ops) in [("X", &self.logical_x), ("Z", &self.logical_z)] {
            for (i, l) in ops.iter().enumerate() {
                for s in &self.stabilizers {
                    if !l.commutes(s)? {
                        return Err(Error::InvalidCode(format!(
                            "logical {name}{i} anticommutes with stabilizer {s}"
                        )));
                    }
                }
            }
        }
        for i in 0..self.k {
            for j in 0..self.k {
                let want_anti = i == j;
                if (self.logical_x[i].symplectic(&self.logical_z[j])? == 1) != want_anti {
                    return Err(Error::InvalidCode(format!(
                        "logical X{i} and Z{j} have the wrong commutation relation"
                    )));
                }
                if i < j {
                    if !self.logical_x[i].commutes(&self.logical_x[j])? {
                        return Err(Error::InvalidCode(format!("logical X{i} and X{j} anticommute")));
                    }
                    if !self.logical_z[i].commutes(&self.logical_z[j])? {
                        return Err(Error::InvalidCode(format!("logical Z{i} and Z{j} anticommute")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn stabilizers(&self) -> &[PauliOperator] {
        &self.stabilizers
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    /// Logical Y of qubit `i`, i.e. `i * X * Z` with the sign worked out.
    pub fn logical_y(&self, i: usize) -> Result<PauliOperator> {
        let mut y = self.logical_x[i].multiply(&self.logical_z[i])?;
        // X and Z anticommute, so the product is an i-phase away from
        // Hermitian; multiply by i.
        y = PauliOperator::from_bits(y.n(), y.x_word(), y.z_word(), y.phase_power() + 1);
        debug_assert!(y.is_hermitian());
        Ok(y)
    }

    /// Logical representative of `p` on logical qubit `i`.
    pub fn logical_rep(&self, i: usize, p: Pauli) -> Result<PauliOperator> {
        match p {
            Pauli::I => Ok(PauliOperator::identity(self.n)),
            Pauli::X => Ok(self.logical_x[i]),
            Pauli::Y => self.logical_y(i),
            Pauli::Z => Ok(self.logical_z[i]),
        }
    }

    pub fn stabilizer_rref(&self) -> Result<Rref> {
        rref(&self.stabilizers)
    }

    /// Replaces the stabilizer generators with an equivalent set.
    /// The new set must generate the same group.
    pub fn with_stabilizers(&self, stabilizers: Vec<PauliOperator>) -> Result<Self> {
        let old = rref(&self.stabilizers)?;
        let new = rref(&stabilizers)?;
        if old.basis != new.basis {
            return Err(Error::InvalidCode("replacement generators span a different group".into()));
        }
        CheckMatrix::new(self.n, stabilizers, self.logical_x.clone(), self.logical_z.clone())
    }

    /// Canonical serialization: rref stabilizers, logicals reduced against
    /// them. Equal keys mean the same code up to generator choice.
    pub fn canonical_key(&self) -> Result<String> {
        let r = self.stabilizer_rref()?;
        let mut out = format!("{} {}", self.n, self.k);
        for s in &r.basis {
            out.push(' ');
            out.push_str(&s.to_string());
        }
        for l in self.logical_x.iter().chain(&self.logical_z) {
            out.push(' ');
            out.push_str(&r.reduce(l)?.to_string());
        }
        Ok(out)
    }

    /// Minimum weight of an operator that commutes with every stabilizer but
    /// lies outside the stabilizer group, by exhaustive enumeration in
    /// ascending weight. Errors out (rather than truncating) if the
    /// candidate count exceeds `budget`.
    pub fn distance_by_enumeration(
        &self,
        max_weight: usize,
        budget: Option<u128>,
    ) -> Result<DistanceBound> {
        let budget = budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
        let max_weight = max_weight.min(self.n);
        let mut candidates: u128 = 0;
        for w in 1..=max_weight {
            candidates += binom(self.n, w) * 3u128.pow(w as u32);
        }
        if candidates > budget {
            return Err(Error::BudgetExceeded { candidates, budget });
        }
        let basis = self.stabilizer_rref()?;
        for w in 1..=max_weight {
            let mut support: Vec<usize> = (0..w).collect();
            loop {
                if let Some(found) = self.scan_letters(&support, &basis)? {
                    debug_assert_eq!(found.weight(), w);
                    return Ok(DistanceBound::Exact(w));
                }
                if !next_combination(&mut support, self.n) {
                    break;
                }
            }
        }
        Ok(DistanceBound::GreaterThan(max_weight))
    }

    fn scan_letters(&self, support: &[usize], basis: &Rref) -> Result<Option<PauliOperator>> {
        let w = support.len();
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        let mut digits = vec![0usize; w];
        loop {
            let mut op = PauliOperator::identity(self.n);
            for (d, &q) in digits.iter().zip(support) {
                op.set_letter(q, letters[*d]);
            }
            let commutes = self
                .stabilizers
                .iter()
                .try_fold(true, |acc, s| op.commutes(s).map(|c| acc && c))?;
            if commutes && !basis.contains_word(&op)? {
                return Ok(Some(op));
            }
            let mut i = 0;
            loop {
                if i == w {
                    return Ok(None);
                }
                digits[i] += 1;
                if digits[i] < 3 {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    /// Serializes to the code text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.k);
        out.push_str("STAB\n");
        for s in &self.stabilizers {
            out.push_str(&format!("{s}\n"));
        }
        out.push_str("LOGX\n");
        for l in &self.logical_x {
            out.push_str(&format!("{l}\n"));
        }
        out.push_str("LOGZ\n");
        for l in &self.logical_z {
            out.push_str(&format!("{l}\n"));
        }
        out
    }

    /// Parses the code text format: a `n k` header, then signed Pauli
    /// strings under `STAB`, `LOGX` and `LOGZ` section markers.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty code file".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        let k: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let mut sections: [Vec<PauliOperator>; 3] = [vec![], vec![], vec![]];
        let mut current: Option<usize> = None;
        for line in lines {
            match line {
                "STAB" => current = Some(0),
                "LOGX" => current = Some(1),
                "LOGZ" => current = Some(2),
                op => {
                    let idx = current
                        .ok_or_else(|| Error::Parse(format!("operator {op:?} before any section")))?;
                    let parsed: PauliOperator = op.parse()?;
                    if parsed.n() != n {
                        return Err(Error::Parse(format!(
                            "operator {op:?} has {} qubits, header says {n}",
                            parsed.n()
                        )));
                    }
                    sections[idx].push(parsed);
                }
            }
        }
        let [stab, logx, logz] = sections;
        if logx.len() != k {
            return Err(Error::Parse(format!("header says k = {k}, LOGX has {}", logx.len())));
        }
        CheckMatrix::new(n, stab, logx, logz)
    }
}

impl fmt::Display for CheckMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn binom(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Advances `idx` to the next k-combination of `0..n`; false when done.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - k {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The [[5, 1, 3]] code with cyclic XZZXI stabilizers.
pub fn five_one_three() -> CheckMatrix {
    let parse = |s: &str| s.parse::<PauliOperator>().unwrap();
    CheckMatrix::new(
        5,
        vec![parse("XZZXI"), parse("IXZZX"), parse("XIXZZ"), parse("ZXIXZ")],
        vec![parse("XXXXX")],
        vec![parse("ZZZZZ")],
    )
    .unwrap()
}

/// The two-qubit bit-flip detection code: stabilizer ZZ, logical X = XX.
pub fn two_qubit_bitflip() -> CheckMatrix {
    let parse = |s: &str| s.parse::<PauliOperator>().unwrap();
    CheckMatrix::new(2, vec![parse("ZZ")], vec![parse("XX")], vec![parse("ZI")]).unwrap()
}
