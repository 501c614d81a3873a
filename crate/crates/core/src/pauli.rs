//! Signed n-qubit Pauli operators over packed GF(2) bit vectors.
//!
//! An operator is stored as `i^phase * W(x, z)` where `W` is the tensor
//! product of site letters and a site with both bits set is the Hermitian
//! `Y = i*X*Z`. Group elements used by codes and networks always carry a
//! real sign (`phase` 0 or 2); the quarter phases only show up transiently
//! in products of anticommuting operators and stay internal.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Single-site Pauli letter.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// True when the two letters anticommute (both non-identity and distinct).
    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }
}

pub const MAX_QUBITS: usize = 64;

/// A signed Pauli operator on up to [`MAX_QUBITS`] qubits.
///
/// Qubit `q` lives at bit `q` of the packed words, so qubit index ascends
/// from the least-significant bit. The string form puts qubit 0 leftmost.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: u32,
    x: u64,
    z: u64,
    phase: u8,
}

fn mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "operators are capped at {MAX_QUBITS} qubits");
        PauliOperator { n: n as u32, x: 0, z: 0, phase: 0 }
    }

    pub fn try_identity(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::CapacityExceeded(n));
        }
        Ok(Self::identity(n))
    }

    /// Builds from raw bit words; `phase` is the power of i in front of the
    /// canonical word.
    pub fn from_bits(n: usize, x: u64, z: u64, phase: u8) -> Self {
        let mut op = Self::identity(n);
        op.x = x & mask(op.n);
        op.z = z & mask(op.n);
        op.phase = phase & 3;
        op
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set_letter(q, p);
        op
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut op = Self::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            op.set_letter(q, p);
        }
        op
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_word(&self) -> u64 {
        self.x
    }

    pub fn z_word(&self) -> u64 {
        self.z
    }

    pub fn x_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n());
        self.x >> q & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n());
        self.z >> q & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Replaces the letter at `q`, keeping the operator's sign.
    pub fn set_letter(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n(), "qubit {q} out of range for {} qubits", self.n);
        let (x, z) = p.bits();
        self.x = self.x & !(1 << q) | (x as u64) << q;
        self.z = self.z & !(1 << q) | (z as u64) << q;
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity_word(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_identity(&self) -> bool {
        self.is_identity_word() && self.phase == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// Quarter-phase exponent: the operator is `i^phase_power() * word`.
    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    /// The +/-1 sign of a Hermitian element.
    pub fn sign(&self) -> Result<i8> {
        match self.phase {
            0 => Ok(1),
            2 => Ok(-1),
            _ => Err(Error::NonHermitian),
        }
    }

    /// Symplectic product: 0 when the operators commute, 1 otherwise.
    pub fn symplectic(&self, other: &Self) -> Result<u8> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n(), other.n()));
        }
        let acc = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok((acc & 1) as u8)
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        Ok(self.symplectic(other)? == 0)
    }

    /// Exact group product, tracking the quarter phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n(), other.n()));
        }
        let y1 = (self.x & self.z).count_ones();
        let y2 = (other.x & other.z).count_ones();
        let cross = (other.x & self.z).count_ones();
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y3 = (x & z).count_ones();
        let k = self.phase as u32 + other.phase as u32 + y1 + y2 + 2 * cross + (4 - y3 % 4) % 4;
        Ok(PauliOperator { n: self.n, x, z, phase: (k % 4) as u8 })
    }

    /// Tensor product; `other`'s qubits are appended after `self`'s.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n() + other.n();
        if n > MAX_QUBITS {
            return Err(Error::CapacityExceeded(n));
        }
        Ok(PauliOperator {
            n: n as u32,
            x: self.x | other.x << self.n,
            z: self.z | other.z << self.n,
            phase: (self.phase + other.phase) & 3,
        })
    }

    /// Keeps only the sites selected by `keep` (ascending), compacting bits.
    ///
    /// The quarter-phase prefactor is carried over verbatim; dropping a Y
    /// site changes the canonical word's Y count, so callers removing
    /// non-identity sites own that bookkeeping.
    pub fn compress(&self, keep: u64) -> Self {
        let keep = keep & mask(self.n);
        let mut x = 0u64;
        let mut z = 0u64;
        let mut out = 0;
        let mut rest = keep;
        while rest != 0 {
            let q = rest.trailing_zeros();
            x |= (self.x >> q & 1) << out;
            z |= (self.z >> q & 1) << out;
            out += 1;
            rest &= rest - 1;
        }
        PauliOperator { n: out, x, z, phase: self.phase }
    }

    /// Restriction to `positions`, in the given order.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        let mut op = Self::identity(positions.len());
        for (out, &q) in positions.iter().enumerate() {
            op.set_letter(out, self.letter(q));
        }
        op.phase = self.phase;
        op
    }

    // Clifford conjugation P -> U P U^dag, updating bits and phase in place.
    // The phase flips below are exact for the Y = i*X*Z convention and are
    // pinned by an exhaustive dense-matrix test.

    pub fn conj_h(&mut self, q: usize) {
        let xq = self.x >> q & 1;
        let zq = self.z >> q & 1;
        self.phase = (self.phase + 2 * (xq & zq) as u8) & 3;
        self.x = self.x & !(1 << q) | zq << q;
        self.z = self.z & !(1 << q) | xq << q;
    }

    pub fn conj_s(&mut self, q: usize) {
        let xq = self.x >> q & 1;
        let zq = self.z >> q & 1;
        self.phase = (self.phase + 2 * (xq & zq) as u8) & 3;
        self.z ^= xq << q;
    }

    pub fn conj_sdg(&mut self, q: usize) {
        let xq = self.x >> q & 1;
        let zq = self.z >> q & 1;
        self.phase = (self.phase + 2 * (xq & (1 - zq)) as u8) & 3;
        self.z ^= xq << q;
    }

    pub fn conj_x(&mut self, q: usize) {
        let zq = self.z >> q & 1;
        self.phase = (self.phase + 2 * zq as u8) & 3;
    }

    pub fn conj_y(&mut self, q: usize) {
        let b = (self.x ^ self.z) >> q & 1;
        self.phase = (self.phase + 2 * b as u8) & 3;
    }

    pub fn conj_z(&mut self, q: usize) {
        let xq = self.x >> q & 1;
        self.phase = (self.phase + 2 * xq as u8) & 3;
    }

    pub fn conj_cx(&mut self, c: usize, t: usize) {
        let xc = self.x >> c & 1;
        let zc = self.z >> c & 1;
        let xt = self.x >> t & 1;
        let zt = self.z >> t & 1;
        self.phase = (self.phase + 2 * (xc & zt & (xt ^ zc ^ 1)) as u8) & 3;
        self.x ^= xc << t;
        self.z ^= zt << c;
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let xa = self.x >> a & 1;
        let za = self.z >> a & 1;
        let xb = self.x >> b & 1;
        let zb = self.z >> b & 1;
        self.phase = (self.phase + 2 * (xa & xb & (za ^ zb)) as u8) & 3;
        self.z ^= xb << a;
        self.z ^= xa << b;
    }

    pub fn conj_swap(&mut self, a: usize, b: usize) {
        let xa = self.x >> a & 1;
        let xb = self.x >> b & 1;
        let za = self.z >> a & 1;
        let zb = self.z >> b & 1;
        self.x = self.x & !(1 << a) & !(1 << b) | xb << a | xa << b;
        self.z = self.z & !(1 << a) & !(1 << b) | zb << a | za << b;
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            0 => write!(f, "+")?,
            1 => write!(f, "+i")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i")?,
        }
        for q in 0..self.n() {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Accepts an optional sign (`+`, `-`, the Unicode minus, `+i`, `-i`)
    /// followed by letters over `IXYZ`; qubit 0 is the leftmost letter.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParsePauli(s.to_string());
        let mut rest = s.trim();
        let mut phase = 0u8;
        if let Some(r) = rest.strip_prefix("+i") {
            phase = 1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix("-i").or_else(|| rest.strip_prefix("\u{2212}i")) {
            phase = 3;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-').or_else(|| rest.strip_prefix('\u{2212}')) {
            phase = 2;
            rest = r;
        }
        if rest.is_empty() || rest.len() > MAX_QUBITS {
            return Err(bad());
        }
        let mut op = Self::identity(rest.len());
        for (q, c) in rest.chars().enumerate() {
            op.set_letter(q, Pauli::from_char(c).ok_or_else(bad)?);
        }
        op.phase = phase;
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_site_products() {
        // X*Z = -iY, Z*X = +iY, X*Y = iZ, Y*X = -iZ, Y*Y = I.
        assert_eq!(p("X").multiply(&p("Z")).unwrap().to_string(), "-iY");
        assert_eq!(p("Z").multiply(&p("X")).unwrap().to_string(), "+iY");
        assert_eq!(p("X").multiply(&p("Y")).unwrap().to_string(), "+iZ");
        assert_eq!(p("Y").multiply(&p("X")).unwrap().to_string(), "-iZ");
        assert!(p("Y").multiply(&p("Y")).unwrap().is_identity());
    }

    #[test]
    fn xz_squared_is_minus_identity() {
        let xz = p("X").multiply(&p("Z")).unwrap();
        let sq = xz.multiply(&xz).unwrap();
        assert!(sq.is_identity_word());
        assert_eq!(sq.sign().unwrap(), -1);
    }

    #[test]
    fn signs_compose() {
        let a = p("-XX");
        let b = p("-ZZ");
        let ab = a.multiply(&b).unwrap();
        // (-XX)(-ZZ) = XZ (x) XZ = (-iY)(x)(-iY) = -YY
        assert_eq!(ab.to_string(), "-YY");
    }

    #[test]
    fn symplectic_is_commutation() {
        assert_eq!(p("XZZXI").symplectic(&p("IXZZX")).unwrap(), 0);
        assert_eq!(p("X").symplectic(&p("Z")).unwrap(), 1);
        assert_eq!(p("XX").symplectic(&p("ZZ")).unwrap(), 0);
        assert_eq!(p("XI").symplectic(&p("ZI")).unwrap(), 1);
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["+XIZY", "-ZZZZ", "+I", "-YXIZ"] {
            assert_eq!(p(s).to_string(), s);
        }
        // Unicode minus and bare strings normalize.
        assert_eq!(p("\u{2212}XY").to_string(), "-XY");
        assert_eq!(p("XY").to_string(), "+XY");
        assert!("+XQ".parse::<PauliOperator>().is_err());
        assert!("".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn tensor_and_restrict() {
        let t = p("-XY").tensor(&p("Z")).unwrap();
        assert_eq!(t.to_string(), "-XYZ");
        assert_eq!(t.restrict(&[2, 0]).to_string(), "-ZX");
        assert_eq!(t.compress(0b101).to_string(), "-XZ");
    }

    #[test]
    fn conjugation_basics() {
        let mut op = p("X");
        op.conj_h(0);
        assert_eq!(op.to_string(), "+Z");
        let mut op = p("Y");
        op.conj_h(0);
        assert_eq!(op.to_string(), "-Y");
        let mut op = p("X");
        op.conj_s(0);
        assert_eq!(op.to_string(), "+Y");
        op.conj_s(0);
        assert_eq!(op.to_string(), "-X");
        let mut op = p("XI");
        op.conj_cx(0, 1);
        assert_eq!(op.to_string(), "+XX");
        let mut op = p("IZ");
        op.conj_cx(0, 1);
        assert_eq!(op.to_string(), "+ZZ");
        let mut op = p("XZ");
        op.conj_cx(0, 1);
        assert_eq!(op.to_string(), "-YY");
        let mut op = p("XY");
        op.conj_cz(0, 1);
        assert_eq!(op.to_string(), "-YX");
    }

    #[test]
    fn weight_counts_non_identity_sites() {
        assert_eq!(p("XIZYI").weight(), 3);
        assert_eq!(PauliOperator::identity(5).weight(), 0);
    }
}
