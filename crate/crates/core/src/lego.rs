//! Tensor building blocks and networks.
//!
//! A block is a stabilizer state on its legs. Gluing two legs projects them
//! onto the Bell pair (|00> + |11>)/sqrt(2): the surviving group is the
//! subgroup acting as matched letters on the glued pair, with the pair
//! deleted and a sign flip for matched Y (x) Y, since (Y(x)Y)|Phi+> = -|Phi+>.

use std::fmt;
use std::str::FromStr;

use crate::code::CheckMatrix;
use crate::error::{Error, Result};
use crate::group::{rref, subset_product, BitMatrix};
use crate::pauli::{Pauli, PauliOperator, MAX_QUBITS};

/// A named building block: a stabilizer state on `legs` legs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegoBlock {
    name: String,
    legs: usize,
    group: Vec<PauliOperator>,
}

impl LegoBlock {
    /// Validates that the generators form a stabilizer state on the legs:
    /// pairwise commuting, independent, full rank, real signs.
    pub fn new(name: impl Into<String>, legs: usize, group: Vec<PauliOperator>) -> Result<Self> {
        let name = name.into();
        if legs == 0 || legs > MAX_QUBITS {
            return Err(Error::Config(format!("block {name} has {legs} legs")));
        }
        for g in &group {
            if g.n() != legs {
                return Err(Error::Config(format!(
                    "block {name}: generator {g} does not act on {legs} legs"
                )));
            }
            if g.sign().is_err() {
                return Err(Error::Config(format!("block {name}: generator {g} is not +/-1 signed")));
            }
        }
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if !a.commutes(b)? {
                    return Err(Error::Config(format!("block {name}: {a} and {b} anticommute")));
                }
            }
        }
        let r = rref(&group)?;
        if r.inconsistent {
            return Err(Error::Config(format!("block {name}: -I is derivable")));
        }
        if r.rank() != group.len() || group.len() != legs {
            return Err(Error::Config(format!(
                "block {name}: rank {} generators on {legs} legs is not a stabilizer state",
                r.rank()
            )));
        }
        Ok(LegoBlock { name, legs, group })
    }

    /// Two-leg Bell pair {XX, ZZ}: the identity wire.
    pub fn bell() -> Self {
        let p = |s: &str| s.parse::<PauliOperator>().unwrap();
        LegoBlock::new("BELL", 2, vec![p("XX"), p("ZZ")]).unwrap()
    }

    /// The six-leg T6 tensor: the encoding state of the [[4,2,2]] code with
    /// both logical legs exposed (legs 0-3 physical, legs 4-5 logical).
    pub fn t6() -> Self {
        let p = |s: &str| s.parse::<PauliOperator>().unwrap();
        LegoBlock::new(
            "T6",
            6,
            vec![
                p("XXXXII"),
                p("ZZZZII"),
                p("XXIIXI"),
                p("ZIZIZI"),
                p("XIXIIX"),
                p("ZZIIIZ"),
            ],
        )
        .unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn group(&self) -> &[PauliOperator] {
        &self.group
    }
}

/// The available blocks, looked up by name.
#[derive(Clone, Debug)]
pub struct Palette {
    blocks: Vec<LegoBlock>,
}

impl Palette {
    /// T6 plus the Bell wire.
    pub fn standard() -> Self {
        Palette { blocks: vec![LegoBlock::t6(), LegoBlock::bell()] }
    }

    pub fn empty() -> Self {
        Palette { blocks: vec![] }
    }

    pub fn register(&mut self, block: LegoBlock) -> Result<()> {
        if self.get(block.name()).is_some() {
            return Err(Error::Config(format!("block {} already registered", block.name())));
        }
        self.blocks.push(block);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&LegoBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn blocks(&self) -> &[LegoBlock] {
        &self.blocks
    }
}

impl Default for Palette {
    fn default() -> Self {
        Palette::standard()
    }
}

/// A leg address: block index in insertion order, leg index within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegId {
    pub block: usize,
    pub leg: usize,
}

impl fmt::Display for LegId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}.{})", self.block, self.leg)
    }
}

impl FromStr for LegId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad leg id {s:?}"));
        let inner = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (b, l) = inner.split_once('.').ok_or_else(bad)?;
        Ok(LegId {
            block: b.parse().map_err(|_| bad())?,
            leg: l.parse().map_err(|_| bad())?,
        })
    }
}

/// A partially contracted network with an incrementally maintained derived
/// group over its open legs (kept in rref form, so equal states compare
/// equal regardless of the contraction order that produced them).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegoNetwork {
    block_names: Vec<String>,
    block_legs: Vec<usize>,
    contractions: Vec<(LegId, LegId)>,
    logical: Vec<LegId>,
    open: Vec<LegId>,
    gens: Vec<PauliOperator>,
}

impl LegoNetwork {
    pub fn new() -> Self {
        LegoNetwork {
            block_names: vec![],
            block_legs: vec![],
            contractions: vec![],
            logical: vec![],
            open: vec![],
            gens: vec![],
        }
    }

    pub fn add_block(&self, block: &LegoBlock) -> Result<Self> {
        let total = self.open.len() + block.legs();
        if total > MAX_QUBITS {
            return Err(Error::CapacityExceeded(total));
        }
        let mut next = self.clone();
        let block_idx = next.block_names.len();
        next.block_names.push(block.name().to_string());
        next.block_legs.push(block.legs());
        let old_open = next.open.len();
        for leg in 0..block.legs() {
            next.open.push(LegId { block: block_idx, leg });
        }
        let pad_front = PauliOperator::identity(old_open);
        let mut gens: Vec<PauliOperator> = next
            .gens
            .iter()
            .map(|g| g.tensor(&PauliOperator::identity(block.legs())))
            .collect::<Result<_>>()?;
        for g in block.group() {
            gens.push(pad_front.tensor(g)?);
        }
        next.gens = rref(&gens)?.basis;
        Ok(next)
    }

    fn open_position(&self, leg: LegId) -> Result<usize> {
        self.open
            .iter()
            .position(|&l| l == leg)
            .ok_or_else(|| Error::LegNotOpen(leg.to_string()))
    }

    /// Glues two open legs. Errors with [`Error::DegenerateContraction`]
    /// when the projection annihilates the network state; that is still a
    /// legal move for the construction game, just a dead end.
    pub fn contract(&self, a: LegId, b: LegId) -> Result<Self> {
        if a == b {
            return Err(Error::Config(format!("cannot contract {a} with itself")));
        }
        if self.logical.contains(&a) || self.logical.contains(&b) {
            return Err(Error::InvalidAssignment(format!(
                "cannot contract logical leg {}",
                if self.logical.contains(&a) { a } else { b }
            )));
        }
        let pa = self.open_position(a)?;
        let pb = self.open_position(b)?;
        let m = self.gens.len();
        let mut constraints = BitMatrix::new(m);
        let mut row_x = 0u64;
        let mut row_z = 0u64;
        for (i, g) in self.gens.iter().enumerate() {
            row_x |= ((g.x_bit(pa) ^ g.x_bit(pb)) as u64) << i;
            row_z |= ((g.z_bit(pa) ^ g.z_bit(pb)) as u64) << i;
        }
        constraints.push(row_x);
        constraints.push(row_z);
        let keep = !(1u64 << pa | 1u64 << pb);
        let mut projected = Vec::new();
        for word in constraints.kernel_basis() {
            let mut e = subset_product(&self.gens, word)?;
            debug_assert_eq!(e.letter(pa), e.letter(pb));
            if e.letter(pa) == Pauli::Y {
                e.negate();
            }
            projected.push(e.compress(keep));
        }
        let reduced = rref(&projected)?;
        if reduced.inconsistent {
            return Err(Error::DegenerateContraction);
        }
        let mut next = self.clone();
        next.contractions.push((a, b));
        next.open.retain(|&l| l != a && l != b);
        next.gens = reduced.basis;
        debug_assert_eq!(next.gens.len(), next.open.len());
        Ok(next)
    }

    /// Marks an open leg as a logical leg; assignment order is logical
    /// qubit order.
    pub fn assign_logical(&self, leg: LegId) -> Result<Self> {
        self.open_position(leg)?;
        if self.logical.contains(&leg) {
            return Err(Error::InvalidAssignment(format!("{leg} is already logical")));
        }
        let mut next = self.clone();
        next.logical.push(leg);
        Ok(next)
    }

    pub fn open_legs(&self) -> &[LegId] {
        &self.open
    }

    pub fn logical_legs(&self) -> &[LegId] {
        &self.logical
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    pub fn blocks(&self) -> &[String] {
        &self.block_names
    }

    pub fn contractions(&self) -> &[(LegId, LegId)] {
        &self.contractions
    }

    /// Fully contracted network with no open legs left.
    pub fn is_scalar(&self) -> bool {
        self.open.is_empty()
    }

    /// Physical qubit count if a code were derived right now.
    pub fn physical_count(&self) -> usize {
        self.open.len() - self.logical.len()
    }

    /// Splits the derived group into stabilizers and logical pairs, reading
    /// the network state as the encoding state of a code whose logical legs
    /// are the assigned ones.
    pub fn derive_code(&self) -> Result<CheckMatrix> {
        let total = self.open.len();
        if self.gens.len() != total {
            return Err(Error::NotResolved(format!(
                "derived group has rank {} on {total} open legs",
                self.gens.len()
            )));
        }
        let k = self.logical.len();
        if k == 0 {
            return Err(Error::InvalidAssignment("no logical legs assigned".into()));
        }
        let n = total - k;
        if n == 0 {
            return Err(Error::InvalidAssignment("no physical legs left".into()));
        }
        if k > n {
            return Err(Error::InvalidAssignment(format!(
                "cannot encode {k} logical qubits into {n} physical legs"
            )));
        }
        let log_pos: Vec<usize> = self
            .logical
            .iter()
            .map(|&l| self.open_position(l))
            .collect::<Result<_>>()?;
        let phys_pos: Vec<usize> =
            (0..total).filter(|p| !log_pos.contains(p)).collect();
        let m = self.gens.len();
        let mut constraints = BitMatrix::new(m);
        for &lp in &log_pos {
            let mut row_x = 0u64;
            let mut row_z = 0u64;
            for (i, g) in self.gens.iter().enumerate() {
                row_x |= (g.x_bit(lp) as u64) << i;
                row_z |= (g.z_bit(lp) as u64) << i;
            }
            constraints.push(row_x);
            constraints.push(row_z);
        }
        let kernel = constraints.kernel_basis();
        if kernel.len() != n - k {
            return Err(Error::InvalidAssignment(format!(
                "logical legs are not independent: {} stabilizers for an [[{n}, {k}]] code",
                kernel.len()
            )));
        }
        let mut stabilizers = Vec::with_capacity(n - k);
        for word in kernel {
            stabilizers.push(subset_product(&self.gens, word)?.restrict(&phys_pos));
        }
        let stabilizers = rref(&stabilizers)?.basis;
        let stab_rref = rref(&stabilizers)?;
        let mut logical_x = Vec::with_capacity(k);
        let mut logical_z = Vec::with_capacity(k);
        for (i, _) in self.logical.iter().enumerate() {
            for (want_x, out) in [(true, &mut logical_x), (false, &mut logical_z)] {
                let mut rhs = vec![false; 2 * k];
                rhs[2 * i + usize::from(!want_x)] = true;
                let word = constraints.solve(&rhs).ok_or_else(|| {
                    Error::InvalidAssignment(format!(
                        "no group element acts as {} on logical leg {}",
                        if want_x { "X" } else { "Z" },
                        self.logical[i]
                    ))
                })?;
                let e = subset_product(&self.gens, word)?.restrict(&phys_pos);
                out.push(stab_rref.reduce(&e)?);
            }
        }
        CheckMatrix::new(n, stabilizers, logical_x, logical_z)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("BLOCKS\n");
        for name in &self.block_names {
            out.push_str(name);
            out.push('\n');
        }
        out.push_str("CONTRACT\n");
        for (a, b) in &self.contractions {
            out.push_str(&format!("{a}-{b}\n"));
        }
        out.push_str("LOGICAL\n");
        for l in &self.logical {
            out.push_str(&format!("{l}\n"));
        }
        out
    }

    /// Rebuilds a network by replaying a description against a palette.
    pub fn from_text(text: &str, palette: &Palette) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Blocks,
            Contract,
            Logical,
        }
        let mut net = LegoNetwork::new();
        let mut section = Section::None;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "BLOCKS" => section = Section::Blocks,
                "CONTRACT" => section = Section::Contract,
                "LOGICAL" => section = Section::Logical,
                item => match section {
                    Section::None => {
                        return Err(Error::Parse(format!("{item:?} before any section")));
                    }
                    Section::Blocks => {
                        let block = palette
                            .get(item)
                            .ok_or_else(|| Error::UnknownBlock(item.to_string()))?;
                        net = net.add_block(block)?;
                    }
                    Section::Contract => {
                        let (a, b) = item
                            .split_once('-')
                            .ok_or_else(|| Error::Parse(format!("bad contraction {item:?}")))?;
                        net = net.contract(a.parse()?, b.parse()?)?;
                    }
                    Section::Logical => {
                        net = net.assign_logical(item.parse()?)?;
                    }
                },
            }
        }
        Ok(net)
    }
}

impl Default for LegoNetwork {
    fn default() -> Self {
        LegoNetwork::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leg(block: usize, leg: usize) -> LegId {
        LegId { block, leg }
    }

    #[test]
    fn bell_with_one_logical_leg_is_the_identity_code() {
        let net = LegoNetwork::new()
            .add_block(&LegoBlock::bell())
            .unwrap()
            .assign_logical(leg(0, 1))
            .unwrap();
        let code = net.derive_code().unwrap();
        assert_eq!(code.n(), 1);
        assert_eq!(code.k(), 1);
        assert!(code.stabilizers().is_empty());
        assert_eq!(code.logical_x()[0].to_string(), "+X");
        assert_eq!(code.logical_z()[0].to_string(), "+Z");
    }

    #[test]
    fn bell_self_trace_is_a_scalar() {
        let net = LegoNetwork::new()
            .add_block(&LegoBlock::bell())
            .unwrap()
            .contract(leg(0, 0), leg(0, 1))
            .unwrap();
        assert!(net.is_scalar());
        assert!(net.generators().is_empty());
    }

    #[test]
    fn triplet_self_trace_is_degenerate() {
        // {XX, -ZZ} stabilizes (|01> + |10>)/sqrt(2), orthogonal to |Phi+>.
        let p = |s: &str| s.parse::<PauliOperator>().unwrap();
        let block = LegoBlock::new("TRIPLET", 2, vec![p("XX"), p("-ZZ")]).unwrap();
        let err = LegoNetwork::new()
            .add_block(&block)
            .unwrap()
            .contract(leg(0, 0), leg(0, 1))
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateContraction));
    }

    #[test]
    fn t6_with_its_logical_legs_recovers_the_four_two_two_code() {
        let net = LegoNetwork::new()
            .add_block(&LegoBlock::t6())
            .unwrap()
            .assign_logical(leg(0, 4))
            .unwrap()
            .assign_logical(leg(0, 5))
            .unwrap();
        let code = net.derive_code().unwrap();
        assert_eq!((code.n(), code.k()), (4, 2));
        let r = rref(code.stabilizers()).unwrap();
        assert!(r.contains(&"XXXX".parse().unwrap()).unwrap());
        assert!(r.contains(&"ZZZZ".parse().unwrap()).unwrap());
    }

    #[test]
    fn gluing_reduces_generator_count_by_two() {
        let t6 = LegoBlock::t6();
        let net = LegoNetwork::new().add_block(&t6).unwrap().add_block(&t6).unwrap();
        assert_eq!(net.generators().len(), 12);
        let glued = net.contract(leg(0, 0), leg(1, 0)).unwrap();
        assert_eq!(glued.generators().len(), 10);
        assert_eq!(glued.open_legs().len(), 10);
    }

    #[test]
    fn contraction_order_does_not_change_the_state() {
        let t6 = LegoBlock::t6();
        let base = LegoNetwork::new().add_block(&t6).unwrap().add_block(&t6).unwrap();
        let ab = base
            .contract(leg(0, 0), leg(1, 0))
            .unwrap()
            .contract(leg(0, 1), leg(1, 1))
            .unwrap();
        let ba = base
            .contract(leg(0, 1), leg(1, 1))
            .unwrap()
            .contract(leg(0, 0), leg(1, 0))
            .unwrap();
        assert_eq!(ab.generators(), ba.generators());
    }

    #[test]
    fn bell_wire_acts_as_identity() {
        // T6 leg 4 through a Bell wire: same code as assigning leg 4 itself.
        let direct = LegoNetwork::new()
            .add_block(&LegoBlock::t6())
            .unwrap()
            .assign_logical(leg(0, 4))
            .unwrap();
        let wired = LegoNetwork::new()
            .add_block(&LegoBlock::t6())
            .unwrap()
            .add_block(&LegoBlock::bell())
            .unwrap()
            .contract(leg(0, 4), leg(1, 0))
            .unwrap()
            .assign_logical(leg(1, 1))
            .unwrap();
        let a = direct.derive_code().unwrap();
        let b = wired.derive_code().unwrap();
        assert_eq!(a.canonical_key().unwrap(), b.canonical_key().unwrap());
    }

    #[test]
    fn text_round_trip() {
        let t6 = LegoBlock::t6();
        let net = LegoNetwork::new()
            .add_block(&t6)
            .unwrap()
            .add_block(&LegoBlock::bell())
            .unwrap()
            .contract(leg(0, 0), leg(1, 0))
            .unwrap()
            .assign_logical(leg(0, 4))
            .unwrap();
        let text = net.to_text();
        let back = LegoNetwork::from_text(&text, &Palette::standard()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn contracting_a_logical_leg_is_rejected() {
        let net = LegoNetwork::new()
            .add_block(&LegoBlock::bell())
            .unwrap()
            .assign_logical(leg(0, 0))
            .unwrap();
        assert!(net.contract(leg(0, 0), leg(0, 1)).is_err());
    }
}
