//! The code-construction game: a deterministic environment whose moves
//! assemble a [`LegoNetwork`] and whose terminal states carry either a
//! derived [`CheckMatrix`] or a degeneracy flag.

use std::fmt;

use crate::code::CheckMatrix;
use crate::error::{Error, Result};
use crate::lego::{LegId, LegoNetwork, Palette};

pub const DEFAULT_MAX_QUBITS: usize = 10;

/// Extra open legs allowed beyond the physical-qubit cap while a network is
/// under construction, so a full-size block can still be attached to a
/// cap-sized intermediate and contracted down.
pub const LEG_HEADROOM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Attach the palette block at this index.
    AddBlock(usize),
    /// Glue two open legs.
    Contract(LegId, LegId),
    /// Designate an open leg as a logical leg.
    AssignLogical(LegId),
    /// Terminate and read the network as a code.
    Stop,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::AddBlock(i) => write!(f, "add#{i}"),
            Action::Contract(a, b) => write!(f, "join {a} {b}"),
            Action::AssignLogical(l) => write!(f, "logical {l}"),
            Action::Stop => write!(f, "stop"),
        }
    }
}

/// How an episode ended.
#[derive(Clone, Debug)]
pub enum Terminal {
    /// Stopped on a valid code.
    Code(CheckMatrix),
    /// Dead end: a degenerate contraction, or the move cap ran out before
    /// the network could be read as a code. Scores worst-possible reward.
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct GameState {
    network: LegoNetwork,
    history: Vec<Action>,
    terminal: Option<Terminal>,
}

impl GameState {
    pub fn network(&self) -> &LegoNetwork {
        &self.network
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn terminal(&self) -> Option<&Terminal> {
        self.terminal.as_ref()
    }

    pub fn code(&self) -> Option<&CheckMatrix> {
        match &self.terminal {
            Some(Terminal::Code(c)) => Some(c),
            _ => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.terminal, Some(Terminal::Degenerate))
    }

    /// Stable identity for tabular agents and transposition tables: block
    /// list plus the contraction and logical-leg *sets* (sorted, so states
    /// reached by reordered joins or assignments share a key), plus the
    /// terminal flag.
    pub fn key(&self) -> String {
        let mut joins: Vec<(LegId, LegId)> = self
            .network
            .contractions()
            .iter()
            .map(|&(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        joins.sort();
        let mut logical: Vec<LegId> = self.network.logical_legs().to_vec();
        logical.sort();
        let mut key = self.network.blocks().join(",");
        key.push('|');
        for (a, b) in joins {
            key.push_str(&format!("{a}{b}"));
        }
        key.push('|');
        for l in logical {
            key.push_str(&l.to_string());
        }
        match &self.terminal {
            None => key,
            Some(Terminal::Code(_)) => format!("{key}!stop"),
            Some(Terminal::Degenerate) => format!("{key}!dead"),
        }
    }
}

pub struct Game {
    palette: Palette,
    max_qubits: usize,
}

impl Game {
    pub fn new(palette: Palette, max_qubits: usize) -> Result<Self> {
        if palette.blocks().is_empty() {
            return Err(Error::Config("palette has no blocks".into()));
        }
        if max_qubits == 0 {
            return Err(Error::Config("qubit cap must be positive".into()));
        }
        Ok(Game { palette, max_qubits })
    }

    pub fn standard(max_qubits: usize) -> Result<Self> {
        Game::new(Palette::standard(), max_qubits)
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    /// Open legs a network may carry while under construction.
    pub fn leg_budget(&self) -> usize {
        self.max_qubits + LEG_HEADROOM
    }

    /// Hard cap on moves per episode; reaching it forces termination.
    pub fn episode_cap(&self) -> usize {
        4 * self.max_qubits
    }

    pub fn initial(&self) -> GameState {
        GameState { network: LegoNetwork::new(), history: vec![], terminal: None }
    }

    /// The code this state would terminate with, were STOP played now.
    fn stop_code(&self, state: &GameState) -> Result<CheckMatrix> {
        let code = state.network.derive_code()?;
        if code.n() > self.max_qubits {
            return Err(Error::CapacityExceeded(code.n()));
        }
        Ok(code)
    }

    /// Every action legal in `state`, in a fixed deterministic order:
    /// block additions, contractions over open-leg pairs, logical
    /// assignments, then STOP.
    pub fn legal_actions(&self, state: &GameState) -> Vec<Action> {
        if state.is_terminal() {
            return vec![];
        }
        let mut out = Vec::new();
        let open = state.network.open_legs();
        for (i, block) in self.palette.blocks().iter().enumerate() {
            if open.len() + block.legs() <= self.leg_budget() {
                out.push(Action::AddBlock(i));
            }
        }
        let free: Vec<LegId> = open
            .iter()
            .copied()
            .filter(|l| !state.network.logical_legs().contains(l))
            .collect();
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                out.push(Action::Contract(free[i], free[j]));
            }
        }
        // Assignment keeps at least one physical leg in reserve, so a STOP
        // stays reachable.
        if state.network.physical_count() >= 2 {
            for &l in &free {
                out.push(Action::AssignLogical(l));
            }
        }
        if self.stop_code(state).is_ok() {
            out.push(Action::Stop);
        }
        out
    }

    /// Applies one move. Degenerate contractions are legal moves that end
    /// the episode as a [`Terminal::Degenerate`] dead end; structurally
    /// illegal moves error. Hitting the episode cap force-finishes the
    /// state: as a code if one is derivable, else as a dead end.
    pub fn apply(&self, state: &GameState, action: Action) -> Result<GameState> {
        if state.is_terminal() {
            return Err(Error::Config("episode is already terminal".into()));
        }
        let mut next = state.clone();
        next.history.push(action);
        match action {
            Action::AddBlock(i) => {
                let block = self
                    .palette
                    .blocks()
                    .get(i)
                    .ok_or_else(|| Error::Config(format!("no palette block #{i}")))?;
                if state.network.open_legs().len() + block.legs() > self.leg_budget() {
                    return Err(Error::CapacityExceeded(
                        state.network.open_legs().len() + block.legs(),
                    ));
                }
                next.network = state.network.add_block(block)?;
            }
            Action::Contract(a, b) => match state.network.contract(a, b) {
                Ok(n) => next.network = n,
                Err(Error::DegenerateContraction) => {
                    next.terminal = Some(Terminal::Degenerate);
                    return Ok(next);
                }
                Err(e) => return Err(e),
            },
            Action::AssignLogical(l) => {
                if state.network.physical_count() < 2 {
                    return Err(Error::InvalidAssignment(
                        "a code needs at least one physical leg".into(),
                    ));
                }
                next.network = state.network.assign_logical(l)?;
            }
            Action::Stop => {
                next.terminal = Some(Terminal::Code(self.stop_code(state)?));
                return Ok(next);
            }
        }
        if next.history.len() >= self.episode_cap() {
            next.terminal = Some(match self.stop_code(&next) {
                Ok(code) => Terminal::Code(code),
                Err(_) => Terminal::Degenerate,
            });
        } else if self.legal_actions(&next).is_empty() {
            // Stalemate (e.g. budget exhausted with one free leg left):
            // close the episode so every non-terminal state has a move.
            next.terminal = Some(Terminal::Degenerate);
        }
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lego::LegoBlock;
    use crate::pauli::PauliOperator;

    fn leg(block: usize, leg: usize) -> LegId {
        LegId { block, leg }
    }

    #[test]
    fn empty_state_offers_only_block_additions() {
        let game = Game::standard(DEFAULT_MAX_QUBITS).unwrap();
        let actions = game.legal_actions(&game.initial());
        assert_eq!(actions.len(), game.palette().blocks().len());
        assert!(actions.iter().all(|a| matches!(a, Action::AddBlock(_))));
    }

    #[test]
    fn leg_budget_gates_block_additions() {
        let game = Game::standard(DEFAULT_MAX_QUBITS).unwrap();
        assert_eq!(game.leg_budget(), 16);
        let t6 = game.palette().blocks().iter().position(|b| b.name() == "T6").unwrap();
        let bell = game.palette().blocks().iter().position(|b| b.name() == "BELL").unwrap();
        let mut s = game.initial();
        for _ in 0..2 {
            s = game.apply(&s, Action::AddBlock(t6)).unwrap();
        }
        // 12 open legs: another T6 (18) is over budget, a Bell (14) fits.
        let actions = game.legal_actions(&s);
        assert!(!actions.contains(&Action::AddBlock(t6)));
        assert!(actions.contains(&Action::AddBlock(bell)));
        for _ in 0..2 {
            s = game.apply(&s, Action::AddBlock(bell)).unwrap();
        }
        assert_eq!(s.network().open_legs().len(), 16);
        assert!(!game.legal_actions(&s).iter().any(|a| matches!(a, Action::AddBlock(_))));
    }

    #[test]
    fn stop_appears_exactly_when_a_code_is_readable() {
        let game = Game::standard(DEFAULT_MAX_QUBITS).unwrap();
        let bell = game.palette().blocks().iter().position(|b| b.name() == "BELL").unwrap();
        let mut s = game.initial();
        assert!(!game.legal_actions(&s).contains(&Action::Stop));
        s = game.apply(&s, Action::AddBlock(bell)).unwrap();
        assert!(!game.legal_actions(&s).contains(&Action::Stop));
        s = game.apply(&s, Action::AssignLogical(leg(0, 0))).unwrap();
        assert!(game.legal_actions(&s).contains(&Action::Stop));
        let done = game.apply(&s, Action::Stop).unwrap();
        assert!(done.is_terminal());
        let code = done.code().unwrap();
        assert_eq!((code.n(), code.k()), (1, 1));
        assert!(game.legal_actions(&done).is_empty());
        assert!(game.apply(&done, Action::Stop).is_err());
    }

    #[test]
    fn degenerate_contraction_is_a_legal_dead_end() {
        // {XX, -ZZ} self-traces to an annihilated network.
        let p = |s: &str| s.parse::<PauliOperator>().unwrap();
        let mut palette = Palette::empty();
        palette
            .register(LegoBlock::new("TRIPLET", 2, vec![p("XX"), p("-ZZ")]).unwrap())
            .unwrap();
        let game = Game::new(palette, 4).unwrap();
        let s = game.apply(&game.initial(), Action::AddBlock(0)).unwrap();
        let fatal = Action::Contract(leg(0, 0), leg(0, 1));
        assert!(game.legal_actions(&s).contains(&fatal));
        let dead = game.apply(&s, fatal).unwrap();
        assert!(dead.is_degenerate());
        assert!(dead.code().is_none());
    }

    #[test]
    fn logical_legs_cannot_be_contracted_or_reassigned() {
        let game = Game::standard(DEFAULT_MAX_QUBITS).unwrap();
        let mut s = game.initial();
        s = game.apply(&s, Action::AddBlock(0)).unwrap();
        s = game.apply(&s, Action::AssignLogical(leg(0, 0))).unwrap();
        let actions = game.legal_actions(&s);
        assert!(!actions.iter().any(|a| match a {
            Action::Contract(x, y) => *x == leg(0, 0) || *y == leg(0, 0),
            Action::AssignLogical(l) => *l == leg(0, 0),
            _ => false,
        }));
        assert!(game.apply(&s, Action::AssignLogical(leg(0, 0))).is_err());
    }

    #[test]
    fn episode_cap_forces_termination() {
        let game = Game::standard(2).unwrap();
        let bell = game.palette().blocks().iter().position(|b| b.name() == "BELL").unwrap();
        let mut s = game.initial();
        // Churn moves that never STOP: add a Bell, self-trace it (scalar
        // factor, non-degenerate), repeat until the cap trips.
        while !s.is_terminal() {
            assert!(s.history().len() < game.episode_cap());
            let block = s.network().blocks().len();
            s = game.apply(&s, Action::AddBlock(bell)).unwrap();
            if s.is_terminal() {
                break;
            }
            s = game.apply(&s, Action::Contract(leg(block, 0), leg(block, 1))).unwrap();
        }
        assert_eq!(s.history().len(), game.episode_cap());
        // Nothing logical was ever assigned, so the forced finish is dead.
        assert!(s.is_degenerate());
    }

    #[test]
    fn every_offered_action_applies_cleanly() {
        use rand::{Rng, SeedableRng};
        let game = Game::standard(6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let mut s = game.initial();
            while !s.is_terminal() {
                let actions = game.legal_actions(&s);
                assert!(!actions.is_empty(), "non-terminal state with no moves");
                for &a in &actions {
                    game.apply(&s, a).expect("offered action must apply");
                }
                let pick = actions[rng.gen_range(0..actions.len())];
                s = game.apply(&s, pick).unwrap();
            }
            if let Some(code) = s.code() {
                assert!(code.n() <= game.max_qubits());
                assert!(code.k() >= 1);
            }
        }
    }
}
