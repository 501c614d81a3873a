//! Search agents for the construction game, behind a common episodic
//! interface so the learning loop can swap them freely.

use std::collections::HashMap;
use std::fmt;
use std::mem;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::game::{Action, GameState};

/// An episodic decision-maker. The learning loop drives it as:
/// `begin_episode`, then `choose` once per move, then `observe` with the
/// terminal state and its reward.
pub trait Agent {
    fn begin_episode(&mut self);

    /// Picks one of the offered actions; `actions` is never empty and its
    /// order is deterministic for a given state.
    fn choose(&mut self, state: &GameState, actions: &[Action], rng: &mut ChaCha8Rng) -> Action;

    fn observe(&mut self, terminal: &GameState, reward: f64);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentKind {
    Random,
    EpsilonGreedy,
    Mcts,
}

impl AgentKind {
    pub fn build(self) -> Box<dyn Agent> {
        match self {
            AgentKind::Random => Box::new(RandomAgent),
            AgentKind::EpsilonGreedy => Box::new(EpsilonGreedyAgent::new(0.1)),
            AgentKind::Mcts => Box::new(MctsAgent::new(std::f64::consts::SQRT_2)),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Random => "random",
            AgentKind::EpsilonGreedy => "greedy-epsilon",
            AgentKind::Mcts => "mcts",
        })
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "random" => Ok(AgentKind::Random),
            "greedy-epsilon" => Ok(AgentKind::EpsilonGreedy),
            "mcts" => Ok(AgentKind::Mcts),
            other => Err(Error::Parse(format!(
                "unknown agent {other:?} (expected random, greedy-epsilon, or mcts)"
            ))),
        }
    }
}

/// Uniform-random baseline.
pub struct RandomAgent;

impl Agent for RandomAgent {
    fn begin_episode(&mut self) {}

    fn choose(&mut self, _state: &GameState, actions: &[Action], rng: &mut ChaCha8Rng) -> Action {
        actions[rng.gen_range(0..actions.len())]
    }

    fn observe(&mut self, _terminal: &GameState, _reward: f64) {}
}

/// Tabular Monte-Carlo control: Q-values per (state key, action) pair,
/// updated with the incremental mean of episode rewards; epsilon-greedy
/// behavior policy.
pub struct EpsilonGreedyAgent {
    epsilon: f64,
    q: HashMap<(String, Action), (f64, u64)>,
    trace: Vec<(String, Action)>,
}

impl EpsilonGreedyAgent {
    pub fn new(epsilon: f64) -> Self {
        assert!((0.0..=1.0).contains(&epsilon), "epsilon must lie in [0, 1]");
        EpsilonGreedyAgent { epsilon, q: HashMap::new(), trace: vec![] }
    }

    fn q_value(&self, key: &str, action: Action) -> f64 {
        // Optimistic default so unvisited pairs get tried before the greedy
        // arm is locked in (rewards live in [-1, 0]).
        self.q.get(&(key.to_string(), action)).map_or(0.0, |&(v, _)| v)
    }
}

impl Agent for EpsilonGreedyAgent {
    fn begin_episode(&mut self) {
        self.trace.clear();
    }

    fn choose(&mut self, state: &GameState, actions: &[Action], rng: &mut ChaCha8Rng) -> Action {
        let key = state.key();
        let pick = if rng.gen_bool(self.epsilon) {
            actions[rng.gen_range(0..actions.len())]
        } else {
            let mut best = actions[0];
            let mut best_q = self.q_value(&key, best);
            for &a in &actions[1..] {
                let q = self.q_value(&key, a);
                if q > best_q {
                    best = a;
                    best_q = q;
                }
            }
            best
        };
        self.trace.push((key, pick));
        pick
    }

    fn observe(&mut self, _terminal: &GameState, reward: f64) {
        for (key, action) in self.trace.drain(..) {
            let entry = self.q.entry((key, action)).or_insert((0.0, 0));
            entry.1 += 1;
            entry.0 += (reward - entry.0) / entry.1 as f64;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum EdgeTarget {
    /// Never followed.
    Unknown,
    Node(usize),
    /// One-step lookahead settled this move without spending an episode:
    /// either a degenerate contraction (worst reward by rule) or a stop
    /// onto a code whose reward was already observed.
    Closed(f64),
}

struct Node {
    visits: u64,
    total: f64,
    /// Exact value, once every line from this state is enumerated. Rewards
    /// are a deterministic function of the terminal state, so a reached
    /// terminal is solved outright and an interior node is solved when all
    /// its children are; selection skips solved nodes (revisiting them
    /// cannot discover anything new).
    solved: Option<f64>,
    /// One edge per legal action, in action order; the target node is
    /// filled in the first time the edge is followed.
    edges: Option<Vec<(Action, EdgeTarget)>>,
}

impl Node {
    fn fresh() -> Self {
        Node { visits: 0, total: 0.0, solved: None, edges: None }
    }
}

/// Monte-Carlo tree search with UCB1 selection and random rollouts, over a
/// transposition table: nodes are keyed by canonical state, so reordered
/// action sequences that assemble the same network share statistics. The
/// table persists across episodes; each episode descends under UCB1 until
/// it crosses the visited frontier, finishes with a random rollout, and
/// backs the terminal reward up every state it stepped through (rollout
/// states included, so lucky discoveries become navigable).
pub struct MctsAgent {
    exploration: f64,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    /// Rewards of codes already seen, by canonical form. Lets the search
    /// close out stop moves onto leg-permuted repeats of known codes
    /// without spending episodes on them.
    code_values: HashMap<String, f64>,
    /// Nodes stepped through this episode, in order.
    visited: Vec<usize>,
    /// The move just taken, waiting to learn which node it lands on.
    pending: Option<(usize, usize)>,
    /// Set while the episode is beyond the visited frontier; moves then
    /// come from the rollout policy instead of UCB1.
    in_rollout: bool,
}

impl MctsAgent {
    pub fn new(exploration: f64) -> Self {
        assert!(exploration >= 0.0, "exploration constant must be non-negative");
        MctsAgent {
            exploration,
            nodes: vec![],
            index: HashMap::new(),
            code_values: HashMap::new(),
            visited: vec![],
            pending: None,
            in_rollout: false,
        }
    }

    fn intern(&mut self, key: String) -> usize {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        self.nodes.push(Node::fresh());
        let id = self.nodes.len() - 1;
        self.index.insert(key, id);
        id
    }

    /// Records where the previously chosen move actually led.
    fn link_pending(&mut self, landed_on: usize) {
        if let Some((node, edge)) = self.pending.take() {
            let slot = &mut self.nodes[node].edges.as_mut().unwrap()[edge].1;
            match *slot {
                EdgeTarget::Unknown => *slot = EdgeTarget::Node(landed_on),
                // The game is deterministic: an edge always lands on the
                // same state.
                EdgeTarget::Node(prev) => {
                    debug_assert_eq!(prev, landed_on, "edge target diverged")
                }
                // A forced walk down a probe-closed edge; the marker
                // already carries its exact value.
                EdgeTarget::Closed(_) => {}
            }
        }
    }

    /// Exact value of the line behind an edge, if it is fully enumerated.
    fn edge_value(&self, target: EdgeTarget) -> Option<f64> {
        match target {
            EdgeTarget::Unknown => None,
            EdgeTarget::Closed(v) => Some(v),
            EdgeTarget::Node(c) => self.nodes[c].solved,
        }
    }

    fn ucb1(&self, parent_visits: u64, child: usize) -> f64 {
        let node = &self.nodes[child];
        debug_assert!(node.visits > 0);
        let mean = node.total / node.visits as f64;
        mean + self.exploration * ((parent_visits as f64).ln() / node.visits as f64).sqrt()
    }

    /// Rollout move, returned as an edge index. Finishing is what makes a
    /// playout informative, so an unexplored STOP is taken on sight —
    /// depth-wise exploration is the tree policy's job. Otherwise: uniform
    /// over the action kinds on offer, then uniform within the picked kind.
    /// The game's arity is lopsided (dozens of contraction pairs vs a
    /// handful of block additions), so stratifying by kind keeps rollouts
    /// from drowning in contraction choices before they ever finish a
    /// construction. Edges leading to dead or solved states are skipped
    /// while anything unsolved remains — walking back into an enumerated
    /// line cannot discover anything.
    fn rollout_pick(&self, edges: &[(Action, EdgeTarget)], rng: &mut ChaCha8Rng) -> usize {
        let live: Vec<usize> =
            (0..edges.len()).filter(|&i| self.edge_value(edges[i].1).is_none()).collect();
        let pool: Vec<usize> = if live.is_empty() { (0..edges.len()).collect() } else { live };
        if let Some(&stop) = pool.iter().find(|&&i| edges[i].0 == Action::Stop) {
            return stop;
        }
        let mut kinds: Vec<(mem::Discriminant<Action>, Vec<usize>)> = Vec::new();
        for &i in &pool {
            let d = mem::discriminant(&edges[i].0);
            match kinds.iter_mut().find(|(k, _)| *k == d) {
                Some((_, bucket)) => bucket.push(i),
                None => kinds.push((d, vec![i])),
            }
        }
        let bucket = &kinds[rng.gen_range(0..kinds.len())].1;
        bucket[rng.gen_range(0..bucket.len())]
    }
}

impl Agent for MctsAgent {
    fn begin_episode(&mut self) {
        self.visited.clear();
        self.pending = None;
        self.in_rollout = false;
    }

    fn choose(&mut self, state: &GameState, actions: &[Action], rng: &mut ChaCha8Rng) -> Action {
        let at = self.intern(state.key());
        self.link_pending(at);
        // A rollout that wanders back into explored territory picks the
        // tree policy back up.
        if self.in_rollout && self.nodes[at].visits > 0 {
            self.in_rollout = false;
        }
        self.visited.push(at);
        if self.nodes[at].edges.is_none() {
            let probed = actions
                .iter()
                .map(|&a| {
                    let target = match a {
                        Action::Contract(x, y)
                            if matches!(
                                state.network().contract(x, y),
                                Err(Error::DegenerateContraction)
                            ) =>
                        {
                            EdgeTarget::Closed(-1.0)
                        }
                        Action::Stop => {
                            let known = state
                                .network()
                                .derive_code()
                                .ok()
                                .and_then(|c| c.canonical_key().ok())
                                .and_then(|k| self.code_values.get(&k).copied());
                            match known {
                                Some(v) => EdgeTarget::Closed(v),
                                None => EdgeTarget::Unknown,
                            }
                        }
                        _ => EdgeTarget::Unknown,
                    };
                    (a, target)
                })
                .collect();
            self.nodes[at].edges = Some(probed);
        }
        let edges = self.nodes[at].edges.as_ref().unwrap();
        debug_assert!(
            edges.iter().map(|&(a, _)| a).eq(actions.iter().copied()),
            "legal actions diverged from the stored node"
        );
        let pick = if self.in_rollout {
            self.rollout_pick(edges, rng)
        } else {
            let fresh: Vec<usize> = (0..edges.len())
                .filter(|&i| edges[i].1 == EdgeTarget::Unknown)
                .collect();
            let open: Vec<usize> = (0..edges.len())
                .filter(|&i| {
                    matches!(edges[i].1, EdgeTarget::Node(c) if self.nodes[c].solved.is_none())
                })
                .collect();
            if !fresh.is_empty() {
                fresh[rng.gen_range(0..fresh.len())]
            } else if !open.is_empty() {
                let parent_visits = self.nodes[at].visits.max(1);
                let child = |i: usize| match edges[i].1 {
                    EdgeTarget::Node(c) => c,
                    _ => unreachable!(),
                };
                let mut best = open[0];
                let mut best_score = self.ucb1(parent_visits, child(best));
                for &i in &open[1..] {
                    let score = self.ucb1(parent_visits, child(i));
                    if score > best_score {
                        best = i;
                        best_score = score;
                    }
                }
                best
            } else {
                // Every line from here is enumerated: take the best known.
                (0..edges.len())
                    .max_by(|&a, &b| {
                        let va = self.edge_value(edges[a].1).unwrap();
                        let vb = self.edge_value(edges[b].1).unwrap();
                        va.total_cmp(&vb)
                    })
                    .unwrap()
            }
        };
        let (action, target) = edges[pick];
        // Following an edge with an unknown target crosses the frontier;
        // the rest of the episode is a (recorded) rollout.
        if target == EdgeTarget::Unknown {
            self.in_rollout = true;
        }
        self.pending = Some((at, pick));
        action
    }

    fn observe(&mut self, terminal: &GameState, reward: f64) {
        if let Some(key) = terminal.code().and_then(|c| c.canonical_key().ok()) {
            self.code_values.insert(key, reward);
        }
        let tid = self.intern(terminal.key());
        self.link_pending(tid);
        self.visited.push(tid);
        self.nodes[tid].solved = Some(reward);
        for &node in &self.visited {
            self.nodes[node].visits += 1;
            self.nodes[node].total += reward;
        }
        // Walk back up the episode marking states whose children are now
        // all solved; stop at the first that is not (its ancestors cannot
        // be solved either, since it is their child).
        for &node in self.visited.iter().rev().skip(1) {
            if self.nodes[node].solved.is_some() {
                continue;
            }
            let Some(edges) = self.nodes[node].edges.as_ref() else { break };
            let value = edges.iter().try_fold(f64::NEG_INFINITY, |acc, &(_, t)| {
                self.edge_value(t).map(|v| acc.max(v))
            });
            match value {
                Some(v) => self.nodes[node].solved = Some(v),
                None => break,
            }
        }
        self.visited.clear();
        self.pending = None;
        self.in_rollout = false;
    }
}
