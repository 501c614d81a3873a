//! Qubit connectivity graphs and the distance/cost machinery used to
//! route two-qubit gates and to score generator sets on constrained
//! hardware layouts.

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// A simple connected graph over qubit ids `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingGraph {
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
}

impl CouplingGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("graph needs at least one vertex".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Config(format!("edge ({a},{b}) out of range for {n} vertices")));
            }
            if a == b {
                return Err(Error::Config(format!("self-loop on vertex {a}")));
            }
            if adj[a].contains(&b) {
                return Err(Error::Config(format!("duplicate edge ({a},{b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let dist = all_pairs_bfs(&adj);
        if dist.iter().flatten().any(|&d| d == u32::MAX) {
            return Err(Error::Config("graph is not connected".into()));
        }
        Ok(CouplingGraph { adj, dist })
    }

    pub fn all_to_all(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        CouplingGraph::new(n, &edges).unwrap()
    }

    pub fn line(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        CouplingGraph::new(n, &edges).unwrap()
    }

    /// Degree-three ladder with every other rung removed, so the faces are
    /// hexagons: a planar heavy-hex-style layout. An odd vertex is chained
    /// onto the end of the lower rail.
    pub fn hex_ladder(n: usize) -> Self {
        if n < 4 {
            return CouplingGraph::line(n);
        }
        let rail = n / 2;
        let mut edges = Vec::new();
        for i in 1..rail {
            edges.push((i - 1, i));
            edges.push((rail + i - 1, rail + i));
        }
        for i in (0..rail).step_by(2) {
            edges.push((i, rail + i));
        }
        if n % 2 == 1 {
            edges.push((n - 2, n - 1));
        }
        CouplingGraph::new(n, &edges).unwrap()
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adj.iter().enumerate() {
            for &b in list {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.dist[a][b] as usize
    }

    /// Shortest path from `a` to `b`, inclusive of both endpoints.
    /// Deterministic: BFS visits neighbors in ascending order.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        if a == b {
            return vec![a];
        }
        let n = self.adj.len();
        let mut parent = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::from([a]);
        parent[a] = a;
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &w in &self.adj[v] {
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![b];
        let mut v = b;
        while v != a {
            v = parent[v];
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Minimum-spanning-tree cost of a vertex set under the shortest-path
    /// metric: the total distance of the tree edges. This approximates the
    /// CX-routing cost of measuring an operator supported on `support`.
    /// Empty and single-vertex supports cost zero.
    pub fn mst_cost(&self, support: &[usize]) -> usize {
        if support.len() < 2 {
            return 0;
        }
        let mut in_tree = vec![false; support.len()];
        let mut best = vec![u32::MAX; support.len()];
        in_tree[0] = true;
        for (i, &v) in support.iter().enumerate().skip(1) {
            best[i] = self.dist[support[0]][v];
        }
        let mut total = 0usize;
        for _ in 1..support.len() {
            let next = (0..support.len())
                .filter(|&i| !in_tree[i])
                .min_by_key(|&i| (best[i], i))
                .unwrap();
            total += best[next] as usize;
            in_tree[next] = true;
            for (i, &v) in support.iter().enumerate() {
                if !in_tree[i] {
                    best[i] = best[i].min(self.dist[support[next]][v]);
                }
            }
        }
        total
    }

    /// MST cost of one generator's support, with data qubit `q` living on
    /// vertex `q`.
    pub fn generator_cost(&self, op: &PauliOperator) -> usize {
        let support: Vec<usize> = (0..op.n()).filter(|&q| op.x_bit(q) || op.z_bit(q)).collect();
        self.mst_cost(&support)
    }

    /// Total inter-qubit distance of a generator set: the sum of the
    /// per-generator MST costs.
    pub fn set_cost(&self, gens: &[PauliOperator]) -> usize {
        gens.iter().map(|g| self.generator_cost(g)).sum()
    }

    /// Edge-list text form: a `VERTICES n` header, then one `a b` pair per
    /// line.
    pub fn to_text(&self) -> String {
        let mut out = format!("VERTICES {}\n", self.adj.len());
        for (a, b) in self.edges() {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty layout file".into()))?;
        let n = header
            .strip_prefix("VERTICES")
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected VERTICES header, got {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let a: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?;
            let b: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!("trailing tokens on edge line {line:?}")));
            }
            edges.push((a, b));
        }
        CouplingGraph::new(n, &edges)
    }
}

fn all_pairs_bfs(adj: &[Vec<usize>]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut dist = vec![vec![u32::MAX; n]; n];
    for start in 0..n {
        let row = &mut dist[start];
        row[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if row[w] == u32::MAX {
                    row[w] = row[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_distances_and_paths() {
        let g = CouplingGraph::line(5);
        assert_eq!(g.distance(0, 4), 4);
        assert_eq!(g.shortest_path(1, 4), vec![1, 2, 3, 4]);
        assert_eq!(g.shortest_path(3, 3), vec![3]);
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn all_to_all_is_diameter_one() {
        let g = CouplingGraph::all_to_all(6);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(g.distance(a, b), usize::from(a != b));
            }
        }
    }

    #[test]
    fn hex_ladder_is_connected_and_degree_three() {
        for n in 4..20 {
            let g = CouplingGraph::hex_ladder(n);
            assert!(g.max_degree() <= 3, "n={n}");
            assert_eq!(g.n_vertices(), n);
            // Connectivity is checked by the constructor already.
        }
    }

    #[test]
    fn mst_cost_on_a_line() {
        let g = CouplingGraph::line(3);
        let p = |s: &str| s.parse::<PauliOperator>().unwrap();
        // Support {0,1}: one edge. Support {0,2}: distance two.
        assert_eq!(g.generator_cost(&p("ZZI")), 1);
        assert_eq!(g.generator_cost(&p("ZIZ")), 2);
        assert_eq!(g.set_cost(&[p("ZZI"), p("ZIZ")]), 3);
        assert_eq!(g.set_cost(&[p("ZZI"), p("IZZ")]), 2);
        assert_eq!(g.generator_cost(&p("IZI")), 0);
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(CouplingGraph::new(3, &[(0, 1)]).is_err()); // disconnected
        assert!(CouplingGraph::new(2, &[(0, 0)]).is_err()); // self-loop
        assert!(CouplingGraph::new(2, &[(0, 1), (1, 0)]).is_err()); // duplicate
        assert!(CouplingGraph::new(2, &[(0, 2)]).is_err()); // out of range
    }

    #[test]
    fn text_round_trip() {
        let g = CouplingGraph::hex_ladder(9);
        let back = CouplingGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(back, g);
        assert!(CouplingGraph::from_text("VERTICES 2\n0 1 9\n").is_err());
        assert!(CouplingGraph::from_text("").is_err());
    }
}
