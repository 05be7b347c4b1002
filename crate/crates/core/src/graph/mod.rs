//! Undirected communication graphs and the mixing matrices built on them.

mod mixing;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use mixing::{lazy_laplacian_weights, metropolis_weights, mix, second_singular_value, MixingMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Tree,
    Ring,
    Complete,
    Path,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Tree => "tree",
            GraphKind::Ring => "ring",
            GraphKind::Complete => "complete",
            GraphKind::Path => "path",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(GraphKind::Tree),
            "ring" => Ok(GraphKind::Ring),
            "complete" => Ok(GraphKind::Complete),
            "path" => Ok(GraphKind::Path),
            other => Err(Error::InvalidGraph(format!("unknown graph kind `{other}`"))),
        }
    }
}

/// Simple undirected graph on nodes `0..n`. Edges are stored once, as
/// `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct CommGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    kind: Option<GraphKind>,
    seed: Option<u64>,
}

impl CommGraph {
    /// Rejects self-loops and out-of-range endpoints; duplicates collapse.
    /// Connectivity is not required here, see [`CommGraph::is_connected`].
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self { n, edges: set.into_iter().collect(), kind: None, seed: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn kind(&self) -> Option<GraphKind> {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.neighbours();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    fn tagged(mut self, kind: GraphKind, seed: Option<u64>) -> Self {
        self.kind = Some(kind);
        self.seed = seed;
        self
    }

    /// Records the seed the graph was generated from (for the file format).
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// Uniformly random labelled tree via a random Prüfer sequence.
pub fn generate_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CommGraph> {
    if n == 0 {
        return Err(Error::InvalidGraph("tree needs at least one node".into()));
    }
    let edges = if n <= 2 {
        if n == 2 { vec![(0, 1)] } else { vec![] }
    } else {
        let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        decode_pruefer(n, &code)
    };
    Ok(CommGraph::new(n, edges)?.tagged(GraphKind::Tree, None))
}

fn decode_pruefer(n: usize, code: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let leaf = *leaves.iter().next().expect("a tree always has a leaf");
        leaves.remove(&leaf);
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let mut rest = leaves.into_iter();
    let (u, v) = (rest.next().expect("two leaves remain"), rest.next().expect("two leaves remain"));
    edges.push((u, v));
    edges
}

/// Deterministic topologies. A tree cannot be built without randomness and is
/// rejected here; use [`generate_tree`].
pub fn generate_named(kind: GraphKind, n: usize) -> Result<CommGraph> {
    if n == 0 {
        return Err(Error::InvalidGraph("graph needs at least one node".into()));
    }
    let edges: Vec<(usize, usize)> = match kind {
        GraphKind::Path => (1..n).map(|i| (i - 1, i)).collect(),
        GraphKind::Ring => {
            if n < 3 {
                return Err(Error::InvalidGraph(format!("ring needs at least 3 nodes, got {n}")));
            }
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        }
        GraphKind::Complete => (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect(),
        GraphKind::Tree => {
            return Err(Error::InvalidGraph("tree topology is random; use generate_tree".into()));
        }
    };
    Ok(CommGraph::new(n, edges)?.tagged(kind, None))
}

/// Edge-list file form of a graph (zero-based node indices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<GraphKind>,
}

impl From<CommGraph> for GraphRecord {
    fn from(g: CommGraph) -> Self {
        Self { n: g.n, edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(), seed: g.seed, kind: g.kind }
    }
}

impl TryFrom<GraphRecord> for CommGraph {
    type Error = Error;

    fn try_from(rec: GraphRecord) -> Result<Self> {
        let mut g = CommGraph::new(rec.n, rec.edges.iter().map(|e| (e[0], e[1])))?;
        g.kind = rec.kind;
        g.seed = rec.seed;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bfs_reachable(g: &CommGraph) -> usize {
        // independent of CommGraph::is_connected: repeated edge relaxation
        let mut reach = vec![false; g.n()];
        reach[0] = true;
        loop {
            let mut changed = false;
            for &(i, j) in g.edges() {
                if reach[i] != reach[j] {
                    reach[i] = true;
                    reach[j] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        reach.iter().filter(|&&r| r).count()
    }

    #[test]
    fn tree_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_tree(1, &mut rng).unwrap().edges().is_empty());
        assert_eq!(generate_tree(2, &mut rng).unwrap().edges(), &[(0, 1)]);
        assert!(generate_tree(0, &mut rng).is_err());
    }

    #[test]
    fn tree_twenty_nodes() {
        let g = generate_tree(20, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(g.edges().len(), 19);
        assert_eq!(bfs_reachable(&g), 20);
        assert!(g.is_connected());
    }

    #[test]
    fn trees_are_seed_deterministic_and_connected() {
        for seed in 0..50 {
            let n = 3 + (seed as usize % 30);
            let a = generate_tree(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = generate_tree(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.edges().len(), n - 1);
            assert_eq!(bfs_reachable(&a), n);
        }
    }

    #[test]
    fn pruefer_decodes_known_sequence() {
        // classic example: code (3, 3, 3, 4) on 6 nodes
        let mut e = decode_pruefer(6, &[3, 3, 3, 4]);
        e.iter_mut().for_each(|p| *p = (p.0.min(p.1), p.0.max(p.1)));
        e.sort();
        assert_eq!(e, vec![(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]);
    }

    #[test]
    fn named_topologies() {
        assert_eq!(generate_named(GraphKind::Complete, 3).unwrap().edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(generate_named(GraphKind::Path, 3).unwrap().edges(), &[(0, 1), (1, 2)]);
        assert!(generate_named(GraphKind::Ring, 2).is_err());
        assert_eq!(generate_named(GraphKind::Ring, 4).unwrap().edges().len(), 4);
        assert!(generate_named(GraphKind::Tree, 4).is_err());
    }

    #[test]
    fn graph_validation() {
        assert!(CommGraph::new(3, [(1, 1)]).is_err());
        assert!(CommGraph::new(3, [(0, 3)]).is_err());
        assert!(!CommGraph::new(3, [(0, 1)]).unwrap().is_connected());
    }

    #[test]
    fn record_round_trip() {
        let g = generate_tree(9, &mut ChaCha8Rng::seed_from_u64(3)).unwrap().with_seed(Some(3));
        let text = toml::to_string(&g).unwrap();
        let back: CommGraph = toml::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(text.contains("kind = \"tree\""));
    }
}
