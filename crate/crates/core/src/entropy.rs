//! Reachability weights on graphs. Each vertex gets `ψ(i) = Σ_k (1/2)^{d(i,k)}`
//! over the other vertices it can reach; normalizing gives a distribution
//! whose Shannon entropy, and the total weight over `C(n, 2)`, describe how
//! tightly the graph is knit.

use std::collections::{BTreeSet, VecDeque};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropyError {
    #[error("edge {0}-{1} is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge {u}-{v} names a vertex outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge {0}-{1} is listed twice")]
    DuplicateEdge(usize, usize),
    #[error("need at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("total weight is zero, so the distribution is undefined")]
    ZeroPsi,
    #[error("bad graph json: {0}")]
    Json(String),
}

/// Undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for SimpleGraph {
    type Error = EntropyError;

    fn try_from(j: GraphJson) -> Result<Self, Self::Error> {
        SimpleGraph::new(j.n, j.edges.iter().map(|&[u, v]| (u, v)))
    }
}

impl From<SimpleGraph> for GraphJson {
    fn from(g: SimpleGraph) -> Self {
        GraphJson { n: g.n, edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect() }
    }
}

impl FromStr for SimpleGraph {
    type Err = EntropyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_str(s).map_err(|e| EntropyError::Json(e.to_string()))
    }
}

impl SimpleGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, EntropyError> {
        let mut g = SimpleGraph { n, adj: vec![BTreeSet::new(); n] };
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(EntropyError::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(EntropyError::SelfLoop(u, v));
            }
            if !g.adj[u].insert(v) {
                return Err(EntropyError::DuplicateEdge(u, v));
            }
            g.adj[v].insert(u);
        }
        Ok(g)
    }

    pub fn edgeless(n: usize) -> Self {
        SimpleGraph { n, adj: vec![BTreeSet::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, edges).expect("valid edges")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v))).expect("valid edges")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs three vertices");
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("valid edges")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|u| self.adj[u].iter().filter(move |&&v| v > u).map(move |&v| (u, v))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|a| a.contains(&v))
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].iter().copied()
    }

    /// The graph with `(u, v)` added. Errors as [`SimpleGraph::new`].
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Self, EntropyError> {
        Self::new(self.n, self.edges().into_iter().chain([(u, v)]))
    }

    /// Vertex `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        Self::new(self.n, self.edges().into_iter().map(|(u, v)| (perm[u], perm[v]))).expect("perm is a bijection")
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() * 2 == self.n * self.n.saturating_sub(1)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    /// Breadth-first distances, `None` where unreachable.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued vertices are reached");
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

fn half_pow(d: usize) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2).pow(d as u32))
}

/// `ψ(i)` for every vertex. Unreachable vertices contribute nothing.
pub fn psi_values(g: &SimpleGraph) -> Vec<BigRational> {
    (0..g.n())
        .map(|i| {
            g.distances_from(i)
                .into_iter()
                .flatten()
                .filter(|&d| d > 0)
                .map(half_pow)
                .fold(BigRational::zero(), |acc, x| acc + x)
        })
        .collect()
}

/// Total weight over `C(n, 2)`. Zero for graphs with fewer than two vertices.
pub fn info_flow(g: &SimpleGraph) -> BigRational {
    let n = g.n();
    if n < 2 {
        return BigRational::zero();
    }
    let total = psi_values(g).into_iter().fold(BigRational::zero(), |a, b| a + b);
    total / BigRational::from_integer(BigInt::from(n * (n - 1) / 2))
}

fn ratio_strings<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

fn ratio_string<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Rationals serialize as `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    #[serde(serialize_with = "ratio_strings")]
    pub psi: Vec<BigRational>,
    #[serde(serialize_with = "ratio_string")]
    pub g_psi: BigRational,
    #[serde(serialize_with = "ratio_strings")]
    pub probabilities: Vec<BigRational>,
    pub entropy_bits: f64,
    #[serde(serialize_with = "ratio_string")]
    pub info_flow: BigRational,
}

pub fn entropy_report(g: &SimpleGraph) -> Result<EntropyReport, EntropyError> {
    if g.n() < 2 {
        return Err(EntropyError::TooFewVertices(g.n()));
    }
    let psi = psi_values(g);
    let g_psi = psi.iter().fold(BigRational::zero(), |a, b| a + b);
    if g_psi.is_zero() {
        return Err(EntropyError::ZeroPsi);
    }
    let probabilities: Vec<BigRational> = psi.iter().map(|p| p / &g_psi).collect();
    let entropy_bits = -probabilities
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| {
            let x = p.to_f64().unwrap_or(f64::NAN);
            x * x.log2()
        })
        .sum::<f64>();
    Ok(EntropyReport { psi, probabilities, entropy_bits, info_flow: info_flow(g), g_psi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    /// Every graph on `n` labelled vertices.
    fn all_graphs(n: usize) -> impl Iterator<Item = SimpleGraph> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        (0u32..1 << pairs.len()).map(move |mask| {
            SimpleGraph::new(n, pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e)).unwrap()
        })
    }

    /// Distances by Floyd-Warshall, independent of the BFS.
    fn psi_floyd(g: &SimpleGraph) -> Vec<BigRational> {
        let n = g.n();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for (u, v) in g.edges() {
            d[u][v] = 1;
            d[v][u] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        // Σ over all k of 2^{-d}, minus the self term
        d.iter()
            .map(|row| {
                row.iter().filter(|&&x| x < inf).map(|&x| q(1, 1 << x)).fold(BigRational::zero(), |a, b| a + b)
                    - q(1, 1)
            })
            .collect()
    }

    #[test]
    fn complete_graphs() {
        for n in 2..9 {
            let g = SimpleGraph::complete(n);
            assert!(psi_values(&g).iter().all(|p| *p == q(n as i64 - 1, 2)));
            let r = entropy_report(&g).unwrap();
            assert_eq!(r.info_flow, q(1, 1));
            assert!((r.entropy_bits - (n as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn edgeless() {
        let g = SimpleGraph::edgeless(4);
        assert!(psi_values(&g).iter().all(Zero::is_zero));
        assert_eq!(info_flow(&g), q(0, 1));
        assert_eq!(entropy_report(&g), Err(EntropyError::ZeroPsi));
    }

    #[test]
    fn small_examples() {
        assert_eq!(psi_values(&SimpleGraph::path(3)), vec![q(3, 4), q(1, 1), q(3, 4)]);
        let r = entropy_report(&SimpleGraph::complete(2)).unwrap();
        assert_eq!(r.probabilities, vec![q(1, 2), q(1, 2)]);
        assert!((r.entropy_bits - 1.0).abs() < 1e-12);
        assert_eq!(r.g_psi, q(1, 1));
        assert_eq!(entropy_report(&SimpleGraph::edgeless(1)), Err(EntropyError::TooFewVertices(1)));
    }

    #[test]
    fn validation_and_json() {
        assert_eq!(SimpleGraph::new(3, [(1, 1)]), Err(EntropyError::SelfLoop(1, 1)));
        assert_eq!(SimpleGraph::new(3, [(0, 1), (1, 0)]), Err(EntropyError::DuplicateEdge(1, 0)));
        assert!(matches!(SimpleGraph::new(2, [(0, 2)]), Err(EntropyError::VertexOutOfRange { .. })));
        let g: SimpleGraph = r#"{"n":4,"edges":[[2,1],[0,1]]}"#.parse().unwrap();
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"n":4,"edges":[[0,1],[1,2]]}"#);
        assert!(r#"{"n":2,"edges":[[0,0]]}"#.parse::<SimpleGraph>().is_err());
        let text = serde_json::to_string(&entropy_report(&SimpleGraph::path(3)).unwrap()).unwrap();
        assert!(text.contains(r#""psi":["3/4","1","3/4"]"#), "{text}");
        assert!(text.contains(r#""info_flow":"5/6""#), "{text}");
    }

    #[test]
    fn exhaustive_small_graphs() {
        for n in 2..=5 {
            for g in all_graphs(n) {
                let psi = psi_values(&g);
                assert_eq!(psi, psi_floyd(&g));
                let flow = info_flow(&g);
                assert!(flow >= q(0, 1) && flow <= q(1, 1));
                assert_eq!(flow == q(1, 1), g.is_complete(), "{:?}", g.edges());
                let Ok(r) = entropy_report(&g) else {
                    assert_eq!(g.edge_count(), 0);
                    continue;
                };
                assert_eq!(r.probabilities.iter().fold(BigRational::zero(), |a, b| a + b), q(1, 1));
                let bound = (n as f64).log2();
                assert!(r.entropy_bits <= bound + 1e-12);
                let uniform = psi.iter().all(|p| *p == psi[0]);
                assert_eq!((r.entropy_bits - bound).abs() < 1e-12, uniform);
                // reversing the labels is an isomorphism
                let perm: Vec<usize> = (0..n).rev().collect();
                let mut psi_rev = psi_values(&g.relabel(&perm));
                psi_rev.reverse();
                assert_eq!(psi_rev, psi);
                assert_eq!(info_flow(&g.relabel(&perm)), flow);
            }
        }
    }

    #[test]
    fn cycles_are_uniform() {
        for n in 3..10 {
            let r = entropy_report(&SimpleGraph::cycle(n)).unwrap();
            assert!((r.entropy_bits - (n as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn adding_an_edge_never_lowers_the_weight() {
        for n in 2..=5 {
            for g in all_graphs(n) {
                let before = info_flow(&g);
                for u in 0..n {
                    for v in u + 1..n {
                        if !g.has_edge(u, v) {
                            assert!(info_flow(&g.with_edge(u, v).unwrap()) >= before);
                        }
                    }
                }
            }
        }
    }
}
