//! The push game on n-simplex boards.
//!
//! A board is a set of regions, each a set of `n + 1` vertices, with a label
//! in `Z_m` on every vertex. A push adds 1 to every label of one region.
//! Whether one labeling can be pushed into another is a linear system over
//! `Z_m` in the vertex-region incidence matrix, solved here through its
//! Smith normal form.

mod coloring;
pub mod snf;
mod solve;

use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coloring::{
    decide_colorable, decide_colorable_mod, invariant_vector, is_proper, proper_coloring, region_components,
    region_connected, Colorability, Coloring,
};
pub use solve::{
    class_count, class_count_mod, closed_form_count, count_solutions, enumerate_solutions, exact_count,
    solvable_by_invariant, solve, PushPlan,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PushError {
    #[error("malformed region: {0}")]
    MalformedRegion(String),
    #[error("no region {0}")]
    BadRegion(usize),
    #[error("bad labeling: {0}")]
    BadLabels(String),
    #[error("coloring is not proper")]
    ImproperColoring,
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("{count} solutions exceed the cap of {cap}")]
    TooMany { count: String, cap: usize },
    #[error("unknown board builder {0:?}")]
    BadBuilder(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BoardJson", into = "BoardJson")]
pub struct SimplexBoard {
    n: usize,
    m: u64,
    vertices: usize,
    regions: Vec<Vec<usize>>,
    labels: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct BoardJson {
    n: usize,
    m: u64,
    vertices: usize,
    regions: Vec<Vec<usize>>,
    #[serde(default)]
    labels: Option<Vec<u64>>,
}

impl TryFrom<BoardJson> for SimplexBoard {
    type Error = PushError;

    fn try_from(j: BoardJson) -> Result<Self, Self::Error> {
        let labels = j.labels.unwrap_or_else(|| vec![0; j.vertices]);
        SimplexBoard::new(j.n, j.m, j.vertices, j.regions, labels)
    }
}

impl From<SimplexBoard> for BoardJson {
    fn from(b: SimplexBoard) -> Self {
        BoardJson { n: b.n, m: b.m, vertices: b.vertices, regions: b.regions, labels: Some(b.labels) }
    }
}

impl SimplexBoard {
    pub fn new(
        n: usize,
        m: u64,
        vertices: usize,
        regions: Vec<Vec<usize>>,
        labels: Vec<u64>,
    ) -> Result<SimplexBoard, PushError> {
        if m < 2 {
            return Err(PushError::BadLabels(format!("modulus {m} is below 2")));
        }
        let mut seen = vec![false; vertices];
        for (k, r) in regions.iter().enumerate() {
            let set: BTreeSet<_> = r.iter().collect();
            if r.len() != n + 1 || set.len() != r.len() {
                return Err(PushError::MalformedRegion(format!("region {k} needs {} distinct vertices", n + 1)));
            }
            for &x in r {
                if x >= vertices {
                    return Err(PushError::MalformedRegion(format!("region {k} names vertex {x}")));
                }
                seen[x] = true;
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(PushError::MalformedRegion(format!("vertex {x} is in no region")));
        }
        let board = SimplexBoard { n, m, vertices, regions, labels: Vec::new() };
        board.with_labels(labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn with_labels(&self, labels: Vec<u64>) -> Result<SimplexBoard, PushError> {
        self.check_labels(&labels)?;
        Ok(SimplexBoard { labels, ..self.clone() })
    }

    /// Same regions, labels reset to zero, new modulus.
    pub fn with_modulus(&self, m: u64) -> Result<SimplexBoard, PushError> {
        SimplexBoard::new(self.n, m, self.vertices, self.regions.clone(), vec![0; self.vertices])
    }

    pub fn check_labels(&self, labels: &[u64]) -> Result<(), PushError> {
        if labels.len() != self.vertices {
            return Err(PushError::BadLabels(format!("{} labels for {} vertices", labels.len(), self.vertices)));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= self.m) {
            return Err(PushError::BadLabels(format!("label {l} is not below {}", self.m)));
        }
        Ok(())
    }

    pub fn push(&self, region: usize, times: u64) -> Result<SimplexBoard, PushError> {
        let r = self.regions.get(region).ok_or(PushError::BadRegion(region))?;
        let mut labels = self.labels.clone();
        let step = times % self.m;
        for &x in r {
            labels[x] = (labels[x] + step) % self.m;
        }
        Ok(SimplexBoard { labels, ..self.clone() })
    }

    pub fn apply(&self, plan: &PushPlan) -> Result<SimplexBoard, PushError> {
        if plan.0.len() != self.regions.len() {
            return Err(PushError::BadRegion(plan.0.len()));
        }
        plan.0.iter().enumerate().try_fold(self.clone(), |b, (k, &t)| b.push(k, t))
    }

    /// The vertex-region incidence matrix, `v × r`.
    pub fn incidence(&self) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0; self.regions.len()]; self.vertices];
        for (k, r) in self.regions.iter().enumerate() {
            for &x in r {
                a[x][k] = 1;
            }
        }
        a
    }

    /// Heads/tails rendering: labels below `⌈m/2⌉` show heads.
    pub fn heads_view(&self) -> Vec<bool> {
        let cut = self.m.div_ceil(2);
        self.labels.iter().map(|&l| l < cut).collect()
    }

    /// Builds `triangular:R`, `hexagonal:S`, or parses explicit JSON.
    pub fn build(spec: &str, m: u64) -> Result<SimplexBoard, PushError> {
        let spec = spec.trim();
        let (kind, arg) = spec.split_once(':').ok_or_else(|| PushError::BadBuilder(spec.to_string()))?;
        let size: usize = arg.trim().parse().map_err(|_| PushError::BadBuilder(spec.to_string()))?;
        match kind.trim() {
            "triangular" => triangular(size, m),
            "hexagonal" => hexagonal(size, m),
            _ => Err(PushError::BadBuilder(spec.to_string())),
        }
    }
}

impl FromStr for SimplexBoard {
    type Err = PushError;

    /// Board JSON, or a builder spec with `m = 2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim_start().starts_with('{') {
            serde_json::from_str(s).map_err(|e| PushError::MalformedRegion(e.to_string()))
        } else {
            SimplexBoard::build(s, 2)
        }
    }
}

/// Triangle of coins with `rows` rows: `rows(rows+1)/2` vertices and
/// `(rows-1)²` unit triangles, pointing up and down.
pub fn triangular(rows: usize, m: u64) -> Result<SimplexBoard, PushError> {
    if rows < 2 {
        return Err(PushError::BadBuilder(format!("triangular:{rows}")));
    }
    let id = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let mut regions = Vec::new();
    for i in 0..rows - 1 {
        for j in 0..=i {
            regions.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            if j < i {
                regions.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            }
        }
    }
    let v = rows * (rows + 1) / 2;
    SimplexBoard::new(2, m, v, regions, vec![0; v])
}

/// Hexagon of side `side` on the triangular lattice: `3s²+3s+1` vertices
/// and `6s²` triangles.
pub fn hexagonal(side: usize, m: u64) -> Result<SimplexBoard, PushError> {
    if side < 1 {
        return Err(PushError::BadBuilder(format!("hexagonal:{side}")));
    }
    let s = side as i64;
    let inside = |q: i64, r: i64| q.abs() <= s && r.abs() <= s && (q + r).abs() <= s;
    let mut index = HashMap::new();
    for q in -s..=s {
        for r in -s..=s {
            if inside(q, r) {
                let k = index.len();
                index.insert((q, r), k);
            }
        }
    }
    let mut regions = Vec::new();
    for q in -s..=s {
        for r in -s..=s {
            for tri in [[(q, r), (q + 1, r), (q, r + 1)], [(q + 1, r), (q, r + 1), (q + 1, r + 1)]] {
                if tri.iter().all(|&(a, b)| inside(a, b)) {
                    regions.push(tri.iter().map(|p| index[p]).collect());
                }
            }
        }
    }
    let v = index.len();
    SimplexBoard::new(2, m, v, regions, vec![0; v])
}

/// `K_4` as its four triangular faces.
pub fn k4_triangles(m: u64) -> SimplexBoard {
    let regions = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]];
    SimplexBoard::new(2, m, 4, regions, vec![0; 4]).expect("valid")
}

/// A random region-connected board with a proper `(n+1)`-coloring, grown
/// from one simplex by gluing new simplices onto facets. A new simplex
/// either brings a fresh vertex or closes onto an existing vertex of the
/// right color.
pub fn random_colorable_board(n: usize, regions: usize, m: u64, seed: u64) -> SimplexBoard {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut color: Vec<usize> = (0..=n).collect();
    let mut list: Vec<Vec<usize>> = vec![(0..=n).collect()];
    let mut seen: BTreeSet<Vec<usize>> = list.iter().cloned().collect();
    let mut attempts = 0;
    while list.len() < regions && attempts < regions * 50 {
        attempts += 1;
        let base = list.choose(&mut rng).expect("nonempty").clone();
        let drop = rng.gen_range(0..=n);
        let facet: Vec<usize> = base.iter().copied().enumerate().filter(|&(i, _)| i != drop).map(|(_, x)| x).collect();
        let want = color[base[drop]];
        let candidates: Vec<usize> = (0..color.len()).filter(|&x| color[x] == want && x != base[drop]).collect();
        let mut region = facet;
        match candidates.choose(&mut rng) {
            Some(&x) if rng.gen_bool(0.4) => {
                region.push(x);
                let mut key = region.clone();
                key.sort_unstable();
                if seen.insert(key) {
                    list.push(region);
                }
            }
            _ => {
                color.push(want);
                region.push(color.len() - 1);
                let mut key = region.clone();
                key.sort_unstable();
                seen.insert(key);
                list.push(region);
            }
        }
    }
    let v = color.len();
    let labels = (0..v).map(|_| rng.gen_range(0..m)).collect();
    SimplexBoard::new(n, m, v, list, labels).expect("grown regions are valid")
}

/// Random `n`-simplex board on `v` vertices with `r` distinct random regions,
/// covering every vertex. No structure is promised.
pub fn random_board(n: usize, v: usize, r: usize, m: u64, seed: u64) -> SimplexBoard {
    assert!(v > n, "need at least n + 1 vertices");
    assert!(r * (n + 1) >= v, "{r} regions cannot cover {v} vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut seen = BTreeSet::new();
        let mut regions = Vec::new();
        let all: Vec<usize> = (0..v).collect();
        let mut guard = 0;
        while regions.len() < r && guard < 100 * r {
            guard += 1;
            let mut pick: Vec<usize> = all.choose_multiple(&mut rng, n + 1).copied().collect();
            pick.sort_unstable();
            if seen.insert(pick.clone()) {
                regions.push(pick);
            }
        }
        if let Ok(b) = SimplexBoard::new(n, m, v, regions, vec![0; v]) {
            return b;
        }
    }
}
