use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::solve::class_count_mod;
use super::{PushError, SimplexBoard};

/// Color in `0..=n` for every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(pub Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colorability {
    Yes,
    No,
    Inconclusive,
}

/// Every region carries all `n + 1` colors.
pub fn is_proper(board: &SimplexBoard, coloring: &Coloring) -> bool {
    let c = &coloring.0;
    c.len() == board.vertex_count()
        && c.iter().all(|&x| x <= board.n())
        && board.regions().iter().all(|r| r.iter().map(|&x| c[x]).collect::<BTreeSet<_>>().len() == r.len())
}

fn vertex_regions(board: &SimplexBoard) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); board.vertex_count()];
    for (k, r) in board.regions().iter().enumerate() {
        for &x in r {
            out[x].push(k);
        }
    }
    out
}

/// Backtracking search over `(n+1)^v` assignments, visiting vertices in
/// breadth-first order so that most choices are forced by a region.
pub fn proper_coloring(board: &SimplexBoard) -> Option<Coloring> {
    let v = board.vertex_count();
    let by_vertex = vertex_regions(board);
    let mut order = Vec::with_capacity(v);
    let mut placed = vec![false; v];
    for start in 0..v {
        if placed[start] {
            continue;
        }
        placed[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &k in &by_vertex[x] {
                for &y in &board.regions()[k] {
                    if !placed[y] {
                        placed[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
    }
    let mut color = vec![usize::MAX; v];
    fn go(i: usize, order: &[usize], color: &mut [usize], board: &SimplexBoard, by_vertex: &[Vec<usize>]) -> bool {
        let Some(&x) = order.get(i) else {
            return true;
        };
        for c in 0..=board.n() {
            let clash = by_vertex[x].iter().any(|&k| board.regions()[k].iter().any(|&y| y != x && color[y] == c));
            if clash {
                continue;
            }
            color[x] = c;
            if go(i + 1, order, color, board, by_vertex) {
                return true;
            }
        }
        color[x] = usize::MAX;
        false
    }
    go(0, &order, &mut color, board, &by_vertex).then_some(Coloring(color))
}

/// `Σ_v label(v) · w(color(v))` in `Z_m^n`, where `w(j) = e_j` for `j < n`
/// and `w(n) = -(e_0 + … + e_{n-1})`.
pub fn invariant_vector(board: &SimplexBoard, coloring: &Coloring) -> Result<Vec<u64>, PushError> {
    if !is_proper(board, coloring) {
        return Err(PushError::ImproperColoring);
    }
    let (n, m) = (board.n(), board.m());
    let mut out = vec![0u64; n];
    for (x, &label) in board.labels().iter().enumerate() {
        let c = coloring.0[x];
        if c < n {
            out[c] = (out[c] + label) % m;
        } else {
            for o in out.iter_mut() {
                *o = (*o + m - label) % m;
            }
        }
    }
    Ok(out)
}

/// Regions grouped by region-paths: consecutive regions share `n` vertices.
pub fn region_components(board: &SimplexBoard) -> Vec<Vec<usize>> {
    let regions = board.regions();
    let n = board.n();
    // regions sharing a facet meet in the facet's index
    let mut by_facet: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (k, r) in regions.iter().enumerate() {
        let mut sorted = r.clone();
        sorted.sort_unstable();
        for drop in 0..=n {
            let facet: Vec<usize> = sorted.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x).collect();
            by_facet.entry(facet).or_default().push(k);
        }
    }
    let mut adj = vec![Vec::new(); regions.len()];
    for ks in by_facet.values() {
        for &a in ks {
            for &b in ks {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; regions.len()];
    let mut out = Vec::new();
    for s in 0..regions.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            for &b in &adj[members[i]] {
                if comp[b] == usize::MAX {
                    comp[b] = id;
                    members.push(b);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

pub fn region_connected(board: &SimplexBoard) -> bool {
    region_components(board).len() <= 1
}

pub fn decide_colorable(board: &SimplexBoard) -> Colorability {
    decide_colorable_mod(board, 2)
}

struct Component {
    vertices: Vec<usize>,
    /// The coloring forced by propagation, up to a permutation of colors.
    color: BTreeMap<usize, usize>,
}

fn sub_board(board: &SimplexBoard, regions: &[usize], m: u64) -> (SimplexBoard, Vec<usize>) {
    let vertices: Vec<usize> =
        regions.iter().flat_map(|&k| board.regions()[k].iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let rs = regions.iter().map(|&k| board.regions()[k].iter().map(|x| index[x]).collect()).collect();
    let sub =
        SimplexBoard::new(board.n(), m, vertices.len(), rs, vec![0; vertices.len()]).expect("subset of a valid board");
    (sub, vertices)
}

/// Propagates colors from the first region along shared facets.
fn forced_coloring(board: &SimplexBoard, regions: &[usize]) -> Option<BTreeMap<usize, usize>> {
    let n = board.n();
    let mut color = BTreeMap::new();
    let mut done = BTreeSet::new();
    for (c, &x) in board.regions()[regions[0]].iter().enumerate() {
        color.insert(x, c);
    }
    done.insert(regions[0]);
    loop {
        let mut progress = false;
        for &k in regions {
            if done.contains(&k) {
                continue;
            }
            let r = &board.regions()[k];
            let known: Vec<usize> = r.iter().filter_map(|x| color.get(x).copied()).collect();
            if known.len() < n {
                continue;
            }
            let used: BTreeSet<usize> = known.iter().copied().collect();
            if used.len() != known.len() {
                return None;
            }
            if known.len() == n {
                let missing = (0..=n).find(|c| !used.contains(c)).expect("n of n+1 colors used");
                let x = *r.iter().find(|x| !color.contains_key(x)).expect("one vertex left");
                color.insert(x, missing);
            }
            done.insert(k);
            progress = true;
        }
        if !progress {
            break;
        }
    }
    (done.len() == regions.len()).then_some(color)
}

/// Whether the board admits a proper `(n+1)`-coloring, decided through
/// labeling-class counts over `Z_m`.
///
/// A region-connected board is colorable exactly when it has `m^n` labeling
/// classes. Otherwise each region-connected component is decided that way,
/// and components are glued: a component's coloring is unique up to
/// renaming colors, so two components sharing vertices agree iff their
/// colors on the shared vertices correspond one-to-one. When the
/// component-association graph is a forest this settles the question; with
/// cycles a bounded search over renamings is tried, and `Inconclusive` is
/// returned if it runs out of budget.
pub fn decide_colorable_mod(board: &SimplexBoard, m: u64) -> Colorability {
    let n = board.n();
    let target = num_traits::pow(BigInt::from(m), n);
    let groups = region_components(board);
    let mut comps = Vec::with_capacity(groups.len());
    for g in &groups {
        let (sub, vertices) = sub_board(board, g, m);
        if class_count_mod(&sub, m) != target {
            return Colorability::No;
        }
        let Some(color) = forced_coloring(board, g) else {
            debug_assert!(false, "class count and propagation disagree");
            return Colorability::No;
        };
        comps.push(Component { vertices, color });
    }
    if comps.len() <= 1 {
        return Colorability::Yes;
    }

    let mut edges = Vec::new();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            let shared: Vec<usize> =
                comps[i].vertices.iter().filter(|x| comps[j].color.contains_key(x)).copied().collect();
            if shared.is_empty() {
                continue;
            }
            if !one_to_one(&comps[i], &comps[j], &shared) {
                return Colorability::No;
            }
            edges.push((i, j, shared));
        }
    }

    let mut parent: Vec<usize> = (0..comps.len()).collect();
    fn root(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut cyclic = false;
    for (i, j, _) in &edges {
        let (a, b) = (root(&mut parent, *i), root(&mut parent, *j));
        if a == b {
            cyclic = true;
        } else {
            parent[a] = b;
        }
    }
    if !cyclic {
        return Colorability::Yes;
    }
    match search_renamings(&comps, &edges, n, 1_000_000) {
        Some(true) => Colorability::Yes,
        Some(false) => Colorability::No,
        None => Colorability::Inconclusive,
    }
}

fn one_to_one(a: &Component, b: &Component, shared: &[usize]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    shared.iter().all(|x| {
        let (ca, cb) = (a.color[x], b.color[x]);
        *fwd.entry(ca).or_insert(cb) == cb && *back.entry(cb).or_insert(ca) == ca
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for k in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..=k).map(move |at| {
                    let mut q = p.clone();
                    q.insert(at, k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Depth-first assignment of a color renaming to every component. `None`
/// when more than `budget` nodes would be visited.
fn search_renamings(
    comps: &[Component],
    edges: &[(usize, usize, Vec<usize>)],
    n: usize,
    budget: usize,
) -> Option<bool> {
    let perms = permutations(n + 1);
    let mut assigned: Vec<Option<usize>> = vec![None; comps.len()];
    let mut visits = 0usize;
    fn fits(
        c: usize,
        p: &[usize],
        comps: &[Component],
        edges: &[(usize, usize, Vec<usize>)],
        assigned: &[Option<usize>],
        perms: &[Vec<usize>],
    ) -> bool {
        edges.iter().all(|(i, j, shared)| {
            let other = if *i == c {
                *j
            } else if *j == c {
                *i
            } else {
                return true;
            };
            let Some(q) = assigned[other] else { return true };
            shared.iter().all(|x| p[comps[c].color[x]] == perms[q][comps[other].color[x]])
        })
    }
    fn go(
        c: usize,
        comps: &[Component],
        edges: &[(usize, usize, Vec<usize>)],
        assigned: &mut Vec<Option<usize>>,
        perms: &[Vec<usize>],
        visits: &mut usize,
        budget: usize,
    ) -> Option<bool> {
        if c == comps.len() {
            return Some(true);
        }
        let choices: Vec<usize> = if c == 0 { vec![0] } else { (0..perms.len()).collect() };
        for k in choices {
            *visits += 1;
            if *visits > budget {
                return None;
            }
            if fits(c, &perms[k], comps, edges, assigned, perms) {
                assigned[c] = Some(k);
                if go(c + 1, comps, edges, assigned, perms, visits, budget)? {
                    return Some(true);
                }
                assigned[c] = None;
            }
        }
        Some(false)
    }
    go(0, comps, edges, &mut assigned, &perms, &mut visits, budget)
}
