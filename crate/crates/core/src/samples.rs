//! Graph and build-order generators for route-agreement checks: exhaustive
//! enumeration of small multigraphs, seeded random graphs, and every (or a
//! random) order of adding edge units.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decompose::{Base, BuildOrder, Step};
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;

fn vertex_id(i: usize) -> String {
    format!("v{}", i + 1)
}

/// Builds a graph on `weights.len()` vertices named `v1, v2, …`.
pub fn graph_from_multiplicities(weights: &[Scalar], edges: &[(usize, usize, u32)]) -> WeightedGraph {
    let mut g = WeightedGraph::new();
    for (i, w) in weights.iter().enumerate() {
        g.add_vertex(&vertex_id(i), w.clone()).expect("distinct ids");
    }
    for &(a, b, m) in edges {
        if m > 0 {
            g.add_edge_at(a, b, m);
        }
    }
    g
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Canonical key of a weighted multigraph: the smallest relabelling.
fn canonical_key(weights: &[u32], mult: &[Vec<u32>], perms: &[Vec<usize>]) -> Vec<u32> {
    let n = weights.len();
    perms
        .iter()
        .map(|p| {
            let mut key: Vec<u32> = (0..n).map(|i| weights[p[i]]).collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    key.push(mult[p[i]][p[j]]);
                }
            }
            key
        })
        .min()
        .expect("at least one permutation")
}

fn connected(n: usize, mult: &[Vec<u32>]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if mult[v][w] > 0 && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Every connected loopless multigraph with `2..=max_vertices` vertices and
/// `2..=max_units` edge units, with vertex weights drawn from `grid`, up to
/// weighted isomorphism.
pub fn small_weighted_graphs(max_vertices: usize, max_units: u32, grid: &[Scalar]) -> Vec<WeightedGraph> {
    let mut out = Vec::new();
    for n in 2..=max_vertices {
        let perms = permutations(n);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let mut seen = BTreeSet::new();
        let mut counts = vec![0u32; pairs.len()];
        loop {
            let units: u32 = counts.iter().sum();
            if units >= 2 && units <= max_units {
                let mut mult = vec![vec![0u32; n]; n];
                for (&(i, j), &m) in pairs.iter().zip(&counts) {
                    mult[i][j] = m;
                    mult[j][i] = m;
                }
                if connected(n, &mult) {
                    let mut choice = vec![0usize; n];
                    loop {
                        let key = canonical_key(&choice.iter().map(|&c| c as u32).collect::<Vec<_>>(), &mult, &perms);
                        if seen.insert(key) {
                            let weights: Vec<Scalar> = choice.iter().map(|&c| grid[c].clone()).collect();
                            let edges: Vec<(usize, usize, u32)> =
                                pairs.iter().zip(&counts).map(|(&(i, j), &m)| (i, j, m)).collect();
                            out.push(graph_from_multiplicities(&weights, &edges));
                        }
                        if !advance(&mut choice, grid.len() as u32) {
                            break;
                        }
                    }
                }
            }
            if !advance_bounded(&mut counts, max_units) {
                break;
            }
        }
    }
    out
}

fn advance(digits: &mut [usize], base: u32) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if (*d as u32) < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Next tuple of multiplicities with total at most `cap`.
fn advance_bounded(counts: &mut [u32], cap: u32) -> bool {
    for i in 0..counts.len() {
        counts[i] += 1;
        if counts.iter().sum::<u32>() <= cap {
            return true;
        }
        counts[i] = 0;
    }
    false
}

/// A connected multigraph with `2..=max_vertices` vertices, between
/// `max(2, n−1)` and `max_units` edge units, and weights `p/q` with
/// `p ∈ 1..=20`, `q ∈ 1..=10`.
pub fn random_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_units: u32) -> WeightedGraph {
    let n = rng.random_range(2..=max_vertices.max(2));
    let weights: Vec<Scalar> =
        (0..n).map(|_| Scalar::ratio(rng.random_range(1..=20), rng.random_range(1..=10))).collect();
    let mut mult = vec![vec![0u32; n]; n];
    for v in 1..n {
        let w = rng.random_range(0..v);
        mult[v][w] += 1;
        mult[w][v] += 1;
    }
    let floor = (n as u32 - 1).max(2);
    let target = rng.random_range(floor..=max_units.max(floor));
    let mut units = n as u32 - 1;
    while units < target {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            mult[a][b] += 1;
            mult[b][a] += 1;
            units += 1;
        }
    }
    let edges: Vec<(usize, usize, u32)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| (i, j, mult[i][j])).collect();
    graph_from_multiplicities(&weights, &edges)
}

/// `count` random graphs from a seeded generator.
pub fn random_graphs(seed: u64, count: usize, max_vertices: usize, max_units: u32) -> Vec<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_graph(&mut rng, max_vertices, max_units)).collect()
}

struct Growth<'g> {
    graph: &'g WeightedGraph,
    present: Vec<bool>,
    remaining: Vec<Vec<u32>>,
}

impl Growth<'_> {
    fn new(graph: &WeightedGraph, root: usize) -> Growth<'_> {
        let n = graph.len();
        let mut present = vec![false; n];
        present[root] = true;
        let remaining = (0..n).map(|v| (0..n).map(|w| graph.multiplicity(v, w)).collect()).collect();
        Growth { graph, present, remaining }
    }

    /// Distinct next units; parallel units of one edge count once.
    fn choices(&self) -> Vec<Step> {
        let n = self.graph.len();
        let mut out = Vec::new();
        for v in 0..n {
            for w in 0..n {
                if v == w || self.remaining[v][w] == 0 {
                    continue;
                }
                match (self.present[v], self.present[w]) {
                    (true, true) if v < w => out.push(Step::AddEdge { v, w }),
                    (true, false) => out.push(Step::AddVertex { v: w, to: v }),
                    _ => {}
                }
            }
        }
        out
    }

    fn apply(&mut self, s: Step) {
        let (a, b) = match s {
            Step::AddEdge { v, w } => (v, w),
            Step::AddVertex { v, to } => {
                self.present[v] = true;
                (v, to)
            }
        };
        self.remaining[a][b] -= 1;
        self.remaining[b][a] -= 1;
    }

    fn undo(&mut self, s: Step) {
        let (a, b) = match s {
            Step::AddEdge { v, w } => (v, w),
            Step::AddVertex { v, to } => {
                self.present[v] = false;
                (v, to)
            }
        };
        self.remaining[a][b] += 1;
        self.remaining[b][a] += 1;
    }
}

/// Every build order of `g`, deduplicated: each valid sequence of edge units
/// from every root, folded into a base plus steps.
pub fn all_build_orders(g: &WeightedGraph) -> Vec<BuildOrder> {
    fn walk(growth: &mut Growth<'_>, prefix: &mut Vec<Step>, total: u32, root: usize, out: &mut BTreeSet<Key>) {
        if prefix.len() as u32 == total {
            if let Ok(order) = BuildOrder::from_units(root, prefix) {
                out.insert(Key::from(&order));
            }
            return;
        }
        for s in growth.choices() {
            growth.apply(s);
            prefix.push(s);
            walk(growth, prefix, total, root, out);
            prefix.pop();
            growth.undo(s);
        }
    }
    let total = g.edge_units();
    let mut keys = BTreeSet::new();
    if total < 2 {
        return Vec::new();
    }
    for root in 0..g.len() {
        let mut growth = Growth::new(g, root);
        walk(&mut growth, &mut Vec::new(), total, root, &mut keys);
    }
    keys.into_iter().map(BuildOrder::from).collect()
}

/// A uniformly chosen next unit at each step, from a random root.
pub fn random_build_order<R: Rng>(g: &WeightedGraph, rng: &mut R) -> Option<BuildOrder> {
    if g.edge_units() < 2 {
        return None;
    }
    let root = rng.random_range(0..g.len());
    let mut growth = Growth::new(g, root);
    let mut units = Vec::new();
    while let Some(&s) = growth.choices().choose(rng) {
        growth.apply(s);
        units.push(s);
    }
    BuildOrder::from_units(root, &units).ok()
}

/// Orderable form of a build order, with path ends and double-edge
/// endpoints sorted so that equivalent bases compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    base: (u8, usize, usize, usize),
    steps: Vec<(u8, usize, usize)>,
}

impl From<&BuildOrder> for Key {
    fn from(o: &BuildOrder) -> Self {
        let base = match o.base {
            Base::DoubleEdge { v, w } => (0, v.min(w), v.max(w), 0),
            Base::Path { middle, ends } => (1, middle, ends.0.min(ends.1), ends.0.max(ends.1)),
        };
        let steps = o
            .steps
            .iter()
            .map(|s| match *s {
                Step::AddEdge { v, w } => (0, v.min(w), v.max(w)),
                Step::AddVertex { v, to } => (1, v, to),
            })
            .collect();
        Key { base, steps }
    }
}

impl From<Key> for BuildOrder {
    fn from(k: Key) -> Self {
        let base = match k.base {
            (0, v, w, _) => Base::DoubleEdge { v, w },
            (_, middle, a, b) => Base::Path { middle, ends: (a, b) },
        };
        let steps = k
            .steps
            .into_iter()
            .map(|(tag, a, b)| if tag == 0 { Step::AddEdge { v: a, w: b } } else { Step::AddVertex { v: a, to: b } })
            .collect();
        BuildOrder { base, steps }
    }
}
