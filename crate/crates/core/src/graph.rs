//! Weighted loopless multigraphs, the neighbour sums `α_v`, the boundary set
//! `B(Γ)`, and the line-oriented graph file format.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::principal::quantum_integer;
use crate::scalar::{Scalar, ScalarParseError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` declared twice")]
    DuplicateVertex(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid graph: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A broken graph invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    SelfLoop { vertex: String },
    NonPositiveWeight { vertex: String },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => f.write_str("graph has no vertices"),
            Violation::SelfLoop { vertex } => write!(f, "loopless: self-loop at `{vertex}`"),
            Violation::NonPositiveWeight { vertex } => write!(f, "weight of `{vertex}` is not positive"),
            Violation::Disconnected { components } => write!(f, "connected: graph has {components} components"),
        }
    }
}

/// Vertices with weights and a symmetric multiplicity matrix.
///
/// The diagonal is kept only so that parsed files with loops can be reported
/// by [`WeightedGraph::validate`]; valid graphs have a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    weights: Vec<Scalar>,
    mult: Vec<Vec<u32>>,
    index: HashMap<String, usize>,
    delta: Option<Scalar>,
}

impl Default for WeightedGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl WeightedGraph {
    pub fn new() -> Self {
        WeightedGraph { ids: Vec::new(), weights: Vec::new(), mult: Vec::new(), index: HashMap::new(), delta: None }
    }

    /// Builds a graph from `(id, weight)` pairs and `(a, b, multiplicity)`
    /// triples, then validates it.
    pub fn from_parts<S: AsRef<str>>(
        vertices: impl IntoIterator<Item = (S, Scalar)>,
        edges: impl IntoIterator<Item = (S, S, u32)>,
    ) -> Result<Self, GraphError> {
        let mut g = WeightedGraph::new();
        for (id, w) in vertices {
            g.add_vertex(id.as_ref(), w)?;
        }
        for (a, b, m) in edges {
            g.add_edge(a.as_ref(), b.as_ref(), m)?;
        }
        g.check()?;
        Ok(g)
    }

    pub fn add_vertex(&mut self, id: &str, weight: Scalar) -> Result<usize, GraphError> {
        if self.index.contains_key(id) {
            return Err(GraphError::DuplicateVertex(id.to_string()));
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.weights.push(weight);
        for row in &mut self.mult {
            row.push(0);
        }
        self.mult.push(vec![0; i + 1]);
        self.index.insert(id.to_string(), i);
        Ok(i)
    }

    pub fn add_edge(&mut self, a: &str, b: &str, multiplicity: u32) -> Result<(), GraphError> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        self.add_edge_at(i, j, multiplicity);
        Ok(())
    }

    pub(crate) fn add_edge_at(&mut self, i: usize, j: usize, multiplicity: u32) {
        self.mult[i][j] += multiplicity;
        if i != j {
            self.mult[j][i] += multiplicity;
        }
    }

    fn require(&self, id: &str) -> Result<usize, GraphError> {
        self.index.get(id).copied().ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weight(&self, v: usize) -> &Scalar {
        &self.weights[v]
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    /// `n_{v,w}`.
    pub fn multiplicity(&self, v: usize, w: usize) -> u32 {
        self.mult[v][w]
    }

    /// The `delta` header of a parsed file, if any.
    pub fn delta(&self) -> Option<&Scalar> {
        self.delta.as_ref()
    }

    pub fn set_delta(&mut self, delta: Option<Scalar>) {
        self.delta = delta;
    }

    /// Neighbours of `v` with multiplicities, in index order.
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.mult[v].iter().enumerate().filter(move |&(w, &m)| m > 0 && w != v).map(|(w, &m)| (w, m))
    }

    /// Edges `(v, w, n_{v,w})` with `v < w`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.len()).flat_map(move |v| ((v + 1)..self.len()).filter_map(move |w| {
            let m = self.mult[v][w];
            (m > 0).then_some((v, w, m))
        }))
    }

    /// Number of edges counted with multiplicity.
    pub fn edge_units(&self) -> u32 {
        self.edges().map(|(_, _, m)| m).sum()
    }

    /// `Tr(F) = Σ γ_v`.
    pub fn total_weight(&self) -> Scalar {
        self.weights.iter().sum()
    }

    /// `α_v = Σ_w n_{v,w} γ_w`.
    pub fn alpha(&self, v: usize) -> Scalar {
        self.neighbours(v).map(|(w, m)| Scalar::int(m as i64) * &self.weights[w]).sum()
    }

    pub fn alpha_of(&self, id: &str) -> Result<Scalar, GraphError> {
        Ok(self.alpha(self.require(id)?))
    }

    /// `{(v, γ_v − α_v) : γ_v > α_v}` keyed by vertex id. Ties within the
    /// real-mode tolerance are not boundary vertices.
    pub fn boundary_set(&self) -> BTreeMap<String, Scalar> {
        (0..self.len())
            .filter_map(|v| {
                let excess = &self.weights[v] - self.alpha(v);
                excess.is_positive().then(|| (self.ids[v].clone(), excess))
            })
            .collect()
    }

    /// `Σ_v Σ_w n_{v,w} γ_v γ_w`, summed row by row.
    pub fn weighted_adjacency_sum(&self) -> Scalar {
        (0..self.len()).map(|v| &self.weights[v] * self.alpha(v)).sum()
    }

    /// The same double sum accumulated column by column.
    pub fn weighted_adjacency_sum_by_columns(&self) -> Scalar {
        let mut total = Scalar::zero();
        for w in 0..self.len() {
            for v in 0..self.len() {
                if v != w && self.mult[v][w] > 0 {
                    total = total + Scalar::int(self.mult[v][w] as i64) * &self.weights[v] * &self.weights[w];
                }
            }
        }
        total
    }

    /// Every weight multiplied by `c`.
    pub fn scaled(&self, c: &Scalar) -> WeightedGraph {
        let mut g = self.clone();
        for w in &mut g.weights {
            *w = &*w * c;
        }
        g
    }

    /// The subgraph induced on `vertices`, in the given order.
    pub(crate) fn induced(&self, vertices: &[usize]) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for &v in vertices {
            g.add_vertex(&self.ids[v], self.weights[v].clone()).expect("distinct vertices");
        }
        for (a, &v) in vertices.iter().enumerate() {
            for (b, &w) in vertices.iter().enumerate().skip(a + 1) {
                let m = self.mult[v][w];
                if m > 0 {
                    g.add_edge_at(a, b, m);
                }
            }
        }
        g.delta = self.delta.clone();
        g
    }

    fn components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for (w, _) in self.neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Every broken invariant, in a fixed order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        for v in 0..self.len() {
            if self.mult[v][v] > 0 {
                out.push(Violation::SelfLoop { vertex: self.ids[v].clone() });
            }
        }
        for v in 0..self.len() {
            if !self.weights[v].is_positive() {
                out.push(Violation::NonPositiveWeight { vertex: self.ids[v].clone() });
            }
        }
        let components = self.components();
        if components > 1 {
            out.push(Violation::Disconnected { components });
        }
        out
    }

    pub fn check(&self) -> Result<(), GraphError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(GraphError::Invalid(violations))
        }
    }

    /// Renders the graph in the file format read by [`parse_graph`].
    pub fn to_graph_file(&self) -> String {
        let mut out = String::new();
        if let Some(delta) = &self.delta {
            writeln!(out, "delta {delta}").unwrap();
        }
        for (id, w) in self.ids.iter().zip(&self.weights) {
            writeln!(out, "vertex {id} {w}").unwrap();
        }
        for v in 0..self.len() {
            if self.mult[v][v] > 0 {
                writeln!(out, "edge {0} {0} {1}", self.ids[v], self.mult[v][v]).unwrap();
            }
        }
        for (v, w, m) in self.edges() {
            if m == 1 {
                writeln!(out, "edge {} {}", self.ids[v], self.ids[w]).unwrap();
            } else {
                writeln!(out, "edge {} {} {m}", self.ids[v], self.ids[w]).unwrap();
            }
        }
        out
    }
}

fn syntax(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Syntax { line, message: message.into() }
}

fn parse_weight(text: &str, delta: Option<&Scalar>, line: usize) -> Result<Scalar, GraphError> {
    if let Some(inner) = text.strip_prefix("qint(").and_then(|s| s.strip_suffix(')')) {
        let k: u32 = inner.trim().parse().map_err(|_| syntax(line, format!("bad quantum integer index `{inner}`")))?;
        let delta = delta.ok_or_else(|| syntax(line, "qint(k) needs an earlier `delta` line"))?;
        return Ok(quantum_integer(delta, k));
    }
    Scalar::parse(text).map_err(|e: ScalarParseError| syntax(line, format!("bad weight `{text}`: {e}")))
}

/// Reads the line-oriented graph format without enforcing graph invariants;
/// call [`WeightedGraph::validate`] on the result.
pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut g = WeightedGraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            ["delta", value] => {
                let d = Scalar::parse(value).map_err(|e| syntax(line, format!("bad delta `{value}`: {e}")))?;
                g.delta = Some(d);
            }
            ["vertex", id, weight] => {
                let w = parse_weight(weight, g.delta.as_ref(), line)?;
                g.add_vertex(id, w).map_err(|e| syntax(line, e.to_string()))?;
            }
            ["edge", a, b] | ["edge", a, b, _] => {
                let m = match fields.get(3) {
                    None => 1,
                    Some(text) => match text.parse::<u32>() {
                        Ok(m) if m > 0 => m,
                        _ => return Err(syntax(line, format!("bad multiplicity `{text}`"))),
                    },
                };
                g.add_edge(a, b, m).map_err(|e| syntax(line, e.to_string()))?;
            }
            [keyword, ..] if ["delta", "vertex", "edge"].contains(keyword) => {
                return Err(syntax(line, format!("wrong number of fields for `{keyword}`")));
            }
            [keyword, ..] => return Err(syntax(line, format!("unknown directive `{keyword}`"))),
            [] => unreachable!(),
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn two_vertex(a: Scalar, b: Scalar, m: u32) -> WeightedGraph {
        WeightedGraph::from_parts([("v", a), ("w", b)], [("v", "w", m)]).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let g = two_vertex(q(4, 5), q(1, 5), 2);
        assert_eq!(g.alpha_of("v").unwrap(), q(2, 5));
        let path = WeightedGraph::from_parts(
            [("v1", q(1, 2)), ("v2", q(3, 10)), ("v3", q(1, 5))],
            [("v1", "v2", 1), ("v2", "v3", 1)],
        )
        .unwrap();
        assert_eq!(path.alpha_of("v2").unwrap(), q(7, 10));
        let even = two_vertex(q(1, 3), q(1, 3), 1);
        assert_eq!(even.alpha_of("v").unwrap(), q(1, 3));
        assert!(matches!(even.alpha_of("z"), Err(GraphError::UnknownVertex(_))));
    }

    #[test]
    fn boundary_set_examples() {
        let heavy = two_vertex(q(4, 5), q(1, 5), 2).boundary_set();
        assert_eq!(heavy, BTreeMap::from([("v".to_string(), q(2, 5))]));
        assert!(two_vertex(q(1, 2), q(1, 2), 2).boundary_set().is_empty());
        let path = WeightedGraph::from_parts(
            [("v1", q(1, 2)), ("v2", q(3, 10)), ("v3", q(1, 5))],
            [("v1", "v2", 1), ("v2", "v3", 1)],
        )
        .unwrap();
        assert_eq!(path.boundary_set(), BTreeMap::from([("v1".to_string(), q(1, 5))]));
    }

    #[test]
    fn real_mode_tie_is_not_boundary() {
        let s = Scalar::int(2).sqrt();
        let g = WeightedGraph::from_parts(
            [("a", Scalar::one()), ("b", s.clone()), ("c", Scalar::one())],
            [("a", "b", 1), ("b", "c", 1)],
        )
        .unwrap();
        let b = g.boundary_set();
        assert!(!b.contains_key("b"));
        // γ_a − α_a = 1 − √2 < 0, so only an interior-free boundary remains
        assert!(b.is_empty());
    }

    #[test]
    fn double_sum_rows_equal_columns() {
        let g = WeightedGraph::from_parts(
            [("a", q(1, 7)), ("b", q(2, 3)), ("c", q(5, 4))],
            [("a", "b", 2), ("b", "c", 1), ("a", "c", 3)],
        )
        .unwrap();
        assert_eq!(g.weighted_adjacency_sum(), g.weighted_adjacency_sum_by_columns());
    }

    #[test]
    fn parse_case_1a() {
        let g = parse_graph("vertex v 1/2\nvertex w 1/2\nedge v w 2\n").unwrap();
        assert!(g.validate().is_empty());
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.edge_units(), 2);
        let again = parse_graph(&g.to_graph_file()).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn parse_reports_self_loop_and_disconnection() {
        let looped = parse_graph("vertex a 1\nvertex b 1\nedge a b\nedge a a\n").unwrap();
        assert_eq!(looped.validate(), vec![Violation::SelfLoop { vertex: "a".into() }]);
        let split = parse_graph("vertex a 1\nvertex b 1\nvertex c 1\nvertex d 1\nedge a b\nedge c d\n").unwrap();
        assert_eq!(split.validate(), vec![Violation::Disconnected { components: 2 }]);
        let negative = parse_graph("vertex a -1\nvertex b 1\nedge a b\n").unwrap();
        assert_eq!(negative.validate(), vec![Violation::NonPositiveWeight { vertex: "a".into() }]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_graph("# header\nvertex a 1\nedge a b\n").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 3, .. }));
        let err = parse_graph("vertex a 1\nvertex a 2\n").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 2, .. }));
        let err = parse_graph("vertex a qint(2)\n").unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 1, .. }));
        assert!(parse_graph("frobnicate\n").is_err());
        assert!(parse_graph("vertex a 1\nvertex b 1\nedge a b 0\n").is_err());
    }

    #[test]
    fn quantum_integer_weights() {
        let g = parse_graph("delta 2\nvertex a qint(1)\nvertex b qint(2)\nvertex c qint(3) # depth 2\nedge a b\nedge b c\n")
            .unwrap();
        assert_eq!(g.weights(), &[Scalar::int(1), Scalar::int(2), Scalar::int(3)]);
        assert_eq!(g.delta(), Some(&Scalar::int(2)));
    }

    #[test]
    fn scaling_and_induced_subgraph() {
        let g = WeightedGraph::from_parts(
            [("a", q(1, 2)), ("b", q(1, 3)), ("c", q(1, 6))],
            [("a", "b", 2), ("b", "c", 1)],
        )
        .unwrap();
        let s = g.scaled(&Scalar::int(6));
        assert_eq!(s.weights(), &[Scalar::int(3), Scalar::int(2), Scalar::int(1)]);
        let sub = g.induced(&[1, 0]);
        assert_eq!(sub.ids(), &["b".to_string(), "a".to_string()]);
        assert_eq!(sub.multiplicity(0, 1), 2);
    }
}
