//! Principal graphs with Perron–Frobenius weights, their depth truncations,
//! and the factor parameters `t′_k` of `p_* M(Γ_k) p_*`.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use thiserror::Error;

use crate::decompose::{decompose_direct, DecomposeError, Decomposition, Outcome};
use crate::graph::{GraphError, WeightedGraph};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrincipalError {
    #[error("unknown built-in graph `{0}`")]
    UnknownBuiltin(String),
    #[error("modulus {delta} is below the bound {bound} required by {name}")]
    DeltaTooSmall { name: String, delta: Scalar, bound: Scalar },
    #[error("{name} needs a modulus")]
    MissingDelta { name: String },
    #[error("Perron-Frobenius relation fails at `{vertex}`: residual {residual}")]
    PfResidual { vertex: String, residual: Scalar },
    #[error("weight of `{vertex}` is {weight}, below 1")]
    WeightBelowOne { vertex: String, weight: Scalar },
    #[error("edge {0}–{1} does not join adjacent depths")]
    NotLayered(String, String),
    #[error("root weight must be 1, got {0}")]
    RootWeight(Scalar),
    #[error("truncation depth must be at least {min}, got {k}")]
    DepthTooSmall { k: usize, min: usize },
    #[error("graph has infinite depth")]
    InfiniteDepth,
    #[error("depth {k} truncation is not a factor")]
    NotAFactor { k: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

/// `[k]` for `δ = q + q⁻¹`, by `[k+1] = δ[k] − [k−1]`.
pub fn quantum_integer(delta: &Scalar, k: u32) -> Scalar {
    quantum_integers(delta, k as usize).pop().expect("non-empty")
}

/// `[0], [1], …, [k]`.
pub fn quantum_integers(delta: &Scalar, k: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero()];
    if k == 0 {
        return out;
    }
    out.push(Scalar::one());
    while out.len() <= k {
        let n = out.len();
        let next = delta * &out[n - 1] - &out[n - 2];
        out.push(next);
    }
    out
}

/// `1 + Tr(F)⁻²(−Σ γ_v² + Σ_v Σ_w n_{v,w} γ_v γ_w)`.
pub fn fdim_closed_form(g: &WeightedGraph) -> Result<Scalar, DecomposeError> {
    if g.edge_units() == 0 {
        return Err(DecomposeError::TooFewEdges(0));
    }
    let total = g.total_weight();
    let squares: Scalar = g.weights().iter().map(Scalar::square).sum();
    Ok(Scalar::one() + (g.weighted_adjacency_sum() - squares) / total.square())
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Finite { graph: WeightedGraph, depths: Vec<usize> },
    AInfinity,
}

/// A rooted, depth-layered graph with weights `γ_* = 1` and
/// `δ γ_v = Σ_w n_{v,w} γ_w` wherever the whole neighbourhood is present.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalGraph {
    name: String,
    delta: Scalar,
    shape: Shape,
}

impl PrincipalGraph {
    /// Built-in graphs: `A<n>` (modulus fixed to `2cos(π/(n+1))`), `D<n>`
    /// (modulus `2cos(π/(2n−2))`), and `A_inf` (any modulus at least 2).
    /// Underscores and case are ignored in the name.
    pub fn builtin(name: &str, delta: Option<Scalar>) -> Result<Self, PrincipalError> {
        let key: String = name.chars().filter(|c| *c != '_').collect::<String>().to_ascii_lowercase();
        let unknown = || PrincipalError::UnknownBuiltin(name.to_string());
        if key == "ainf" || key == "ainfinity" {
            let delta = delta.ok_or_else(|| PrincipalError::MissingDelta { name: "A_inf".into() })?;
            return Self::a_infinity(delta);
        }
        let (family, size) = key.split_at(1);
        let n: u32 = size.parse().map_err(|_| unknown())?;
        match family {
            "a" if n >= 2 => Ok(Self::a_n(n)),
            "d" if n >= 4 => Ok(Self::d_n(n)),
            _ => Err(unknown()),
        }
    }

    pub fn a_infinity(delta: Scalar) -> Result<Self, PrincipalError> {
        if delta < Scalar::int(2) {
            return Err(PrincipalError::DeltaTooSmall { name: "A_inf".into(), delta, bound: Scalar::int(2) });
        }
        Ok(PrincipalGraph { name: "A_inf".into(), delta, shape: Shape::AInfinity })
    }

    pub fn a_n(n: u32) -> Self {
        let delta = Scalar::two_cos_pi_over(n + 1);
        let q = quantum_integers(&delta, n as usize);
        let mut graph = WeightedGraph::new();
        for d in 0..n as usize {
            graph.add_vertex(&vertex_name(d), q[d + 1].clone()).expect("distinct");
            if d > 0 {
                graph.add_edge_at(d - 1, d, 1);
            }
        }
        let depths = (0..n as usize).collect();
        PrincipalGraph { name: format!("A{n}"), delta, shape: Shape::Finite { graph, depths } }
    }

    pub fn d_n(n: u32) -> Self {
        let delta = Scalar::two_cos_pi_over(2 * n - 2);
        let q = quantum_integers(&delta, n as usize);
        let chain = n as usize - 2;
        let mut graph = WeightedGraph::new();
        let mut depths = Vec::new();
        for d in 0..chain {
            graph.add_vertex(&vertex_name(d), q[d + 1].clone()).expect("distinct");
            depths.push(d);
            if d > 0 {
                graph.add_edge_at(d - 1, d, 1);
            }
        }
        let leaf = &q[n as usize - 1] / Scalar::int(2);
        for tag in ["a", "b"] {
            let i = graph.add_vertex(&format!("v{chain}{tag}"), leaf.clone()).expect("distinct");
            graph.add_edge_at(chain - 1, i, 1);
            depths.push(chain);
        }
        PrincipalGraph { name: format!("D{n}"), delta, shape: Shape::Finite { graph, depths } }
    }

    /// A finite principal graph read from a weighted graph; depths are
    /// distances from `root`.
    pub fn from_graph(name: &str, graph: WeightedGraph, delta: Scalar, root: &str) -> Result<Self, PrincipalError> {
        graph.check()?;
        let r = graph.vertex_index(root).ok_or_else(|| GraphError::UnknownVertex(root.to_string()))?;
        let mut order: Vec<usize> = vec![r];
        let mut dist = vec![usize::MAX; graph.len()];
        dist[r] = 0;
        let mut queue = VecDeque::from([r]);
        while let Some(v) = queue.pop_front() {
            for (w, _) in graph.neighbours(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        let graph = graph.induced(&order);
        let depths = order.iter().map(|&v| dist[v]).collect();
        let g = PrincipalGraph { name: name.to_string(), delta, shape: Shape::Finite { graph, depths } };
        g.validate()?;
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn delta(&self) -> &Scalar {
        &self.delta
    }

    /// Depth of the deepest vertex, or `None` for infinite depth.
    pub fn depth(&self) -> Option<usize> {
        match &self.shape {
            Shape::Finite { depths, .. } => depths.iter().copied().max(),
            Shape::AInfinity => None,
        }
    }

    /// The weighted graph on depths `≤ k`, in the graph's own (unnormalized)
    /// weights. Depths beyond a finite graph's depth give the whole graph.
    pub fn truncate(&self, k: usize) -> WeightedGraph {
        match &self.shape {
            Shape::AInfinity => {
                let q = quantum_integers(&self.delta, k + 1);
                let mut g = WeightedGraph::new();
                for d in 0..=k {
                    g.add_vertex(&vertex_name(d), q[d + 1].clone()).expect("distinct");
                    if d > 0 {
                        g.add_edge_at(d - 1, d, 1);
                    }
                }
                g.set_delta(Some(self.delta.clone()));
                g
            }
            Shape::Finite { graph, depths } => {
                let keep: Vec<usize> = (0..graph.len()).filter(|&v| depths[v] <= k).collect();
                let mut g = graph.induced(&keep);
                g.set_delta(Some(self.delta.clone()));
                g
            }
        }
    }

    /// Depth of each vertex of `truncate(k)`, by vertex id.
    pub fn depths_of_truncation(&self, k: usize) -> BTreeMap<String, usize> {
        match &self.shape {
            Shape::AInfinity => (0..=k).map(|d| (vertex_name(d), d)).collect(),
            Shape::Finite { graph, depths } => (0..graph.len())
                .filter(|&v| depths[v] <= k)
                .map(|v| (graph.id(v).to_string(), depths[v]))
                .collect(),
        }
    }

    /// `max_v |δγ_v − Σ_w n_{v,w} γ_w|` over vertices of `truncate(k)` whose
    /// whole neighbourhood lies in it.
    pub fn pf_residual(&self, k: usize) -> Scalar {
        let g = self.truncate(k);
        let depths = self.depths_of_truncation(k);
        let interior = |v: usize| match &self.shape {
            Shape::AInfinity => depths[g.id(v)] < k,
            Shape::Finite { .. } => self.depth().is_some_and(|full| k >= full) || depths[g.id(v)] < k,
        };
        let mut worst = Scalar::zero();
        for v in (0..g.len()).filter(|&v| interior(v)) {
            let residual = (&self.delta * g.weight(v) - g.alpha(v)).abs();
            if residual > worst {
                worst = residual;
            }
        }
        worst
    }

    fn validate(&self) -> Result<(), PrincipalError> {
        let Shape::Finite { graph, depths } = &self.shape else {
            return Ok(());
        };
        if graph.weight(0) != &Scalar::one() {
            return Err(PrincipalError::RootWeight(graph.weight(0).clone()));
        }
        for (v, w, _) in graph.edges() {
            if depths[v].abs_diff(depths[w]) != 1 {
                return Err(PrincipalError::NotLayered(graph.id(v).into(), graph.id(w).into()));
            }
        }
        for v in 0..graph.len() {
            if graph.weight(v) < &Scalar::one() {
                return Err(PrincipalError::WeightBelowOne { vertex: graph.id(v).into(), weight: graph.weight(v).clone() });
            }
            let residual = &self.delta * graph.weight(v) - graph.alpha(v);
            if !residual.is_zero() {
                return Err(PrincipalError::PfResidual { vertex: graph.id(v).into(), residual });
            }
        }
        Ok(())
    }
}

fn vertex_name(depth: usize) -> String {
    format!("v{depth}")
}

/// One truncation depth of the `t′_k` pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub k: usize,
    pub decomposition: Decomposition,
    /// Parameter of the compression to the root projection.
    pub t_prime: Scalar,
}

/// Decomposes `truncate(k)` and compresses its factor to the root vertex.
pub fn truncation_row(g: &PrincipalGraph, k: usize) -> Result<TruncationRow, PrincipalError> {
    if k < 2 {
        return Err(PrincipalError::DepthTooSmall { k, min: 2 });
    }
    let graph = g.truncate(k);
    let Outcome::Factor(decomposition) = decompose_direct(&graph)? else {
        return Err(PrincipalError::NotAFactor { k });
    };
    let root = graph.id(0).to_string();
    let root_atom = decomposition.atoms_unnormalized().get(&root).cloned().unwrap_or_else(Scalar::zero);
    let s = graph.weight(0) - root_atom;
    let t_prime = decomposition.compressed_parameter(&s);
    Ok(TruncationRow { k, decomposition, t_prime })
}

/// `t′_k` for `k = 2..=k_max`; depths are evaluated in parallel.
pub fn t_prime_sequence(g: &PrincipalGraph, k_max: usize) -> Result<Vec<TruncationRow>, PrincipalError> {
    (2..=k_max).into_par_iter().map(|k| truncation_row(g, k)).collect()
}

/// Both sides of the divergence bound at depth `k`:
/// `(t_k − 1)(Σ_{w∉B} γ_w + Σ_{v∈B} α_v)²` and `(δ − 1) Σ_{depth ≤ k−2} γ_v²`.
pub fn majorization(g: &PrincipalGraph, k: usize) -> Result<(Scalar, Scalar), PrincipalError> {
    let row = truncation_row(g, k)?;
    let graph = g.truncate(k);
    let boundary = graph.boundary_set();
    let mut support = Scalar::zero();
    for v in 0..graph.len() {
        support = support + if boundary.contains_key(graph.id(v)) { graph.alpha(v) } else { graph.weight(v).clone() };
    }
    let lhs = (&row.decomposition.factor.t - Scalar::one()) * support.square();
    let depths = g.depths_of_truncation(k);
    let inner: Scalar = (0..graph.len())
        .filter(|&v| depths[graph.id(v)] + 2 <= k)
        .map(|v| graph.weight(v).square())
        .sum();
    Ok((lhs, (g.delta() - Scalar::one()) * inner))
}

/// Comparison of the engine's full-depth `t′` with `1 + 2(δ − 1)·I`, where
/// `I` is the sum of squared weights at even depth.
#[derive(Debug, Clone, PartialEq)]
pub enum GjsReport {
    Compared { engine: Scalar, formula: Scalar, index: Scalar, difference: Scalar, within_tolerance: bool },
    /// The full graph has atoms, so the formula does not apply.
    Inapplicable { atoms: BTreeMap<String, Scalar> },
}

pub fn gjs_finite_depth_check(g: &PrincipalGraph, tolerance: f64) -> Result<GjsReport, PrincipalError> {
    let depth = g.depth().ok_or(PrincipalError::InfiniteDepth)?;
    let full = g.truncate(depth);
    let atoms = full.boundary_set();
    if !atoms.is_empty() {
        return Ok(GjsReport::Inapplicable { atoms });
    }
    let engine = truncation_row(g, depth.max(2))?.t_prime;
    let depths = g.depths_of_truncation(depth);
    let index: Scalar = (0..full.len())
        .filter(|&v| depths[full.id(v)].is_multiple_of(2))
        .map(|v| full.weight(v).square())
        .sum();
    let formula = Scalar::one() + Scalar::int(2) * (g.delta() - Scalar::one()) * &index;
    let difference = (&engine - &formula).abs();
    let within_tolerance = difference.to_f64() <= tolerance;
    Ok(GjsReport::Compared { engine, formula, index, difference, within_tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vn::{amplify, VNAlgebra};

    #[test]
    fn quantum_integers_at_two_are_integers() {
        let q = quantum_integers(&Scalar::int(2), 6);
        assert_eq!(q, (0..=6).map(Scalar::int).collect::<Vec<_>>());
        assert!(q.iter().all(Scalar::is_rational));
    }

    #[test]
    fn a_infinity_weights_and_pf() {
        let g = PrincipalGraph::builtin("A_inf", Some(Scalar::int(2))).unwrap();
        let t = g.truncate(3);
        assert_eq!(t.weights(), &[1, 2, 3, 4].map(Scalar::int));
        assert!(g.pf_residual(10).is_zero());
        assert!(PrincipalGraph::a_infinity(Scalar::ratio(3, 2)).is_err());
    }

    #[test]
    fn a3_weights() {
        let g = PrincipalGraph::builtin("A3", None).unwrap();
        let w = g.truncate(5);
        assert_eq!(w.len(), 3);
        assert_eq!(w.weight(1), &Scalar::int(2).sqrt());
        assert_eq!(w.weight(2), &Scalar::one());
        assert!(g.pf_residual(2).is_zero());
    }

    #[test]
    fn a4_weights_follow_golden_ratio() {
        let g = PrincipalGraph::a_n(4);
        let phi = (Scalar::one() + Scalar::int(5).sqrt()) / Scalar::int(2);
        assert_eq!(g.delta(), &phi);
        let w = g.truncate(3);
        assert_eq!(w.weight(2), &phi);
        assert_eq!(w.weight(2), &(phi.square() - Scalar::one()));
        assert!(g.pf_residual(3).is_zero());
    }

    #[test]
    fn d_n_satisfies_pf() {
        for n in 4..9 {
            let g = PrincipalGraph::d_n(n);
            assert!(g.pf_residual(n as usize).is_zero(), "D{n}");
            assert_eq!(g.truncate(n as usize).len(), n as usize);
        }
    }

    #[test]
    fn closed_form_examples() {
        let g = PrincipalGraph::a_infinity(Scalar::int(2)).unwrap();
        assert_eq!(fdim_closed_form(&g.truncate(2)).unwrap(), Scalar::ratio(19, 18));
        let pair = WeightedGraph::from_parts(
            [("v", Scalar::ratio(1, 2)), ("w", Scalar::ratio(1, 2))],
            [("v", "w", 2)],
        )
        .unwrap();
        assert_eq!(fdim_closed_form(&pair).unwrap(), Scalar::ratio(3, 2));
        let mut single = WeightedGraph::new();
        single.add_vertex("x", Scalar::one()).unwrap();
        assert!(fdim_closed_form(&single).is_err());
    }

    #[test]
    fn a_infinity_first_parameters() {
        let g = PrincipalGraph::a_infinity(Scalar::int(2)).unwrap();
        let rows = t_prime_sequence(&g, 4).unwrap();
        let t: Vec<_> = rows.iter().map(|r| r.t_prime.clone()).collect();
        assert_eq!(t, vec![Scalar::int(4), Scalar::int(12), Scalar::int(27)]);
        assert_eq!(rows[0].decomposition.factor.t, Scalar::ratio(28, 25));
        assert_eq!(rows[0].decomposition.factor.weight, Scalar::ratio(5, 6));
    }

    #[test]
    fn truncation_depth_one_is_rejected() {
        let g = PrincipalGraph::a_infinity(Scalar::int(2)).unwrap();
        assert_eq!(g.truncate(1).edge_units(), 1);
        assert!(matches!(truncation_row(&g, 1), Err(PrincipalError::DepthTooSmall { .. })));
    }

    #[test]
    fn finite_graph_saturates() {
        let g = PrincipalGraph::a_n(4);
        let rows = t_prime_sequence(&g, 6).unwrap();
        assert_eq!(rows[1].t_prime, rows[2].t_prime);
        assert_eq!(rows[2].t_prime, rows[4].t_prime);
    }

    #[test]
    fn majorization_holds_at_small_depths() {
        let g = PrincipalGraph::a_infinity(Scalar::int(2)).unwrap();
        for k in 2..8 {
            let (lhs, rhs) = majorization(&g, k).unwrap();
            assert!(lhs >= rhs, "k = {k}");
        }
        assert_eq!(majorization(&g, 2).unwrap(), (Scalar::int(3), Scalar::one()));
    }

    #[test]
    fn a3_full_depth_matches_index_formula() {
        let g = PrincipalGraph::a_n(3);
        let GjsReport::Compared { engine, index, within_tolerance, .. } = gjs_finite_depth_check(&g, 1e-9).unwrap() else {
            panic!("atoms at full depth");
        };
        assert!(within_tolerance);
        assert_eq!(index, Scalar::int(2));
        let expected = Scalar::one() + Scalar::int(4) * (Scalar::int(2).sqrt() - Scalar::one());
        assert_eq!(engine, expected);
    }

    #[test]
    fn amplifying_by_delta_shifts_the_parameter() {
        let g = PrincipalGraph::a_n(3);
        let GjsReport::Compared { formula, index, .. } = gjs_finite_depth_check(&g, 1e-9).unwrap() else {
            panic!("atoms at full depth");
        };
        let delta = g.delta().clone();
        let shifted = amplify(&VNAlgebra::free_group_factor(formula).unwrap(), &delta).unwrap();
        let expected = Scalar::one() + Scalar::int(2) * (&delta - Scalar::one()) * index / delta.square();
        assert_eq!(shifted.as_factor().unwrap().0, &expected);
    }

    #[test]
    fn from_graph_checks_layering_and_pf() {
        let text = "delta 2\nvertex r qint(1)\nvertex a qint(2)\nvertex b qint(3)\nedge r a\nedge a b\n";
        let g = crate::graph::parse_graph(text).unwrap();
        let err = PrincipalGraph::from_graph("path", g, Scalar::int(2), "r").unwrap_err();
        assert!(matches!(err, PrincipalError::PfResidual { .. }));
        let a3 = PrincipalGraph::a_n(3).truncate(2);
        let delta = a3.delta().unwrap().clone();
        let back = PrincipalGraph::from_graph("A3", a3, delta, "v0").unwrap();
        assert_eq!(back.depth(), Some(2));
    }
}
