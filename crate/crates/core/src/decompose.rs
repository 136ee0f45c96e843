//! Decomposition of graph algebras `M(Γ) ≅ L(F_t) ⊕ ⊕_{v∈B(Γ)} ℂ`.
//!
//! Two routes are provided and are meant to be checked against each other.
//! [`decompose_direct`] reads atoms off the boundary set and takes the free
//! dimension from the closed form. [`decompose_incremental`] starts from a
//! two-edge graph, resolves it by case analysis, then adds one edge unit at a
//! time, updating atoms locally and the free dimension by additivity over
//! `ℓ^∞(Γ)`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};
use crate::principal::fdim_closed_form;
use crate::scalar::Scalar;
use crate::vn::{fdim_free_product, Summand, VNAlgebra, VnError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Vn(#[from] VnError),
    #[error("vertices `{0}` and `{1}` are not joined by an edge")]
    NotAnEdge(String, String),
    #[error("graph needs at least 2 edge units, has {0}")]
    TooFewEdges(u32),
    #[error("invalid build order: {0}")]
    BuildOrder(String),
    #[error("factor parameter {t} is not above 1 at step {step}")]
    ParameterNotAboveOne { step: usize, t: Scalar },
    #[error("factor weight {weight} is not positive at step {step}")]
    EmptyFactor { step: usize, weight: Scalar },
    #[error("embedding parameters not increasing at step {step}: {previous} then {current}")]
    NonMonotone { step: usize, previous: Scalar, current: Scalar },
    #[error("base projection: {0}")]
    BaseProjection(String),
}

/// The algebra `A_e` of one edge unit between `heavy` and `light`
/// (`γ_heavy ≥ γ_light`), with unnormalized weights summing to `Tr(F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAlgebra {
    pub heavy: usize,
    pub light: usize,
    pub algebra: VNAlgebra,
}

impl EdgeAlgebra {
    pub fn fdim(&self) -> Result<Scalar, VnError> {
        self.algebra.normalized().fdim()
    }
}

/// `A_e` for one unit of the edge `v–w`; the heavier endpoint is chosen
/// automatically, with ties going to `v`.
pub fn edge_algebra(g: &WeightedGraph, v: usize, w: usize) -> Result<EdgeAlgebra, DecomposeError> {
    if v == w || g.multiplicity(v, w) == 0 {
        return Err(DecomposeError::NotAnEdge(g.id(v).into(), g.id(w).into()));
    }
    Ok(edge_algebra_unchecked(g, v, w)?)
}

fn edge_algebra_unchecked(g: &WeightedGraph, v: usize, w: usize) -> Result<EdgeAlgebra, VnError> {
    let (heavy, light) = if g.weight(v) >= g.weight(w) { (v, w) } else { (w, v) };
    let mut summands = vec![Summand::diffuse(Scalar::int(2) * g.weight(light))?];
    summands.extend(Summand::atom_if_positive(g.weight(heavy) - g.weight(light), g.id(heavy)));
    for u in 0..g.len() {
        if u != heavy && u != light {
            summands.push(Summand::atom(g.weight(u).clone())?.with_label(g.id(u)));
        }
    }
    Ok(EdgeAlgebra { heavy, light, algebra: VNAlgebra::new(summands) })
}

/// `ℓ^∞(Γ)` with unnormalized weights.
pub fn vertex_algebra(g: &WeightedGraph) -> Result<VNAlgebra, VnError> {
    VNAlgebra::abelian(g.ids().iter().cloned().zip(g.weights().iter().cloned()))
}

/// `Σ_e fdim(A_e) − (|E| − 1)·fdim(ℓ^∞(Γ))`, summing over edge units.
pub fn fdim_edge_sum(g: &WeightedGraph) -> Result<Scalar, DecomposeError> {
    let units = g.edge_units();
    if units == 0 {
        return Err(DecomposeError::TooFewEdges(0));
    }
    let d = vertex_algebra(g)?.normalized().fdim()?;
    let mut total = Scalar::zero();
    for (v, w, m) in g.edges() {
        let a = edge_algebra_unchecked(g, v, w)?.fdim()?;
        total = total + Scalar::int(m as i64) * a;
    }
    Ok(total - Scalar::int(units as i64 - 1) * d)
}

/// The factor summand of a decomposition, with normalized weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSummand {
    pub t: Scalar,
    pub weight: Scalar,
}

/// `L(F_t) ⊕ ⊕ ℂ` with weights normalized to total trace 1.
///
/// `scale` is the factor `1/Tr(F)` that was applied to the graph weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub factor: FactorSummand,
    pub atoms: BTreeMap<String, Scalar>,
    pub scale: Scalar,
    pub fdim: Scalar,
}

impl Decomposition {
    fn solve(fdim: Scalar, total: &Scalar, atoms: BTreeMap<String, Scalar>, step: usize) -> Result<Self, DecomposeError> {
        let scale = total.recip();
        let atoms: BTreeMap<String, Scalar> = atoms.into_iter().map(|(v, a)| (v, a * &scale)).collect();
        let atom_mass: Scalar = atoms.values().sum();
        let weight = Scalar::one() - atom_mass;
        if !weight.is_positive() {
            return Err(DecomposeError::EmptyFactor { step, weight });
        }
        let atom_squares: Scalar = atoms.values().map(Scalar::square).sum();
        let t = Scalar::one() + (&fdim - Scalar::one() + atom_squares) / weight.square();
        if t <= Scalar::one() {
            return Err(DecomposeError::ParameterNotAboveOne { step, t });
        }
        Ok(Decomposition { factor: FactorSummand { t, weight }, atoms, scale, fdim })
    }

    /// `Tr(F)` of the graph this came from.
    pub fn total_trace(&self) -> Scalar {
        self.scale.recip()
    }

    /// Trace of the factor support in the graph's own units.
    pub fn factor_trace(&self) -> Scalar {
        &self.factor.weight / &self.scale
    }

    /// Atom weights in the graph's own units; equal to the boundary set.
    pub fn atoms_unnormalized(&self) -> BTreeMap<String, Scalar> {
        self.atoms.iter().map(|(v, a)| (v.clone(), a / &self.scale)).collect()
    }

    /// Parameter of `p M(Γ) p` for a projection `p` under the factor support
    /// with unnormalized trace `s`.
    pub fn compressed_parameter(&self, s: &Scalar) -> Scalar {
        Scalar::one() + (self.factor_trace() / s).square() * (&self.factor.t - Scalar::one())
    }

    /// The normal form as an algebra with total weight 1.
    pub fn to_algebra(&self) -> Result<VNAlgebra, VnError> {
        let mut summands = vec![Summand::factor(self.factor.t.clone(), self.factor.weight.clone())?];
        for (v, a) in &self.atoms {
            summands.push(Summand::atom(a.clone())?.with_label(v.clone()));
        }
        Ok(VNAlgebra::new(summands))
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L(F_{})[{}]", self.factor.t, self.factor.weight)?;
        for (v, a) in &self.atoms {
            write!(f, " ⊕ C[{a}]@{v}")?;
        }
        Ok(())
    }
}

/// Result of decomposing a graph: a factor plus atoms, or, below two edge
/// units, the raw (normalized) algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Factor(Decomposition),
    NotAFactor { algebra: VNAlgebra, fdim: Scalar },
}

impl Outcome {
    pub fn factor(&self) -> Option<&Decomposition> {
        match self {
            Outcome::Factor(d) => Some(d),
            Outcome::NotAFactor { .. } => None,
        }
    }

    pub fn fdim(&self) -> &Scalar {
        match self {
            Outcome::Factor(d) => &d.fdim,
            Outcome::NotAFactor { fdim, .. } => fdim,
        }
    }
}

fn degenerate(g: &WeightedGraph) -> Result<Outcome, DecomposeError> {
    let algebra = match g.edges().next() {
        Some((v, w, _)) => edge_algebra_unchecked(g, v, w)?.algebra,
        None => vertex_algebra(g)?,
    }
    .normalized();
    let fdim = algebra.fdim()?;
    Ok(Outcome::NotAFactor { algebra, fdim })
}

/// Atoms from the boundary set, free dimension from the closed form.
pub fn decompose_direct(g: &WeightedGraph) -> Result<Outcome, DecomposeError> {
    g.check()?;
    if g.edge_units() < 2 {
        return degenerate(g);
    }
    let fdim = fdim_closed_form(g)?;
    Ok(Outcome::Factor(Decomposition::solve(fdim, &g.total_weight(), g.boundary_set(), 0)?))
}

/// First two edge units of a build order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Base {
    /// Two units between `v` and `w`.
    DoubleEdge { v: usize, w: usize },
    /// Single edges `ends.0 – middle – ends.1`.
    Path { middle: usize, ends: (usize, usize) },
}

/// One further edge unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// One more unit between two vertices already present.
    AddEdge { v: usize, w: usize },
    /// A new vertex `v` joined to the present vertex `to` by one unit.
    AddVertex { v: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BuildOrder {
    pub base: Base,
    pub steps: Vec<Step>,
}

impl BuildOrder {
    /// Breadth-first from the heaviest vertex (lowest index on ties); each
    /// vertex's edge units are emitted when it is dequeued.
    pub fn breadth_first(g: &WeightedGraph) -> Result<BuildOrder, DecomposeError> {
        g.check()?;
        if g.edge_units() < 2 {
            return Err(DecomposeError::TooFewEdges(g.edge_units()));
        }
        let mut root = 0;
        for v in 1..g.len() {
            if g.weight(v) > g.weight(root) {
                root = v;
            }
        }
        let mut present = vec![false; g.len()];
        present[root] = true;
        let mut done = vec![vec![0u32; g.len()]; g.len()];
        let mut units = Vec::new();
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for (w, m) in g.neighbours(u) {
                if !present[w] {
                    present[w] = true;
                    queue.push_back(w);
                    units.push(Step::AddVertex { v: w, to: u });
                    done[u][w] += 1;
                    done[w][u] += 1;
                }
                while done[u][w] < m {
                    units.push(Step::AddEdge { v: u, w });
                    done[u][w] += 1;
                    done[w][u] += 1;
                }
            }
        }
        BuildOrder::from_units(root, &units)
    }

    /// Turns a sequence of edge units grown from `root` into a build order,
    /// folding the first two units into the base.
    pub fn from_units(root: usize, units: &[Step]) -> Result<BuildOrder, DecomposeError> {
        let bad = |msg: &str| DecomposeError::BuildOrder(msg.to_string());
        let (first, second) = match units {
            [a, b, ..] => (*a, *b),
            _ => return Err(bad("fewer than two edge units")),
        };
        let Step::AddVertex { v: a, to } = first else {
            return Err(bad("first unit must attach a new vertex to the root"));
        };
        if to != root {
            return Err(bad("first unit must attach to the root"));
        }
        let base = match second {
            Step::AddEdge { v, w } if (v == a && w == root) || (v == root && w == a) => Base::DoubleEdge { v: root, w: a },
            Step::AddVertex { v: b, to } if to == root && b != a && b != root => Base::Path { middle: root, ends: (a, b) },
            Step::AddVertex { v: b, to } if to == a && b != a && b != root => Base::Path { middle: a, ends: (root, b) },
            _ => return Err(bad("first two units do not form a connected two-edge graph")),
        };
        Ok(BuildOrder { base, steps: units[2..].to_vec() })
    }

    /// Vertices in order of appearance.
    pub fn vertex_sequence(&self) -> Vec<usize> {
        let mut out = match self.base {
            Base::DoubleEdge { v, w } => vec![v, w],
            Base::Path { middle, ends } => vec![ends.0, middle, ends.1],
        };
        out.extend(self.steps.iter().filter_map(|s| match *s {
            Step::AddVertex { v, .. } => Some(v),
            Step::AddEdge { .. } => None,
        }));
        out
    }
}

/// Which two-edge case the base graph falls into. `heavy`/`light` orient
/// the double edge; `first`/`third` orient the path so `γ_first ≥ γ_third`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCase {
    /// Double edge with `2γ_w ≥ γ_v`: no atom.
    DoubleBalanced,
    /// Double edge with `γ_v > 2γ_w`: atom `γ_v − 2γ_w` at the heavy end.
    DoubleHeavy,
    /// Path with a heaviest middle vertex no heavier than its neighbours
    /// combined: no atom.
    PathMiddleBalanced,
    /// Path whose middle vertex outweighs both ends together: atom at the
    /// middle.
    PathMiddleHeavy,
    /// Path with an end heavier than the middle: atom at that end, and at the
    /// other end too when it also outweighs the middle.
    PathEndHeavy,
}

/// One stage of the incremental route: the decomposition of the subgraph
/// built so far.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    pub step: Option<Step>,
    /// Vertex indices of the full graph present at this stage.
    pub vertices: Vec<usize>,
    pub subgraph: WeightedGraph,
    pub decomposition: Decomposition,
}

struct Growing<'g> {
    graph: &'g WeightedGraph,
    present: Vec<usize>,
    mult: Vec<Vec<u32>>,
    /// Unnormalized atom weights by vertex index.
    atoms: BTreeMap<usize, Scalar>,
    total: Scalar,
    fdim: Scalar,
}

impl<'g> Growing<'g> {
    fn subgraph(&self) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for &v in &self.present {
            g.add_vertex(self.graph.id(v), self.graph.weight(v).clone()).expect("distinct");
        }
        for (a, &v) in self.present.iter().enumerate() {
            for (b, &w) in self.present.iter().enumerate().skip(a + 1) {
                if self.mult[v][w] > 0 {
                    g.add_edge_at(a, b, self.mult[v][w]);
                }
            }
        }
        g
    }

    fn local(&self, v: usize) -> usize {
        self.present.iter().position(|&x| x == v).expect("present vertex")
    }

    fn labelled_atoms(&self) -> BTreeMap<String, Scalar> {
        self.atoms.iter().map(|(&v, a)| (self.graph.id(v).to_string(), a.clone())).collect()
    }

    fn decomposition(&self, step: usize) -> Result<Decomposition, DecomposeError> {
        Decomposition::solve(self.fdim.clone(), &self.total, self.labelled_atoms(), step)
    }

    fn gamma(&self, v: usize) -> &Scalar {
        self.graph.weight(v)
    }

    fn reduce_atom(&mut self, v: usize, by: &Scalar) {
        if let Some(a) = self.atoms.remove(&v) {
            let rest = a - by;
            if rest.is_positive() {
                self.atoms.insert(v, rest);
            }
        }
    }
}

fn base_case(g: &WeightedGraph, base: Base) -> (BaseCase, BTreeMap<usize, Scalar>) {
    let gamma = |v: usize| g.weight(v).clone();
    let two = Scalar::int(2);
    let mut atoms = BTreeMap::new();
    match base {
        Base::DoubleEdge { v, w } => {
            let (heavy, light) = if gamma(v) >= gamma(w) { (v, w) } else { (w, v) };
            let excess = gamma(heavy) - &two * gamma(light);
            if excess.is_positive() {
                atoms.insert(heavy, excess);
                (BaseCase::DoubleHeavy, atoms)
            } else {
                (BaseCase::DoubleBalanced, atoms)
            }
        }
        Base::Path { middle, ends } => {
            let (first, third) = if gamma(ends.0) >= gamma(ends.1) { ends } else { (ends.1, ends.0) };
            let (g1, g2, g3) = (gamma(first), gamma(middle), gamma(third));
            if g2 >= g1 {
                let excess = &g2 - &g1 - &g3;
                if excess.is_positive() {
                    atoms.insert(middle, excess);
                    (BaseCase::PathMiddleHeavy, atoms)
                } else {
                    (BaseCase::PathMiddleBalanced, atoms)
                }
            } else {
                atoms.insert(first, &g1 - &g2);
                if let Some(a) = Some(&g3 - &g2).filter(Scalar::is_positive) {
                    atoms.insert(third, a);
                }
                (BaseCase::PathEndHeavy, atoms)
            }
        }
    }
}

/// Classifies the two-edge base graph and returns the atoms it carries.
pub fn classify_base(g: &WeightedGraph, base: Base) -> (BaseCase, BTreeMap<String, Scalar>) {
    let (case, atoms) = base_case(g, base);
    (case, atoms.into_iter().map(|(v, a)| (g.id(v).to_string(), a)).collect())
}

/// The incremental route. Returns the final decomposition and the chain of
/// decompositions of every intermediate subgraph.
pub fn decompose_incremental(
    g: &WeightedGraph,
    order: &BuildOrder,
) -> Result<(Decomposition, Vec<ChainEntry>), DecomposeError> {
    g.check()?;
    let n = g.len();
    let bad = |msg: String| DecomposeError::BuildOrder(msg);
    let in_range = |v: usize| if v < n { Ok(v) } else { Err(bad(format!("vertex index {v} out of range"))) };

    let mut state = Growing {
        graph: g,
        present: Vec::new(),
        mult: vec![vec![0; n]; n],
        atoms: BTreeMap::new(),
        total: Scalar::zero(),
        fdim: Scalar::zero(),
    };
    let (first, second) = match order.base {
        Base::DoubleEdge { v, w } => {
            in_range(v)?;
            in_range(w)?;
            if v == w {
                return Err(bad("double edge base needs two distinct vertices".into()));
            }
            state.present = vec![v, w];
            state.mult[v][w] = 2;
            state.mult[w][v] = 2;
            ((v, w), (v, w))
        }
        Base::Path { middle, ends } => {
            for v in [middle, ends.0, ends.1] {
                in_range(v)?;
            }
            if middle == ends.0 || middle == ends.1 || ends.0 == ends.1 {
                return Err(bad("path base needs three distinct vertices".into()));
            }
            state.present = vec![ends.0, middle, ends.1];
            for e in [ends.0, ends.1] {
                state.mult[middle][e] = 1;
                state.mult[e][middle] = 1;
            }
            ((ends.0, middle), (middle, ends.1))
        }
    };
    for &(v, w) in [first, second].iter() {
        if state.mult[v][w] > g.multiplicity(v, w) {
            return Err(bad(format!("base uses more units of {}–{} than the graph has", g.id(v), g.id(w))));
        }
    }

    let sub = state.subgraph();
    state.total = sub.total_weight();
    let (_, atoms) = base_case(g, order.base);
    state.atoms = atoms;
    let d = vertex_algebra(&sub)?.normalized();
    let e1 = edge_algebra_unchecked(&sub, state.local(first.0), state.local(first.1))?.algebra.normalized();
    let e2 = edge_algebra_unchecked(&sub, state.local(second.0), state.local(second.1))?.algebra.normalized();
    state.fdim = fdim_free_product(&e1, &e2, &d)?;

    let mut chain = vec![ChainEntry {
        step: None,
        vertices: state.present.clone(),
        subgraph: sub,
        decomposition: state.decomposition(0)?,
    }];

    for (i, &step) in order.steps.iter().enumerate() {
        let index = i + 1;
        let previous = chain.last().expect("non-empty").decomposition.to_algebra()?;
        match step {
            Step::AddEdge { v, w } => {
                in_range(v)?;
                in_range(w)?;
                if v == w || !state.present.contains(&v) || !state.present.contains(&w) {
                    return Err(bad(format!("step {index}: edge endpoints must be distinct present vertices")));
                }
                state.mult[v][w] += 1;
                state.mult[w][v] += 1;
                let sub = state.subgraph();
                let edge = edge_algebra_unchecked(&sub, state.local(v), state.local(w))?.algebra.normalized();
                let d = vertex_algebra(&sub)?.normalized();
                state.fdim = fdim_free_product(&previous, &edge, &d)?;
                let (gv, gw) = (state.gamma(v).clone(), state.gamma(w).clone());
                state.reduce_atom(v, &gw);
                state.reduce_atom(w, &gv);
            }
            Step::AddVertex { v, to } => {
                in_range(v)?;
                in_range(to)?;
                if state.present.contains(&v) || !state.present.contains(&to) {
                    return Err(bad(format!("step {index}: must attach a new vertex to a present one")));
                }
                let old_total = state.total.clone();
                state.present.push(v);
                state.mult[v][to] = 1;
                state.mult[to][v] = 1;
                state.total = &old_total + state.gamma(v);
                let enlarged = crate::vn::direct_sum(&[
                    (previous, old_total),
                    (VNAlgebra::abelian([(g.id(v).to_string(), Scalar::one())])?, state.gamma(v).clone()),
                ])?
                .normalized();
                let sub = state.subgraph();
                let edge = edge_algebra_unchecked(&sub, state.local(v), state.local(to))?.algebra.normalized();
                let d = vertex_algebra(&sub)?.normalized();
                state.fdim = fdim_free_product(&enlarged, &edge, &d)?;
                let (gv, gt) = (state.gamma(v).clone(), state.gamma(to).clone());
                let fresh = &gv - &gt;
                state.reduce_atom(to, &gv);
                if fresh.is_positive() {
                    state.atoms.insert(v, fresh);
                }
            }
        }
        chain.push(ChainEntry {
            step: Some(step),
            vertices: state.present.clone(),
            subgraph: state.subgraph(),
            decomposition: state.decomposition(index)?,
        });
    }

    for v in 0..n {
        for w in 0..n {
            if state.mult[v][w] != g.multiplicity(v, w) {
                return Err(bad(format!(
                    "build order ends with {} units between {} and {}, graph has {}",
                    state.mult[v][w],
                    g.id(v),
                    g.id(w),
                    g.multiplicity(v, w)
                )));
            }
        }
    }
    let last = chain.last().expect("non-empty").decomposition.clone();
    Ok((last, chain))
}

/// Runs the incremental route along the default breadth-first order.
pub fn decompose_incremental_default(g: &WeightedGraph) -> Result<(Decomposition, Vec<ChainEntry>), DecomposeError> {
    decompose_incremental(g, &BuildOrder::breadth_first(g)?)
}

/// Projection at which the embedding parameters are read.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseProjection {
    /// The factor support of the first stage.
    FactorSupport,
    /// The part of vertex `v`'s projection under the first stage's factor
    /// support, of trace `γ_v − a_v`.
    Vertex(String),
    /// An explicit unnormalized trace under the first factor support.
    Trace(Scalar),
}

/// Parameters `s_k` of `p M(Γ_k) p` along a chain for a fixed projection
/// `p`; errors on the first step where they fail to increase strictly.
pub fn embedding_parameter_chain(chain: &[ChainEntry], base: &BaseProjection) -> Result<Vec<Scalar>, DecomposeError> {
    let Some(first) = chain.first() else {
        return Ok(Vec::new());
    };
    let d0 = &first.decomposition;
    let support = d0.factor_trace();
    let s = match base {
        BaseProjection::FactorSupport => support.clone(),
        BaseProjection::Vertex(id) => {
            let v = first
                .subgraph
                .vertex_index(id)
                .ok_or_else(|| DecomposeError::BaseProjection(format!("vertex `{id}` not in the first stage")))?;
            let atom = d0.atoms_unnormalized().get(id).cloned().unwrap_or_else(Scalar::zero);
            first.subgraph.weight(v) - atom
        }
        BaseProjection::Trace(s) => s.clone(),
    };
    if !s.is_positive() || s > support {
        return Err(DecomposeError::BaseProjection(format!("trace {s} is not in (0, {support}]")));
    }
    let values: Vec<Scalar> = chain.iter().map(|c| c.decomposition.compressed_parameter(&s)).collect();
    for (k, pair) in values.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(DecomposeError::NonMonotone { step: k + 1, previous: pair[0].clone(), current: pair[1].clone() });
        }
    }
    Ok(values)
}

/// Both routes side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    pub direct: Outcome,
    pub incremental: Option<Decomposition>,
}

impl RouteComparison {
    pub fn agree(&self) -> bool {
        match (&self.direct, &self.incremental) {
            (Outcome::Factor(d), Some(i)) => d == i,
            (Outcome::NotAFactor { .. }, None) => true,
            _ => false,
        }
    }
}

pub fn compare_routes(g: &WeightedGraph, order: Option<&BuildOrder>) -> Result<RouteComparison, DecomposeError> {
    let direct = decompose_direct(g)?;
    let incremental = match &direct {
        Outcome::NotAFactor { .. } => None,
        Outcome::Factor(_) => {
            let order = match order {
                Some(o) => o.clone(),
                None => BuildOrder::breadth_first(g)?,
            };
            Some(decompose_incremental(g, &order)?.0)
        }
    };
    Ok(RouteComparison { direct, incremental })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn graph(vertices: &[(&str, Scalar)], edges: &[(&str, &str, u32)]) -> WeightedGraph {
        WeightedGraph::from_parts(vertices.iter().cloned(), edges.iter().cloned()).unwrap()
    }

    fn factor(o: Outcome) -> Decomposition {
        o.factor().cloned().expect("factor")
    }

    #[test]
    fn edge_algebra_examples() {
        let even = graph(&[("v", q(1, 2)), ("w", q(1, 2))], &[("v", "w", 1)]);
        let a = edge_algebra(&even, 0, 1).unwrap();
        assert_eq!(a.algebra.summands().len(), 1);
        assert_eq!(a.algebra.summands()[0].weight(), &Scalar::one());

        let uneven = graph(&[("v", q(4, 5)), ("w", q(1, 5))], &[("v", "w", 1)]);
        let a = edge_algebra(&uneven, 1, 0).unwrap();
        assert_eq!((a.heavy, a.light), (0, 1));
        let weights: Vec<_> = a.algebra.summands().iter().map(|s| s.weight().clone()).collect();
        assert_eq!(weights, vec![q(2, 5), q(3, 5)]);

        let path = graph(&[("s", q(1, 1)), ("a", q(2, 1)), ("b", q(3, 1))], &[("s", "a", 1), ("a", "b", 1)]);
        let a = edge_algebra(&path, 0, 1).unwrap();
        let weights: Vec<_> = a.algebra.summands().iter().map(|s| s.weight().clone()).collect();
        assert_eq!(weights, vec![Scalar::int(2), Scalar::int(1), Scalar::int(3)]);
        assert_eq!(a.fdim().unwrap(), q(13, 18));
        assert!(edge_algebra(&path, 0, 2).is_err());
    }

    #[test]
    fn balanced_double_edge() {
        let g = graph(&[("v", q(1, 2)), ("w", q(1, 2))], &[("v", "w", 2)]);
        let d = factor(decompose_direct(&g).unwrap());
        assert_eq!(d.factor.t, q(3, 2));
        assert!(d.atoms.is_empty());
        assert_eq!(fdim_edge_sum(&g).unwrap(), q(3, 2));
        let (i, _) = decompose_incremental_default(&g).unwrap();
        assert_eq!(i, d);
    }

    #[test]
    fn heavy_double_edge() {
        let g = graph(&[("v", q(4, 5)), ("w", q(1, 5))], &[("v", "w", 2)]);
        let d = factor(decompose_direct(&g).unwrap());
        assert_eq!(d.fdim, q(24, 25));
        assert_eq!(d.factor.t, q(4, 3));
        assert_eq!(d.factor.weight, q(3, 5));
        assert_eq!(d.atoms, BTreeMap::from([("v".to_string(), q(2, 5))]));
        let (case, _) = classify_base(&g, Base::DoubleEdge { v: 1, w: 0 });
        assert_eq!(case, BaseCase::DoubleHeavy);
    }

    #[test]
    fn path_with_heavy_ends() {
        let g = graph(
            &[("v1", q(1, 2)), ("v2", q(1, 10)), ("v3", q(2, 5))],
            &[("v1", "v2", 1), ("v2", "v3", 1)],
        );
        let d = factor(decompose_direct(&g).unwrap());
        assert_eq!(d.atoms, BTreeMap::from([("v1".to_string(), q(2, 5)), ("v3".to_string(), q(3, 10))]));
        let order = BuildOrder { base: Base::Path { middle: 1, ends: (0, 2) }, steps: vec![] };
        let (i, chain) = decompose_incremental(&g, &order).unwrap();
        assert_eq!(i, d);
        assert_eq!(chain.len(), 1);
        assert_eq!(classify_base(&g, order.base).0, BaseCase::PathEndHeavy);
    }

    #[test]
    fn path_cases_with_heavy_middle() {
        let balanced = graph(&[("a", q(1, 1)), ("b", q(3, 2)), ("c", q(1, 1))], &[("a", "b", 1), ("b", "c", 1)]);
        let base = Base::Path { middle: 1, ends: (0, 2) };
        assert_eq!(classify_base(&balanced, base).0, BaseCase::PathMiddleBalanced);
        let heavy = graph(&[("a", q(1, 1)), ("b", q(3, 1)), ("c", q(1, 2))], &[("a", "b", 1), ("b", "c", 1)]);
        let (case, atoms) = classify_base(&heavy, base);
        assert_eq!(case, BaseCase::PathMiddleHeavy);
        assert_eq!(atoms, BTreeMap::from([("b".to_string(), q(3, 2))]));
        for g in [balanced, heavy] {
            let d = factor(decompose_direct(&g).unwrap());
            let (i, _) = decompose_incremental(&g, &BuildOrder { base, steps: vec![] }).unwrap();
            assert_eq!(i, d);
        }
    }

    #[test]
    fn depth_two_truncation_example() {
        let g = graph(&[("s", q(1, 1)), ("a", q(2, 1)), ("b", q(3, 1))], &[("s", "a", 1), ("a", "b", 1)]);
        let d = factor(decompose_direct(&g).unwrap());
        assert_eq!(d.fdim, q(19, 18));
        assert_eq!(d.factor.t, q(28, 25));
        assert_eq!(d.factor.weight, q(5, 6));
        assert_eq!(d.atoms, BTreeMap::from([("b".to_string(), q(1, 6))]));
        assert_eq!(d.compressed_parameter(&Scalar::one()), Scalar::int(4));
    }

    #[test]
    fn pendant_vertex_creates_atom() {
        let g = graph(
            &[("x", q(1, 1)), ("y", q(1, 1)), ("p", q(5, 2))],
            &[("x", "y", 2), ("y", "p", 1)],
        );
        let order = BuildOrder { base: Base::DoubleEdge { v: 0, w: 1 }, steps: vec![Step::AddVertex { v: 2, to: 1 }] };
        let (d, chain) = decompose_incremental(&g, &order).unwrap();
        assert!(chain[0].decomposition.atoms.is_empty());
        assert_eq!(d.atoms_unnormalized(), BTreeMap::from([("p".to_string(), q(3, 2))]));
        assert_eq!(d, factor(decompose_direct(&g).unwrap()));
    }

    #[test]
    fn fewer_than_two_edges_is_not_a_factor() {
        let g = graph(&[("v", q(4, 5)), ("w", q(1, 5))], &[("v", "w", 1)]);
        let Outcome::NotAFactor { algebra, fdim } = decompose_direct(&g).unwrap() else {
            panic!("single edge decomposed as a factor");
        };
        assert_eq!(algebra.summands().len(), 2);
        assert_eq!(fdim, q(16, 25));
        assert!(BuildOrder::breadth_first(&g).is_err());
    }

    #[test]
    fn build_order_validation() {
        let g = graph(&[("v", q(1, 2)), ("w", q(1, 2))], &[("v", "w", 2)]);
        let short = BuildOrder { base: Base::DoubleEdge { v: 0, w: 1 }, steps: vec![Step::AddEdge { v: 0, w: 1 }] };
        assert!(matches!(decompose_incremental(&g, &short), Err(DecomposeError::BuildOrder(_))));
        let path = graph(&[("a", q(1, 1)), ("b", q(1, 1)), ("c", q(1, 1))], &[("a", "b", 1), ("b", "c", 1)]);
        let incomplete = BuildOrder { base: Base::DoubleEdge { v: 0, w: 1 }, steps: vec![] };
        assert!(decompose_incremental(&path, &incomplete).is_err());
        let detached = BuildOrder { base: Base::Path { middle: 1, ends: (0, 2) }, steps: vec![Step::AddVertex { v: 1, to: 0 }] };
        assert!(decompose_incremental(&path, &detached).is_err());
    }

    #[test]
    fn breadth_first_starts_at_heaviest() {
        let g = graph(
            &[("a", q(1, 1)), ("b", q(5, 1)), ("c", q(2, 1)), ("d", q(1, 1))],
            &[("a", "b", 1), ("b", "c", 2), ("c", "d", 1), ("a", "d", 1)],
        );
        let order = BuildOrder::breadth_first(&g).unwrap();
        assert_eq!(order.vertex_sequence()[..2].iter().filter(|&&v| v == 1).count(), 1);
        let (i, chain) = decompose_incremental(&g, &order).unwrap();
        assert_eq!(chain.len() as u32, g.edge_units() - 1);
        assert_eq!(i, factor(decompose_direct(&g).unwrap()));
    }

    #[test]
    fn embedding_chain_increases() {
        let g = graph(
            &[("a", q(1, 1)), ("b", q(2, 1)), ("c", q(3, 1)), ("d", q(1, 2))],
            &[("a", "b", 1), ("b", "c", 1), ("c", "d", 2), ("a", "c", 1)],
        );
        let (_, chain) = decompose_incremental_default(&g).unwrap();
        let s = embedding_parameter_chain(&chain, &BaseProjection::FactorSupport).unwrap();
        assert_eq!(s.len(), chain.len());
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        let single = embedding_parameter_chain(&chain[..1], &BaseProjection::FactorSupport).unwrap();
        assert_eq!(single.len(), 1);
        let v = embedding_parameter_chain(&chain, &BaseProjection::Vertex("c".into())).unwrap();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn non_monotone_chain_reports_step() {
        let g = graph(&[("v", q(1, 2)), ("w", q(1, 2)), ("x", q(1, 1))], &[("v", "w", 2), ("w", "x", 1)]);
        let (_, mut chain) = decompose_incremental_default(&g).unwrap();
        chain.swap(0, 1);
        let err = embedding_parameter_chain(&chain, &BaseProjection::Trace(q(1, 4))).unwrap_err();
        assert!(matches!(err, DecomposeError::NonMonotone { step: 1, .. }));
    }

    #[test]
    fn scale_covariance() {
        let g = graph(&[("v", q(4, 5)), ("w", q(1, 5)), ("x", q(1, 3))], &[("v", "w", 2), ("w", "x", 1)]);
        let a = factor(decompose_direct(&g).unwrap());
        let b = factor(decompose_direct(&g.scaled(&q(7, 3))).unwrap());
        assert_eq!(a.factor.t, b.factor.t);
        assert_eq!(a.atoms, b.atoms);
    }
}
