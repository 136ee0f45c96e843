//! Finite von Neumann algebras in normal form and their free-dimension
//! calculus.
//!
//! An algebra is a finite direct sum of weighted summands, each one a diffuse
//! hyperfinite piece, an interpolated free group factor `L(F_t)`, or a matrix
//! algebra `M_n`. Weights are traces of the summand identities and need not
//! sum to one unless an operation says so.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VnError {
    #[error("summand weight must be positive, got {0}")]
    NonPositiveWeight(Scalar),
    #[error("free group factor parameter must exceed 1, got {0}")]
    ParameterTooSmall(Scalar),
    #[error("matrix algebra size must be positive")]
    ZeroMatrixSize,
    #[error("free dimension needs a normalized trace, total weight is {0}")]
    NormalizationRequired(Scalar),
    #[error("amalgam must be finite-dimensional abelian")]
    UnsupportedAmalgam,
    #[error("expected a single interpolated free group factor")]
    NotAFactor,
    #[error("amplification constant must be positive, got {0}")]
    NonPositiveAmplification(Scalar),
    #[error("invalid projection on summand {index}: {reason}")]
    InvalidProjection { index: usize, reason: String },
    #[error("direct sum needs at least one component")]
    EmptyDirectSum,
    #[error("unknown summand kind `{0}`")]
    UnknownKind(String),
    #[error("summand record is missing field `{0}`")]
    MissingField(&'static str),
}

/// What a summand is, up to its weight.
#[derive(Debug, Clone, PartialEq)]
pub enum SummandKind {
    DiffuseHyperfinite,
    FreeGroupFactor { t: Scalar },
    MatrixAlgebra { n: u32 },
}

impl SummandKind {
    fn rank(&self) -> u8 {
        match self {
            SummandKind::FreeGroupFactor { .. } => 0,
            SummandKind::DiffuseHyperfinite => 1,
            SummandKind::MatrixAlgebra { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SummandKind::DiffuseHyperfinite => "diffuse",
            SummandKind::FreeGroupFactor { .. } => "free_group_factor",
            SummandKind::MatrixAlgebra { .. } => "matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summand {
    kind: SummandKind,
    weight: Scalar,
    label: Option<String>,
}

impl Summand {
    pub fn new(kind: SummandKind, weight: Scalar, label: Option<String>) -> Result<Self, VnError> {
        if !weight.is_positive() {
            return Err(VnError::NonPositiveWeight(weight));
        }
        match &kind {
            SummandKind::FreeGroupFactor { t } if !t.is_infinite() && t.tol_cmp(&Scalar::one()) != Ordering::Greater => {
                return Err(VnError::ParameterTooSmall(t.clone()));
            }
            SummandKind::MatrixAlgebra { n: 0 } => return Err(VnError::ZeroMatrixSize),
            _ => {}
        }
        Ok(Summand { kind, weight, label })
    }

    pub fn factor(t: Scalar, weight: Scalar) -> Result<Self, VnError> {
        Summand::new(SummandKind::FreeGroupFactor { t }, weight, None)
    }

    pub fn diffuse(weight: Scalar) -> Result<Self, VnError> {
        Summand::new(SummandKind::DiffuseHyperfinite, weight, None)
    }

    pub fn matrix(n: u32, weight: Scalar) -> Result<Self, VnError> {
        Summand::new(SummandKind::MatrixAlgebra { n }, weight, None)
    }

    /// A one-dimensional summand `ℂ` of the given weight.
    pub fn atom(weight: Scalar) -> Result<Self, VnError> {
        Summand::matrix(1, weight)
    }

    /// `ℂ` of the given weight, or `None` when the weight is not positive.
    /// Decomposition code paths use this to drop vanishing atoms.
    pub fn atom_if_positive(weight: Scalar, label: impl Into<String>) -> Option<Self> {
        weight
            .is_positive()
            .then(|| Summand { kind: SummandKind::MatrixAlgebra { n: 1 }, weight, label: Some(label.into()) })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn kind(&self) -> &SummandKind {
        &self.kind
    }

    pub fn weight(&self) -> &Scalar {
        &self.weight
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Trace of a minimal projection, for matrix summands.
    pub fn minimal_trace(&self) -> Option<Scalar> {
        match self.kind {
            SummandKind::MatrixAlgebra { n } => Some(&self.weight / Scalar::int(n as i64)),
            _ => None,
        }
    }

    fn rescaled(&self, factor: &Scalar) -> Summand {
        Summand { kind: self.kind.clone(), weight: &self.weight * factor, label: self.label.clone() }
    }
}

fn canonical_order(a: &Summand, b: &Summand) -> Ordering {
    a.kind.rank().cmp(&b.kind.rank()).then_with(|| match a.kind {
        SummandKind::MatrixAlgebra { .. } => a
            .label
            .cmp(&b.label)
            .then_with(|| matrix_size(a).cmp(&matrix_size(b)))
            .then_with(|| b.weight.tol_cmp(&a.weight)),
        _ => b.weight.tol_cmp(&a.weight).then_with(|| a.label.cmp(&b.label)),
    })
}

fn matrix_size(s: &Summand) -> u32 {
    match s.kind {
        SummandKind::MatrixAlgebra { n } => n,
        _ => 0,
    }
}

/// A finite direct sum of summands, kept in canonical order: factors by
/// descending weight, then diffuse parts, then matrix algebras by label.
#[derive(Debug, Clone, PartialEq)]
pub struct VNAlgebra {
    summands: Vec<Summand>,
    total_weight: Scalar,
}

impl VNAlgebra {
    pub fn new(mut summands: Vec<Summand>) -> Self {
        summands.sort_by(canonical_order);
        let total_weight = summands.iter().map(|s| &s.weight).sum();
        VNAlgebra { summands, total_weight }
    }

    /// `L(F_t)` with unit trace.
    pub fn free_group_factor(t: Scalar) -> Result<Self, VnError> {
        Ok(VNAlgebra::new(vec![Summand::factor(t, Scalar::one())?]))
    }

    /// `ℓ^∞` of finitely many atoms.
    pub fn abelian(weights: impl IntoIterator<Item = (String, Scalar)>) -> Result<Self, VnError> {
        let summands = weights
            .into_iter()
            .map(|(label, w)| Summand::atom(w).map(|s| s.with_label(label)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VNAlgebra::new(summands))
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn total_weight(&self) -> &Scalar {
        &self.total_weight
    }

    pub fn is_normalized(&self) -> bool {
        self.total_weight == Scalar::one()
    }

    /// The same algebra with weights divided by the total weight.
    pub fn normalized(&self) -> VNAlgebra {
        if self.total_weight.is_zero() {
            return self.clone();
        }
        let factor = self.total_weight.recip();
        VNAlgebra::new(self.summands.iter().map(|s| s.rescaled(&factor)).collect())
    }

    /// True if every summand is a one-dimensional `ℂ`.
    pub fn is_finite_abelian(&self) -> bool {
        self.summands
            .iter()
            .all(|s| matches!(s.kind, SummandKind::MatrixAlgebra { n: 1 }))
    }

    /// The unique summand when it is an interpolated free group factor.
    pub fn as_factor(&self) -> Option<(&Scalar, &Scalar)> {
        match self.summands.as_slice() {
            [Summand { kind: SummandKind::FreeGroupFactor { t }, weight, .. }] => Some((t, weight)),
            _ => None,
        }
    }

    /// Free dimension `1 + Σ γ_j²(t_j − 1) − Σ α_k²` of a normalized algebra.
    ///
    /// Returns [`Scalar::Infinity`] when some factor has parameter `∞`.
    pub fn fdim(&self) -> Result<Scalar, VnError> {
        if !self.is_normalized() {
            return Err(VnError::NormalizationRequired(self.total_weight.clone()));
        }
        let mut value = Scalar::one();
        for summand in &self.summands {
            match &summand.kind {
                SummandKind::DiffuseHyperfinite => {}
                SummandKind::FreeGroupFactor { t } => {
                    if t.is_infinite() {
                        return Ok(Scalar::Infinity);
                    }
                    value = value + summand.weight.square() * (t - Scalar::one());
                }
                SummandKind::MatrixAlgebra { .. } => {
                    let alpha = summand.minimal_trace().expect("matrix summand");
                    value = value - alpha.square();
                }
            }
        }
        Ok(value)
    }

    /// Compresses by a projection given as sub-traces per summand index.
    ///
    /// Summands without an entry vanish. A factor summand of weight `w`
    /// cut down to trace `s` becomes the `s/w`-amplification of that factor.
    pub fn compress(&self, projection: &ProjectionSpec) -> Result<VNAlgebra, VnError> {
        for &index in projection.sub_traces.keys() {
            if index >= self.summands.len() {
                return Err(VnError::InvalidProjection { index, reason: "no such summand".into() });
            }
        }
        let mut out = Vec::new();
        for (index, summand) in self.summands.iter().enumerate() {
            let Some(sub) = projection.sub_traces.get(&index) else {
                continue;
            };
            if !sub.is_positive() {
                return Err(VnError::InvalidProjection { index, reason: format!("sub-trace {sub} is not positive") });
            }
            if sub > &summand.weight {
                return Err(VnError::InvalidProjection {
                    index,
                    reason: format!("sub-trace {sub} exceeds summand weight {}", summand.weight),
                });
            }
            let kind = match &summand.kind {
                SummandKind::DiffuseHyperfinite => SummandKind::DiffuseHyperfinite,
                SummandKind::FreeGroupFactor { t } => SummandKind::FreeGroupFactor {
                    t: amplified_parameter(t, &(sub / &summand.weight)),
                },
                SummandKind::MatrixAlgebra { n } => {
                    let units = sub / summand.minimal_trace().expect("matrix summand");
                    let m = units
                        .to_integer()
                        .or_else(|| {
                            // real mode: accept values within tolerance of an integer
                            let rounded = units.to_f64().round();
                            (Scalar::int(rounded as i64) == units).then(|| (rounded as i64).into())
                        })
                        .ok_or_else(|| VnError::InvalidProjection {
                            index,
                            reason: format!("sub-trace {sub} is not a multiple of the minimal trace"),
                        })?;
                    let m: u32 = m.try_into().map_err(|_| VnError::InvalidProjection {
                        index,
                        reason: "matrix corner size out of range".into(),
                    })?;
                    debug_assert!(m <= *n);
                    SummandKind::MatrixAlgebra { n: m }
                }
            };
            out.push(Summand { kind, weight: sub.clone(), label: summand.label.clone() });
        }
        Ok(VNAlgebra::new(out))
    }
}

impl fmt::Display for VNAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return f.write_str("0");
        }
        for (i, s) in self.summands.iter().enumerate() {
            if i > 0 {
                f.write_str(" ⊕ ")?;
            }
            match &s.kind {
                SummandKind::DiffuseHyperfinite => write!(f, "R[{}]", s.weight)?,
                SummandKind::FreeGroupFactor { t } => write!(f, "L(F_{t})[{}]", s.weight)?,
                SummandKind::MatrixAlgebra { n: 1 } => write!(f, "C[{}]", s.weight)?,
                SummandKind::MatrixAlgebra { n } => write!(f, "M_{n}[{}]", s.weight)?,
            }
            if let Some(label) = &s.label {
                write!(f, "@{label}")?;
            }
        }
        Ok(())
    }
}

/// A projection described by its trace inside each summand it meets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectionSpec {
    pub sub_traces: BTreeMap<usize, Scalar>,
}

impl ProjectionSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, summand: usize, sub_trace: Scalar) -> Self {
        self.sub_traces.insert(summand, sub_trace);
        self
    }

    /// The identity projection of `algebra`.
    pub fn identity(algebra: &VNAlgebra) -> Self {
        ProjectionSpec {
            sub_traces: algebra
                .summands()
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.weight.clone()))
                .collect(),
        }
    }
}

/// `1 + γ⁻²(t − 1)`, the parameter of the `γ`-amplification of `L(F_t)`.
pub fn amplified_parameter(t: &Scalar, gamma: &Scalar) -> Scalar {
    if t.is_infinite() {
        return Scalar::Infinity;
    }
    Scalar::one() + (t - Scalar::one()) / gamma.square()
}

/// `fdim(M)`.
pub fn fdim(m: &VNAlgebra) -> Result<Scalar, VnError> {
    m.fdim()
}

/// `fdim(M1 *_D M2) = fdim(M1) + fdim(M2) − fdim(D)` for finite-dimensional
/// abelian `D`. Bookkeeping only; the product itself is never formed.
pub fn fdim_free_product(m1: &VNAlgebra, m2: &VNAlgebra, amalgam: &VNAlgebra) -> Result<Scalar, VnError> {
    if !amalgam.is_finite_abelian() {
        return Err(VnError::UnsupportedAmalgam);
    }
    let (a, b, d) = (m1.fdim()?, m2.fdim()?, amalgam.fdim()?);
    if a.is_infinite() || b.is_infinite() {
        return Ok(Scalar::Infinity);
    }
    Ok(a + b - d)
}

/// The `γ`-amplification `L(F_t)_γ = L(F(1 + γ⁻²(t − 1)))`, with unit trace.
pub fn amplify(m: &VNAlgebra, gamma: &Scalar) -> Result<VNAlgebra, VnError> {
    let (t, _) = m.as_factor().ok_or(VnError::NotAFactor)?;
    if !gamma.is_positive() {
        return Err(VnError::NonPositiveAmplification(gamma.clone()));
    }
    VNAlgebra::free_group_factor(amplified_parameter(t, gamma))
}

pub fn compress(m: &VNAlgebra, p: &ProjectionSpec) -> Result<VNAlgebra, VnError> {
    m.compress(p)
}

/// Direct sum where each component is rescaled to the given total weight.
pub fn direct_sum(parts: &[(VNAlgebra, Scalar)]) -> Result<VNAlgebra, VnError> {
    if parts.is_empty() {
        return Err(VnError::EmptyDirectSum);
    }
    let mut summands = Vec::new();
    for (algebra, weight) in parts {
        if !weight.is_positive() {
            return Err(VnError::NonPositiveWeight(weight.clone()));
        }
        if algebra.summands().is_empty() {
            return Err(VnError::NonPositiveWeight(Scalar::zero()));
        }
        let factor = weight / algebra.total_weight();
        summands.extend(algebra.summands().iter().map(|s| s.rescaled(&factor)));
    }
    Ok(VNAlgebra::new(summands))
}

/// Serialized form of one summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandRecord {
    pub kind: String,
    pub weight: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl From<&Summand> for SummandRecord {
    fn from(s: &Summand) -> Self {
        let (t, n) = match &s.kind {
            SummandKind::DiffuseHyperfinite => (None, None),
            SummandKind::FreeGroupFactor { t } => (Some(t.clone()), None),
            SummandKind::MatrixAlgebra { n } => (None, Some(*n)),
        };
        SummandRecord { kind: s.kind.name().to_string(), weight: s.weight.clone(), t, n, label: s.label.clone() }
    }
}

impl TryFrom<SummandRecord> for Summand {
    type Error = VnError;

    fn try_from(r: SummandRecord) -> Result<Self, VnError> {
        let kind = match r.kind.as_str() {
            "diffuse" => SummandKind::DiffuseHyperfinite,
            "free_group_factor" => SummandKind::FreeGroupFactor { t: r.t.ok_or(VnError::MissingField("t"))? },
            "matrix" => SummandKind::MatrixAlgebra { n: r.n.ok_or(VnError::MissingField("n"))? },
            other => return Err(VnError::UnknownKind(other.to_string())),
        };
        Summand::new(kind, r.weight, r.label)
    }
}

impl Serialize for VNAlgebra {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let records: Vec<SummandRecord> = self.summands.iter().map(SummandRecord::from).collect();
        records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VNAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<SummandRecord>::deserialize(deserializer)?;
        let summands = records
            .into_iter()
            .map(Summand::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(VNAlgebra::new(summands))
    }
}
