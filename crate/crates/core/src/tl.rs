//! Temperley–Lieb diagrams on a single row of boundary points, their
//! juxtaposition product, and the trace that closes a diagram with every
//! noncrossing pairing and weights each closed loop by `δ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::Scalar;

/// Largest number of boundary points the trace will close.
pub const MAX_POINTS: usize = 28;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TlError {
    #[error("matching is not an involution without fixed points")]
    NotAPairing,
    #[error("matching has crossing arcs {0}–{1} and {2}–{3}")]
    Crossing(usize, usize, usize, usize),
    #[error("elements have different loop parameters")]
    DeltaMismatch,
    #[error("closing {points} points exceeds the cap of {cap}")]
    SizeCap { points: usize, cap: usize },
    #[error("element is not invariant under left-right reflection")]
    NotSelfAdjoint,
    #[error("Hankel size {0} exceeds 7")]
    HankelTooLarge(usize),
    #[error("loop parameter must exceed 1")]
    DeltaTooSmall,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A noncrossing perfect matching of `2n` points in a row, stored as the
/// array `m` with `m[m[i]] = i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TLDiagram {
    matching: Vec<u32>,
}

impl TLDiagram {
    pub fn new(matching: Vec<u32>) -> Result<Self, TlError> {
        let n = matching.len();
        for (i, &j) in matching.iter().enumerate() {
            let j = j as usize;
            if j >= n || j == i || matching[j] as usize != i {
                return Err(TlError::NotAPairing);
            }
        }
        let d = TLDiagram { matching };
        if let Some((a, b, c, e)) = d.crossing() {
            return Err(TlError::Crossing(a, b, c, e));
        }
        Ok(d)
    }

    /// The diagram with no points.
    pub fn empty() -> Self {
        TLDiagram { matching: Vec::new() }
    }

    /// A single arc on two points.
    pub fn cup() -> Self {
        TLDiagram { matching: vec![1, 0] }
    }

    pub fn matching(&self) -> &[u32] {
        &self.matching
    }

    pub fn points(&self) -> usize {
        self.matching.len()
    }

    pub fn is_involution(&self) -> bool {
        self.matching.iter().enumerate().all(|(i, &j)| {
            let j = j as usize;
            j < self.matching.len() && j != i && self.matching[j] as usize == i
        })
    }

    fn crossing(&self) -> Option<(usize, usize, usize, usize)> {
        let m = &self.matching;
        for i in 0..m.len() {
            let mi = m[i] as usize;
            if mi < i {
                continue;
            }
            for j in (i + 1)..mi {
                let mj = m[j] as usize;
                if mj > mi {
                    return Some((i, mi, j, mj));
                }
            }
        }
        None
    }

    pub fn is_noncrossing(&self) -> bool {
        self.crossing().is_none()
    }

    /// `self` to the left of `other`.
    pub fn juxtapose(&self, other: &TLDiagram) -> TLDiagram {
        let shift = self.matching.len() as u32;
        let mut matching = self.matching.clone();
        matching.extend(other.matching.iter().map(|&j| j + shift));
        TLDiagram { matching }
    }

    /// Mirror image across a vertical line.
    pub fn reflect(&self) -> TLDiagram {
        let n = self.matching.len();
        let matching = (0..n).map(|i| (n - 1 - self.matching[n - 1 - i] as usize) as u32).collect();
        TLDiagram { matching }
    }
}

impl fmt::Display for TLDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.matching.is_empty() {
            return f.write_str("()");
        }
        for (i, &j) in self.matching.iter().enumerate() {
            if (j as usize) > i {
                write!(f, "({} {})", i, j)?;
            }
        }
        Ok(())
    }
}

/// Calls `f` on every noncrossing pairing of `2n` points whose first point
/// is paired with `2·first + 1`. Each interval is filled by pairing its
/// leftmost point with an odd offset, which splits it into an inside and an
/// outside part.
fn for_each_pairing_with_first(n: usize, first: usize, f: &mut dyn FnMut(&[u32])) {
    fn fill(m: &mut [u32], pending: &mut Vec<(usize, usize)>, f: &mut dyn FnMut(&[u32])) {
        let Some((lo, hi)) = pending.pop() else {
            f(m);
            return;
        };
        if lo == hi {
            fill(m, pending, f);
        } else {
            for partner in (lo + 1..hi).step_by(2) {
                m[lo] = partner as u32;
                m[partner] = lo as u32;
                pending.push((partner + 1, hi));
                pending.push((lo + 1, partner));
                fill(m, pending, f);
                pending.pop();
                pending.pop();
            }
        }
        pending.push((lo, hi));
    }
    let points = 2 * n;
    let mut m = vec![0u32; points];
    if n == 0 {
        f(&m);
        return;
    }
    let partner = 2 * first + 1;
    m[0] = partner as u32;
    m[partner] = 0;
    let mut pending = vec![(partner + 1, points), (1, partner)];
    fill(&mut m, &mut pending, f);
}

/// Calls `f` on every noncrossing pairing of `2n` points.
pub fn for_each_noncrossing_pairing(n: usize, mut f: impl FnMut(&[u32])) {
    if n == 0 {
        f(&[]);
        return;
    }
    for first in 0..n {
        for_each_pairing_with_first(n, first, &mut f);
    }
}

/// All noncrossing pairings of `2n` points, collected.
pub fn noncrossing_pairings(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_noncrossing_pairing(n, |m| out.push(m.to_vec()));
    out
}

/// `C_n`.
pub fn catalan(n: u32) -> BigInt {
    let mut c = BigInt::one();
    for k in 0..n {
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
    }
    c
}

/// Connected components of the union of two perfect matchings on the same
/// points, found by walking alternately along each.
pub fn loop_count(a: &[u32], b: &[u32]) -> usize {
    let mut seen = vec![false; a.len()];
    let mut loops = 0;
    for start in 0..a.len() {
        if seen[start] {
            continue;
        }
        loops += 1;
        let mut p = start;
        loop {
            seen[p] = true;
            let q = a[p] as usize;
            seen[q] = true;
            p = b[q] as usize;
            if p == start {
                break;
            }
        }
    }
    loops
}

/// A polynomial in `δ` with rational coefficients; index `i` holds the
/// coefficient of `δ^i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeltaPoly {
    coeffs: Vec<BigRational>,
}

impl DeltaPoly {
    pub fn zero() -> Self {
        DeltaPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        DeltaPoly { coeffs: vec![c] }.trimmed()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// `c·δ^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        DeltaPoly { coeffs }.trimmed()
    }

    /// `δ`.
    pub fn delta() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    /// `Σ counts[i] δ^i`.
    pub fn from_counts(counts: &[u64]) -> Self {
        DeltaPoly { coeffs: counts.iter().map(|&c| BigRational::from_integer(c.into())).collect() }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, delta: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * delta + Scalar::from_rational(c.clone());
        }
        acc
    }

    pub fn eval_rational(&self, delta: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * delta + c;
        }
        acc
    }

    /// Coefficients with no terms dropped (useful for fixtures).
    pub fn integer_coefficients(&self) -> Option<Vec<i64>> {
        self.coeffs
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect()
    }
}

impl Add for &DeltaPoly {
    type Output = DeltaPoly;
    fn add(self, rhs: &DeltaPoly) -> DeltaPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
            .collect();
        DeltaPoly { coeffs }.trimmed()
    }
}

impl Add for DeltaPoly {
    type Output = DeltaPoly;
    fn add(self, rhs: DeltaPoly) -> DeltaPoly {
        &self + &rhs
    }
}

impl Mul for &DeltaPoly {
    type Output = DeltaPoly;
    fn mul(self, rhs: &DeltaPoly) -> DeltaPoly {
        if self.is_zero() || rhs.is_zero() {
            return DeltaPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        DeltaPoly { coeffs }.trimmed()
    }
}

impl Mul for DeltaPoly {
    type Output = DeltaPoly;
    fn mul(self, rhs: DeltaPoly) -> DeltaPoly {
        &self * &rhs
    }
}

impl Neg for DeltaPoly {
    type Output = DeltaPoly;
    fn neg(self) -> DeltaPoly {
        DeltaPoly { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl fmt::Display for DeltaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let magnitude = c.abs();
            match (first, negative) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            first = false;
            let unit = magnitude.is_one();
            if !unit || k == 0 {
                write!(f, "{magnitude}")?;
            }
            if k > 0 && !unit {
                f.write_str("*")?;
            }
            match k {
                0 => {}
                1 => f.write_str("d")?,
                _ => write!(f, "d^{k}")?,
            }
        }
        Ok(())
    }
}

/// The loop parameter: kept symbolic, or a fixed value greater than 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Delta {
    Symbolic,
    Value(Scalar),
}

impl Delta {
    pub fn value(v: Scalar) -> Result<Self, TlError> {
        if v <= Scalar::one() {
            return Err(TlError::DeltaTooSmall);
        }
        Ok(Delta::Value(v))
    }
}

/// A finite linear combination of diagrams with coefficients in `ℚ[δ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrElement {
    terms: BTreeMap<TLDiagram, DeltaPoly>,
    delta: Delta,
}

impl GrElement {
    pub fn zero(delta: Delta) -> Self {
        GrElement { terms: BTreeMap::new(), delta }
    }

    pub fn unit(delta: Delta) -> Self {
        Self::diagram(TLDiagram::empty(), delta)
    }

    pub fn diagram(d: TLDiagram, delta: Delta) -> Self {
        Self::term(d, DeltaPoly::one(), delta)
    }

    pub fn cup(delta: Delta) -> Self {
        Self::diagram(TLDiagram::cup(), delta)
    }

    pub fn term(d: TLDiagram, coeff: DeltaPoly, delta: Delta) -> Self {
        let mut g = Self::zero(delta);
        g.add_term(d, coeff);
        g
    }

    fn add_term(&mut self, d: TLDiagram, coeff: DeltaPoly) {
        let entry = self.terms.entry(d).or_default();
        *entry = &*entry + &coeff;
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn delta(&self) -> &Delta {
        &self.delta
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TLDiagram, &DeltaPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest number of points among the diagrams.
    pub fn max_points(&self) -> usize {
        self.terms.keys().map(TLDiagram::points).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &DeltaPoly) -> GrElement {
        let mut out = GrElement::zero(self.delta.clone());
        for (d, k) in &self.terms {
            out.add_term(d.clone(), k * c);
        }
        out
    }

    pub fn plus(&self, other: &GrElement) -> Result<GrElement, TlError> {
        if self.delta != other.delta {
            return Err(TlError::DeltaMismatch);
        }
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), c.clone());
        }
        Ok(out)
    }

    /// Bilinear extension of juxtaposition.
    pub fn multiply(&self, other: &GrElement) -> Result<GrElement, TlError> {
        if self.delta != other.delta {
            return Err(TlError::DeltaMismatch);
        }
        let mut out = GrElement::zero(self.delta.clone());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.juxtapose(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn reflect(&self) -> GrElement {
        let mut out = GrElement::zero(self.delta.clone());
        for (d, c) in &self.terms {
            out.add_term(d.reflect(), c.clone());
        }
        out
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.reflect() == *self
    }

    /// The trace as a polynomial in `δ`.
    pub fn trace_poly(&self) -> Result<DeltaPoly, TlError> {
        let mut total = DeltaPoly::zero();
        for (d, c) in &self.terms {
            total = total + c * &closure_poly(d)?;
        }
        Ok(total)
    }

    /// The trace, evaluated when `δ` has a value.
    pub fn trace(&self) -> Result<TraceValue, TlError> {
        Ok(TraceValue::new(self.trace_poly()?, &self.delta))
    }
}

/// A trace or moment: always a polynomial, plus its value when `δ` is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceValue {
    pub poly: DeltaPoly,
    pub value: Option<Scalar>,
}

impl TraceValue {
    fn new(poly: DeltaPoly, delta: &Delta) -> Self {
        let value = match delta {
            Delta::Symbolic => None,
            Delta::Value(v) => Some(poly.eval(v)),
        };
        TraceValue { poly, value }
    }
}

impl fmt::Display for TraceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}", self.poly),
        }
    }
}

fn check_cap(points: usize) -> Result<(), TlError> {
    if points > MAX_POINTS {
        return Err(TlError::SizeCap { points, cap: MAX_POINTS });
    }
    Ok(())
}

/// `Σ_c δ^{loops(d, c)}` over all noncrossing closures `c`, with loops found
/// by walking the union of the two matchings.
pub fn closure_poly(d: &TLDiagram) -> Result<DeltaPoly, TlError> {
    check_cap(d.points())?;
    let n = d.points() / 2;
    if n == 0 {
        return Ok(DeltaPoly::one());
    }
    let counts = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut acc = vec![0u64; n + 1];
            for_each_pairing_with_first(n, first, &mut |c| acc[loop_count(d.matching(), c)] += 1);
            acc
        })
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(DeltaPoly::from_counts(&counts))
}

/// Loop-count histogram of a matching against all noncrossing closures,
/// generating closures point by point as a Dyck word and joining strands as
/// arcs close. Independent of [`noncrossing_pairings`] and [`loop_count`].
fn closure_counts_by_stacking(d: &[u32]) -> Vec<u64> {
    struct Walk<'a> {
        ends: Vec<u32>,
        stack: Vec<u32>,
        counts: Vec<u64>,
        n: usize,
        _diagram: &'a [u32],
    }
    impl Walk<'_> {
        fn go(&mut self, pos: usize, loops: usize) {
            if pos == self.n {
                self.counts[loops] += 1;
                return;
            }
            let remaining = self.n - pos;
            if self.stack.len() < remaining {
                self.stack.push(pos as u32);
                self.go(pos + 1, loops);
                self.stack.pop();
            }
            if let Some(&open) = self.stack.last() {
                let (i, j) = (open as usize, pos);
                let a = self.ends[i];
                if a as usize == j {
                    self.stack.pop();
                    self.go(pos + 1, loops + 1);
                    self.stack.push(open);
                } else {
                    let b = self.ends[j];
                    let (saved_a, saved_b) = (self.ends[a as usize], self.ends[b as usize]);
                    self.ends[a as usize] = b;
                    self.ends[b as usize] = a;
                    self.stack.pop();
                    self.go(pos + 1, loops);
                    self.stack.push(open);
                    self.ends[a as usize] = saved_a;
                    self.ends[b as usize] = saved_b;
                }
            }
        }
    }
    let n = d.len();
    let mut walk = Walk { ends: d.to_vec(), stack: Vec::new(), counts: vec![0; n / 2 + 1], n, _diagram: d };
    walk.go(0, 0);
    walk.counts
}

/// `[trace(g^{∧j}) : j = 0..=n_max]` by expanding each power with
/// [`GrElement::multiply`] and closing every diagram.
pub fn moments_by_expansion(g: &GrElement, n_max: usize) -> Result<Vec<TraceValue>, TlError> {
    check_cap(g.max_points() * n_max)?;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut power = GrElement::unit(g.delta.clone());
    for j in 0..=n_max {
        if j > 0 {
            power = power.multiply(g)?;
        }
        out.push(power.trace()?);
    }
    Ok(out)
}

/// The same moments, walking over words in the terms of `g` without merging
/// equal diagrams, and closing each word by strand joining.
pub fn moments_by_stacking(g: &GrElement, n_max: usize) -> Result<Vec<TraceValue>, TlError> {
    check_cap(g.max_points() * n_max)?;
    let terms: Vec<(&TLDiagram, &DeltaPoly)> = g.terms.iter().collect();
    let mut out = Vec::with_capacity(n_max + 1);
    for j in 0..=n_max {
        let mut total = DeltaPoly::zero();
        if terms.is_empty() && j > 0 {
            out.push(TraceValue::new(total, &g.delta));
            continue;
        }
        let mut word = vec![0usize; j];
        'words: loop {
            let mut matching: Vec<u32> = Vec::new();
            let mut coeff = DeltaPoly::one();
            for &t in &word {
                let (d, c) = terms[t];
                let shift = matching.len() as u32;
                matching.extend(d.matching().iter().map(|&x| x + shift));
                coeff = &coeff * c;
            }
            let counts = closure_counts_by_stacking(&matching);
            total = total + &coeff * &DeltaPoly::from_counts(&counts);
            let mut i = j;
            loop {
                if i == 0 {
                    break 'words;
                }
                i -= 1;
                word[i] += 1;
                if word[i] < terms.len() {
                    break;
                }
                word[i] = 0;
            }
        }
        out.push(TraceValue::new(total, &g.delta));
    }
    Ok(out)
}

/// Moments by both algorithms; an error if they disagree is impossible to
/// recover from, so disagreement is reported in the result.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub moments: Vec<TraceValue>,
    pub algorithms_agree: bool,
}

pub fn moments(g: &GrElement, n_max: usize) -> Result<MomentReport, TlError> {
    let a = moments_by_expansion(g, n_max)?;
    let b = moments_by_stacking(g, n_max)?;
    let algorithms_agree = a.iter().zip(&b).all(|(x, y)| x.poly == y.poly);
    Ok(MomentReport { moments: a, algorithms_agree })
}

/// Outcome of a Hankel positivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub positive_semidefinite: bool,
    /// Leading principal minors, exact when `δ` is rational.
    pub leading_minors: Vec<Scalar>,
    /// Smallest eigenvalue, computed in floating point.
    pub min_eigenvalue: f64,
    pub exact: bool,
}

/// Checks that `[m_{i+j}]_{0 ≤ i,j ≤ size}` is positive semidefinite for a
/// self-adjoint `g` at a fixed `δ`.
pub fn positivity_check(g: &GrElement, size: usize) -> Result<PositivityReport, TlError> {
    if size > 7 {
        return Err(TlError::HankelTooLarge(size));
    }
    if !g.is_self_adjoint() {
        return Err(TlError::NotSelfAdjoint);
    }
    let Delta::Value(delta) = &g.delta else {
        return Err(TlError::DeltaTooSmall);
    };
    let m = moments_by_expansion(g, 2 * size)?;
    let dim = size + 1;
    let floats: Vec<f64> = m.iter().map(|t| t.poly.eval(delta).to_f64()).collect();
    let hankel = nalgebra::DMatrix::from_fn(dim, dim, |i, j| floats[i + j]);
    let min_eigenvalue = hankel.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);

    if let Some(d) = delta.as_rational() {
        let entries: Vec<BigRational> = m.iter().map(|t| t.poly.eval_rational(d)).collect();
        let matrix: Vec<Vec<BigRational>> =
            (0..dim).map(|i| (0..dim).map(|j| entries[i + j].clone()).collect()).collect();
        let leading_minors = leading_minors(&matrix).into_iter().map(Scalar::from_rational).collect();
        Ok(PositivityReport { positive_semidefinite: exact_psd(matrix), leading_minors, min_eigenvalue, exact: true })
    } else {
        let scale = floats.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let eps = crate::scalar::numeric_config().tolerance.max(f64::EPSILON * dim as f64) * scale;
        let values: Vec<Scalar> = leading_minors_f64(&hankel).into_iter().map(Scalar::real_from_f64).collect();
        Ok(PositivityReport {
            positive_semidefinite: min_eigenvalue >= -eps,
            leading_minors: values,
            min_eigenvalue,
            exact: false,
        })
    }
}

fn leading_minors(matrix: &[Vec<BigRational>]) -> Vec<BigRational> {
    (1..=matrix.len())
        .map(|k| {
            let sub: Vec<Vec<BigRational>> = matrix[..k].iter().map(|r| r[..k].to_vec()).collect();
            determinant(sub)
        })
        .collect()
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

fn leading_minors_f64(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows()).map(|k| m.view((0, 0), (k, k)).into_owned().determinant()).collect()
}

/// Symmetric elimination without pivoting: a negative pivot, or a zero pivot
/// with a nonzero remainder in its row, rules out semidefiniteness.
fn exact_psd(mut a: Vec<Vec<BigRational>>) -> bool {
    let n = a.len();
    for k in 0..n {
        let p = a[k][k].clone();
        if p.is_negative() {
            return false;
        }
        if p.is_zero() {
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in (k + 1)..n {
            let f = &a[i][k] / &p;
            for j in k..n {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
        }
    }
    true
}

fn parse_coefficient(text: &str, line: usize) -> Result<DeltaPoly, TlError> {
    let bad = || TlError::Syntax { line, message: format!("bad coefficient `{text}`") };
    let (number, power) = match text.split_once('*') {
        Some((n, p)) => (n, Some(p)),
        None if text.trim_start_matches('-') == "d" || text.trim_start_matches('-').starts_with("d^") => {
            let negative = text.starts_with('-');
            (if negative { "-1" } else { "1" }, Some(text.trim_start_matches('-')))
        }
        None => (text, None),
    };
    let c: BigRational = match Scalar::parse(number).map_err(|_| bad())? {
        Scalar::Rational(r) => r,
        _ => return Err(bad()),
    };
    let k = match power {
        None => 0,
        Some("d") => 1,
        Some(p) => p.strip_prefix("d^").and_then(|e| e.parse().ok()).ok_or_else(bad)?,
    };
    Ok(DeltaPoly::monomial(c, k))
}

/// Reads a generator: one `term <coefficient> <matching>` per line, where the
/// coefficient is `p/q`, optionally times `d` or `d^k`, and the matching is a
/// comma-separated array or `unit`.
pub fn parse_generator(text: &str, delta: Delta) -> Result<GrElement, TlError> {
    let mut g = GrElement::zero(delta);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let ["term", coeff, matching] = fields.as_slice() else {
            return Err(TlError::Syntax { line, message: "expected `term <coefficient> <matching>`".into() });
        };
        let c = parse_coefficient(coeff, line)?;
        let d = if *matching == "unit" {
            TLDiagram::empty()
        } else {
            let m = matching
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| TlError::Syntax { line, message: format!("bad matching `{matching}`") })?;
            TLDiagram::new(m)?
        };
        g.add_term(d, c);
    }
    Ok(g)
}
