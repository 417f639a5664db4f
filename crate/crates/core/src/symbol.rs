//! Closed algebra of phase-space symbols: finite sums of complex
//! polynomials times plane waves, F(X) = Σ P(X) e^{i a·X} over X = (q, p).
//!
//! The class is stable under products, derivatives, Laplacian powers,
//! Gaussian smoothing and the symplectic bidifferential contractions, so
//! every series the star products need either terminates or has an exact
//! closed form inside the class.

use crate::error::{Error, Result};
use crate::fock::PhasePoint;
use crate::index::MultiIndex;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// A phase-space variable: position or momentum component of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Q(usize),
    P(usize),
}

impl Var {
    /// Flat variable slot: q_1..q_n occupy 0..n, p_1..p_n occupy n..2n.
    pub fn slot(self, modes: usize) -> usize {
        match self {
            Var::Q(j) => {
                assert!(j < modes, "q index out of range");
                j
            }
            Var::P(j) => {
                assert!(j < modes, "p index out of range");
                modes + j
            }
        }
    }

    pub fn all(modes: usize) -> impl Iterator<Item = Var> {
        (0..modes).map(Var::Q).chain((0..modes).map(Var::P))
    }
}

/// Plane-wave frequency vector with a deterministic total order.
#[derive(Clone, Debug, PartialEq)]
struct Freq(Vec<f64>);

impl Freq {
    fn new(v: Vec<f64>) -> Self {
        // normalize -0.0 so equal frequencies merge and serialize identically
        Self(
            v.into_iter()
                .map(|x| {
                    assert!(x.is_finite(), "frequency must be finite");
                    if x == 0.0 {
                        0.0
                    } else {
                        x
                    }
                })
                .collect(),
        )
    }

    fn zero(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == 0.0)
    }

    fn add(&self, other: &Self) -> Self {
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }
}

impl Eq for Freq {}

impl Ord for Freq {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Freq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over the 2n flat variables.
type Poly = BTreeMap<MultiIndex, Complex64>;

fn poly_insert(poly: &mut Poly, exps: MultiIndex, c: Complex64) {
    if c == Complex64::default() {
        return;
    }
    let slot = poly.entry(exps).or_default();
    *slot += c;
    if *slot == Complex64::default() {
        let dead: Vec<MultiIndex> = poly
            .iter()
            .filter(|(_, v)| **v == Complex64::default())
            .map(|(k, _)| k.clone())
            .collect();
        for k in dead {
            poly.remove(&k);
        }
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            poly_insert(&mut out, ea.add(eb), ca * cb);
        }
    }
    out
}

fn poly_eval(poly: &Poly, vars: &[f64]) -> Complex64 {
    let mut acc = Complex64::default();
    for (e, c) in poly {
        let mut m = *c;
        for (k, &exp) in e.entries().iter().enumerate() {
            for _ in 0..exp {
                m *= vars[k];
            }
        }
        acc += m;
    }
    acc
}

/// P(X + c) for a complex shift vector c, expanded binomially.
fn poly_shift(poly: &Poly, shift: &[Complex64]) -> Poly {
    let nvars = shift.len();
    let mut out = Poly::new();
    for (e, c) in poly {
        // expand Π_k (x_k + c_k)^{e_k} one variable at a time
        let mut partial: Vec<(Vec<u32>, Complex64)> = vec![(vec![0; nvars], *c)];
        for k in 0..nvars {
            let ek = e.entry(k);
            if ek == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(partial.len() * (ek as usize + 1));
            for (exps, coeff) in &partial {
                // binomial expansion of (x_k + c_k)^{ek}
                let mut binom = 1.0f64;
                for r in 0..=ek {
                    if r > 0 {
                        binom = binom * (ek - r + 1) as f64 / r as f64;
                    }
                    let mut shifted = exps.clone();
                    shifted[k] = ek - r;
                    let mut value = coeff * binom;
                    for _ in 0..r {
                        value *= shift[k];
                    }
                    next.push((shifted, value));
                }
            }
            partial = next;
        }
        for (exps, coeff) in partial {
            poly_insert(&mut out, MultiIndex::new(exps), coeff);
        }
    }
    out
}

/// Sum of polynomials times plane waves over phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSymbol {
    modes: usize,
    terms: BTreeMap<Freq, Poly>,
}

impl PhaseSymbol {
    pub fn zero(modes: usize) -> Self {
        Self { modes, terms: BTreeMap::new() }
    }

    pub fn constant(modes: usize, c: Complex64) -> Self {
        Self::monomial(modes, MultiIndex::zero(2 * modes), c)
    }

    pub fn one(modes: usize) -> Self {
        Self::constant(modes, Complex64::new(1.0, 0.0))
    }

    /// A single coordinate q_j or p_j.
    pub fn coordinate(modes: usize, var: Var) -> Self {
        Self::monomial(modes, MultiIndex::unit(2 * modes, var.slot(modes)), Complex64::new(1.0, 0.0))
    }

    /// c · Π x_k^{e_k} with exponents over the 2n flat variables.
    pub fn monomial(modes: usize, exps: MultiIndex, c: Complex64) -> Self {
        assert_eq!(exps.modes(), 2 * modes, "exponent tuple must cover q and p");
        let mut sym = Self::zero(modes);
        if c != Complex64::default() {
            let mut poly = Poly::new();
            poly.insert(exps, c);
            sym.terms.insert(Freq::zero(2 * modes), poly);
        }
        sym
    }

    /// c · e^{i a·X} for a frequency vector a of length 2n.
    pub fn plane_wave(modes: usize, freq: &[f64], c: Complex64) -> Self {
        assert_eq!(freq.len(), 2 * modes, "frequency must cover q and p");
        let mut sym = Self::zero(modes);
        if c != Complex64::default() {
            let mut poly = Poly::new();
            poly.insert(MultiIndex::zero(2 * modes), c);
            sym.terms.insert(Freq::new(freq.to_vec()), poly);
        }
        sym
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no plane-wave factor is present.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(Freq::is_zero)
    }

    /// Largest polynomial degree across terms (`None` for the zero symbol).
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .values()
            .flat_map(|p| p.keys().map(|e| e.degree()))
            .max()
    }

    /// Monomials of a purely polynomial symbol.
    pub fn polynomial_monomials(&self) -> Result<Vec<(MultiIndex, Complex64)>> {
        if !self.is_polynomial() {
            return Err(Error::PlaneWaveUnsupported);
        }
        Ok(self
            .terms
            .values()
            .flat_map(|p| p.iter().map(|(e, c)| (e.clone(), *c)))
            .collect())
    }

    /// Terms as (frequency, monomial list), for serialization and display.
    pub fn terms(&self) -> Vec<(Vec<f64>, Vec<(MultiIndex, Complex64)>)> {
        self.terms
            .iter()
            .map(|(f, p)| (f.0.clone(), p.iter().map(|(e, c)| (e.clone(), *c)).collect()))
            .collect()
    }

    fn check_modes(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch { expected: self.modes, got: other.modes });
        }
        Ok(())
    }

    fn insert_term(&mut self, freq: Freq, poly: Poly) {
        if poly.is_empty() {
            return;
        }
        match self.terms.entry(freq) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(poly);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                for (exps, c) in poly {
                    poly_insert(e.get_mut(), exps, c);
                }
                if e.get().is_empty() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut out = self.clone();
        for (f, p) in &other.terms {
            out.insert_term(f.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == Complex64::default() {
            return Self::zero(self.modes);
        }
        Self {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|(f, p)| (f.clone(), p.iter().map(|(e, c)| (e.clone(), c * s)).collect()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise product; plane-wave frequencies add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut out = Self::zero(self.modes);
        for (fa, pa) in &self.terms {
            for (fb, pb) in &other.terms {
                out.insert_term(fa.add(fb), poly_mul(pa, pb));
            }
        }
        Ok(out)
    }

    /// Exact partial derivative: ∂(P e^{i a·X}) = (∂P + i a_v P) e^{i a·X}.
    pub fn partial(&self, var: Var) -> Self {
        let slot = var.slot(self.modes);
        let mut out = Self::zero(self.modes);
        for (f, p) in &self.terms {
            let mut dp = Poly::new();
            for (e, c) in p {
                let ek = e.entry(slot);
                if ek > 0 {
                    poly_insert(&mut dp, e.lowered(slot).unwrap(), c * ek as f64);
                }
            }
            let av = f.0[slot];
            if av != 0.0 {
                for (e, c) in p {
                    poly_insert(&mut dp, e.clone(), c * Complex64::new(0.0, av));
                }
            }
            out.insert_term(f.clone(), dp);
        }
        out
    }

    /// Σ over all 2n variables of second partials.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.modes);
        for var in Var::all(self.modes) {
            out = out.add(&self.partial(var).partial(var)).expect("same modes");
        }
        out
    }

    /// Gaussian smoothing with variance `v` per coordinate:
    /// Σ_k (v/2)^k / k! Δ^k applied termwise. For a polynomial the series
    /// terminates; a plane-wave factor contributes the closed form
    /// e^{−v|a|²/2} together with an imaginary argument shift i·v·a.
    pub fn heat(&self, v: f64) -> Result<Self> {
        if v < 0.0 {
            return Err(Error::NegativeVariance(v));
        }
        if v == 0.0 {
            return Ok(self.clone());
        }
        let mut out = Self::zero(self.modes);
        for (f, p) in &self.terms {
            let smoothed = gaussian_smooth_poly(self.modes, p, v);
            if f.is_zero() {
                out.insert_term(f.clone(), smoothed);
            } else {
                let damping = (-v * f.norm_sq() / 2.0).exp();
                let shift: Vec<Complex64> =
                    f.0.iter().map(|a| Complex64::new(0.0, v * a)).collect();
                let shifted = poly_shift(&smoothed, &shift);
                let scaled: Poly =
                    shifted.into_iter().map(|(e, c)| (e, c * damping)).collect();
                out.insert_term(f.clone(), scaled);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &PhasePoint) -> Complex64 {
        assert_eq!(x.modes(), self.modes, "phase point dimension mismatch");
        let vars: Vec<f64> = x.q().iter().chain(x.p().iter()).copied().collect();
        let mut acc = Complex64::default();
        for (f, p) in &self.terms {
            let phase: f64 = f.0.iter().zip(&vars).map(|(a, v)| a * v).sum();
            acc += poly_eval(p, &vars) * Complex64::new(0.0, phase).exp();
        }
        acc
    }

    /// The symbol X ↦ F(M X) for a real 2n×2n matrix M.
    pub fn substitute_linear(&self, m: &DMatrix<f64>) -> Self {
        let nvars = 2 * self.modes;
        assert_eq!(m.nrows(), nvars);
        assert_eq!(m.ncols(), nvars);
        // each original variable x_k becomes the linear form Σ_l M[k][l] x_l
        let forms: Vec<Poly> = (0..nvars)
            .map(|k| {
                let mut poly = Poly::new();
                for l in 0..nvars {
                    if m[(k, l)] != 0.0 {
                        poly.insert(
                            MultiIndex::unit(nvars, l),
                            Complex64::new(m[(k, l)], 0.0),
                        );
                    }
                }
                poly
            })
            .collect();
        let mut out = Self::zero(self.modes);
        for (f, p) in &self.terms {
            // e^{i a·(MX)} = e^{i (Mᵀa)·X}
            let new_freq = Freq::new(
                (0..nvars)
                    .map(|l| (0..nvars).map(|k| f.0[k] * m[(k, l)]).sum())
                    .collect(),
            );
            let mut poly_out = Poly::new();
            for (e, c) in p {
                let mut acc = Poly::new();
                acc.insert(MultiIndex::zero(nvars), *c);
                for k in 0..nvars {
                    for _ in 0..e.entry(k) {
                        acc = poly_mul(&acc, &forms[k]);
                    }
                }
                for (exps, coeff) in acc {
                    poly_insert(&mut poly_out, exps, coeff);
                }
            }
            out.insert_term(new_freq, poly_out);
        }
        out
    }

    /// Largest coefficient magnitude across all terms.
    pub fn max_coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|p| p.values().map(|c| c.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest coefficient difference against `other` over the union of
    /// (frequency, monomial) keys.
    pub fn coeff_distance(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (f, p) in &self.terms {
            let q = other.terms.get(f);
            for (e, c) in p {
                let d = q.and_then(|q| q.get(e)).copied().unwrap_or_default();
                worst = worst.max((c - d).norm());
            }
        }
        for (f, q) in &other.terms {
            let p = self.terms.get(f);
            for (e, d) in q {
                if p.map_or(true, |p| !p.contains_key(e)) {
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }
}

/// Coefficient residual of `got` against `want`, scaled by the larger of 1
/// and the magnitude of `want`'s coefficients. "Coefficient-exact" claims
/// are asserted through this at working precision.
pub fn scaled_coeff_residual(got: &PhaseSymbol, want: &PhaseSymbol) -> f64 {
    got.coeff_distance(want) / want.max_coeff_norm().max(1.0)
}

fn gaussian_smooth_poly(modes: usize, p: &Poly, v: f64) -> Poly {
    // Σ_k (v/2)^k / k! Δ^k P, finite because Δ drops degree by two
    let mut acc = p.clone();
    let mut term = PhaseSymbol { modes, terms: BTreeMap::from([(Freq::zero(2 * modes), p.clone())]) };
    let mut k = 0u32;
    loop {
        term = term.laplacian();
        if term.is_zero() {
            break;
        }
        k += 1;
        term = term.scale(Complex64::new(v / 2.0 / k as f64, 0.0));
        let poly = term.terms.get(&Freq::zero(2 * modes)).expect("polynomial stays polynomial");
        for (e, c) in poly {
            poly_insert(&mut acc, e.clone(), *c);
        }
    }
    acc
}

/// σ(∇₁,∇₂)^k applied to F⊗G on doubled variables, restricted to the
/// diagonal. Expanding the commuting power multinomially,
/// Σ_{|μ|+|ν|=k} (−1)^{|ν|} k!/(μ!ν!) (∂_p^μ ∂_q^ν F)(∂_q^μ ∂_p^ν G).
pub fn symplectic_bidiff_power(f: &PhaseSymbol, g: &PhaseSymbol, k: u32) -> Result<PhaseSymbol> {
    if f.modes() != g.modes() {
        return Err(Error::ModeMismatch { expected: f.modes(), got: g.modes() });
    }
    let modes = f.modes();
    if k == 0 {
        return f.mul(g);
    }
    let mut out = PhaseSymbol::zero(modes);
    for pair in crate::index::compositions_of_degree(k, 2 * modes) {
        let (mu, nu) = (&pair.entries()[..modes], &pair.entries()[modes..]);
        let mut left = f.clone();
        let mut right = g.clone();
        for j in 0..modes {
            for _ in 0..mu[j] {
                left = left.partial(Var::P(j));
                right = right.partial(Var::Q(j));
            }
            for _ in 0..nu[j] {
                left = left.partial(Var::Q(j));
                right = right.partial(Var::P(j));
            }
        }
        if left.is_zero() || right.is_zero() {
            continue;
        }
        let nu_degree: u32 = nu.iter().sum();
        let sign = if nu_degree % 2 == 0 { 1.0 } else { -1.0 };
        let weight = sign * multinomial(k, pair.entries());
        out = out.add(&left.mul(&right)?.scale(Complex64::new(weight, 0.0)))?;
    }
    Ok(out)
}

/// Poisson bracket with the sign convention fixed by the Wick composition
/// series: {F, G} = i (C₁(F,G) − C₁(G,F)), which works out to
/// Σ_j (∂_{p_j}F ∂_{q_j}G − ∂_{q_j}F ∂_{p_j}G). In particular {q₁, p₁} = −1.
pub fn poisson_bracket(f: &PhaseSymbol, g: &PhaseSymbol) -> Result<PhaseSymbol> {
    symplectic_bidiff_power(f, g, 1)
}

fn multinomial(k: u32, parts: &[u32]) -> f64 {
    debug_assert_eq!(parts.iter().sum::<u32>(), k);
    let mut num = 1.0f64;
    let mut consumed = 0u32;
    for &part in parts {
        for r in 1..=part {
            consumed += 1;
            num = num * consumed as f64 / r as f64;
        }
    }
    num
}

/// Symmetric positive-semidefinite weight A_Q on phase space with
/// Q(X) = (A_Q X)·X and its trace.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
    trace: f64,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || (&matrix - matrix.transpose()).amax() > 1e-12 {
            return Err(Error::NotSymmetric);
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let scale = matrix.amax().max(1.0);
        if min_eig < -1e-12 * scale {
            return Err(Error::NotPositiveSemidefinite(min_eig));
        }
        let trace = matrix.trace();
        Ok(Self { matrix, trace })
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(entries)))
    }

    /// Rank-one form a aᵀ.
    pub fn rank_one(a: &[f64]) -> Self {
        let v = nalgebra::DVector::from_row_slice(a);
        let matrix = &v * v.transpose();
        let trace = matrix.trace();
        Self { matrix, trace }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Q(X) = (A_Q X)·X.
    pub fn apply(&self, x: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_row_slice(x);
        (&self.matrix * &v).dot(&v)
    }
}

/// Whether (a·U)² ≤ Q(U) for all U, i.e. A_Q − a aᵀ is positive
/// semidefinite. When true, the plane wave e^{i a·X} has Q-norm at most 1
/// (exactly 1 for a ≠ 0), which supplies test symbols of known norm.
pub fn q_seminorm_dominates(a: &[f64], q: &QuadraticForm) -> bool {
    assert_eq!(a.len(), q.dim(), "frequency dimension mismatch");
    let v = nalgebra::DVector::from_row_slice(a);
    let diff = q.matrix() - &v * v.transpose();
    let min_eig = diff
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let scale = q.matrix().amax().max(1.0);
    min_eig >= -1e-12 * scale
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    freq: Vec<f64>,
    poly: Vec<(Vec<u32>, f64, f64)>,
}

/// JSON shape `{modes, terms: [{freq, poly: [[exps, re, im], …]}, …]}`.
#[derive(Serialize, Deserialize)]
struct PhaseSymbolRepr {
    modes: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for PhaseSymbol {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PhaseSymbolRepr {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|(f, p)| TermRepr {
                    freq: f.0.clone(),
                    poly: p.iter().map(|(e, c)| (e.entries().to_vec(), c.re, c.im)).collect(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PhaseSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PhaseSymbolRepr::deserialize(deserializer)?;
        let mut out = PhaseSymbol::zero(repr.modes);
        for term in repr.terms {
            if term.freq.len() != 2 * repr.modes {
                return Err(serde::de::Error::custom("frequency length must be 2·modes"));
            }
            let mut poly = Poly::new();
            for (exps, re, im) in term.poly {
                if exps.len() != 2 * repr.modes {
                    return Err(serde::de::Error::custom("exponent length must be 2·modes"));
                }
                poly_insert(&mut poly, MultiIndex::new(exps), Complex64::new(re, im));
            }
            out.insert_term(Freq::new(term.freq), poly);
        }
        Ok(out)
    }
}
