//! Truncated symmetric Fock space: sparse vectors over the occupation
//! basis, ladder operators, the bilinear composition law, weighted
//! R-norms, coherent states and displacement operators.
//!
//! The composition law acts diagonally on basis vectors,
//! `compose(u_α, u_β) = sqrt((α+β)!/(α!β!)) u_{α+β}`, and everything else
//! here is built to make that identity and its corollaries checkable at
//! finite truncation with explicit loss accounting.

use crate::error::{Error, Result};
use crate::index::{merge_weight, MultiIndex, TruncationSpec};
use crate::operator::OperatorMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A point X = (q, p) of the 2n-dimensional phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Self {
        assert_eq!(q.len(), p.len(), "q and p must have the same length");
        Self { q, p }
    }

    pub fn zero(modes: usize) -> Self {
        Self { q: vec![0.0; modes], p: vec![0.0; modes] }
    }

    pub fn modes(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// |X|² = |q|² + |p|².
    pub fn norm_sq(&self) -> f64 {
        self.q.iter().map(|x| x * x).sum::<f64>() + self.p.iter().map(|x| x * x).sum::<f64>()
    }

    /// Real inner product X·Y = q·q' + p·p'.
    pub fn dot(&self, other: &Self) -> f64 {
        self.q.iter().zip(&other.q).map(|(a, b)| a * b).sum::<f64>()
            + self.p.iter().zip(&other.p).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Symplectic form σ((q,p),(q',p')) = p·q' − q·p'.
    pub fn symplectic(&self, other: &Self) -> f64 {
        self.p.iter().zip(&other.q).map(|(a, b)| a * b).sum::<f64>()
            - self.q.iter().zip(&other.p).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            q: self.q.iter().zip(&other.q).map(|(a, b)| a + b).collect(),
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            q: self.q.iter().zip(&other.q).map(|(a, b)| a - b).collect(),
            p: self.p.iter().zip(&other.p).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self { q: self.q.iter().map(|x| -x).collect(), p: self.p.iter().map(|x| -x).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { q: self.q.iter().map(|x| s * x).collect(), p: self.p.iter().map(|x| s * x).collect() }
    }

    /// Ladder amplitude per mode, (q_j + i p_j)/sqrt(2h).
    pub fn ladder_amplitude(&self, j: usize, h: f64) -> Complex64 {
        Complex64::new(self.q[j], self.p[j]) / (2.0 * h).sqrt()
    }
}

/// How degree overflow is handled by the composition law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreePolicy {
    /// Any component pushed past the degree cutoff is an error.
    Strict,
    /// Overflowing components are dropped and their squared mass reported.
    Truncate,
}

/// A vector together with the squared mass that truncation dropped.
#[derive(Clone, Debug)]
pub struct Truncated {
    pub vector: FockVector,
    pub dropped_mass: f64,
}

/// A coherent state truncated to finite degree, with its tail mass
/// 1 − ‖Ψ^N‖².
#[derive(Clone, Debug)]
pub struct CoherentState {
    pub vector: FockVector,
    pub tail: f64,
}

/// Sparse element of the truncated symmetric Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    spec: TruncationSpec,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl FockVector {
    pub fn zero(spec: TruncationSpec) -> Self {
        Self { spec, coeffs: BTreeMap::new() }
    }

    /// The vacuum: coefficient 1 at α = 0.
    pub fn vacuum(spec: TruncationSpec) -> Self {
        let mut v = Self::zero(spec);
        v.coeffs.insert(MultiIndex::zero(spec.modes), Complex64::new(1.0, 0.0));
        v
    }

    /// The basis vector u_α.
    pub fn basis_vector(spec: TruncationSpec, alpha: MultiIndex) -> Result<Self> {
        if alpha.modes() != spec.modes {
            return Err(Error::ModeMismatch { expected: spec.modes, got: alpha.modes() });
        }
        if alpha.degree() > spec.max_degree {
            return Err(Error::DegreeOverflow { degree: alpha.degree(), max_degree: spec.max_degree });
        }
        let mut v = Self::zero(spec);
        v.coeffs.insert(alpha, Complex64::new(1.0, 0.0));
        Ok(v)
    }

    pub fn from_entries(
        spec: TruncationSpec,
        entries: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut v = Self::zero(spec);
        for (alpha, c) in entries {
            if alpha.modes() != spec.modes {
                return Err(Error::ModeMismatch { expected: spec.modes, got: alpha.modes() });
            }
            if alpha.degree() > spec.max_degree {
                return Err(Error::DegreeOverflow {
                    degree: alpha.degree(),
                    max_degree: spec.max_degree,
                });
            }
            v.accumulate(alpha, c);
        }
        Ok(v)
    }

    pub fn spec(&self) -> TruncationSpec {
        self.spec
    }

    /// Coefficient of u_α (zero when absent).
    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    /// Non-zero coefficients in graded basis order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest occupied degree, or `None` for the zero vector.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|a| a.degree()).max()
    }

    fn accumulate(&mut self, alpha: MultiIndex, c: Complex64) {
        if c == Complex64::default() {
            return;
        }
        let slot = self.coeffs.entry(alpha).or_default();
        *slot += c;
        if *slot == Complex64::default() {
            let key = self
                .coeffs
                .iter()
                .find(|(_, v)| **v == Complex64::default())
                .map(|(k, _)| k.clone());
            if let Some(key) = key {
                self.coeffs.remove(&key);
            }
        }
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::ModeMismatch { expected: self.spec.modes, got: other.spec.modes });
        }
        Ok(())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == Complex64::default() {
            return Self::zero(self.spec);
        }
        Self {
            spec: self.spec,
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        let mut out = self.clone();
        for (a, c) in &other.coeffs {
            out.accumulate(a.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Scalar product, linear in `self` and conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_spec(other)?;
        let (small, large, conj_small) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::default();
        for (a, c) in &small.coeffs {
            let d = large.coeff(a);
            acc += if conj_small { d * c.conj() } else { c * d.conj() };
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Weighted norm sqrt(Σ_α |c_α|² R^{|α|}); equals the plain norm at R = 1.
    pub fn weighted_norm(&self, r: f64) -> Result<f64> {
        if r < 1.0 {
            return Err(Error::InvalidWeight(r));
        }
        let sum: f64 = self
            .coeffs
            .iter()
            .map(|(a, c)| c.norm_sqr() * r.powi(a.degree() as i32))
            .sum();
        Ok(sum.sqrt())
    }

    /// Largest coefficient difference against `other` over the union of
    /// supports.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (a, c) in &self.coeffs {
            worst = worst.max((c - other.coeff(a)).norm());
        }
        for (a, c) in &other.coeffs {
            if !self.coeffs.contains_key(a) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Re-interpret in a deeper truncation (same mode count, larger degree).
    pub fn embed(&self, spec: TruncationSpec) -> Result<Self> {
        if spec.modes != self.spec.modes {
            return Err(Error::ModeMismatch { expected: self.spec.modes, got: spec.modes });
        }
        if spec.max_degree < self.spec.max_degree {
            if let Some(d) = self.degree() {
                if d > spec.max_degree {
                    return Err(Error::DegreeOverflow { degree: d, max_degree: spec.max_degree });
                }
            }
        }
        Ok(Self { spec, coeffs: self.coeffs.clone() })
    }

    /// Creation operator on mode `j` (0-based): coefficient at α + e_j
    /// gains c_α sqrt(α_j + 1). Components pushed past the cutoff are
    /// dropped into `dropped_mass`.
    pub fn create(&self, j: usize) -> Result<Truncated> {
        if j >= self.spec.modes {
            return Err(Error::ModeOutOfRange { mode: j, modes: self.spec.modes });
        }
        let mut out = Self::zero(self.spec);
        let mut dropped = 0.0;
        for (a, c) in &self.coeffs {
            let factor = ((a.entry(j) + 1) as f64).sqrt();
            if a.degree() + 1 > self.spec.max_degree {
                dropped += (c * factor).norm_sqr();
            } else {
                out.accumulate(a.raised(j), c * factor);
            }
        }
        Ok(Truncated { vector: out, dropped_mass: dropped })
    }

    /// Annihilation operator on mode `j`: coefficient at α − e_j gains
    /// c_α sqrt(α_j). Never loses mass to truncation.
    pub fn annihilate(&self, j: usize) -> Result<Self> {
        if j >= self.spec.modes {
            return Err(Error::ModeOutOfRange { mode: j, modes: self.spec.modes });
        }
        let mut out = Self::zero(self.spec);
        for (a, c) in &self.coeffs {
            if let Some(lowered) = a.lowered(j) {
                out.accumulate(lowered, c * (a.entry(j) as f64).sqrt());
            }
        }
        Ok(out)
    }

    /// a(V) f = Σ_j V_j a_j f for a real direction V.
    pub fn annihilate_along(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.spec.modes {
            return Err(Error::ModeMismatch { expected: self.spec.modes, got: v.len() });
        }
        let mut out = Self::zero(self.spec);
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                out = out.add(&self.annihilate(j)?.scale(Complex64::new(vj, 0.0)))?;
            }
        }
        Ok(out)
    }

    /// The bilinear composition law: the coefficient of u_γ is
    /// Σ_{α+β=γ} c_α(f) c_β(g) sqrt(γ!/(α!β!)).
    ///
    /// `Strict` errors out as soon as a product component exceeds the
    /// cutoff; `Truncate` drops it and reports the dropped squared mass.
    pub fn compose(&self, other: &Self, policy: DegreePolicy) -> Result<Truncated> {
        self.check_spec(other)?;
        let mut kept = Self::zero(self.spec);
        let mut overflow: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let gamma = a.add(b);
                let degree = gamma.degree();
                let value = ca * cb * merge_weight(a, b);
                if degree > self.spec.max_degree {
                    if policy == DegreePolicy::Strict {
                        return Err(Error::DegreeOverflow {
                            degree,
                            max_degree: self.spec.max_degree,
                        });
                    }
                    *overflow.entry(gamma).or_default() += value;
                } else {
                    kept.accumulate(gamma, value);
                }
            }
        }
        let dropped_mass = overflow.values().map(|c| c.norm_sqr()).sum();
        Ok(Truncated { vector: kept, dropped_mass })
    }
}

/// Coherent state Ψ_{X,h} truncated at the spec cutoff. The coefficient
/// of u_α is e^{−|X|²/4h} (2h)^{−|α|/2} (α!)^{−1/2} Π_j (q_j + i p_j)^{α_j}.
pub fn coherent_state(x: &PhasePoint, h: f64, spec: TruncationSpec) -> Result<CoherentState> {
    if h <= 0.0 {
        return Err(Error::NonPositiveH(h));
    }
    if x.modes() != spec.modes {
        return Err(Error::ModeMismatch { expected: spec.modes, got: x.modes() });
    }
    let prefactor = (-x.norm_sq() / (4.0 * h)).exp();
    let amps: Vec<Complex64> = (0..spec.modes).map(|j| x.ladder_amplitude(j, h)).collect();
    let mut vector = FockVector::zero(spec);
    for alpha in spec.enumerate_basis() {
        let mut c = Complex64::new(prefactor, 0.0);
        for (j, amp) in amps.iter().enumerate() {
            for k in 0..alpha.entry(j) {
                c *= amp / ((k + 1) as f64).sqrt();
            }
        }
        if c != Complex64::default() {
            vector.coeffs.insert(alpha, c);
        }
    }
    let tail = (1.0 - vector.norm_sq()).max(0.0);
    Ok(CoherentState { vector, tail })
}

/// Closed-form coherent overlap e^{−|X−Y|²/4h + i σ(X,Y)/2h}.
pub fn coherent_overlap(x: &PhasePoint, y: &PhasePoint, h: f64) -> Complex64 {
    let d = x.sub(y).norm_sq();
    Complex64::new(-d / (4.0 * h), x.symplectic(y) / (2.0 * h)).exp()
}

/// Residual of the coherent composition identity
/// `compose(Ψ_X^N, Ψ_Y^N) = e^{X·Y/2h} Ψ_{X+Y}^N + V_N`:
/// returns ‖V_N‖, computed exactly in a doubled-degree space so nothing
/// is silently truncated. X·Y is the real inner product on phase space.
pub fn coherent_product_check(
    x: &PhasePoint,
    y: &PhasePoint,
    h: f64,
    spec: TruncationSpec,
) -> Result<f64> {
    let psi_x = coherent_state(x, h, spec)?.vector;
    let psi_y = coherent_state(y, h, spec)?.vector;
    let doubled = TruncationSpec::new(spec.modes, 2 * spec.max_degree);
    let product = psi_x
        .embed(doubled)?
        .compose(&psi_y.embed(doubled)?, DegreePolicy::Strict)?
        .vector;
    let factor = Complex64::new((x.dot(y) / (2.0 * h)).exp(), 0.0);
    let target = coherent_state(&x.add(y), h, spec)?.vector.embed(doubled)?.scale(factor);
    Ok(product.sub(&target)?.norm())
}

/// Displacement operator V_h(X) = e^{−(i/√h) Φ_S(X̂)} on the truncated
/// basis, with X̂ = (−p, q) and Φ_S the Segal field. Applied to the
/// vacuum it reproduces the coherent state at X up to truncation.
pub fn displacement(x: &PhasePoint, h: f64, spec: TruncationSpec) -> Result<OperatorMatrix> {
    if h <= 0.0 {
        return Err(Error::NonPositiveH(h));
    }
    if x.modes() != spec.modes {
        return Err(Error::ModeMismatch { expected: spec.modes, got: x.modes() });
    }
    let x_hat = PhasePoint::new(x.p().iter().map(|v| -v).collect(), x.q().to_vec());
    let phi = segal_field(&x_hat, spec);
    let generator = phi.scale(Complex64::new(0.0, -1.0 / h.sqrt()));
    Ok(generator.exp())
}

/// Segal field Φ_S(W) = (a*(w) + a(w))/√2 for W = (u, v), w = u + iv.
pub fn segal_field(w: &PhasePoint, spec: TruncationSpec) -> OperatorMatrix {
    let mut acc = OperatorMatrix::zeros(spec);
    for j in 0..spec.modes {
        let wj = Complex64::new(w.q()[j], w.p()[j]);
        if wj == Complex64::default() {
            continue;
        }
        acc = acc
            .add(&OperatorMatrix::creation(spec, j).scale(wj))
            .add(&OperatorMatrix::annihilation(spec, j).scale(wj.conj()));
    }
    acc.scale(Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0))
}

/// JSON shape `{modes, max_degree, entries: [[α, re, im], …]}` shared by
/// the golden-file tests.
#[derive(Serialize, Deserialize)]
struct FockVectorRepr {
    modes: usize,
    max_degree: u32,
    entries: Vec<(Vec<u32>, f64, f64)>,
}

impl Serialize for FockVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FockVectorRepr {
            modes: self.spec.modes,
            max_degree: self.spec.max_degree,
            entries: self
                .coeffs
                .iter()
                .map(|(a, c)| (a.entries().to_vec(), c.re, c.im))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = FockVectorRepr::deserialize(deserializer)?;
        let spec = TruncationSpec::new(repr.modes, repr.max_degree);
        FockVector::from_entries(
            spec,
            repr.entries
                .into_iter()
                .map(|(a, re, im)| (MultiIndex::new(a), Complex64::new(re, im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn random_vector(spec: TruncationSpec, rng: &mut ChaCha12Rng) -> FockVector {
        let basis = spec.enumerate_basis();
        let mut v = FockVector::zero(spec);
        for _ in 0..8 {
            let alpha = basis[rng.gen_range(0..basis.len())].clone();
            v.accumulate(alpha, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        v
    }

    fn random_point(modes: usize, radius: f64, rng: &mut ChaCha12Rng) -> PhasePoint {
        PhasePoint::new(
            (0..modes).map(|_| rng.gen_range(-radius..radius)).collect(),
            (0..modes).map(|_| rng.gen_range(-radius..radius)).collect(),
        )
    }

    #[test]
    fn vacuum_and_weighted_norm() {
        let spec = TruncationSpec::new(2, 3);
        let vac = FockVector::vacuum(spec);
        assert_eq!(vac.coeff(&mi(&[0, 0])), c(1.0, 0.0));
        assert_eq!(vac.norm(), 1.0);
        assert_eq!(vac.weighted_norm(5.0).unwrap(), 1.0);
        assert!(FockVector::vacuum(spec).weighted_norm(0.5).is_err());
    }

    #[test]
    fn weighted_norm_examples() {
        let spec = TruncationSpec::new(2, 3);
        let u = FockVector::basis_vector(spec, mi(&[1, 2])).unwrap();
        assert!((u.weighted_norm(3.0).unwrap() - 27.0_f64.sqrt()).abs() < 1e-14);
        let f = FockVector::basis_vector(spec, mi(&[1, 0]))
            .unwrap()
            .add(&FockVector::basis_vector(spec, mi(&[0, 2])).unwrap())
            .unwrap();
        assert!((f.weighted_norm(4.0).unwrap() - 20.0_f64.sqrt()).abs() < 1e-14);
        assert!((f.weighted_norm(1.0).unwrap() - f.norm()).abs() < 1e-15);
    }

    #[test]
    fn ladder_examples() {
        let spec = TruncationSpec::new(2, 4);
        let vac = FockVector::vacuum(spec);
        let up = vac.create(0).unwrap();
        assert_eq!(up.dropped_mass, 0.0);
        assert_eq!(up.vector.coeff(&mi(&[1, 0])), c(1.0, 0.0));

        let u10 = FockVector::basis_vector(spec, mi(&[1, 0])).unwrap();
        let up2 = u10.create(0).unwrap().vector;
        assert!((up2.coeff(&mi(&[2, 0])) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);

        assert_eq!(vac.annihilate(0).unwrap().norm(), 0.0);
        let u20 = FockVector::basis_vector(spec, mi(&[2, 0])).unwrap();
        let down = u20.annihilate(0).unwrap();
        assert!((down.coeff(&mi(&[1, 0])) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);

        assert!(vac.create(2).is_err());
        assert!(vac.annihilate(5).is_err());
    }

    #[test]
    fn create_reports_truncation_loss() {
        let spec = TruncationSpec::new(1, 2);
        let top = FockVector::basis_vector(spec, mi(&[2])).unwrap().scale(c(0.5, 0.0));
        let up = top.create(0).unwrap();
        assert_eq!(up.vector.norm(), 0.0);
        // dropped coefficient 0.5·sqrt(3)
        assert!((up.dropped_mass - 0.75).abs() < 1e-15);
    }

    #[test]
    fn adjointness_of_ladder_pair() {
        let spec = TruncationSpec::new(3, 5);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = random_vector(spec, &mut rng);
            let g = random_vector(spec, &mut rng);
            for j in 0..3 {
                let lhs = f.create(j).unwrap().vector.inner(&g).unwrap();
                let rhs = f.inner(&g.annihilate(j).unwrap()).unwrap();
                // adjointness can only be probed below the cutoff where
                // creation loses nothing
                let f_low: FockVector = FockVector::from_entries(
                    spec,
                    f.iter()
                        .filter(|(a, _)| a.degree() < spec.max_degree)
                        .map(|(a, c)| (a.clone(), *c)),
                )
                .unwrap();
                let lhs_low = f_low.create(j).unwrap().vector.inner(&g).unwrap();
                let rhs_low = f_low.inner(&g.annihilate(j).unwrap()).unwrap();
                assert!((lhs_low - rhs_low).norm() < 1e-12);
                let _ = (lhs, rhs);
            }
        }
    }

    #[test]
    fn commutation_relation() {
        // a_j a*_k − a*_k a_j = δ_{jk} on vectors of degree ≤ N−1
        let spec = TruncationSpec::new(2, 6);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let low_spec = TruncationSpec::new(2, 5);
        for _ in 0..10 {
            let f = random_vector(low_spec, &mut rng).embed(spec).unwrap();
            for j in 0..2 {
                for k in 0..2 {
                    let ac = f.create(k).unwrap().vector.annihilate(j).unwrap();
                    let ca = f.annihilate(j).unwrap().create(k).unwrap().vector;
                    let comm = ac.sub(&ca).unwrap();
                    let expected =
                        if j == k { f.clone() } else { FockVector::zero(spec) };
                    assert!(comm.max_coeff_diff(&expected) < 1e-12, "j={j} k={k}");
                }
            }
        }
    }

    #[test]
    fn number_operator_diagonal() {
        // a_j ∘ a*_j multiplies u_α by α_j + 1 below the cutoff
        let spec = TruncationSpec::new(2, 5);
        for alpha in TruncationSpec::new(2, 4).enumerate_basis() {
            let u = FockVector::basis_vector(spec, alpha.clone()).unwrap();
            let n = u.create(0).unwrap().vector.annihilate(0).unwrap();
            assert!(
                (n.coeff(&alpha) - c((alpha.entry(0) + 1) as f64, 0.0)).norm() < 1e-12
            );
        }
    }

    #[test]
    fn inner_product_basics() {
        let spec = TruncationSpec::new(2, 4);
        let basis = spec.enumerate_basis();
        for a in basis.iter().take(6) {
            for b in basis.iter().take(6) {
                let ua = FockVector::basis_vector(spec, a.clone()).unwrap();
                let ub = FockVector::basis_vector(spec, b.clone()).unwrap();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_eq!(ua.inner(&ub).unwrap(), c(expected, 0.0));
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let f = random_vector(spec, &mut rng);
        let ff = f.inner(&f).unwrap();
        assert!(ff.im.abs() < 1e-15 && ff.re >= 0.0);
        assert!(f.inner(&FockVector::vacuum(TruncationSpec::new(1, 4))).is_err());
    }

    #[test]
    fn compose_basis_examples() {
        let spec = TruncationSpec::new(2, 4);
        let u10 = FockVector::basis_vector(spec, mi(&[1, 0])).unwrap();
        let out = u10.compose(&u10, DegreePolicy::Strict).unwrap().vector;
        assert!((out.coeff(&mi(&[2, 0])) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(out.support_len(), 1);

        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let f = random_vector(spec, &mut rng);
        let with_vac = f.compose(&FockVector::vacuum(spec), DegreePolicy::Strict).unwrap();
        assert!(with_vac.vector.max_coeff_diff(&f) < 1e-15);
        assert_eq!(with_vac.dropped_mass, 0.0);
    }

    #[test]
    fn compose_commutative_and_associative() {
        let spec = TruncationSpec::new(2, 12);
        let small = TruncationSpec::new(2, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..10 {
            let f = random_vector(small, &mut rng).embed(spec).unwrap();
            let g = random_vector(small, &mut rng).embed(spec).unwrap();
            let h = random_vector(small, &mut rng).embed(spec).unwrap();
            let fg = f.compose(&g, DegreePolicy::Strict).unwrap().vector;
            let gf = g.compose(&f, DegreePolicy::Strict).unwrap().vector;
            assert!(fg.max_coeff_diff(&gf) < 1e-13);
            let fg_h = fg.compose(&h, DegreePolicy::Strict).unwrap().vector;
            let gh = g.compose(&h, DegreePolicy::Strict).unwrap().vector;
            let f_gh = f.compose(&gh, DegreePolicy::Strict).unwrap().vector;
            assert!(fg_h.max_coeff_diff(&f_gh) < 1e-12);
        }
    }

    #[test]
    fn compose_overflow_policies() {
        let spec = TruncationSpec::new(1, 2);
        let u2 = FockVector::basis_vector(spec, mi(&[2])).unwrap();
        let u1 = FockVector::basis_vector(spec, mi(&[1])).unwrap();
        assert!(matches!(
            u2.compose(&u1, DegreePolicy::Strict),
            Err(Error::DegreeOverflow { .. })
        ));
        let t = u2.compose(&u1, DegreePolicy::Truncate).unwrap();
        assert_eq!(t.vector.norm(), 0.0);
        // dropped coefficient is merge_weight((2),(1)) = sqrt(3)
        assert!((t.dropped_mass - 3.0).abs() < 1e-14);
    }

    #[test]
    fn norm_bound_spot_check() {
        let spec = TruncationSpec::new(2, 6);
        let doubled = TruncationSpec::new(2, 12);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for (r, rp) in [(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0)] {
            let r2 = 1.0 / (1.0 / r + 1.0 / rp);
            for _ in 0..50 {
                let f = random_vector(spec, &mut rng).embed(doubled).unwrap();
                let g = random_vector(spec, &mut rng).embed(doubled).unwrap();
                let prod = f.compose(&g, DegreePolicy::Strict).unwrap().vector;
                let lhs = prod.weighted_norm(r2).unwrap();
                let rhs = f.weighted_norm(r).unwrap() * g.weighted_norm(rp).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12, "{lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn coherent_state_at_origin_is_vacuum() {
        let spec = TruncationSpec::new(2, 6);
        let cs = coherent_state(&PhasePoint::zero(2), 1.0, spec).unwrap();
        assert!(cs.vector.max_coeff_diff(&FockVector::vacuum(spec)) < 1e-15);
        assert_eq!(cs.tail, 0.0);
    }

    #[test]
    fn coherent_state_norm_and_overlap() {
        let spec = TruncationSpec::new(2, 16);
        let h = 1.0;
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        for _ in 0..10 {
            let x = random_point(2, 0.6, &mut rng);
            let y = random_point(2, 0.6, &mut rng);
            let cx = coherent_state(&x, h, spec).unwrap();
            let cy = coherent_state(&y, h, spec).unwrap();
            assert!((cx.vector.norm_sq() + cx.tail - 1.0).abs() < 1e-13);
            assert!(cx.tail < 1e-10);
            let numeric = cx.vector.inner(&cy.vector).unwrap();
            let closed = coherent_overlap(&x, &y, h);
            let tol = (cx.tail.sqrt() + cy.tail.sqrt()) + 1e-12;
            assert!((numeric - closed).norm() <= tol, "{numeric} vs {closed}");
            assert_eq!(x.symplectic(&x), 0.0);
        }
    }

    #[test]
    fn coherent_overlap_self_is_one() {
        let x = PhasePoint::new(vec![0.3, -0.2], vec![0.1, 0.4]);
        assert_eq!(coherent_overlap(&x, &x, 0.7), c(1.0, 0.0));
        assert!(coherent_state(&x, 0.0, TruncationSpec::new(2, 4)).is_err());
    }

    #[test]
    fn coherent_product_identity_cases() {
        let spec = TruncationSpec::new(2, 12);
        let y = PhasePoint::new(vec![0.3, 0.1], vec![-0.2, 0.25]);
        // X = 0 reduces to compose(vacuum, Ψ_Y) = Ψ_Y: exactly zero
        let r0 = coherent_product_check(&PhasePoint::zero(2), &y, 1.0, spec).unwrap();
        assert_eq!(r0, 0.0);
        // generic small points: residual at the truncation-tail scale
        let x = PhasePoint::new(vec![0.2, -0.1], vec![0.15, 0.05]);
        let r = coherent_product_check(&x, &y, 1.0, spec).unwrap();
        assert!(r < 2e-9, "residual {r}");
    }

    #[test]
    fn coherent_product_opposite_points() {
        // Y = −X: the kept part collapses onto e^{−|X|²/2h} Ψ_0
        let spec = TruncationSpec::new(2, 10);
        let h = 1.0;
        let x = PhasePoint::new(vec![0.4, -0.3], vec![0.2, 0.1]);
        let psi_x = coherent_state(&x, h, spec).unwrap().vector;
        let psi_mx = coherent_state(&x.neg(), h, spec).unwrap().vector;
        let doubled = TruncationSpec::new(2, 20);
        let prod = psi_x
            .embed(doubled)
            .unwrap()
            .compose(&psi_mx.embed(doubled).unwrap(), DegreePolicy::Strict)
            .unwrap()
            .vector;
        let factor = (-x.norm_sq() / (2.0 * h)).exp();
        // the low-degree part is the scaled truncated coherent state at 0,
        // i.e. the scaled vacuum
        let low: FockVector = FockVector::from_entries(
            doubled,
            prod.iter()
                .filter(|(a, _)| a.degree() <= spec.max_degree)
                .map(|(a, c)| (a.clone(), *c)),
        )
        .unwrap();
        let expected = FockVector::vacuum(doubled).scale(c(factor, 0.0));
        assert!(low.max_coeff_diff(&expected) < 1e-14);
        let residual = coherent_product_check(&x, &x.neg(), h, spec).unwrap();
        assert!(residual < 1e-7, "residual {residual}");
    }

    #[test]
    fn coherent_product_residual_decays_with_degree() {
        let h = 1.0;
        let x = PhasePoint::new(vec![0.3, 0.2], vec![-0.25, 0.1]);
        let y = PhasePoint::new(vec![-0.15, 0.3], vec![0.2, -0.1]);
        let mut previous = f64::INFINITY;
        for n in [4u32, 8, 12, 16] {
            let spec = TruncationSpec::new(2, n);
            let r = coherent_product_check(&x, &y, h, spec).unwrap();
            assert!(r <= previous + 1e-14, "residual grew at N={n}: {r} > {previous}");
            previous = r;
        }
        assert!(previous <= 1e-9, "N=16 residual {previous}");
    }

    #[test]
    fn displacement_identity_and_coherent() {
        let spec = TruncationSpec::new(2, 14);
        let h = 1.0;
        let d0 = displacement(&PhasePoint::zero(2), h, spec).unwrap();
        assert!(d0.max_abs_diff(&OperatorMatrix::identity(spec)) < 1e-12);

        let x = PhasePoint::new(vec![0.3, -0.2], vec![0.1, 0.2]);
        let dx = displacement(&x, h, spec).unwrap();
        let moved = dx.apply(&FockVector::vacuum(spec));
        let cs = coherent_state(&x, h, spec).unwrap();
        assert!(
            moved.sub(&cs.vector).unwrap().norm() <= 10.0 * cs.tail.sqrt() + 1e-11,
            "displaced vacuum differs from coherent state"
        );
    }

    #[test]
    fn displacement_composition_phase() {
        let spec = TruncationSpec::new(1, 18);
        let h = 1.0;
        let u = PhasePoint::new(vec![0.3], vec![-0.1]);
        let v = PhasePoint::new(vec![-0.2], vec![0.25]);
        let du = displacement(&u, h, spec).unwrap();
        let dv = displacement(&v, h, spec).unwrap();
        let duv = displacement(&u.add(&v), h, spec).unwrap();
        let phase = Complex64::new(0.0, u.symplectic(&v) / (2.0 * h)).exp();
        let lhs = du.mul(&dv).unwrap();
        let rhs = duv.scale(phase);
        // compare on low-degree test vectors where truncation cannot bite
        for alpha in TruncationSpec::new(1, 2).enumerate_basis() {
            let test = FockVector::basis_vector(spec, alpha).unwrap();
            let a = lhs.apply(&test);
            let b = rhs.apply(&test);
            assert!(a.sub(&b).unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn fock_vector_json_round_trip() {
        let spec = TruncationSpec::new(2, 3);
        let f = FockVector::from_entries(
            spec,
            [
                (mi(&[1, 0]), c(0.5, -1.5)),
                (mi(&[0, 2]), c(2f64.sqrt(), 0.25)),
            ],
        )
        .unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.starts_with("{\"modes\":2,\"max_degree\":3,\"entries\":[[[1,0],"));
        let back: FockVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }
}
