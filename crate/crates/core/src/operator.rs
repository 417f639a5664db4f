//! Dense complex matrices over the graded occupation basis.
//!
//! The row/column order is exactly [`TruncationSpec::enumerate_basis`], so
//! matrices built from the same spec compose without re-indexing, and the
//! serialized form is reproducible.

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::index::{BasisTable, TruncationSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Operator on the truncated Fock space, stored densely in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    spec: TruncationSpec,
    mat: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn zeros(spec: TruncationSpec) -> Self {
        let dim = spec.basis_size();
        Self { spec, mat: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(spec: TruncationSpec) -> Self {
        let dim = spec.basis_size();
        Self { spec, mat: DMatrix::identity(dim, dim) }
    }

    pub fn from_matrix(spec: TruncationSpec, mat: DMatrix<Complex64>) -> Self {
        let dim = spec.basis_size();
        assert_eq!(mat.nrows(), dim);
        assert_eq!(mat.ncols(), dim);
        Self { spec, mat }
    }

    /// Build column by column from the image of each basis vector.
    pub fn from_basis_action(
        spec: TruncationSpec,
        mut action: impl FnMut(&crate::index::MultiIndex) -> FockVector,
    ) -> Self {
        let table = BasisTable::new(spec);
        let dim = table.len();
        let mut mat = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let image = action(table.at(col));
            for (alpha, c) in image.iter() {
                if let Some(row) = table.index_of(alpha) {
                    mat[(row, col)] = *c;
                }
            }
        }
        Self { spec, mat }
    }

    /// Matrix of the creation operator a*_j (overflow components dropped).
    pub fn creation(spec: TruncationSpec, j: usize) -> Self {
        Self::from_basis_action(spec, |alpha| {
            FockVector::basis_vector(spec, alpha.clone())
                .expect("basis vector")
                .create(j)
                .expect("mode in range")
                .vector
        })
    }

    /// Matrix of the annihilation operator a_j.
    pub fn annihilation(spec: TruncationSpec, j: usize) -> Self {
        Self::from_basis_action(spec, |alpha| {
            FockVector::basis_vector(spec, alpha.clone())
                .expect("basis vector")
                .annihilate(j)
                .expect("mode in range")
        })
    }

    pub fn spec(&self) -> TruncationSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        Self { spec: self.spec, mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        Self { spec: self.spec, mat: &self.mat - &other.mat }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { spec: self.spec, mat: self.mat.map(|z| z * s) }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::ModeMismatch { expected: self.spec.modes, got: other.spec.modes });
        }
        Ok(Self { spec: self.spec, mat: &self.mat * &other.mat })
    }

    pub fn adjoint(&self) -> Self {
        Self { spec: self.spec, mat: self.mat.adjoint() }
    }

    /// Matrix exponential (scaling-and-squaring with Padé approximation).
    pub fn exp(&self) -> Self {
        Self { spec: self.spec, mat: self.mat.exp() }
    }

    /// Apply to a vector in the same truncation.
    pub fn apply(&self, f: &FockVector) -> FockVector {
        assert_eq!(self.spec, f.spec(), "spec mismatch");
        let table = BasisTable::new(self.spec);
        let mut out = vec![Complex64::default(); self.dim()];
        for (alpha, c) in f.iter() {
            let col = table.index_of(alpha).expect("vector within truncation");
            for row in 0..self.dim() {
                out[row] += self.mat[(row, col)] * c;
            }
        }
        FockVector::from_entries(
            self.spec,
            out.into_iter()
                .enumerate()
                .filter(|(_, c)| *c != Complex64::default())
                .map(|(i, c)| (table.at(i).clone(), c)),
        )
        .expect("indices within truncation")
    }

    /// Largest entry-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        (&self.mat - &other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise difference over rows and columns whose basis
    /// degree is at most `max_degree` (the block truncation cannot corrupt).
    pub fn block_diff(&self, other: &Self, max_degree: u32) -> f64 {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        let table = BasisTable::new(self.spec);
        let mut worst = 0.0f64;
        for row in 0..self.dim() {
            if table.at(row).degree() > max_degree {
                continue;
            }
            for col in 0..self.dim() {
                if table.at(col).degree() > max_degree {
                    continue;
                }
                worst = worst.max((self.mat[(row, col)] - other.mat[(row, col)]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut eig: Vec<f64> = self.mat.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eig
    }
}

/// JSON shape `{modes, max_degree, entries: [[re, im], …]}` with entries
/// row-major in the graded basis order.
#[derive(Serialize, Deserialize)]
struct OperatorMatrixRepr {
    modes: usize,
    max_degree: u32,
    entries: Vec<(f64, f64)>,
}

impl Serialize for OperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in 0..dim {
            for col in 0..dim {
                let z = self.mat[(row, col)];
                entries.push((z.re, z.im));
            }
        }
        OperatorMatrixRepr { modes: self.spec.modes, max_degree: self.spec.max_degree, entries }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorMatrixRepr::deserialize(deserializer)?;
        let spec = TruncationSpec::new(repr.modes, repr.max_degree);
        let dim = spec.basis_size();
        if repr.entries.len() != dim * dim {
            return Err(serde::de::Error::custom(format!(
                "expected {} entries, got {}",
                dim * dim,
                repr.entries.len()
            )));
        }
        let mat = DMatrix::from_row_iterator(
            dim,
            dim,
            repr.entries.into_iter().map(|(re, im)| Complex64::new(re, im)),
        );
        Ok(Self { spec, mat })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::MultiIndex;

    #[test]
    fn ladder_matrices_are_adjoint_pairs() {
        let spec = TruncationSpec::new(2, 5);
        for j in 0..2 {
            let up = OperatorMatrix::creation(spec, j);
            let down = OperatorMatrix::annihilation(spec, j);
            assert!(up.max_abs_diff(&down.adjoint()) < 1e-15);
        }
    }

    #[test]
    fn apply_matches_direct_ladder_action() {
        let spec = TruncationSpec::new(2, 4);
        let up = OperatorMatrix::creation(spec, 1);
        let f = FockVector::basis_vector(spec, MultiIndex::new(vec![1, 2])).unwrap();
        let via_matrix = up.apply(&f);
        let direct = f.create(1).unwrap().vector;
        assert!(via_matrix.max_coeff_diff(&direct) < 1e-15);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let spec = TruncationSpec::new(1, 3);
        assert!(OperatorMatrix::zeros(spec).exp().max_abs_diff(&OperatorMatrix::identity(spec)) < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let spec = TruncationSpec::new(1, 2);
        let up = OperatorMatrix::creation(spec, 0);
        let text = serde_json::to_string(&up).unwrap();
        let back: OperatorMatrix = serde_json::from_str(&text).unwrap();
        assert!(up.max_abs_diff(&back) == 0.0);
    }
}
