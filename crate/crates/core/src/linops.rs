// Copyright 2026 The stokes-g2 Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used by the master-equation code.
//!
//! Everything here works on `nalgebra` dynamic matrices of `Complex64`. The
//! sizes of interest are small (superoperators of at most 256×256), so all
//! factorizations are dense and computed eagerly.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Default relative tolerance used for numerical kernels.
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// Eigenvector matrices with a condition number above this value are not
/// trusted for spectral propagation.
pub const MAX_EIGVEC_CONDITION: f64 = 1e12;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 0;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from row-major entries, rejecting non-finite values.
pub fn matrix_from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
    }
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            found: entries.len(),
        });
    }
    ensure_finite(entries.iter())?;
    Ok(DMatrix::from_row_slice(rows, cols, entries))
}

/// Builds a vector, rejecting non-finite values.
pub fn vector_from_slice(entries: &[Complex64]) -> Result<ComplexVector> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("vector dimension must be positive".into()));
    }
    ensure_finite(entries.iter())?;
    Ok(DVector::from_column_slice(entries))
}

fn ensure_finite<'a>(mut it: impl Iterator<Item = &'a Complex64>) -> Result<()> {
    if it.any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Err(Error::NonFinite)
    } else {
        Ok(())
    }
}

/// Kronecker product. Entry `(i*b.rows + k, j*b.cols + l)` is `a[i,j]*b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization: element `(i, j)` lands at `i + j*rows`.
pub fn vectorize(m: &ComplexMatrix) -> ComplexVector {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a square `dim × dim` matrix.
pub fn unvectorize(v: &ComplexVector, dim: usize) -> Result<ComplexMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(DMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc: f64, s| acc.max(*s))
}

/// Unit-norm vector spanning the numerical kernel of a square matrix.
///
/// Singular values below `tol * sigma_max` count as zero; exactly one of them
/// is required.
pub fn null_vector(m: &ComplexMatrix, tol: f64) -> Result<ComplexVector> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0_f64, |acc, s| acc.max(*s));
    let threshold = tol * smax;
    let small: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= threshold).collect();
    match small.len() {
        0 => Err(Error::NoNullVector),
        1 => {
            let v_t = svd.v_t.as_ref().expect("svd computed with v");
            let row = small[0];
            let mut v = DVector::from_iterator(m.ncols(), v_t.row(row).iter().map(|z| z.conj()));
            let n = v.norm();
            v /= c64(n, 0.0);
            Ok(v)
        }
        k => Err(Error::NullSpaceDegenerate { dimension: k }),
    }
}

/// Eigenvalues and right eigenvectors (unit-norm columns) of a square matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: ComplexVector,
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition through a complex Schur form followed by triangular
/// back-substitution.
pub fn eigen_decompose(m: &ComplexMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(Error::NoConvergence("complex Schur decomposition"))?;
    let (q, t) = schur.unpack();
    let values = DVector::from_iterator(n, (0..n).map(|i| t[(i, i)]));

    let scale = t.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())).max(f64::MIN_POSITIVE);
    let floor = scale * f64::EPSILON;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = c64(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = c64(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < floor {
                denom = c64(floor, 0.0);
            }
            y[(i, k)] = -acc / denom;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= c64(nrm, 0.0);
        }
    }
    Ok(Eigen { values, vectors })
}

/// Ratio of the extreme singular values.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, s| a.max(*s));
    let smin = sv.iter().fold(f64::INFINITY, |a, s| a.min(*s));
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Index sets of the connected components of the sparsity graph of `m`.
fn blocks(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != c64(0.0, 0.0) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[derive(Clone, Debug)]
enum Route {
    Spectral {
        values: ComplexVector,
        vectors: ComplexMatrix,
        inverse: ComplexMatrix,
    },
    Dense {
        generator: ComplexMatrix,
    },
}

/// Repeated action of `exp(L t)` for a fixed generator `L`.
///
/// The generator is diagonalized once; each subsequent `t` costs a diagonal
/// scaling. When the eigenvector matrix is too ill-conditioned the propagator
/// falls back to scaling-and-squaring matrix exponentials.
#[derive(Clone, Debug)]
pub struct ExpPropagator {
    dim: usize,
    route: Route,
}

impl ExpPropagator {
    pub fn new(generator: &ComplexMatrix) -> Result<Self> {
        if !generator.is_square() {
            return Err(Error::NotSquare {
                rows: generator.nrows(),
                cols: generator.ncols(),
            });
        }
        ensure_finite(generator.iter())?;
        let dim = generator.nrows();
        let route = Self::blockwise(generator).unwrap_or_else(|| Route::Dense {
            generator: generator.clone(),
        });
        Ok(Self { dim, route })
    }

    /// Diagonalizes each decoupled block separately, with its mean diagonal
    /// removed first. Large uniform frequencies within a block (vibrational
    /// energies) then never enter the eigensolver.
    fn blockwise(generator: &ComplexMatrix) -> Option<Route> {
        let n = generator.nrows();
        let mut values = ComplexVector::zeros(n);
        let mut vectors = ComplexMatrix::zeros(n, n);
        let mut inverse = ComplexMatrix::zeros(n, n);
        for idx in blocks(generator) {
            let k = idx.len();
            let mut sub = generator.select_rows(&idx).select_columns(&idx);
            let shift = sub.trace() / c64(k as f64, 0.0);
            for i in 0..k {
                sub[(i, i)] -= shift;
            }
            let eig = eigen_decompose(&sub).ok()?;
            if condition_number(&eig.vectors) > MAX_EIGVEC_CONDITION {
                return None;
            }
            let inv = eig.vectors.clone().try_inverse()?;
            for a in 0..k {
                values[idx[a]] = eig.values[a] + shift;
                for r in 0..k {
                    vectors[(idx[r], idx[a])] = eig.vectors[(r, a)];
                    inverse[(idx[a], idx[r])] = inv[(a, r)];
                }
            }
        }
        Some(Route::Spectral {
            values,
            vectors,
            inverse,
        })
    }

    /// Builds a propagator that always uses scaling-and-squaring.
    pub fn dense(generator: &ComplexMatrix) -> Result<Self> {
        if !generator.is_square() {
            return Err(Error::NotSquare {
                rows: generator.nrows(),
                cols: generator.ncols(),
            });
        }
        Ok(Self {
            dim: generator.nrows(),
            route: Route::Dense {
                generator: generator.clone(),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.route, Route::Spectral { .. })
    }

    /// Eigenvalues of the generator, when the spectral route is in use.
    pub fn eigenvalues(&self) -> Option<&ComplexVector> {
        match &self.route {
            Route::Spectral { values, .. } => Some(values),
            Route::Dense { .. } => None,
        }
    }

    fn check_dim(&self, v: &ComplexVector) -> Result<()> {
        if v.len() != self.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `exp(L t) v0`.
    pub fn apply(&self, v0: &ComplexVector, t: f64) -> Result<ComplexVector> {
        self.check_dim(v0)?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!("propagation time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(v0.clone());
        }
        Ok(match &self.route {
            Route::Spectral {
                values,
                vectors,
                inverse,
            } => {
                let mut c = inverse * v0;
                for (ci, li) in c.iter_mut().zip(values.iter()) {
                    *ci *= (li * t).exp();
                }
                vectors * c
            }
            Route::Dense { generator } => (generator * c64(t, 0.0)).exp() * v0,
        })
    }

    /// Evaluates the linear functional `f(x) = sum_i row[i] * x[i]` on
    /// `exp(L t) v0` for every `t` in `times`.
    pub fn functional_series(&self, row: &ComplexVector, v0: &ComplexVector, times: &[f64]) -> Result<Vec<Complex64>> {
        self.check_dim(v0)?;
        self.check_dim(row)?;
        validate_times(times)?;
        match &self.route {
            Route::Spectral {
                values,
                vectors,
                inverse,
            } => {
                let coeff = inverse * v0;
                let weights = vectors.transpose() * row;
                let amps: Vec<Complex64> = coeff.iter().zip(weights.iter()).map(|(c, w)| c * w).collect();
                Ok(times
                    .iter()
                    .map(|&t| {
                        amps.iter()
                            .zip(values.iter())
                            .map(|(a, l)| if t == 0.0 { *a } else { a * (l * t).exp() })
                            .sum()
                    })
                    .collect())
            }
            Route::Dense { .. } => {
                let states = self.apply_series(v0, times)?;
                Ok(states.iter().map(|x| row.iter().zip(x.iter()).map(|(r, x)| r * x).sum()).collect())
            }
        }
    }

    /// `exp(L t) v0` for every `t` in an ascending grid.
    pub fn apply_series(&self, v0: &ComplexVector, times: &[f64]) -> Result<Vec<ComplexVector>> {
        self.check_dim(v0)?;
        validate_times(times)?;
        match &self.route {
            Route::Spectral { .. } => times.iter().map(|&t| self.apply(v0, t)).collect(),
            Route::Dense { generator } => {
                let mut out = Vec::with_capacity(times.len());
                let mut state = v0.clone();
                let mut t_prev = 0.0;
                let mut cached: Option<(f64, ComplexMatrix)> = None;
                for &t in times {
                    let dt = t - t_prev;
                    if dt > 0.0 {
                        let step = match &cached {
                            Some((h, m)) if ((h - dt) / dt).abs() < 1e-12 => m,
                            _ => {
                                cached = Some((dt, (generator * c64(dt, 0.0)).exp()));
                                &cached.as_ref().unwrap().1
                            }
                        };
                        state = step * state;
                    }
                    t_prev = t;
                    out.push(state.clone());
                }
                Ok(out)
            }
        }
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in times {
        if !t.is_finite() || t < prev {
            return Err(Error::InvalidInput(
                "time grid must be finite, non-negative and ascending".into(),
            ));
        }
        prev = t;
    }
    Ok(())
}

/// One-shot `exp(l t) v0`.
pub fn propagate(l: &ComplexMatrix, v0: &ComplexVector, t: f64) -> Result<ComplexVector> {
    if l.ncols() != v0.len() {
        return Err(Error::DimensionMismatch {
            expected: l.ncols(),
            found: v0.len(),
        });
    }
    ExpPropagator::new(l)?.apply(v0, t)
}

/// Conjugate transpose.
#[inline]
pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(entries: &[f64]) -> ComplexMatrix {
        DMatrix::from_diagonal(&DVector::from_iterator(entries.len(), entries.iter().map(|&x| c64(x, 0.0))))
    }

    #[test]
    fn kron_identities_and_raising() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4, 4));

        let raise = matrix_from_rows(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]).unwrap();
        let k = kron(&raise, &i2);
        for r in 0..4 {
            for c in 0..4 {
                let expected = if (r, c) == (0, 2) || (r, c) == (1, 3) { 1.0 } else { 0.0 };
                assert_eq!(k[(r, c)], c64(expected, 0.0));
            }
        }
    }

    #[test]
    fn constructor_rejects_nan_and_bad_length() {
        assert!(matches!(
            matrix_from_rows(1, 2, &[c64(f64::NAN, 0.0), c64(0., 0.)]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(
            matrix_from_rows(2, 2, &[c64(1., 0.)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn null_vector_cases() {
        let v = null_vector(&diag(&[0.0, 1.0]), DEFAULT_NULL_TOL).unwrap();
        assert!((v[0].norm() - 1.0).abs() < 1e-14);
        assert!(v[1].norm() < 1e-14);

        assert!(matches!(
            null_vector(&diag(&[1.0, 2.0]), DEFAULT_NULL_TOL),
            Err(Error::NoNullVector)
        ));
        assert!(matches!(
            null_vector(&ComplexMatrix::zeros(2, 2), DEFAULT_NULL_TOL),
            Err(Error::NullSpaceDegenerate { dimension: 2 })
        ));
        assert!(matches!(
            null_vector(&ComplexMatrix::zeros(2, 3), DEFAULT_NULL_TOL),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn propagate_diagonal_and_zero_time() {
        let l = diag(&[-1.0, -2.0]);
        let v0 = vector_from_slice(&[c64(1., 0.), c64(1., 0.)]).unwrap();
        assert_eq!(propagate(&l, &v0, 0.0).unwrap(), v0);
        let v = propagate(&l, &v0, 1.0).unwrap();
        assert!((v[0] - c64((-1.0f64).exp(), 0.)).norm() < 1e-14);
        assert!((v[1] - c64((-2.0f64).exp(), 0.)).norm() < 1e-14);
    }

    #[test]
    fn propagate_dimension_mismatch() {
        let l = diag(&[-1.0, -2.0]);
        let v0 = vector_from_slice(&[c64(1., 0.)]).unwrap();
        assert!(matches!(propagate(&l, &v0, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn defective_generator_uses_dense_route() {
        // Jordan block: eigenvectors are parallel.
        let l = matrix_from_rows(2, 2, &[c64(-1., 0.), c64(1., 0.), c64(0., 0.), c64(-1., 0.)]).unwrap();
        let p = ExpPropagator::new(&l).unwrap();
        assert!(!p.is_spectral());
        let v0 = vector_from_slice(&[c64(0., 0.), c64(1., 0.)]).unwrap();
        let v = p.apply(&v0, 2.0).unwrap();
        let e = (-2.0f64).exp();
        assert!((v[0] - c64(2.0 * e, 0.)).norm() < 1e-12);
        assert!((v[1] - c64(e, 0.)).norm() < 1e-12);
    }

    #[test]
    fn eigen_decompose_reconstructs() {
        let m = matrix_from_rows(
            3,
            3,
            &[
                c64(1., 2.),
                c64(0.5, 0.),
                c64(0., -1.),
                c64(-0.3, 0.1),
                c64(2., 0.),
                c64(0.7, 0.7),
                c64(0., 0.2),
                c64(1., -1.),
                c64(-1., 0.),
            ],
        )
        .unwrap();
        let eig = eigen_decompose(&m).unwrap();
        for k in 0..3 {
            let v = eig.vectors.column(k).into_owned();
            let r = &m * &v - v * eig.values[k];
            assert!(r.norm() < 1e-12, "residual {}", r.norm());
        }
    }

    #[test]
    fn blocks_follow_sparsity() {
        let mut m = diag(&[1.0, 2.0, 3.0, 4.0]);
        m[(0, 2)] = c64(0.5, 0.0);
        m[(3, 1)] = c64(0.0, 1.0);
        let mut b = blocks(&m);
        b.sort();
        assert_eq!(b, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn shifted_blocks_stay_accurate() {
        // one block carries a large common frequency, as a vibrational sector does
        let w = 5e5;
        let mut m = ComplexMatrix::zeros(4, 4);
        let slow = [[-1.0, 0.3], [0.2, -0.5]];
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = c64(slow[i][j], 0.0);
                m[(i + 2, j + 2)] = c64(slow[i][j], 0.0);
            }
            m[(i + 2, i + 2)] += c64(0.0, w);
        }
        let p = ExpPropagator::new(&m).unwrap();
        assert!(p.is_spectral());
        let v0 = vector_from_slice(&[c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        let t = 3.0;
        let v = p.apply(&v0, t).unwrap();
        let phase = c64(0.0, w * t).exp();
        for i in 0..2 {
            assert!((v[i + 2] - v[i] * phase).norm() < 1e-13, "{}", (v[i + 2] - v[i] * phase).norm());
        }
        let dense = ExpPropagator::dense(&m.view((0, 0), (2, 2)).into_owned()).unwrap();
        let slow_v = dense.apply(&v0.rows(0, 2).into_owned(), t).unwrap();
        assert!((v.rows(0, 2) - slow_v).norm() < 1e-13);
    }
}
