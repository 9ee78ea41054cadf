//! Small dense matrices and the fibered linear algebra built on them.
//!
//! Everything here is row-major and naive on purpose: fibers have dimension
//! at most a few dozen, and every product or sum below is evaluated in a
//! fixed loop order so that results are reproducible bit for bit. The
//! decompositions (Cholesky, LU with partial pivoting, Jacobi eigenvalues,
//! one-sided Jacobi SVD) are hand-written for the same reason.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{FiniteGroupoid, ObjectId};

/// Largest 1-norm condition estimate accepted by [`invert`].
pub const MAX_CONDITION: f64 = 1e12;

/// Absolute tolerance for the symmetry of Gram matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scalar(value: f64) -> Self {
        Self { rows: 1, cols: 1, data: vec![value] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} values cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * other`, accumulating each entry over the inner index in
    /// ascending order starting from zero.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] * other.data[k * other.cols + j];
                }
                out.data[i * other.cols + j] = acc;
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| k * v).collect() }
    }

    /// `self += k * other`, entrywise.
    pub fn add_scaled(&mut self, k: f64, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "add_scaled shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Replaces the matrix by `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(1.0);
        let n = self.rows;
        (0..n).all(|i| ((i + 1)..n).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    fn one_norm(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

/// Upper Cholesky factor `R` with `A = RᵀR`, or `None` when `A` is not
/// (numerically) positive definite. Symmetry is not checked here.
pub fn cholesky_upper(a: &Matrix) -> Option<Matrix> {
    if !a.is_square() {
        return None;
    }
    let n = a.rows;
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= r[(k, j)] * r[(k, j)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let rjj = d.sqrt();
        r[(j, j)] = rjj;
        for i in (j + 1)..n {
            let mut s = a[(j, i)];
            for k in 0..j {
                s -= r[(k, j)] * r[(k, i)];
            }
            r[(j, i)] = s / rjj;
        }
    }
    Some(r)
}

/// Inverse of an upper-triangular matrix with nonzero diagonal.
pub fn upper_triangular_inverse(r: &Matrix) -> Matrix {
    let n = r.rows;
    let mut inv = Matrix::zeros(n, n);
    for col in 0..n {
        for i in (0..=col).rev() {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in (i + 1)..=col {
                s -= r[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / r[(i, i)];
        }
    }
    inv
}

/// Matrix inverse by LU factorization with partial pivoting.
///
/// Fails when a pivot vanishes or the 1-norm condition estimate
/// `‖A‖₁‖A⁻¹‖₁` exceeds [`MAX_CONDITION`]. The estimate is returned alongside.
pub fn invert(a: &Matrix) -> Result<(Matrix, f64)> {
    if !a.is_square() {
        return Err(Error::Shape(format!("cannot invert a {}x{} matrix", a.rows, a.cols)));
    }
    let n = a.rows;
    if n == 0 {
        return Ok((Matrix::zeros(0, 0), 1.0));
    }
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > best {
                best = lu[(i, k)].abs();
                p = i;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return Err(Error::SingularMatrix(f64::INFINITY));
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
        }
    }
    let mut inv = Matrix::zeros(n, n);
    for col in 0..n {
        // forward substitution on the permuted unit vector
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = if perm[i] == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= lu[(i, k)] * y[k];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= lu[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / lu[(i, i)];
        }
    }
    let condition = a.one_norm() * inv.one_norm();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularMatrix(condition));
    }
    Ok((inv, condition))
}

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.rows;
    let mut m = a.clone();
    m.symmetrize();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * m[(i, j)]).sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Singular values by one-sided (Hestenes) Jacobi, descending.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let mut u = if a.rows >= a.cols { a.clone() } else { a.transpose() };
    let (m, n) = u.shape();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(a: &Matrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Fiber dimension per object, constant along orbits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorBundle {
    dims: Vec<usize>,
}

impl VectorBundle {
    pub fn new(groupoid: &FiniteGroupoid, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != groupoid.n_objects() {
            return Err(Error::TableLength { table: "bundle dims", found: dims.len(), expected: groupoid.n_objects() });
        }
        for g in groupoid.arrows() {
            let (s, t) = (groupoid.source(g), groupoid.target(g));
            if dims[s.0] != dims[t.0] {
                return Err(Error::DimensionNotOrbitConstant { a: s.0, dim_a: dims[s.0], b: t.0, dim_b: dims[t.0] });
            }
        }
        Ok(Self { dims })
    }

    pub fn constant(groupoid: &FiniteGroupoid, dim: usize) -> Self {
        Self { dims: vec![dim; groupoid.n_objects()] }
    }

    pub fn dim(&self, x: ObjectId) -> usize {
        self.dims[x.0]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_objects(&self) -> usize {
        self.dims.len()
    }
}

/// A linear map between two fibers.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberMap {
    pub src: ObjectId,
    pub dst: ObjectId,
    pub matrix: Matrix,
}

impl FiberMap {
    pub fn new(bundle: &VectorBundle, src: ObjectId, dst: ObjectId, matrix: Matrix) -> Result<Self> {
        let expected = (bundle.dim(dst), bundle.dim(src));
        if matrix.shape() != expected {
            return Err(Error::Shape(format!(
                "map {} -> {} must be {}x{}, got {}x{}",
                src.0,
                dst.0,
                expected.0,
                expected.1,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { src, dst, matrix })
    }

    pub fn norm(&self, metric: &FiberMetric) -> f64 {
        metric.operator_norm(&self.matrix, self.src, self.dst)
    }
}

/// Inner product per fiber, stored with its Cholesky whitening factors.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberMetric {
    grams: Vec<Matrix>,
    factors: Vec<Matrix>,
    factor_inverses: Vec<Matrix>,
}

impl FiberMetric {
    pub fn euclidean(bundle: &VectorBundle) -> Self {
        let grams: Vec<Matrix> = bundle.dims().iter().map(|&d| Matrix::identity(d)).collect();
        Self { factors: grams.clone(), factor_inverses: grams.clone(), grams }
    }

    /// Validates symmetry and positive definiteness of every Gram matrix.
    pub fn from_grams(bundle: &VectorBundle, grams: Vec<Matrix>) -> Result<Self> {
        if grams.len() != bundle.n_objects() {
            return Err(Error::TableLength {
                table: "metric matrices",
                found: grams.len(),
                expected: bundle.n_objects(),
            });
        }
        let mut factors = Vec::with_capacity(grams.len());
        let mut factor_inverses = Vec::with_capacity(grams.len());
        for (x, gram) in grams.iter().enumerate() {
            let d = bundle.dim(ObjectId(x));
            if gram.shape() != (d, d) {
                return Err(Error::Shape(format!(
                    "Gram matrix at object {x} must be {d}x{d}, got {}x{}",
                    gram.rows(),
                    gram.cols()
                )));
            }
            if !gram.is_symmetric(SYMMETRY_TOL) {
                return Err(Error::NotSpd { object: ObjectId(x) });
            }
            let r = cholesky_upper(gram).ok_or(Error::NotSpd { object: ObjectId(x) })?;
            factor_inverses.push(upper_triangular_inverse(&r));
            factors.push(r);
        }
        Ok(Self { grams, factors, factor_inverses })
    }

    pub fn gram(&self, x: ObjectId) -> &Matrix {
        &self.grams[x.0]
    }

    pub fn grams(&self) -> &[Matrix] {
        &self.grams
    }

    pub fn n_objects(&self) -> usize {
        self.grams.len()
    }

    /// `sup_{|e|_src ≤ 1} |A e|_dst`, computed as the largest singular value
    /// of `R_dst A R_src⁻¹` with `R` the upper Cholesky factors.
    pub fn operator_norm(&self, a: &Matrix, src: ObjectId, dst: ObjectId) -> f64 {
        let whitened = self.factors[dst.0].matmul(a).matmul(&self.factor_inverses[src.0]);
        spectral_norm(&whitened)
    }

    /// Norm of an endomorphism of the fiber at `x`.
    pub fn endo_norm(&self, a: &Matrix, x: ObjectId) -> f64 {
        self.operator_norm(a, x, x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmultiplicativityReport {
    pub norm_first: f64,
    pub norm_second: f64,
    pub norm_composite: f64,
    pub holds: bool,
}

/// Checks `‖second ∘ first‖ ≤ ‖first‖·‖second‖ + 1e-12`.
pub fn submultiplicativity_check(
    first: &FiberMap,
    second: &FiberMap,
    metric: &FiberMetric,
) -> Result<SubmultiplicativityReport> {
    if first.dst != second.src || first.matrix.rows() != second.matrix.cols() {
        return Err(Error::Shape(format!(
            "maps {}->{} and {}->{} do not compose",
            first.src.0, first.dst.0, second.src.0, second.dst.0
        )));
    }
    let composite = second.matrix.matmul(&first.matrix);
    let norm_first = first.norm(metric);
    let norm_second = second.norm(metric);
    let norm_composite = metric.operator_norm(&composite, first.src, second.dst);
    Ok(SubmultiplicativityReport {
        norm_first,
        norm_second,
        norm_composite,
        holds: norm_composite <= norm_first * norm_second + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeumannReport {
    pub inverse: Matrix,
    pub norm: f64,
    /// `‖(1 − a)⁻¹ − 1‖`
    pub deviation: f64,
    /// `r / (1 − r)`
    pub bound: f64,
    pub holds: bool,
}

/// Inverts `1 − a` for an endomorphism `a` of the fiber at `x` with
/// `‖a‖ ≤ r < 1`, and checks `‖(1 − a)⁻¹ − 1‖ ≤ r/(1 − r)`.
pub fn neumann_inverse_bound(a: &Matrix, x: ObjectId, metric: &FiberMetric, r: f64) -> Result<NeumannReport> {
    if !a.is_square() {
        return Err(Error::Shape(format!("endomorphism must be square, got {}x{}", a.rows, a.cols)));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Precondition(format!("radius {r} must lie in [0, 1)")));
    }
    let norm = metric.endo_norm(a, x);
    if norm >= 1.0 {
        return Err(Error::Precondition(format!("‖a‖ = {norm} is not below 1")));
    }
    if norm > r * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Precondition(format!("‖a‖ = {norm} exceeds the radius {r}")));
    }
    let id = Matrix::identity(a.rows());
    let (inverse, _) = invert(&(&id - a))?;
    let deviation = metric.endo_norm(&(&inverse - &id), x);
    let bound = r / (1.0 - r);
    Ok(NeumannReport { inverse, norm, deviation, bound, holds: deviation <= bound * (1.0 + 1e-12) + 1e-15 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroupoid;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn identity_has_unit_norm() {
        let g = FiniteGroupoid::pair(2).unwrap();
        let bundle = VectorBundle::constant(&g, 3);
        let metric = FiberMetric::euclidean(&bundle);
        let n = metric.operator_norm(&Matrix::identity(3), ObjectId(0), ObjectId(1));
        assert!(close(n, 1.0, 1e-15));
    }

    #[test]
    fn scalar_map_norm() {
        let g = FiniteGroupoid::pair(2).unwrap();
        let bundle = VectorBundle::constant(&g, 1);
        let metric = FiberMetric::euclidean(&bundle);
        assert_eq!(metric.operator_norm(&Matrix::scalar(3.0), ObjectId(0), ObjectId(1)), 3.0);
    }

    #[test]
    fn norm_respects_endpoint_metrics() {
        // |e|_src = 2|e|, so the unit map has sup ratio 1/2
        let g = FiniteGroupoid::pair(2).unwrap();
        let bundle = VectorBundle::constant(&g, 1);
        let metric = FiberMetric::from_grams(&bundle, vec![Matrix::scalar(4.0), Matrix::scalar(1.0)]).unwrap();
        let n = metric.operator_norm(&Matrix::scalar(1.0), ObjectId(0), ObjectId(1));
        assert!(close(n, 0.5, 1e-15));
    }

    #[test]
    fn rejects_indefinite_gram() {
        let g = FiniteGroupoid::pair(1).unwrap();
        let bundle = VectorBundle::constant(&g, 2);
        let bad = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        match FiberMetric::from_grams(&bundle, vec![bad]) {
            Err(Error::NotSpd { object }) => assert_eq!(object, ObjectId(0)),
            other => panic!("expected NotSpd, got {other:?}"),
        }
        let asym = Matrix::from_row_major(2, 2, vec![2.0, 0.5, 0.0, 2.0]).unwrap();
        assert!(FiberMetric::from_grams(&bundle, vec![asym]).is_err());
    }

    #[test]
    fn submultiplicativity_examples() {
        let g = FiniteGroupoid::pair(1).unwrap();
        let bundle = VectorBundle::constant(&g, 2);
        let metric = FiberMetric::euclidean(&bundle);
        let x = ObjectId(0);
        let id = FiberMap::new(&bundle, x, x, Matrix::identity(2)).unwrap();
        let rep = submultiplicativity_check(&id, &id, &metric).unwrap();
        assert!(rep.holds && close(rep.norm_composite, 1.0, 1e-15));

        let a = FiberMap::new(&bundle, x, x, Matrix::diag(&[2.0, 0.0])).unwrap();
        let b = FiberMap::new(&bundle, x, x, Matrix::diag(&[0.0, 3.0])).unwrap();
        let rep = submultiplicativity_check(&a, &b, &metric).unwrap();
        assert_eq!(rep.norm_composite, 0.0);
        assert!(close(rep.norm_first * rep.norm_second, 6.0, 1e-14));
        assert!(rep.holds);
    }

    #[test]
    fn submultiplicativity_rejects_non_composable() {
        let g = FiniteGroupoid::pair(2).unwrap();
        let bundle = VectorBundle::constant(&g, 1);
        let metric = FiberMetric::euclidean(&bundle);
        let a = FiberMap::new(&bundle, ObjectId(0), ObjectId(1), Matrix::scalar(1.0)).unwrap();
        assert!(submultiplicativity_check(&a, &a, &metric).is_err());
    }

    #[test]
    fn neumann_examples() {
        let g = FiniteGroupoid::pair(1).unwrap();
        let x = ObjectId(0);
        let b2 = VectorBundle::constant(&g, 2);
        let m2 = FiberMetric::euclidean(&b2);

        let rep = neumann_inverse_bound(&Matrix::zeros(2, 2), x, &m2, 0.0).unwrap();
        assert_eq!(rep.inverse, Matrix::identity(2));
        assert_eq!(rep.deviation, 0.0);
        assert!(rep.holds);

        let b1 = VectorBundle::constant(&g, 1);
        let m1 = FiberMetric::euclidean(&b1);
        let rep = neumann_inverse_bound(&Matrix::scalar(0.5), x, &m1, 0.5).unwrap();
        assert!(close(rep.deviation, 1.0, 1e-15) && close(rep.bound, 1.0, 1e-15));
        assert!(rep.holds);

        let rep = neumann_inverse_bound(&Matrix::diag(&[0.3, -0.2]), x, &m2, 0.3).unwrap();
        assert!(close(rep.deviation, 3.0 / 7.0, 1e-15));
        assert!(rep.holds);

        assert!(matches!(neumann_inverse_bound(&Matrix::scalar(1.0), x, &m1, 0.5), Err(Error::Precondition(_))));
        assert!(neumann_inverse_bound(&Matrix::scalar(0.6), x, &m1, 0.5).is_err());
    }

    #[test]
    fn lu_inverse_and_guard() {
        let a = Matrix::from_row_major(3, 3, vec![0.0, 2.0, 1.0, 1.0, 0.0, 0.0, 3.0, 1.0, 5.0]).unwrap();
        let (inv, cond) = invert(&a).unwrap();
        let prod = a.matmul(&inv);
        assert!((&prod - &Matrix::identity(3)).max_abs() < 1e-14);
        assert!(cond >= 1.0);
        assert!(invert(&Matrix::zeros(2, 2)).is_err());
        let near = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0 + 1e-14]).unwrap();
        assert!(matches!(invert(&near), Err(Error::SingularMatrix(_))));
        assert_eq!(invert(&Matrix::zeros(0, 0)).unwrap().0.shape(), (0, 0));
    }

    #[test]
    fn eigen_and_singular_values_of_known_matrices() {
        let a = Matrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let ev = symmetric_eigenvalues(&a);
        assert!(close(ev[0], 1.0, 1e-14) && close(ev[1], 3.0, 1e-14));
        let b = Matrix::from_row_major(2, 3, vec![3.0, 0.0, 0.0, 0.0, 0.0, -4.0]).unwrap();
        let sv = singular_values(&b);
        assert!(close(sv[0], 4.0, 1e-14) && close(sv[1], 3.0, 1e-14));
        assert_eq!(spectral_norm(&Matrix::zeros(0, 3)), 0.0);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Matrix::from_row_major(3, 3, vec![4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0]).unwrap();
        let r = cholesky_upper(&a).unwrap();
        assert!((&r.transpose().matmul(&r) - &a).max_abs() < 1e-14);
        let ri = upper_triangular_inverse(&r);
        assert!((&r.matmul(&ri) - &Matrix::identity(3)).max_abs() < 1e-14);
    }
}
