//! Finite-dimensional forward operators with exact adjoints.
//!
//! Signals live on a uniform 1D grid. The inner product is weighted by the
//! grid spacing, `<u, v> = sum u_i v_i h`, so norms approximate the continuous
//! L2 norm. Operators preserve the spacing of their input, which makes the
//! adjoint with respect to the weighted product the plain matrix transpose.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot tolerance for the injectivity check on dense operators.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Threshold below which `||T 1||` counts as vanishing.
pub const CONSTANT_VANISH_TOLERANCE: f64 = 1e-12;

/// A real-valued grid function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr<T>", bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Signal<T> {
    values: Vec<T>,
    grid_spacing: T,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar"))]
struct SignalRepr<T> {
    values: Vec<T>,
    #[serde(default = "unit_spacing")]
    grid_spacing: T,
}

fn unit_spacing<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> TryFrom<SignalRepr<T>> for Signal<T> {
    type Error = Error;

    fn try_from(r: SignalRepr<T>) -> Result<Self> {
        Signal::with_spacing(r.values, r.grid_spacing)
    }
}

impl<T: Scalar> Signal<T> {
    /// Signal on a grid with unit spacing.
    pub fn new(values: Vec<T>) -> Result<Self> {
        Self::with_spacing(values, T::one())
    }

    pub fn with_spacing(values: Vec<T>, grid_spacing: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySignal);
        }
        if !(grid_spacing.is_finite() && grid_spacing > T::zero()) {
            return Err(Error::InvalidGridSpacing(grid_spacing.to_f64_lossy()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            values,
            grid_spacing,
        })
    }

    pub fn zeros(len: usize, grid_spacing: T) -> Result<Self> {
        Self::with_spacing(vec![T::zero(); len], grid_spacing)
    }

    pub fn ones(len: usize, grid_spacing: T) -> Result<Self> {
        Self::with_spacing(vec![T::one(); len], grid_spacing)
    }

    /// Builds a signal sharing this one's grid. Used internally where the
    /// values are known to be finite and of matching length.
    pub(crate) fn like(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            grid_spacing: self.grid_spacing,
        }
    }

    pub(crate) fn from_parts(values: Vec<T>, grid_spacing: T) -> Self {
        Self {
            values,
            grid_spacing,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn grid_spacing(&self) -> T {
        self.grid_spacing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Weighted inner product `sum u_i v_i h`.
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.len(), other.len());
        let s: T = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum();
        s * self.grid_spacing
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Self {
        debug_assert_eq!(self.len(), other.len());
        self.like(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpby(T::one(), other, -T::one())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpby(T::one(), other, T::one())
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        self.like(self.values.iter().map(|&v| f(v)).collect())
    }

    /// `self - other` norm.
    pub fn distance(&self, other: &Self) -> T {
        self.sub(other).norm()
    }

    fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidParameter("matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::RaggedMatrix);
        }
        let data: Vec<T> = rows.iter().flatten().copied().collect();
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols).map(<[T]>::to_vec).collect()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn matvec_transposed(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (row, &yi) in self.data.chunks(self.cols).zip(y) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `A^T A`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut data = vec![T::zero(); n * n];
        for row in self.data.chunks(n) {
            for i in 0..n {
                let ri = row[i];
                if ri == T::zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += ri * row[j];
                }
            }
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// `||A 1||` under the weighted norm with spacing `grid_spacing`.
    pub fn constant_image_norm(&self, grid_spacing: T) -> T {
        let image = self.matvec(&vec![T::one(); self.cols]);
        let s: T = image.iter().map(|&v| v * v).sum();
        (s * grid_spacing).sqrt()
    }

    /// Numerical rank by Gaussian elimination with complete pivoting.
    /// Pivots below `rel_tol * max|a_ij|` are treated as zero.
    pub fn numerical_rank(&self, rel_tol: T) -> usize {
        let (m, n) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let scale = a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if scale == T::zero() {
            return 0;
        }
        let threshold = rel_tol * scale;
        let mut row_perm: Vec<usize> = (0..m).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut rank = 0;
        for k in 0..m.min(n) {
            let (mut pi, mut pj, mut best) = (k, k, T::zero());
            for i in k..m {
                for j in k..n {
                    let v = a[row_perm[i] * n + col_perm[j]].abs();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if best <= threshold {
                break;
            }
            row_perm.swap(k, pi);
            col_perm.swap(k, pj);
            let pr = row_perm[k];
            let pc = col_perm[k];
            let pivot = a[pr * n + pc];
            for &r in &row_perm[k + 1..] {
                let factor = a[r * n + pc] / pivot;
                if factor == T::zero() {
                    continue;
                }
                for &c in &col_perm[k..] {
                    let v = a[pr * n + c];
                    a[r * n + c] -= factor * v;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
    pub fn solve_spd(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.rows;
        if self.cols != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.cols,
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s.is_nan() || s <= T::zero() || !s.is_finite() {
                        return Err(Error::SingularSystem);
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind<T> {
    Dense(DenseMatrix<T>),
    /// "Same"-size convolution with zero padding:
    /// `(T x)_i = sum_j k_j x_{i + c - j}`, `c = (len(k) - 1) / 2`.
    Convolution { kernel: Vec<T>, dim: usize },
}

/// A linear forward operator `T` together with its exact adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    into = "LinearMapRepr<T>",
    try_from = "LinearMapRepr<T>",
    bound(serialize = "T: Scalar", deserialize = "T: Scalar")
)]
pub struct LinearMap<T> {
    kind: Kind<T>,
}

/// Wire form of [`LinearMap`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum LinearMapRepr<T> {
    Dense { matrix: Vec<Vec<T>> },
    Convolution { kernel: Vec<T>, dim: usize },
    /// Accepted on input only; serialized as `dense`.
    Identity { dim: usize },
}

impl<T: Scalar> From<LinearMap<T>> for LinearMapRepr<T> {
    fn from(op: LinearMap<T>) -> Self {
        match op.kind {
            Kind::Dense(m) => LinearMapRepr::Dense {
                matrix: m.to_rows(),
            },
            Kind::Convolution { kernel, dim } => LinearMapRepr::Convolution { kernel, dim },
        }
    }
}

impl<T: Scalar> TryFrom<LinearMapRepr<T>> for LinearMap<T> {
    type Error = Error;

    fn try_from(r: LinearMapRepr<T>) -> Result<Self> {
        match r {
            LinearMapRepr::Dense { matrix } => LinearMap::dense(&matrix),
            LinearMapRepr::Convolution { kernel, dim } => LinearMap::convolution(kernel, dim),
            LinearMapRepr::Identity { dim } if dim > 0 => Ok(LinearMap::identity(dim)),
            LinearMapRepr::Identity { .. } => Err(Error::EmptySignal),
        }
    }
}

impl<T: Scalar> LinearMap<T> {
    /// Dense operator; rejected unless the matrix has full column rank.
    pub fn dense(rows: &[Vec<T>]) -> Result<Self> {
        Self::from_matrix(DenseMatrix::from_rows(rows)?)
    }

    pub fn from_matrix(matrix: DenseMatrix<T>) -> Result<Self> {
        let rank = matrix.numerical_rank(T::lit(RANK_TOLERANCE));
        if rank < matrix.cols() {
            return Err(Error::RankDeficient {
                rank,
                cols: matrix.cols(),
            });
        }
        Ok(Self {
            kind: Kind::Dense(matrix),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            kind: Kind::Dense(DenseMatrix::identity(n)),
        }
    }

    /// Zero-padded convolution acting on signals of length `dim`.
    pub fn convolution(kernel: Vec<T>, dim: usize) -> Result<Self> {
        if kernel.is_empty() || kernel.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKernel);
        }
        if kernel.iter().all(|k| *k == T::zero()) {
            return Err(Error::InvalidKernel);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("convolution dimension must be positive".into()));
        }
        Ok(Self {
            kind: Kind::Convolution { kernel, dim },
        })
    }

    pub fn in_dim(&self) -> usize {
        match &self.kind {
            Kind::Dense(m) => m.cols(),
            Kind::Convolution { dim, .. } => *dim,
        }
    }

    pub fn out_dim(&self) -> usize {
        match &self.kind {
            Kind::Dense(m) => m.rows(),
            Kind::Convolution { dim, .. } => *dim,
        }
    }

    pub fn is_convolution(&self) -> bool {
        matches!(self.kind, Kind::Convolution { .. })
    }

    /// `T x`.
    pub fn apply(&self, x: &Signal<T>) -> Result<Signal<T>> {
        x.check_len(self.in_dim())?;
        let out = match &self.kind {
            Kind::Dense(m) => m.matvec(x.values()),
            Kind::Convolution { kernel, .. } => convolve(kernel, x.values()),
        };
        Ok(Signal::from_parts(out, x.grid_spacing()))
    }

    /// `T* y`.
    pub fn apply_adjoint(&self, y: &Signal<T>) -> Result<Signal<T>> {
        y.check_len(self.out_dim())?;
        let out = match &self.kind {
            Kind::Dense(m) => m.matvec_transposed(y.values()),
            Kind::Convolution { kernel, .. } => correlate(kernel, y.values()),
        };
        Ok(Signal::from_parts(out, y.grid_spacing()))
    }

    /// Explicit matrix of the operator.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        match &self.kind {
            Kind::Dense(m) => m.clone(),
            Kind::Convolution { kernel, dim } => {
                let n = *dim;
                let c = (kernel.len() - 1) / 2;
                let mut data = vec![T::zero(); n * n];
                for i in 0..n {
                    for (j, &k) in kernel.iter().enumerate() {
                        // column index i + c - j
                        if let Some(col) = (i + c).checked_sub(j) {
                            if col < n {
                                data[i * n + col] += k;
                            }
                        }
                    }
                }
                DenseMatrix {
                    rows: n,
                    cols: n,
                    data,
                }
            }
        }
    }

    /// Largest relative adjoint defect
    /// `|<Tx, y> - <x, T* y>| / (1 + |<Tx, y>|)` over seeded Gaussian pairs.
    pub fn adjoint_check(&self, trials: usize, seed: u64) -> Result<T> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = T::zero();
        for _ in 0..trials {
            let x = gaussian_signal(&mut rng, self.in_dim());
            let y = gaussian_signal(&mut rng, self.out_dim());
            worst = worst.max(adjoint_defect(self, &x, &y)?);
        }
        Ok(worst)
    }

    /// `||T 1||`; a value below [`CONSTANT_VANISH_TOLERANCE`] means constants
    /// are annihilated by the operator.
    pub fn constant_nonvanish_check(&self, grid_spacing: T) -> Result<T> {
        let one = Signal::ones(self.in_dim(), grid_spacing)?;
        Ok(self.apply(&one)?.norm())
    }

    /// Power-iteration estimate of `||T||^2 = lambda_max(T* T)`.
    pub fn norm_squared_estimate(&self, iterations: usize, seed: u64, grid_spacing: T) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Signal::from_parts(
            gaussian_signal::<T>(&mut rng, self.in_dim()).into_values(),
            grid_spacing,
        );
        let mut estimate = T::zero();
        for _ in 0..iterations.max(1) {
            let nx = x.norm();
            if nx == T::zero() {
                break;
            }
            x = x.scale(T::one() / nx);
            let ax = self.apply(&x).expect("dimension checked");
            let y = self.apply_adjoint(&ax).expect("dimension checked");
            estimate = x.dot(&y);
            x = y;
        }
        estimate
    }
}

/// `|<Tx, y> - <x, T* y>| / (1 + |<Tx, y>|)` for one pair.
pub fn adjoint_defect<T: Scalar>(op: &LinearMap<T>, x: &Signal<T>, y: &Signal<T>) -> Result<T> {
    let lhs = op.apply(x)?.dot(y);
    let rhs = x.dot(&op.apply_adjoint(y)?);
    Ok((lhs - rhs).abs() / (T::one() + lhs.abs()))
}

pub(crate) fn gaussian_signal<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Signal<T> {
    let values = (0..n)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            T::lit(v)
        })
        .collect();
    Signal::from_parts(values, T::one())
}

fn convolve<T: Scalar>(kernel: &[T], x: &[T]) -> Vec<T> {
    let n = x.len();
    let c = (kernel.len() - 1) / 2;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(j, &k)| {
                    let idx = (i + c).checked_sub(j)?;
                    (idx < n).then(|| k * x[idx])
                })
                .sum()
        })
        .collect()
}

fn correlate<T: Scalar>(kernel: &[T], y: &[T]) -> Vec<T> {
    let n = y.len();
    let c = (kernel.len() - 1) / 2;
    (0..n)
        .map(|l| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(j, &k)| {
                    let idx = (l + j).checked_sub(c)?;
                    (idx < n).then(|| k * y[idx])
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sig(v: &[f64]) -> Signal<f64> {
        Signal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn signal_rejects_empty_and_nonfinite() {
        assert_eq!(Signal::<f64>::new(vec![]), Err(Error::EmptySignal));
        assert_eq!(
            Signal::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(Signal::with_spacing(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn weighted_norm_uses_spacing() {
        let s = Signal::with_spacing(vec![1.0, 1.0, 1.0, 1.0], 0.25).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        assert_eq!(sig(&[0.0, 0.0]).norm(), 0.0);
    }

    #[test]
    fn dense_apply_examples() {
        let op = LinearMap::dense(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(op.apply(&sig(&[1.0, 1.0])).unwrap().values(), &[2.0, 1.0]);
        assert_eq!(op.apply_adjoint(&sig(&[1.0, 1.0])).unwrap().values(), &[2.0, 1.0]);
        let id = LinearMap::identity(2);
        assert_eq!(id.apply(&sig(&[0.3, -0.7])).unwrap().values(), &[0.3, -0.7]);
        let perm = LinearMap::dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(perm.apply_adjoint(&sig(&[3.0, 5.0])).unwrap().values(), &[5.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let op = LinearMap::<f64>::identity(3);
        assert_eq!(
            op.apply(&sig(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(op.apply_adjoint(&sig(&[1.0])).is_err());
    }

    #[test]
    fn rank_deficient_dense_rejected() {
        let err = LinearMap::dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap_err();
        assert_eq!(err, Error::RankDeficient { rank: 1, cols: 2 });
        assert!(LinearMap::dense(&[vec![1.0, 2.0, 3.0]]).is_err());
        assert_eq!(
            LinearMap::dense(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err(),
            Error::RaggedMatrix
        );
    }

    #[test]
    fn constant_check_examples() {
        let id = LinearMap::<f64>::identity(4);
        assert_abs_diff_eq!(id.constant_nonvanish_check(1.0).unwrap(), 2.0, epsilon = 1e-15);
        let op = LinearMap::dense(&[vec![1.0, -1.0], vec![0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(op.constant_nonvanish_check(1.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn constants_in_kernel_are_flagged() {
        // rank deficient, so only the raw matrix can carry it
        let m = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(m.constant_image_norm(1.0) < CONSTANT_VANISH_TOLERANCE);
        let conv = LinearMap::convolution(vec![1.0, -1.0], 3).unwrap();
        // zero padding keeps the first row (1, 0, 0), so T1 != 0
        assert!(conv.constant_nonvanish_check(1.0).unwrap() > CONSTANT_VANISH_TOLERANCE);
    }

    #[test]
    fn adjoint_check_identity_is_zero() {
        let id = LinearMap::<f64>::identity(5);
        assert!(id.adjoint_check(10, 3).unwrap() < 1e-15);
        assert!(id.adjoint_check(0, 3).is_err());
    }

    #[test]
    fn cholesky_solves_small_system() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = a.solve_spd(&[1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0 / 11.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 7.0 / 11.0, epsilon = 1e-14);
        let bad = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(bad.solve_spd(&[1.0, 1.0]), Err(Error::SingularSystem));
    }

    #[test]
    fn signal_serde_validates() {
        let s: Signal<f64> = serde_json::from_str(r#"{"values":[1.0,2.0],"grid_spacing":0.5}"#).unwrap();
        assert_eq!(s.len(), 2);
        assert!(serde_json::from_str::<Signal<f64>>(r#"{"values":[],"grid_spacing":0.5}"#).is_err());
    }

    #[test]
    fn linear_map_serde_round_trip() {
        let op = LinearMap::convolution(vec![0.25, 0.5, 0.25], 6).unwrap();
        let text = serde_json::to_string(&op).unwrap();
        assert_eq!(text, r#"{"kind":"convolution","kernel":[0.25,0.5,0.25],"dim":6}"#);
        let back: LinearMap<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, op);
        let bad = r#"{"kind":"dense","matrix":[[1.0,1.0],[1.0,1.0]]}"#;
        assert!(serde_json::from_str::<LinearMap<f64>>(bad).is_err());
    }
}
