//! Dense square matrices over a [`Scalar`], pivot-free UL factorization,
//! echelon solves and the commutator (bracket) solve.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square or has inconsistent rows")]
    Shape,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is singular")]
    SingularMatrix,
    /// A zero pivot in the UL schedule: no upper×lower factorization exists.
    #[error("Gauss (UL) decomposition does not exist: zero pivot at trailing position {position}")]
    GaussObstruction { position: usize },
    #[error("right-hand side is not in the image of ad_A")]
    NotInTangentSpace,
    #[error("linear system is inconsistent")]
    Inconsistent,
}

/// Which side of the diagonal may carry nonzero entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularFlavor {
    Upper,
    Lower,
    Diagonal,
}

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n.max(1))).finish()
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.n + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.n + j]
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| S::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn diagonal(entries: &[S]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i].clone() } else { S::zero() })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Shape);
        }
        Ok(Matrix { n, data: rows.into_iter().flatten().collect() })
    }

    /// Integer entries, mostly for tests and examples.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self::from_fn(n, |i, j| S::from_i64(rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn entries(&self) -> impl Iterator<Item = &S> {
        self.data.iter()
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.n).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[S]) {
        for (i, v) in col.iter().enumerate() {
            self[(i, j)] = v.clone();
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn trace(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn diag_entries(&self) -> Vec<S> {
        (0..self.n).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn mat_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(S::zero(), |acc, j| acc + self[(i, j)].clone() * v[j].clone())
            })
            .collect()
    }

    /// `self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &(self * rhs) - &(rhs * self)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Largest entry modulus; tolerance scale for floating decisions.
    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(Scalar::modulus).fold(0.0, f64::max)
    }

    pub fn is_zero_tol(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_zero_tol(tol))
    }

    /// Entrywise comparison; exact equality in exact modes.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && self.data.iter().zip(&other.data).all(|(a, b)| (a.clone() - b.clone()).is_zero_tol(tol))
    }

    /// Leading `k×k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Self::from_fn(k, |i, j| self[(i, j)].clone())
    }

    /// Embed into one size larger by appending a zero last row and column.
    pub fn bordered(&self) -> Self {
        Self::from_fn(self.n + 1, |i, j| {
            if i < self.n && j < self.n {
                self[(i, j)].clone()
            } else {
                S::zero()
            }
        })
    }

    pub fn is_triangular(&self, flavor: TriangularFlavor, tol: f64) -> bool {
        let tol = tol * self.max_modulus();
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let forbidden = match flavor {
                    TriangularFlavor::Upper => i > j,
                    TriangularFlavor::Lower => i < j,
                    TriangularFlavor::Diagonal => i != j,
                };
                !forbidden || self[(i, j)].is_zero_tol(tol)
            })
        })
    }

    /// Inverse by Gauss–Jordan elimination with row exchanges.
    pub fn inverse(&self, tol: f64) -> Result<Self, LinalgError> {
        let n = self.n;
        let mut aug: Vec<Vec<S>> = (0..n)
            .map(|i| {
                let mut row = self.data[i * n..(i + 1) * n].to_vec();
                row.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
                row
            })
            .collect();
        let pivots = rref_in_place(&mut aug, n, tol * self.max_modulus());
        if pivots.len() < n {
            return Err(LinalgError::SingularMatrix);
        }
        let mut rows = vec![Vec::new(); n];
        for (row, c) in aug.into_iter().zip(pivots) {
            rows[c] = row[n..].to_vec();
        }
        Matrix::from_rows(rows)
    }

    /// `g⁻¹·self·g`.
    pub fn conjugate_by(&self, g: &Self, g_inv: &Self) -> Self {
        &(g_inv * self) * g
    }
}

impl<'a, S: Scalar> Mul<&'a Matrix<S>> for &'a Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &'a Matrix<S>) -> Matrix<S> {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matmul");
        let n = self.n;
        Matrix::from_fn(n, |i, j| {
            (0..n).fold(S::zero(), |acc, k| acc + self[(i, k)].clone() * rhs[(k, j)].clone())
        })
    }
}

impl<'a, S: Scalar> Add<&'a Matrix<S>> for &'a Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: &'a Matrix<S>) -> Matrix<S> {
        assert_eq!(self.n, rhs.n, "dimension mismatch in add");
        Matrix::from_fn(self.n, |i, j| self[(i, j)].clone() + rhs[(i, j)].clone())
    }
}

impl<'a, S: Scalar> Sub<&'a Matrix<S>> for &'a Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: &'a Matrix<S>) -> Matrix<S> {
        assert_eq!(self.n, rhs.n, "dimension mismatch in sub");
        Matrix::from_fn(self.n, |i, j| self[(i, j)].clone() - rhs[(i, j)].clone())
    }
}

impl<S: Scalar> Neg for &Matrix<S> {
    type Output = Matrix<S>;
    fn neg(self) -> Matrix<S> {
        self.map(|x| -x.clone())
    }
}

/// Sum of a non-empty collection of equally sized matrices.
pub fn sum_matrices<'a, S: Scalar>(n: usize, mats: impl IntoIterator<Item = &'a Matrix<S>>) -> Matrix<S> {
    mats.into_iter().fold(Matrix::zeros(n), |acc, m| &acc + m)
}

pub fn part_diagonal<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    Matrix::from_fn(a.dim(), |i, j| if i == j { a[(i, j)].clone() } else { S::zero() })
}

/// Entries strictly below the diagonal.
pub fn part_strict_lower<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    Matrix::from_fn(a.dim(), |i, j| if i > j { a[(i, j)].clone() } else { S::zero() })
}

/// Entries strictly above the diagonal.
pub fn part_strict_upper<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    Matrix::from_fn(a.dim(), |i, j| if i < j { a[(i, j)].clone() } else { S::zero() })
}

/// Factor `m = upper · lower` with `lower` unit lower-triangular, without any
/// row or column exchange.
///
/// Elimination runs from the bottom-right corner: the last column of `m` is
/// the last column of `upper`, the last row divided by the corner pivot is the
/// last row of `lower`, and the procedure recurses on the leading block of the
/// Schur complement. A zero pivot means no such factorization exists.
pub fn gauss_ul_decompose<S: Scalar>(
    m: &Matrix<S>,
    tol: f64,
) -> Result<(Matrix<S>, Matrix<S>), LinalgError> {
    let n = m.dim();
    let ztol = tol * m.max_modulus();
    let mut work = m.clone();
    let mut upper = Matrix::zeros(n);
    let mut lower = Matrix::identity(n);
    for k in (0..n).rev() {
        let pivot = work[(k, k)].clone();
        if pivot.is_zero_tol(ztol) {
            return Err(LinalgError::GaussObstruction { position: k });
        }
        for i in 0..=k {
            upper[(i, k)] = work[(i, k)].clone();
        }
        for j in 0..k {
            lower[(k, j)] = work[(k, j)].clone() / pivot.clone();
        }
        for i in 0..k {
            for j in 0..k {
                let update = upper[(i, k)].clone() * lower[(k, j)].clone();
                work[(i, j)] = work[(i, j)].clone() - update;
            }
        }
    }
    Ok((upper, lower))
}

/// Inverse of a triangular matrix by substitution.
pub fn triangular_inverse<S: Scalar>(
    t: &Matrix<S>,
    flavor: TriangularFlavor,
    tol: f64,
) -> Result<Matrix<S>, LinalgError> {
    let n = t.dim();
    let ztol = tol * t.max_modulus();
    if (0..n).any(|i| t[(i, i)].is_zero_tol(ztol)) {
        return Err(LinalgError::SingularMatrix);
    }
    let mut inv = Matrix::zeros(n);
    match flavor {
        TriangularFlavor::Diagonal => {
            for i in 0..n {
                inv[(i, i)] = S::one() / t[(i, i)].clone();
            }
        }
        TriangularFlavor::Upper => {
            for j in 0..n {
                for i in (0..=j).rev() {
                    let rhs = if i == j { S::one() } else { S::zero() };
                    let acc = ((i + 1)..=j)
                        .fold(rhs, |acc, k| acc - t[(i, k)].clone() * inv[(k, j)].clone());
                    inv[(i, j)] = acc / t[(i, i)].clone();
                }
            }
        }
        TriangularFlavor::Lower => {
            for j in 0..n {
                for i in j..n {
                    let rhs = if i == j { S::one() } else { S::zero() };
                    let acc =
                        (j..i).fold(rhs, |acc, k| acc - t[(i, k)].clone() * inv[(k, j)].clone());
                    inv[(i, j)] = acc / t[(i, i)].clone();
                }
            }
        }
    }
    Ok(inv)
}

/// Reduced row echelon form of the leading `ncols` columns, applied to whole
/// rows (so augmented columns ride along). Returns the pivot columns; row `i`
/// holds the pivot of column `pivots[i]`.
///
/// Exact modes sweep the columns in order and take the first nonzero entry.
/// Floating modes use complete pivoting (largest remaining entry anywhere),
/// which keeps rank decisions stable when a column has only tiny entries.
/// `ztol` is an absolute zero threshold.
pub(crate) fn rref_in_place<S: Scalar>(rows: &mut [Vec<S>], ncols: usize, ztol: f64) -> Vec<usize> {
    let nrows = rows.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut next_col = 0;
    for r in 0..nrows {
        let choice = if S::EXACT {
            (next_col..ncols).find_map(|c| (r..nrows).find(|&i| !rows[i][c].is_zero_tol(ztol)).map(|i| (i, c)))
        } else {
            (r..nrows)
                .flat_map(|i| (0..ncols).filter(|c| !pivots.contains(c)).map(move |c| (i, c)))
                .filter(|&(i, c)| !rows[i][c].is_zero_tol(ztol))
                .max_by(|&(a, c), &(b, d)| rows[a][c].modulus().total_cmp(&rows[b][d].modulus()))
        };
        let Some((p, c)) = choice else { break };
        next_col = c + 1;
        rows.swap(r, p);
        let inv = S::one() / rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == S::zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
        }
        pivots.push(c);
    }
    pivots
}

fn rows_scale<S: Scalar>(rows: &[Vec<S>]) -> f64 {
    rows.iter().flatten().map(Scalar::modulus).fold(0.0, f64::max)
}

/// Solve `a·x = b` for a rectangular system. Free variables are set to zero;
/// the result is deterministic for a given input.
pub fn solve_system<S: Scalar>(a: &[Vec<S>], b: &[S], tol: f64) -> Result<Vec<S>, LinalgError> {
    let ncols = a.first().map_or(0, Vec::len);
    if a.len() != b.len() {
        return Err(LinalgError::DimensionMismatch(a.len(), b.len()));
    }
    let scale = rows_scale(a).max(b.iter().map(Scalar::modulus).fold(0.0, f64::max));
    let ztol = tol * scale;
    let mut aug: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref_in_place(&mut aug, ncols, ztol);
    if aug[pivots.len()..].iter().any(|row| !row[ncols].is_zero_tol(ztol)) {
        return Err(LinalgError::Inconsistent);
    }
    let mut x = vec![S::zero(); ncols];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = aug[row][ncols].clone();
    }
    Ok(x)
}

/// Echelon basis of the null space of a rectangular matrix: one vector per
/// free column, with a 1 in that column.
pub fn nullspace<S: Scalar>(a: &[Vec<S>], ncols: usize, tol: f64) -> Vec<Vec<S>> {
    let ztol = tol * rows_scale(a);
    let mut work = a.to_vec();
    let pivots = rref_in_place(&mut work, ncols, ztol);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![S::zero(); ncols];
            v[free] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -work[row][free].clone();
            }
            v
        })
        .collect()
}

pub fn rank<S: Scalar>(a: &Matrix<S>, tol: f64) -> usize {
    let mut rows = a.rows();
    rref_in_place(&mut rows, a.dim(), tol * a.max_modulus()).len()
}

/// Square solve; singular matrices are rejected rather than solved in the
/// least-squares or minimum-norm sense.
pub fn linear_solve<S: Scalar>(a: &Matrix<S>, b: &[S], tol: f64) -> Result<Vec<S>, LinalgError> {
    if b.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch(a.dim(), b.len()));
    }
    if rank(a, tol) < a.dim() {
        return Err(LinalgError::SingularMatrix);
    }
    solve_system(&a.rows(), b, tol)
}

/// Basis of `ker(a − λI)`; the eigenvalue is supplied by the caller.
pub fn eigenspace_basis<S: Scalar>(a: &Matrix<S>, lambda: &S, tol: f64) -> Vec<Vec<S>> {
    let shifted = a - &Matrix::identity(a.dim()).scale(lambda);
    nullspace(&shifted.rows(), a.dim(), tol)
}

/// Coefficient matrix of `U ↦ A·U − U·A` acting on row-major `vec(U)`.
pub fn ad_matrix<S: Scalar>(a: &Matrix<S>) -> Vec<Vec<S>> {
    let m = a.dim();
    let mut rows = vec![vec![S::zero(); m * m]; m * m];
    for i in 0..m {
        for j in 0..m {
            let row = &mut rows[i * m + j];
            for l in 0..m {
                row[l * m + j] = row[l * m + j].clone() + a[(i, l)].clone();
                row[i * m + l] = row[i * m + l].clone() - a[(l, j)].clone();
            }
        }
    }
    rows
}

/// Some `U` with `A·U − U·A = xi`.
///
/// Free variables of the echelon solve are zero, so `xi = 0` gives `U = 0`.
pub fn solve_bracket<S: Scalar>(a: &Matrix<S>, xi: &Matrix<S>, tol: f64) -> Result<Matrix<S>, LinalgError> {
    let m = a.dim();
    if xi.dim() != m {
        return Err(LinalgError::DimensionMismatch(m, xi.dim()));
    }
    let rhs: Vec<S> = xi.entries().cloned().collect();
    let u = solve_system(&ad_matrix(a), &rhs, tol).map_err(|e| match e {
        LinalgError::Inconsistent => LinalgError::NotInTangentSpace,
        other => other,
    })?;
    Ok(Matrix { n: m, data: u })
}
