//! The canonical section of the zero-momentum level, the projection onto the
//! product of orbits, and its explicit inverse.
//!
//! Three tuple positions act as anchors. In the section representative the
//! `upper` anchor is upper-triangular, the `lower` anchor is lower-triangular
//! (both with prescribed diagonal orderings) and every row of the `row_sum`
//! anchor sums to the chosen eigenvalue `lambda`. The remaining positions form
//! the tail, kept in ascending index order.

use rand::Rng;
use thiserror::Error;

use crate::jordan::{jordan_basis, EigenOrdering, JordanError, JordanFlavor};
use crate::linalg::{
    gauss_ul_decompose, nullspace, part_diagonal, part_strict_lower, part_strict_upper, sum_matrices,
    triangular_inverse, LinalgError, Matrix, TriangularFlavor,
};
use crate::orbits::{check_membership, random_conjugator, sample_point, MembershipReport, OrbitError, OrbitSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("invalid tuple: {0}")]
    InvalidTuple(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Jordan(#[from] JordanError),
    #[error(transparent)]
    Linalg(LinalgError),
    #[error("matrix {index} is off its orbit: {report:?}")]
    OffOrbit { index: usize, report: MembershipReport },
    #[error("momentum (sum of the matrices) is not zero")]
    MomentumNonzero,
    #[error("eigenvalue traces of the orbits do not sum to zero")]
    TraceCondition,
    #[error("chosen eigenvalue is not an eigenvalue of the row-sum anchor")]
    EigenvalueMismatch,
    /// No basis makes the upper anchor upper-triangular and the lower anchor
    /// lower-triangular with the requested orderings.
    #[error("outside the domain (triangularity conditions): Gauss decomposition fails at trailing position {position}")]
    GaussObstruction { position: usize },
    /// The eigenvector of the row-sum anchor has a vanishing component, so no
    /// diagonal rescaling can make all row sums equal.
    #[error("outside the domain (equal row-sum condition): eigenvector component {component} vanishes")]
    ZeroEigenvectorComponent { component: usize },
    #[error("lifted tuple leaves its orbits at positions {:?}", failures.iter().map(|f| f.0).collect::<Vec<_>>())]
    LiftedOffOrbit { failures: Vec<(usize, MembershipReport)> },
    #[error("row-sum anchor lost its block-triangular form after the section")]
    BlockStructure,
}

impl From<LinalgError> for ReductionError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::GaussObstruction { position } => ReductionError::GaussObstruction { position },
            other => ReductionError::Linalg(other),
        }
    }
}

impl ReductionError {
    /// Which domain condition failed, for errors that place the point on the
    /// boundary of the domain.
    pub fn domain_condition(&self) -> Option<&'static str> {
        match self {
            ReductionError::GaussObstruction { .. } => {
                Some("triangular-anchor condition: upper/lower anchors admit no Gauss decomposition")
            }
            ReductionError::ZeroEigenvectorComponent { .. } => {
                Some("equal-row-sum condition: an eigenvector component of the row-sum anchor vanishes")
            }
            ReductionError::EigenvalueMismatch => Some("equal-row-sum condition: lambda is not an eigenvalue of the row-sum anchor"),
            ReductionError::LiftedOffOrbit { .. } => Some("lifted matrices leave their orbits (exceptional divisor)"),
            _ => None,
        }
    }
}

/// Tuple positions of the three anchors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchors {
    pub row_sum: usize,
    pub upper: usize,
    pub lower: usize,
}

impl Anchors {
    /// The last three positions: `n−1` row-sum, `n−2` upper, `n−3` lower.
    pub fn last_three(n: usize) -> Self {
        Anchors { row_sum: n - 1, upper: n - 2, lower: n - 3 }
    }

    pub fn contains(&self, i: usize) -> bool {
        i == self.row_sum || i == self.upper || i == self.lower
    }

    /// Non-anchor positions in ascending order.
    pub fn tail_indices(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }
}

/// The discrete choices that fix one section.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteData<S> {
    pub anchors: Anchors,
    pub lambda: S,
    pub ordering_up: EigenOrdering<S>,
    pub ordering_low: EigenOrdering<S>,
}

impl<S: Scalar> DiscreteData<S> {
    pub fn new(
        specs: &[OrbitSpec<S>],
        anchors: Anchors,
        lambda: S,
        up_slots: Vec<S>,
        low_slots: Vec<S>,
        tol: f64,
    ) -> Result<Self, ReductionError> {
        let n = specs.len();
        let Anchors { row_sum, upper, lower } = anchors;
        if row_sum >= n || upper >= n || lower >= n || row_sum == upper || row_sum == lower || upper == lower {
            return Err(ReductionError::InvalidTuple(format!(
                "anchors must be three distinct indices below {n}, got {row_sum}, {upper}, {lower}"
            )));
        }
        let idx = specs[row_sum].position(&lambda, tol).ok_or(ReductionError::EigenvalueMismatch)?;
        Ok(DiscreteData {
            anchors,
            // snap to the spec's value so exact comparisons downstream agree
            lambda: specs[row_sum].eigs()[idx].0.clone(),
            ordering_up: EigenOrdering::new(&specs[upper], up_slots, tol)?,
            ordering_low: EigenOrdering::new(&specs[lower], low_slots, tol)?,
        })
    }

    /// Anchors on the last three positions, the first listed eigenvalue of the
    /// row-sum anchor, and listing orders for both triangular anchors.
    pub fn default_for(specs: &[OrbitSpec<S>]) -> Result<Self, ReductionError> {
        if specs.len() < 3 {
            return Err(ReductionError::InvalidTuple("at least three orbits are required".into()));
        }
        let anchors = Anchors::last_three(specs.len());
        let lambda = specs[anchors.row_sum]
            .eigs()
            .first()
            .map(|(l, _)| l.clone())
            .ok_or_else(|| ReductionError::InvalidTuple("empty orbit spec".into()))?;
        Ok(DiscreteData {
            anchors,
            lambda,
            ordering_up: EigenOrdering::listing(&specs[anchors.upper]),
            ordering_low: EigenOrdering::listing(&specs[anchors.lower]),
        })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DiscreteData<T> {
        DiscreteData {
            anchors: self.anchors,
            lambda: f(&self.lambda),
            ordering_up: self.ordering_up.map(&f),
            ordering_low: self.ordering_low.map(&f),
        }
    }
}

/// Residue matrices on prescribed orbits with vanishing sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FuchsTuple<S> {
    specs: Vec<OrbitSpec<S>>,
    matrices: Vec<Matrix<S>>,
    /// Pole positions; carried along but never used.
    pub poles: Option<Vec<S>>,
}

fn momentum_is_zero<S: Scalar>(matrices: &[Matrix<S>], tol: f64) -> bool {
    let m = matrices[0].dim();
    let scale = matrices.iter().map(Matrix::max_modulus).fold(1.0, f64::max);
    sum_matrices(m, matrices).is_zero_tol(tol * scale)
}

impl<S: Scalar> FuchsTuple<S> {
    /// Validates shapes, orbit membership of every matrix, and zero momentum.
    pub fn new(
        specs: Vec<OrbitSpec<S>>,
        matrices: Vec<Matrix<S>>,
        poles: Option<Vec<S>>,
        tol: f64,
    ) -> Result<Self, ReductionError> {
        let tuple = Self::from_parts_unchecked(specs, matrices, poles)?;
        for (index, (a, spec)) in tuple.matrices.iter().zip(&tuple.specs).enumerate() {
            let report = check_membership(a, spec, tol);
            if !report.is_member() {
                return Err(ReductionError::OffOrbit { index, report });
            }
        }
        if !momentum_is_zero(&tuple.matrices, tol) {
            return Err(ReductionError::MomentumNonzero);
        }
        Ok(tuple)
    }

    /// Shape checks only; membership and momentum are not verified.
    pub fn from_parts_unchecked(
        specs: Vec<OrbitSpec<S>>,
        matrices: Vec<Matrix<S>>,
        poles: Option<Vec<S>>,
    ) -> Result<Self, ReductionError> {
        let n = matrices.len();
        if n < 3 {
            return Err(ReductionError::InvalidTuple(format!("need at least 3 matrices, got {n}")));
        }
        if specs.len() != n {
            return Err(ReductionError::InvalidTuple(format!("{} specs for {n} matrices", specs.len())));
        }
        let m = matrices[0].dim();
        if m < 2 {
            return Err(ReductionError::InvalidTuple("matrix size must be at least 2".into()));
        }
        if matrices.iter().any(|a| a.dim() != m) || specs.iter().any(|s| s.dim() != m) {
            return Err(ReductionError::InvalidTuple("all matrices and specs must share one size".into()));
        }
        if poles.as_ref().is_some_and(|p| p.len() != n) {
            return Err(ReductionError::InvalidTuple("one pole position per matrix".into()));
        }
        Ok(FuchsTuple { specs, matrices, poles })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Matrix size `m`.
    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn specs(&self) -> &[OrbitSpec<S>] {
        &self.specs
    }

    pub fn matrices(&self) -> &[Matrix<S>] {
        &self.matrices
    }

    /// `g⁻¹·A·g` applied to every matrix.
    pub fn conjugated(&self, g: &Matrix<S>, g_inv: &Matrix<S>) -> Self {
        FuchsTuple {
            specs: self.specs.clone(),
            matrices: self.matrices.iter().map(|a| a.conjugate_by(g, g_inv)).collect(),
            poles: self.poles.clone(),
        }
    }

    pub fn with_matrices(&self, matrices: Vec<Matrix<S>>) -> Self {
        FuchsTuple { specs: self.specs.clone(), matrices, poles: self.poles.clone() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FuchsTuple<T> {
        FuchsTuple {
            specs: self.specs.iter().map(|s| s.map(&f)).collect(),
            matrices: self.matrices.iter().map(|a| a.map(&f)).collect(),
            poles: self.poles.as_ref().map(|p| p.iter().map(&f).collect()),
        }
    }

    /// Entrywise comparison of the matrices.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = self.matrices.iter().map(Matrix::max_modulus).fold(1.0, f64::max);
        self.len() == other.len()
            && self.matrices.iter().zip(&other.matrices).all(|(a, b)| a.approx_eq(b, tol * scale))
    }
}

/// Identity with an all-ones last column.
pub fn xi_matrix<S: Scalar>(m: usize) -> Matrix<S> {
    Matrix::from_fn(m, |i, j| if i == j || j + 1 == m { S::one() } else { S::zero() })
}

/// Inverse of [`xi_matrix`]: identity with last column `(−1, …, −1, 1)`.
pub fn xi_inverse<S: Scalar>(m: usize) -> Matrix<S> {
    Matrix::from_fn(m, |i, j| {
        if i == j {
            S::one()
        } else if j + 1 == m {
            -S::one()
        } else {
            S::zero()
        }
    })
}

/// The orbit spec with one copy of `lambda` removed.
pub fn quotient_spec<S: Scalar>(spec: &OrbitSpec<S>, lambda: &S, tol: f64) -> Result<OrbitSpec<S>, ReductionError> {
    let idx = spec.position(lambda, tol).ok_or(ReductionError::EigenvalueMismatch)?;
    let eigs = spec
        .eigs()
        .iter()
        .enumerate()
        .filter_map(|(i, (l, k))| {
            let k = if i == idx { k - 1 } else { *k };
            (k > 0).then(|| (l.clone(), k))
        })
        .collect();
    Ok(OrbitSpec::new(spec.dim() - 1, eigs, tol)?)
}

/// The gauge `g` (and its inverse) taking a tuple to its section
/// representative `g⁻¹·A·g`. Works on raw matrices so that it can run over
/// dual numbers.
pub fn section_gauge<S: Scalar>(
    matrices: &[Matrix<S>],
    specs: &[OrbitSpec<S>],
    data: &DiscreteData<S>,
    tol: f64,
) -> Result<(Matrix<S>, Matrix<S>), ReductionError> {
    let Anchors { row_sum, upper, lower } = data.anchors;
    let m = matrices[0].dim();
    let (e_plus, _) = jordan_basis(&matrices[upper], &specs[upper], &data.ordering_up, JordanFlavor::Upper, tol)?;
    let (e_minus, _) = jordan_basis(&matrices[lower], &specs[lower], &data.ordering_low, JordanFlavor::Lower, tol)?;
    let e_plus_inv = e_plus.inverse(tol)?;
    let transition = &e_plus_inv * &e_minus;
    let (phi_plus, _) = gauss_ul_decompose(&transition, tol)?;
    let g0 = &e_plus * &phi_plus;
    // the pivots were vetted by the decomposition; re-testing them against
    // the factor's own (pivot-inflated) scale would be stricter than the domain
    let g0_inv = &triangular_inverse(&phi_plus, TriangularFlavor::Upper, 0.0)? * &e_plus_inv;

    let shifted = &matrices[row_sum].conjugate_by(&g0, &g0_inv) - &Matrix::identity(m).scale(&data.lambda);
    let kernel = nullspace(&shifted.rows(), m, tol);
    let f = match kernel.len() {
        0 => return Err(ReductionError::EigenvalueMismatch),
        1 => kernel.into_iter().next().expect("one kernel vector"),
        _ => {
            return Err(ReductionError::OffOrbit {
                index: row_sum,
                report: check_membership(&matrices[row_sum], &specs[row_sum], tol),
            })
        }
    };
    let ztol = tol * f.iter().map(Scalar::modulus).fold(0.0, f64::max);
    if let Some(component) = f.iter().position(|x| x.is_zero_tol(ztol)) {
        return Err(ReductionError::ZeroEigenvectorComponent { component });
    }
    // first component 1; the common scale cancels in the conjugation anyway
    let f: Vec<S> = f.iter().map(|x| x.clone() / f[0].clone()).collect();
    let f_inv: Vec<S> = f.iter().map(|x| S::one() / x.clone()).collect();
    let g = &g0 * &Matrix::diagonal(&f);
    let g_inv = &Matrix::diagonal(&f_inv) * &g0_inv;
    Ok((g, g_inv))
}

/// Section representatives of raw matrices.
pub fn section_matrices<S: Scalar>(
    matrices: &[Matrix<S>],
    specs: &[OrbitSpec<S>],
    data: &DiscreteData<S>,
    tol: f64,
) -> Result<Vec<Matrix<S>>, ReductionError> {
    let (g, g_inv) = section_gauge(matrices, specs, data, tol)?;
    Ok(matrices.iter().map(|a| a.conjugate_by(&g, &g_inv)).collect())
}

/// The unique representative of the tuple's conjugacy class that satisfies
/// the three anchor conditions.
pub fn canonical_section<S: Scalar>(
    tuple: &FuchsTuple<S>,
    data: &DiscreteData<S>,
    tol: f64,
) -> Result<FuchsTuple<S>, ReductionError> {
    let matrices = section_matrices(tuple.matrices(), tuple.specs(), data, tol)?;
    Ok(tuple.with_matrices(matrices))
}

/// `(Â, tail)` from section matrices: `Â` is the leading block of
/// `Ξ⁻¹·A·Ξ` for the row-sum anchor `A`, whose last column must be
/// `(0, …, 0, λ)`.
pub fn project_section<S: Scalar>(
    section: &[Matrix<S>],
    data: &DiscreteData<S>,
    tol: f64,
) -> Result<(Matrix<S>, Vec<Matrix<S>>), ReductionError> {
    let m = section[0].dim();
    let a = &section[data.anchors.row_sum];
    let block = &(&xi_inverse(m) * a) * &xi_matrix(m);
    let ztol = tol * a.max_modulus().max(1.0);
    let column_ok = (0..m - 1).all(|i| block[(i, m - 1)].is_zero_tol(ztol))
        && (block[(m - 1, m - 1)].clone() - data.lambda.clone()).is_zero_tol(ztol);
    if !column_ok {
        return Err(ReductionError::BlockStructure);
    }
    let tail = data.anchors.tail_indices(section.len()).into_iter().map(|i| section[i].clone()).collect();
    Ok((block.leading_block(m - 1), tail))
}

/// A point of the product of orbits: `Â` on the quotient orbit of the
/// row-sum anchor, followed by the tail matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPoint<S> {
    pub a_hat: Matrix<S>,
    pub tail: Vec<Matrix<S>>,
    pub specs: Vec<OrbitSpec<S>>,
    pub data: DiscreteData<S>,
}

impl<S: Scalar> ReducedPoint<S> {
    /// Validates sizes, orbit membership of `Â` and the tail, and that the
    /// orbit traces sum to zero (otherwise no tuple with zero sum exists).
    pub fn new(
        a_hat: Matrix<S>,
        tail: Vec<Matrix<S>>,
        specs: Vec<OrbitSpec<S>>,
        data: DiscreteData<S>,
        tol: f64,
    ) -> Result<Self, ReductionError> {
        let n = specs.len();
        if n < 3 || tail.len() + 3 != n {
            return Err(ReductionError::InvalidTuple(format!("{} tail matrices for {n} orbits", tail.len())));
        }
        let m = specs[0].dim();
        if specs.iter().any(|s| s.dim() != m) || a_hat.dim() + 1 != m || tail.iter().any(|t| t.dim() != m) {
            return Err(ReductionError::InvalidTuple("inconsistent matrix sizes".into()));
        }
        let quotient = quotient_spec(&specs[data.anchors.row_sum], &data.lambda, tol)?;
        let report = check_membership(&a_hat, &quotient, tol);
        if !report.is_member() {
            return Err(ReductionError::OffOrbit { index: data.anchors.row_sum, report });
        }
        for (t, index) in tail.iter().zip(data.anchors.tail_indices(n)) {
            let report = check_membership(t, &specs[index], tol);
            if !report.is_member() {
                return Err(ReductionError::OffOrbit { index, report });
            }
        }
        let total = specs.iter().fold(S::zero(), |acc, s| acc + s.trace());
        let scale = specs.iter().flat_map(|s| s.eigs()).map(|(l, _)| l.modulus()).fold(1.0, f64::max);
        if !total.is_zero_tol(tol * scale) {
            return Err(ReductionError::TraceCondition);
        }
        Ok(ReducedPoint { a_hat, tail, specs, data })
    }

    pub fn quotient_spec(&self, tol: f64) -> Result<OrbitSpec<S>, ReductionError> {
        quotient_spec(&self.specs[self.data.anchors.row_sum], &self.data.lambda, tol)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = self.tail.iter().map(Matrix::max_modulus).fold(self.a_hat.max_modulus().max(1.0), f64::max);
        self.a_hat.approx_eq(&other.a_hat, tol * scale)
            && self.tail.len() == other.tail.len()
            && self.tail.iter().zip(&other.tail).all(|(a, b)| a.approx_eq(b, tol * scale))
    }
}

/// The forward map: section, then projection onto the product of orbits.
pub fn reduce<S: Scalar>(tuple: &FuchsTuple<S>, data: &DiscreteData<S>, tol: f64) -> Result<ReducedPoint<S>, ReductionError> {
    let section = section_matrices(tuple.matrices(), tuple.specs(), data, tol)?;
    let (a_hat, tail) = project_section(&section, data, tol)?;
    let quotient = quotient_spec(&tuple.specs()[data.anchors.row_sum], &data.lambda, tol)?;
    let report = check_membership(&a_hat, &quotient, tol);
    if !report.is_member() {
        return Err(ReductionError::OffOrbit { index: data.anchors.row_sum, report });
    }
    Ok(ReducedPoint { a_hat, tail, specs: tuple.specs().to_vec(), data: data.clone() })
}

/// Reconstruct section matrices from a reduced point, without membership
/// checks.
///
/// The triangular anchors get their orderings on the diagonal; the row-sum
/// anchor's diagonal is minus the sum of all other diagonals, and the anchor
/// itself is `Å + (1⊗1)·(D − Å₌) − (Å·1) e_mᵀ` with `Å` the bordered `Â`.
/// The strict upper part of the upper anchor and the strict lower part of the
/// lower anchor absorb the remaining momentum.
pub fn lift_matrices<S: Scalar>(point: &ReducedPoint<S>) -> Vec<Matrix<S>> {
    let n = point.specs.len();
    let m = point.a_hat.dim() + 1;
    let Anchors { row_sum, upper, lower } = point.data.anchors;
    let mut mats: Vec<Matrix<S>> = vec![Matrix::zeros(m); n];
    for (t, i) in point.tail.iter().zip(point.data.anchors.tail_indices(n)) {
        mats[i] = t.clone();
    }
    mats[upper] = Matrix::diagonal(point.data.ordering_up.slots());
    mats[lower] = Matrix::diagonal(point.data.ordering_low.slots());

    let others = (0..n).filter(|&i| i != row_sum).map(|i| part_diagonal(&mats[i]));
    let diag = -&others.fold(Matrix::zeros(m), |acc, d| &acc + &d);

    let bordered = point.a_hat.bordered();
    let shift = &diag - &part_diagonal(&bordered);
    let row_sums = bordered.mat_vec(&vec![S::one(); m]);
    mats[row_sum] = Matrix::from_fn(m, |i, j| {
        let mut v = bordered[(i, j)].clone() + shift[(j, j)].clone();
        if j + 1 == m {
            v = v - row_sums[i].clone();
        }
        v
    });

    let upper_rest = (0..n).filter(|&i| i != upper).map(|i| part_strict_upper(&mats[i]));
    let upper_fill = upper_rest.fold(Matrix::zeros(m), |acc, x| &acc + &x);
    mats[upper] = &mats[upper] - &upper_fill;
    let lower_rest = (0..n).filter(|&i| i != lower).map(|i| part_strict_lower(&mats[i]));
    let lower_fill = lower_rest.fold(Matrix::zeros(m), |acc, x| &acc + &x);
    mats[lower] = &mats[lower] - &lower_fill;
    mats
}

/// Membership reports for the reconstructed matrices that fail.
pub fn lift_failures<S: Scalar>(point: &ReducedPoint<S>, matrices: &[Matrix<S>], tol: f64) -> Vec<(usize, MembershipReport)> {
    matrices
        .iter()
        .zip(&point.specs)
        .enumerate()
        .filter_map(|(i, (a, s))| {
            let report = check_membership(a, s, tol);
            (!report.is_member()).then_some((i, report))
        })
        .collect()
}

/// The inverse map. Points whose reconstruction leaves an orbit (possible
/// only when some orbit is not diagonalizable) yield `LiftedOffOrbit`; the
/// raw reconstruction is still available from [`lift_matrices`].
pub fn lift<S: Scalar>(point: &ReducedPoint<S>, tol: f64) -> Result<FuchsTuple<S>, ReductionError> {
    let matrices = lift_matrices(point);
    let failures = lift_failures(point, &matrices, tol);
    if !failures.is_empty() {
        return Err(ReductionError::LiftedOffOrbit { failures });
    }
    if !momentum_is_zero(&matrices, tol) {
        return Err(ReductionError::MomentumNonzero);
    }
    FuchsTuple::from_parts_unchecked(point.specs.clone(), matrices, None)
}

/// A random tuple on the zero-momentum level: lift a random point of the
/// product of orbits, then conjugate by a random integer matrix. Points whose
/// lift leaves an orbit are resampled, up to `attempts` times.
pub fn sample_tuple<S: Scalar, R: Rng + ?Sized>(
    specs: &[OrbitSpec<S>],
    data: &DiscreteData<S>,
    rng: &mut R,
    attempts: usize,
    tol: f64,
) -> Result<FuchsTuple<S>, ReductionError> {
    let n = specs.len();
    let quotient = quotient_spec(&specs[data.anchors.row_sum], &data.lambda, tol)?;
    let mut last_err = ReductionError::InvalidTuple("no attempts made".into());
    for _ in 0..attempts.max(1) {
        let a_hat = sample_point(&quotient, rng, tol);
        let tail = data.anchors.tail_indices(n).into_iter().map(|i| sample_point(&specs[i], rng, tol)).collect();
        let point = ReducedPoint::new(a_hat, tail, specs.to_vec(), data.clone(), tol)?;
        match lift(&point, tol) {
            Ok(section) => {
                let (g, g_inv) = random_conjugator(section.dim(), rng, tol);
                return Ok(section.conjugated(&g, &g_inv));
            }
            Err(e @ ReductionError::LiftedOffOrbit { .. }) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// `N·m(m−1) − 2(m²−1)`: dimension of the reduced space.
pub fn reduced_dimension(m: usize, n: usize) -> i64 {
    let (m, n) = (m as i64, n as i64);
    n * m * (m - 1) - 2 * (m * m - 1)
}

/// `(N−3)·m(m−1) + (m−1)(m−2)`: dimension of the target product of orbits.
pub fn target_dimension(m: usize, n: usize) -> i64 {
    let (m, n) = (m as i64, n as i64);
    (n - 3) * m * (m - 1) + (m - 1) * (m - 2)
}
