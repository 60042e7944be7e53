//! Lie–Poisson forms on orbits, tangent vectors to the zero-momentum level,
//! differentials of the section and of the forward map, and the pullback
//! verifier.

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{ad_matrix, solve_bracket, solve_system, sum_matrices, LinalgError, Matrix};
use crate::reduction::{project_section, section_matrices, DiscreteData, FuchsTuple, ReductionError};
use crate::scalar::{Dual, Scalar};

/// Relative residual accepted by the floating pullback check.
pub const PULLBACK_REL_TOL: f64 = 1e-7;

/// Central finite-difference step.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("momentum correction system is inconsistent at this base point")]
    CorrectionUnsolvable,
    #[error("finite-difference probe left the domain: {0}")]
    StepThroughBoundary(ReductionError),
    #[error("tangent tuple does not match its base: {0}")]
    Shape(String),
}

/// `Σ A⁽ⁿ⁾`.
pub fn momentum<S: Scalar>(tuple: &FuchsTuple<S>) -> Matrix<S> {
    sum_matrices(tuple.dim(), tuple.matrices())
}

/// `ω(ξ, η) = −tr(U_ξ·η)` with `[A, U_ξ] = ξ`.
pub fn lie_poisson<S: Scalar>(a: &Matrix<S>, xi: &Matrix<S>, eta: &Matrix<S>, tol: f64) -> Result<S, LinalgError> {
    let u = solve_bracket(a, xi, tol)?;
    Ok(-(&u * eta).trace())
}

/// A tangent vector to the zero-momentum level, with certificates
/// `[A⁽ⁿ⁾, U⁽ⁿ⁾] = ξ⁽ⁿ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentTuple<S> {
    pub xi: Vec<Matrix<S>>,
    pub u: Vec<Matrix<S>>,
}

impl<S: Scalar> TangentTuple<S> {
    /// `ξ⁽ⁿ⁾ = [A⁽ⁿ⁾, U⁽ⁿ⁾]`; the sum is not checked.
    pub fn from_certificates(base: &FuchsTuple<S>, u: Vec<Matrix<S>>) -> Result<Self, SymplecticError> {
        if u.len() != base.len() || u.iter().any(|x| x.dim() != base.dim()) {
            return Err(SymplecticError::Shape(format!("{} certificates for {} matrices", u.len(), base.len())));
        }
        let xi = base.matrices().iter().zip(&u).map(|(a, x)| a.commutator(x)).collect();
        Ok(TangentTuple { xi, u })
    }

    pub fn zero(base: &FuchsTuple<S>) -> Self {
        let z = vec![Matrix::zeros(base.dim()); base.len()];
        TangentTuple { xi: z.clone(), u: z }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TangentTuple<T> {
        TangentTuple {
            xi: self.xi.iter().map(|x| x.map(&f)).collect(),
            u: self.u.iter().map(|x| x.map(&f)).collect(),
        }
    }
}

/// The infinitesimal diagonal conjugation `ξ⁽ⁿ⁾ = [A⁽ⁿ⁾, X]`.
pub fn gauge_tangent<S: Scalar>(base: &FuchsTuple<S>, x: &Matrix<S>) -> TangentTuple<S> {
    TangentTuple::from_certificates(base, vec![x.clone(); base.len()]).expect("shapes agree")
}

fn random_integer_matrix<S: Scalar, R: Rng + ?Sized>(m: usize, rng: &mut R) -> Matrix<S> {
    Matrix::from_fn(m, |_, _| S::from_i64(rng.gen_range(-3..=3)))
}

/// Random certificates, then a correction `Σ [A⁽ⁿ⁾, V⁽ⁿ⁾] = −Σ ξ⁽ⁿ⁾` that
/// puts the tangent on the momentum level.
pub fn sample_tangent<S: Scalar, R: Rng + ?Sized>(
    base: &FuchsTuple<S>,
    rng: &mut R,
    tol: f64,
) -> Result<TangentTuple<S>, SymplecticError> {
    let (m, n) = (base.dim(), base.len());
    let mut u: Vec<Matrix<S>> = (0..n).map(|_| random_integer_matrix(m, rng)).collect();
    let raw = TangentTuple::from_certificates(base, u.clone())?;
    let defect = sum_matrices(m, &raw.xi);
    let rhs: Vec<S> = defect.entries().map(|x| -x.clone()).collect();

    let blocks: Vec<Vec<Vec<S>>> = base.matrices().iter().map(ad_matrix).collect();
    let system: Vec<Vec<S>> = (0..m * m)
        .map(|r| blocks.iter().flat_map(|b| b[r].iter().cloned()).collect())
        .collect();
    let v = solve_system(&system, &rhs, tol).map_err(|e| match e {
        LinalgError::Inconsistent => SymplecticError::CorrectionUnsolvable,
        other => other.into(),
    })?;
    for (k, un) in u.iter_mut().enumerate() {
        let correction = Matrix::from_fn(m, |i, j| v[k * m * m + i * m + j].clone());
        *un = &*un + &correction;
    }
    TangentTuple::from_certificates(base, u)
}

pub fn sample_tangent_pair<S: Scalar, R: Rng + ?Sized>(
    base: &FuchsTuple<S>,
    rng: &mut R,
    tol: f64,
) -> Result<(TangentTuple<S>, TangentTuple<S>), SymplecticError> {
    Ok((sample_tangent(base, rng, tol)?, sample_tangent(base, rng, tol)?))
}

/// Per-orbit Lie–Poisson values `ω_n(ξ⁽ⁿ⁾, η⁽ⁿ⁾)`.
pub fn form_summands<S: Scalar>(
    points: &[Matrix<S>],
    xi: &[Matrix<S>],
    eta: &[Matrix<S>],
    tol: f64,
) -> Result<Vec<S>, LinalgError> {
    points.iter().zip(xi).zip(eta).map(|((a, x), e)| lie_poisson(a, x, e, tol)).collect()
}

/// `Σ_n ω_n(ξ⁽ⁿ⁾, η⁽ⁿ⁾)` at the base of the tangents.
pub fn total_form<S: Scalar>(
    base: &FuchsTuple<S>,
    xi: &TangentTuple<S>,
    eta: &TangentTuple<S>,
    tol: f64,
) -> Result<S, LinalgError> {
    let summands = form_summands(base.matrices(), &xi.xi, &eta.xi, tol)?;
    Ok(summands.into_iter().fold(S::zero(), |acc, x| acc + x))
}

/// Tangent vector at a reduced point: `(dÂ, d tail)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTangent<S> {
    pub a_hat: Matrix<S>,
    pub tail: Vec<Matrix<S>>,
}

impl<S: Scalar> ReducedTangent<S> {
    pub fn max_modulus(&self) -> f64 {
        self.tail.iter().map(Matrix::max_modulus).fold(self.a_hat.max_modulus(), f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.a_hat.approx_eq(&other.a_hat, tol)
            && self.tail.len() == other.tail.len()
            && self.tail.iter().zip(&other.tail).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// Differentials of the section and of the forward map along one tangent,
/// both computed by running the maps over dual numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Differentials<S> {
    pub section_base: Vec<Matrix<S>>,
    pub section: Vec<Matrix<S>>,
    pub reduced: ReducedTangent<S>,
}

pub fn differentials<S: Scalar>(
    tuple: &FuchsTuple<S>,
    data: &DiscreteData<S>,
    tangent: &TangentTuple<S>,
    tol: f64,
) -> Result<Differentials<S>, SymplecticError> {
    if tangent.xi.len() != tuple.len() {
        return Err(SymplecticError::Shape("tangent length differs from tuple length".into()));
    }
    let seeded: Vec<Matrix<Dual<S>>> = tuple
        .matrices()
        .iter()
        .zip(&tangent.xi)
        .map(|(a, x)| Matrix::from_fn(a.dim(), |i, j| Dual::new(a[(i, j)].clone(), x[(i, j)].clone())))
        .collect();
    let specs: Vec<_> = tuple.specs().iter().map(|s| s.map(|z| Dual::constant(z.clone()))).collect();
    let ddata = data.map(|z| Dual::constant(z.clone()));
    let section = section_matrices(&seeded, &specs, &ddata, tol)?;
    let (a_hat, tail) = project_section(&section, &ddata, tol)?;
    let value = |a: &Matrix<Dual<S>>| a.map(|z| z.value.clone());
    let deriv = |a: &Matrix<Dual<S>>| a.map(|z| z.deriv.clone());
    Ok(Differentials {
        section_base: section.iter().map(value).collect(),
        section: section.iter().map(deriv).collect(),
        reduced: ReducedTangent { a_hat: deriv(&a_hat), tail: tail.iter().map(deriv).collect() },
    })
}

/// Differential of the forward map (dual numbers; exact in exact mode).
pub fn pushforward_reduce<S: Scalar>(
    tuple: &FuchsTuple<S>,
    data: &DiscreteData<S>,
    tangent: &TangentTuple<S>,
    tol: f64,
) -> Result<ReducedTangent<S>, SymplecticError> {
    Ok(differentials(tuple, data, tangent, tol)?.reduced)
}

/// Central finite differences of the forward map along the orbit curves
/// `t ↦ (I + tU)⁻¹·A·(I + tU)`, which stay on each orbit. The certificates
/// `U` are re-solved from `ξ` and `h` is the curve parameter step.
pub fn pushforward_reduce_fd(
    tuple: &FuchsTuple<Complex64>,
    data: &DiscreteData<Complex64>,
    tangent: &TangentTuple<Complex64>,
    h: f64,
    tol: f64,
) -> Result<ReducedTangent<Complex64>, SymplecticError> {
    let m = tuple.dim();
    // stored certificates may carry large centralizer components that do not
    // move the point; fresh solves keep the step meaningful
    let certificates: Vec<Matrix<Complex64>> = tuple
        .matrices()
        .iter()
        .zip(&tangent.xi)
        .map(|(a, x)| solve_bracket(a, x, tol))
        .collect::<Result<_, _>>()?;
    let probe = |t: f64| -> Result<(Matrix<Complex64>, Vec<Matrix<Complex64>>), SymplecticError> {
        let moved: Vec<Matrix<Complex64>> = tuple
            .matrices()
            .iter()
            .zip(&certificates)
            .map(|(a, u)| {
                let g = &Matrix::identity(m) + &u.scale(&Complex64::new(t, 0.0));
                let g_inv = g.inverse(tol)?;
                Ok(a.conjugate_by(&g, &g_inv))
            })
            .collect::<Result<_, LinalgError>>()?;
        let section = section_matrices(&moved, tuple.specs(), data, tol).map_err(SymplecticError::StepThroughBoundary)?;
        project_section(&section, data, tol).map_err(SymplecticError::StepThroughBoundary)
    };
    let (ap, tp) = probe(h)?;
    let (am, tm) = probe(-h)?;
    let inv = Complex64::new(1.0 / (2.0 * h), 0.0);
    Ok(ReducedTangent {
        a_hat: (&ap - &am).scale(&inv),
        tail: tp.iter().zip(&tm).map(|(p, q)| (p - q).scale(&inv)).collect(),
    })
}

/// Largest residual of one identity over all trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Residual {
    ExactZero,
    Value(f64),
}

impl Residual {
    fn absorb(self, r: f64, exact_zero: bool) -> Self {
        match self {
            Residual::ExactZero if exact_zero => Residual::ExactZero,
            Residual::ExactZero => Residual::Value(r),
            Residual::Value(v) => Residual::Value(v.max(r)),
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            Residual::ExactZero => json!("exact-zero"),
            Residual::Value(v) => json!(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullbackReport {
    pub trials: usize,
    pub failures: usize,
    pub domain_errors: usize,
    pub max_residual_a: Residual,
    pub max_residual_b: Residual,
    pub max_residual_c: Residual,
}

impl PullbackReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.domain_errors < self.trials
    }

    pub fn to_json(&self) -> Value {
        json!({
            "trials": self.trials,
            "failures": self.failures,
            "max_residual_a": self.max_residual_a.to_json(),
            "max_residual_b": self.max_residual_b.to_json(),
            "max_residual_c": self.max_residual_c.to_json(),
            "domain_errors": self.domain_errors,
        })
    }
}

/// Residuals of the three pullback identities for one tangent pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackResiduals<S> {
    /// Total form on section tangents minus the target product form.
    pub a: S,
    /// Upper and lower anchor summands.
    pub b: (S, S),
    /// Row-sum anchor summand minus the quotient-orbit summand.
    pub c: S,
    /// Sum of moduli of every summand involved; the floating scale.
    pub scale: f64,
}

/// Evaluate the pullback identities on one tangent pair at the base point.
pub fn pullback_residuals<S: Scalar>(
    tuple: &FuchsTuple<S>,
    data: &DiscreteData<S>,
    xi: &TangentTuple<S>,
    eta: &TangentTuple<S>,
    tol: f64,
) -> Result<PullbackResiduals<S>, SymplecticError> {
    let dx = differentials(tuple, data, xi, tol)?;
    let dy = differentials(tuple, data, eta, tol)?;
    let section = &dx.section_base;
    let upstairs = form_summands(section, &dx.section, &dy.section, tol)?;

    let anchors = data.anchors;
    let (a_hat, tail) = project_section(section, data, tol)?;
    let hat = lie_poisson(&a_hat, &dx.reduced.a_hat, &dy.reduced.a_hat, tol)?;
    let downstairs_tail = form_summands(&tail, &dx.reduced.tail, &dy.reduced.tail, tol)?;

    let total_up = upstairs.iter().cloned().fold(S::zero(), |acc, x| acc + x);
    let total_down = downstairs_tail.iter().cloned().fold(hat.clone(), |acc, x| acc + x);
    let scale = upstairs.iter().chain(&downstairs_tail).chain([&hat]).map(Scalar::modulus).sum();
    Ok(PullbackResiduals {
        a: total_up - total_down,
        b: (upstairs[anchors.upper].clone(), upstairs[anchors.lower].clone()),
        c: upstairs[anchors.row_sum].clone() - hat,
        scale,
    })
}

/// Sample tangent pairs on the level, push them through the section's
/// differential, and check:
/// (a) the total form on the section equals the product form downstairs,
/// (b) the two triangular anchors contribute nothing,
/// (c) the row-sum anchor's summand equals the quotient-orbit summand.
///
/// Exact mode requires every residual to vanish; floating mode accepts a
/// relative residual up to [`PULLBACK_REL_TOL`].
pub fn verify_pullback<S: Scalar, R: Rng + ?Sized>(
    tuple: &FuchsTuple<S>,
    data: &DiscreteData<S>,
    trials: usize,
    rng: &mut R,
    tol: f64,
) -> Result<PullbackReport, SymplecticError> {
    // domain errors at the base point are fatal
    crate::reduction::reduce(tuple, data, tol)?;
    let mut report = PullbackReport {
        trials,
        failures: 0,
        domain_errors: 0,
        max_residual_a: Residual::ExactZero,
        max_residual_b: Residual::ExactZero,
        max_residual_c: Residual::ExactZero,
    };
    for _ in 0..trials {
        let res = sample_tangent_pair(tuple, rng, tol).and_then(|(xi, eta)| pullback_residuals(tuple, data, &xi, &eta, tol));
        let res = match res {
            Ok(r) => r,
            Err(_) => {
                report.domain_errors += 1;
                continue;
            }
        };
        let scale = res.scale.max(f64::MIN_POSITIVE);
        let mut failed = false;
        let mut fold = |acc: Residual, r: &S| {
            let exact_zero = S::EXACT && r.is_zero_tol(0.0);
            let value = if S::EXACT { r.modulus() } else { r.modulus() / scale };
            failed |= if S::EXACT { !exact_zero } else { value > PULLBACK_REL_TOL };
            acc.absorb(value, exact_zero)
        };
        report.max_residual_a = fold(report.max_residual_a, &res.a);
        let b = fold(report.max_residual_b, &res.b.0);
        report.max_residual_b = fold(b, &res.b.1);
        report.max_residual_c = fold(report.max_residual_c, &res.c);
        if failed {
            report.failures += 1;
        }
    }
    Ok(report)
}
