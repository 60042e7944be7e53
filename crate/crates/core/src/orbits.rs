//! Conjugacy classes with one-dimensional eigenspaces, membership tests and
//! random sampling.

use rand::Rng;
use thiserror::Error;

use crate::jordan::{jordan_seed, EigenOrdering, JordanFlavor};
use crate::linalg::{rank, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("multiplicities sum to {sum}, expected {m}")]
    MultiplicitySum { m: usize, sum: usize },
    #[error("multiplicity of eigenvalue #{index} must be positive")]
    ZeroMultiplicity { index: usize },
    #[error(
        "eigenvalues #{first} and #{second} coincide; a repeated entry would need a \
         two-dimensional eigenspace, but every eigenspace must be one-dimensional"
    )]
    RepeatedEigenvalue { first: usize, second: usize },
    #[error("orbit dimension must be at least 1")]
    EmptySpec,
}

/// The conjugacy class of `m×m` matrices with the listed eigenvalues, one
/// Jordan block per eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSpec<S> {
    m: usize,
    eigs: Vec<(S, usize)>,
}

impl<S: Scalar> OrbitSpec<S> {
    /// Validates multiplicities and distinctness. In floating mode two
    /// eigenvalues closer than `tol` count as equal.
    pub fn new(m: usize, eigs: Vec<(S, usize)>, tol: f64) -> Result<Self, OrbitError> {
        if m == 0 {
            return Err(OrbitError::EmptySpec);
        }
        if let Some(index) = eigs.iter().position(|(_, k)| *k == 0) {
            return Err(OrbitError::ZeroMultiplicity { index });
        }
        let sum: usize = eigs.iter().map(|(_, k)| k).sum();
        for first in 0..eigs.len() {
            for second in first + 1..eigs.len() {
                if (eigs[first].0.clone() - eigs[second].0.clone()).is_zero_tol(tol) {
                    return Err(OrbitError::RepeatedEigenvalue { first, second });
                }
            }
        }
        if sum != m {
            return Err(OrbitError::MultiplicitySum { m, sum });
        }
        Ok(OrbitSpec { m, eigs })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn eigs(&self) -> &[(S, usize)] {
        &self.eigs
    }

    /// Eigenvalues repeated by multiplicity, in listing order.
    pub fn listing_order(&self) -> Vec<S> {
        self.eigs
            .iter()
            .flat_map(|(l, k)| std::iter::repeat_n(l.clone(), *k))
            .collect()
    }

    /// Index of `lambda` in the eigenvalue list.
    pub fn position(&self, lambda: &S, tol: f64) -> Option<usize> {
        self.eigs
            .iter()
            .position(|(l, _)| (l.clone() - lambda.clone()).is_zero_tol(tol))
    }

    /// Sum of eigenvalues with multiplicity.
    pub fn trace(&self) -> S {
        self.eigs
            .iter()
            .fold(S::zero(), |acc, (l, k)| acc + l.clone() * S::from_i64(*k as i64))
    }

    /// Real dimension count of the orbit: `m(m−1)`.
    pub fn orbit_dimension(&self) -> usize {
        orbit_dimension(self.m)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> OrbitSpec<T> {
        OrbitSpec { m: self.m, eigs: self.eigs.iter().map(|(l, k)| (f(l), *k)).collect() }
    }
}

/// Dimension of an orbit of `m×m` matrices with one-dimensional eigenspaces.
pub fn orbit_dimension(m: usize) -> usize {
    m * m.saturating_sub(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipFailure {
    DimensionMismatch { expected: usize, found: usize },
    /// `rank(A − λI) ≠ m − 1`: the eigenspace is not one-dimensional (or λ is
    /// not an eigenvalue at all).
    Eigenspace { eigen_index: usize, rank: usize, expected: usize },
    /// `rank((A − λI)^k) ≠ m − k`.
    GeneralizedEigenspace { eigen_index: usize, rank: usize, expected: usize },
    /// `rank((A − λI)^(k+1)) ≠ m − k`: the algebraic multiplicity exceeds `k`.
    AlgebraicMultiplicity { eigen_index: usize, rank: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipReport {
    pub failures: Vec<MembershipFailure>,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rank tests that characterize the orbit: for each listed `(λ, k)`,
/// `rank(A − λI) = m − 1`, `rank((A − λI)^k) = m − k` and
/// `rank((A − λI)^(k+1)) = m − k`. The last condition pins the algebraic
/// multiplicity, so together with `Σk = m` the whole spectrum is accounted for.
pub fn check_membership<S: Scalar>(a: &Matrix<S>, spec: &OrbitSpec<S>, tol: f64) -> MembershipReport {
    let m = spec.dim();
    let mut failures = Vec::new();
    if a.dim() != m {
        failures.push(MembershipFailure::DimensionMismatch { expected: m, found: a.dim() });
        return MembershipReport { failures };
    }
    // rank tolerance relative to the input scale, not the scale of the powers
    let scale = a.max_modulus().max(1.0);
    for (eigen_index, (lambda, k)) in spec.eigs().iter().enumerate() {
        let shifted = a - &Matrix::identity(m).scale(lambda);
        let rank_at = |p: usize| {
            let power = shifted.pow(p);
            let rel = tol * scale.powi(p as i32) / power.max_modulus().max(f64::MIN_POSITIVE);
            rank(&power, rel)
        };
        let r1 = rank_at(1);
        if r1 != m - 1 {
            failures.push(MembershipFailure::Eigenspace { eigen_index, rank: r1, expected: m - 1 });
            continue;
        }
        let rk = rank_at(*k);
        if rk != m - k {
            failures.push(MembershipFailure::GeneralizedEigenspace { eigen_index, rank: rk, expected: m - k });
            continue;
        }
        let rk1 = rank_at(k + 1);
        if rk1 != m - k {
            failures.push(MembershipFailure::AlgebraicMultiplicity { eigen_index, rank: rk1, expected: m - k });
        }
    }
    MembershipReport { failures }
}

/// Random invertible matrix with integer entries in `[-3, 3]`; resamples
/// until the determinant is nonzero.
pub fn random_conjugator<S: Scalar, R: Rng + ?Sized>(m: usize, rng: &mut R, tol: f64) -> (Matrix<S>, Matrix<S>) {
    loop {
        let g = Matrix::from_fn(m, |_, _| S::from_i64(rng.gen_range(-3..=3)));
        if let Ok(inv) = g.inverse(tol) {
            return (g, inv);
        }
    }
}

/// A random point `g⁻¹·J·g` of the orbit, where `J` is the upper Jordan seed
/// in listing order and `g` comes from [`random_conjugator`].
pub fn sample_point<S: Scalar, R: Rng + ?Sized>(spec: &OrbitSpec<S>, rng: &mut R, tol: f64) -> Matrix<S> {
    let ordering = EigenOrdering::listing(spec);
    let seed = jordan_seed(spec, &ordering, JordanFlavor::Upper);
    let (g, g_inv) = random_conjugator(spec.dim(), rng, tol);
    seed.matrix.conjugate_by(&g, &g_inv)
}

/// `n` specs of size `m` with zero total trace. Positions listed in
/// `nilpotent` get a single nilpotent block; the others get `m` distinct
/// integer eigenvalues drawn from `[-6, 6]`, one of which may be shifted
/// outside that range to cancel the total trace.
pub fn random_specs<S: Scalar, R: Rng + ?Sized>(m: usize, n: usize, nilpotent: &[usize], rng: &mut R) -> Vec<OrbitSpec<S>> {
    let free: Vec<usize> = (0..n).filter(|i| !nilpotent.contains(i)).collect();
    let eigs = loop {
        let mut eigs: Vec<Vec<i64>> = vec![vec![0]; n];
        for &i in &free {
            let mut pool: Vec<i64> = (-6..=6).collect();
            eigs[i] = (0..m).map(|_| pool.swap_remove(rng.gen_range(0..pool.len()))).collect();
        }
        let total: i64 = eigs.iter().flatten().sum();
        let Some(&last) = free.last() else { break eigs };
        let k = rng.gen_range(0..m);
        let shifted = eigs[last][k] - total;
        if !eigs[last].iter().enumerate().any(|(j, &x)| j != k && x == shifted) {
            eigs[last][k] = shifted;
            break eigs;
        }
    };
    eigs.into_iter()
        .enumerate()
        .map(|(i, e)| {
            let list = if nilpotent.contains(&i) {
                vec![(S::zero(), m)]
            } else {
                e.into_iter().map(|x| (S::from_i64(x), 1)).collect()
            };
            OrbitSpec::new(m, list, 0.0).expect("distinct eigenvalues")
        })
        .collect()
}
