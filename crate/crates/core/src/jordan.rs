//! Upper and lower Jordan normal forms whose diagonal follows an assigned
//! eigenvalue ordering, together with the bases realizing them.
//!
//! "Upper" forms carry chain links on the first super-diagonal and "lower"
//! forms on the first sub-diagonal. Lower forms are handled by reversing the
//! basis order, which turns a lower form for an ordering into the upper form
//! for the reversed ordering.

use thiserror::Error;

use crate::linalg::{nullspace, Matrix};
use crate::orbits::OrbitSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JordanError {
    #[error("invalid eigenvalue ordering: {0}")]
    InvalidOrdering(String),
    #[error("matrix violates orbit membership while building Jordan chains: {0}")]
    MembershipViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JordanFlavor {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    eigen_index: usize,
    start: usize,
    len: usize,
}

/// Diagonal slots for an ordered Jordan form. Repeated eigenvalues occupy
/// contiguous slots.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenOrdering<S> {
    slots: Vec<S>,
    blocks: Vec<Block>,
}

impl<S: Scalar> EigenOrdering<S> {
    /// Checks that `slots` is the spec's eigenvalue multiset with each
    /// eigenvalue's occurrences contiguous.
    pub fn new(spec: &OrbitSpec<S>, slots: Vec<S>, tol: f64) -> Result<Self, JordanError> {
        if slots.len() != spec.dim() {
            return Err(JordanError::InvalidOrdering(format!(
                "{} slots for a {}-dimensional orbit",
                slots.len(),
                spec.dim()
            )));
        }
        let mut blocks: Vec<Block> = Vec::new();
        for (pos, slot) in slots.iter().enumerate() {
            let eigen_index = spec.position(slot, tol).ok_or_else(|| {
                JordanError::InvalidOrdering(format!("slot {pos} is not an eigenvalue of the orbit"))
            })?;
            match blocks.last_mut() {
                Some(b) if b.eigen_index == eigen_index => b.len += 1,
                _ => {
                    if blocks.iter().any(|b| b.eigen_index == eigen_index) {
                        return Err(JordanError::InvalidOrdering(format!(
                            "occurrences of eigenvalue #{eigen_index} are not contiguous"
                        )));
                    }
                    blocks.push(Block { eigen_index, start: pos, len: 1 });
                }
            }
        }
        for b in &blocks {
            let k = spec.eigs()[b.eigen_index].1;
            if b.len != k {
                return Err(JordanError::InvalidOrdering(format!(
                    "eigenvalue #{} appears {} times, multiplicity is {k}",
                    b.eigen_index, b.len
                )));
            }
        }
        // canonical slot values, so that later exact comparisons see the spec's values
        let slots = blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(spec.eigs()[b.eigen_index].0.clone(), b.len))
            .collect();
        Ok(EigenOrdering { slots, blocks })
    }

    /// The spec's own listing order.
    pub fn listing(spec: &OrbitSpec<S>) -> Self {
        let mut start = 0;
        let blocks = spec
            .eigs()
            .iter()
            .enumerate()
            .map(|(eigen_index, (_, k))| {
                let b = Block { eigen_index, start, len: *k };
                start += k;
                b
            })
            .collect();
        EigenOrdering { slots: spec.listing_order(), blocks }
    }

    pub fn slots(&self) -> &[S] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let m = self.slots.len();
        let mut slots = self.slots.clone();
        slots.reverse();
        let blocks = self
            .blocks
            .iter()
            .rev()
            .map(|b| Block { eigen_index: b.eigen_index, start: m - b.start - b.len, len: b.len })
            .collect();
        EigenOrdering { slots, blocks }
    }

    /// True when slot `j` continues the chain started in slot `j − 1`.
    fn links_back(&self, j: usize) -> bool {
        self.blocks.iter().any(|b| j > b.start && j < b.start + b.len)
    }

    fn block_start(&self, j: usize) -> usize {
        self.blocks
            .iter()
            .find(|b| j >= b.start && j < b.start + b.len)
            .map_or(j, |b| b.start)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> EigenOrdering<T> {
        EigenOrdering { slots: self.slots.iter().map(f).collect(), blocks: self.blocks.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderedJordanForm<S> {
    pub matrix: Matrix<S>,
    pub flavor: JordanFlavor,
    pub ordering: EigenOrdering<S>,
}

/// The ordered Jordan matrix itself.
pub fn jordan_seed<S: Scalar>(spec: &OrbitSpec<S>, ordering: &EigenOrdering<S>, flavor: JordanFlavor) -> OrderedJordanForm<S> {
    let m = spec.dim();
    let mut matrix = Matrix::diagonal(ordering.slots());
    for j in 1..m {
        if ordering.links_back(j) {
            match flavor {
                JordanFlavor::Upper => matrix[(j - 1, j)] = S::one(),
                JordanFlavor::Lower => matrix[(j, j - 1)] = S::one(),
            }
        }
    }
    OrderedJordanForm { matrix, flavor, ordering: ordering.clone() }
}

/// Anti-diagonal permutation matrix.
fn reversal<S: Scalar>(m: usize) -> Matrix<S> {
    Matrix::from_fn(m, |i, j| if i + j + 1 == m { S::one() } else { S::zero() })
}

fn vector_is_zero<S: Scalar>(v: &[S], ztol: f64) -> bool {
    v.iter().all(|x| x.is_zero_tol(ztol))
}

/// Upper-flavor chains, one block at a time. Each block's lead vector is the
/// first echelon basis vector of `ker (A − λI)^k` outside `ker (A − λI)^(k−1)`.
fn upper_chains<S: Scalar>(a: &Matrix<S>, spec: &OrbitSpec<S>, ordering: &EigenOrdering<S>, tol: f64) -> Result<Matrix<S>, JordanError> {
    let m = a.dim();
    let mut p = Matrix::zeros(m);
    for block in &ordering.blocks {
        let (lambda, k) = &spec.eigs()[block.eigen_index];
        let shifted = a - &Matrix::identity(m).scale(lambda);
        let top = shifted.pow(*k);
        let kernel = nullspace(&top.rows(), m, tol);
        if kernel.len() != *k {
            return Err(JordanError::MembershipViolation(format!(
                "generalized eigenspace of eigenvalue #{} has dimension {}, expected {k}",
                block.eigen_index,
                kernel.len()
            )));
        }
        let below = shifted.pow(k - 1);
        let growth = shifted.max_modulus().max(1.0).powi(*k as i32 - 1);
        let lead = kernel
            .into_iter()
            .find(|v| {
                let ztol = tol * growth * v.iter().map(Scalar::modulus).fold(0.0, f64::max);
                !vector_is_zero(&below.mat_vec(v), ztol)
            })
            .ok_or_else(|| {
                JordanError::MembershipViolation(format!(
                    "eigenvalue #{} has no Jordan chain of length {k}",
                    block.eigen_index
                ))
            })?;
        let mut chain = vec![lead];
        for _ in 1..*k {
            let next = shifted.mat_vec(chain.last().expect("chain is non-empty"));
            chain.push(next);
        }
        // chain is lead-first; the upper form lists the eigenvector first
        for (offset, v) in chain.iter().rev().enumerate() {
            p.set_column(block.start + offset, v);
        }
    }
    Ok(p)
}

/// A basis `P` with `P⁻¹·A·P` equal to the ordered Jordan form.
pub fn jordan_basis<S: Scalar>(
    a: &Matrix<S>,
    spec: &OrbitSpec<S>,
    ordering: &EigenOrdering<S>,
    flavor: JordanFlavor,
    tol: f64,
) -> Result<(Matrix<S>, OrderedJordanForm<S>), JordanError> {
    let p = match flavor {
        JordanFlavor::Upper => upper_chains(a, spec, ordering, tol)?,
        JordanFlavor::Lower => &upper_chains(a, spec, &ordering.reversed(), tol)? * &reversal(a.dim()),
    };
    let form = jordan_seed(spec, ordering, flavor);
    let p_inv = p
        .inverse(tol)
        .map_err(|_| JordanError::MembershipViolation("Jordan chains are linearly dependent".into()))?;
    // rounding in P⁻¹·A·P grows with the conditioning of P
    let scale = a.max_modulus().max(1.0) * p.max_modulus() * p_inv.max_modulus() * a.dim() as f64;
    if !a.conjugate_by(&p, &p_inv).approx_eq(&form.matrix, tol * scale) {
        return Err(JordanError::MembershipViolation("chains do not conjugate to the Jordan form".into()));
    }
    Ok((p, form))
}

fn upper_triangular_basis<S: Scalar>(t: &Matrix<S>, ordering: &EigenOrdering<S>, tol: f64) -> Result<Matrix<S>, JordanError> {
    let m = t.dim();
    let d = ordering.slots();
    let ztol = tol * t.max_modulus().max(1.0);
    let mut p: Matrix<S> = Matrix::zeros(m);
    for j in 0..m {
        let link = ordering.links_back(j);
        let start = ordering.block_start(j);
        if link {
            // Rows start..j−1 have a zero diagonal coefficient; row i fixes p[i+1][j].
            for i in (start..j).rev() {
                let rest = ((i + 2)..=j).fold(S::zero(), |acc, l| acc + t[(i, l)].clone() * p[(l, j)].clone());
                let rhs = p[(i, j - 1)].clone() - rest;
                p[(i + 1, j)] = rhs.checked_div(&t[(i, i + 1)], ztol).map_err(|_| {
                    JordanError::MembershipViolation(format!(
                        "zero chain link at ({i}, {}) of a triangular matrix",
                        i + 1
                    ))
                })?;
            }
        } else {
            p[(j, j)] = S::one();
        }
        for i in (0..start).rev() {
            let rest = ((i + 1)..=j).fold(S::zero(), |acc, l| acc + t[(i, l)].clone() * p[(l, j)].clone());
            let rhs = if link { p[(i, j - 1)].clone() } else { S::zero() } - rest;
            let gap = t[(i, i)].clone() - d[j].clone();
            p[(i, j)] = rhs.checked_div(&gap, ztol).map_err(|_| {
                JordanError::MembershipViolation(format!("diagonal entries {i} and {j} coincide outside a block"))
            })?;
        }
    }
    Ok(p)
}

/// For a triangular `T` whose diagonal is the ordering, a triangular `P` of
/// the same flavor with `P⁻¹·T·P` equal to the ordered Jordan form.
pub fn triangular_to_jordan<S: Scalar>(
    t: &Matrix<S>,
    spec: &OrbitSpec<S>,
    ordering: &EigenOrdering<S>,
    flavor: JordanFlavor,
    tol: f64,
) -> Result<(Matrix<S>, OrderedJordanForm<S>), JordanError> {
    use crate::linalg::TriangularFlavor;
    let m = t.dim();
    let tri = match flavor {
        JordanFlavor::Upper => TriangularFlavor::Upper,
        JordanFlavor::Lower => TriangularFlavor::Lower,
    };
    if m != spec.dim() || !t.is_triangular(tri, tol) {
        return Err(JordanError::InvalidOrdering("input is not triangular of the requested flavor".into()));
    }
    let ztol = tol * t.max_modulus().max(1.0);
    if t.diag_entries().iter().zip(ordering.slots()).any(|(a, b)| !(a.clone() - b.clone()).is_zero_tol(ztol)) {
        return Err(JordanError::InvalidOrdering("diagonal does not match the ordering".into()));
    }
    let p = match flavor {
        JordanFlavor::Upper => upper_triangular_basis(t, ordering, tol)?,
        JordanFlavor::Lower => {
            let k = reversal(m);
            let flipped = &(&k * t) * &k;
            let q = upper_triangular_basis(&flipped, &ordering.reversed(), tol)?;
            &(&k * &q) * &k
        }
    };
    Ok((p, jordan_seed(spec, ordering, flavor)))
}
