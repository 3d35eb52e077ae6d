//! The shift operator `A_d (p_0, ..., p_d) = (p_0(·+1), ..., p_d(·+1))` on
//! `M_d = P_0 ⊕ ... ⊕ P_d` and its invariant subspaces.
//!
//! Coefficients inside each block are stored in descending degree, which
//! makes every block `B_k` unipotent lower-triangular, e.g.
//! `B_1 = [[1, 0], [1, 1]]`.

pub use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Numerical rank of `m`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

fn binomial_u64(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `B_k`: maps descending coefficients of `p ∈ P_k` to those of `p(·+1)`.
pub fn shift_block(k: usize) -> DMatrix<f64> {
    // column for t^m holds C(m, i) in the row for t^i, i ≤ m
    DMatrix::from_fn(k + 1, k + 1, |row, col| {
        let i = k - row;
        let m = k - col;
        if i <= m {
            binomial_u64(m, i) as f64
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockShiftOperator {
    d: usize,
    matrix: DMatrix<f64>,
}

impl BlockShiftOperator {
    /// Assembles `A_d = diag(B_0, ..., B_d)`.
    pub fn build(d: usize) -> Self {
        let n = Self::dim_for(d);
        let mut matrix = DMatrix::zeros(n, n);
        for k in 0..=d {
            let off = Self::block_offset(k);
            matrix
                .view_mut((off, off), (k + 1, k + 1))
                .copy_from(&shift_block(k));
        }
        Self { d, matrix }
    }

    /// `Σ_{k=0}^d (k+1)`.
    pub fn dim_for(d: usize) -> usize {
        (d + 1) * (d + 2) / 2
    }

    /// Index of the first coefficient of block `k`.
    pub fn block_offset(k: usize) -> usize {
        k * (k + 1) / 2
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }
}

/// A subspace given by a full-column-rank basis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.ncols() > 0 && rank(&basis) != basis.ncols() {
            return Err(Error::Invalid(format!(
                "basis columns are linearly dependent (rank {} < {})",
                rank(&basis),
                basis.ncols()
            )));
        }
        Ok(Self { basis })
    }

    /// Builds a subspace from basis vectors of length `ambient`.
    pub fn from_vectors(ambient: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    found: v.len(),
                });
            }
        }
        let basis = DMatrix::from_fn(ambient, vectors.len(), |i, j| vectors[j][i]);
        Self::new(basis)
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            basis: DMatrix::identity(ambient, ambient),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn contains(&self, v: &DVector<f64>) -> bool {
        let mut m = self.basis.clone().insert_column(self.dim(), 0.0);
        m.set_column(self.dim(), v);
        rank(&m) == self.dim()
    }

    /// Column vectors of the basis.
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.basis
            .column_iter()
            .map(|c| c.iter().cloned().collect())
            .collect()
    }
}

/// `rank([N | A N]) = rank(N)`.
pub fn is_invariant(subspace: &Subspace, op: &BlockShiftOperator) -> Result<bool> {
    if subspace.ambient_dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: subspace.ambient_dim(),
        });
    }
    let n = subspace.basis();
    let image = op.matrix() * n;
    let mut joined = DMatrix::zeros(n.nrows(), 2 * n.ncols());
    joined.view_mut((0, 0), n.shape()).copy_from(n);
    joined.view_mut((0, n.ncols()), n.shape()).copy_from(&image);
    Ok(rank(&joined) == rank(n))
}

/// Smallest `A`-invariant subspace containing `v`, with an orthonormal basis.
pub fn minimal_invariant_subspace(op: &BlockShiftOperator, v: &DVector<f64>) -> Result<Subspace> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: v.len(),
        });
    }
    if v.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut krylov = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let mut current = v.clone();
    let mut r = 1;
    loop {
        current = op.matrix() * &current;
        let k = krylov.ncols();
        let mut next = krylov.clone().insert_column(k, 0.0);
        next.set_column(k, &current);
        let nr = rank(&next);
        if nr == r {
            break;
        }
        krylov = next;
        r = nr;
    }
    let svd = krylov.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    Subspace::new(u.columns(0, r).into_owned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCheck {
    pub label: String,
    pub description: String,
    pub verified: bool,
}

/// Outcome of the invariant-subspace classification for `d = 1`
/// (`M = P_0 ⊕ P_1`, vectors `(a, b, c)` for `a` and `bt + c`).
#[derive(Debug, Clone, PartialEq)]
pub struct FourFamiliesReport {
    pub families: Vec<FamilyCheck>,
    /// Random planes that are not invariant, out of `random_trials`.
    pub random_non_invariant: usize,
    pub random_trials: usize,
}

impl FourFamiliesReport {
    pub fn all_verified(&self) -> bool {
        self.families.iter().all(|f| f.verified) && self.random_non_invariant == self.random_trials
    }
}

fn nonzero_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let p = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if f64::hypot(p.0, p.1) > 1e-3 {
            return p;
        }
    }
}

/// Instantiates the four families of invariant subspaces of `A_1` and checks
/// that random planes are generically not invariant.
pub fn four_families_demo(seed: u64) -> Result<FourFamiliesReport> {
    let op = BlockShiftOperator::build(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut families = Vec::new();

    let n1 = Subspace::from_vectors(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])?;
    families.push(FamilyCheck {
        label: "N(1)".into(),
        description: "{(0, b, c)}".into(),
        verified: is_invariant(&n1, &op)?,
    });

    let n2 = Subspace::from_vectors(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]])?;
    families.push(FamilyCheck {
        label: "N(2)".into(),
        description: "{(a, 0, c)}".into(),
        verified: is_invariant(&n2, &op)?,
    });

    let mut ok = true;
    for _ in 0..16 {
        let (a0, c0) = nonzero_pair(&mut rng);
        let n = Subspace::from_vectors(3, &[vec![a0, 0.0, c0]])?;
        ok &= is_invariant(&n, &op)?;
    }
    families.push(FamilyCheck {
        label: "N(a0,c0)".into(),
        description: "span{(a0, 0, c0)} for 16 random (a0, c0)".into(),
        verified: ok,
    });

    let mut ok = true;
    for _ in 0..16 {
        let (u, v) = nonzero_pair(&mut rng);
        // {ua + vb = 0} is spanned by (v, -u, 0) and (0, 0, 1)
        let n = Subspace::from_vectors(3, &[vec![v, -u, 0.0], vec![0.0, 0.0, 1.0]])?;
        ok &= is_invariant(&n, &op)?;
    }
    families.push(FamilyCheck {
        label: "N(u,v)".into(),
        description: "{ua + vb = 0} for 16 random (u, v)".into(),
        verified: ok,
    });

    let trials = 100;
    let mut non_invariant = 0;
    for _ in 0..trials {
        let vs: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let n = Subspace::from_vectors(3, &vs)?;
        if !is_invariant(&n, &op)? {
            non_invariant += 1;
        }
    }
    Ok(FourFamiliesReport {
        families,
        random_non_invariant: non_invariant,
        random_trials: trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_operators() {
        assert_eq!(BlockShiftOperator::build(0).matrix(), &DMatrix::from_element(1, 1, 1.0));
        let a1 = BlockShiftOperator::build(1);
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(a1.matrix(), &want);
    }

    #[test]
    fn square_shifts_to_binomial() {
        let a2 = BlockShiftOperator::build(2);
        // p_2 = t^2 occupies the last block in descending order
        let v = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let w = a2.apply(&v).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 0.0, 0.0, 1.0, 2.0, 1.0]);
        assert!(a2.apply(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn invariance_examples() {
        let a1 = BlockShiftOperator::build(1);
        let n1 = Subspace::from_vectors(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(is_invariant(&n1, &a1).unwrap());
        let bad = Subspace::from_vectors(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(!is_invariant(&bad, &a1).unwrap());
        assert!(is_invariant(&Subspace::full(3), &a1).unwrap());
        let wrong = Subspace::full(4);
        assert!(matches!(is_invariant(&wrong, &a1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dependent_basis_is_rejected() {
        assert!(Subspace::from_vectors(3, &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).is_err());
    }

    #[test]
    fn minimal_subspaces() {
        let a1 = BlockShiftOperator::build(1);
        let m = minimal_invariant_subspace(&a1, &DVector::from_vec(vec![0.0, 1.0, 0.0])).unwrap();
        assert_eq!(m.dim(), 2);
        let n1 = Subspace::from_vectors(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        for v in m.vectors() {
            assert!(n1.contains(&DVector::from_vec(v)));
        }

        let e = minimal_invariant_subspace(&a1, &DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(e.dim(), 1);

        // (1,1,0), (1,1,1), (1,1,2) all satisfy a = b
        let v = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let m = minimal_invariant_subspace(&a1, &v).unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.contains(&v));
        assert!(m.contains(&DVector::from_vec(vec![0.0, 0.0, 1.0])));
        assert!(is_invariant(&m, &a1).unwrap());

        assert!(matches!(
            minimal_invariant_subspace(&a1, &DVector::zeros(3)),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn four_families() {
        let report = four_families_demo(7).unwrap();
        assert_eq!(report.families.len(), 4);
        assert!(report.all_verified(), "{report:?}");
        let a1 = BlockShiftOperator::build(1);
        let uv = Subspace::from_vectors(3, &[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(is_invariant(&uv, &a1).unwrap());
        let single = Subspace::from_vectors(3, &[vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(is_invariant(&single, &a1).unwrap());
        let random = Subspace::from_vectors(3, &[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap();
        assert!(!is_invariant(&random, &a1).unwrap());
    }
}
