//! Families of pairwise-disjoint affine subspaces whose pairwise separating
//! hyperplanes each intersect every other member of the family.
//!
//! A family consists of blocks `A_i` of size `d x (d-1)/2` (odd `d`) and
//! offsets `b_i`; member `i` is `{A_i v + b_i}`. Generic draws give, with
//! probability one, a family where separating any pair forces the normal to
//! meet all remaining subspaces, so all `n choose 2` separators are distinct.

use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Real;

/// Relative pivot tolerance for rank decisions; the construction is
/// generic-position, so near-degenerate draws are re-sampled, not adjudicated.
const RANK_REL_TOL: f64 = 1e-9;
const RETRY_BUDGET: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFamily<T> {
    /// Ambient dimension.
    pub dim: usize,
    pub blocks: Vec<Matrix<T>>,
    pub offsets: Vec<Vector<T>>,
}

impl<T: Real> SubspaceFamily<T> {
    pub fn new(blocks: Vec<Matrix<T>>, offsets: Vec<Vector<T>>) -> Result<Self> {
        if blocks.is_empty() || blocks.len() != offsets.len() {
            return Err(Error::Config("family needs matching blocks and offsets".into()));
        }
        let dim = blocks[0].rows();
        let sub = blocks[0].cols();
        for (a, b) in blocks.iter().zip(&offsets) {
            if a.rows() != dim || a.cols() != sub || b.len() != dim {
                return Err(Error::dim("SubspaceFamily::new", "inconsistent block shapes"));
            }
        }
        Ok(SubspaceFamily { dim, blocks, offsets })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Dimension of each member subspace.
    pub fn subspace_dim(&self) -> usize {
        self.blocks[0].cols()
    }
}

/// Verification outcome for one unordered pair.
#[derive(Debug, Clone)]
pub struct PairReport<T> {
    pub i: usize,
    pub j: usize,
    /// Certified by `rank([A_i, A_j, b_j - b_i]) == d`.
    pub disjoint: bool,
    /// Normal of the span of `[A_i, A_j]`, if one exists.
    pub normal: Option<Vector<T>>,
    /// `a` annihilates both blocks to elimination tolerance.
    pub normal_orthogonal: bool,
    /// `a^T b_i != a^T b_j`, leaving room for a slab between the pair.
    pub offsets_separated: bool,
    /// Per other member `k`: does the separating normal meet it
    /// (`a^T A_k != 0`)?
    pub intersects_others: Vec<(usize, bool)>,
}

impl<T> PairReport<T> {
    pub fn intersects_all_others(&self) -> bool {
        self.intersects_others.iter().all(|&(_, ok)| ok)
    }

    pub fn ok(&self) -> bool {
        self.disjoint && self.normal_orthogonal && self.offsets_separated && self.intersects_all_others()
    }
}

#[derive(Debug, Clone)]
pub struct FamilyReport<T> {
    pub pairs: Vec<PairReport<T>>,
}

impl<T> FamilyReport<T> {
    pub fn all_ok(&self) -> bool {
        self.pairs.iter().all(|p| p.ok())
    }
}

/// Checks pairwise disjointness, extracts each pair's separating normal, and
/// tests that the normal meets every other member of the family.
pub fn verify_family<T: Real>(fam: &SubspaceFamily<T>) -> Result<FamilyReport<T>> {
    let n = fam.len();
    let tol = T::from_f64(RANK_REL_TOL);
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut diff = fam.offsets[j].clone();
            diff.add_scaled(-T::one(), &fam.offsets[i]);
            let stacked = fam.blocks[i].hstack(&fam.blocks[j])?.hstack_col(&diff)?;
            let disjoint = rank(&stacked, tol) == fam.dim;

            let span = fam.blocks[i].hstack(&fam.blocks[j])?;
            let normal = nullspace_vector(&span.transposed(), tol);
            let (normal_orthogonal, offsets_separated, intersects_others) = match &normal {
                Some(a) => {
                    let ortho = max_abs_product(a, &fam.blocks[i]) <= tol
                        && max_abs_product(a, &fam.blocks[j]) <= tol;
                    let gap = (a.dot(&fam.offsets[i]) - a.dot(&fam.offsets[j])).abs();
                    let sep = gap > tol * (T::one() + fam.offsets[i].norm2() + fam.offsets[j].norm2());
                    let hits: Vec<(usize, bool)> = (0..n)
                        .filter(|&k| k != i && k != j)
                        .map(|k| (k, max_abs_product(a, &fam.blocks[k]) > tol))
                        .collect();
                    (ortho, sep, hits)
                }
                None => (false, false, Vec::new()),
            };
            pairs.push(PairReport {
                i,
                j,
                disjoint,
                normal,
                normal_orthogonal,
                offsets_separated,
                intersects_others,
            });
        }
    }
    Ok(FamilyReport { pairs })
}

/// Largest `|a^T column|`, scaled by the norms of both factors.
fn max_abs_product<T: Real>(a: &Vector<T>, block: &Matrix<T>) -> T {
    let an = a.norm2();
    if an == T::zero() {
        return T::zero();
    }
    let mut best = T::zero();
    for c in 0..block.cols() {
        let mut dot = T::zero();
        for r in 0..block.rows() {
            dot = dot + a[r] * block.get(r, c);
        }
        let cn = block.col_norm2(c);
        if cn > T::zero() {
            best = best.max(dot.abs() / (an * cn));
        }
    }
    best
}

/// Gaussian draw of a family satisfying the verification, re-sampling the
/// measure-zero failures up to a fixed retry budget.
pub fn random_family<T: Real>(d: usize, n: usize, rng: &mut Rng) -> Result<SubspaceFamily<T>> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::Config(format!("dimension must be odd and >= 3, got {d}")));
    }
    if n < 2 {
        return Err(Error::Config("family needs at least two members".into()));
    }
    let m = (d - 1) / 2;
    for _ in 0..RETRY_BUDGET {
        let blocks: Vec<Matrix<T>> = (0..n).map(|_| rng.gauss_matrix::<T>(d, m)).collect();
        let offsets: Vec<Vector<T>> = (0..n).map(|_| rng.gauss::<T>(d)).collect();
        let fam = SubspaceFamily::new(blocks, offsets)?;
        if verify_family(&fam)?.all_ok() {
            return Ok(fam);
        }
    }
    Err(Error::Verification(format!(
        "no verifiable family of {n} subspaces in dimension {d} within {RETRY_BUDGET} draws"
    )))
}

/// Extends a verified family from dimension `d` to `d + 1`: each block gains
/// a zero row and the new axis direction as an extra column, each offset a
/// trailing zero. Every member's dimension grows by one and the verification
/// is re-run on the lifted family.
pub fn lift_family<T: Real>(fam: &SubspaceFamily<T>) -> Result<SubspaceFamily<T>> {
    let d = fam.dim;
    let m = fam.subspace_dim();
    let mut blocks = Vec::with_capacity(fam.len());
    for a in &fam.blocks {
        let mut lifted = Matrix::zeros(d + 1, m + 1);
        for i in 0..d {
            for j in 0..m {
                lifted.set(i, j, a.get(i, j));
            }
        }
        lifted.set(d, m, T::one());
        blocks.push(lifted);
    }
    let offsets: Vec<Vector<T>> = fam
        .offsets
        .iter()
        .map(|b| {
            let mut v = b.as_slice().to_vec();
            v.push(T::zero());
            Vector::from_vec(v)
        })
        .collect();
    let lifted = SubspaceFamily::new(blocks, offsets)?;
    let report = verify_family(&lifted)?;
    if !report.all_ok() {
        return Err(Error::Verification("lifted family failed verification".into()));
    }
    Ok(lifted)
}

/// Row rank by Gaussian elimination with partial pivoting; a pivot counts
/// only if it exceeds `rel_tol` times the original norm of its column.
pub fn rank<T: Real>(m: &Matrix<T>, rel_tol: T) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut w: Vec<T> = m.as_slice().to_vec();
    let col_scales: Vec<T> = (0..cols).map(|j| m.col_norm2(j).max(T::one())).collect();

    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let mut pivot = row;
        for r in (row + 1)..rows {
            if w[r * cols + col].abs() > w[pivot * cols + col].abs() {
                pivot = r;
            }
        }
        if w[pivot * cols + col].abs() <= rel_tol * col_scales[col] {
            continue;
        }
        if pivot != row {
            for c in 0..cols {
                w.swap(row * cols + c, pivot * cols + c);
            }
        }
        let p = w[row * cols + col];
        for r in (row + 1)..rows {
            let f = w[r * cols + col] / p;
            if f != T::zero() {
                for c in col..cols {
                    let above = w[row * cols + c];
                    w[r * cols + c] = w[r * cols + c] - f * above;
                }
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// A unit-norm solution of `N a = 0`, or `None` when `N` has full column
/// rank at the given tolerance.
pub fn nullspace_vector<T: Real>(n: &Matrix<T>, rel_tol: T) -> Option<Vector<T>> {
    let rows = n.rows();
    let cols = n.cols();
    let mut w: Vec<T> = n.as_slice().to_vec();
    let col_scales: Vec<T> = (0..cols).map(|j| n.col_norm2(j).max(T::one())).collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let mut pivot = row;
        for r in (row + 1)..rows {
            if w[r * cols + col].abs() > w[pivot * cols + col].abs() {
                pivot = r;
            }
        }
        if w[pivot * cols + col].abs() <= rel_tol * col_scales[col] {
            continue;
        }
        if pivot != row {
            for c in 0..cols {
                w.swap(row * cols + c, pivot * cols + c);
            }
        }
        let p = w[row * cols + col];
        for r in (row + 1)..rows {
            let f = w[r * cols + col] / p;
            if f != T::zero() {
                for c in col..cols {
                    let above = w[row * cols + c];
                    w[r * cols + c] = w[r * cols + c] - f * above;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }

    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free_col = (0..cols).find(|c| !pivot_cols.contains(c))?;

    let mut a = vec![T::zero(); cols];
    a[free_col] = T::one();
    for &(prow, pcol) in pivots.iter().rev() {
        let mut s = T::zero();
        for c in (pcol + 1)..cols {
            s = s + w[prow * cols + c] * a[c];
        }
        a[pcol] = -s / w[prow * cols + pcol];
    }
    let mut v = Vector::from_vec(a);
    let norm = v.norm2();
    if norm == T::zero() {
        return None;
    }
    v.scale(T::one() / norm);
    Some(v)
}
