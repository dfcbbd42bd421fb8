//! Exact integer linear algebra: Hermite and Smith normal forms, integer
//! kernels, and membership in integer row spans.
//!
//! Homology ranks, torsion, and the peripherally-trivial subspace of H¹ are
//! integer invariants; computing them in floating point would conflate rank
//! deficiency with roundoff. All elimination here is over arbitrary-precision
//! integers using only unimodular row operations, so row spans (hence the
//! subgroups they present) are preserved exactly.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Row-major integer matrix.
pub type IMat = Vec<Vec<BigInt>>;

pub fn mat_from_i64(rows: &[&[i64]]) -> IMat {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect()
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).map(|(x, br)| x * &br[j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &IMat) -> IMat {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    (0..n).map(|j| (0..m).map(|i| a[i][j].clone()).collect()).collect()
}

/// Floor division (remainder has the divisor's sign), so HNF reduction puts
/// off-pivot entries into [0, pivot).
fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    let q = a / b;
    let r = a - &q * b;
    if !r.is_zero() && (r.sign() != b.sign()) {
        q - 1
    } else {
        q
    }
}

fn row_axpy(target: &mut Vec<BigInt>, q: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

/// Row Hermite normal form with transform: returns (H, U) with H = U·A,
/// U unimodular. H is in row echelon form with positive pivots, entries above
/// each pivot reduced into [0, pivot), and zero rows at the bottom.
pub fn row_hnf(a: &IMat) -> (IMat, IMat) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut h = a.clone();
    let mut u = identity(m);
    let mut pivot = 0usize;
    for col in 0..n {
        if pivot >= m {
            break;
        }
        // Euclidean elimination below the pivot: repeatedly move the smallest
        // nonzero entry up and reduce the rest; terminates because the
        // minimum absolute value strictly decreases.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot..m {
                if !h[r][col].is_zero()
                    && best.is_none_or(|b| h[r][col].abs() < h[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            h.swap(pivot, b);
            u.swap(pivot, b);
            let mut clean = true;
            for r in pivot + 1..m {
                if !h[r][col].is_zero() {
                    let q = &h[r][col] / &h[pivot][col];
                    let (src_h, src_u) = (h[pivot].clone(), u[pivot].clone());
                    row_axpy(&mut h[r], &q, &src_h);
                    row_axpy(&mut u[r], &q, &src_u);
                    if !h[r][col].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if h[pivot][col].is_zero() {
            continue;
        }
        if h[pivot][col].is_negative() {
            for x in &mut h[pivot] {
                *x = -&*x;
            }
            for x in &mut u[pivot] {
                *x = -&*x;
            }
        }
        for r in 0..pivot {
            let q = div_floor(&h[r][col], &h[pivot][col]);
            if !q.is_zero() {
                let (src_h, src_u) = (h[pivot].clone(), u[pivot].clone());
                row_axpy(&mut h[r], &q, &src_h);
                row_axpy(&mut u[r], &q, &src_u);
            }
        }
        pivot += 1;
    }
    (h, u)
}

/// Rank over ℚ (= number of nonzero rows of the HNF).
pub fn rank(a: &IMat) -> usize {
    let (h, _) = row_hnf(a);
    h.iter().filter(|row| row.iter().any(|x| !x.is_zero())).count()
}

/// Basis of the integer (right) kernel {x : A·x = 0}, as rows, in HNF form.
///
/// Rows of the HNF transform of Aᵀ that map to zero rows span the kernel
/// saturatedly (the quotient by them is torsion-free), so this is a basis of
/// the full kernel subgroup, not a finite-index subgroup.
pub fn integer_kernel(a: &IMat) -> IMat {
    let at = transpose(a);
    let (h, u) = row_hnf(&at);
    let mut basis: IMat = h
        .iter()
        .zip(u)
        .filter(|(hr, _)| hr.iter().all(|x| x.is_zero()))
        .map(|(_, ur)| ur)
        .collect();
    if basis.is_empty() {
        return basis;
    }
    let (bh, _) = row_hnf(&basis);
    basis = bh.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    basis
}

/// Diagonal of the Smith normal form: positive d₁ | d₂ | … | d_r, one per
/// unit of rank. (Zero diagonal entries are omitted.)
pub fn smith_diagonal(a: &IMat) -> Vec<BigInt> {
    let mut h = a.clone();
    let m = h.len();
    let n = h.first().map_or(0, |r| r.len());
    let mut diag: Vec<BigInt> = Vec::new();
    let mut t = 0usize;
    'corner: while t < m && t < n {
        // Move the submatrix entry of smallest absolute value to (t, t).
        let mut best: Option<(usize, usize)> = None;
        for r in t..m {
            for c in t..n {
                if !h[r][c].is_zero()
                    && best.is_none_or(|(br, bc)| h[r][c].abs() < h[br][bc].abs())
                {
                    best = Some((r, c));
                }
            }
        }
        let Some((br, bc)) = best else { break };
        h.swap(t, br);
        for row in &mut h {
            row.swap(t, bc);
        }
        // Clear row and column t; imperfect quotients shrink the pivot, so
        // this loop terminates.
        let mut clean = true;
        for r in t + 1..m {
            if !h[r][t].is_zero() {
                let q = &h[r][t] / &h[t][t];
                let src = h[t].clone();
                row_axpy(&mut h[r], &q, &src);
                if !h[r][t].is_zero() {
                    clean = false;
                }
            }
        }
        for c in t + 1..n {
            if !h[t][c].is_zero() {
                let q = &h[t][c] / &h[t][t];
                for row in h.iter_mut() {
                    let v = &q * &row[t];
                    row[c] -= v;
                }
                if !h[t][c].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue 'corner;
        }
        // Enforce the divisibility chain: fold any non-multiple into row t.
        for r in t + 1..m {
            for c in t + 1..n {
                if !(&h[r][c] % &h[t][t]).is_zero() {
                    let src = h[r].clone();
                    let minus_one = BigInt::from(-1);
                    row_axpy(&mut h[t], &minus_one, &src);
                    continue 'corner;
                }
            }
        }
        diag.push(h[t][t].abs());
        t += 1;
    }
    diag
}

/// Express v as an integer combination of the rows of `basis`, if possible.
pub fn solve_in_row_span(basis: &IMat, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let (h, u) = row_hnf(basis);
    let mut rem: Vec<BigInt> = v.to_vec();
    let mut y = vec![BigInt::from(0); h.len()];
    for (i, row) in h.iter().enumerate() {
        let Some(pc) = row.iter().position(|x| !x.is_zero()) else { continue };
        if (&rem[pc] % &row[pc]).is_zero() {
            let q = &rem[pc] / &row[pc];
            row_axpy(&mut rem, &q, row);
            y[i] = q;
        }
    }
    if rem.iter().any(|x| !x.is_zero()) {
        return None;
    }
    // v = Σ y_i H_i = Σ y_i (U·B)_i, so the B-coefficients are yᵀU.
    let coeffs: Vec<BigInt> = (0..u.first().map_or(0, |r| r.len()))
        .map(|j| y.iter().zip(&u).map(|(yi, ur)| yi * &ur[j]).sum())
        .collect();
    Some(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_zero_mat(a: &IMat) -> bool {
        a.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    #[test]
    fn hnf_small_example() {
        // gcd elimination on [[3,1],[1,1]]: determinant 2 is preserved.
        let a = mat_from_i64(&[&[3, 1], &[1, 1]]);
        let (h, u) = row_hnf(&a);
        assert_eq!(h, mat_from_i64(&[&[1, 1], &[0, 2]]));
        assert_eq!(mat_mul(&u, &a), h);
    }

    #[test]
    fn hnf_shape_and_transform() {
        let a = mat_from_i64(&[
            &[2, 4, 4, 8],
            &[-6, 6, 12, 0],
            &[10, -4, -16, 6],
            &[4, 8, 8, 16],
        ]);
        let (h, u) = row_hnf(&a);
        assert_eq!(mat_mul(&u, &a), h);
        // Echelon: pivot columns strictly increase; pivots positive; entries
        // above each pivot lie in [0, pivot).
        let mut last_col: isize = -1;
        for (i, row) in h.iter().enumerate() {
            match row.iter().position(|x| !x.is_zero()) {
                Some(pc) => {
                    assert!((pc as isize) > last_col);
                    last_col = pc as isize;
                    assert!(row[pc].is_positive());
                    for r_above in 0..i {
                        assert!(!h[r_above][pc].is_negative() && h[r_above][pc] < row[pc]);
                    }
                }
                None => {
                    for below in &h[i..] {
                        assert!(below.iter().all(|x| x.is_zero()));
                    }
                }
            }
        }
        // Last row of A is twice the first: rank 3.
        assert_eq!(rank(&a), 3);
    }

    #[test]
    fn kernel_is_saturated() {
        let a = mat_from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = integer_kernel(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            let av = mat_mul(&a, &transpose(&vec![v.clone()]));
            assert!(is_zero_mat(&av));
        }
        // Saturation: the basis matrix has trivial elementary divisors.
        assert_eq!(smith_diagonal(&k), vec![BigInt::from(1), BigInt::from(1)]);
        // Full-rank matrix: trivial kernel.
        let b = mat_from_i64(&[&[2, 0], &[1, 3]]);
        assert!(integer_kernel(&b).is_empty());
    }

    #[test]
    fn smith_examples() {
        let d = smith_diagonal(&mat_from_i64(&[&[2, 0], &[0, 3]]));
        assert_eq!(d, vec![BigInt::from(1), BigInt::from(6)]);
        let d = smith_diagonal(&mat_from_i64(&[&[2, 4], &[4, 8]]));
        assert_eq!(d, vec![BigInt::from(2)]);
        // Presentation matrix of Z/5 ⊕ Z (one relation 5x = 0 on two gens).
        let d = smith_diagonal(&mat_from_i64(&[&[5, 0]]));
        assert_eq!(d, vec![BigInt::from(5)]);
        let d = smith_diagonal(&mat_from_i64(&[&[0, 0], &[0, 0]]));
        assert!(d.is_empty());
    }

    #[test]
    fn row_span_membership() {
        let basis = mat_from_i64(&[&[2, 0], &[0, 3]]);
        let v: Vec<BigInt> = [4, 9].iter().map(|&x| BigInt::from(x)).collect();
        let c = solve_in_row_span(&basis, &v).unwrap();
        assert_eq!(c, vec![BigInt::from(2), BigInt::from(3)]);
        let w: Vec<BigInt> = [1, 0].iter().map(|&x| BigInt::from(x)).collect();
        assert!(solve_in_row_span(&basis, &w).is_none());

        // Non-diagonal basis with a unimodular tangle.
        let basis = mat_from_i64(&[&[1, 1, 0], &[0, 2, 1]]);
        let v: Vec<BigInt> = [3, 7, 2].iter().map(|&x| BigInt::from(x)).collect();
        let c = solve_in_row_span(&basis, &v).unwrap();
        // Verify by recombination rather than freezing c.
        let recon = mat_mul(&vec![c], &basis);
        assert_eq!(recon[0], v);
    }
}
