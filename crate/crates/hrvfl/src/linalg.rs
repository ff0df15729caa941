//! Dense symmetric positive-definite solves via Cholesky factorization.
//!
//! This is all the linear algebra the closed-form ridge path needs: the normal
//! matrix `T'T + I/C` is symmetric positive definite for any `C > 0`, so an
//! `L L'` factorization followed by two triangular solves is the stable route
//! (no explicit inverse is ever formed).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `M v`. The built-in matrix-vector product already takes the unrolled
/// contiguous-dot path for standard-layout rows.
pub(crate) fn mat_vec<F: Scalar>(m: &ArrayView2<F>, v: &ArrayView1<F>) -> Array1<F> {
    m.dot(v)
}

/// `M' v` as a row-major sweep: accumulate `v_i * row_i` instead of dotting
/// strided columns, which is several times faster on standard-layout `M` and
/// keeps a fixed summation order (row 0..n) for bit-reproducibility.
pub(crate) fn mat_t_vec<F: Scalar>(m: &ArrayView2<F>, v: &ArrayView1<F>) -> Array1<F> {
    let mut out = Array1::zeros(m.ncols());
    let acc = out.as_slice_mut().expect("freshly allocated output");
    for (row, &vi) in m.rows().into_iter().zip(v.iter()) {
        match row.to_slice() {
            Some(row) => {
                for (o, &r) in acc.iter_mut().zip(row) {
                    *o = *o + vi * r;
                }
            }
            None => {
                for (o, &r) in acc.iter_mut().zip(row.iter()) {
                    *o = *o + vi * r;
                }
            }
        }
    }
    out
}

/// Solve `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd<F: Scalar>(a: &Array2<F>, b: &Array1<F>) -> Result<Array1<F>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape {
            context: "solve_spd matrix",
            expected: n,
            got: a.ncols(),
        });
    }
    if b.len() != n {
        return Err(Error::Shape {
            context: "solve_spd rhs",
            expected: n,
            got: b.len(),
        });
    }
    let l = cholesky(a)?;

    // forward solve L y = b
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum = sum - l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    // back solve L' x = y
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum = sum - l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    Ok(x)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
fn cholesky<F: Scalar>(a: &Array2<F>) -> Result<Array2<F>> {
    let n = a.nrows();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum = sum - l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if !(sum > F::zero()) || !sum.is_finite() {
                    return Err(Error::LinAlg(format!(
                        "non-positive pivot {sum} at row {i}; matrix is not positive definite"
                    )));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}
