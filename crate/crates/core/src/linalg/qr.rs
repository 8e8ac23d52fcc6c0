//! QR and RQ factorizations with positive-diagonal conventions.

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a factorization is declared degenerate.
pub const PIVOT_TOL: f64 = 1e-13;

fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Householder QR of a square matrix, normalized so `diag(R)` is real and
/// nonnegative. With this normalization the factorization is unique, and the
/// `Q` of a complex Ginibre matrix is Haar distributed.
pub fn qr_positive(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "qr_positive needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let scale = m.frobenius_norm();
    let mut r = m.clone();
    // Householder vectors, one per column.
    let mut reflectors: Vec<Vec<C64>> = Vec::with_capacity(n);

    for j in 0..n {
        let col_norm = (j..n).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if col_norm < PIVOT_TOL * scale || col_norm == 0.0 {
            return Err(Error::RankDeficient {
                index: j,
                pivot: col_norm,
            });
        }
        let x0 = r[(j, j)];
        let alpha = -unit_phase(x0) * col_norm;
        let mut v: Vec<C64> = (j..n).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v_norm > 0.0 {
            for z in v.iter_mut() {
                *z /= v_norm;
            }
            // R <- (I - 2 v v*) R on rows j.., columns j..
            for c in j..n {
                let mut dot = C64::new(0.0, 0.0);
                for (t, vi) in v.iter().enumerate() {
                    dot += vi.conj() * r[(j + t, c)];
                }
                let dot2 = dot * 2.0;
                for (t, vi) in v.iter().enumerate() {
                    r[(j + t, c)] -= vi * dot2;
                }
            }
        }
        for i in j + 1..n {
            r[(i, j)] = C64::new(0.0, 0.0);
        }
        reflectors.push(v);
        if r[(j, j)].norm() < PIVOT_TOL * scale {
            return Err(Error::RankDeficient {
                index: j,
                pivot: r[(j, j)].norm(),
            });
        }
    }

    // Q = H_0 H_1 ... H_{n-1}, accumulated backwards onto the identity.
    let mut q = ComplexMatrix::identity(n);
    for j in (0..n).rev() {
        let v = &reflectors[j];
        for c in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (t, vi) in v.iter().enumerate() {
                dot += vi.conj() * q[(j + t, c)];
            }
            let dot2 = dot * 2.0;
            if dot2.re == 0.0 && dot2.im == 0.0 {
                continue;
            }
            for (t, vi) in v.iter().enumerate() {
                q[(j + t, c)] -= vi * dot2;
            }
        }
    }

    // Move diagonal phases of R into Q.
    for j in 0..n {
        let ph = unit_phase(r[(j, j)]);
        for i in 0..n {
            q[(i, j)] *= ph;
        }
        let ph_conj = ph.conj();
        for c in j..n {
            r[(j, c)] *= ph_conj;
        }
        r[(j, j)] = C64::new(r[(j, j)].norm(), 0.0);
    }
    Ok((q, r))
}

/// RQ factorization `M = S · U*` of an `m`×`n` matrix with `m ≤ n`.
///
/// Rows are orthogonalized by Gram–Schmidt from the bottom row upwards (with
/// one reorthogonalization pass). `S` is `m`×`m` upper triangular, `U*` has
/// orthonormal rows and `U*[i,i]` is real and nonnegative.
pub fn rq_positive(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows > cols {
        return Err(Error::DimensionMismatch(format!(
            "rq_positive needs rows <= cols, got {rows}x{cols}"
        )));
    }
    let scale = m.frobenius_norm();
    let mut s = ComplexMatrix::zeros(rows, rows);
    let mut ustar = ComplexMatrix::zeros(rows, cols);

    for i in (0..rows).rev() {
        let mut v: Vec<C64> = m.row(i).to_vec();
        for _pass in 0..2 {
            for j in i + 1..rows {
                let u = ustar.row(j);
                let proj: C64 = v.iter().zip(u).map(|(a, b)| a * b.conj()).sum();
                s[(i, j)] += proj;
                for (a, b) in v.iter_mut().zip(u) {
                    *a -= proj * b;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < PIVOT_TOL * scale || norm == 0.0 {
            return Err(Error::RankDeficient {
                index: i,
                pivot: norm,
            });
        }
        // Choose the diagonal of S so that U*[i,i] = |v_i| / norm >= 0.
        let diag = unit_phase(v[i]) * norm;
        s[(i, i)] = diag;
        let inv = diag.inv();
        for (dst, a) in ustar.row_mut(i).iter_mut().zip(&v) {
            *dst = a * inv;
        }
    }
    Ok((s, ustar))
}
