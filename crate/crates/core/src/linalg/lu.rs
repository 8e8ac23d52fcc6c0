//! LU with partial pivoting, used to apply inverse factors without forming
//! explicit inverses.

use super::matrix::{ComplexMatrix, C64};
use super::qr::PIVOT_TOL;
use crate::error::{Error, Result};

/// `P A = L U`, packed: strictly lower part holds `L` (unit diagonal).
#[derive(Debug, Clone)]
pub struct Lu {
    packed: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let tol = PIVOT_TOL * a.frobenius_norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_mag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag < tol || pivot_mag == 0.0 {
                return Err(Error::Singular {
                    index: k,
                    pivot: pivot_mag,
                });
            }
            if p != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(p, c)];
                    lu[(p, c)] = tmp;
                }
                perm.swap(k, p);
            }
            let inv_pivot = lu[(k, k)].inv();
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[(k, c)];
                    lu[(i, c)] -= factor * u;
                }
            }
        }
        Ok(Self { packed: lu, perm })
    }

    fn n(&self) -> usize {
        self.perm.len()
    }

    /// `A⁻¹ B`.
    pub fn solve_left(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n();
        assert_eq!(b.rows(), n);
        let cols = b.cols();
        let mut x = ComplexMatrix::zeros(n, cols);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        // L y = P b
        for i in 0..n {
            for k in 0..i {
                let l = self.packed[(i, k)];
                if l.re == 0.0 && l.im == 0.0 {
                    continue;
                }
                for c in 0..cols {
                    let v = x[(k, c)];
                    x[(i, c)] -= l * v;
                }
            }
        }
        // U x = y
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.packed[(i, k)];
                for c in 0..cols {
                    let v = x[(k, c)];
                    x[(i, c)] -= u * v;
                }
            }
            let inv = self.packed[(i, i)].inv();
            for c in 0..cols {
                x[(i, c)] *= inv;
            }
        }
        x
    }

    /// `B A⁻¹`, computed row by row from `x (L U) = b P`.
    pub fn solve_right(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n();
        assert_eq!(b.cols(), n);
        let rows = b.rows();
        let mut out = ComplexMatrix::zeros(rows, n);
        let mut z = vec![C64::new(0.0, 0.0); n];
        for r in 0..rows {
            // With P A = L U:  X A = B  <=>  (X P^T) L U = B.
            // Solve w U = b (forward over columns), then y L = w (backward).
            let b_row = b.row(r);
            for j in 0..n {
                let mut acc = b_row[j];
                for k in 0..j {
                    acc -= z[k] * self.packed[(k, j)];
                }
                z[j] = acc / self.packed[(j, j)];
            }
            for j in (0..n).rev() {
                let mut acc = z[j];
                for k in j + 1..n {
                    acc -= z[k] * self.packed[(k, j)];
                }
                z[j] = acc;
            }
            // X = Y P, i.e. X[:, perm[j]] = Y[:, j].
            let out_row = out.row_mut(r);
            for (j, &p) in self.perm.iter().enumerate() {
                out_row[p] = z[j];
            }
        }
        out
    }
}

/// `A_1^{ε_1} ⋯ A_k^{ε_k}`, multiplied left to right. Inverted factors are
/// applied through LU solves.
pub fn product_with_inverses(factors: &[ComplexMatrix], signs: &[i8]) -> Result<ComplexMatrix> {
    if factors.is_empty() || factors.len() != signs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors but {} signs",
            factors.len(),
            signs.len()
        )));
    }
    let mut acc: Option<ComplexMatrix> = None;
    for (a, &sign) in factors.iter().zip(signs) {
        let next = match sign {
            1 => match acc {
                None => a.clone(),
                Some(p) => {
                    if p.cols() != a.rows() {
                        return Err(Error::DimensionMismatch(format!(
                            "cannot multiply {}x{} by {}x{}",
                            p.rows(),
                            p.cols(),
                            a.rows(),
                            a.cols()
                        )));
                    }
                    p.matmul(a)
                }
            },
            -1 => {
                let lu = Lu::factor(a)?;
                match acc {
                    None => lu.solve_left(&ComplexMatrix::identity(a.rows())),
                    Some(p) => {
                        if p.cols() != a.rows() {
                            return Err(Error::DimensionMismatch(format!(
                                "cannot multiply {}x{} by inverse of {}x{}",
                                p.rows(),
                                p.cols(),
                                a.rows(),
                                a.cols()
                            )));
                        }
                        lu.solve_right(&p)
                    }
                }
            }
            other => {
                return Err(Error::InvalidSpec(format!("sign must be +1 or -1, got {other}")));
            }
        };
        acc = Some(next);
    }
    Ok(acc.expect("non-empty"))
}

/// Solves `X R = B` for upper triangular `R` (right back-substitution).
pub fn solve_upper_right(b: &ComplexMatrix, r: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = r.rows();
    assert_eq!(b.cols(), n);
    let tol = PIVOT_TOL * r.frobenius_norm();
    for i in 0..n {
        if r[(i, i)].norm() < tol || r[(i, i)].norm() == 0.0 {
            return Err(Error::Singular {
                index: i,
                pivot: r[(i, i)].norm(),
            });
        }
    }
    let mut x = ComplexMatrix::zeros(b.rows(), n);
    for row in 0..b.rows() {
        for j in 0..n {
            let mut acc = b[(row, j)];
            for k in 0..j {
                acc -= x[(row, k)] * r[(k, j)];
            }
            x[(row, j)] = acc / r[(j, j)];
        }
    }
    Ok(x)
}

/// Solves `R X = B` for upper triangular `R` (left back-substitution).
pub fn solve_upper_left(r: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = r.rows();
    assert_eq!(b.rows(), n);
    let tol = PIVOT_TOL * r.frobenius_norm();
    let mut x = b.clone();
    for i in (0..n).rev() {
        let d = r[(i, i)];
        if d.norm() < tol || d.norm() == 0.0 {
            return Err(Error::Singular {
                index: i,
                pivot: d.norm(),
            });
        }
        for k in i + 1..n {
            let rik = r[(i, k)];
            for c in 0..b.cols() {
                let v = x[(k, c)];
                x[(i, c)] -= rik * v;
            }
        }
        let inv = d.inv();
        for c in 0..b.cols() {
            x[(i, c)] *= inv;
        }
    }
    Ok(x)
}
