//! Generalized (periodic) Schur decomposition of a matrix chain.

use super::lu::{product_with_inverses, solve_upper_left, Lu};
use super::matrix::{ComplexMatrix, C64};
use super::qr::rq_positive;
use super::schur::schur;
use crate::error::{Error, Result};

/// `M_i = U_i R_i U_{i+1}*` for `i = 1..k`, indices cyclic, where
/// `M_i = A_i^{ε_i}`.
#[derive(Debug, Clone)]
pub struct GSchurForm {
    pub unitaries: Vec<ComplexMatrix>,
    pub triangulars: Vec<ComplexMatrix>,
}

impl GSchurForm {
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// `U_i R_i U_{i+1}*` (0-based `i`).
    pub fn reconstruct(&self, i: usize) -> ComplexMatrix {
        let next = (i + 1) % self.len();
        self.unitaries[i]
            .matmul(&self.triangulars[i])
            .matmul(&self.unitaries[next].adjoint())
    }

    /// Products of diagonal entries across the chain, position by position.
    pub fn diagonal_products(&self) -> Vec<C64> {
        let n = self.triangulars[0].rows();
        (0..n)
            .map(|j| self.triangulars.iter().map(|r| r[(j, j)]).product())
            .collect()
    }
}

/// Computes `U_1..U_k`, `R_1..R_k` for the chain `A_1^{ε_1} ⋯ A_k^{ε_k}`.
///
/// `P = M_1⋯M_k` is put in Schur form `P = U_1 T U_1*`; then for
/// `i = 1..k-1` the RQ factorization `U_i* M_i = R_i U_{i+1}*` fixes the next
/// unitary, and finally `R_k = (R_1⋯R_{k-1})⁻¹ T` by back-substitution.
/// Products `U_i* A_i⁻¹` for inverted factors are obtained by LU solves.
pub fn generalized_schur(factors: &[ComplexMatrix], signs: &[i8]) -> Result<GSchurForm> {
    let k = factors.len();
    if k == 0 || signs.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{k} factors but {} signs",
            signs.len()
        )));
    }
    let n = factors[0].rows();
    if factors.iter().any(|a| a.rows() != n || a.cols() != n) {
        return Err(Error::DimensionMismatch(
            "generalized Schur needs square factors of equal size".into(),
        ));
    }

    let p = product_with_inverses(factors, signs)?;
    let s = schur(&p)?;
    let t = s.triangular;
    let mut unitaries = vec![s.unitary];
    let mut triangulars = Vec::with_capacity(k);

    for i in 0..k - 1 {
        let u_adj = unitaries[i].adjoint();
        let lhs = match signs[i] {
            1 => u_adj.matmul(&factors[i]),
            _ => Lu::factor(&factors[i])?.solve_right(&u_adj),
        };
        let (r, next_adj) = rq_positive(&lhs)?;
        triangulars.push(r);
        unitaries.push(next_adj.adjoint());
    }

    let last = if k == 1 {
        t
    } else {
        let mut prefix = triangulars[0].clone();
        for r in &triangulars[1..] {
            prefix = prefix.matmul(r).upper_triangle();
        }
        solve_upper_left(&prefix, &t)?.upper_triangle()
    };
    triangulars.push(last);

    Ok(GSchurForm {
        unitaries,
        triangulars,
    })
}

/// `A^{ε}` formed explicitly (LU-based for ε = −1). Used to measure
/// reconstruction residuals.
pub fn signed_power(a: &ComplexMatrix, sign: i8) -> Result<ComplexMatrix> {
    product_with_inverses(std::slice::from_ref(a), &[sign])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_is_plain_schur() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let g = generalized_schur(std::slice::from_ref(&a), &[1]).unwrap();
        assert_eq!(g.len(), 1);
        let rec = g.reconstruct(0);
        assert!((&rec - &a).frobenius_norm() < 1e-13);
        let mut d: Vec<f64> = g.diagonal_products().iter().map(|z| z.re).collect();
        d.sort_by(f64::total_cmp);
        let disc = 33f64.sqrt();
        assert!((d[0] - (5.0 - disc) / 2.0).abs() < 1e-13);
        assert!((d[1] - (5.0 + disc) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn two_real_factors_with_inverse() {
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let g = generalized_schur(&[a.clone(), b.clone()], &[-1, 1]).unwrap();
        let m1 = signed_power(&a, -1).unwrap();
        assert!((&g.reconstruct(0) - &m1).frobenius_norm() < 1e-12);
        assert!((&g.reconstruct(1) - &b).frobenius_norm() < 1e-12);
        for r in &g.triangulars {
            assert_eq!(r.strictly_lower_norm(), 0.0);
        }
    }
}
