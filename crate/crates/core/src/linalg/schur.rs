//! Complex Schur form via Hessenberg reduction and shifted QR sweeps.

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// `M = V T V*` with `V` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub unitary: ComplexMatrix,
    pub triangular: ComplexMatrix,
}

impl SchurForm {
    /// Diagonal of the triangular factor, i.e. the eigenvalues.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.triangular.diag()
    }

    /// ‖V T V* − M‖_F.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        let rec = self
            .unitary
            .matmul(&self.triangular)
            .matmul(&self.unitary.adjoint());
        (&rec - m).frobenius_norm()
    }
}

const DEFLATION_TOL: f64 = 1e-14;

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with `c` real,
/// chosen so that `G [f; g] = [r; 0]`.
#[derive(Clone, Copy, Debug)]
struct Givens {
    c: f64,
    s: C64,
}

impl Givens {
    fn new(f: C64, g: C64) -> Self {
        let fa = f.norm();
        let ga = g.norm();
        if ga == 0.0 {
            return Self {
                c: 1.0,
                s: C64::new(0.0, 0.0),
            };
        }
        if fa == 0.0 {
            return Self {
                c: 0.0,
                s: g.conj() / ga,
            };
        }
        let norm = fa.hypot(ga);
        let phase = f / fa;
        Self {
            c: fa / norm,
            s: phase * g.conj() / norm,
        }
    }

    /// Rows `i`, `j` ← G applied from the left, over columns `cols`.
    fn rotate_rows(&self, h: &mut ComplexMatrix, i: usize, j: usize, cols: std::ops::Range<usize>) {
        for col in cols {
            let a = h[(i, col)];
            let b = h[(j, col)];
            h[(i, col)] = a * self.c + self.s * b;
            h[(j, col)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Columns `i`, `j` ← multiplied by G* from the right, over rows `rows`.
    fn rotate_cols(&self, h: &mut ComplexMatrix, i: usize, j: usize, rows: std::ops::Range<usize>) {
        for row in rows {
            let a = h[(row, i)];
            let b = h[(row, j)];
            h[(row, i)] = a * self.c + self.s.conj() * b;
            h[(row, j)] = -self.s * a + b * self.c;
        }
    }
}

/// Householder reduction to upper Hessenberg form; returns `(H, Q)` with
/// `M = Q H Q*`.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v_norm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= v_norm;
        }
        // H <- P H, P = I - 2 v v* acting on rows k+1..n
        for c in 0..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * h[(k + 1 + t, c)])
                .sum::<C64>()
                * 2.0;
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, c)] -= vi * dot;
            }
        }
        // H <- H P, and Q <- Q P
        for target in [&mut h, &mut q] {
            for r in 0..n {
                let dot: C64 = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| target[(r, k + 1 + t)] * vi)
                    .sum::<C64>()
                    * 2.0;
                for (t, vi) in v.iter().enumerate() {
                    target[(r, k + 1 + t)] -= dot * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition.
///
/// Hessenberg reduction followed by single-shift QR sweeps with Wilkinson
/// shifts. A subdiagonal entry is deflated once it drops below
/// `1e-14 · (|H[i-1,i-1]| + |H[i,i]|)`. Fails with `NoConvergence` after
/// `100·n` sweeps.
pub fn schur(m: &ComplexMatrix) -> Result<SchurForm> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "schur needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let n = m.rows();
    let (mut h, mut v) = hessenberg(m);
    if n == 1 {
        return Ok(SchurForm {
            unitary: v,
            triangular: h,
        });
    }
    let h_norm = h.frobenius_norm();
    let max_sweeps = 100 * n;
    let mut sweeps = 0usize;
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;

    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag_scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if diag_scale == 0.0 {
                diag_scale = h_norm;
            }
            if sub <= DEFLATION_TOL * diag_scale {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }

        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence { iterations: sweeps - 1 });
        }
        iter_since_deflation += 1;

        let shift = if iter_since_deflation.is_multiple_of(10) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Bulge chase over the active block [lo, hi].
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let g = Givens::new(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            g.rotate_rows(&mut h, k, k + 1, col_start..n);
            let row_end = (k + 2).min(hi) + 1;
            g.rotate_cols(&mut h, k, k + 1, 0..row_end);
            g.rotate_cols(&mut v, k, k + 1, 0..n);
            if k > lo {
                h[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }

    Ok(SchurForm {
        unitary: v,
        triangular: h.upper_triangle(),
    })
}

/// Eigenvalues as the diagonal of the Schur factor; order unspecified.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    Ok(schur(m)?.eigenvalues())
}
