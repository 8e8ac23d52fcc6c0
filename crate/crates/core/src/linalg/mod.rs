//! Dense complex linear algebra: QR/RQ with positive-diagonal conventions,
//! complex Schur form, products with inverted factors and the periodic
//! Schur decomposition of a matrix chain.

mod gschur;
mod lu;
mod matrix;
mod qr;
mod schur;

pub use gschur::{generalized_schur, signed_power, GSchurForm};
pub use lu::{product_with_inverses, solve_upper_left, solve_upper_right, Lu};
pub use matrix::{ComplexMatrix, C64};
pub use qr::{qr_positive, rq_positive, PIVOT_TOL};
pub use schur::{eigenvalues, schur, SchurForm};

/// Greedy nearest-neighbour matching of two eigenvalue multisets.
///
/// Both lists are sorted lexicographically by (Re, Im); each element of `a`
/// then claims the closest unclaimed element of `b`. Returns the maximum
/// relative mismatch `|a_i − b_σ(i)| / max(|a_i|, |b_σ(i)|, floor)`.
pub fn max_matched_relative_error(a: &[C64], b: &[C64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets of different size");
    let sort = |v: &[C64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    };
    let a = sort(a);
    let b = sort(b);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in &a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        used[idx] = true;
        let scale = x.norm().max(b[idx].norm()).max(floor);
        worst = worst.max(dist / scale);
    }
    worst
}
