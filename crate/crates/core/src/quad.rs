//! Adaptive Gauss–Kronrod quadrature and a log-space integrator for
//! log-concave integrands on the real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Evaluation budget per integration call.
pub const NODE_BUDGET: usize = 1_000_000;

// 15-point Kronrod nodes (non-negative half) and weights; the 7-point Gauss
// rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Globally adaptive G7/K15 quadrature of `f` over a finite `[a, b]`,
/// bisecting the worst segment until the summed error estimate is below
/// `rel_tol · |I| + abs_tol`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    assert!(a.is_finite() && b.is_finite(), "finite interval required");
    let mut evals = 0usize;
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&mut f, a, b);
    evals += 15;
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if total_err <= rel_tol * total.abs() + abs_tol {
            return Ok(total);
        }
        if evals + 30 > NODE_BUDGET {
            return Err(Error::QuadratureFailure(format!(
                "node budget exhausted on [{a}, {b}]: value {total:.6e}, error {total_err:.3e}"
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in floating point.
            return Err(Error::QuadratureFailure(format!(
                "interval collapsed near {mid}: error {total_err:.3e}"
            )));
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        // Resum occasionally to shed accumulated cancellation error.
        if evals % 3000 < 30 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Depth below the peak (in natural-log units) at which the tails are cut.
const TAIL_DEPTH: f64 = 80.0;

/// `ln ∫_lo^hi exp(h(w)) dw` for a concave `h` (i.e. a log-concave
/// integrand). `lo`/`hi` may be infinite; `h` may return `-inf` near the
/// boundary of its support.
///
/// The mode is located by golden-section search, the tails are truncated
/// where the integrand falls `e^{-80}` below its peak, and the rescaled
/// integrand `exp(h − h_max)` is integrated adaptively on each side of the
/// mode.
pub fn ln_integrate_log_concave<H: FnMut(f64) -> f64>(
    mut h: H,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(lo < hi) {
        return Ok(f64::NEG_INFINITY);
    }
    let mode = find_mode(&mut h, lo, hi)?;
    let h_max = h(mode);
    if !h_max.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "integrand peak is not finite (h = {h_max}) on ({lo}, {hi})"
        )));
    }
    let left = tail_cut(&mut h, mode, lo, h_max, -1.0);
    let right = tail_cut(&mut h, mode, hi, h_max, 1.0);
    let mut g = |w: f64| {
        let v = h(w);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            (v - h_max).exp()
        }
    };
    let left_part = integrate_adaptive(&mut g, left, mode, rel_tol, 0.0)?;
    let right_part = integrate_adaptive(&mut g, mode, right, rel_tol, 0.0)?;
    let total = left_part + right_part;
    if !(total > 0.0) {
        return Err(Error::QuadratureFailure(format!(
            "non-positive integral {total:.3e} on ({lo}, {hi})"
        )));
    }
    Ok(h_max + total.ln())
}

fn clip(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

fn find_mode<H: FnMut(f64) -> f64>(h: &mut H, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        // Start somewhere finite inside the domain, then walk uphill with
        // doubling steps until h decreases; concavity brackets the peak.
        let mut x0 = match (lo.is_finite(), hi.is_finite()) {
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            _ => 0.0,
        };
        if h(x0) == f64::NEG_INFINITY {
            let probe = (0..40)
                .flat_map(|j| {
                    let d = 2f64.powi(j - 10);
                    [x0 + d, x0 - d]
                })
                .map(|x| clip(x, lo, hi))
                .find(|&x| x > lo && x < hi && h(x) > f64::NEG_INFINITY);
            match probe {
                Some(x) => x0 = x,
                None => {
                    return Err(Error::QuadratureFailure(format!(
                        "integrand vanishes everywhere probed in ({lo}, {hi})"
                    )))
                }
            }
        }
        let f0 = h(x0);
        let delta = 1e-3;
        let dir = if h(clip(x0 + delta, lo, hi)) >= f0 { 1.0 } else { -1.0 };
        let mut prev = x0;
        let mut x = x0;
        let mut fx = f0;
        let mut step = 1.0;
        let far = loop {
            let next = clip(x + dir * step, lo, hi);
            let f_next = h(next);
            if f_next < fx || next == lo || next == hi || step > 1e6 {
                break next;
            }
            prev = x;
            x = next;
            fx = f_next;
            step *= 2.0;
        };
        if dir > 0.0 {
            (prev, far)
        } else {
            (far, prev)
        }
    };
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "could not bracket the integrand peak in ({lo}, {hi})"
        )));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = h(c);
    let mut fd = h(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d);
        }
    }
    Ok(0.5 * (a + b))
}

fn tail_cut<H: FnMut(f64) -> f64>(h: &mut H, mode: f64, bound: f64, h_max: f64, dir: f64) -> f64 {
    let mut step = 0.25;
    let mut x = mode;
    for _ in 0..2000 {
        let next = x + dir * step;
        if (dir > 0.0 && next >= bound) || (dir < 0.0 && next <= bound) {
            return bound;
        }
        x = next;
        if h(x) < h_max - TAIL_DEPTH {
            return x;
        }
        step *= 1.5;
    }
    x
}
