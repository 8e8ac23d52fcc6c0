//! Radial weight functions, moment sequences and the determinantal kernel.
//!
//! Every weight here depends on `z` only through `u = |z|²`. The weight of a
//! product ensemble is the multiplicative convolution of one density per
//! factor, each written in the squared-radius variable:
//!
//! | factor                 | density in `u`                         |
//! |------------------------|----------------------------------------|
//! | Ginibre, ε = +1        | `e^{-u}`                               |
//! | Ginibre, ε = −1        | `u^{-(n+1)} e^{-1/u}`                  |
//! | rectangular, `d`       | `u^d e^{-u}`                           |
//! | truncated, ε = +1, `ν` | `(1-u)^{ν-1}` on (0, 1)                |
//! | truncated, ε = −1, `ν` | `u^{-(m+1)} (1-1/u)^{ν-1}` on (1, ∞)   |
//!
//! The inverted-factor rows come from substituting `u = 1/v` in the
//! non-inverted density including the extra `|x|^{2(n-1)}` (resp.
//! `|x|^{2(m-1)}`) power and the Jacobian `v⁻²`.
//!
//! Constants such as `(2π)^k` never appear: moments are exposed as ratios
//! `m_a / m_0`, and the kernel is normalized so that `∫ρ₁ = N`.

use std::cell::Cell;

use crate::ensembles::{EnsembleKind, EnsembleSpec, Sign};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quad::ln_integrate_log_concave;
use crate::special::{ln_beta, ln_gamma};

/// Relative tolerance of the outermost convolution level. Each nested level
/// is two orders of magnitude tighter, floored at 1e-13.
pub const CONVOLUTION_TOL: f64 = 1e-9;

/// Largest factor count accepted by the convolution evaluator.
pub const MAX_CONVOLUTION_FACTORS: usize = 4;

/// Per-factor radial density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorWeight {
    GinibrePlus,
    GinibreMinus { n: usize },
    RectPlus { d: usize },
    TruncPlus { nu: usize },
    TruncMinus { nu: usize, m: usize },
}

impl FactorWeight {
    /// Factor densities of an ensemble, in chain order.
    pub fn for_spec(spec: &EnsembleSpec) -> Vec<FactorWeight> {
        match spec.kind {
            EnsembleKind::GinibreProduct => spec
                .signs
                .iter()
                .map(|s| match s {
                    Sign::Plus => FactorWeight::GinibrePlus,
                    Sign::Minus => FactorWeight::GinibreMinus { n: spec.n },
                })
                .collect(),
            EnsembleKind::RectangularProduct => spec
                .dims
                .iter()
                .map(|&d| FactorWeight::RectPlus { d: d - spec.n })
                .collect(),
            EnsembleKind::TruncatedUnitaryProduct => spec
                .dims
                .iter()
                .zip(spec.signs.iter())
                .map(|(&n_j, s)| {
                    let nu = n_j - spec.n;
                    match s {
                        Sign::Plus => FactorWeight::TruncPlus { nu },
                        Sign::Minus => FactorWeight::TruncMinus { nu, m: spec.n },
                    }
                })
                .collect(),
        }
    }

    /// Open support `(lo, hi)` in `u`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            FactorWeight::TruncPlus { .. } => (0.0, 1.0),
            FactorWeight::TruncMinus { .. } => (1.0, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// `ln f(u)` evaluated at `u = e^w`.
    pub fn ln_density_log(&self, w: f64) -> f64 {
        let (lo, hi) = self.support();
        let u = w.exp();
        if u <= lo || u >= hi {
            return f64::NEG_INFINITY;
        }
        match *self {
            FactorWeight::GinibrePlus => -u,
            FactorWeight::GinibreMinus { n } => -(n as f64 + 1.0) * w - (-w).exp(),
            FactorWeight::RectPlus { d } => {
                if d == 0 {
                    -u
                } else {
                    d as f64 * w - u
                }
            }
            FactorWeight::TruncPlus { nu } => {
                if nu == 1 {
                    0.0
                } else {
                    // ln(1 - e^w), w < 0
                    (nu as f64 - 1.0) * (-w.exp_m1()).ln()
                }
            }
            FactorWeight::TruncMinus { nu, m } => {
                let power = -(m as f64 + 1.0) * w;
                if nu == 1 {
                    power
                } else {
                    // ln(1 - e^{-w}), w > 0
                    power + (nu as f64 - 1.0) * (-(-w).exp_m1()).ln()
                }
            }
        }
    }

    /// `ln ∫ u^a f(u) du` in closed form, or `None` when it diverges.
    pub fn ln_moment(&self, a: usize) -> Option<f64> {
        let a_f = a as f64;
        match *self {
            FactorWeight::GinibrePlus => Some(ln_gamma(a_f + 1.0)),
            FactorWeight::GinibreMinus { n } => (a < n).then(|| ln_gamma((n - a) as f64)),
            FactorWeight::RectPlus { d } => Some(ln_gamma((d + a) as f64 + 1.0)),
            FactorWeight::TruncPlus { nu } => Some(ln_beta(a_f + 1.0, nu as f64)),
            FactorWeight::TruncMinus { nu, m } => (a < m).then(|| ln_beta((m - a) as f64, nu as f64)),
        }
    }
}

/// Support of the product of independent factors, in `u`.
fn product_support(factors: &[FactorWeight]) -> (f64, f64) {
    factors.iter().fold((1.0, 1.0), |(lo, hi), f| {
        let (l, h) = f.support();
        (lo * l, hi * h)
    })
}

/// Evaluator for `W(u)`, the radial weight of an ensemble.
#[derive(Debug, Clone)]
pub struct RadialWeight {
    factors: Vec<FactorWeight>,
    rel_tol: f64,
}

impl RadialWeight {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        let factors = FactorWeight::for_spec(spec);
        if factors.len() > MAX_CONVOLUTION_FACTORS {
            return Err(Error::Unsupported(format!(
                "radial weight limited to k <= {MAX_CONVOLUTION_FACTORS}, got k = {}",
                factors.len()
            )));
        }
        Ok(Self {
            factors,
            rel_tol: CONVOLUTION_TOL,
        })
    }

    pub fn factors(&self) -> &[FactorWeight] {
        &self.factors
    }

    /// Support of `W` in `u`.
    pub fn support(&self) -> (f64, f64) {
        product_support(&self.factors)
    }

    /// `ln W(e^t)`.
    pub fn ln_weight_log(&self, t: f64) -> Result<f64> {
        ln_convolution(&self.factors, t, self.rel_tol)
    }

    /// `W(u)` for `u > 0`.
    pub fn weight(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::DomainError {
                value: u,
                domain: "u > 0",
            });
        }
        Ok(self.ln_weight_log(u.ln())?.exp())
    }

    /// Closed-form `ln ∫ u^a W(u) du`.
    pub fn ln_moment_closed(&self, a: usize) -> Option<f64> {
        self.factors.iter().map(|f| f.ln_moment(a)).sum()
    }

    /// `ln ∫ u^a W(u) du` by quadrature over `t = ln u`.
    pub fn ln_moment_numeric(&self, a: usize) -> Result<f64> {
        let (lo, hi) = self.support();
        let failure: Cell<Option<Error>> = Cell::new(None);
        let a1 = a as f64 + 1.0;
        let result = ln_integrate_log_concave(
            |t| match self.ln_weight_log(t) {
                Ok(v) => a1 * t + v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NEG_INFINITY
                }
            },
            lo.ln(),
            hi.ln(),
            self.rel_tol,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        result
    }
}

fn ln_convolution(factors: &[FactorWeight], t: f64, tol: f64) -> Result<f64> {
    let (first, rest) = factors.split_first().expect("at least one factor");
    if rest.is_empty() {
        return Ok(first.ln_density_log(t));
    }
    let (l1, h1) = first.support();
    let (lr, hr) = product_support(rest);
    // s in supp(first) and u/s in supp(rest), with s = e^w, u = e^t.
    let lo = l1.ln().max(t - hr.ln());
    let hi = h1.ln().min(t - lr.ln());
    if !(lo < hi) {
        return Ok(f64::NEG_INFINITY);
    }
    let inner_tol = (tol * 1e-2).max(1e-13);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let result = ln_integrate_log_concave(
        |w| {
            let head = first.ln_density_log(w);
            if head == f64::NEG_INFINITY {
                return head;
            }
            match ln_convolution(rest, t - w, inner_tol) {
                Ok(v) => head + v,
                Err(e) => {
                    failure.set(Some(e));
                    f64::NEG_INFINITY
                }
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    result
}

/// Number of polynomial terms (points per draw).
pub fn term_count(spec: &EnsembleSpec) -> usize {
    spec.point_count()
}

/// `ln(m_a / m_0)` in closed form.
pub fn ln_moment_ratio(spec: &EnsembleSpec, a: usize) -> Result<f64> {
    let n_terms = term_count(spec);
    if a >= n_terms {
        return Err(Error::OutOfRange {
            index: a,
            reason: format!("moment index must be below N = {n_terms}"),
        });
    }
    let af = a as f64;
    let value = match spec.kind {
        EnsembleKind::GinibreProduct => {
            let n = spec.n as f64;
            let p = spec.signs.plus_count() as f64;
            let q = spec.k() as f64 - p;
            p * ln_gamma(af + 1.0) + q * (ln_gamma(n - af) - ln_gamma(n))
        }
        EnsembleKind::RectangularProduct => spec
            .dims
            .iter()
            .map(|&nj| {
                let d = (nj - spec.n) as f64;
                ln_gamma(d + af + 1.0) - ln_gamma(d + 1.0)
            })
            .sum(),
        EnsembleKind::TruncatedUnitaryProduct => {
            let m = spec.n as f64;
            spec.dims
                .iter()
                .zip(spec.signs.iter())
                .map(|(&nj, s)| {
                    let nu = nj as f64 - m;
                    match s {
                        Sign::Plus => ln_beta(af + 1.0, nu) - ln_beta(1.0, nu),
                        Sign::Minus => ln_beta(m - af, nu) - ln_beta(m, nu),
                    }
                })
                .sum()
        }
    };
    Ok(value)
}

/// `m_a / m_0` in closed form.
pub fn moment_ratio(spec: &EnsembleSpec, a: usize) -> Result<f64> {
    Ok(ln_moment_ratio(spec, a)?.exp())
}

/// `m_a / m_0` by numerical integration of the convolved weight.
pub fn moment_ratio_numeric(spec: &EnsembleSpec, a: usize) -> Result<f64> {
    let n_terms = term_count(spec);
    if a >= n_terms {
        return Err(Error::OutOfRange {
            index: a,
            reason: format!("moment index must be below N = {n_terms}"),
        });
    }
    if a == 0 {
        return Ok(1.0);
    }
    let w = RadialWeight::new(spec)?;
    Ok((w.ln_moment_numeric(a)? - w.ln_moment_numeric(0)?).exp())
}

/// `W(u)` for an ensemble.
pub fn radial_weight(spec: &EnsembleSpec, u: f64) -> Result<f64> {
    RadialWeight::new(spec)?.weight(u)
}

const CACHE_NODES: usize = 4096;

/// Cubic (four-point Lagrange) interpolation table of `ln W` on a uniform
/// grid in `t = ln u`.
#[derive(Debug, Clone)]
struct LogGridCache {
    t0: f64,
    step: f64,
    values: Vec<f64>,
}

impl LogGridCache {
    fn build(weight: &RadialWeight, t_min: f64, t_max: f64) -> Result<Self> {
        let step = (t_max - t_min) / (CACHE_NODES - 1) as f64;
        let values = (0..CACHE_NODES)
            .map(|i| weight.ln_weight_log(t_min + step * i as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t0: t_min,
            step,
            values,
        })
    }

    fn get(&self, t: f64) -> Option<f64> {
        let x = (t - self.t0) / self.step;
        if !(x >= 1.0 && x <= (CACHE_NODES - 3) as f64) {
            return None;
        }
        let i = (x.floor() as usize).min(CACHE_NODES - 3);
        let s = x - i as f64;
        let y = &self.values[i - 1..i + 3];
        if y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        // Lagrange basis on nodes -1, 0, 1, 2.
        let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        Some(l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3])
    }
}

/// Kernel of the determinantal process of one ensemble.
#[derive(Debug, Clone)]
pub struct KernelModel {
    spec: EnsembleSpec,
    n_terms: usize,
    ln_m0: f64,
    ln_ratios: Vec<f64>,
    weight: RadialWeight,
    cache: Option<LogGridCache>,
}

impl KernelModel {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        let weight = RadialWeight::new(spec)?;
        let n_terms = term_count(spec);
        let ln_m0 = weight.ln_moment_closed(0).ok_or_else(|| {
            Error::OutOfRange {
                index: 0,
                reason: "total mass of the weight diverges".into(),
            }
        })?;
        let ln_ratios = (0..n_terms)
            .map(|a| ln_moment_ratio(spec, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            n_terms,
            ln_m0,
            ln_ratios,
            weight,
            cache: None,
        })
    }

    /// Precomputes `ln W` on a 4096-node grid over `u ∈ [u_min, u_max]`;
    /// evaluations outside the grid fall back to direct quadrature.
    pub fn with_cache(mut self, u_min: f64, u_max: f64) -> Result<Self> {
        if self.weight.factors().len() > 1 {
            self.cache = Some(LogGridCache::build(&self.weight, u_min.ln(), u_max.ln())?);
        }
        Ok(self)
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn term_count(&self) -> usize {
        self.n_terms
    }

    /// `m_r / m_0` for `r < N`.
    pub fn moment_ratios(&self) -> Vec<f64> {
        self.ln_ratios.iter().map(|v| v.exp()).collect()
    }

    /// `ln W(u)`, with `u = 0` handled as the limit from the right.
    pub fn ln_weight(&self, u: f64) -> Result<f64> {
        if self.weight.factors().len() == 1 {
            let f = self.weight.factors()[0];
            if u == 0.0 {
                return Ok(match f {
                    FactorWeight::GinibrePlus | FactorWeight::TruncPlus { .. } => 0.0,
                    FactorWeight::RectPlus { d: 0 } => 0.0,
                    _ => f64::NEG_INFINITY,
                });
            }
            return Ok(f.ln_density_log(u.ln()));
        }
        let (lo, hi) = self.weight.support();
        if u >= hi || u.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        let u = if u == 0.0 && lo == 0.0 { f64::MIN_POSITIVE } else { u };
        if u <= lo {
            return Ok(f64::NEG_INFINITY);
        }
        let t = u.ln();
        if let Some(v) = self.cache.as_ref().and_then(|c| c.get(t)) {
            return Ok(v);
        }
        self.weight.ln_weight_log(t)
    }

    /// `K(x, y) = (1/π) √(W(|x|²) W(|y|²)) Σ_{r<N} (x ȳ)^r / m_r`.
    pub fn kernel(&self, x: C64, y: C64) -> Result<C64> {
        let lw = 0.5 * (self.ln_weight(x.norm_sqr())? + self.ln_weight(y.norm_sqr())?);
        if lw == f64::NEG_INFINITY {
            return Ok(C64::new(0.0, 0.0));
        }
        let prod = x * y.conj();
        let (ln_sum, phase_sum) = if prod.norm() == 0.0 {
            (0.0, C64::new(1.0, 0.0))
        } else {
            let ln_r = prod.norm().ln();
            let theta = prod.arg();
            let ln_terms: Vec<f64> = self
                .ln_ratios
                .iter()
                .enumerate()
                .map(|(r, lr)| r as f64 * ln_r - lr)
                .collect();
            let peak = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: C64 = ln_terms
                .iter()
                .enumerate()
                .map(|(r, l)| C64::from_polar((l - peak).exp(), r as f64 * theta))
                .sum();
            (peak, s)
        };
        let ln_mag = lw - self.ln_m0 + ln_sum - std::f64::consts::PI.ln();
        Ok(phase_sum * ln_mag.exp())
    }

    /// ρ₁(z) = K(z, z).
    pub fn one_point_density(&self, z: C64) -> Result<f64> {
        Ok(self.kernel(z, z)?.re.max(0.0))
    }

    /// ρ₂(x, y) = ρ₁(x)ρ₁(y) − |K(x, y)|², tiny negatives clamped to 0.
    pub fn two_point_density(&self, x: C64, y: C64) -> Result<f64> {
        let r = self.one_point_density(x)? * self.one_point_density(y)? - self.kernel(x, y)?.norm_sqr();
        Ok(r.max(0.0))
    }

    /// `∫ ρ₂(w + d, w) dA(w)`, the density of the difference of an ordered
    /// pair of distinct points. Polar coordinates in `w`: trapezoid rule in
    /// the angle, adaptive quadrature in `r = s / (1 − s)`.
    pub fn pair_difference_density(&self, d: C64) -> Result<f64> {
        const ANGLES: usize = 96;
        let failure: Cell<Option<Error>> = Cell::new(None);
        let phases: Vec<C64> = (0..ANGLES)
            .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / ANGLES as f64))
            .collect();
        let ring = |r: f64| -> f64 {
            let mut acc = 0.0;
            for ph in &phases {
                let w = ph * r;
                match self.two_point_density(w + d, w) {
                    Ok(v) => acc += v,
                    Err(e) => {
                        failure.set(Some(e));
                        return 0.0;
                    }
                }
            }
            acc * std::f64::consts::TAU / ANGLES as f64
        };
        let value = crate::quad::integrate_adaptive(
            |s| {
                let r = s / (1.0 - s);
                let v = r * ring(r) / ((1.0 - s) * (1.0 - s));
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            1e-8,
            1e-300,
        )?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_ginibre_weight_is_exponential() {
        let spec = EnsembleSpec::ginibre(3, "+").unwrap();
        let w = RadialWeight::new(&spec).unwrap();
        for u in [0.1, 1.0, 4.0] {
            assert!((w.weight(u).unwrap() - (-u).exp()).abs() < 1e-15);
        }
        let m = KernelModel::new(&spec).unwrap();
        let ratio = (m.ln_weight(0.0).unwrap() - m.ln_weight(1.0).unwrap()).exp();
        assert!((ratio - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn closed_moment_ratios() {
        let g1 = EnsembleSpec::ginibre(5, "+").unwrap();
        assert!((moment_ratio(&g1, 2).unwrap() - 2.0).abs() < 1e-14);
        let sph = EnsembleSpec::ginibre(4, "-+").unwrap();
        assert!((moment_ratio(&sph, 1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        for spec in [
            g1,
            sph.clone(),
            EnsembleSpec::rectangular(&[3, 5]).unwrap(),
            EnsembleSpec::truncated(3, &[5, 7], "+-").unwrap(),
        ] {
            assert_eq!(moment_ratio(&spec, 0).unwrap(), 1.0);
            assert!(matches!(moment_ratio(&spec, 9), Err(Error::OutOfRange { .. })));
        }
        let t = EnsembleSpec::truncated(3, &[5], "+").unwrap();
        // B(2,2)/B(1,2) = (1/6)/(1/2)
        assert!((moment_ratio(&t, 1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn numeric_moments_single_factor() {
        let g = EnsembleSpec::ginibre(5, "+").unwrap();
        assert!((moment_ratio_numeric(&g, 3).unwrap() / 6.0 - 1.0).abs() < 1e-6);
        assert_eq!(moment_ratio_numeric(&g, 0).unwrap(), 1.0);
        let t = EnsembleSpec::truncated(3, &[5], "+").unwrap();
        assert!((moment_ratio_numeric(&t, 1).unwrap() * 3.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn spherical_weight_closed_form() {
        for n in [2usize, 5] {
            let spec = EnsembleSpec::ginibre(n, "-+").unwrap();
            let w = RadialWeight::new(&spec).unwrap();
            let w0 = ln_gamma(n as f64 + 1.0);
            for u in [0.1, 0.5, 1.0, 2.0, 10.0] {
                let expected = w0 - (n as f64 + 1.0) * (1.0f64 + u).ln();
                let got = w.ln_weight_log(u.ln()).unwrap();
                assert!((got - expected).abs() < 1e-8, "n={n} u={u}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn kernel_small_cases() {
        let spec = EnsembleSpec::ginibre(1, "+").unwrap();
        let m = KernelModel::new(&spec).unwrap();
        let k00 = m.kernel(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert!((k00.re - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let x = C64::new(0.3, -0.7);
        let y = C64::new(-1.1, 0.2);
        let expected = (-(x.norm_sqr() + y.norm_sqr()) / 2.0).exp() / std::f64::consts::PI;
        assert!((m.kernel(x, y).unwrap().re - expected).abs() < 1e-15);

        let m2 = KernelModel::new(&EnsembleSpec::ginibre(2, "+").unwrap()).unwrap();
        let rho0 = m2.one_point_density(C64::new(0.0, 0.0)).unwrap();
        assert!((rho0 - 1.0 / std::f64::consts::PI).abs() < 1e-10);
        assert!(m2.two_point_density(x, x).unwrap().abs() < 1e-10);
        let kxy = m2.kernel(x, y).unwrap();
        let kyx = m2.kernel(y, x).unwrap();
        assert!((kxy - kyx.conj()).norm() <= 1e-12 * kxy.norm());
    }

    #[test]
    fn pair_difference_integrates_to_pair_count() {
        // n = 2 Ginibre: ∫ g(d) dA(d) = N(N − 1) = 2, and g is radial.
        let m = KernelModel::new(&EnsembleSpec::ginibre(2, "+").unwrap()).unwrap();
        let total = crate::quad::integrate_adaptive(
            |rho| {
                std::f64::consts::TAU * rho * m.pair_difference_density(C64::new(rho, 0.0)).unwrap()
            },
            0.0,
            12.0,
            1e-7,
            0.0,
        )
        .unwrap();
        assert!((total - 2.0).abs() < 1e-5, "{total}");
        let a = m.pair_difference_density(C64::new(0.8, 0.0)).unwrap();
        let b = m.pair_difference_density(C64::from_polar(0.8, 1.1)).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
    }
}
