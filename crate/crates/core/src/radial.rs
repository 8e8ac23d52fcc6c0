//! Finite-size mixture laws and large-size limit laws of the squared radius
//! `|z|²` of a typical eigenvalue.
//!
//! Term `a` of the one-point function factors into independent components,
//! one per matrix factor, so `|z|²` under the expected spectral distribution
//! is `Π_j C_j^{ε_j}` with a uniform index `a ∈ {0..N-1}`:
//!
//! | factor                   | component            |
//! |--------------------------|----------------------|
//! | Ginibre, ε = +1          | Gamma(a + 1)         |
//! | Ginibre, ε = −1          | Gamma(n − a)         |
//! | rectangular, `n_j`       | Gamma(n_j − n_1 + a + 1) |
//! | truncated, ε = +1        | Beta(a + 1, n_j − m) |
//! | truncated, ε = −1        | Beta(m − a, n_j − m) |

use rand_distr::{Beta, Distribution, Gamma};

use crate::ensembles::{EnsembleKind, EnsembleSpec, Sign};
use crate::error::{Error, Result};
use crate::rng::{SeedStream, StreamRng};
use crate::special::{
    regularized_incomplete_beta, regularized_lower_incomplete_gamma,
    regularized_upper_incomplete_gamma,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Gamma { shape: f64 },
    Beta { alpha: f64, beta: f64 },
}

/// One factor of a mixture term: `(C / divisor)^sign`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorTerm {
    pub component: Component,
    pub sign: Sign,
    pub divisor: f64,
}

impl FactorTerm {
    fn sample(&self, rng: &mut StreamRng) -> f64 {
        let c = match self.component {
            Component::Gamma { shape } => Gamma::new(shape, 1.0).expect("positive shape").sample(rng),
            Component::Beta { alpha, beta } => Beta::new(alpha, beta).expect("positive parameters").sample(rng),
        } / self.divisor;
        match self.sign {
            Sign::Plus => c,
            Sign::Minus => 1.0 / c,
        }
    }
}

/// Mixture representation of the squared-radius law at finite size.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLaw {
    terms: Vec<Vec<FactorTerm>>,
}

impl RadialLaw {
    /// Mixture size `N`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Factor list of term `a`.
    pub fn term(&self, a: usize) -> &[FactorTerm] {
        &self.terms[a]
    }

    fn draw_term(&self, a: usize, rng: &mut StreamRng) -> f64 {
        self.terms[a].iter().map(|f| f.sample(rng)).product()
    }
}

/// Builds the mixture table. `scaled` divides each Gamma component by `n`
/// (Ginibre) or `n_1` (rectangular), matching factors divided by `√n`.
pub fn finite_n_mixture(spec: &EnsembleSpec, scaled: bool) -> Result<RadialLaw> {
    let spec = spec.clone().validate()?;
    let n = spec.n;
    let divisor = if scaled { n as f64 } else { 1.0 };
    let gamma = |shape: usize, sign| FactorTerm {
        component: Component::Gamma { shape: shape as f64 },
        sign,
        divisor,
    };
    let beta = |alpha: usize, beta: usize, sign| FactorTerm {
        component: Component::Beta {
            alpha: alpha as f64,
            beta: beta as f64,
        },
        sign,
        divisor: 1.0,
    };
    let terms = (0..n)
        .map(|a| match spec.kind {
            EnsembleKind::GinibreProduct => spec
                .signs
                .iter()
                .map(|s| match s {
                    Sign::Plus => gamma(a + 1, s),
                    Sign::Minus => gamma(n - a, s),
                })
                .collect(),
            EnsembleKind::RectangularProduct => spec
                .dims
                .iter()
                .map(|&nj| gamma(nj - n + a + 1, Sign::Plus))
                .collect(),
            EnsembleKind::TruncatedUnitaryProduct => spec
                .dims
                .iter()
                .zip(spec.signs.iter())
                .map(|(&nj, s)| match s {
                    Sign::Plus => beta(a + 1, nj - n, s),
                    Sign::Minus => beta(n - a, nj - n, s),
                })
                .collect(),
        })
        .collect();
    Ok(RadialLaw { terms })
}

/// `count` draws of `|z|²` under the expected spectral distribution.
pub fn sample_expected_radial(law: &RadialLaw, count: usize, stream: SeedStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..count)
        .map(|_| {
            let a = rng.index_below(law.len());
            law.draw_term(a, &mut rng)
        })
        .collect()
}

/// One draw per index, distributed as the squared-radius multiset of a
/// single matrix draw.
pub fn sample_radial_multiset(law: &RadialLaw, stream: SeedStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..law.len()).map(|a| law.draw_term(a, &mut rng)).collect()
}

/// Closed-form CDF of `|z|²` under the expected spectral distribution.
///
/// Supported: single Ginibre or square rectangular factor (either sign),
/// single truncated factor (either sign), and the two-factor Ginibre chain
/// with one inverted factor.
pub fn finite_n_cdf_exact(spec: &EnsembleSpec, t: f64, scaled: bool) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::DomainError {
            value: t,
            domain: "t >= 0",
        });
    }
    let n = spec.n;
    let nf = n as f64;
    let average = |f: &dyn Fn(f64) -> f64| (0..n).map(|a| f(a as f64)).sum::<f64>() / nf;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let s = if scaled { nf } else { 1.0 };
    let signs: Vec<Sign> = spec.signs.iter().collect();
    match (spec.kind, signs.as_slice()) {
        (EnsembleKind::GinibreProduct | EnsembleKind::RectangularProduct, [Sign::Plus])
            if spec.dims.len() <= 1 =>
        {
            Ok(average(&|a| regularized_lower_incomplete_gamma(a + 1.0, s * t)))
        }
        (EnsembleKind::GinibreProduct, [Sign::Minus]) => {
            Ok(average(&|a| regularized_upper_incomplete_gamma(nf - a, s / t)))
        }
        (EnsembleKind::GinibreProduct, [_, _]) if spec.is_spherical() => {
            let x = t / (1.0 + t);
            Ok(average(&|a| regularized_incomplete_beta(a + 1.0, nf - a, x)))
        }
        (EnsembleKind::TruncatedUnitaryProduct, [sign]) => {
            let nu = (spec.dims[0] - n) as f64;
            Ok(match sign {
                Sign::Plus => average(&|a| regularized_incomplete_beta(a + 1.0, nu, t.min(1.0))),
                Sign::Minus if t <= 1.0 => 0.0,
                Sign::Minus => average(&|a| 1.0 - regularized_incomplete_beta(nf - a, nu, 1.0 / t)),
            })
        }
        _ => Err(Error::Unsupported(format!(
            "no closed-form CDF for {} with signs {}",
            spec.kind, spec.signs
        ))),
    }
}

const MONOTONE_GRID: usize = 1024;

/// Limiting squared-radius law `φ(U)` with `U` uniform on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitLaw {
    kind: EnsembleKind,
    signs: Vec<Sign>,
    alphas: Vec<f64>,
}

impl LimitLaw {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        let spec = spec.clone().validate()?;
        let law = Self {
            kind: spec.kind,
            signs: spec.signs.iter().collect(),
            alphas: spec.alphas(),
        };
        let mut prev = law.phi(0.0)?;
        for i in 1..MONOTONE_GRID {
            let v = law.phi(i as f64 / MONOTONE_GRID as f64)?;
            if !(v > prev) {
                return Err(Error::InvalidSpec(format!(
                    "limit map is not strictly increasing near u = {}",
                    i as f64 / MONOTONE_GRID as f64
                )));
            }
            prev = v;
        }
        Ok(law)
    }

    /// Number of non-inverted factors.
    pub fn p(&self) -> usize {
        self.signs.iter().filter(|&&s| s == Sign::Plus).count()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// The push-forward map `φ` on [0, 1).
    pub fn phi(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::DomainError {
                value: u,
                domain: "[0, 1)",
            });
        }
        Ok(match self.kind {
            EnsembleKind::GinibreProduct => {
                let p = self.p() as i32;
                let q = self.signs.len() as i32 - p;
                u.powi(p) / (1.0 - u).powi(q)
            }
            EnsembleKind::RectangularProduct => self.alphas.iter().map(|a| u - 1.0 + a).product(),
            EnsembleKind::TruncatedUnitaryProduct => self
                .signs
                .iter()
                .zip(&self.alphas)
                .map(|(s, a)| match s {
                    Sign::Plus => u / (a - 1.0 + u),
                    Sign::Minus => (a - u) / (1.0 - u),
                })
                .product(),
        })
    }

    /// `F(t) = φ⁻¹(t)`, clipped to [0, 1].
    pub fn cdf(&self, t: f64) -> f64 {
        let phi = |u: f64| self.phi(u).expect("u in [0, 1)");
        if t <= phi(0.0) {
            return 0.0;
        }
        let mut hi = None;
        for j in 1..=52 {
            let u = 1.0 - 0.5f64.powi(j);
            if phi(u) >= t {
                hi = Some(u);
                break;
            }
        }
        let Some(mut hi) = hi else {
            return 1.0;
        };
        let mut lo = 0.0f64;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn limit_phi(law: &LimitLaw, u: f64) -> Result<f64> {
    law.phi(u)
}

pub fn limit_cdf(law: &LimitLaw, t: f64) -> f64 {
    law.cdf(t)
}
