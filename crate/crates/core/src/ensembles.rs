//! Seeded samplers for the three product ensembles and the eigenvalue
//! pipeline built on top of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, product_with_inverses, qr_positive, ComplexMatrix, C64};
use crate::rng::{SeedStream, StreamRng};

/// Retries allowed per trial before a degenerate draw becomes fatal.
pub const RETRY_BUDGET: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    /// `A_1^{ε_1}⋯A_k^{ε_k}` with square Ginibre factors.
    GinibreProduct,
    /// `A_1⋯A_k` with `A_i` of size `n_i × n_{i+1}`, cyclic.
    RectangularProduct,
    /// Products of top-left `m×m` blocks of Haar unitaries, possibly inverted.
    TruncatedUnitaryProduct,
}

impl EnsembleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleKind::GinibreProduct => "ginibre-product",
            EnsembleKind::RectangularProduct => "rectangular-product",
            EnsembleKind::TruncatedUnitaryProduct => "truncated-unitary-product",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ginibre-product" | "ginibre" => Ok(EnsembleKind::GinibreProduct),
            "rectangular-product" | "rectangular" => Ok(EnsembleKind::RectangularProduct),
            "truncated-unitary-product" | "truncated" => Ok(EnsembleKind::TruncatedUnitaryProduct),
            other => Err(Error::InvalidSpec(format!("unknown ensemble kind `{other}`"))),
        }
    }
}

/// Exponent ε of one factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_i8() as f64
    }
}

/// Sign pattern, written as a string such as `"+-+"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signs(pub Vec<Sign>);

impl Signs {
    pub fn all_plus(k: usize) -> Self {
        Signs(vec![Sign::Plus; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_i8(&self) -> Vec<i8> {
        self.0.iter().map(|s| s.as_i8()).collect()
    }

    /// Number of non-inverted factors.
    pub fn plus_count(&self) -> usize {
        self.0.iter().filter(|&&s| s == Sign::Plus).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = Sign> + '_ {
        self.0.iter().copied()
    }
}

impl FromStr for Signs {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                other => Err(Error::InvalidSpec(format!(
                    "signs must be a string of '+' and '-', found `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Signs)
    }
}

impl fmt::Display for Signs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s == Sign::Plus { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for Signs {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Signs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Full description of one ensemble.
///
/// * ginibre-product: `n` is the matrix size, `dims` is empty.
/// * rectangular-product: `dims = [n_1, …, n_k]`, factor `i` is
///   `n_i × n_{i+1}` with `n_{k+1} = n_1`; `n = n_1 = min(dims)` after
///   validation; signs are all `+`.
/// * truncated-unitary-product: `n = m` is the block size and `dims` are
///   the ambient unitary sizes `n_i > m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub signs: Signs,
}

impl EnsembleSpec {
    pub fn ginibre(n: usize, signs: &str) -> Result<Self> {
        Self {
            kind: EnsembleKind::GinibreProduct,
            n,
            dims: Vec::new(),
            signs: signs.parse()?,
        }
        .validate()
    }

    pub fn rectangular(dims: &[usize]) -> Result<Self> {
        Self {
            kind: EnsembleKind::RectangularProduct,
            n: 0,
            dims: dims.to_vec(),
            signs: Signs::default(),
        }
        .validate()
    }

    pub fn truncated(m: usize, dims: &[usize], signs: &str) -> Result<Self> {
        Self {
            kind: EnsembleKind::TruncatedUnitaryProduct,
            n: m,
            dims: dims.to_vec(),
            signs: signs.parse()?,
        }
        .validate()
    }

    /// Number of factors.
    pub fn k(&self) -> usize {
        self.signs.len()
    }

    /// Number of eigenvalues per draw (n, n_1 or m).
    pub fn point_count(&self) -> usize {
        self.n
    }

    /// Checks every invariant and returns the normalized spec. Rectangular
    /// dimension lists are rotated so the minimum comes first; the nonzero
    /// spectrum is unchanged by cyclic rotation of the chain.
    pub fn validate(mut self) -> Result<Self> {
        match self.kind {
            EnsembleKind::GinibreProduct => {
                if self.n == 0 {
                    return Err(Error::InvalidSpec("n: must be at least 1".into()));
                }
                if self.signs.is_empty() {
                    return Err(Error::InvalidSpec("signs: need at least one factor".into()));
                }
                if !self.dims.is_empty() {
                    return Err(Error::InvalidSpec(
                        "dims: not used by ginibre-product, leave empty".into(),
                    ));
                }
            }
            EnsembleKind::RectangularProduct => {
                if self.dims.is_empty() {
                    return Err(Error::InvalidSpec("dims: need at least one factor".into()));
                }
                if self.dims.contains(&0) {
                    return Err(Error::InvalidSpec("dims: all sizes must be positive".into()));
                }
                if self.signs.is_empty() {
                    self.signs = Signs::all_plus(self.dims.len());
                }
                if self.signs.len() != self.dims.len() {
                    return Err(Error::InvalidSpec(format!(
                        "signs: length {} does not match {} dims",
                        self.signs.len(),
                        self.dims.len()
                    )));
                }
                if self.signs.iter().any(|s| s == Sign::Minus) {
                    return Err(Error::InvalidSpec(
                        "signs: rectangular factors cannot be inverted".into(),
                    ));
                }
                let (argmin, &min) = self
                    .dims
                    .iter()
                    .enumerate()
                    .min_by_key(|(i, &d)| (d, *i))
                    .expect("non-empty");
                self.dims.rotate_left(argmin);
                if self.n != 0 && self.n != min {
                    return Err(Error::InvalidSpec(format!(
                        "n: must equal min(dims) = {min}, got {}",
                        self.n
                    )));
                }
                self.n = min;
            }
            EnsembleKind::TruncatedUnitaryProduct => {
                if self.n == 0 {
                    return Err(Error::InvalidSpec("m: block size must be at least 1".into()));
                }
                if self.signs.is_empty() {
                    return Err(Error::InvalidSpec("signs: need at least one factor".into()));
                }
                if self.dims.len() != self.signs.len() {
                    return Err(Error::InvalidSpec(format!(
                        "signs: length {} does not match {} dims",
                        self.signs.len(),
                        self.dims.len()
                    )));
                }
                if let Some(&bad) = self.dims.iter().find(|&&d| d <= self.n) {
                    return Err(Error::InvalidSpec(format!(
                        "dims: ambient size {bad} must exceed block size m = {}",
                        self.n
                    )));
                }
            }
        }
        Ok(self)
    }

    /// Limit ratios α_i. Rectangular: `n_i / n_1`; truncated: `n_i / m`;
    /// ginibre: all ones.
    pub fn alphas(&self) -> Vec<f64> {
        match self.kind {
            EnsembleKind::GinibreProduct => vec![1.0; self.k()],
            _ => self.dims.iter().map(|&d| d as f64 / self.n as f64).collect(),
        }
    }

    /// True for the two-factor Ginibre chain with one inverted factor.
    pub fn is_spherical(&self) -> bool {
        self.kind == EnsembleKind::GinibreProduct && self.k() == 2 && self.signs.plus_count() == 1
    }
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians (E|x|² = 1).
pub fn sample_ginibre(rows: usize, cols: usize, stream: SeedStream) -> ComplexMatrix {
    ginibre_from(rows, cols, &mut stream.rng())
}

pub(crate) fn ginibre_from(rows: usize, cols: usize, rng: &mut StreamRng) -> ComplexMatrix {
    let data: Vec<C64> = (0..rows * cols).map(|_| rng.complex_gaussian()).collect();
    ComplexMatrix::from_row_major(rows, cols, data).expect("finite gaussian entries")
}

/// Haar-distributed `n × n` unitary: the `Q` of a positive-diagonal QR of a
/// Ginibre matrix.
pub fn sample_haar_unitary(n: usize, stream: SeedStream) -> Result<ComplexMatrix> {
    haar_from(n, &mut stream.rng())
}

pub(crate) fn haar_from(n: usize, rng: &mut StreamRng) -> Result<ComplexMatrix> {
    let mut last = None;
    for _ in 0..RETRY_BUDGET {
        match qr_positive(&ginibre_from(n, n, rng)) {
            Ok((q, _)) => return Ok(q),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::RetryBudgetExceeded {
        retries: RETRY_BUDGET,
        last: Box::new(last.expect("at least one attempt")),
    })
}

/// Top-left `m × m` block of an `n × n` Haar unitary.
pub fn sample_truncated_block(n: usize, m: usize, stream: SeedStream) -> Result<ComplexMatrix> {
    truncated_from(n, m, &mut stream.rng())
}

pub(crate) fn truncated_from(n: usize, m: usize, rng: &mut StreamRng) -> Result<ComplexMatrix> {
    if m == 0 || n <= m {
        return Err(Error::InvalidSpec(format!(
            "truncation needs n > m >= 1, got n = {n}, m = {m}"
        )));
    }
    Ok(haar_from(n, rng)?.top_left(m, m))
}

/// Eigenvalues of one draw plus the number of degenerate draws discarded.
#[derive(Debug, Clone)]
pub struct EigenSample {
    pub eigenvalues: Vec<C64>,
    pub retries: u32,
}

/// Draws the factor list for one trial.
fn draw_factors(spec: &EnsembleSpec, scaled: bool, rng: &mut StreamRng) -> Result<Vec<ComplexMatrix>> {
    match spec.kind {
        EnsembleKind::GinibreProduct => {
            let n = spec.n;
            let s = 1.0 / (n as f64).sqrt();
            Ok((0..spec.k())
                .map(|_| {
                    let a = ginibre_from(n, n, rng);
                    if scaled {
                        a.scale(s)
                    } else {
                        a
                    }
                })
                .collect())
        }
        EnsembleKind::RectangularProduct => {
            let k = spec.dims.len();
            let s = 1.0 / (spec.n as f64).sqrt();
            Ok((0..k)
                .map(|i| {
                    let a = ginibre_from(spec.dims[i], spec.dims[(i + 1) % k], rng);
                    if scaled {
                        a.scale(s)
                    } else {
                        a
                    }
                })
                .collect())
        }
        EnsembleKind::TruncatedUnitaryProduct => spec
            .dims
            .iter()
            .map(|&n_i| truncated_from(n_i, spec.n, rng))
            .collect(),
    }
}

/// Factor matrices of one trial (exposed for the generalized Schur checks).
pub fn sample_factors(spec: &EnsembleSpec, scaled: bool, stream: SeedStream) -> Result<Vec<ComplexMatrix>> {
    draw_factors(spec, scaled, &mut stream.rng())
}

/// Eigenvalues of one draw of the product matrix.
///
/// `scaled` divides every Gaussian factor by `√n` (ginibre) or `√n_1`
/// (rectangular) before multiplying; it has no effect on truncated
/// products. Degenerate draws (singular inverted factor, QR breakdown,
/// non-convergent Schur iteration) are redrawn from the same stream up to
/// [`RETRY_BUDGET`] times.
pub fn sample_product_eigenvalues(
    spec: &EnsembleSpec,
    scaled: bool,
    stream: SeedStream,
) -> Result<EigenSample> {
    let mut rng = stream.rng();
    let signs = spec.signs.as_i8();
    let mut retries = 0u32;
    loop {
        let attempt = draw_factors(spec, scaled, &mut rng)
            .and_then(|f| product_with_inverses(&f, &signs))
            .and_then(|p| eigenvalues(&p));
        match attempt {
            Ok(eigenvalues) => return Ok(EigenSample { eigenvalues, retries }),
            Err(e) if e.is_degenerate_draw() || matches!(e, Error::RetryBudgetExceeded { .. }) => {
                if retries >= RETRY_BUDGET {
                    return Err(Error::RetryBudgetExceeded {
                        retries,
                        last: Box::new(e),
                    });
                }
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
