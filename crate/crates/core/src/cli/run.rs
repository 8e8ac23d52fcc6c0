use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, TestKind};
use super::manifest::RunManifest;
use super::svg::{emit_svg, Figure};
use crate::ensembles::{sample_factors, sample_product_eigenvalues, EnsembleKind, EnsembleSpec, RETRY_BUDGET};
use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, generalized_schur, max_matched_relative_error, product_with_inverses, signed_power, C64,
};
use crate::radial::{finite_n_cdf_exact, finite_n_mixture, sample_expected_radial, LimitLaw, RadialLaw};
use crate::rng::SeedStream;
use crate::stats::{
    dkw_threshold, dkw_threshold_two_sample, grid_compare, ks_statistic, ks_two_sample, EcdfView,
    Histogram2d, KsReport,
};
use crate::weights::{ln_moment_ratio, moment_ratio_numeric, KernelModel};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_STAT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const REFERENCE_SALT: u64 = 0x52_4546;
const RETRY_SALT: u64 = 0x52_4554;
const REFERENCE_CHUNK: usize = 1 << 16;
const TRIAL_CHUNK: usize = 4096;
const CURVE_POINTS: usize = 400;
const GSCHUR_EIGEN_TOL: f64 = 1e-8;
const MAX_MOMENT_INDEX: usize = 8;

/// Worker count from `DPP_WORKERS`, if set.
pub fn worker_count() -> Result<Option<usize>> {
    match std::env::var("DPP_WORKERS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::InvalidSpec(format!("DPP_WORKERS: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidSpec(format!(
                "DPP_WORKERS: expected a positive integer, got {v:?}"
            ))),
        },
    }
}

enum Data {
    Values(Vec<f64>),
    Points(Vec<C64>),
}

struct Outcome {
    checks: Vec<KsReport>,
    retries: u64,
    data: Data,
    figure: Option<Figure>,
}

/// Runs one experiment end to end and writes the requested outputs.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest> {
    let config = config.clone().validate()?;
    if config.svg.is_some() && matches!(config.test, TestKind::Moments | TestKind::Gschur) {
        return Err(Error::InvalidSpec(format!(
            "svg: no figure is defined for the {} test",
            config.test
        )));
    }
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = worker_count()? {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    let allowance = config.resolved_allowance();

    let outcome = pool.install(|| match config.test {
        TestKind::RadialFinite => radial_finite(&config, allowance),
        TestKind::RadialLimit => radial_limit(&config, allowance),
        TestKind::Moments => moments(&config, allowance),
        TestKind::KernelPair => kernel_pair(&config, allowance),
        TestKind::Gschur => gschur(&config, allowance),
        TestKind::Angular => angular(&config, allowance),
    })?;

    let mut outputs = Vec::new();
    let mut manifest_path = None;
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let csv = dir.join("data.csv");
        write_csv(&outcome.data, &csv)?;
        outputs.push(csv);
        let m = dir.join("manifest.json");
        outputs.push(m.clone());
        manifest_path = Some(m);
    }
    if let (Some(path), Some(fig)) = (&config.svg, &outcome.figure) {
        emit_svg(fig, path)?;
        outputs.push(path.clone());
    }

    let verdict = outcome.checks.iter().all(|c| c.pass);
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "run".into(),
        seed: config.seed,
        allowance,
        retries: outcome.retries,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        checks: outcome.checks,
        outputs,
        verdict,
        config,
    };
    if let Some(p) = manifest_path {
        write_file(&p, &manifest.to_json())?;
    }
    Ok(manifest)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_csv(data: &Data, path: &Path) -> Result<()> {
    let mut s = String::new();
    match data {
        Data::Values(v) => {
            s.push_str("value\n");
            for x in v {
                let _ = writeln!(s, "{x}");
            }
        }
        Data::Points(p) => {
            s.push_str("re,im\n");
            for z in p {
                let _ = writeln!(s, "{},{}", z.re, z.im);
            }
        }
    }
    write_file(path, &s)
}

/// Eigenvalues of `trials` independent draws, in stream-index order.
fn sample_trials(spec: &EnsembleSpec, scaled: bool, trials: usize, seed: u64) -> Result<(Vec<Vec<C64>>, u64)> {
    let draws = (0..trials)
        .into_par_iter()
        .map(|i| sample_product_eigenvalues(spec, scaled, SeedStream::new(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let retries = draws.iter().map(|d| d.retries as u64).sum();
    Ok((draws.into_iter().map(|d| d.eigenvalues).collect(), retries))
}

/// Gaussian factors are divided by `√n` (or `√n_1`) for the radial tests.
fn radial_scaling(spec: &EnsembleSpec) -> bool {
    spec.kind != EnsembleKind::TruncatedUnitaryProduct
}

fn reference_sample(law: &RadialLaw, count: usize, seed: u64) -> Vec<f64> {
    let chunks = count.div_ceil(REFERENCE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = REFERENCE_CHUNK.min(count - c * REFERENCE_CHUNK);
            sample_expected_radial(law, len, SeedStream::new(seed, c as u64).derive(REFERENCE_SALT))
        })
        .flatten()
        .collect()
}

fn finiteness_check(points: &[C64]) -> KsReport {
    let bad = points
        .iter()
        .filter(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0)
        .count();
    KsReport::new(
        "fraction of eigenvalues that are zero or non-finite",
        bad as f64 / points.len() as f64,
        points.len(),
        0.0,
    )
}

fn curve(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..CURVE_POINTS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
            (x, f(x))
        })
        .collect()
}

fn squared_radii(points: &[C64]) -> Vec<f64> {
    points.iter().map(|z| z.norm_sqr()).collect()
}

/// Plot range: up to the 99th percentile, so heavy tails do not flatten the
/// figure.
fn plot_range(sample: &EcdfView) -> (f64, f64) {
    let v = sample.values();
    (v[0].min(0.0), v[(v.len() * 99 / 100).min(v.len() - 1)])
}

fn radial_finite(cfg: &ExperimentConfig, allowance: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    let scaled = radial_scaling(spec);
    let (draws, retries) = sample_trials(spec, scaled, cfg.trials, cfg.seed)?;
    let points: Vec<C64> = draws.concat();
    let sample = EcdfView::new(squared_radii(&points))?;
    let n = sample.len();
    let (lo, hi) = plot_range(&sample);

    let (report, reference) = match finite_n_cdf_exact(spec, 1.0, scaled) {
        Ok(_) => {
            let cdf = |t| finite_n_cdf_exact(spec, t, scaled).expect("supported spec");
            let d = ks_statistic(&sample, cdf);
            (
                KsReport::new(
                    "KS of pooled |z|^2 against the exact finite-n CDF",
                    d,
                    n,
                    dkw_threshold(n, cfg.delta, allowance),
                ),
                curve(lo, hi, cdf),
            )
        }
        Err(Error::Unsupported(_)) => {
            let law = finite_n_mixture(spec, scaled)?;
            let reference = EcdfView::new(reference_sample(&law, cfg.samples, cfg.seed))?;
            let d = ks_two_sample(&sample, &reference);
            (
                KsReport::new(
                    "two-sample KS of pooled |z|^2 against mixture draws",
                    d,
                    n,
                    dkw_threshold_two_sample(n, reference.len(), cfg.delta, allowance),
                ),
                curve(lo, hi, |t| reference.eval(t)),
            )
        }
        Err(e) => return Err(e),
    };
    Ok(Outcome {
        checks: vec![report, finiteness_check(&points)],
        retries,
        figure: Some(Figure::EcdfOverlay {
            sample: sample.clone(),
            reference,
            x_label: "|z|^2".into(),
        }),
        data: Data::Values(sample.values().to_vec()),
    })
}

fn radial_limit(cfg: &ExperimentConfig, allowance: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    let law = LimitLaw::new(spec)?;
    let (draws, retries) = sample_trials(spec, radial_scaling(spec), cfg.trials, cfg.seed)?;
    let points: Vec<C64> = draws.concat();
    let sample = EcdfView::new(squared_radii(&points))?;
    let n = sample.len();
    let d = ks_statistic(&sample, |t| law.cdf(t));
    let (lo, hi) = plot_range(&sample);
    Ok(Outcome {
        checks: vec![
            KsReport::new(
                "KS of pooled |z|^2 against the limiting CDF",
                d,
                n,
                dkw_threshold(n, cfg.delta, allowance),
            ),
            finiteness_check(&points),
        ],
        retries,
        figure: Some(Figure::EcdfOverlay {
            reference: curve(lo, hi, |t| law.cdf(t)),
            sample: sample.clone(),
            x_label: "|z|^2".into(),
        }),
        data: Data::Values(sample.values().to_vec()),
    })
}

fn moments(cfg: &ExperimentConfig, allowance: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    let top = MAX_MOMENT_INDEX.min(spec.point_count() - 1);
    let errors = (0..=top)
        .into_par_iter()
        .map(|a| {
            let closed = ln_moment_ratio(spec, a)?.exp();
            let numeric = moment_ratio_numeric(spec, a)?;
            Ok((numeric - closed).abs() / closed)
        })
        .collect::<Result<Vec<f64>>>()?;
    let checks = errors
        .iter()
        .enumerate()
        .map(|(a, &e)| KsReport::new(format!("relative error of moment ratio a = {a}"), e, 1, allowance))
        .collect();
    Ok(Outcome {
        checks,
        retries: 0,
        data: Data::Values(errors),
        figure: None,
    })
}

/// Mean of `f` over the square `[origin, origin + width]²`, 4×4
/// Gauss–Legendre.
fn cell_average(origin: C64, width: f64, mut f: impl FnMut(C64) -> Result<f64>) -> Result<f64> {
    const X: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let mut acc = 0.0;
    for (xi, wi) in X.iter().zip(W) {
        for (yj, wj) in X.iter().zip(W) {
            let z = origin + C64::new(0.5 * width * (1.0 + xi), 0.5 * width * (1.0 + yj));
            acc += wi * wj * f(z)?;
        }
    }
    Ok(acc / 4.0)
}

fn cell_nodes(h: &Histogram2d) -> Vec<(usize, C64)> {
    (0..h.bins)
        .flat_map(|r| (0..h.bins).map(move |c| (r, c)))
        .map(|(r, c)| (r * h.bins + c, h.cell_origin(r, c)))
        .collect()
}

fn kernel_pair(cfg: &ExperimentConfig, allowance: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    let l = cfg.box_half_width;
    let mut model = KernelModel::new(spec)?;
    if spec.k() > 1 {
        model = model.with_cache(1e-10, 1e6)?;
    }

    let chunks = cfg.trials.div_ceil(TRIAL_CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h1 = Histogram2d::new(l, cfg.bins);
            let mut h2 = Histogram2d::new(l, cfg.bins);
            let mut points = Vec::new();
            let mut retries = 0u64;
            let end = ((c + 1) * TRIAL_CHUNK).min(cfg.trials);
            for i in c * TRIAL_CHUNK..end {
                let draw = sample_product_eigenvalues(spec, false, SeedStream::new(cfg.seed, i as u64))?;
                retries += draw.retries as u64;
                let z = draw.eigenvalues;
                for (a, &za) in z.iter().enumerate() {
                    h1.add(za);
                    for (b, &zb) in z.iter().enumerate() {
                        if a != b {
                            h2.add(za - zb);
                        }
                    }
                }
                points.extend(z);
            }
            Ok((h1, h2, points, retries))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut h1 = Histogram2d::new(l, cfg.bins);
    let mut h2 = Histogram2d::new(l, cfg.bins);
    let mut points = Vec::new();
    let mut retries = 0;
    for (a, b, p, r) in parts {
        h1.merge(&a);
        h2.merge(&b);
        points.extend(p);
        retries += r;
    }

    let width = h1.cell_width();
    let counts_per_density = cfg.trials as f64 * h1.cell_area();
    let cells = cell_nodes(&h1);
    let predicted1 = cells
        .par_iter()
        .map(|&(_, o)| cell_average(o, width, |z| model.one_point_density(z)))
        .collect::<Result<Vec<f64>>>()?;
    let rho1 = grid_compare(&h1.densities(cfg.trials), &predicted1, counts_per_density, cfg.min_expected);
    let mut checks = vec![KsReport::new(
        format!(
            "max relative error of the one-point density over {} cells{}",
            rho1.qualifying_cells,
            if rho1.empty { " (no qualifying cells)" } else { "" }
        ),
        rho1.max_relative_error,
        rho1.qualifying_cells,
        allowance,
    )];

    if spec.point_count() >= 2 {
        // The difference density is rotation invariant, so nodes with equal
        // |d|² share one evaluation.
        let mut radii: Vec<u64> = Vec::new();
        for &(_, o) in &cells {
            let _ = cell_average(o, width, |d| {
                radii.push(d.norm_sqr().to_bits());
                Ok(0.0)
            });
        }
        radii.sort_unstable();
        radii.dedup();
        let table: BTreeMap<u64, f64> = radii
            .par_iter()
            .map(|&bits| {
                let rho = f64::from_bits(bits).sqrt();
                Ok((bits, model.pair_difference_density(C64::new(rho, 0.0))?))
            })
            .collect::<Result<_>>()?;
        let predicted2 = cells
            .iter()
            .map(|&(_, o)| cell_average(o, width, |d| Ok(table[&d.norm_sqr().to_bits()])))
            .collect::<Result<Vec<f64>>>()?;
        let rho2 = grid_compare(&h2.densities(cfg.trials), &predicted2, counts_per_density, cfg.min_expected);
        checks.push(KsReport::new(
            format!(
                "max relative error of the pair-difference density over {} cells{}",
                rho2.qualifying_cells,
                if rho2.empty { " (no qualifying cells)" } else { "" }
            ),
            rho2.max_relative_error,
            rho2.qualifying_cells,
            allowance,
        ));
    }

    Ok(Outcome {
        checks,
        retries,
        figure: Some(Figure::Heatmap {
            values: h1.densities(cfg.trials),
            bins: cfg.bins,
            half_width: l,
        }),
        data: Data::Points(points),
    })
}

struct GschurSample {
    residual: f64,
    mismatch: f64,
    retries: u64,
}

fn gschur_instance(spec: &EnsembleSpec, stream: SeedStream) -> Result<GschurSample> {
    let signs = spec.signs.as_i8();
    let mut retries = 0u32;
    loop {
        let s = if retries == 0 { stream } else { stream.derive(RETRY_SALT + retries as u64) };
        let attempt = sample_factors(spec, false, s).and_then(|f| {
            let g = generalized_schur(&f, &signs)?;
            let mut residual = 0.0f64;
            for (i, (a, &e)) in f.iter().zip(&signs).enumerate() {
                let m = signed_power(a, e)?;
                residual = residual.max((&m - &g.reconstruct(i)).frobenius_norm() / m.frobenius_norm());
            }
            let eig = eigenvalues(&product_with_inverses(&f, &signs)?)?;
            let mismatch = max_matched_relative_error(&g.diagonal_products(), &eig, 0.0);
            Ok((residual, mismatch))
        });
        match attempt {
            Ok((residual, mismatch)) => {
                return Ok(GschurSample {
                    residual,
                    mismatch,
                    retries: retries as u64,
                })
            }
            Err(e) if e.is_degenerate_draw() && retries < RETRY_BUDGET => retries += 1,
            Err(e) if e.is_degenerate_draw() => {
                return Err(Error::RetryBudgetExceeded {
                    retries,
                    last: Box::new(e),
                })
            }
            Err(e) => return Err(e),
        }
    }
}

fn gschur(cfg: &ExperimentConfig, allowance: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    if spec.kind == EnsembleKind::RectangularProduct {
        return Err(Error::Unsupported(
            "gschur test needs square factors; use ginibre-product or truncated-unitary-product".into(),
        ));
    }
    let samples = (0..cfg.trials)
        .into_par_iter()
        .map(|i| gschur_instance(spec, SeedStream::new(cfg.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let mismatch = samples.iter().map(|s| s.mismatch).fold(0.0, f64::max);
    Ok(Outcome {
        checks: vec![
            KsReport::new("max relative reconstruction residual", residual, samples.len(), allowance),
            KsReport::new(
                "max relative mismatch of diagonal products against eigenvalues",
                mismatch,
                samples.len(),
                GSCHUR_EIGEN_TOL,
            ),
        ],
        retries: samples.iter().map(|s| s.retries).sum(),
        data: Data::Values(samples.iter().map(|s| s.residual).collect()),
        figure: None,
    })
}

fn angular(cfg: &ExperimentConfig, allowance: f64) -> Result<Outcome> {
    let (draws, retries) = sample_trials(&cfg.spec, radial_scaling(&cfg.spec), cfg.trials, cfg.seed)?;
    let points: Vec<C64> = draws.concat();
    let sample = EcdfView::new(points.iter().map(|z| z.arg()).collect())?;
    let pi = std::f64::consts::PI;
    let cdf = |t: f64| ((t + pi) / (2.0 * pi)).clamp(0.0, 1.0);
    let n = sample.len();
    let d = ks_statistic(&sample, cdf);
    Ok(Outcome {
        checks: vec![KsReport::new(
            "KS of pooled eigenvalue arguments against uniform on [-pi, pi)",
            d,
            n,
            dkw_threshold(n, cfg.delta, allowance),
        )],
        retries,
        figure: Some(Figure::EcdfOverlay {
            reference: curve(-pi, pi, cdf),
            sample: sample.clone(),
            x_label: "arg z".into(),
        }),
        data: Data::Values(sample.values().to_vec()),
    })
}
