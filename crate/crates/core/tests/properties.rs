use dpp_core::ensembles::{sample_ginibre, sample_haar_unitary, sample_product_eigenvalues};
use dpp_core::linalg::{
    eigenvalues, generalized_schur, max_matched_relative_error, product_with_inverses, qr_positive,
    rq_positive, schur, signed_power,
};
use dpp_core::radial::{finite_n_cdf_exact, LimitLaw};
use dpp_core::stats::{dkw_threshold, ks_statistic, EcdfView};
use dpp_core::weights::KernelModel;
use dpp_core::{EnsembleSpec, SeedStream, C64};
use proptest::prelude::*;

fn sizes() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 5, 20])
}

fn signs(k: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::sample::select(vec![1i8, -1]), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn qr_conventions(seed in any::<u64>(), n in sizes()) {
        let m = sample_ginibre(n, n, SeedStream::new(seed, 0));
        let (q, r) = qr_positive(&m).unwrap();
        let norm = m.frobenius_norm();
        prop_assert!((&q.matmul(&r) - &m).frobenius_norm() <= 1e-12 * norm);
        prop_assert!(q.unitarity_defect() <= 1e-12 * (n as f64).sqrt());
        prop_assert!(r.strictly_lower_norm() == 0.0);
        for d in r.diag() {
            prop_assert!(d.im == 0.0 && d.re >= 0.0);
        }
    }

    #[test]
    fn rq_conventions(seed in any::<u64>(), n in sizes(), extra in 0usize..4) {
        let m = sample_ginibre(n, n + extra, SeedStream::new(seed, 1));
        let (s, ustar) = rq_positive(&m).unwrap();
        prop_assert!((&s.matmul(&ustar) - &m).frobenius_norm() <= 1e-12 * m.frobenius_norm());
        prop_assert!(s.strictly_lower_norm() <= 1e-12 * m.frobenius_norm());
        prop_assert!(ustar.row_orthonormality_defect() <= 1e-12 * (n as f64).sqrt());
        for i in 0..n {
            let d = ustar[(i, i)];
            prop_assert!(d.im.abs() <= 1e-15 && d.re >= 0.0);
        }
    }

    #[test]
    fn schur_contract(seed in any::<u64>(), n in sizes()) {
        let m = sample_ginibre(n, n, SeedStream::new(seed, 2));
        let s = schur(&m).unwrap();
        let norm = m.frobenius_norm();
        prop_assert!(s.residual(&m) <= 1e-10 * norm);
        prop_assert!(s.unitary.unitarity_defect() <= 1e-12 * (n as f64).sqrt());
        prop_assert!(s.triangular.strictly_lower_norm() <= 1e-12 * norm);
    }

    #[test]
    fn unitary_spectrum_on_circle(seed in any::<u64>(), n in sizes()) {
        let u = sample_haar_unitary(n, SeedStream::new(seed, 3)).unwrap();
        for z in eigenvalues(&u).unwrap() {
            prop_assert!((z.norm() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn plain_products_match_naive(seed in any::<u64>(), n in sizes(), k in 1usize..4) {
        let factors: Vec<_> = (0..k).map(|i| sample_ginibre(n, n, SeedStream::new(seed, 10 + i as u64))).collect();
        let p = product_with_inverses(&factors, &vec![1; k]).unwrap();
        let mut naive = factors[0].clone();
        for f in &factors[1..] {
            naive = naive.matmul(f);
        }
        prop_assert!((&p - &naive).frobenius_norm() <= 1e-13 * naive.frobenius_norm());
    }

    #[test]
    fn generalized_schur_contract(
        seed in any::<u64>(),
        n in prop::sample::select(vec![2usize, 5, 10, 20]),
        sg in (1usize..=4).prop_flat_map(signs),
    ) {
        let factors: Vec<_> = (0..sg.len())
            .map(|i| sample_ginibre(n, n, SeedStream::new(seed, 20 + i as u64)))
            .collect();
        let g = generalized_schur(&factors, &sg).unwrap();
        for (i, (a, &e)) in factors.iter().zip(&sg).enumerate() {
            let m = signed_power(a, e).unwrap();
            prop_assert!((&m - &g.reconstruct(i)).frobenius_norm() <= 1e-10 * m.frobenius_norm());
            prop_assert!(g.unitaries[i].unitarity_defect() <= 1e-12 * (n as f64).sqrt());
            prop_assert!(g.triangulars[i].strictly_lower_norm() <= 1e-12 * m.frobenius_norm());
        }
        let eig = eigenvalues(&product_with_inverses(&factors, &sg).unwrap()).unwrap();
        prop_assert!(max_matched_relative_error(&g.diagonal_products(), &eig, 0.0) <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), idx in any::<u64>()) {
        let spec = EnsembleSpec::truncated(3, &[5, 4], "+-").unwrap();
        let a = sample_product_eigenvalues(&spec, false, SeedStream::new(seed, idx)).unwrap();
        let b = sample_product_eigenvalues(&spec, false, SeedStream::new(seed, idx)).unwrap();
        prop_assert_eq!(a.eigenvalues.len(), 3);
        prop_assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    #[test]
    fn one_point_density_is_radial(r in 0.05f64..3.0, n in 1usize..6, inverted in any::<bool>()) {
        let spec = EnsembleSpec::ginibre(n, if inverted { "-+" } else { "+" }).unwrap();
        let model = KernelModel::new(&spec).unwrap();
        let base = model.one_point_density(C64::new(r, 0.0)).unwrap();
        for j in 1..8 {
            let z = C64::from_polar(r, std::f64::consts::TAU * j as f64 / 8.0);
            let v = model.one_point_density(z).unwrap();
            prop_assert!((v - base).abs() <= 1e-12 * base.max(1e-300));
        }
    }

    #[test]
    fn kernel_is_hermitian_and_diagonal_nonnegative(
        xr in -2.0f64..2.0, xi in -2.0f64..2.0, yr in -2.0f64..2.0, yi in -2.0f64..2.0, n in 1usize..8,
    ) {
        let model = KernelModel::new(&EnsembleSpec::ginibre(n, "+").unwrap()).unwrap();
        let (x, y) = (C64::new(xr, xi), C64::new(yr, yi));
        let kxy = model.kernel(x, y).unwrap();
        let kyx = model.kernel(y, x).unwrap();
        prop_assert!((kxy - kyx.conj()).norm() <= 1e-12 * kxy.norm().max(1e-300));
        let kxx = model.kernel(x, x).unwrap();
        prop_assert!(kxx.re >= 0.0 && kxx.im.abs() <= 1e-15 * kxx.re.max(1e-300));
        prop_assert!(model.two_point_density(x, y).unwrap() >= 0.0);
    }

    #[test]
    fn limit_cdf_round_trip(log_t in -4.0f64..4.0, case in 0usize..6) {
        let spec = match case {
            0 => EnsembleSpec::ginibre(10, "+").unwrap(),
            1 => EnsembleSpec::ginibre(10, "-+").unwrap(),
            2 => EnsembleSpec::ginibre(10, "+-+").unwrap(),
            3 => EnsembleSpec::rectangular(&[40, 60, 80]).unwrap(),
            4 => EnsembleSpec::truncated(40, &[120, 80], "+-").unwrap(),
            _ => EnsembleSpec::truncated(10, &[30], "+").unwrap(),
        };
        let law = LimitLaw::new(&spec).unwrap();
        let t = 10f64.powf(log_t);
        let u = law.cdf(t);
        prop_assert!((0.0..=1.0).contains(&u));
        if u > 0.0 && u < 1.0 {
            let back = law.phi(u).unwrap();
            prop_assert!((back - t).abs() <= 1e-9 * t, "t = {t}, phi(F(t)) = {back}");
        }
        prop_assert!(law.cdf(t * 1.01) >= u);
    }

    #[test]
    fn ks_invariant_under_monotone_map(seed in any::<u64>(), n in 1usize..200) {
        let mut rng = SeedStream::new(seed, 0).rng();
        let xs: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform53()).ln()).collect();
        let f = |t: f64| 1.0 - (-t).exp();
        let d1 = ks_statistic(&EcdfView::new(xs.clone()).unwrap(), f);
        let ys: Vec<f64> = xs.iter().map(|&x| x / (1.0 + x)).collect();
        let d2 = ks_statistic(&EcdfView::new(ys).unwrap(), |s: f64| f(s / (1.0 - s)));
        prop_assert!((d1 - d2).abs() <= 1e-12);
    }

    #[test]
    fn thresholds_monotone(n in 1usize..100_000, extra in 1usize..1000, a in 0.0f64..0.1, b in 0.0f64..0.1) {
        prop_assert!(dkw_threshold(n + extra, 0.01, a) < dkw_threshold(n, 0.01, a));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(dkw_threshold(n, 0.01, lo) <= dkw_threshold(n, 0.01, hi));
    }

    #[test]
    fn exact_cdf_monotone(n in 1usize..30, t in 0.0f64..5.0) {
        for spec in [
            EnsembleSpec::ginibre(n, "+").unwrap(),
            EnsembleSpec::ginibre(n, "-+").unwrap(),
            EnsembleSpec::truncated(n, &[n + 3], "+").unwrap(),
        ] {
            let a = finite_n_cdf_exact(&spec, t, true).unwrap();
            let b = finite_n_cdf_exact(&spec, t + 0.1, true).unwrap();
            prop_assert!((0.0..=1.0).contains(&a) && a <= b + 1e-15);
        }
    }
}
