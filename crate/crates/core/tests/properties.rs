use hprisk::factors::{idiosyncratic_risk, momentum_factor, MomentumMode};
use hprisk::ols::{correlation, fit, mean_tstat, DataSet, RegressionSpec};
use hprisk::panel::{ReturnPanel, Series};
use hprisk::report::format_sig;
use hprisk::rolling::{sorted_beta_view, BetaEstimate};
use hprisk::suite::Distribution;
use hprisk::QuarterId;
use proptest::prelude::*;

fn calendar(n: usize) -> Vec<QuarterId> {
    QuarterId::new(1990, 1).unwrap().range(n)
}

fn regression_data() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..=4, 15usize..60).prop_flat_map(|(k, n)| {
        (prop::collection::vec(prop::collection::vec(-10.0f64..10.0, n), k), prop::collection::vec(-50.0f64..50.0, n))
    })
}

fn panel_strategy() -> impl Strategy<Value = ReturnPanel> {
    (20usize..40, 10usize..30).prop_flat_map(|(n, t)| {
        prop::collection::vec(prop::collection::vec(prop::option::weighted(0.99, -20.0f64..20.0), t), n).prop_map(
            move |rows| {
                let names = (0..n).map(|i| format!("A{i:02}")).collect();
                ReturnPanel::new(names, calendar(t), rows).unwrap()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ols_fit_properties((xs, y) in regression_data()) {
        let names: Vec<String> = (0..xs.len()).map(|j| format!("x{j}")).collect();
        let mut data = DataSet::new(y.len()).with_complete("y", &y).unwrap();
        for (name, x) in names.iter().zip(&xs) {
            data.insert(name.as_str(), x.iter().copied().map(Some).collect()).unwrap();
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let f = fit(&RegressionSpec::new("y", &refs), &data).unwrap();
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
        prop_assert!(f.adj_r_squared <= f.r_squared);
        let e = f.used_residuals();
        let scale = y.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!(e.iter().sum::<f64>().abs() < 1e-9 * scale);
        for x in &xs {
            let dot: f64 = x.iter().zip(&e).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-8 * scale * 10.0);
        }
        for se in &f.std_errors {
            prop_assert!(*se >= 0.0);
        }
    }

    #[test]
    fn fit_is_translation_equivariant_in_intercept((xs, y) in regression_data(), shift in -100.0f64..100.0) {
        let mut data = DataSet::new(y.len()).with_complete("x", &xs[0]).unwrap();
        data.insert("y", y.iter().copied().map(Some).collect()).unwrap();
        let shifted: Series = y.iter().map(|v| Some(v + shift)).collect();
        data.insert("ys", shifted).unwrap();
        let a = fit(&RegressionSpec::new("y", &["x"]), &data).unwrap();
        let b = fit(&RegressionSpec::new("ys", &["x"]), &data).unwrap();
        prop_assert!((b.coefficients[0] - a.coefficients[0] - shift).abs() < 1e-8 * (1.0 + shift.abs()));
        prop_assert!((b.coefficients[1] - a.coefficients[1]).abs() < 1e-8 * (1.0 + a.coefficients[1].abs()));
    }

    #[test]
    fn correlation_is_symmetric_and_bounded(
        pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..50)
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(a), Ok(b)) = (correlation(&x, &y, "xy"), correlation(&y, &x, "yx")) {
            prop_assert_eq!(a, b);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn mean_tstat_sign_follows_mean(values in prop::collection::vec(prop::option::weighted(0.9, -10.0f64..10.0), 3..60)) {
        if let Ok(m) = mean_tstat(&values) {
            let t = m.t.value();
            prop_assert!(t.is_nan() || t == 0.0 || t.signum() == m.mean.signum());
            prop_assert_eq!(m.n, values.iter().flatten().count());
        }
    }

    #[test]
    fn momentum_is_nonnegative_and_negation_invariant(panel in panel_strategy()) {
        // negating returns swaps winners and losers, leaving the spread unchanged
        let a = momentum_factor(&panel, MomentumMode::FixedCount(5));
        prop_assume!(a.is_ok());
        let (a, b) = (a.unwrap(), momentum_factor(&panel.map(|v| -v), MomentumMode::FixedCount(5)).unwrap());
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            match (x, y) {
                (Some(x), Some(y)) => {
                    prop_assert!(*x >= 0.0);
                    prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()), "{} vs {}", x, y);
                }
                (None, None) => {}
                _ => prop_assert!(false, "presence differs"),
            }
        }
    }

    #[test]
    fn idiosyncratic_risk_is_nonnegative(panel in panel_strategy(), seed in 0u64..1000) {
        let market: Series = (0..panel.n_quarters()).map(|t| Some(((t as u64 * 7919 + seed) % 97) as f64 / 10.0 - 4.8)).collect();
        let window = panel.n_quarters().clamp(8, 12);
        if let Ok(s2) = idiosyncratic_risk(&panel, &market, window) {
            prop_assert!(s2.iter().flatten().flatten().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn sorted_view_is_monotone_and_ranked(betas in prop::collection::vec(-3.0f64..3.0, 1..200), step in 1usize..20) {
        let est: Vec<BetaEstimate> = betas
            .iter()
            .enumerate()
            .map(|(i, b)| BetaEstimate { asset: format!("M{i:03}"), beta: *b, lower: b - 1.0, upper: b + 1.0 })
            .collect();
        match sorted_beta_view(&est, step) {
            Ok(v) => {
                prop_assert_eq!(v.len(), betas.len() / step);
                prop_assert!(v.windows(2).all(|w| w[0].beta <= w[1].beta && w[1].rank == w[0].rank + step));
            }
            Err(_) => prop_assert!(step > betas.len()),
        }
    }

    #[test]
    fn distribution_is_ordered(values in prop::collection::vec(-1e6f64..1e6, 1..100)) {
        let d = Distribution::of(&values).unwrap();
        prop_assert!(d.min <= d.median && d.median <= d.max);
        let tol = 1e-12 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(d.min - tol <= d.mean && d.mean <= d.max + tol);
    }

    #[test]
    fn format_sig_keeps_six_digits(v in prop::num::f64::NORMAL) {
        let s = format_sig(v, 6);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-6 * v.abs(), "{} -> {}", v, s);
    }

    #[test]
    fn quarter_ordinals_are_consecutive(year in 1900i32..2100, q in 1u8..=4, n in 1usize..200) {
        let cal = QuarterId::new(year, q).unwrap().range(n);
        prop_assert!(cal.windows(2).all(|w| w[1].ordinal() == w[0].ordinal() + 1 && w[1] == w[0].succ() && w[1].pred() == w[0]));
        let text = cal[n - 1].to_string();
        prop_assert_eq!(text.parse::<QuarterId>().unwrap(), cal[n - 1]);
    }
}
