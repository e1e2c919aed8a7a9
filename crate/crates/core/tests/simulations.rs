//! Monte Carlo checks of estimator behaviour on generated panels.

use hprisk::factors::{FactorBundle, FactorConfig};
use hprisk::fama_macbeth::{form_portfolios, post_ranking_betas, FmConfig};
use hprisk::panel::{compute_returns, ReturnPanel, Series, SeriesKind};
use hprisk::rng::DrawStream;
use hprisk::rolling::{beta_r2_correlation, rolling_betas, window_fit};
use hprisk::suite::{find_model, fit_asset, run_suite, SuiteOptions};
use hprisk::synth::{generate, BetaSpec, DgpConfig, NormalProcess, ValueSpec};
use hprisk::QuarterId;

fn prepared(cfg: &DgpConfig) -> (ReturnPanel, FactorBundle) {
    let (panel, _) = generate(cfg).unwrap();
    let returns = compute_returns(&panel, SeriesKind::PriceIndex).unwrap();
    let bundle = FactorBundle::build(&panel, &returns, &FactorConfig::default()).unwrap();
    (returns, bundle)
}

fn calendar(n: usize) -> Vec<QuarterId> {
    QuarterId::new(1985, 1).unwrap().range(n)
}

#[test]
fn independent_equity_proxy_has_nominal_size() {
    let model = find_model("2").unwrap();
    let (mut significant, mut fitted, mut r2_sum) = (0usize, 0usize, 0.0);
    for rep in 0..200 {
        let (returns, bundle) = prepared(&DgpConfig::replica_preset().with_seed(900 + rep));
        let s = run_suite(&returns, &bundle, std::slice::from_ref(&model), &SuiteOptions::default()).unwrap().remove(0);
        significant += s.variable("market_sp").unwrap().n_significant;
        fitted += s.n_fitted;
        r2_sum += s.r_squared.mean;
    }
    let rate = significant as f64 / fitted as f64;
    // binomial sd at 30,200 fits is about 0.0013
    assert!((rate - 0.05).abs() < 0.006, "rejection rate {rate}");
    assert!(r2_sum / 200.0 < 0.05);
}

#[test]
fn market_beta_is_stable_across_nested_models() {
    let (returns, bundle) = prepared(&DgpConfig::replica_preset());
    let models: Vec<_> = ["1", "3", "4", "5"].iter().map(|id| find_model(id).unwrap()).collect();
    let sums = run_suite(&returns, &bundle, &models, &SuiteOptions::default()).unwrap();
    let base = sums[0].beta.unwrap().mean;
    for s in &sums[1..] {
        let b = s.beta.unwrap().mean;
        assert!(((b - base) / base).abs() < 0.10, "model {}: {b} vs {base}", s.model_id);
    }
}

#[test]
fn noiseless_panel_recovers_alpha_and_beta() {
    let mut cfg = DgpConfig::simple(
        40,
        60,
        NormalProcess { mean: 1.0, sd: 2.0 },
        BetaSpec::Uniform { lo: -0.5, hi: 2.5 },
        0.0,
        17,
    );
    cfg.alphas = ValueSpec::Uniform { lo: -0.4, hi: 0.6 };
    let (panel, truth) = generate(&cfg).unwrap();
    let returns = compute_returns(&panel, SeriesKind::PriceIndex).unwrap();
    let bundle = FactorBundle::build(&panel, &returns, &FactorConfig::default()).unwrap();
    let m1 = find_model("1").unwrap();
    for a in 0..returns.n_assets() {
        let f = fit_asset(&returns, &bundle, &m1, a, &SuiteOptions::default()).unwrap();
        assert!((f.coefficients[0] - truth.alphas[a]).abs() < 1e-8, "alpha {a}");
        assert!((f.coefficients[1] - truth.betas[a]).abs() < 1e-8, "beta {a}");
    }
}

#[test]
fn constant_beta_rolling_bands_cover_truth() {
    let (mut covered, mut total) = (0usize, 0usize);
    for seed in 0..50 {
        let mut s = DrawStream::new(300 + seed);
        let m: Series = (0..92).map(|_| Some(s.normal(1.0, 2.0))).collect();
        let y: Series = m.iter().map(|v| Some(0.2 + 2.0 * v.unwrap() + s.normal(0.0, 0.1))).collect();
        let r = rolling_betas("A", &calendar(92), &y, &m, 24).unwrap();
        for e in &r.entries {
            assert!((e.beta - 2.0).abs() < 0.1);
            covered += usize::from(e.lower <= 2.0 && 2.0 <= e.upper);
            total += 1;
        }
    }
    assert!(covered as f64 / total as f64 >= 0.90, "{covered}/{total}");
}

#[test]
fn boom_bust_loading_gives_positive_beta_r2_correlation() {
    for seed in 0..20 {
        let mut s = DrawStream::new(400 + seed);
        let m: Series = (0..92).map(|_| Some(s.normal(1.0, 1.5))).collect();
        // loading rises through the boom and falls back in the bust
        let y: Series = m
            .iter()
            .enumerate()
            .map(|(t, v)| {
                let phase = t as f64 / 91.0;
                let beta = 0.1 + 1.8 * (std::f64::consts::PI * phase).sin().powi(2);
                Some(beta * v.unwrap() + s.normal(0.0, 1.0))
            })
            .collect();
        let r = rolling_betas("A", &calendar(92), &y, &m, 24).unwrap();
        let corr = beta_r2_correlation(&r).unwrap();
        assert!(corr > 0.3, "seed {seed}: {corr}");
    }
}

#[test]
fn portfolio_beta_is_mean_of_member_betas() {
    let (returns, bundle) = prepared(&DgpConfig::linear_pricing_preset(0.9).with_seed(5));
    let config = FmConfig::default();
    let set = form_portfolios(&returns, &bundle.market, &config).unwrap();
    let estimates = post_ranking_betas(&set, &bundle.market, &config).unwrap();
    let span = config.estimation.indices();
    let m = &bundle.market[span.clone()];
    for (members, est) in set.assignments.iter().zip(&estimates) {
        let mean: f64 = members
            .iter()
            .map(|r| {
                let a = returns.asset_index(&r.asset).unwrap();
                window_fit(&returns.asset_returns(a)[span.clone()], m).unwrap().coefficients[1]
            })
            .sum::<f64>()
            / members.len() as f64;
        assert!((est.beta - mean).abs() < 1e-10, "{} vs {mean}", est.beta);
    }
}

#[test]
fn two_member_portfolio_beta_tends_to_average() {
    let mut prev = f64::INFINITY;
    for noise in [1.0, 0.1, 0.01, 0.0] {
        let mut s = DrawStream::new(8);
        let m: Vec<f64> = (0..30).map(|_| s.normal(1.0, 2.0)).collect();
        let p: Series = m
            .iter()
            .map(|v| Some(0.5 * (0.5 * v + s.normal(0.0, noise)) + 0.5 * (1.5 * v + s.normal(0.0, noise))))
            .collect();
        let mm: Series = m.iter().copied().map(Some).collect();
        let err = (window_fit(&p, &mm).unwrap().coefficients[1] - 1.0).abs();
        assert!(err <= prev + 1e-12);
        prev = err;
    }
    assert!(prev < 1e-12);
}

#[test]
fn post_ranking_betas_are_mostly_monotone() {
    let config = FmConfig::default();
    let mut monotone = 0;
    for sim in 0..200 {
        // evenly spaced betas keep adjacent portfolios a fixed distance apart
        let mut cfg = DgpConfig::linear_pricing_preset(0.9).with_seed(2_000 + sim);
        cfg.betas = BetaSpec::Explicit((0..150).map(|i| i as f64 * 2.0 / 149.0).collect());
        let (returns, bundle) = prepared(&cfg);
        let set = form_portfolios(&returns, &bundle.market, &config).unwrap();
        let est = post_ranking_betas(&set, &bundle.market, &config).unwrap();
        monotone += usize::from(est.windows(2).all(|w| w[0].beta <= w[1].beta));
    }
    assert!(monotone >= 180, "{monotone}/200 monotone");
}
