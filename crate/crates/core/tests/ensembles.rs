use confnet_core::sim::{
    ensemble_initial, ensemble_member, monte_carlo, run, AgentValues, EnsembleBuilder, ModelKind, SimConfig,
};

fn small(sigma: f64) -> SimConfig {
    let mut c = SimConfig { n: 20, t_max: 30, model: ModelKind::Bc, seed: 3, ..SimConfig::default() };
    c.epsilon = AgentValues::Scalar(0.3);
    c.market.sigma = sigma;
    c
}

#[test]
fn single_run_ensemble_is_the_run() {
    let c = small(0.2);
    let e = monte_carlo(&c, 1, c.seed).unwrap();
    assert_eq!(e.mean_path, run(&c).unwrap().prices());
    assert!(e.variance_path.iter().all(|&v| v == 0.0));
}

#[test]
fn deterministic_ensembles_have_no_spread() {
    let e = monte_carlo(&small(0.0), 12, 9).unwrap();
    assert!(e.variance_path.iter().all(|&v| v == 0.0));
    let first = &e.per_run[0];
    for r in &e.per_run {
        assert_eq!(r.final_price, first.final_price);
        assert_eq!(r.skewness, first.skewness);
        assert_eq!(r.excess_kurtosis, first.excess_kurtosis);
    }
}

/// Spread of group means for `groups` disjoint groups of `size` members.
fn spread_of_means(c: &SimConfig, size: usize, groups: usize) -> f64 {
    let x0 = ensemble_initial(c, 1).unwrap();
    let finals: Vec<f64> = (0..groups)
        .map(|g| {
            let mut b = EnsembleBuilder::new();
            for k in 0..size {
                let idx = 10_000 * (size + 1) + g * size + k;
                b.push(k, idx as u64, &ensemble_member(c, &x0, 1, idx).unwrap());
            }
            *b.finish().mean_path.last().unwrap()
        })
        .collect();
    let m = finals.iter().sum::<f64>() / groups as f64;
    (finals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (groups - 1) as f64).sqrt()
}

#[test]
fn standard_error_shrinks_like_inverse_root() {
    let c = small(0.3);
    let s: Vec<f64> = [10, 40, 160].iter().map(|&r| spread_of_means(&c, r, 12)).collect();
    // each factor of four in runs halves the standard error
    for w in s.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.3..3.2).contains(&ratio), "{s:?}");
    }
    let e10 = monte_carlo(&c, 10, 4).unwrap();
    let e160 = monte_carlo(&c, 160, 4).unwrap();
    let se = |e: &confnet_core::sim::Ensemble| (e.variance_path.last().unwrap() / e.runs as f64).sqrt();
    let ratio = se(&e10) / se(&e160);
    assert!((2.0..8.0).contains(&ratio), "{ratio}");
}
