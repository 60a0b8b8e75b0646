use falce_core::daod::{toy_adapt, ToyConfig, ToyDomains};

#[test]
fn indistinguishable_domains_keep_the_discriminator_at_chance() {
    for seed in [1, 7, 19] {
        let domains = ToyDomains::shifted_gaussians(seed, 100, 0.5, [0.0, 0.0]).unwrap();
        let state = toy_adapt(&domains, &ToyConfig::default()).unwrap();
        assert_eq!(state.history.len(), 2000);
        for r in &state.history {
            assert!((r.disc_acc - 0.5).abs() <= 0.1, "seed {seed} step {}: {}", r.step, r.disc_acc);
        }
        assert!(state.history.last().unwrap().class_acc >= 0.9);
    }
}

#[test]
fn losses_stay_finite_and_total_is_consistent() {
    let domains = ToyDomains::shifted_gaussians(7, 100, 0.5, [2.0, 2.0]).unwrap();
    let cfg = ToyConfig {
        steps: 300,
        ..ToyConfig::default()
    };
    let state = toy_adapt(&domains, &cfg).unwrap();
    for r in &state.history {
        assert!(r.l_det.is_finite() && r.l_det >= 0.0);
        assert!(r.l_dis.is_finite() && r.l_dis >= 0.0);
        assert!((r.l_total - (r.l_det + cfg.lambda1 * r.l_dis)).abs() < 1e-12);
    }
}
