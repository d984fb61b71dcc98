mod common;

use common::{oracle_mask, sample_scene};
use highway_core::env::EnvConfig;
use highway_core::safety::{mask_actions, SafetyConfig, SafetyMode};

#[test]
fn basic_mask_matches_exhaustive_oracle() {
    let env = EnvConfig::default();
    let cfg = SafetyConfig::default();
    let (mut agree, mut total) = (0, 0);
    let mut fallbacks = 0;
    for seed in 0..200 {
        let scene = sample_scene(10_000 + seed);
        let mask = mask_actions(&scene, &env, &cfg).unwrap();
        fallbacks += mask.fallback.is_some() as usize;
        for (a, verdict) in oracle_mask(&scene, &env, &cfg, 0.01) {
            total += 1;
            if verdict.safe == mask.raw_safe.contains(a) {
                agree += 1;
            } else {
                assert!(verdict.clearance.abs() < cfg.margin, "seed {seed} {a}: oracle clearance {}", verdict.clearance);
            }
        }
    }
    println!("agreement {agree}/{total}, fallback scenes {fallbacks}/200");
    assert!(agree as f64 >= 0.99 * total as f64);
}

#[test]
fn robust_mask_is_subset_of_basic_and_never_empty() {
    let env = EnvConfig::default();
    let basic = SafetyConfig::default();
    let robust = basic.with_mode(SafetyMode::Robust);
    let mut fallbacks = 0;
    for seed in 0..300 {
        let scene = sample_scene(20_000 + seed);
        let b = mask_actions(&scene, &env, &basic).unwrap();
        let r = mask_actions(&scene, &env, &robust).unwrap();
        fallbacks += r.fallback.is_some() as usize;
        assert!(!b.safe.is_empty() && !r.safe.is_empty());
        assert!(r.safe.is_subset(&b.safe), "seed {seed}");
        assert!(b.safe.is_subset(&b.admissible));
    }
    println!("robust fallback scenes {fallbacks}/300");
}
