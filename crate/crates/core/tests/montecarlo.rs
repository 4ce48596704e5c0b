use std::f64::consts::PI;

use chshlab_core::classical::PAIR_OUTCOMES;
use chshlab_core::montecarlo::{run_chsh_experiment, Counts};
use chshlab_core::{
    cascade_joint, chsh, estimate_chsh, estimate_correlator, pair_probability_closed,
    sample_cascade, sample_pair_quantum, DirectionConfig, Model, OutcomeQuadruple, SettingPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: u64 = 1_000_000;

fn within_binomial_band(count: u64, n: u64, p: f64) -> bool {
    let freq = count as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    // 5 stderr; a zero-probability outcome must never appear
    if se == 0.0 {
        return count as f64 == p * n as f64;
    }
    (freq - p).abs() <= 5.0 * se
}

#[test]
fn quantum_pair_frequencies_follow_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for i in 0..20 {
        let c = DirectionConfig::from_radians(
            rng.random_range(0.0..PI),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..PI),
        )
        .unwrap();
        let s = SettingPair::ALL[i % 4];
        let t = sample_pair_quantum(&c, s, N, i as u64).unwrap();
        let Counts::Pair { counts, .. } = t.counts() else {
            panic!()
        };
        for (k, (qa, qb)) in PAIR_OUTCOMES.iter().enumerate() {
            let p = pair_probability_closed(c.theta(s), *qa, *qb);
            assert!(
                within_binomial_band(counts[k], N, p),
                "config {i}, outcome {k}"
            );
        }
    }
}

#[test]
fn cascade_frequencies_follow_cascade_joint() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for i in 0..20 {
        let c = DirectionConfig::from_radians(
            rng.random_range(0.0..PI),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..PI),
        )
        .unwrap();
        let d = cascade_joint(&c);
        let t = sample_cascade(&c, N, 1000 + i).unwrap();
        let Counts::Quadruple(counts) = t.counts() else {
            panic!()
        };
        for q in OutcomeQuadruple::all() {
            assert!(
                within_binomial_band(counts[q.index()], N, d.mass(q)),
                "config {i}, quadruple {q}"
            );
        }
    }
}

#[test]
fn quantum_pi_over_eight_frequency() {
    let c = DirectionConfig::from_radians(PI / 8.0, 0.0, 0.0, 0.0).unwrap();
    let t = sample_pair_quantum(&c, SettingPair::AB, N, 7).unwrap();
    // oracle: cos²(π/8)/2 = (1 + cos(π/4))/4
    let p = (1.0 + (PI / 4.0).cos()) / 4.0;
    assert!((p - 0.4267767).abs() < 1e-7);
    assert!(within_binomial_band(t.rows()[0].1, N, p));
}

#[test]
fn canonical_cascade_pp_frequency() {
    let t = sample_cascade(&DirectionConfig::canonical(), N, 8).unwrap();
    let ab = t.reduce_to_pair(SettingPair::AB);
    assert!(within_binomial_band(ab.rows()[0].1, N, 0.25));
}

#[test]
fn chsh_estimates_at_canonical_config() {
    let c = DirectionConfig::canonical();
    let q = estimate_chsh(&c, Model::Quantum, N, 42).unwrap();
    assert!((q.value - 2.0 * 2f64.sqrt()).abs() <= 5.0 * q.stderr);
    assert_eq!(q, estimate_chsh(&c, Model::Quantum, N, 42).unwrap());

    let k = estimate_chsh(&c, Model::Cascade, N, 42).unwrap();
    let analytic = chsh(&cascade_joint(&c));
    assert!(k.value <= 2.0 + 5.0 * k.stderr);
    assert!((k.value - analytic).abs() <= 5.0 * k.stderr);
    assert_eq!(
        k.value.to_bits(),
        estimate_chsh(&c, Model::Cascade, N, 42)
            .unwrap()
            .value
            .to_bits()
    );
}

#[test]
fn experiment_components_are_consistent() {
    let c = DirectionConfig::from_degrees(0.0, 30.0, 15.0, 45.0).unwrap();
    let e = run_chsh_experiment(&c, Model::Quantum, 50_000, 3).unwrap();
    assert_eq!(e.settings.len(), 4);
    for r in &e.settings {
        assert_eq!(r.counts.n(), 50_000);
        assert_eq!(estimate_correlator(&r.counts).unwrap(), r.correlator);
        assert!(r.correlator.value.abs() <= 1.0);
    }
    let rss: f64 = e
        .settings
        .iter()
        .map(|r| r.correlator.stderr.powi(2))
        .sum::<f64>()
        .sqrt();
    assert_eq!(e.chsh.stderr, rss);
    assert!(e.chsh.value.abs() <= 4.0);
}
