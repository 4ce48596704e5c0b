//! Acceptance criteria. Run with `--nocapture` to see one line per criterion.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use chshlab_core::analysis::joint_targets;
use chshlab_core::montecarlo::run_chsh_experiment;
use chshlab_core::{
    cascade_joint, chsh, chsh_quantum, discrepancy, kolmogorov_vs_quantum_or,
    marginal_match_feasibility, max_chsh_deterministic, optimize_chsh, pair_marginal,
    pair_probability, quantum_targets, random_joint, Angle, CertificateKind, DirectionConfig,
    FeasibilityStatus, Model, OutcomeSign, SettingPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TSIRELSON: f64 = 2.0 * SQRT_2;

fn random_config(rng: &mut ChaCha8Rng) -> DirectionConfig {
    DirectionConfig::from_radians(
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
        rng.random_range(-PI..PI),
    )
    .unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let ok = out.ok && elapsed < budget;
    println!(
        "{} criterion {id}: {name}: {} ({:.3} s, budget {} s)",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn classical_bound() -> Outcome {
    let (max, maximizers) = max_chsh_deterministic();
    let mut worst = 0.0f64;
    for seed in 0..10_000 {
        worst = worst.max(chsh(&random_joint(seed)).abs());
    }
    Outcome {
        ok: max == 2.0 && !maximizers.is_empty() && worst <= 2.0 + 1e-9,
        detail: format!(
            "deterministic max {max} ({} maximizers), max |chsh| over 10000 joints {worst:.12}",
            maximizers.len()
        ),
    }
}

fn quantum_value() -> Outcome {
    let v = chsh_quantum(&DirectionConfig::canonical());
    let opt = optimize_chsh(64, 40).unwrap();
    Outcome {
        ok: (v - TSIRELSON).abs() <= 1e-12 && (opt.value - TSIRELSON).abs() <= 1e-6,
        detail: format!(
            "canonical {v:.15}, optimizer {:.12}, target {TSIRELSON:.15}",
            opt.value
        ),
    }
}

fn amplitude_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_closed = 0.0f64;
    let mut worst_shift = 0.0f64;
    for _ in 0..1000 {
        let c = random_config(&mut rng);
        let p = pair_probability(&c, OutcomeSign::Plus, OutcomeSign::Plus);
        let oracle = (c.a.radians() - c.b.radians()).cos().powi(2) / 2.0;
        worst_closed = worst_closed.max((p - oracle).abs());
        let mut moved = c;
        moved.a_prime = Angle::from_radians(rng.random_range(-PI..PI));
        moved.b_prime = Angle::from_radians(rng.random_range(-PI..PI));
        let q = pair_probability(&moved, OutcomeSign::Plus, OutcomeSign::Plus);
        worst_shift = worst_shift.max((p - q).abs());
    }
    Outcome {
        ok: worst_closed <= 1e-12 && worst_shift <= 1e-12,
        detail: format!(
            "max |P - cos²/2| {worst_closed:.2e}, max shift under a', b' {worst_shift:.2e}"
        ),
    }
}

fn cascade_discrepancy() -> Outcome {
    let d = discrepancy(
        &DirectionConfig::canonical(),
        OutcomeSign::Plus,
        OutcomeSign::Plus,
    );
    let quantum_oracle = (1.0 + (PI / 4.0).cos()) / 4.0;
    let values_ok = (d.quantum_p - quantum_oracle).abs() <= 1e-9
        && (d.quantum_p - 0.4267767).abs() <= 1e-7
        && (d.cascade_p - 0.25).abs() <= 1e-9
        && (d.delta - SQRT_2 / 8.0).abs() <= 1e-9
        && (d.delta - 0.1767767).abs() <= 1e-7;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        worst = worst.max(chsh(&cascade_joint(&random_config(&mut rng))).abs());
    }
    Outcome {
        ok: values_ok && worst <= 2.0 + 1e-9,
        detail: format!(
            "quantum {:.9}, cascade {:.9}, delta {:.9}, max |chsh| over 10000 cascades {worst:.12}",
            d.quantum_p, d.cascade_p, d.delta
        ),
    }
}

fn feasibility() -> Outcome {
    let canonical =
        marginal_match_feasibility(&quantum_targets(&DirectionConfig::canonical())).unwrap();
    let cert = canonical.certificate.as_ref();
    let violation = cert.and_then(|c| c.violation).unwrap_or(f64::NAN);
    let canonical_ok = canonical.status == FeasibilityStatus::Infeasible
        && cert.map(|c| c.kind) == Some(CertificateKind::ChshSignPattern)
        && (violation - TSIRELSON).abs() <= 1e-9;

    let mut worst = 0.0f64;
    let mut all_feasible = true;
    for seed in 0..1000 {
        let targets = joint_targets(&random_joint(10_000 + seed));
        let r = marginal_match_feasibility(&targets).unwrap();
        match (&r.status, &r.witness) {
            (FeasibilityStatus::Feasible, Some(w)) => {
                for s in SettingPair::ALL {
                    let got = pair_marginal(w, s).probs();
                    let want = targets[s.index()].probs();
                    for k in 0..4 {
                        worst = worst.max((got[k] - want[k]).abs());
                    }
                }
            }
            _ => all_feasible = false,
        }
    }

    let aligned = DirectionConfig::aligned(Angle::from_degrees(17.0));
    let aligned_ok = marginal_match_feasibility(&quantum_targets(&aligned))
        .unwrap()
        .status
        == FeasibilityStatus::Feasible;

    Outcome {
        ok: canonical_ok && all_feasible && worst < 1e-7 && aligned_ok,
        detail: format!(
            "canonical {:?} violation {violation:.12}, 1000 random joints feasible={all_feasible} \
             max witness error {worst:.2e}, aligned feasible={aligned_ok}",
            canonical.status
        ),
    }
}

fn experiment_report(model: Model) -> (f64, f64, String) {
    let e = run_chsh_experiment(&DirectionConfig::canonical(), model, 1_000_000, 42).unwrap();
    let mut report = String::new();
    for r in &e.settings {
        report.push_str(&r.counts.to_csv().unwrap());
        report.push_str(&r.correlator.to_json_value().to_string());
    }
    report.push_str(&e.chsh.to_json_value().to_string());
    (e.chsh.value, e.chsh.stderr, report)
}

fn monte_carlo() -> Outcome {
    let (q, q_se, q_report) = experiment_report(Model::Quantum);
    let (k, k_se, k_report) = experiment_report(Model::Cascade);
    let repeat_ok = q_report == experiment_report(Model::Quantum).2
        && k_report == experiment_report(Model::Cascade).2;
    Outcome {
        ok: (q - TSIRELSON).abs() <= 5.0 * q_se && k <= 2.0 + 5.0 * k_se && repeat_ok,
        detail: format!(
            "quantum {q:.6} ± {q_se:.6}, cascade {k:.6} ± {k_se:.6}, byte-identical={repeat_ok}"
        ),
    }
}

fn interference() -> Outcome {
    let r = kolmogorov_vs_quantum_or(0.5, 0.5).unwrap();
    let example_ok = (r.kolmogorov - 0.5).abs() <= 1e-15
        && (r.quantum - 1.0).abs() <= 1e-15
        && (r.interference - 0.5).abs() <= 1e-15;
    let mut iff_ok = true;
    let cases = [
        (0.0, 0.7),
        (0.7, 0.0),
        (0.0, 0.0),
        (0.6, -0.6),
        (-0.3, 0.4),
        (1e-200, 1e-200),
        (0.3, 0.4),
    ];
    for (a1, a2) in cases {
        let r = kolmogorov_vs_quantum_or(a1, a2).unwrap();
        iff_ok &= (r.interference == 0.0) == (a1 * a2 == 0.0);
    }
    Outcome {
        ok: example_ok && iff_ok,
        detail: format!(
            "(0.5, 0.5) -> kolmogorov {}, quantum {}, interference {}; vanishing iff a1·a2 = 0: {iff_ok}",
            r.kolmogorov, r.quantum, r.interference
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let secs = Duration::from_secs;
    let results = [
        check(1, "classical bound", secs(1), classical_bound),
        check(2, "quantum value", secs(5), quantum_value),
        check(3, "amplitude-chain identity", secs(1), amplitude_chain),
        check(4, "cascade discrepancy", secs(2), cascade_discrepancy),
        check(5, "feasibility certificate", secs(10), feasibility),
        check(6, "Monte Carlo concordance", secs(30), monte_carlo),
        check(7, "interference arithmetic", secs(1), interference),
    ];
    let failed: Vec<usize> = (1..=7).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
