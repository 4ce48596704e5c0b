//! Comparison of the two calculi.
//!
//! [`cascade_joint`] is the Kolmogorov model obtained by chaining Malus-law
//! transition probabilities through both splitter stages;
//! [`discrepancy`] measures how far its pair marginals sit from the coherent
//! amplitude sum, and [`marginal_match_feasibility`] decides whether any
//! joint distribution at all reproduces a given set of pair marginals.

use serde::ser::Serializer;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::classical::{
    joint_from_weights, kolmogorov_or, pair_index, pair_marginal, CorrelatorSet,
    JointDistribution16, OutcomeQuadruple, OutcomeSign, PairDistribution, SettingPair, SignPattern,
    PAIR_OUTCOMES,
};
use crate::error::{Error, Result};
use crate::numfmt::json_number;
use crate::quantum::{
    amplitude_or, interference_term, pair_probabilities, pair_probability, Angle, DirectionConfig,
};
use crate::simplex::phase1;

/// Classical CHSH ceiling.
pub const CHSH_CLASSICAL_BOUND: f64 = 2.0;
/// Slack above [`CHSH_CLASSICAL_BOUND`] before a sign pattern certifies infeasibility.
pub const CHSH_SCREEN_TOL: f64 = 1e-9;
/// Pivoting tolerance of the phase-1 solver.
pub const PIVOT_TOL: f64 = 1e-9;
/// Largest marginal mismatch accepted from a witness.
pub const RESIDUAL_TOL: f64 = 1e-7;

/// Probability that a photon entering along `old` leaves along `new` when
/// the splitter axis is rotated by `theta`: `cos²θ` to keep the sign,
/// `sin²θ` to flip it.
pub fn malus_transition(old: OutcomeSign, new: OutcomeSign, theta: Angle) -> f64 {
    if old == new {
        theta.cos().powi(2)
    } else {
        theta.sin().powi(2)
    }
}

/// Probability of the first-stage outcome `(q_a', q_b')`.
pub fn first_stage_probability(q_ap: OutcomeSign, q_bp: OutcomeSign, theta_apbp: Angle) -> f64 {
    malus_transition(q_ap, q_bp, theta_apbp) / 2.0
}

/// The Malus-cascade joint: first-stage probabilities times the two
/// second-stage transitions. Each mass equals the squared branch amplitude.
pub fn cascade_joint(c: &DirectionConfig) -> JointDistribution16 {
    let (t1, t2, t3) = (c.theta_apbp(), c.theta_apa(), c.theta_bpb());
    let mut mass = [0.0; 16];
    for q in OutcomeQuadruple::all() {
        mass[q.index()] = first_stage_probability(q.q_a_prime, q.q_b_prime, t1)
            * malus_transition(q.q_a_prime, q.q_a, t2)
            * malus_transition(q.q_b_prime, q.q_b, t3);
    }
    JointDistribution16::from_masses(mass).expect("Malus cascade is normalized")
}

/// Coherent versus cascade probability of one `(q_a, q_b)` outcome in the
/// `AB` setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyReport {
    pub config: DirectionConfig,
    pub q_a: OutcomeSign,
    pub q_b: OutcomeSign,
    pub quantum_p: f64,
    pub cascade_p: f64,
    /// `quantum_p - cascade_p`.
    pub delta: f64,
}

impl DiscrepancyReport {
    pub fn to_json_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("config".into(), self.config.to_json_value());
        m.insert(
            "outcome".into(),
            Value::String(crate::classical::pair_key(self.q_a, self.q_b)),
        );
        m.insert("quantum_p".into(), json_number(self.quantum_p));
        m.insert("cascade_p".into(), json_number(self.cascade_p));
        m.insert("delta".into(), json_number(self.delta));
        Value::Object(m)
    }
}

pub fn discrepancy(c: &DirectionConfig, q_a: OutcomeSign, q_b: OutcomeSign) -> DiscrepancyReport {
    let quantum_p = pair_probability(c, q_a, q_b);
    let cascade_p = pair_marginal(&cascade_joint(c), SettingPair::AB).prob(q_a, q_b);
    DiscrepancyReport {
        config: *c,
        q_a,
        q_b,
        quantum_p,
        cascade_p,
        delta: quantum_p - cascade_p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    ChshSignPattern,
    SolverPhase1,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::ChshSignPattern => "ChshSignPattern",
            CertificateKind::SolverPhase1 => "SolverPhase1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub sign_pattern: Option<SignPattern>,
    /// Signed CHSH sum for [`CertificateKind::ChshSignPattern`], final
    /// artificial objective for [`CertificateKind::SolverPhase1`].
    pub violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub witness: Option<JointDistribution16>,
    pub certificate: Option<Certificate>,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }

    fn infeasible(cert: Certificate) -> Self {
        FeasibilityResult {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            certificate: Some(cert),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut m = Map::new();
        let status = match self.status {
            FeasibilityStatus::Feasible => "Feasible",
            FeasibilityStatus::Infeasible => "Infeasible",
        };
        m.insert("status".into(), Value::String(status.into()));
        if let Some(w) = &self.witness {
            m.insert("witness".into(), w.to_json_value());
        }
        if let Some(cert) = &self.certificate {
            let mut c = Map::new();
            c.insert("kind".into(), Value::String(cert.kind.name().into()));
            if let Some(p) = cert.sign_pattern {
                c.insert("sign_pattern".into(), Value::String(p.key()));
            }
            if let Some(v) = cert.violation {
                c.insert("violation".into(), json_number(v));
            }
            m.insert("certificate".into(), Value::Object(c));
        }
        Value::Object(m)
    }
}

impl Serialize for FeasibilityResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

/// Orders targets by setting, rejecting missing or duplicated settings and
/// revalidating each distribution.
fn order_targets(targets: &[PairDistribution]) -> Result<[PairDistribution; 4]> {
    if targets.len() != 4 {
        return Err(Error::MalformedTargets(format!(
            "expected 4 pair distributions, got {}",
            targets.len()
        )));
    }
    let mut slots: [Option<PairDistribution>; 4] = [None; 4];
    for t in targets {
        let slot = &mut slots[t.setting.index()];
        if slot.is_some() {
            return Err(Error::MalformedTargets(format!(
                "setting {} appears twice",
                t.setting
            )));
        }
        *slot = Some(PairDistribution::new(t.setting, t.probs())?);
    }
    let mut out = Vec::with_capacity(4);
    for (i, s) in slots.into_iter().enumerate() {
        out.push(s.ok_or_else(|| {
            Error::MalformedTargets(format!("setting {} missing", SettingPair::ALL[i]))
        })?);
    }
    Ok([out[0], out[1], out[2], out[3]])
}

/// Strongest violated CHSH sign pattern, if any exceeds `2 + 1e-9`.
/// Ties keep the earlier pattern of [`SignPattern::chsh_family`].
pub fn chsh_screen(correlators: &CorrelatorSet) -> Option<(SignPattern, f64)> {
    let mut best: Option<(SignPattern, f64)> = None;
    for p in SignPattern::chsh_family() {
        let v = correlators.signed_sum(p);
        if v > CHSH_CLASSICAL_BOUND + CHSH_SCREEN_TOL && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((p, v));
        }
    }
    best
}

fn max_marginal_error(d: &JointDistribution16, targets: &[PairDistribution; 4]) -> f64 {
    targets
        .iter()
        .flat_map(|t| {
            let m = pair_marginal(d, t.setting).probs();
            t.probs()
                .into_iter()
                .zip(m)
                .map(|(x, y)| (x - y).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Solves the 16-equation marginal system with the phase-1 simplex alone,
/// without the CHSH screen.
pub fn phase1_feasibility(targets: &[PairDistribution]) -> Result<FeasibilityResult> {
    let targets = order_targets(targets)?;
    let mut a = Vec::with_capacity(16);
    let mut b = Vec::with_capacity(16);
    for t in &targets {
        let (v1, v2) = t.setting.variables();
        for (q1, q2) in PAIR_OUTCOMES {
            let row: Vec<f64> = OutcomeQuadruple::all()
                .map(|q| {
                    if q.get(v1) == q1 && q.get(v2) == q2 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            a.push(row);
            b.push(t.probs()[pair_index(q1, q2)]);
        }
    }
    let sol = phase1(&a, &b, PIVOT_TOL);
    let infeasible = |violation: f64| {
        FeasibilityResult::infeasible(Certificate {
            kind: CertificateKind::SolverPhase1,
            sign_pattern: None,
            violation: Some(violation),
        })
    };
    if sol.objective > RESIDUAL_TOL {
        return Ok(infeasible(sol.objective));
    }
    let mut weights = [0.0; 16];
    for (w, &x) in weights.iter_mut().zip(&sol.x) {
        *w = x.max(0.0);
    }
    let Ok(witness) = joint_from_weights(&weights) else {
        return Ok(infeasible(sol.objective));
    };
    let err = max_marginal_error(&witness, &targets);
    if err > RESIDUAL_TOL {
        return Ok(infeasible(err));
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::Feasible,
        witness: Some(witness),
        certificate: None,
    })
}

/// Decides whether some joint distribution has the four given pair
/// marginals. The CHSH screen runs first and yields a sign-pattern
/// certificate; the phase-1 simplex decides everything the screen passes.
pub fn marginal_match_feasibility(targets: &[PairDistribution]) -> Result<FeasibilityResult> {
    let ordered = order_targets(targets)?;
    let correlators = CorrelatorSet::from_array(ordered.map(|t| t.correlator()));
    if let Some((pattern, value)) = chsh_screen(&correlators) {
        return Ok(FeasibilityResult::infeasible(Certificate {
            kind: CertificateKind::ChshSignPattern,
            sign_pattern: Some(pattern),
            violation: Some(value),
        }));
    }
    phase1_feasibility(&ordered)
}

/// Quantum pair marginals for all four settings, from the closed form.
pub fn quantum_targets(c: &DirectionConfig) -> [PairDistribution; 4] {
    SettingPair::ALL.map(|s| pair_from_probs(s, pair_probabilities(c, s)))
}

fn pair_from_probs(s: SettingPair, p: [f64; 4]) -> PairDistribution {
    PairDistribution {
        setting: s,
        p_pp: p[0],
        p_pm: p[1],
        p_mp: p[2],
        p_mm: p[3],
    }
}

/// Pair marginals of `d` for all four settings.
pub fn joint_targets(d: &JointDistribution16) -> [PairDistribution; 4] {
    SettingPair::ALL.map(|s| pair_marginal(d, s))
}

/// Both "OR" rules applied to the same two amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrComparison {
    /// `a1² + a2²`.
    pub kolmogorov: f64,
    /// `|a1 + a2|²`.
    pub quantum: f64,
    /// `2·a1·a2`.
    pub interference: f64,
}

pub fn kolmogorov_vs_quantum_or(a1: f64, a2: f64) -> Result<OrComparison> {
    let kolmogorov = kolmogorov_or(a1 * a1, a2 * a2)?;
    let quantum = amplitude_or(a1, a2)?;
    Ok(OrComparison {
        kolmogorov,
        quantum,
        interference: interference_term(a1, a2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::OutcomeSign::Plus as P;
    use crate::classical::{chsh, deterministic_joint, random_joint};
    use crate::quantum::branch_amplitudes;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn quad(s: &str) -> OutcomeQuadruple {
        s.parse().unwrap()
    }

    #[test]
    fn cascade_equals_squared_branches() {
        for cfg in [
            DirectionConfig::canonical(),
            DirectionConfig::from_radians(0.3, -1.2, 2.0, 0.1).unwrap(),
            DirectionConfig::from_radians(5.0, 4.0, -3.0, 0.0).unwrap(),
        ] {
            let d = cascade_joint(&cfg);
            let t = branch_amplitudes(&cfg);
            for q in OutcomeQuadruple::all() {
                assert!((d.mass(q) - t.amplitude(q).powi(2)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cascade_examples() {
        let d = cascade_joint(&DirectionConfig::aligned(Angle::ZERO));
        assert_eq!(d.mass(quad("++++")), 0.5);
        assert_eq!(d.mass(quad("----")), 0.5);
        assert_eq!(d.masses().iter().filter(|&&m| m == 0.0).count(), 14);

        let c = DirectionConfig::from_radians(0.1, 0.9, -0.5, 1.4).unwrap();
        let (t1, t2, t3) = (c.theta_apbp(), c.theta_apa(), c.theta_bpb());
        let want = t1.sin().powi(2) * t2.sin().powi(2) * t3.cos().powi(2) / 2.0;
        assert!((cascade_joint(&c).mass(quad("+-++")) - want).abs() < 1e-16);

        let m = pair_marginal(
            &cascade_joint(&DirectionConfig::canonical()),
            SettingPair::AB,
        );
        assert!((m.p_pp - 0.25).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_examples() {
        let r = discrepancy(&DirectionConfig::aligned(Angle::from_radians(0.7)), P, P);
        assert!(r.delta.abs() < 1e-15);

        let r = discrepancy(&DirectionConfig::canonical(), P, P);
        assert!((r.quantum_p - (PI / 8.0).cos().powi(2) / 2.0).abs() < 1e-15);
        assert!((r.cascade_p - 0.25).abs() < 1e-15);
        assert!((r.delta - SQRT_2 / 8.0).abs() < 1e-9);
        assert_eq!(r.delta, r.quantum_p - r.cascade_p);

        let c = DirectionConfig::from_radians(0.4, 0.4, 1.3, 1.3).unwrap();
        for (qa, qb) in PAIR_OUTCOMES {
            assert!(discrepancy(&c, qa, qb).delta.abs() < 1e-15);
        }
    }

    #[test]
    fn feasibility_deterministic_targets() {
        let d = deterministic_joint(quad("+-+-"));
        let r = marginal_match_feasibility(&joint_targets(&d)).unwrap();
        assert!(r.is_feasible());
        let w = r.witness.unwrap();
        for s in SettingPair::ALL {
            assert_eq!(pair_marginal(&w, s).probs(), pair_marginal(&d, s).probs());
        }
    }

    #[test]
    fn feasibility_aligned_quantum_targets() {
        let targets = quantum_targets(&DirectionConfig::aligned(Angle::ZERO));
        for t in &targets {
            assert_eq!(t.probs(), [0.5, 0.0, 0.0, 0.5]);
        }
        let r = marginal_match_feasibility(&targets).unwrap();
        assert!(r.is_feasible());
        let w = r.witness.unwrap();
        assert!((w.mass(quad("++++")) - 0.5).abs() < 1e-12);
        assert!((w.mass(quad("----")) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn feasibility_canonical_quantum_targets() {
        let r =
            marginal_match_feasibility(&quantum_targets(&DirectionConfig::canonical())).unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
        let cert = r.certificate.unwrap();
        assert_eq!(cert.kind, CertificateKind::ChshSignPattern);
        assert_eq!(cert.sign_pattern, Some(SignPattern::CHSH));
        assert!((cert.violation.unwrap() - 2.0 * SQRT_2).abs() < 1e-12);
        assert!(r.witness.is_none());
    }

    #[test]
    fn phase1_alone_rejects_canonical() {
        let r = phase1_feasibility(&quantum_targets(&DirectionConfig::canonical())).unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
        let cert = r.certificate.unwrap();
        assert_eq!(cert.kind, CertificateKind::SolverPhase1);
        assert!(cert.violation.unwrap() > RESIDUAL_TOL);
    }

    #[test]
    fn phase1_catches_signalling_targets() {
        // A is always + alongside B but always - alongside B'; every correlator is 0
        let targets = [
            PairDistribution::new(SettingPair::AB, [0.5, 0.5, 0.0, 0.0]).unwrap(),
            PairDistribution::new(SettingPair::APrimeB, [0.25; 4]).unwrap(),
            PairDistribution::new(SettingPair::ABPrime, [0.0, 0.0, 0.5, 0.5]).unwrap(),
            PairDistribution::new(SettingPair::APrimeBPrime, [0.25; 4]).unwrap(),
        ];
        let r = marginal_match_feasibility(&targets).unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
        assert_eq!(r.certificate.unwrap().kind, CertificateKind::SolverPhase1);
    }

    #[test]
    fn malformed_targets() {
        let t = joint_targets(&random_joint(1));
        assert!(matches!(
            marginal_match_feasibility(&t[..3]),
            Err(Error::MalformedTargets(_))
        ));
        let dup = [t[0], t[0], t[2], t[3]];
        assert!(matches!(
            marginal_match_feasibility(&dup),
            Err(Error::MalformedTargets(_))
        ));
        let mut bad = t;
        bad[1].p_pp += 0.5;
        assert!(marginal_match_feasibility(&bad).is_err());
    }

    #[test]
    fn random_joint_targets_are_feasible() {
        for seed in 0..50 {
            let d = random_joint(seed);
            let targets = joint_targets(&d);
            let r = marginal_match_feasibility(&targets).unwrap();
            assert!(r.is_feasible(), "seed {seed}");
            let w = r.witness.unwrap();
            assert!(max_marginal_error(&w, &targets) < RESIDUAL_TOL);
            assert!(chsh(&w).abs() <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn or_comparison() {
        let r = kolmogorov_vs_quantum_or(0.5, 0.5).unwrap();
        assert_eq!((r.kolmogorov, r.quantum, r.interference), (0.5, 1.0, 0.5));
        let r = kolmogorov_vs_quantum_or(0.3, 0.0).unwrap();
        assert_eq!((r.quantum, r.interference), (r.kolmogorov, 0.0));
        assert!((r.kolmogorov - 0.09).abs() < 1e-17);
        assert!(matches!(
            kolmogorov_vs_quantum_or(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            Err(Error::AmplitudeOverflow { .. })
        ));
        assert!(matches!(
            kolmogorov_vs_quantum_or(0.9, -0.9),
            Err(Error::ProbabilityOverflow { .. })
        ));
    }

    #[test]
    fn feasibility_json() {
        let r =
            marginal_match_feasibility(&quantum_targets(&DirectionConfig::canonical())).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"certificate":{"kind":"ChshSignPattern","sign_pattern":"++-+","violation":2.8284271247461898},"status":"Infeasible"}"#
        );
    }
}
