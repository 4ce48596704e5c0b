//! Amplitude calculus for the two-photon polarization singlet.
//!
//! All amplitudes are signed reals. Relative angles follow one convention
//! throughout: `θ_uv = u - v`, and a basis change from an old axis to a new
//! one uses `θ = old - new` in
//!
//! ```text
//! |+_old⟩ =  cosθ |+_new⟩ + sinθ |-_new⟩
//! |-_old⟩ = -sinθ |+_new⟩ + cosθ |-_new⟩
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::classical::{
    pair_index, OutcomeQuadruple, OutcomeSign, SettingPair, Variable, PAIR_OUTCOMES,
};
use crate::error::{Error, Result};
use crate::numfmt::json_number;

/// Tolerance on the squared norm of kets and branch tables.
pub const NORM_TOL: f64 = 1e-12;

/// An angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_radians(r: f64) -> Self {
        Angle(r)
    }

    pub fn from_degrees(d: f64) -> Self {
        Angle(d.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Representative in `[0, π)`; polarization directions are axes.
    pub fn axis(self) -> Angle {
        Angle(self.0.rem_euclid(PI))
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle(-self.0)
    }
}

/// Absolute orientations of the four analyzer axes in a common plane.
/// Relative angles are always derived from these, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionConfig {
    pub a: Angle,
    pub a_prime: Angle,
    pub b: Angle,
    pub b_prime: Angle,
}

impl DirectionConfig {
    pub fn new(a: Angle, a_prime: Angle, b: Angle, b_prime: Angle) -> Result<Self> {
        for angle in [a, a_prime, b, b_prime] {
            if !angle.is_finite() {
                return Err(Error::NonFiniteAngle(angle.radians()));
            }
        }
        Ok(DirectionConfig {
            a,
            a_prime,
            b,
            b_prime,
        })
    }

    pub fn from_radians(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        DirectionConfig::new(
            Angle::from_radians(a),
            Angle::from_radians(a_prime),
            Angle::from_radians(b),
            Angle::from_radians(b_prime),
        )
    }

    pub fn from_degrees(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Result<Self> {
        DirectionConfig::new(
            Angle::from_degrees(a),
            Angle::from_degrees(a_prime),
            Angle::from_degrees(b),
            Angle::from_degrees(b_prime),
        )
    }

    /// `a = 0, a' = π/4, b = π/8, b' = 3π/8`, which reaches `2√2`.
    pub fn canonical() -> Self {
        DirectionConfig::from_radians(0.0, PI / 4.0, PI / 8.0, 3.0 * PI / 8.0)
            .expect("finite angles")
    }

    /// All four axes along `angle`.
    pub fn aligned(angle: Angle) -> Self {
        DirectionConfig {
            a: angle,
            a_prime: angle,
            b: angle,
            b_prime: angle,
        }
    }

    pub fn angle(&self, v: Variable) -> Angle {
        match v {
            Variable::A => self.a,
            Variable::APrime => self.a_prime,
            Variable::B => self.b,
            Variable::BPrime => self.b_prime,
        }
    }

    /// `θ_a'b' = a' - b'`.
    pub fn theta_apbp(&self) -> Angle {
        self.a_prime - self.b_prime
    }

    /// `θ_a'a = a' - a`.
    pub fn theta_apa(&self) -> Angle {
        self.a_prime - self.a
    }

    /// `θ_b'b = b' - b`.
    pub fn theta_bpb(&self) -> Angle {
        self.b_prime - self.b
    }

    /// Relative angle `u - v` between the photon-1 and photon-2 axes of `s`.
    pub fn theta(&self, s: SettingPair) -> Angle {
        let (v1, v2) = s.variables();
        self.angle(v1) - self.angle(v2)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.a, self.a_prime, self.b, self.b_prime].map(Angle::radians)
    }

    /// `{"a", "a_prime", "b", "b_prime"}` in radians.
    pub fn to_json_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("a".into(), json_number(self.a.radians()));
        m.insert("a_prime".into(), json_number(self.a_prime.radians()));
        m.insert("b".into(), json_number(self.b.radians()));
        m.insert("b_prime".into(), json_number(self.b_prime.radians()));
        Value::Object(m)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let raw: RawConfig = serde_json::from_value(v.clone())?;
        DirectionConfig::from_radians(raw.a, raw.a_prime, raw.b, raw.b_prime)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
}

impl Serialize for DirectionConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DirectionConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawConfig::deserialize(deserializer)?;
        DirectionConfig::from_radians(raw.a, raw.a_prime, raw.b, raw.b_prime)
            .map_err(de::Error::custom)
    }
}

/// Which photon a basis change applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Photon {
    One,
    Two,
}

/// Name of the analyzer axis a ket is expanded in, e.g. `a'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisLabel(pub String);

impl BasisLabel {
    pub fn new(s: impl Into<String>) -> Self {
        BasisLabel(s.into())
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Two-photon state expanded in a product polarization basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonKet {
    pub basis1: BasisLabel,
    pub basis2: BasisLabel,
    /// Amplitudes indexed by `(q1, q2)` in the order `++, +-, -+, --`.
    amp: [f64; 4],
}

impl TwoPhotonKet {
    pub fn new(basis1: BasisLabel, basis2: BasisLabel, amp: [f64; 4]) -> Result<Self> {
        let norm: f64 = amp.iter().map(|x| x * x).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "ket squared norm {norm} differs from 1"
            )));
        }
        Ok(TwoPhotonKet {
            basis1,
            basis2,
            amp,
        })
    }

    pub fn amplitude(&self, q1: OutcomeSign, q2: OutcomeSign) -> f64 {
        self.amp[pair_index(q1, q2)]
    }

    pub fn amplitudes(&self) -> [f64; 4] {
        self.amp
    }

    pub fn norm_squared(&self) -> f64 {
        self.amp.iter().map(|x| x * x).sum()
    }
}

/// Singlet coefficient `√2 · ⟨q_1 q_2|ψ⟩` in the `{±_a'} ⊗ {±_b'}` basis.
fn singlet_coefficient(q1: OutcomeSign, q2: OutcomeSign, theta: Angle) -> f64 {
    use OutcomeSign::{Minus, Plus};
    match (q1, q2) {
        (Plus, Plus) | (Minus, Minus) => theta.cos(),
        (Plus, Minus) => theta.sin(),
        (Minus, Plus) => -theta.sin(),
    }
}

/// Coefficient of `|new⟩` in the expansion of `|old⟩` for a basis change
/// by `theta = old - new`.
pub fn rotation_entry(old: OutcomeSign, new: OutcomeSign, theta: Angle) -> f64 {
    use OutcomeSign::{Minus, Plus};
    match (old, new) {
        (Plus, Plus) | (Minus, Minus) => theta.cos(),
        (Plus, Minus) => theta.sin(),
        (Minus, Plus) => -theta.sin(),
    }
}

/// The singlet in the `{±_a'} ⊗ {±_b'}` basis with `θ = θ_a'b'`.
pub fn singlet_ket(theta_apbp: Angle) -> TwoPhotonKet {
    let amp = PAIR_OUTCOMES.map(|(q1, q2)| singlet_coefficient(q1, q2, theta_apbp) * FRAC_1_SQRT_2);
    TwoPhotonKet {
        basis1: BasisLabel::new("a'"),
        basis2: BasisLabel::new("b'"),
        amp,
    }
}

/// Re-expresses one photon's basis. `theta` is the old-to-new angle
/// (`θ_a'a` for photon 1, `θ_b'b` for photon 2).
pub fn rotate_photon_basis(
    k: &TwoPhotonKet,
    photon: Photon,
    theta: Angle,
    new_label: BasisLabel,
) -> TwoPhotonKet {
    let mut amp = [0.0; 4];
    for (q1, q2) in PAIR_OUTCOMES {
        for old in OutcomeSign::BOTH {
            let (src, factor) = match photon {
                Photon::One => ((old, q2), rotation_entry(old, q1, theta)),
                Photon::Two => ((q1, old), rotation_entry(old, q2, theta)),
            };
            amp[pair_index(q1, q2)] += k.amplitude(src.0, src.1) * factor;
        }
    }
    let (basis1, basis2) = match photon {
        Photon::One => (new_label, k.basis2.clone()),
        Photon::Two => (k.basis1.clone(), new_label),
    };
    TwoPhotonKet {
        basis1,
        basis2,
        amp,
    }
}

/// Amplitudes of the 16 full measurement histories through both splitter
/// stages, keyed by `(q_a, q_a', q_b, q_b')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAmplitudeTable {
    amp: [f64; 16],
}

impl BranchAmplitudeTable {
    pub fn amplitude(&self, q: OutcomeQuadruple) -> f64 {
        self.amp[q.index()]
    }

    /// Amplitudes in canonical quadruple order.
    pub fn amplitudes(&self) -> &[f64; 16] {
        &self.amp
    }

    pub fn norm_squared(&self) -> f64 {
        self.amp.iter().map(|x| x * x).sum()
    }

    /// The four branches ending in `(q_a, q_b)`, indexed by `(q_a', q_b')`.
    pub fn branches_into(&self, q_a: OutcomeSign, q_b: OutcomeSign) -> [f64; 4] {
        PAIR_OUTCOMES
            .map(|(q_ap, q_bp)| self.amplitude(OutcomeQuadruple::new(q_a, q_ap, q_b, q_bp)))
    }
}

pub fn branch_amplitudes(c: &DirectionConfig) -> BranchAmplitudeTable {
    let (t1, t2, t3) = (c.theta_apbp(), c.theta_apa(), c.theta_bpb());
    let mut amp = [0.0; 16];
    for q in OutcomeQuadruple::all() {
        amp[q.index()] = FRAC_1_SQRT_2
            * singlet_coefficient(q.q_a_prime, q.q_b_prime, t1)
            * rotation_entry(q.q_a_prime, q.q_a, t2)
            * rotation_entry(q.q_b_prime, q.q_b, t3);
    }
    BranchAmplitudeTable { amp }
}

/// Coherent sum over the unobserved `(q_a', q_b')` branches, squared.
pub fn pair_probability(c: &DirectionConfig, q_a: OutcomeSign, q_b: OutcomeSign) -> f64 {
    let s: f64 = branch_amplitudes(c).branches_into(q_a, q_b).iter().sum();
    s * s
}

/// `cos²θ/2` for equal outcomes, `sin²θ/2` otherwise.
pub fn pair_probability_closed(theta_ab: Angle, q_a: OutcomeSign, q_b: OutcomeSign) -> f64 {
    if q_a == q_b {
        theta_ab.cos().powi(2) / 2.0
    } else {
        theta_ab.sin().powi(2) / 2.0
    }
}

/// `[P(++), P(+-), P(-+), P(--)]` for the setting `s` by the closed form.
pub fn pair_probabilities(c: &DirectionConfig, s: SettingPair) -> [f64; 4] {
    let theta = c.theta(s);
    PAIR_OUTCOMES.map(|(q1, q2)| pair_probability_closed(theta, q1, q2))
}

/// `cos 2θ`.
pub fn correlation_quantum(theta_uv: Angle) -> f64 {
    (2.0 * theta_uv.radians()).cos()
}

pub fn correlators_quantum(c: &DirectionConfig) -> crate::classical::CorrelatorSet {
    crate::classical::CorrelatorSet::from_array(
        SettingPair::ALL.map(|s| correlation_quantum(c.theta(s))),
    )
}

/// `E(ab) + E(a'b) - E(ab') + E(a'b')` with `E = cos 2θ`.
pub fn chsh_quantum(c: &DirectionConfig) -> f64 {
    correlators_quantum(c).chsh()
}

/// `|a1 + a2|²`.
pub fn amplitude_or(a1: f64, a2: f64) -> Result<f64> {
    let s = a1 + a2;
    if !s.is_finite() || s.abs() > 1.0 + NORM_TOL {
        return Err(Error::AmplitudeOverflow { a1, a2 });
    }
    Ok(s * s)
}

/// The cross term `2·a1·a2` by which `|a1 + a2|²` differs from `a1² + a2²`.
pub fn interference_term(a1: f64, a2: f64) -> f64 {
    2.0 * a1 * a2
}

/// Best configuration found by [`optimize_chsh`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeResult {
    pub config: DirectionConfig,
    pub value: f64,
}

fn gauge_config(a_prime: f64, b: f64, b_prime: f64) -> DirectionConfig {
    DirectionConfig {
        a: Angle::ZERO,
        a_prime: Angle(a_prime),
        b: Angle(b),
        b_prime: Angle(b_prime),
    }
}

/// Maximizes [`chsh_quantum`] with `a = 0` fixed.
///
/// A grid of `grid_steps` points per axis over `[0, π)` for `(a', b, b')` is
/// searched first (ties go to the lexicographically smallest grid point),
/// then coordinate descent refines the best point, halving its step after
/// each of `refine_iters` rounds. The grid search runs in parallel with a
/// deterministic reduction.
pub fn optimize_chsh(grid_steps: usize, refine_iters: usize) -> Result<OptimizeResult> {
    if grid_steps < 8 {
        return Err(Error::InvalidArgument(format!(
            "grid_steps must be at least 8, got {grid_steps}"
        )));
    }
    let step = PI / grid_steps as f64;
    let n = grid_steps;

    // (value, linear index) with the smaller index winning ties
    let pick = |x: (f64, usize), y: (f64, usize)| {
        if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
            y
        } else {
            x
        }
    };
    let (_, best_idx) = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            let c = gauge_config(i as f64 * step, j as f64 * step, k as f64 * step);
            (chsh_quantum(&c), idx)
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), pick);

    let mut point = [
        (best_idx / (n * n)) as f64 * step,
        ((best_idx / n) % n) as f64 * step,
        (best_idx % n) as f64 * step,
    ];
    let mut best = chsh_quantum(&gauge_config(point[0], point[1], point[2]));
    let mut h = step;
    for _ in 0..refine_iters {
        for coord in 0..3 {
            for dir in [1.0, -1.0] {
                let mut cand = point;
                cand[coord] += dir * h;
                let v = chsh_quantum(&gauge_config(cand[0], cand[1], cand[2]));
                if v > best {
                    best = v;
                    point = cand;
                }
            }
        }
        h *= 0.5;
    }
    let config = gauge_config(point[0], point[1], point[2]);
    Ok(OptimizeResult {
        config,
        value: chsh_quantum(&config),
    })
}
