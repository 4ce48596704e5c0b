//! Joint distributions over the four binary polarization variables
//! `(A, A', B, B')` and the CHSH functional built on them.
//!
//! A single [`JointDistribution16`] serves every measurement context: the
//! pair actually measured only selects which two coordinates are summed
//! out, never which distribution is used.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::numfmt::json_number;

/// Tolerance used when validating that masses sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Slack allowed by [`kolmogorov_or`] above a total of one.
pub const OR_TOL: f64 = 1e-12;

/// Binary polarization outcome: `Plus` is along the analyzer axis, `Minus`
/// perpendicular to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeSign {
    Plus,
    Minus,
}

impl OutcomeSign {
    pub const BOTH: [OutcomeSign; 2] = [OutcomeSign::Plus, OutcomeSign::Minus];

    /// `+1` or `-1`.
    pub fn value(self) -> i32 {
        match self {
            OutcomeSign::Plus => 1,
            OutcomeSign::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn from_value(v: i32) -> Option<Self> {
        match v {
            1 => Some(OutcomeSign::Plus),
            -1 => Some(OutcomeSign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            OutcomeSign::Plus => OutcomeSign::Minus,
            OutcomeSign::Minus => OutcomeSign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            OutcomeSign::Plus => '+',
            OutcomeSign::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(OutcomeSign::Plus),
            '-' => Some(OutcomeSign::Minus),
            _ => None,
        }
    }

    /// 0 for `Plus`, 1 for `Minus`.
    pub(crate) fn bit(self) -> usize {
        match self {
            OutcomeSign::Plus => 0,
            OutcomeSign::Minus => 1,
        }
    }
}

/// One of the four polarization variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    A,
    APrime,
    B,
    BPrime,
}

impl Variable {
    /// Position in the canonical quadruple `(q_a, q_a', q_b, q_b')`.
    pub fn position(self) -> usize {
        match self {
            Variable::A => 0,
            Variable::APrime => 1,
            Variable::B => 2,
            Variable::BPrime => 3,
        }
    }
}

/// Outcomes of all four variables in the canonical order
/// `(q_a, q_a', q_b, q_b')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeQuadruple {
    pub q_a: OutcomeSign,
    pub q_a_prime: OutcomeSign,
    pub q_b: OutcomeSign,
    pub q_b_prime: OutcomeSign,
}

impl OutcomeQuadruple {
    pub const fn new(
        q_a: OutcomeSign,
        q_a_prime: OutcomeSign,
        q_b: OutcomeSign,
        q_b_prime: OutcomeSign,
    ) -> Self {
        OutcomeQuadruple {
            q_a,
            q_a_prime,
            q_b,
            q_b_prime,
        }
    }

    /// The quadruple at `index` in canonical order: `++++` is 0, `+++-` is 1,
    /// `----` is 15 (`q_a` is the most significant bit, `+` is 0).
    pub fn from_index(index: usize) -> Self {
        assert!(index < 16, "quadruple index {index} out of range");
        let sign = |shift: usize| {
            if (index >> shift) & 1 == 0 {
                OutcomeSign::Plus
            } else {
                OutcomeSign::Minus
            }
        };
        OutcomeQuadruple::new(sign(3), sign(2), sign(1), sign(0))
    }

    pub fn index(self) -> usize {
        (self.q_a.bit() << 3)
            | (self.q_a_prime.bit() << 2)
            | (self.q_b.bit() << 1)
            | self.q_b_prime.bit()
    }

    /// All 16 quadruples in canonical order.
    pub fn all() -> impl Iterator<Item = OutcomeQuadruple> {
        (0..16).map(OutcomeQuadruple::from_index)
    }

    pub fn get(self, v: Variable) -> OutcomeSign {
        match v {
            Variable::A => self.q_a,
            Variable::APrime => self.q_a_prime,
            Variable::B => self.q_b,
            Variable::BPrime => self.q_b_prime,
        }
    }

    pub fn signs(self) -> [OutcomeSign; 4] {
        [self.q_a, self.q_a_prime, self.q_b, self.q_b_prime]
    }

    /// Four-character key such as `"++-+"`.
    pub fn key(self) -> String {
        self.signs().iter().map(|s| s.symbol()).collect()
    }
}

impl fmt::Display for OutcomeQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for OutcomeQuadruple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<OutcomeSign> = s.chars().filter_map(OutcomeSign::from_symbol).collect();
        if signs.len() != 4 || s.chars().count() != 4 {
            return Err(Error::MalformedKey(s.to_string()));
        }
        Ok(OutcomeQuadruple::new(
            signs[0], signs[1], signs[2], signs[3],
        ))
    }
}

/// Which pair of observables is actually measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SettingPair {
    AB,
    APrimeB,
    ABPrime,
    APrimeBPrime,
}

impl SettingPair {
    /// All settings in CHSH order `(AB, A'B, AB', A'B')`.
    pub const ALL: [SettingPair; 4] = [
        SettingPair::AB,
        SettingPair::APrimeB,
        SettingPair::ABPrime,
        SettingPair::APrimeBPrime,
    ];

    pub fn index(self) -> usize {
        match self {
            SettingPair::AB => 0,
            SettingPair::APrimeB => 1,
            SettingPair::ABPrime => 2,
            SettingPair::APrimeBPrime => 3,
        }
    }

    /// `(photon-1 variable, photon-2 variable)`.
    pub fn variables(self) -> (Variable, Variable) {
        match self {
            SettingPair::AB => (Variable::A, Variable::B),
            SettingPair::APrimeB => (Variable::APrime, Variable::B),
            SettingPair::ABPrime => (Variable::A, Variable::BPrime),
            SettingPair::APrimeBPrime => (Variable::APrime, Variable::BPrime),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SettingPair::AB => "AB",
            SettingPair::APrimeB => "A'B",
            SettingPair::ABPrime => "AB'",
            SettingPair::APrimeBPrime => "A'B'",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        SettingPair::ALL.into_iter().find(|p| p.label() == s)
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome pairs `(+,+), (+,-), (-,+), (-,-)` in the order used by
/// [`PairDistribution`].
pub const PAIR_OUTCOMES: [(OutcomeSign, OutcomeSign); 4] = [
    (OutcomeSign::Plus, OutcomeSign::Plus),
    (OutcomeSign::Plus, OutcomeSign::Minus),
    (OutcomeSign::Minus, OutcomeSign::Plus),
    (OutcomeSign::Minus, OutcomeSign::Minus),
];

pub(crate) fn pair_index(q1: OutcomeSign, q2: OutcomeSign) -> usize {
    (q1.bit() << 1) | q2.bit()
}

pub fn pair_key(q1: OutcomeSign, q2: OutcomeSign) -> String {
    [q1.symbol(), q2.symbol()].iter().collect()
}

fn check_kolmogorov(masses: &[f64], what: &str) -> Result<()> {
    let mut total = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        if !(0.0..=1.0 + NORMALIZATION_TOL).contains(&m) {
            return Err(Error::InvalidJoint(format!(
                "{what} entry {i} = {m} outside [0, 1]"
            )));
        }
        total += m;
    }
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidJoint(format!("{what} sums to {total}")));
    }
    Ok(())
}

/// Probability mass over the 16 outcome quadruples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution16 {
    mass: [f64; 16],
}

impl JointDistribution16 {
    /// Validates masses given in canonical order without renormalizing.
    pub fn from_masses(mass: [f64; 16]) -> Result<Self> {
        check_kolmogorov(&mass, "joint")?;
        Ok(JointDistribution16 { mass })
    }

    pub fn uniform() -> Self {
        JointDistribution16 {
            mass: [1.0 / 16.0; 16],
        }
    }

    pub fn mass(&self, q: OutcomeQuadruple) -> f64 {
        self.mass[q.index()]
    }

    /// Masses in canonical order.
    pub fn masses(&self) -> &[f64; 16] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &JointDistribution16, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight {lambda} outside [0, 1]"
            )));
        }
        let mut mass = [0.0; 16];
        for (i, m) in mass.iter_mut().enumerate() {
            *m = lambda * self.mass[i] + (1.0 - lambda) * other.mass[i];
        }
        Ok(JointDistribution16 { mass })
    }

    /// Marginal of a single variable as `[P(+), P(-)]`.
    pub fn single_marginal(&self, v: Variable) -> [f64; 2] {
        let mut out = [0.0; 2];
        for q in OutcomeQuadruple::all() {
            out[q.get(v).bit()] += self.mass(q);
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let map: Map<String, Value> = OutcomeQuadruple::all()
            .map(|q| (q.key(), json_number(self.mass(q))))
            .collect();
        Value::Object(map)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Json("joint distribution must be an object".into()))?;
        if obj.len() != 16 {
            return Err(Error::Json(format!(
                "joint distribution needs 16 entries, got {}",
                obj.len()
            )));
        }
        let mut mass = [f64::NAN; 16];
        for (k, val) in obj {
            let q: OutcomeQuadruple = k.parse()?;
            mass[q.index()] = val
                .as_f64()
                .ok_or_else(|| Error::Json(format!("mass for {k} is not a number")))?;
        }
        JointDistribution16::from_masses(mass)
    }
}

impl Serialize for JointDistribution16 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JointDistribution16 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        JointDistribution16::from_json_value(&v).map_err(de::Error::custom)
    }
}

/// Distribution of the two outcomes of one measured setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistribution {
    pub setting: SettingPair,
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

impl PairDistribution {
    /// Validates `[p_pp, p_pm, p_mp, p_mm]`.
    pub fn new(setting: SettingPair, probs: [f64; 4]) -> Result<Self> {
        let mut total = 0.0;
        for &p in &probs {
            if !(0.0..=1.0 + NORMALIZATION_TOL).contains(&p) {
                return Err(Error::InvalidPairDistribution(format!(
                    "{setting}: entry {p} outside [0, 1]"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPairDistribution(format!(
                "{setting}: entries sum to {total}"
            )));
        }
        Ok(PairDistribution {
            setting,
            p_pp: probs[0],
            p_pm: probs[1],
            p_mp: probs[2],
            p_mm: probs[3],
        })
    }

    pub fn probs(&self) -> [f64; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }

    pub fn prob(&self, q1: OutcomeSign, q2: OutcomeSign) -> f64 {
        self.probs()[pair_index(q1, q2)]
    }

    /// `p_pp - p_pm - p_mp + p_mm`.
    pub fn correlator(&self) -> f64 {
        self.p_pp - self.p_pm - self.p_mp + self.p_mm
    }
}

/// The four correlators in CHSH order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorSet {
    pub e_ab: f64,
    pub e_apb: f64,
    pub e_abp: f64,
    pub e_apbp: f64,
}

impl CorrelatorSet {
    pub fn from_array(e: [f64; 4]) -> Self {
        CorrelatorSet {
            e_ab: e[0],
            e_apb: e[1],
            e_abp: e[2],
            e_apbp: e[3],
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.e_ab, self.e_apb, self.e_abp, self.e_apbp]
    }

    pub fn get(&self, s: SettingPair) -> f64 {
        self.to_array()[s.index()]
    }

    /// Signed sum `Σ sign_i · E_i` in CHSH order.
    pub fn signed_sum(&self, pattern: SignPattern) -> f64 {
        self.to_array()
            .iter()
            .zip(pattern.0.iter())
            .map(|(e, s)| s.as_f64() * e)
            .sum()
    }

    /// `E(AB) + E(A'B) - E(AB') + E(A'B')`.
    pub fn chsh(&self) -> f64 {
        self.signed_sum(SignPattern::CHSH)
    }
}

/// Signs applied to the correlators `(AB, A'B, AB', A'B')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern(pub [OutcomeSign; 4]);

impl SignPattern {
    /// The pattern `(+, +, -, +)`.
    pub const CHSH: SignPattern = SignPattern([
        OutcomeSign::Plus,
        OutcomeSign::Plus,
        OutcomeSign::Minus,
        OutcomeSign::Plus,
    ]);

    /// The eight patterns with an odd number of minus signs, starting with
    /// [`SignPattern::CHSH`]. Each bounds every classical model by 2.
    pub fn chsh_family() -> [SignPattern; 8] {
        use OutcomeSign::{Minus as M, Plus as P};
        [
            SignPattern([P, P, M, P]),
            SignPattern([P, P, P, M]),
            SignPattern([P, M, P, P]),
            SignPattern([M, P, P, P]),
            SignPattern([M, M, P, M]),
            SignPattern([M, M, M, P]),
            SignPattern([M, P, M, M]),
            SignPattern([P, M, M, M]),
        ]
    }

    pub fn key(&self) -> String {
        self.0.iter().map(|s| s.symbol()).collect()
    }
}

impl FromStr for SignPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<OutcomeSign> = s.chars().filter_map(OutcomeSign::from_symbol).collect();
        if signs.len() != 4 || s.chars().count() != 4 {
            return Err(Error::MalformedKey(s.to_string()));
        }
        Ok(SignPattern([signs[0], signs[1], signs[2], signs[3]]))
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Normalizes 16 non-negative weights (canonical order) into a joint
/// distribution.
pub fn joint_from_weights(weights: &[f64; 16]) -> Result<JointDistribution16> {
    let mut total = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFiniteWeight(w));
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight {
                outcome: OutcomeQuadruple::from_index(i).key(),
                value: w,
            });
        }
        total += w;
    }
    if total == 0.0 {
        return Err(Error::ZeroTotal);
    }
    let mut mass = [0.0; 16];
    for (m, &w) in mass.iter_mut().zip(weights.iter()) {
        *m = w / total;
    }
    Ok(JointDistribution16 { mass })
}

/// Point mass on `q`: every variable has a definite value.
pub fn deterministic_joint(q: OutcomeQuadruple) -> JointDistribution16 {
    let mut mass = [0.0; 16];
    mass[q.index()] = 1.0;
    JointDistribution16 { mass }
}

/// Sums the four quadruple masses consistent with each outcome of the
/// measured pair.
pub fn pair_marginal(d: &JointDistribution16, s: SettingPair) -> PairDistribution {
    let (v1, v2) = s.variables();
    let mut probs = [0.0; 4];
    for q in OutcomeQuadruple::all() {
        probs[pair_index(q.get(v1), q.get(v2))] += d.mass(q);
    }
    PairDistribution {
        setting: s,
        p_pp: probs[0],
        p_pm: probs[1],
        p_mp: probs[2],
        p_mm: probs[3],
    }
}

pub fn correlator(d: &JointDistribution16, s: SettingPair) -> f64 {
    pair_marginal(d, s).correlator()
}

pub fn correlators(d: &JointDistribution16) -> CorrelatorSet {
    CorrelatorSet::from_array(SettingPair::ALL.map(|s| correlator(d, s)))
}

/// `E(AB) + E(A'B) - E(AB') + E(A'B')`.
pub fn chsh(d: &JointDistribution16) -> f64 {
    correlators(d).chsh()
}

/// Which end of the deterministic CHSH range to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// Enumerates the 16 deterministic joints and returns the extreme CHSH value
/// together with every quadruple attaining it (canonical order).
pub fn chsh_deterministic_extreme(which: Extreme) -> (f64, Vec<OutcomeQuadruple>) {
    let values: Vec<(OutcomeQuadruple, f64)> = OutcomeQuadruple::all()
        .map(|q| (q, chsh(&deterministic_joint(q))))
        .collect();
    let best = values
        .iter()
        .map(|&(_, v)| v)
        .fold(None, |acc: Option<f64>, v| match (acc, which) {
            (None, _) => Some(v),
            (Some(a), Extreme::Max) => Some(a.max(v)),
            (Some(a), Extreme::Min) => Some(a.min(v)),
        })
        .expect("16 candidates");
    let attaining = values
        .into_iter()
        .filter(|&(_, v)| v == best)
        .map(|(q, _)| q)
        .collect();
    (best, attaining)
}

pub fn max_chsh_deterministic() -> (f64, Vec<OutcomeQuadruple>) {
    chsh_deterministic_extreme(Extreme::Max)
}

/// Additivity over two mutually exclusive events.
pub fn kolmogorov_or(p1: f64, p2: f64) -> Result<f64> {
    for p in [p1, p2] {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::NegativeProbability(p));
        }
    }
    if p1 + p2 > 1.0 + OR_TOL {
        return Err(Error::ProbabilityOverflow { p1, p2 });
    }
    Ok(p1 + p2)
}

/// Normalized iid uniform(0, 1] weights from a ChaCha8 stream seeded with
/// `seed`. Used as a property-test generator.
pub fn random_joint(seed: u64) -> JointDistribution16 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = [0.0; 16];
    for w in weights.iter_mut() {
        *w = 1.0 - rng.random::<f64>();
    }
    joint_from_weights(&weights).expect("weights are positive")
}
