//! Seeded sampling of both models and the correlator / CHSH estimators.
//!
//! # Reproducibility
//!
//! Every trial stream is a ChaCha8 generator (`rand_chacha`). Trials are
//! split into blocks of [`BLOCK_SIZE`]; block `i` of a run seeded with `s`
//! draws from `ChaCha8Rng::seed_from_u64(s)` on stream `i`. Blocks run in
//! parallel and their integer counts are summed, so results do not depend
//! on the number of worker threads. Sub-seeds for the four settings of a
//! CHSH run come from [`derive_seed`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::analysis::{first_stage_probability, malus_transition};
use crate::classical::{
    pair_index, pair_key, OutcomeQuadruple, OutcomeSign, SettingPair, SignPattern, PAIR_OUTCOMES,
};
use crate::error::{Error, Result};
use crate::numfmt::json_number;
use crate::quantum::{pair_probabilities, DirectionConfig};

/// Trials per independently seeded block.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Sub-seed streams live far above any block index.
const SUBSEED_STREAM_BASE: u64 = 1 << 63;

/// Seed for sub-run `index` of a run seeded with `seed`: the first output
/// of `ChaCha8Rng::seed_from_u64(seed)` on stream `2^63 + index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SUBSEED_STREAM_BASE.wrapping_add(index));
    rng.next_u64()
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_len(n: u64, block: u64) -> u64 {
    BLOCK_SIZE.min(n - block * BLOCK_SIZE)
}

fn check_trials(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "trial count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Outcome tallies, either of one measured pair or of full quadruples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counts {
    Pair {
        setting: Option<SettingPair>,
        /// Indexed `++, +-, -+, --`.
        counts: [u64; 4],
    },
    /// Canonical quadruple order.
    Quadruple([u64; 16]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialCounts {
    n: u64,
    counts: Counts,
}

impl TrialCounts {
    pub fn from_pair_counts(setting: Option<SettingPair>, counts: [u64; 4]) -> Self {
        TrialCounts {
            n: counts.iter().sum(),
            counts: Counts::Pair { setting, counts },
        }
    }

    pub fn from_quadruple_counts(counts: [u64; 16]) -> Self {
        TrialCounts {
            n: counts.iter().sum(),
            counts: Counts::Quadruple(counts),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    pub fn setting(&self) -> Option<SettingPair> {
        match self.counts {
            Counts::Pair { setting, .. } => setting,
            Counts::Quadruple(_) => None,
        }
    }

    /// Pair tallies for `s`; quadruple counts are summed over the two
    /// unmeasured variables.
    pub fn reduce_to_pair(&self, s: SettingPair) -> TrialCounts {
        match &self.counts {
            Counts::Pair { counts, .. } => TrialCounts::from_pair_counts(Some(s), *counts),
            Counts::Quadruple(quad) => {
                let (v1, v2) = s.variables();
                let mut counts = [0u64; 4];
                for q in OutcomeQuadruple::all() {
                    counts[pair_index(q.get(v1), q.get(v2))] += quad[q.index()];
                }
                TrialCounts::from_pair_counts(Some(s), counts)
            }
        }
    }

    /// `(outcome key, count)` rows in canonical order.
    pub fn rows(&self) -> Vec<(String, u64)> {
        match &self.counts {
            Counts::Pair { counts, .. } => PAIR_OUTCOMES
                .iter()
                .map(|&(a, b)| (pair_key(a, b), counts[pair_index(a, b)]))
                .collect(),
            Counts::Quadruple(c) => OutcomeQuadruple::all()
                .map(|q| (q.key(), c[q.index()]))
                .collect(),
        }
    }

    /// CSV with header `outcome,count`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
        w.write_record(["outcome", "count"]).map_err(io)?;
        for (k, c) in self.rows() {
            w.write_record([k, c.to_string()]).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }

    pub fn to_json_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("n".into(), Value::from(self.n));
        let counts: Map<String, Value> = self
            .rows()
            .into_iter()
            .map(|(k, c)| (k, Value::from(c)))
            .collect();
        m.insert("counts".into(), Value::Object(counts));
        if let Some(s) = self.setting() {
            m.insert("setting".into(), Value::String(s.label().into()));
        }
        Value::Object(m)
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

impl EstimateWithError {
    /// `{value, stderr, n}`.
    pub fn to_json_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("value".into(), json_number(self.value));
        m.insert("stderr".into(), json_number(self.stderr));
        m.insert("n".into(), Value::from(self.n));
        Value::Object(m)
    }
}

/// `n` iid draws of `(q_a, q_b)` for setting `s` from the closed-form
/// quantum pair distribution.
pub fn sample_pair_quantum(
    c: &DirectionConfig,
    s: SettingPair,
    n: u64,
    seed: u64,
) -> Result<TrialCounts> {
    check_trials(n)?;
    let dist = WeightedIndex::new(pair_probabilities(c, s))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let blocks = n.div_ceil(BLOCK_SIZE);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(seed, block);
            let mut local = [0u64; 4];
            for _ in 0..block_len(n, block) {
                local[dist.sample(&mut rng)] += 1;
            }
            local
        })
        .reduce(|| [0u64; 4], add_counts);
    Ok(TrialCounts::from_pair_counts(Some(s), counts))
}

/// `n` trials of the two-stage Malus cascade: `(q_a', q_b')` from the
/// first-stage probabilities, then each photon keeps its sign at the second
/// splitter with probability `cos²` of the rotation angle.
pub fn sample_cascade(c: &DirectionConfig, n: u64, seed: u64) -> Result<TrialCounts> {
    check_trials(n)?;
    let t1 = c.theta_apbp();
    let first =
        WeightedIndex::new(PAIR_OUTCOMES.map(|(qap, qbp)| first_stage_probability(qap, qbp, t1)))
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let keep_a = malus_transition(OutcomeSign::Plus, OutcomeSign::Plus, c.theta_apa());
    let keep_b = malus_transition(OutcomeSign::Plus, OutcomeSign::Plus, c.theta_bpb());

    let blocks = n.div_ceil(BLOCK_SIZE);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(seed, block);
            let mut local = [0u64; 16];
            for _ in 0..block_len(n, block) {
                let (q_ap, q_bp) = PAIR_OUTCOMES[first.sample(&mut rng)];
                let q_a = if rng.random::<f64>() < keep_a {
                    q_ap
                } else {
                    q_ap.flip()
                };
                let q_b = if rng.random::<f64>() < keep_b {
                    q_bp
                } else {
                    q_bp.flip()
                };
                local[OutcomeQuadruple::new(q_a, q_ap, q_b, q_bp).index()] += 1;
            }
            local
        })
        .reduce(|| [0u64; 16], add_counts);
    Ok(TrialCounts::from_quadruple_counts(counts))
}

fn add_counts<const N: usize>(mut a: [u64; N], b: [u64; N]) -> [u64; N] {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Sample mean of `q1·q2` with the plug-in standard error `√((1 - v²)/n)`.
pub fn estimate_correlator(t: &TrialCounts) -> Result<EstimateWithError> {
    let Counts::Pair { counts, .. } = t.counts() else {
        return Err(Error::NotPairCounts);
    };
    if t.n() == 0 {
        return Err(Error::EmptyCounts);
    }
    let n = t.n();
    let signed: i128 = PAIR_OUTCOMES
        .iter()
        .map(|&(a, b)| (a.value() * b.value()) as i128 * counts[pair_index(a, b)] as i128)
        .sum();
    let value = signed as f64 / n as f64;
    let stderr = ((1.0 - value * value).max(0.0) / n as f64).sqrt();
    Ok(EstimateWithError { value, stderr, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Quantum,
    Cascade,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Quantum => "quantum",
            Model::Cascade => "cascade",
        }
    }
}

/// Counts and correlator estimate for one setting of a CHSH run.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingRun {
    pub setting: SettingPair,
    pub seed: u64,
    pub counts: TrialCounts,
    pub correlator: EstimateWithError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshExperiment {
    pub model: Model,
    pub n_per_setting: u64,
    pub seed: u64,
    pub settings: Vec<SettingRun>,
    pub chsh: EstimateWithError,
}

/// Runs all four settings with sub-seeds `derive_seed(seed, setting index)`.
/// Cascade runs sample full quadruples and keep the measured pair.
pub fn run_chsh_experiment(
    c: &DirectionConfig,
    model: Model,
    n_per_setting: u64,
    seed: u64,
) -> Result<ChshExperiment> {
    check_trials(n_per_setting)?;
    let mut settings = Vec::with_capacity(4);
    for s in SettingPair::ALL {
        let sub = derive_seed(seed, s.index() as u64);
        let counts = match model {
            Model::Quantum => sample_pair_quantum(c, s, n_per_setting, sub)?,
            Model::Cascade => sample_cascade(c, n_per_setting, sub)?.reduce_to_pair(s),
        };
        let correlator = estimate_correlator(&counts)?;
        settings.push(SettingRun {
            setting: s,
            seed: sub,
            counts,
            correlator,
        });
    }
    let value = settings
        .iter()
        .zip(SignPattern::CHSH.0)
        .map(|(r, sign)| sign.as_f64() * r.correlator.value)
        .sum();
    let stderr = settings
        .iter()
        .map(|r| r.correlator.stderr.powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ChshExperiment {
        model,
        n_per_setting,
        seed,
        settings,
        chsh: EstimateWithError {
            value,
            stderr,
            n: n_per_setting,
        },
    })
}

/// CHSH estimate with the `(+, +, -, +)` pattern; `stderr` is the
/// root-sum-square of the four correlator errors and `n` is per setting.
pub fn estimate_chsh(
    c: &DirectionConfig,
    model: Model,
    n_per_setting: u64,
    seed: u64,
) -> Result<EstimateWithError> {
    Ok(run_chsh_experiment(c, model, n_per_setting, seed)?.chsh)
}
