//! The chained Bell measure I_N, its closed form, the ε-driven scenario
//! construction, and the brute-force local-model floor.
//!
//! For N settings per side the chain alternates Alice/Bob settings
//! (ϑ_1, ϑ'_1), (ϑ'_1, ϑ_2), …, (ϑ'_N, ϑ_1), scoring each adjacent pair by the
//! probability of unequal outcomes, except the final pair which scores equal
//! outcomes (equivalently, the wrapped setting ϑ_1 reappears with its outcome
//! labels flipped). Local deterministic models satisfy I_N ≥ 1, while the
//! equally spaced quantum value 2N·sin²(π/4N) vanishes as N grows.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantum::{joint_probability, EntangledPairState, MeasurementAngle};

/// Largest chain size accepted by [`local_deterministic_minimum`]; the search
/// space is 2^(2n) strategy pairs.
pub const MAX_ENUMERATION_N: usize = 12;

/// Largest chain size for which scenario construction will allocate settings.
pub const MAX_SCENARIO_N: usize = 100_000_000;

/// Measurement settings for one chained-Bell scenario: N primary angles ϑ_k
/// for Alice and N secondary angles ϑ'_l for Bob, N ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSettings {
    alice: Vec<MeasurementAngle>,
    bob: Vec<MeasurementAngle>,
}

/// One adjacent pair in the chain. `scores_equal` marks the final wrapped pair,
/// whose term is the probability of *equal* outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainPair {
    pub a_index: usize,
    pub b_index: usize,
    pub scores_equal: bool,
}

/// I_N evaluation broken out per chain term, with the two reference bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainedBellReport {
    pub n: usize,
    /// 2N term probabilities in chain order.
    pub terms: Vec<f64>,
    /// Sum of the terms.
    pub value: f64,
    /// 2N·sin²(π/4N): the value attained by the equally spaced scenario on the
    /// maximally entangled state.
    pub quantum_upper_bound: f64,
    /// Floor for local deterministic models (= 1).
    pub local_lower_bound: f64,
}

impl ScenarioSettings {
    pub fn new(alice: Vec<MeasurementAngle>, bob: Vec<MeasurementAngle>) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::MismatchedSettings {
                alice: alice.len(),
                bob: bob.len(),
            });
        }
        if alice.len() < 2 {
            return Err(Error::ScenarioTooSmall(alice.len()));
        }
        Ok(ScenarioSettings { alice, bob })
    }

    pub fn n(&self) -> usize {
        self.alice.len()
    }

    pub fn alice_angles(&self) -> &[MeasurementAngle] {
        &self.alice
    }

    pub fn bob_angles(&self) -> &[MeasurementAngle] {
        &self.bob
    }

    /// The 2N chain pairs in evaluation order.
    pub fn chain_pairs(&self) -> Vec<ChainPair> {
        chain_pairs(self.n())
    }
}

/// Chain pair order for a size-n scenario: (0,0), (1,0), (1,1), (2,1), …,
/// (n−1,n−1), and finally (0,n−1) scored on equal outcomes.
pub fn chain_pairs(n: usize) -> Vec<ChainPair> {
    let mut pairs = Vec::with_capacity(2 * n);
    for k in 0..n {
        pairs.push(ChainPair {
            a_index: k,
            b_index: k,
            scores_equal: false,
        });
        pairs.push(ChainPair {
            a_index: (k + 1) % n,
            b_index: k,
            scores_equal: k == n - 1,
        });
    }
    pairs
}

/// Anything that yields a joint outcome distribution p(x,y|a,b) over finite
/// setting indices: the Born rule on a scenario, or a stored behavior table.
pub trait JointSource {
    fn alice_count(&self) -> usize;
    fn bob_count(&self) -> usize;
    fn joint(&self, a_index: usize, b_index: usize, x: u8, y: u8) -> f64;
}

/// Born-rule view of a state and scenario as a [`JointSource`].
#[derive(Debug, Clone, Copy)]
pub struct BornSource<'a> {
    pub state: &'a EntangledPairState,
    pub settings: &'a ScenarioSettings,
}

impl JointSource for BornSource<'_> {
    fn alice_count(&self) -> usize {
        self.settings.n()
    }

    fn bob_count(&self) -> usize {
        self.settings.n()
    }

    fn joint(&self, a_index: usize, b_index: usize, x: u8, y: u8) -> f64 {
        joint_probability(
            self.state,
            self.settings.alice_angles()[a_index],
            self.settings.bob_angles()[b_index],
            x,
            y,
        )
    }
}

fn check_indices(source: &impl JointSource, a_index: usize, b_index: usize) -> Result<()> {
    if a_index >= source.alice_count() {
        return Err(Error::SettingOutOfRange {
            index: a_index,
            count: source.alice_count(),
        });
    }
    if b_index >= source.bob_count() {
        return Err(Error::SettingOutOfRange {
            index: b_index,
            count: source.bob_count(),
        });
    }
    Ok(())
}

/// ⟨|x−y|⟩ for one setting pair: the probability that the outcomes differ.
pub fn term_unequal(source: &impl JointSource, a_index: usize, b_index: usize) -> Result<f64> {
    check_indices(source, a_index, b_index)?;
    Ok(source.joint(a_index, b_index, 0, 1) + source.joint(a_index, b_index, 1, 0))
}

/// The complementary final-pair term: the probability that the outcomes agree.
pub fn term_equal_last(source: &impl JointSource, a_index: usize, b_index: usize) -> Result<f64> {
    check_indices(source, a_index, b_index)?;
    Ok(source.joint(a_index, b_index, 0, 0) + source.joint(a_index, b_index, 1, 1))
}

/// Reference value 2n·sin²(π/4n) attained by the equally spaced scenario on
/// the maximally entangled state; bounded above by π²/8n.
pub fn equally_spaced_quantum_value(n: usize) -> f64 {
    let s = (PI / (4.0 * n as f64)).sin();
    2.0 * n as f64 * s * s
}

/// Evaluates I_N for any joint source with n settings per side.
pub fn chained_value_of(source: &impl JointSource) -> Result<ChainedBellReport> {
    let n = source.alice_count();
    if source.bob_count() != n {
        return Err(Error::MismatchedSettings {
            alice: n,
            bob: source.bob_count(),
        });
    }
    if n < 2 {
        return Err(Error::ScenarioTooSmall(n));
    }
    let terms = chain_pairs(n)
        .into_iter()
        .map(|pair| {
            if pair.scores_equal {
                term_equal_last(source, pair.a_index, pair.b_index)
            } else {
                term_unequal(source, pair.a_index, pair.b_index)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ChainedBellReport {
        n,
        value: terms.iter().sum(),
        terms,
        quantum_upper_bound: equally_spaced_quantum_value(n),
        local_lower_bound: 1.0,
    })
}

/// I_N from the Born rule, term by term via density-matrix traces.
///
/// This is the ground-truth path; [`chained_value_closed_form`] must agree
/// with it to 1e−9 and is tested against it on randomized scenarios.
pub fn chained_value_trace(
    state: &EntangledPairState,
    settings: &ScenarioSettings,
) -> ChainedBellReport {
    chained_value_of(&BornSource { state, settings })
        .expect("validated scenario always evaluates")
}

/// Closed form for I_N on the pure state family:
///
///   I_N = Σ_pairs [ sin²((ϑ_a − ϑ_b)/2) − (α√(1−α²) − ½)·sin ϑ_a · sin ϑ_b ]
///
/// summed over the chain pairs, with the final wrapped pair evaluated at
/// ϑ_1 + π (the angle-space realization of flipping that setting's outcome
/// labels). At α = 1/√2 the second product vanishes and only the sin² sum
/// remains.
pub fn chained_value_closed_form(state: &EntangledPairState, settings: &ScenarioSettings) -> f64 {
    let alpha = state.alpha();
    let k = alpha * (1.0 - alpha * alpha).max(0.0).sqrt() - 0.5;
    let alice = settings.alice_angles();
    let bob = settings.bob_angles();
    settings
        .chain_pairs()
        .into_iter()
        .map(|pair| {
            let theta_a = if pair.scores_equal {
                alice[pair.a_index].theta() + PI
            } else {
                alice[pair.a_index].theta()
            };
            let theta_b = bob[pair.b_index].theta();
            let half = ((theta_a - theta_b) / 2.0).sin();
            half * half - k * theta_a.sin() * theta_b.sin()
        })
        .sum()
}

/// The equally spaced construction: ϑ_k = π(k−1)/N, ϑ'_l = π(l−½)/N
/// (1-based k, l). Every adjacent chain pair then differs by exactly π/2N.
pub fn equally_spaced_settings(n: usize) -> Result<ScenarioSettings> {
    if n < 2 {
        return Err(Error::ScenarioTooSmall(n));
    }
    if n > MAX_SCENARIO_N {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_SCENARIO_N,
        });
    }
    let alice = (0..n)
        .map(|k| MeasurementAngle::new(PI * k as f64 / n as f64))
        .collect();
    let bob = (0..n)
        .map(|l| MeasurementAngle::new(PI * (l as f64 + 0.5) / n as f64))
        .collect();
    ScenarioSettings::new(alice, bob)
}

/// Smallest chain size guaranteeing I_N below ε/2 on the maximally entangled
/// state: n = ⌈π²/4ε⌉, clamped to at least 2. Returns the size together with
/// its equally spaced settings.
pub fn settings_for_epsilon(epsilon: f64) -> Result<(usize, ScenarioSettings)> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let raw = (PI * PI / (4.0 * epsilon)).ceil();
    if raw > MAX_SCENARIO_N as f64 {
        return Err(Error::EnumerationTooLarge {
            n: raw as usize,
            max: MAX_SCENARIO_N,
        });
    }
    let n = (raw as usize).max(2);
    Ok((n, equally_spaced_settings(n)?))
}

/// Minimum of I_N over all local deterministic strategies (x = f(a), y = g(b)),
/// found by exhaustive enumeration of the 2^(2n) assignment pairs.
///
/// Each deterministic I_N is an integer count of mismatched chain links, so
/// the result is exact; it equals 1 for every n because the chain's final flip
/// makes a perfect traversal impossible.
pub fn local_deterministic_minimum(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::ScenarioTooSmall(n));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    let size: u32 = 1 << n;
    let top = n - 1;
    let min = (0..size)
        .into_par_iter()
        .map(|f| {
            // h encodes the Bob-side comparison targets: h_k = f_{k+1} for
            // k < n−1, and the wrapped, flipped h_{n−1} = 1 − f_0.
            let h = (f >> 1) | ((!f & 1) << top);
            (0..size)
                .map(|g| (f ^ g).count_ones() + (g ^ h).count_ones())
                .min()
                .unwrap()
        })
        .min()
        .unwrap();
    Ok(min as f64)
}
