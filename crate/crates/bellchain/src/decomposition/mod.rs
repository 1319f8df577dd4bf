//! Prediction-box decompositions of quantum behaviors.
//!
//! A [`BehaviorBox`] is a conditional distribution p(x,y|a,b) over binary
//! outcomes for finite setting sets. A [`DecompositionModel`] assigns a weight
//! μ(z) and a box to each value of a hidden prediction index z, and must
//! average back to the Born-rule behavior. The predicates here decide
//! signal-locality, averaging, factorization of deterministic boxes, the
//! marginal-asymmetry bound by I_N, and (in [`lp`]) LP feasibility of a
//! decomposition with per-z predictive advantage.

mod lp;
pub mod io;

pub use lp::{lp_max_advantage, lp_max_advantage_with, LpAdvantage, LpOptions};

use rand::Rng;

use crate::chained::{chained_value_of, JointSource, ScenarioSettings};
use crate::error::{Error, Result};
use crate::quantum::{bob_marginal, joint_probability, marginal, EntangledPairState};

/// Default tolerance for the probability-table predicates.
pub const DEFAULT_PREDICATE_TOL: f64 = 1e-9;

/// Chain sizes above this are refused by [`construct_product_state_model`],
/// which enumerates 4^n deterministic strategy pairs.
pub const MAX_PRODUCT_MODEL_N: usize = 6;

/// A joint conditional distribution p(x,y|a,b), x,y ∈ {0,1}, stored flat in
/// (a, b, x, y) order.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorBox {
    n_a: usize,
    n_b: usize,
    p: Vec<f64>,
}

impl BehaviorBox {
    /// Validates entry ranges and per-(a,b) normalization at the default
    /// tolerance.
    pub fn new(n_a: usize, n_b: usize, entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(n_a, n_b, entries, DEFAULT_PREDICATE_TOL)
    }

    /// As [`BehaviorBox::new`] with an explicit tolerance, for tables carrying
    /// solver residuals.
    pub fn with_tolerance(n_a: usize, n_b: usize, entries: Vec<f64>, tol: f64) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidBox("setting counts must be positive".into()));
        }
        if entries.len() != 4 * n_a * n_b {
            return Err(Error::InvalidBox(format!(
                "expected {} entries for {}x{} settings, got {}",
                4 * n_a * n_b,
                n_a,
                n_b,
                entries.len()
            )));
        }
        for (i, &v) in entries.iter().enumerate() {
            if !v.is_finite() || v < -tol || v > 1.0 + tol {
                return Err(Error::InvalidBox(format!(
                    "entry {i} = {v} outside [0, 1]"
                )));
            }
        }
        for a in 0..n_a {
            for b in 0..n_b {
                let base = (a * n_b + b) * 4;
                let sum: f64 = entries[base..base + 4].iter().sum();
                if (sum - 1.0).abs() > tol {
                    return Err(Error::InvalidBox(format!(
                        "cell (a={a}, b={b}) sums to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(BehaviorBox { n_a, n_b, p: entries })
    }

    /// The Born-rule behavior of a state on a scenario's setting grid.
    pub fn from_quantum(state: &EntangledPairState, settings: &ScenarioSettings) -> Self {
        let n = settings.n();
        let mut entries = Vec::with_capacity(4 * n * n);
        for a in 0..n {
            for b in 0..n {
                for x in 0..2u8 {
                    for y in 0..2u8 {
                        entries.push(joint_probability(
                            state,
                            settings.alice_angles()[a],
                            settings.bob_angles()[b],
                            x,
                            y,
                        ));
                    }
                }
            }
        }
        BehaviorBox {
            n_a: n,
            n_b: n,
            p: entries,
        }
    }

    /// Deterministic local box x = f(a), y = g(b).
    pub fn deterministic_local(f: &[u8], g: &[u8]) -> Result<Self> {
        if f.is_empty() || g.is_empty() {
            return Err(Error::InvalidBox("setting counts must be positive".into()));
        }
        if f.iter().chain(g).any(|&bit| bit > 1) {
            return Err(Error::InvalidBox("strategy entries must be bits".into()));
        }
        let (n_a, n_b) = (f.len(), g.len());
        let mut entries = vec![0.0; 4 * n_a * n_b];
        for (a, &fx) in f.iter().enumerate() {
            for (b, &gy) in g.iter().enumerate() {
                entries[((a * n_b + b) * 2 + fx as usize) * 2 + gy as usize] = 1.0;
            }
        }
        Ok(BehaviorBox { n_a, n_b, p: entries })
    }

    /// The standard PR box on 2×2 settings: p(x,y|a,b) = ½ when x⊕y = a·b,
    /// else 0. Signal-local but not quantum-realizable.
    pub fn pr_box() -> Self {
        let mut entries = vec![0.0; 16];
        for a in 0..2usize {
            for b in 0..2usize {
                for x in 0..2usize {
                    for y in 0..2usize {
                        if x ^ y == a & b {
                            entries[((a * 2 + b) * 2 + x) * 2 + y] = 0.5;
                        }
                    }
                }
            }
        }
        BehaviorBox {
            n_a: 2,
            n_b: 2,
            p: entries,
        }
    }

    /// Draws a random no-signalling box by sampling both parties' marginals
    /// and, per setting pair, a joint mass within the Fréchet bounds
    /// max(0, m_A+m_B−1) ≤ p(0,0) ≤ min(m_A, m_B). Every box constructed this
    /// way is exactly signal-local.
    pub fn sample_no_signalling<R: Rng + ?Sized>(n_a: usize, n_b: usize, rng: &mut R) -> Self {
        let m_a: Vec<f64> = (0..n_a).map(|_| rng.gen::<f64>()).collect();
        let m_b: Vec<f64> = (0..n_b).map(|_| rng.gen::<f64>()).collect();
        let mut entries = Vec::with_capacity(4 * n_a * n_b);
        for &pa in &m_a {
            for &pb in &m_b {
                let lo = (pa + pb - 1.0).max(0.0);
                let hi = pa.min(pb);
                let c = lo + (hi - lo) * rng.gen::<f64>();
                entries.push(c);
                entries.push(pa - c);
                entries.push(pb - c);
                entries.push(1.0 - pa - pb + c);
            }
        }
        BehaviorBox {
            n_a,
            n_b,
            p: entries,
        }
    }

    pub fn alice_settings(&self) -> usize {
        self.n_a
    }

    pub fn bob_settings(&self) -> usize {
        self.n_b
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn joint(&self, a: usize, b: usize, x: u8, y: u8) -> f64 {
        assert!(a < self.n_a && b < self.n_b && x < 2 && y < 2);
        self.p[((a * self.n_b + b) * 2 + x as usize) * 2 + y as usize]
    }

    /// p(x|a,b) = Σ_y p(x,y|a,b).
    pub fn alice_marginal(&self, a: usize, b: usize, x: u8) -> f64 {
        self.joint(a, b, x, 0) + self.joint(a, b, x, 1)
    }

    /// p(y|a,b) = Σ_x p(x,y|a,b).
    pub fn bob_marginal(&self, a: usize, b: usize, y: u8) -> f64 {
        self.joint(a, b, 0, y) + self.joint(a, b, 1, y)
    }

    /// |p(0|a) − p(1|a)| evaluated at the b = 0 reference column (the columns
    /// agree for signal-local boxes).
    pub fn alice_asymmetry(&self, a: usize) -> f64 {
        (self.alice_marginal(a, 0, 0) - self.alice_marginal(a, 0, 1)).abs()
    }
}

impl JointSource for BehaviorBox {
    fn alice_count(&self) -> usize {
        self.n_a
    }

    fn bob_count(&self) -> usize {
        self.n_b
    }

    fn joint(&self, a_index: usize, b_index: usize, x: u8, y: u8) -> f64 {
        BehaviorBox::joint(self, a_index, b_index, x, y)
    }
}

/// Outcome of a tolerance-based table predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredicateReport {
    pub passes: bool,
    pub max_deviation: f64,
}

/// Signal-locality: each party's marginals must not depend on the remote
/// setting. Reports the largest spread found across remote settings.
pub fn check_no_signalling(bx: &BehaviorBox, tol: f64) -> PredicateReport {
    let mut worst: f64 = 0.0;
    for a in 0..bx.alice_settings() {
        for x in 0..2u8 {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for b in 0..bx.bob_settings() {
                let m = bx.alice_marginal(a, b, x);
                lo = lo.min(m);
                hi = hi.max(m);
            }
            worst = worst.max(hi - lo);
        }
    }
    for b in 0..bx.bob_settings() {
        for y in 0..2u8 {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for a in 0..bx.alice_settings() {
                let m = bx.bob_marginal(a, b, y);
                lo = lo.min(m);
                hi = hi.max(m);
            }
            worst = worst.max(hi - lo);
        }
    }
    PredicateReport {
        passes: worst <= tol,
        max_deviation: worst,
    }
}

/// A finite-alphabet decomposition: weights μ(z) and one behavior box per z,
/// tied to the state and scenario whose Born behavior it must average to.
///
/// Weights are indexed by z alone; a setting-dependent weight table is not
/// representable, so the no-conspiracy condition p(z|a,b) = p(z) holds by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionModel {
    state: EntangledPairState,
    settings: ScenarioSettings,
    weights: Vec<f64>,
    boxes: Vec<BehaviorBox>,
}

impl DecompositionModel {
    pub fn new(
        state: EntangledPairState,
        settings: ScenarioSettings,
        weights: Vec<f64>,
        boxes: Vec<BehaviorBox>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidModel("at least one z atom required".into()));
        }
        if weights.len() != boxes.len() {
            return Err(Error::InvalidModel(format!(
                "{} weights but {} boxes",
                weights.len(),
                boxes.len()
            )));
        }
        for (z, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidModel(format!("weight {z} = {w} is negative")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DEFAULT_PREDICATE_TOL {
            return Err(Error::InvalidModel(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let n = settings.n();
        for (z, bx) in boxes.iter().enumerate() {
            if bx.alice_settings() != n || bx.bob_settings() != n {
                return Err(Error::InvalidModel(format!(
                    "box {z} is {}x{}, scenario needs {n}x{n}",
                    bx.alice_settings(),
                    bx.bob_settings()
                )));
            }
        }
        Ok(DecompositionModel {
            state,
            settings,
            weights,
            boxes,
        })
    }

    pub fn state(&self) -> &EntangledPairState {
        &self.state
    }

    pub fn settings(&self) -> &ScenarioSettings {
        &self.settings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boxes(&self) -> &[BehaviorBox] {
        &self.boxes
    }

    pub fn z_count(&self) -> usize {
        self.weights.len()
    }

    /// The convex mixture Σ_z μ(z)·p_z as a single box.
    pub fn averaged_box(&self) -> BehaviorBox {
        let n = self.settings.n();
        let mut entries = vec![0.0; 4 * n * n];
        for (w, bx) in self.weights.iter().zip(&self.boxes) {
            for (e, &v) in entries.iter_mut().zip(bx.entries()) {
                *e += w * v;
            }
        }
        BehaviorBox {
            n_a: n,
            n_b: n,
            p: entries,
        }
    }
}

/// The trivial single-z decomposition whose one box is the Born behavior
/// itself.
pub fn identity_decomposition(
    state: &EntangledPairState,
    settings: &ScenarioSettings,
) -> DecompositionModel {
    DecompositionModel::new(
        *state,
        settings.clone(),
        vec![1.0],
        vec![BehaviorBox::from_quantum(state, settings)],
    )
    .expect("identity decomposition is always valid")
}

/// Statement of the no-conspiracy check: always satisfied here, because the
/// representation gives z-weights no setting index to depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConspiracyCheck {
    pub passes: bool,
    pub note: &'static str,
}

/// p(z|a,b) = p(z): structurally guaranteed by [`DecompositionModel`], whose
/// weights carry no setting index. Exists so the assumption is named and
/// auditable rather than silent.
pub fn check_no_conspiracy(_model: &DecompositionModel) -> ConspiracyCheck {
    ConspiracyCheck {
        passes: true,
        note: "weights are indexed by z alone; setting-dependent weights are unrepresentable",
    }
}

/// Does Σ_z μ(z)·p_z(x,y|a,b) reproduce the Born table? Reports the largest
/// entrywise deviation.
pub fn averages_to_quantum(model: &DecompositionModel, tol: f64) -> PredicateReport {
    let quantum = BehaviorBox::from_quantum(model.state(), model.settings());
    let mixed = model.averaged_box();
    let worst = quantum
        .entries()
        .iter()
        .zip(mixed.entries())
        .map(|(q, m)| (q - m).abs())
        .fold(0.0, f64::max);
    PredicateReport {
        passes: worst <= tol,
        max_deviation: worst,
    }
}

/// Where and how strongly a model beats the uniform-marginal prediction.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AdvantageReport {
    /// max over (z, a, x) of p(x|a,z) − p(1−x|a,z).
    pub epsilon_achieved: f64,
    /// (z, a_index, x) attaining the maximum.
    pub witness: (usize, usize, u8),
    /// Per z: (I_N of the box, its largest single-setting asymmetry).
    pub per_z_bkp_bounds: Vec<(f64, f64)>,
}

/// Scans every z and Alice setting for marginal asymmetry |p(x|a,z) − p(1−x|a,z)|
/// and evaluates each box's chained measure alongside it.
pub fn advantage(model: &DecompositionModel) -> AdvantageReport {
    let mut best = f64::NEG_INFINITY;
    let mut witness = (0usize, 0usize, 0u8);
    let mut per_z = Vec::with_capacity(model.z_count());
    for (z, bx) in model.boxes().iter().enumerate() {
        let mut box_asym: f64 = 0.0;
        for a in 0..bx.alice_settings() {
            let p0 = bx.alice_marginal(a, 0, 0);
            let p1 = bx.alice_marginal(a, 0, 1);
            let asym = (p0 - p1).abs();
            box_asym = box_asym.max(asym);
            if asym > best {
                best = asym;
                witness = (z, a, if p0 >= p1 { 0 } else { 1 });
            }
        }
        let chained = chained_value_of(bx)
            .expect("model boxes match the scenario shape")
            .value;
        per_z.push((chained, box_asym));
    }
    AdvantageReport {
        epsilon_achieved: best.max(0.0),
        witness,
        per_z_bkp_bounds: per_z,
    }
}

/// One row of [`bkp_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkpEntry {
    pub z: usize,
    pub chained_value: f64,
    pub max_asymmetry: f64,
    pub satisfied: bool,
}

/// Result of [`bkp_bound_check`] over all z.
#[derive(Debug, Clone, PartialEq)]
pub struct BkpCheck {
    pub passes: bool,
    pub entries: Vec<BkpEntry>,
}

/// Checks I_N(z) ≥ |p(x|ϑ_k,z) − p(1−x|ϑ_k,z)| for every z and every Alice
/// setting. For signal-local boxes this is a theorem, so a failure beyond
/// tolerance indicates a bug rather than an interesting model; boxes that
/// signal are rejected outright since the bound's derivation assumes
/// signal-locality.
pub fn bkp_bound_check(model: &DecompositionModel, tol: f64) -> Result<BkpCheck> {
    for (z, bx) in model.boxes().iter().enumerate() {
        let ns = check_no_signalling(bx, tol.max(DEFAULT_PREDICATE_TOL));
        if !ns.passes {
            return Err(Error::SignallingBox {
                z,
                violation: ns.max_deviation,
            });
        }
    }
    let mut entries = Vec::with_capacity(model.z_count());
    let mut passes = true;
    for (z, bx) in model.boxes().iter().enumerate() {
        let chained = chained_value_of(bx)
            .expect("model boxes match the scenario shape")
            .value;
        let max_asymmetry = (0..bx.alice_settings())
            .map(|a| bx.alice_asymmetry(a))
            .fold(0.0, f64::max);
        let satisfied = chained + tol >= max_asymmetry;
        passes &= satisfied;
        entries.push(BkpEntry {
            z,
            chained_value: chained,
            max_asymmetry,
            satisfied,
        });
    }
    Ok(BkpCheck { passes, entries })
}

/// Result of [`deterministic_factorization_check`]: the two classifications
/// are computed independently so their equivalence stays a testable fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorizationCheck {
    pub no_signalling: bool,
    pub factorizes: bool,
}

/// For a box with exact 0/1 entries, decides (a) signal-locality of its
/// outcome functions and (b) whether some pair of local strategies f, g
/// reproduces it as p(x,y|a,b) = [x=f(a)]·[y=g(b)].
pub fn deterministic_factorization_check(bx: &BehaviorBox) -> Result<FactorizationCheck> {
    for &v in bx.entries() {
        if v != 0.0 && v != 1.0 {
            return Err(Error::NonDeterministicEntry(v));
        }
    }
    let (n_a, n_b) = (bx.alice_settings(), bx.bob_settings());
    // Normalization guarantees exactly one unit entry per cell.
    let outcome = |a: usize, b: usize| -> (u8, u8) {
        for x in 0..2u8 {
            for y in 0..2u8 {
                if bx.joint(a, b, x, y) == 1.0 {
                    return (x, y);
                }
            }
        }
        unreachable!("normalized deterministic cell has a unit entry");
    };
    let mut no_signalling = true;
    for a in 0..n_a {
        let x0 = outcome(a, 0).0;
        no_signalling &= (0..n_b).all(|b| outcome(a, b).0 == x0);
    }
    for b in 0..n_b {
        let y0 = outcome(0, b).1;
        no_signalling &= (0..n_a).all(|a| outcome(a, b).1 == y0);
    }
    let f: Vec<u8> = (0..n_a).map(|a| outcome(a, 0).0).collect();
    let g: Vec<u8> = (0..n_b).map(|b| outcome(0, b).1).collect();
    let factorizes = (0..n_a).all(|a| {
        (0..n_b).all(|b| outcome(a, b) == (f[a], g[b]))
    });
    Ok(FactorizationCheck {
        no_signalling,
        factorizes,
    })
}

/// For a product state (α ∈ {0,1}), builds the decomposition over local
/// deterministic strategies z = (f, g) with weights
/// μ(f,g) = Π_a p(f(a)|a) · Π_b p(g(b)|b). It averages back to the Born
/// behavior, every box is signal-local, and each box predicts outcomes with
/// certainty, so the advantage is maximal.
pub fn construct_product_state_model(
    state: &EntangledPairState,
    settings: &ScenarioSettings,
) -> Result<DecompositionModel> {
    let alpha = state.alpha();
    if alpha != 0.0 && alpha != 1.0 {
        return Err(Error::SubsystemNotPure(alpha));
    }
    let n = settings.n();
    if n > MAX_PRODUCT_MODEL_N {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_PRODUCT_MODEL_N,
        });
    }
    let b_ref = settings.bob_angles()[0];
    let a_ref = settings.alice_angles()[0];
    let p_alice: Vec<[f64; 2]> = settings
        .alice_angles()
        .iter()
        .map(|&a| [marginal(state, a, b_ref, 0), marginal(state, a, b_ref, 1)])
        .collect();
    let p_bob: Vec<[f64; 2]> = settings
        .bob_angles()
        .iter()
        .map(|&b| [bob_marginal(state, a_ref, b, 0), bob_marginal(state, a_ref, b, 1)])
        .collect();
    let mut weights = Vec::new();
    let mut boxes = Vec::new();
    for code in 0..(1usize << (2 * n)) {
        let f: Vec<u8> = (0..n).map(|a| ((code >> a) & 1) as u8).collect();
        let g: Vec<u8> = (0..n).map(|b| ((code >> (n + b)) & 1) as u8).collect();
        let mut w = 1.0;
        for (a, &fx) in f.iter().enumerate() {
            w *= p_alice[a][fx as usize];
        }
        for (b, &gy) in g.iter().enumerate() {
            w *= p_bob[b][gy as usize];
        }
        if w == 0.0 {
            continue;
        }
        weights.push(w);
        boxes.push(BehaviorBox::deterministic_local(&f, &g)?);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    DecompositionModel::new(*state, settings.clone(), weights, boxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chained::equally_spaced_settings;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const TOL: f64 = DEFAULT_PREDICATE_TOL;

    fn max_state() -> EntangledPairState {
        EntangledPairState::maximally_entangled()
    }

    #[test]
    fn quantum_box_is_no_signalling() {
        let settings = equally_spaced_settings(3).unwrap();
        let bx = BehaviorBox::from_quantum(&max_state(), &settings);
        let report = check_no_signalling(&bx, TOL);
        assert!(report.passes, "violation {}", report.max_deviation);
    }

    #[test]
    fn pr_box_is_no_signalling_with_uniform_marginals() {
        let bx = BehaviorBox::pr_box();
        assert!(check_no_signalling(&bx, TOL).passes);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(bx.alice_marginal(a, b, 0), 0.5);
                assert_eq!(bx.bob_marginal(a, b, 0), 0.5);
            }
        }
    }

    #[test]
    fn constructed_signalling_box_is_flagged() {
        // Alice's outcome copies Bob's setting: maximal violation.
        let mut entries = vec![0.0; 16];
        for b in 0..2usize {
            for a in 0..2usize {
                let x = b;
                entries[((a * 2 + b) * 2 + x) * 2] = 1.0;
            }
        }
        let bx = BehaviorBox::new(2, 2, entries).unwrap();
        let report = check_no_signalling(&bx, TOL);
        assert!(!report.passes);
        assert!((report.max_deviation - 1.0).abs() < TOL);
    }

    #[test]
    fn sampled_boxes_are_no_signalling() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let bx = BehaviorBox::sample_no_signalling(3, 3, &mut rng);
            assert!(check_no_signalling(&bx, 1e-12).passes);
            for a in 0..3 {
                for b in 0..3 {
                    let s: f64 = (0..4)
                        .map(|k| bx.joint(a, b, (k / 2) as u8, (k % 2) as u8))
                        .sum();
                    assert!((s - 1.0).abs() < 1e-12);
                    for x in 0..2u8 {
                        for y in 0..2u8 {
                            assert!(bx.joint(a, b, x, y) >= -1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_decomposition_averages_with_zero_advantage() {
        let settings = equally_spaced_settings(2).unwrap();
        let model = identity_decomposition(&max_state(), &settings);
        assert!(averages_to_quantum(&model, TOL).passes);
        assert!(check_no_conspiracy(&model).passes);
        let report = advantage(&model);
        assert!(report.epsilon_achieved < TOL);
    }

    #[test]
    fn averaging_detects_perturbation_and_cancellation() {
        let settings = equally_spaced_settings(2).unwrap();
        let state = max_state();
        let quantum = BehaviorBox::from_quantum(&state, &settings);
        let delta = 1e-3;
        let shift = |sign: f64| -> BehaviorBox {
            let mut e = quantum.entries().to_vec();
            // Move mass between the two perfectly anti-correlated outcomes at
            // the first setting pair.
            e[0] += sign * delta;
            e[3] -= sign * delta;
            BehaviorBox::new(2, 2, e).unwrap()
        };
        let symmetric = DecompositionModel::new(
            state,
            settings.clone(),
            vec![0.5, 0.5],
            vec![shift(1.0), shift(-1.0)],
        )
        .unwrap();
        assert!(averages_to_quantum(&symmetric, TOL).passes);
        let lopsided = DecompositionModel::new(
            state,
            settings.clone(),
            vec![1.0],
            vec![shift(1.0)],
        )
        .unwrap();
        let report = averages_to_quantum(&lopsided, TOL);
        assert!(!report.passes);
        assert!((report.max_deviation - delta).abs() < 1e-12);
    }

    #[test]
    fn deterministic_box_has_maximal_advantage() {
        let settings = equally_spaced_settings(2).unwrap();
        let state = EntangledPairState::new(1.0).unwrap();
        let bx = BehaviorBox::deterministic_local(&[0, 0], &[0, 0]).unwrap();
        let model =
            DecompositionModel::new(state, settings, vec![1.0], vec![bx]).unwrap();
        let report = advantage(&model);
        assert!((report.epsilon_achieved - 1.0).abs() < TOL);
    }

    #[test]
    fn product_state_model_recovers_born_with_full_advantage() {
        let settings = equally_spaced_settings(2).unwrap();
        for alpha in [0.0, 1.0] {
            let state = EntangledPairState::new(alpha).unwrap();
            let model = construct_product_state_model(&state, &settings).unwrap();
            assert!(averages_to_quantum(&model, 1e-12).passes);
            for bx in model.boxes() {
                assert!(check_no_signalling(bx, 1e-12).passes);
            }
            let report = advantage(&model);
            assert!((report.epsilon_achieved - 1.0).abs() < TOL);
            assert!(bkp_bound_check(&model, TOL).unwrap().passes);
        }
    }

    #[test]
    fn product_state_model_rejects_entangled_states() {
        let settings = equally_spaced_settings(2).unwrap();
        let err = construct_product_state_model(&max_state(), &settings).unwrap_err();
        assert!(err.to_string().contains("subsystem not pure"));
    }

    #[test]
    fn partially_entangled_identity_advantage_is_marginal_asymmetry() {
        let settings = equally_spaced_settings(2).unwrap();
        let state = EntangledPairState::new(0.8).unwrap();
        let model = identity_decomposition(&state, &settings);
        let report = advantage(&model);
        assert!((report.epsilon_achieved - 0.28).abs() < 1e-12);
        assert_eq!(report.witness, (0, 0, 0));
    }

    #[test]
    fn bkp_rejects_signalling_models() {
        let settings = equally_spaced_settings(2).unwrap();
        let mut entries = vec![0.0; 16];
        for a in 0..2usize {
            for b in 0..2usize {
                entries[((a * 2 + b) * 2 + b) * 2] = 1.0;
            }
        }
        let bx = BehaviorBox::new(2, 2, entries).unwrap();
        let model =
            DecompositionModel::new(max_state(), settings, vec![1.0], vec![bx]).unwrap();
        let err = bkp_bound_check(&model, TOL).unwrap_err();
        assert!(err.to_string().contains("BKP bound presupposes no-signalling"));
    }

    #[test]
    fn bkp_holds_for_quantum_and_pr_boxes() {
        let settings = equally_spaced_settings(2).unwrap();
        let quantum = identity_decomposition(&max_state(), &settings);
        let check = bkp_bound_check(&quantum, TOL).unwrap();
        assert!(check.passes);
        assert!(check.entries[0].max_asymmetry < TOL);

        let pr = DecompositionModel::new(
            max_state(),
            settings,
            vec![1.0],
            vec![BehaviorBox::pr_box()],
        )
        .unwrap();
        assert!(bkp_bound_check(&pr, TOL).unwrap().passes);
    }

    #[test]
    fn factorization_classifies_local_and_signalling_boxes() {
        let local = BehaviorBox::deterministic_local(&[0, 1], &[1, 0]).unwrap();
        let check = deterministic_factorization_check(&local).unwrap();
        assert!(check.no_signalling && check.factorizes);

        let mut entries = vec![0.0; 16];
        for a in 0..2usize {
            for b in 0..2usize {
                entries[((a * 2 + b) * 2 + b) * 2] = 1.0;
            }
        }
        let signalling = BehaviorBox::new(2, 2, entries).unwrap();
        let check = deterministic_factorization_check(&signalling).unwrap();
        assert!(!check.no_signalling && !check.factorizes);
    }

    #[test]
    fn factorization_rejects_mixed_entries() {
        let err = deterministic_factorization_check(&BehaviorBox::pr_box()).unwrap_err();
        assert!(err.to_string().contains("exact 0/1 entries"));
    }

    #[test]
    fn model_validation_rejects_bad_weights() {
        let settings = equally_spaced_settings(2).unwrap();
        let bx = BehaviorBox::from_quantum(&max_state(), &settings);
        assert!(DecompositionModel::new(
            max_state(),
            settings.clone(),
            vec![0.45, 0.45],
            vec![bx.clone(), bx.clone()],
        )
        .is_err());
        assert!(DecompositionModel::new(
            max_state(),
            settings,
            vec![1.5, -0.5],
            vec![bx.clone(), bx],
        )
        .is_err());
    }

    #[test]
    fn averaged_box_of_no_signalling_mixture_is_no_signalling() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let settings = equally_spaced_settings(3).unwrap();
        let boxes: Vec<BehaviorBox> = (0..4)
            .map(|_| BehaviorBox::sample_no_signalling(3, 3, &mut rng))
            .collect();
        let model = DecompositionModel::new(
            max_state(),
            settings,
            vec![0.25; 4],
            boxes,
        )
        .unwrap();
        assert!(check_no_signalling(&model.averaged_box(), 1e-12).passes);
    }
}
