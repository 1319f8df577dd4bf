//! Linear-programming search for the largest per-z predictive advantage
//! compatible with a signal-local decomposition of a quantum behavior.
//!
//! Variables are the weighted tables q_z(x,y|a,b) = μ(z)·p_z(x,y|a,b) plus one
//! slack margin m; the substitution makes both the averaging constraint
//! Σ_z q_z = Born table and per-z signal-locality linear, with
//! μ(z) = Σ_{x,y} q_z(x,y|0,0) recovered as a linear form. Advantage at a
//! designated setting a* is the one-sided row
//!
//!   sign·(Q_z(1) − Q_z(0)) + t·μ(z) + m ≤ 0   for every z,
//!
//! with Q_z(x) = Σ_y q_z(x,y|a*,0), i.e. p_z(x=0|a*) − p_z(x=1|a*) ≥ t (sign
//! +1) for every z the model can produce. Maximizing m turns feasibility of a
//! given t into the sign of m*, which is non-increasing in t, so the largest
//! feasible t is located by bisection; the search is repeated over all a* and
//! both signs and the best combination is kept.
//!
//! Two consequences of the constraint system bound the search window without
//! any physics input. Replicating the quantum box across all z shows
//! t = sign·d(a*) is always feasible, where d(a) is the quantum marginal
//! asymmetry p(0|a) − p(1|a). Summing the Z advantage rows and substituting
//! the averaging equalities gives −sign·d(a*) + t + Z·m ≤ 0, so any t beyond
//! sign·d(a*) + Z·feasibility_tol is infeasible. The bisection brackets with
//! these caps and prunes (a*, sign) candidates whose cap cannot beat the best
//! value found; candidates inside the window are still settled by the solver.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use rayon::prelude::*;

use crate::chained::ScenarioSettings;
use crate::decomposition::{BehaviorBox, DecompositionModel};
use crate::error::{Error, Result};
use crate::quantum::EntangledPairState;

/// Tunable tolerances for [`lp_max_advantage_with`].
#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    /// A candidate t counts as feasible when the maximized margin satisfies
    /// m* ≥ −feasibility_tol; looser than table tolerances because LP
    /// residuals dominate.
    pub feasibility_tol: f64,
    /// Bisection terminates when the bracketing interval is this narrow.
    pub bisection_tol: f64,
    /// Later (a*, sign) combinations are probed at best-so-far + probe_gap
    /// and skipped when infeasible there.
    pub probe_gap: f64,
    /// z atoms with extracted weight below this are dropped from the model.
    pub drop_weight: f64,
    /// Tighten bisection brackets and skip provably losing probes using the
    /// cap t ≤ sign·d(a*) + Z·feasibility_tol implied by the averaging rows.
    /// Turning this off reproduces the plain [lo, 1] search.
    pub averaging_cap: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feasibility_tol: 1e-7,
            bisection_tol: 1e-5,
            probe_gap: 1e-4,
            drop_weight: 1e-9,
            averaging_cap: true,
        }
    }
}

/// Result of the advantage search.
#[derive(Debug, Clone)]
pub struct LpAdvantage {
    /// Largest advantage threshold t for which a decomposition exists.
    pub t_star: f64,
    /// Designated Alice setting of the best combination.
    pub a_star: usize,
    /// +1 when the advantage favors outcome 0, −1 for outcome 1.
    pub sign: i8,
    /// Set when t_star is below the search resolution: no positive advantage
    /// is distinguishable from zero at the solver tolerances.
    pub zero_certificate: bool,
    /// Decomposition extracted from the optimal point at t = t_star.
    pub model: DecompositionModel,
    /// Number of LP solves spent.
    pub solve_count: usize,
}

struct Assembler {
    n: usize,
    z: usize,
    born: Vec<f64>,
    feasibility_tol: f64,
}

impl Assembler {
    fn new(
        state: &EntangledPairState,
        settings: &ScenarioSettings,
        z: usize,
        feasibility_tol: f64,
    ) -> Self {
        Assembler {
            n: settings.n(),
            z,
            born: BehaviorBox::from_quantum(state, settings)
                .entries()
                .to_vec(),
            feasibility_tol,
        }
    }

    fn var_q(&self, zi: usize, a: usize, b: usize, x: usize, y: usize) -> usize {
        zi * 4 * self.n * self.n + ((a * self.n + b) * 2 + x) * 2 + y
    }

    fn var_m(&self) -> usize {
        4 * self.z * self.n * self.n
    }

    fn n_vars(&self) -> usize {
        self.var_m() + 1
    }

    /// Maximizes the margin m at fixed (a*, sign, t); returns (m*, x).
    fn solve(&self, a_star: usize, sign: f64, t: f64) -> Result<(f64, Vec<f64>)> {
        let (n, z) = (self.n, self.z);
        let n_eq = 4 * n * n + 4 * z * n * (n - 1);
        let n_ineq = z + 4 * z * n * n;
        let mut rows = Vec::with_capacity(4 * n * n * z + 16 * z * n * (n - 1) + 9 * z + n_ineq);
        let mut cols = Vec::with_capacity(rows.capacity());
        let mut vals = Vec::with_capacity(rows.capacity());
        let mut rhs = vec![0.0; n_eq + n_ineq];
        let mut row = 0;

        // Averaging: Σ_z q_z(x,y|a,b) = Born(x,y|a,b).
        for a in 0..n {
            for b in 0..n {
                for x in 0..2 {
                    for y in 0..2 {
                        for zi in 0..z {
                            rows.push(row);
                            cols.push(self.var_q(zi, a, b, x, y));
                            vals.push(1.0);
                        }
                        rhs[row] = self.born[((a * n + b) * 2 + x) * 2 + y];
                        row += 1;
                    }
                }
            }
        }
        // Alice-side signal-locality per z: marginals match the b = 0 column.
        for zi in 0..z {
            for a in 0..n {
                for x in 0..2 {
                    for b in 1..n {
                        for y in 0..2 {
                            rows.push(row);
                            cols.push(self.var_q(zi, a, b, x, y));
                            vals.push(1.0);
                            rows.push(row);
                            cols.push(self.var_q(zi, a, 0, x, y));
                            vals.push(-1.0);
                        }
                        row += 1;
                    }
                }
            }
        }
        // Bob-side signal-locality per z: marginals match the a = 0 row.
        for zi in 0..z {
            for b in 0..n {
                for y in 0..2 {
                    for a in 1..n {
                        for x in 0..2 {
                            rows.push(row);
                            cols.push(self.var_q(zi, a, b, x, y));
                            vals.push(1.0);
                            rows.push(row);
                            cols.push(self.var_q(zi, 0, b, x, y));
                            vals.push(-1.0);
                        }
                        row += 1;
                    }
                }
            }
        }
        debug_assert_eq!(row, n_eq);
        // Advantage rows: sign·(Q_z(1) − Q_z(0)) + t·μ(z) + m ≤ 0.
        for zi in 0..z {
            for y in 0..2 {
                rows.push(row);
                cols.push(self.var_q(zi, a_star, 0, 1, y));
                vals.push(sign);
                rows.push(row);
                cols.push(self.var_q(zi, a_star, 0, 0, y));
                vals.push(-sign);
            }
            for x in 0..2 {
                for y in 0..2 {
                    rows.push(row);
                    cols.push(self.var_q(zi, 0, 0, x, y));
                    vals.push(t);
                }
            }
            rows.push(row);
            cols.push(self.var_m());
            vals.push(1.0);
            row += 1;
        }
        // Nonnegativity of every q variable.
        for v in 0..self.var_m() {
            rows.push(row);
            cols.push(v);
            vals.push(-1.0);
            row += 1;
        }
        debug_assert_eq!(row, n_eq + n_ineq);

        let a_mat = CscMatrix::new_from_triplets(n_eq + n_ineq, self.n_vars(), rows, cols, vals);
        let p_mat = CscMatrix::zeros((self.n_vars(), self.n_vars()));
        let mut objective = vec![0.0; self.n_vars()];
        objective[self.var_m()] = -1.0;
        let cones = [
            SupportedConeT::ZeroConeT(n_eq),
            SupportedConeT::NonnegativeConeT(n_ineq),
        ];
        let settings = DefaultSettings {
            verbose: false,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p_mat, &objective, &a_mat, &rhs, &cones, settings)
            .map_err(|e| Error::Solver(format!("setup failed: {e:?}")))?;
        solver.solve();
        match solver.solution.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {
                let m_star = solver.solution.x[self.var_m()];
                Ok((m_star, solver.solution.x.clone()))
            }
            status => Err(Error::Solver(format!(
                "status {status:?} after {} iterations",
                solver.info.iterations
            ))),
        }
    }

    fn feasible(&self, m_star: f64) -> bool {
        m_star >= -self.feasibility_tol
    }

    /// Born-table asymmetry p(0|a) − p(1|a), used to order and seed the search:
    /// replicating the quantum box across all z shows sign·asymmetry is always
    /// an achievable threshold.
    fn born_asymmetry(&self, a: usize) -> f64 {
        let base = (a * self.n) * 4;
        self.born[base] + self.born[base + 1] - self.born[base + 2] - self.born[base + 3]
    }

    /// Largest t any feasible point can reach for this combination: summing
    /// the Z advantage rows and substituting the averaging equalities leaves
    /// −sign·d(a*) + t + Z·m ≤ 0, so m ≥ −feasibility_tol forces this cap.
    fn advantage_cap(&self, a_star: usize, sign: f64) -> f64 {
        sign * self.born_asymmetry(a_star) + self.z as f64 * self.feasibility_tol
    }
}

struct BisectOutcome {
    t: f64,
    solution: Vec<f64>,
    solves: usize,
}

/// Bisects for the largest feasible t in [lo_init, hi_init], assuming lo_init
/// itself is feasible. Returns the located t, a solution at it, and the solve
/// count. A feasible hi_init < 1 (the cap was conservative) widens to [hi, 1].
fn bisect(
    asm: &Assembler,
    a_star: usize,
    sign: f64,
    lo_init: f64,
    hi_init: f64,
    opts: &LpOptions,
) -> Result<BisectOutcome> {
    let mut solves = 1;
    let (mut lo, mut hi) = (lo_init, hi_init);
    let mut at_lo = None;
    let (m_hi, x_hi) = asm.solve(a_star, sign, hi_init)?;
    if asm.feasible(m_hi) {
        if hi_init >= 1.0 {
            return Ok(BisectOutcome {
                t: 1.0,
                solution: x_hi,
                solves,
            });
        }
        lo = hi_init;
        hi = 1.0;
        at_lo = Some(x_hi);
    }
    while hi - lo > opts.bisection_tol {
        let mid = 0.5 * (lo + hi);
        let (m, x) = asm.solve(a_star, sign, mid)?;
        solves += 1;
        if asm.feasible(m) {
            lo = mid;
            at_lo = Some(x);
        } else {
            hi = mid;
        }
    }
    let solution = match at_lo {
        Some(x) => x,
        None => {
            solves += 1;
            asm.solve(a_star, sign, lo)?.1
        }
    };
    Ok(BisectOutcome {
        t: lo,
        solution,
        solves,
    })
}

fn extract_model(
    asm: &Assembler,
    state: &EntangledPairState,
    settings: &ScenarioSettings,
    x: &[f64],
    opts: &LpOptions,
) -> Result<DecompositionModel> {
    let n = asm.n;
    let mut weights = Vec::new();
    let mut boxes = Vec::new();
    for zi in 0..asm.z {
        let mu: f64 = (0..2)
            .flat_map(|xo| (0..2).map(move |yo| (xo, yo)))
            .map(|(xo, yo)| x[asm.var_q(zi, 0, 0, xo, yo)])
            .sum();
        if mu <= opts.drop_weight {
            continue;
        }
        let mut entries = Vec::with_capacity(4 * n * n);
        for a in 0..n {
            for b in 0..n {
                let cell: Vec<f64> = (0..2)
                    .flat_map(|xo| (0..2).map(move |yo| (xo, yo)))
                    .map(|(xo, yo)| (x[asm.var_q(zi, a, b, xo, yo)] / mu).clamp(0.0, 1.0))
                    .collect();
                let total: f64 = cell.iter().sum();
                entries.extend(cell.iter().map(|v| v / total));
            }
        }
        weights.push(mu);
        boxes.push(BehaviorBox::with_tolerance(n, n, entries, 1e-6)?);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    DecompositionModel::new(*state, settings.clone(), weights, boxes)
}

/// [`lp_max_advantage_with`] using default tolerances.
pub fn lp_max_advantage(
    state: &EntangledPairState,
    settings: &ScenarioSettings,
    z_count: usize,
) -> Result<LpAdvantage> {
    lp_max_advantage_with(state, settings, z_count, &LpOptions::default())
}

/// Finds the largest t such that some z_count-atom decomposition satisfies
/// averaging, per-z signal-locality, and per-z one-sided advantage ≥ t at a
/// designated setting, maximized over the setting and the advantage direction.
pub fn lp_max_advantage_with(
    state: &EntangledPairState,
    settings: &ScenarioSettings,
    z_count: usize,
    opts: &LpOptions,
) -> Result<LpAdvantage> {
    if z_count == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let asm = Assembler::new(state, settings, z_count, opts.feasibility_tol);
    let n = settings.n();

    // Probe combinations in descending order of the advantage the quantum box
    // itself already provides, so the first full bisection starts near the
    // winner and the remaining combinations usually die on one probe each.
    let mut combos: Vec<(usize, f64, f64)> = (0..n)
        .flat_map(|a| {
            let d = asm.born_asymmetry(a);
            [(a, 1.0, d), (a, -1.0, -d)]
        })
        .collect();
    combos.sort_by(|lhs, rhs| rhs.2.total_cmp(&lhs.2));

    let hi_for = |a: usize, s: f64, lo: f64| -> f64 {
        if opts.averaging_cap {
            (asm.advantage_cap(a, s) + opts.bisection_tol).min(1.0).max(lo)
        } else {
            1.0
        }
    };

    let (a0, s0, d0) = combos[0];
    let lo0 = d0.max(-1.0);
    let first = bisect(&asm, a0, s0, lo0, hi_for(a0, s0, lo0), opts)?;
    let mut solve_count = first.solves;
    let mut best = (first.t, a0, s0, first.solution);

    if best.0 < 1.0 {
        let t_probe = best.0 + opts.probe_gap;
        // (feasible at t_probe, solves spent); combinations whose cap already
        // rules out t_probe are settled without touching the solver.
        let probes: Vec<(bool, usize)> = combos[1..]
            .par_iter()
            .map(|&(a, s, _)| {
                if opts.averaging_cap && asm.advantage_cap(a, s) < t_probe {
                    return Ok((false, 0));
                }
                Ok((asm.feasible(asm.solve(a, s, t_probe)?.0), 1))
            })
            .collect::<Result<Vec<_>>>()?;
        solve_count += probes.iter().map(|p| p.1).sum::<usize>();
        for (idx, &(a, s, _)) in combos[1..].iter().enumerate() {
            if !probes[idx].0 {
                continue;
            }
            let run = bisect(&asm, a, s, t_probe, hi_for(a, s, t_probe), opts)?;
            solve_count += run.solves;
            if run.t > best.0 {
                best = (run.t, a, s, run.solution);
            }
            if best.0 >= 1.0 {
                break;
            }
        }
    }

    let (t_star, a_star, sign, solution) = best;
    let model = extract_model(&asm, state, settings, &solution, opts)?;
    Ok(LpAdvantage {
        t_star,
        a_star,
        sign: if sign >= 0.0 { 1 } else { -1 },
        zero_certificate: t_star <= opts.probe_gap,
        model,
        solve_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chained::{chained_value_trace, equally_spaced_settings};
    use crate::decomposition::{advantage, averages_to_quantum, check_no_signalling};

    #[test]
    fn product_state_reaches_full_advantage() {
        let state = EntangledPairState::new(1.0).unwrap();
        let settings = equally_spaced_settings(2).unwrap();
        let result = lp_max_advantage(&state, &settings, 2).unwrap();
        assert!((result.t_star - 1.0).abs() < 1e-7, "t* = {}", result.t_star);
        assert_eq!(result.a_star, 0);
        assert!(!result.zero_certificate);
        let report = advantage(&result.model);
        assert!(report.epsilon_achieved > 0.99);
    }

    #[test]
    fn maximally_entangled_single_atom_has_no_advantage() {
        let state = EntangledPairState::maximally_entangled();
        let settings = equally_spaced_settings(2).unwrap();
        let result = lp_max_advantage(&state, &settings, 1).unwrap();
        assert!(result.t_star.abs() < 1e-4, "t* = {}", result.t_star);
        assert!(result.zero_certificate);
    }

    #[test]
    fn extracted_model_is_valid_and_nearly_averages() {
        let state = EntangledPairState::maximally_entangled();
        let settings = equally_spaced_settings(2).unwrap();
        let result = lp_max_advantage(&state, &settings, 2).unwrap();
        let avg = averages_to_quantum(&result.model, 1e-5);
        assert!(avg.passes, "deviation {}", avg.max_deviation);
        for bx in result.model.boxes() {
            assert!(check_no_signalling(bx, 1e-5).passes);
        }
    }

    #[test]
    fn averaging_cap_does_not_change_the_optimum() {
        let state = EntangledPairState::new(0.9).unwrap();
        let settings = equally_spaced_settings(2).unwrap();
        let capped = lp_max_advantage(&state, &settings, 2).unwrap();
        let plain = lp_max_advantage_with(
            &state,
            &settings,
            2,
            &LpOptions {
                averaging_cap: false,
                ..LpOptions::default()
            },
        )
        .unwrap();
        assert!(
            (capped.t_star - plain.t_star).abs() <= 2.0 * LpOptions::default().bisection_tol,
            "capped {} vs plain {}",
            capped.t_star,
            plain.t_star
        );
        assert_eq!(capped.a_star, plain.a_star);
        assert!(capped.solve_count < plain.solve_count);
        // The optimum sits at the quantum marginal asymmetry 2α² − 1.
        let asym = 2.0 * 0.9f64 * 0.9 - 1.0;
        assert!((capped.t_star - asym).abs() < 1e-4, "t* = {}", capped.t_star);
    }

    #[test]
    fn advantage_never_exceeds_chained_value_for_maximal_entanglement() {
        let state = EntangledPairState::maximally_entangled();
        let settings = equally_spaced_settings(3).unwrap();
        let bound = chained_value_trace(&state, &settings).value;
        let result = lp_max_advantage(&state, &settings, 2).unwrap();
        assert!(result.t_star <= bound + 1e-6);
    }

    #[test]
    fn zero_atoms_is_rejected() {
        let state = EntangledPairState::maximally_entangled();
        let settings = equally_spaced_settings(2).unwrap();
        assert!(lp_max_advantage(&state, &settings, 0).is_err());
    }
}
