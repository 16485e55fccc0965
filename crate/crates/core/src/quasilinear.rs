//! Quasilinear rationalization: potentials under the strong law of demand,
//! pairwise numbers under the law of demand, and the maximin quasilinear
//! preference function.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::axioms::{bellman_ford, check_law_of_demand, check_strong_law, Witness};
use crate::dataset::{bundles_equal, Dataset};
use crate::error::{Error, Result};
use crate::game::{solve_matrix_game, GameSolution};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::maximin::{budget_samples, RationalizationFailure, RationalizationReport};

/// Potentials with `U^t - U^s >= p^t·(x^t - x^s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasilinearNumbers {
    pub u: Vec<f64>,
}

impl QuasilinearNumbers {
    /// `U^t - U^s - p^t·(x^t - x^s)`, nonnegative when valid.
    pub fn residuals(&self, d: &Dataset) -> Vec<Vec<f64>> {
        let e = d.expenditure_matrix();
        (0..d.len())
            .map(|t| (0..d.len()).map(|s| self.u[t] - self.u[s] - e.gap(t, s)).collect())
            .collect()
    }

    pub fn verify(&self, d: &Dataset, tol: f64) -> bool {
        self.u.len() == d.len() && self.residuals(d).iter().flatten().all(|r| *r >= -tol)
    }

    /// The same potentials shifted by `c`, equally valid.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            u: self.u.iter().map(|u| u + c).collect(),
        }
    }
}

/// Edge weights `c(t -> s) = p^t·(x^s - x^t)`.
pub fn potential_weights(d: &Dataset) -> Vec<Vec<f64>> {
    let e = d.expenditure_matrix();
    (0..d.len())
        .map(|t| (0..d.len()).map(|s| -e.gap(t, s)).collect())
        .collect()
}

/// Shortest-path potentials from a virtual zero-weight source. Requires the
/// strong law of demand.
pub fn quasilinear_numbers(d: &Dataset, tol: f64) -> Result<QuasilinearNumbers> {
    let report = check_strong_law(d, tol);
    if !report.holds {
        let cycle = match report.witness {
            Some(Witness::Cycle(c)) => c,
            _ => Vec::new(),
        };
        return Err(Error::StrongLawViolation { cycle });
    }
    let w = potential_weights(d);
    let u = match bellman_ford(&w) {
        Ok(u) => u,
        // A cycle summing to zero up to rounding: use the tolerance-shifted
        // weights the axiom check accepted.
        Err(_) => {
            let shifted: Vec<Vec<f64>> = w
                .iter()
                .map(|row| row.iter().map(|c| c + tol / 2.0).collect())
                .collect();
            bellman_ford(&shifted).expect("strong law holds at tol")
        }
    };
    Ok(QuasilinearNumbers { u })
}

/// `min_s { U^s + p^s·(z - x^s) }`.
pub fn quasilinear_utility(d: &Dataset, n: &QuasilinearNumbers, z: &[f64]) -> f64 {
    (0..d.len())
        .map(|s| n.u[s] + d.cost(s, z) - d.wealth(s))
        .fold(f64::INFINITY, f64::min)
}

/// Skew-symmetric `R` with `R[t][s] >= p^t·(x^t - x^s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QlPairwiseNumbers {
    pub r: Vec<Vec<f64>>,
}

impl QlPairwiseNumbers {
    pub fn residuals(&self, d: &Dataset) -> Vec<Vec<f64>> {
        let e = d.expenditure_matrix();
        (0..d.len())
            .map(|t| (0..d.len()).map(|s| self.r[t][s] - e.gap(t, s)).collect())
            .collect()
    }

    pub fn verify(&self, d: &Dataset, tol: f64) -> bool {
        let n = d.len();
        self.r.len() == n
            && (0..n).all(|t| (0..n).all(|s| self.r[t][s] == -self.r[s][t]))
            && self.residuals(d).iter().flatten().all(|r| *r >= -tol)
    }
}

/// `R[t][s] = (p^t·(x^t - x^s) - p^s·(x^s - x^t)) / 2`. Requires the law of
/// demand.
pub fn ql_pairwise_numbers(d: &Dataset, tol: f64) -> Result<QlPairwiseNumbers> {
    let report = check_law_of_demand(d, tol);
    if let Some(Witness::Pair(t, s)) = report.witness {
        return Err(Error::LawOfDemandViolation { pair: (t, s) });
    }
    let e = d.expenditure_matrix();
    let n = d.len();
    let mut r = vec![vec![0.0; n]; n];
    for t in 0..n {
        for s in t + 1..n {
            let v = 0.5 * (e.gap(t, s) - e.gap(s, t));
            r[t][s] = v;
            r[s][t] = 0.0 - v;
        }
    }
    Ok(QlPairwiseNumbers { r })
}

/// The quasilinear maximin preference function built from pairwise numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QlPreference {
    data: Dataset,
    numbers: QlPairwiseNumbers,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QlValue {
    pub value: f64,
    pub game: GameSolution,
    pub payoff: Vec<Vec<f64>>,
}

impl QlPreference {
    pub fn build(d: &Dataset, tol: f64) -> Result<Self> {
        Ok(Self {
            data: d.clone(),
            numbers: ql_pairwise_numbers(d, tol)?,
        })
    }

    pub fn numbers(&self) -> &QlPairwiseNumbers {
        &self.numbers
    }

    /// `r_{st}(x, y) = R^{s,t} + p^s·(x - x^s) - p^t·(y - x^t)`; rows are `s`.
    pub fn payoff(&self, x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
        let d = &self.data;
        let n = d.len();
        let gx: Vec<f64> = (0..n).map(|s| d.cost(s, x) - d.wealth(s)).collect();
        let gy: Vec<f64> = (0..n).map(|t| d.cost(t, y) - d.wealth(t)).collect();
        (0..n)
            .map(|s| (0..n).map(|t| self.numbers.r[s][t] + gx[s] - gy[t]).collect())
            .collect()
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<QlValue> {
        let payoff = self.payoff(x, y);
        let game = solve_matrix_game(&payoff)?;
        Ok(QlValue {
            value: game.value,
            game,
            payoff,
        })
    }

    /// Monte-Carlo audit of `r(x^t, z) - p^t·(x^t - z) >= -tol` for
    /// budget-feasible `z`.
    pub fn check_rationalization(&self, samples_per_observation: usize, seed: u64, tol: f64) -> Result<RationalizationReport> {
        let d = &self.data;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = RationalizationReport {
            checked: 0,
            worst_margin: f64::INFINITY,
            failures: Vec::new(),
        };
        for t in 0..d.len() {
            let xt = d.bundle(t);
            for z in budget_samples(d, t, samples_per_observation, &mut rng) {
                if bundles_equal(&z, xt, 0.0) {
                    continue;
                }
                let margin = self.eval(xt, &z)?.value - (d.wealth(t) - d.cost(t, &z));
                report.checked += 1;
                report.worst_margin = report.worst_margin.min(margin);
                if margin < -tol {
                    report.failures.push(RationalizationFailure { observation: t, z, margin });
                }
            }
        }
        Ok(report)
    }
}

/// `r(x, y)` of the quasilinear maximin preference function.
pub fn eval_ql_preference(d: &Dataset, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    QlPreference::build(d, tol)?.eval(x, y).map(|v| v.value)
}

/// Outcome of the constant-multiplier system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremDReport {
    pub feasible: bool,
    /// Multipliers scaled to sum to `T`, when feasible.
    pub lambda: Option<Vec<f64>>,
    /// `R^{t,s}` at the midpoint of its admissible interval, when feasible.
    pub r: Option<Vec<Vec<f64>>>,
}

/// Decides whether some `λ > 0` and skew-symmetric `R` satisfy
/// `R^{t,s} >= λ^t p^t·(x^t - x^s)` for all pairs. Eliminating `R` leaves
/// `λ^t g_ts + λ^s g_st <= 0` with `g_ts = p^t·(x^t - x^s)`; the system is
/// homogeneous, so `λ >= 1` replaces `λ > 0`.
pub fn check_theorem_d_feasibility(d: &Dataset) -> Result<TheoremDReport> {
    let n = d.len();
    if n == 0 {
        return Ok(TheoremDReport {
            feasible: true,
            lambda: Some(Vec::new()),
            r: Some(Vec::new()),
        });
    }
    let e = d.expenditure_matrix();
    let mut lp = LinearProgram::new(n);
    lp.minimize(vec![1.0; n]);
    for t in 0..n {
        let mut row = vec![0.0; n];
        row[t] = 1.0;
        lp.add(row, Relation::Ge, 1.0);
        for s in t + 1..n {
            let mut row = vec![0.0; n];
            row[t] = e.gap(t, s);
            row[s] = e.gap(s, t);
            lp.add(row, Relation::Le, 0.0);
        }
    }
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let total: f64 = x.iter().sum();
            let lambda: Vec<f64> = x.iter().map(|v| v * n as f64 / total).collect();
            let mut r = vec![vec![0.0; n]; n];
            for t in 0..n {
                for s in t + 1..n {
                    let lo = lambda[t] * e.gap(t, s);
                    let hi = -lambda[s] * e.gap(s, t);
                    let v = 0.5 * (lo + hi);
                    r[t][s] = v;
                    r[s][t] = 0.0 - v;
                }
            }
            Ok(TheoremDReport {
                feasible: true,
                lambda: Some(lambda),
                r: Some(r),
            })
        }
        LpOutcome::Infeasible => Ok(TheoremDReport {
            feasible: false,
            lambda: None,
            r: None,
        }),
        LpOutcome::Unbounded => unreachable!("objective bounded below by T"),
    }
}

/// Largest violation of `λ^t g_ts + λ^s g_st <= 0` for given multipliers.
pub fn theorem_d_violation(d: &Dataset, lambda: &[f64]) -> f64 {
    let e = d.expenditure_matrix();
    let n = d.len();
    let mut worst = f64::NEG_INFINITY;
    for t in 0..n {
        for s in t + 1..n {
            worst = worst.max(lambda[t] * e.gap(t, s) + lambda[s] * e.gap(s, t));
        }
    }
    worst
}
