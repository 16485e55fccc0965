//! Certificate number systems: Afriat numbers (weak and strict), Varian
//! numbers, pairwise numbers and the closed-form `W` matrix.
//!
//! Each system comes with a residual matrix so a caller can audit the
//! inequalities without trusting the construction.

use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::{check_garp, check_sarp, check_wgarp};
use crate::dataset::{Dataset, RelationMatrices};
use crate::error::Result;

/// Penalty `g` of the strict construction: continuous, zero only at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    #[default]
    SquaredEuclidean,
    Euclidean,
    L1,
}

impl Penalty {
    pub fn eval(self, z: &[f64]) -> f64 {
        match self {
            Penalty::SquaredEuclidean => z.iter().map(|v| v * v).sum(),
            Penalty::Euclidean => z.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Penalty::L1 => z.iter().map(|v| v.abs()).sum(),
        }
    }

    /// `g(a - b)`.
    pub fn between(self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
        self.eval(&diff)
    }
}

/// `ε` and `g` of the strict construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictParams {
    pub eps: f64,
    pub penalty: Penalty,
}

impl StrictParams {
    /// `ε = 1e-6 · max_{t,s} p^t·x^s` with the squared Euclidean penalty.
    pub fn default_for(d: &Dataset) -> Self {
        let e = d.expenditure_matrix();
        let max = e.rows().iter().flatten().fold(0.0_f64, |m, v| m.max(*v));
        Self {
            eps: 1e-6 * max.max(f64::MIN_POSITIVE),
            penalty: Penalty::SquaredEuclidean,
        }
    }

    fn term(&self, a: &[f64], b: &[f64]) -> f64 {
        self.eps * self.penalty.between(a, b)
    }
}

/// Utility levels `U^t` and multipliers `λ^t > 0` with
/// `U^t - U^s >= λ^t p^t·(x^t - x^s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AfriatNumbers {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Present when the numbers were built by the strict construction.
    pub strict: Option<StrictParams>,
}

impl AfriatNumbers {
    /// `res[t][s] = U^t - U^s - λ^t p^t·(x^t - x^s)`, minus `ε g(x^t - x^s)` for
    /// strict numbers. Every entry is nonnegative for a valid certificate.
    pub fn residuals(&self, d: &Dataset) -> Vec<Vec<f64>> {
        let e = d.expenditure_matrix();
        let n = d.len();
        (0..n)
            .map(|t| {
                (0..n)
                    .map(|s| {
                        let mut r = self.u[t] - self.u[s] - self.lambda[t] * e.gap(t, s);
                        if let Some(sp) = &self.strict {
                            r -= sp.term(d.bundle(t), d.bundle(s));
                        }
                        r
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks every inequality. The tolerance is scaled by `max(1, λ^t)`
    /// because ties inside the tolerance band enter multiplied by `λ^t`.
    pub fn verify(&self, d: &Dataset, tol: f64) -> bool {
        if self.u.len() != d.len() || self.lambda.iter().any(|l| !(*l > 0.0)) {
            return false;
        }
        let res = self.residuals(d);
        (0..d.len()).all(|t| {
            let slack = tol * self.lambda[t].max(1.0) * 4.0;
            (0..d.len()).all(|s| res[t][s] >= -slack)
        })
    }

    /// For strict numbers: inequalities are strict between distinct bundles
    /// and `U^t = U^s` for equal bundles.
    pub fn verify_strict(&self, d: &Dataset, tol: f64) -> bool {
        if !self.verify(d, tol) {
            return false;
        }
        let e = d.expenditure_matrix();
        (0..d.len()).all(|t| {
            (0..d.len()).all(|s| {
                if d.same_bundle(t, s, tol) {
                    (self.u[t] - self.u[s]).abs() <= tol * self.lambda[t].max(1.0) * 4.0
                } else {
                    self.u[t] - self.u[s] > self.lambda[t] * e.gap(t, s)
                }
            })
        })
    }
}

/// Afriat's envelope `min_t { U^t + λ^t p^t·(z - x^t) }`, with the strict
/// penalty `- ε g(z - x^t)` inside each term for strict numbers.
pub fn afriat_utility(n: &AfriatNumbers, d: &Dataset, z: &[f64]) -> f64 {
    (0..d.len())
        .map(|t| {
            let mut v = n.u[t] + n.lambda[t] * (d.cost(t, z) - d.wealth(t));
            if let Some(sp) = &n.strict {
                v -= sp.term(z, d.bundle(t));
            }
            v
        })
        .fold(f64::INFINITY, f64::min)
}

/// Afriat numbers by the layered maximal-element sweep. Requires GARP.
pub fn afriat_numbers(d: &Dataset, tol: f64) -> Result<AfriatNumbers> {
    check_garp(d, tol).into_result()?;
    Ok(sweep(d, tol, None))
}

/// Strict Afriat numbers (`ε·g` penalised sweep). Requires SARP.
pub fn strict_afriat_numbers(d: &Dataset, params: StrictParams, tol: f64) -> Result<AfriatNumbers> {
    check_sarp(d, tol).into_result()?;
    Ok(sweep(d, tol, Some(params)))
}

/// `V^t := U^t` from [`afriat_numbers`]: `p^t·(x^t - x^s) >= 0` implies
/// `V^t >= V^s`, strictly when the inequality is strict.
pub fn varian_numbers(d: &Dataset, tol: f64) -> Result<Vec<f64>> {
    afriat_numbers(d, tol).map(|n| n.u)
}

/// The sweep, assuming the caller has established the axiom.
///
/// Observations leave the pool `I` one revealed-preference class at a time,
/// most preferred first. The first class gets `U = λ = 1`; every later class
/// `E` gets the common level
/// `U = min_{i∈E, j∈B} U^j + λ^j p^j·(x^i - x^j) - ε g(x^i - x^j)` and each
/// member its own `λ^i = max(1, max_{j∈B} (U^j - U^i + ε g(x^j - x^i)) / p^i·(x^j - x^i))`,
/// where `B` holds the observations already placed.
fn sweep(d: &Dataset, tol: f64, strict: Option<StrictParams>) -> AfriatNumbers {
    let n = d.len();
    let r = RelationMatrices::compute(d, tol);
    let wc = r.weak_closure();
    let e = d.expenditure_matrix();
    let pen = |a: usize, b: usize| strict.map_or(0.0, |sp| sp.term(d.bundle(a), d.bundle(b)));
    let mut u = vec![0.0; n];
    let mut lambda = vec![1.0; n];
    let mut pool: Vec<usize> = (0..n).collect();
    let mut placed: Vec<usize> = Vec::new();
    while !pool.is_empty() {
        // Smallest index not strictly below anything left in the pool.
        let m = *pool
            .iter()
            .find(|&&m| pool.iter().all(|&i| !wc[i][m] || wc[m][i]))
            .unwrap_or(&pool[0]);
        let class: Vec<usize> = pool.iter().copied().filter(|&i| wc[i][m]).collect();
        if placed.is_empty() {
            for &i in &class {
                u[i] = 1.0;
                lambda[i] = 1.0;
            }
        } else {
            let level = class
                .iter()
                .flat_map(|&i| placed.iter().map(move |&j| (i, j)))
                .map(|(i, j)| u[j] - lambda[j] * e.gap(j, i) - pen(i, j))
                .fold(f64::INFINITY, f64::min);
            for &i in &class {
                u[i] = level;
            }
            for &i in &class {
                let ratio = placed
                    .iter()
                    .map(|&j| (u[j] - u[i] + pen(j, i)) / -e.gap(i, j))
                    .fold(f64::NEG_INFINITY, f64::max);
                lambda[i] = ratio.max(1.0);
            }
        }
        pool.retain(|i| !class.contains(i));
        placed.extend(class);
    }
    AfriatNumbers { u, lambda, strict }
}

/// Numbers for the two-observation dataset `{s, t}`; the first entry of each
/// vector belongs to `s`.
pub(crate) fn pair_numbers(
    d: &Dataset,
    s: usize,
    t: usize,
    tol: f64,
    strict: Option<StrictParams>,
) -> (Dataset, AfriatNumbers) {
    let sub = d.subset(&[s, t]);
    let numbers = sweep(&sub, tol, strict);
    (sub, numbers)
}

/// `R^{t,s}` and `λ^t_{ts}` from Afriat numbers of every pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseNumbers {
    pub r: Vec<Vec<f64>>,
    /// `lambda[t][s]` is the multiplier of observation `t` in the pair
    /// `{t, s}`; the diagonal is 1.
    pub lambda: Vec<Vec<f64>>,
}

impl PairwiseNumbers {
    /// `res[t][s] = R^{t,s} - λ^t_{ts} p^t·(x^t - x^s)`.
    pub fn residuals(&self, d: &Dataset) -> Vec<Vec<f64>> {
        let e = d.expenditure_matrix();
        (0..d.len())
            .map(|t| {
                (0..d.len())
                    .map(|s| self.r[t][s] - self.lambda[t][s] * e.gap(t, s))
                    .collect()
            })
            .collect()
    }

    pub fn verify(&self, d: &Dataset, tol: f64) -> bool {
        let n = d.len();
        let res = self.residuals(d);
        (0..n).all(|t| {
            (0..n).all(|s| {
                self.r[t][s] == -self.r[s][t]
                    && self.lambda[t][s] > 0.0
                    && res[t][s] >= -tol * self.lambda[t][s].max(1.0) * 4.0
            })
        })
    }
}

/// Pairwise numbers; requires WGARP.
pub fn pairwise_numbers(d: &Dataset, tol: f64) -> Result<PairwiseNumbers> {
    check_wgarp(d, tol).into_result()?;
    Ok(pairwise_numbers_unchecked(d, tol))
}

/// The pairwise sweep without the WGARP precondition; the result certifies
/// exactly when [`PairwiseNumbers::verify`] accepts it.
pub fn pairwise_numbers_unchecked(d: &Dataset, tol: f64) -> PairwiseNumbers {
    let n = d.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect();
    let results: Vec<((usize, usize), AfriatNumbers)> = pairs
        .par_iter()
        .map(|&(s, t)| ((s, t), pair_numbers(d, s, t, tol, None).1))
        .collect();
    let mut r = vec![vec![0.0; n]; n];
    let mut lambda = vec![vec![1.0; n]; n];
    for ((s, t), num) in results {
        r[s][t] = num.u[0] - num.u[1];
        r[t][s] = -r[s][t];
        lambda[s][t] = num.lambda[0];
        lambda[t][s] = num.lambda[1];
    }
    PairwiseNumbers { r, lambda }
}

/// Skew-symmetric `W` with `p^t·(x^t - x^s) >= 0 ⇒ W^{t,s} >= 0` and
/// `p^t·(x^t - x^s) > 0 ⇒ W^{t,s} > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WNumbers {
    pub w: Vec<Vec<f64>>,
}

impl WNumbers {
    /// Checks skew-symmetry and both implications against the direct
    /// relations at tolerance `tol`.
    pub fn verify(&self, d: &Dataset, tol: f64) -> bool {
        let r = crate::dataset::direct_relations(d, tol);
        let n = d.len();
        (0..n).all(|t| {
            (0..n).all(|s| {
                self.w[t][s] == -self.w[s][t]
                    && (!r.weak_direct[t][s] || self.w[t][s] >= 0.0)
                    && (!r.strict_direct[t][s] || self.w[t][s] > 0.0)
            })
        })
    }
}

/// `W^{t,s} = p^t·(x^t - x^s) - p^s·(x^s - x^t)`; requires WGARP.
pub fn w_numbers(d: &Dataset, tol: f64) -> Result<WNumbers> {
    check_wgarp(d, tol).into_result()?;
    Ok(w_numbers_unchecked(d, tol))
}

/// The closed form without the WGARP precondition, for testing whether it
/// certifies. Expenditure gaps within `tol` of zero are read as exact ties so
/// the result agrees with the tolerance used by the relations.
pub fn w_numbers_unchecked(d: &Dataset, tol: f64) -> WNumbers {
    let e = d.expenditure_matrix();
    let n = d.len();
    let snap = |v: f64| if v.abs() <= tol { 0.0 } else { v };
    let mut w = vec![vec![0.0; n]; n];
    for t in 0..n {
        for s in t + 1..n {
            w[t][s] = snap(e.gap(t, s)) - snap(e.gap(s, t));
            w[s][t] = -w[t][s];
        }
    }
    WNumbers { w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fixtures;
    use crate::DEFAULT_TOL as TOL;

    #[test]
    fn single_observation_gets_ones() {
        let d = Dataset::new(vec![vec![2.0, 1.0]], vec![vec![1.0, 3.0]]).unwrap();
        let n = afriat_numbers(&d, TOL).unwrap();
        assert_eq!((n.u.clone(), n.lambda.clone()), (vec![1.0], vec![1.0]));
        let s = strict_afriat_numbers(&d, StrictParams::default_for(&d), TOL).unwrap();
        assert_eq!((s.u, s.lambda), (vec![1.0], vec![1.0]));
        assert_eq!(varian_numbers(&d, TOL).unwrap(), vec![1.0]);
    }

    #[test]
    fn two_observation_inequalities() {
        let d = fixtures::law_of_demand_pair();
        let n = afriat_numbers(&d, TOL).unwrap();
        let e = d.expenditure_matrix();
        for t in 0..2 {
            for s in 0..2 {
                assert!(n.u[t] - n.u[s] >= n.lambda[t] * e.gap(t, s) - TOL);
            }
        }
        let s = strict_afriat_numbers(&d, StrictParams::default_for(&d), TOL).unwrap();
        assert!(s.verify_strict(&d, TOL));
        assert!(s.u[0] - s.u[1] > s.lambda[0] * e.gap(0, 1));
    }

    #[test]
    fn example1_fails_garp() {
        assert!(matches!(
            afriat_numbers(&fixtures::example1(), TOL),
            Err(Error::GarpViolation { .. })
        ));
        assert!(matches!(
            strict_afriat_numbers(&fixtures::example1(), StrictParams::default_for(&fixtures::example1()), TOL),
            Err(Error::SarpViolation { .. })
        ));
    }

    #[test]
    fn duplicated_observation_shares_level() {
        let d = Dataset::new(
            vec![vec![1.0, 2.0], vec![3.0, 1.0], vec![2.0, 2.0]],
            vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]],
        )
        .unwrap();
        let s = strict_afriat_numbers(&d, StrictParams::default_for(&d), TOL).unwrap();
        assert_eq!(s.u[0], s.u[1]);
        assert!(s.verify_strict(&d, TOL));
    }

    #[test]
    fn envelope_examples() {
        let d = fixtures::law_of_demand_pair();
        let n = afriat_numbers(&d, TOL).unwrap();
        for t in 0..2 {
            assert!((afriat_utility(&n, &d, d.bundle(t)) - n.u[t]).abs() <= TOL);
        }
        let z = [0.0, 0.0];
        let direct = (0..2)
            .map(|t| n.u[t] - n.lambda[t] * d.wealth(t))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(afriat_utility(&n, &d, &z), direct);
        assert!(afriat_utility(&n, &d, &[1.0, 1.0]) < afriat_utility(&n, &d, &[1.0, 1.5]));
    }

    #[test]
    fn pairwise_example1() {
        let d = fixtures::example1();
        let p = pairwise_numbers(&d, TOL).unwrap();
        assert!(p.verify(&d, TOL));
        for t in 0..3 {
            assert_eq!(p.r[t][t], 0.0);
        }
    }

    #[test]
    fn w_example1() {
        let d = fixtures::example1();
        let w = w_numbers(&d, TOL).unwrap();
        assert_eq!(w.w[0][1], 12.0);
        assert_eq!(w.w[1][0], -12.0);
        assert_eq!(w.w[0][2], -12.0);
        assert!((0..3).all(|t| w.w[t][t] == 0.0));
        assert!(w.verify(&d, TOL));
    }

    #[test]
    fn w_rejects_wgarp_violation() {
        let d = fixtures::example1()
            .with_observation(vec![1.0; 3], vec![2.0, 2.0, 2.0])
            .unwrap();
        assert!(matches!(w_numbers(&d, TOL), Err(Error::WgarpViolation { .. })));
        assert!(!w_numbers_unchecked(&d, TOL).verify(&d, TOL));
        assert!(matches!(pairwise_numbers(&d, TOL), Err(Error::WgarpViolation { .. })));
    }
}
