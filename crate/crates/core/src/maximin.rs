//! The maximin preference function.
//!
//! For every unordered pair of observations `{s, t}` an Afriat utility
//! `u_{st}` rationalizes the two-observation dataset. For bundles `x, y` the
//! payoff matrix `M[s][t] = u_{st}(x) - u_{st}(y)` (with `M[t][t] = p^t·(x - y)`
//! on the diagonal) defines a zero-sum game whose value is `r(x, y)`. The
//! function is skew-symmetric and rationalizes any dataset satisfying WGARP,
//! even when no utility function does.
//!
//! ```
//! use weakrp::{fixtures, maximin::LocalUtilityFamily, DEFAULT_TOL};
//!
//! let d = fixtures::example1();
//! let f = LocalUtilityFamily::build(&d, DEFAULT_TOL).unwrap();
//! let r = f.eval(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
//! assert!(r.value > 0.0);
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::afriat::{afriat_utility, pair_numbers, AfriatNumbers, StrictParams};
use crate::axioms::{check_warp, check_wgarp};
use crate::dataset::{bundles_equal, dot, Dataset};
use crate::error::Result;
use crate::game::{solve_matrix_game, GameSolution};

/// Afriat utility of a two-observation sub-dataset.
#[derive(Debug, Clone, Serialize)]
pub struct LocalUtility {
    /// Observation indices `(s, t)` with `s < t` in the parent dataset.
    pub pair: (usize, usize),
    pub data: Dataset,
    pub numbers: AfriatNumbers,
}

impl LocalUtility {
    pub fn value(&self, z: &[f64]) -> f64 {
        afriat_utility(&self.numbers, &self.data, z)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    /// `locals[idx(s, t)]` for `s < t`.
    Pairwise(Vec<LocalUtility>),
    /// Every entry is the difference of one global utility.
    Global(AfriatNumbers),
}

/// The local utilities together with the diagonal rule.
#[derive(Debug, Clone, Serialize)]
pub struct LocalUtilityFamily {
    data: Dataset,
    strict: Option<StrictParams>,
    kind: Kind,
}

/// A preference evaluation: `r(x, y)` with the game that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preference {
    pub value: f64,
    pub game: GameSolution,
    /// Pure pair `(s, t)` in the supports of the optimal strategies whose
    /// payoff is closest to the value.
    pub attaining: (usize, usize),
    pub payoff: Vec<Vec<f64>>,
}

impl LocalUtilityFamily {
    /// Weak family; requires WGARP.
    pub fn build(d: &Dataset, tol: f64) -> Result<Self> {
        check_wgarp(d, tol).into_result()?;
        Ok(Self::assemble(d, tol, None))
    }

    /// Strict family built from strict pairwise numbers with the `ε·g`
    /// diagonal penalty; requires WARP.
    pub fn build_strict(d: &Dataset, params: StrictParams, tol: f64) -> Result<Self> {
        check_warp(d, tol).into_result()?;
        Ok(Self::assemble(d, tol, Some(params)))
    }

    fn assemble(d: &Dataset, tol: f64, strict: Option<StrictParams>) -> Self {
        let n = d.len();
        let mut locals = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for s in 0..n {
            for t in s + 1..n {
                let (data, numbers) = pair_numbers(d, s, t, tol, strict);
                locals.push(LocalUtility {
                    pair: (s, t),
                    data,
                    numbers,
                });
            }
        }
        Self {
            data: d.clone(),
            strict,
            kind: Kind::Pairwise(locals),
        }
    }

    /// Every entry of the payoff matrix, diagonal included, is
    /// `u(x) - u(y)` for the envelope of `numbers`; the game value is then
    /// exactly that difference.
    pub fn from_global(d: &Dataset, numbers: AfriatNumbers) -> Self {
        Self {
            data: d.clone(),
            strict: numbers.strict,
            kind: Kind::Global(numbers),
        }
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn is_strict(&self) -> bool {
        self.strict.is_some()
    }

    /// Local utility of the pair `{s, t}`, `s != t`.
    pub fn local(&self, s: usize, t: usize) -> Option<&LocalUtility> {
        let Kind::Pairwise(locals) = &self.kind else {
            return None;
        };
        if s == t {
            return None;
        }
        let (a, b) = (s.min(t), s.max(t));
        let n = self.data.len();
        // Row-major index into the strict upper triangle.
        let idx = a * n - a * (a + 1) / 2 + (b - a - 1);
        locals.get(idx)
    }

    pub fn locals(&self) -> &[LocalUtility] {
        match &self.kind {
            Kind::Pairwise(l) => l,
            Kind::Global(_) => &[],
        }
    }

    /// `r_{st}(x, y)`.
    pub fn entry(&self, s: usize, t: usize, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            Kind::Global(numbers) => {
                afriat_utility(numbers, &self.data, x) - afriat_utility(numbers, &self.data, y)
            }
            Kind::Pairwise(_) if s == t => {
                let d = &self.data;
                let mut v = d.cost(t, x) - d.cost(t, y);
                if let Some(sp) = &self.strict {
                    let xt = d.bundle(t);
                    v -= sp.eps * (sp.penalty.between(x, xt) - sp.penalty.between(y, xt));
                }
                v
            }
            Kind::Pairwise(_) => {
                let u = self.local(s, t).expect("pair present");
                u.value(x) - u.value(y)
            }
        }
    }

    pub fn payoff(&self, x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
        let n = self.data.len();
        if let Kind::Global(numbers) = &self.kind {
            let v = afriat_utility(numbers, &self.data, x) - afriat_utility(numbers, &self.data, y);
            return vec![vec![v; n]; n];
        }
        (0..n).map(|s| (0..n).map(|t| self.entry(s, t, x, y)).collect()).collect()
    }

    /// `r(x, y)`, the value of the game with payoff [`Self::payoff`].
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Preference> {
        let payoff = self.payoff(x, y);
        let game = solve_matrix_game(&payoff)?;
        let support = |v: &[f64]| -> Vec<usize> {
            let max = v.iter().cloned().fold(0.0, f64::max);
            (0..v.len()).filter(|&i| v[i] >= 1e-9 * max.max(1e-300)).collect()
        };
        let rows = support(&game.row_strategy);
        let cols = support(&game.col_strategy);
        let mut attaining = (rows[0], cols[0]);
        let mut best = f64::INFINITY;
        for &s in &rows {
            for &t in &cols {
                let dist = (payoff[s][t] - game.value).abs();
                if dist < best {
                    best = dist;
                    attaining = (s, t);
                }
            }
        }
        Ok(Preference {
            value: game.value,
            game,
            attaining,
            payoff,
        })
    }
}

/// `r(x, y)` for a built family.
pub fn eval_preference(f: &LocalUtilityFamily, x: &[f64], y: &[f64]) -> Result<f64> {
    f.eval(x, y).map(|p| p.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalizationFailure {
    pub observation: usize,
    pub z: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalizationReport {
    pub checked: usize,
    /// Smallest `r(x^t, z)` over the samples that differ from `x^t`.
    pub worst_margin: f64,
    pub failures: Vec<RationalizationFailure>,
}

impl RationalizationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Budget-feasible bundles for observation `t`: `x^t` itself, the vertices
/// and barycentre of the budget face, then random points (half on the budget
/// line, half strictly inside).
pub fn budget_samples(d: &Dataset, t: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let p = d.price(t);
    let w = d.wealth(t);
    let l = d.goods();
    let mut out = vec![d.bundle(t).to_vec()];
    for k in 0..l {
        let mut v = vec![0.0; l];
        v[k] = w / p[k];
        out.push(v);
    }
    out.push(p.iter().map(|pk| w / (l as f64 * pk)).collect());
    while out.len() < count.max(1) {
        let weights: Vec<f64> = (0..l).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let total: f64 = weights.iter().sum();
        let level = if out.len() % 2 == 0 { 1.0 } else { rng.gen::<f64>() };
        out.push((0..l).map(|k| level * w * weights[k] / (total * p[k])).collect());
    }
    out.truncate(count.max(1));
    out
}

/// Monte-Carlo audit of `r(x^t, z) >= -tol` for budget-feasible `z`; for a
/// strict family also `r(x^t, z) > 0` whenever `z != x^t`.
pub fn check_rationalization(
    f: &LocalUtilityFamily,
    d: &Dataset,
    samples_per_observation: usize,
    seed: u64,
    tol: f64,
) -> Result<RationalizationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RationalizationReport {
        checked: 0,
        worst_margin: f64::INFINITY,
        failures: Vec::new(),
    };
    for t in 0..d.len() {
        let xt = d.bundle(t);
        for z in budget_samples(d, t, samples_per_observation, &mut rng) {
            let r = f.eval(xt, &z)?.value;
            report.checked += 1;
            let same = bundles_equal(&z, xt, 1e-12 * (1.0 + dot(xt, xt).sqrt()));
            if same {
                if r.abs() > tol {
                    report.failures.push(RationalizationFailure { observation: t, z, margin: r });
                }
                continue;
            }
            report.worst_margin = report.worst_margin.min(r);
            let bad = if f.is_strict() { r <= 0.0 } else { r < -tol };
            if bad {
                report.failures.push(RationalizationFailure { observation: t, z, margin: r });
            }
        }
    }
    Ok(report)
}
