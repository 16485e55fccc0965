//! Demand at new prices: W-demand set membership, its bounding box, and the
//! binary-variable feasibility system for several new observations.
//!
//! With wealth normalized to one, a bundle `x` at new prices `q` (with
//! `q·x = 1`) keeps the data consistent with WGARP exactly when, for every
//! observation `t`,
//!
//! * `q·x^t <= 1` implies `p^t·x >= p^t·x^t`, and
//! * `q·x^t < 1` implies `p^t·x > p^t·x^t`.

use serde::Serialize;

use crate::axioms::check_wgarp;
use crate::dataset::{dot, validate_bundle, validate_price, Dataset};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionViolation {
    pub observation: usize,
    /// 2 for the weak condition, 3 for the strict one.
    pub condition: u8,
    /// `p^t·x - p^t·x^t`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WDemandReport {
    /// Conjunction of the conditions against every observation.
    pub member: bool,
    /// Whether the base data satisfy WGARP; the conditions presume it.
    pub base_wgarp: bool,
    pub violations: Vec<ConditionViolation>,
}

fn check_new_price(d: &Dataset, p_new: &[f64]) -> Result<()> {
    validate_price(p_new, d.goods()).map_err(|m| Error::InvalidInput(format!("new price: {m}")))
}

/// Whether `x_new` belongs to the W-demand set at `p_new`. The caller
/// normalizes so that `p_new·x_new = 1`.
pub fn in_wdemand(d: &Dataset, p_new: &[f64], x_new: &[f64], tol: f64) -> Result<WDemandReport> {
    check_new_price(d, p_new)?;
    validate_bundle(x_new, d.goods()).map_err(|m| Error::InvalidInput(format!("new bundle: {m}")))?;
    let spent = dot(p_new, x_new);
    if (spent - 1.0).abs() > tol.max(1e-12) {
        return Err(Error::Normalization { spent });
    }
    let mut violations = Vec::new();
    for t in 0..d.len() {
        let new_cost = dot(p_new, d.bundle(t));
        let margin = d.cost(t, x_new) - d.wealth(t);
        if new_cost < spent - tol {
            if margin <= tol {
                violations.push(ConditionViolation { observation: t, condition: 3, margin });
            }
        } else if new_cost <= spent + tol && margin < -tol {
            violations.push(ConditionViolation { observation: t, condition: 2, margin });
        }
    }
    Ok(WDemandReport {
        member: violations.is_empty(),
        base_wgarp: check_wgarp(d, tol).holds,
        violations,
    })
}

/// Bounding box of the W-demand set at `p_new`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WDemandBox {
    pub empty: bool,
    /// Per-coordinate minimum over the closure of the set; empty when the set
    /// is empty.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// The minimizing and maximizing bundle for each coordinate, in order
    /// `min x_1, max x_1, min x_2, ...`.
    pub vertices: Vec<Vec<f64>>,
    /// `affordable[t]`: `p_new·x^t <= 1`, which the data alone determine.
    pub affordable: Vec<bool>,
    pub grid: Option<GridAudit>,
}

/// Cross-check of the box against [`in_wdemand`] on a simplex grid of the
/// budget face.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAudit {
    pub resolution: usize,
    pub points: usize,
    pub members: usize,
    /// Members falling outside the box; zero for a correct box.
    pub outside: usize,
}

/// Per-coordinate bounds of `{x >= 0 : p_new·x = 1}` intersected with the
/// W-demand conditions. The affordability of each old bundle at the new
/// prices is fixed by the data once wealth is normalized, so a single
/// polyhedron describes the set; strict conditions are relaxed to their
/// closure for the bounds, and emptiness is decided by maximizing a common
/// margin on them. `resolution > 0` adds a grid audit.
pub fn wdemand_box(d: &Dataset, p_new: &[f64], resolution: usize, tol: f64) -> Result<WDemandBox> {
    check_new_price(d, p_new)?;
    let l = d.goods();
    let affordable: Vec<bool> = (0..d.len()).map(|t| dot(p_new, d.bundle(t)) <= 1.0 + tol).collect();
    let strict: Vec<bool> = (0..d.len()).map(|t| dot(p_new, d.bundle(t)) < 1.0 - tol).collect();

    // Variables: x (l), then δ.
    let base = |with_delta: bool, affordable: &[bool]| {
        let vars = l + 1;
        let mut lp = LinearProgram::new(vars);
        let mut row = p_new.to_vec();
        row.push(0.0);
        lp.add(row, Relation::Eq, 1.0);
        let mut cap = vec![0.0; vars];
        cap[l] = 1.0;
        lp.add(cap, Relation::Le, if with_delta { 1.0 } else { 0.0 });
        for t in 0..d.len() {
            if !affordable[t] {
                continue;
            }
            let mut row = d.price(t).to_vec();
            let w = d.wealth(t);
            if strict[t] {
                row.push(-w);
                lp.add(row, Relation::Ge, w + tol);
            } else {
                row.push(0.0);
                lp.add(row, Relation::Ge, w - tol);
            }
        }
        lp
    };

    let mut probe = base(true, &affordable);
    let mut obj = vec![0.0; l + 1];
    obj[l] = 1.0;
    probe.maximize(obj);
    let empty = match probe.solve()? {
        LpOutcome::Optimal { value, .. } => strict.iter().any(|&s| s) && value <= 1e-12,
        LpOutcome::Infeasible => true,
        LpOutcome::Unbounded => unreachable!("δ is capped"),
    };
    let mut out = WDemandBox {
        empty,
        lower: Vec::new(),
        upper: Vec::new(),
        vertices: Vec::new(),
        affordable,
        grid: None,
    };
    if !empty {
        for k in 0..l {
            for sense in [-1.0, 1.0] {
                let mut lp = base(false, &out.affordable);
                let mut c = vec![0.0; l + 1];
                c[k] = sense;
                lp.maximize(c);
                match lp.solve()? {
                    LpOutcome::Optimal { x, .. } => {
                        let v = x[k];
                        if sense < 0.0 {
                            out.lower.push(v);
                        } else {
                            out.upper.push(v);
                        }
                        out.vertices.push(x[..l].to_vec());
                    }
                    other => {
                        return Err(Error::Solver {
                            message: format!("box bound for good {} ended as {other:?}", k + 1),
                            gap: f64::NAN,
                        })
                    }
                }
            }
        }
    }
    if resolution > 0 {
        let mut audit = GridAudit {
            resolution,
            points: 0,
            members: 0,
            outside: 0,
        };
        for x in budget_grid(p_new, resolution) {
            audit.points += 1;
            if x.iter().all(|v| *v == 0.0) {
                continue;
            }
            if in_wdemand(d, p_new, &x, tol)?.member {
                audit.members += 1;
                let inside = !out.empty
                    && (0..l).all(|k| {
                        let slack = 1e-9 * (1.0 + out.upper[k].abs());
                        x[k] >= out.lower[k] - slack && x[k] <= out.upper[k] + slack
                    });
                if !inside {
                    audit.outside += 1;
                }
            }
        }
        out.grid = Some(audit);
    }
    Ok(out)
}

/// Points `x_l = k_l / (n p_l)` with `Σ k_l = n` on the face `p·x = 1`.
pub fn budget_grid(p: &[f64], n: usize) -> Vec<Vec<f64>> {
    fn rec(p: &[f64], n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() + 1 == p.len() {
            prefix.push(left);
            out.push(
                prefix
                    .iter()
                    .zip(p)
                    .map(|(&k, &pl)| k as f64 / (n as f64 * pl))
                    .collect(),
            );
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(p, n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, n.max(1), n.max(1), &mut Vec::new(), &mut out);
    out
}

/// A candidate observation for a free slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub price: Vec<f64>,
    pub bundle: Vec<f64>,
}

/// A new observation known only up to a finite candidate list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slot {
    pub candidates: Vec<Candidate>,
}

impl Slot {
    /// Every bundle on the list, all at the same price.
    pub fn at_price(price: &[f64], bundles: impl IntoIterator<Item = Vec<f64>>) -> Self {
        Self {
            candidates: bundles
                .into_iter()
                .map(|bundle| Candidate {
                    price: price.to_vec(),
                    bundle,
                })
                .collect(),
        }
    }

    /// A fixed bundle at each listed price.
    pub fn at_bundle(bundle: &[f64], prices: impl IntoIterator<Item = Vec<f64>>) -> Self {
        Self {
            candidates: prices
                .into_iter()
                .map(|price| Candidate {
                    price,
                    bundle: bundle.to_vec(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterfactualQuery {
    pub base: Dataset,
    pub slots: Vec<Slot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MilpOptions {
    /// Margin used for every strict inequality.
    pub eps: f64,
    /// Expenditure differences within `tol` (in the data's own units, before
    /// normalization) are read as exact ties, as in the axiom checks.
    pub tol: f64,
    /// Largest number of candidate assignments the search may visit.
    pub max_nodes: u64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            eps: 1e-7,
            tol: crate::DEFAULT_TOL,
            max_nodes: 1_000_000,
        }
    }
}

/// A solution of the system on the wealth-normalized combined data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilpAssignment {
    /// Chosen candidate per slot.
    pub choices: Vec<usize>,
    /// Base observations followed by the chosen slot observations, prices
    /// scaled so each observation spends 1.
    pub data: Dataset,
    /// `gaps[t][s] = p^t·(x^t - x^s)` on the normalized data, with ties
    /// snapped to zero.
    pub gaps: Vec<Vec<f64>>,
    /// Big-M constants `A^t = p^t·x^t + max_s p^t·x^s + 1`, the maximum
    /// running over every bundle the search may place.
    pub big_m: Vec<f64>,
    pub b: Vec<Vec<u8>>,
    pub r: Vec<Vec<f64>>,
}

impl MilpAssignment {
    /// Checks all four inequality families for every ordered pair, and that
    /// the stored gaps match the data up to the tie snapping.
    pub fn verify(&self, eps: f64) -> bool {
        let n = self.data.len();
        let e = self.data.expenditure_matrix();
        (0..n).all(|t| {
            (0..n).all(|s| {
                t == s
                    || (self.gaps[t][s] - e.gap(t, s)).abs() <= 1e-6 * eps
                        && self.r[t][s] == -self.r[s][t]
                        && families_hold(
                            self.gaps[t][s],
                            self.gaps[s][t],
                            self.big_m[t],
                            self.big_m[s],
                            self.b[t][s],
                            self.r[t][s],
                            eps,
                        )
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilpResult {
    pub feasible: bool,
    pub assignment: Option<MilpAssignment>,
    /// Candidate assignments visited.
    pub nodes: u64,
}

/// The four families for the ordered pair `(t, s)`:
/// `R < B`, `B - 1 <= R`, `p^t·(x^t - x^s) < B A^t`,
/// `(B - 1) A^s <= p^s·(x^t - x^s)`.
fn families_hold(gap_ts: f64, gap_st: f64, a_t: f64, a_s: f64, b: u8, r: f64, eps: f64) -> bool {
    let b = f64::from(b);
    r > -1.0 && r < 1.0 && r <= b - eps && b - 1.0 <= r && gap_ts <= b * a_t - eps && (b - 1.0) * a_s <= -gap_st
}

/// Binary values and `R^{t,s}` for one unordered pair, if any choice works.
/// For each `(B^{t,s}, B^{s,t})` the families bound `R^{t,s}` to an interval;
/// its midpoint is used when nonempty.
fn pair_solution(gap_ts: f64, gap_st: f64, a_t: f64, a_s: f64, eps: f64) -> Option<(u8, u8, f64)> {
    for (b_ts, b_st) in [(1u8, 1u8), (1, 0), (0, 1), (0, 0)] {
        let (bt, bs) = (f64::from(b_ts), f64::from(b_st));
        let lo = (bt - 1.0).max(eps - bs).max(-1.0 + eps);
        let hi = (bt - eps).min(1.0 - bs).min(1.0 - eps);
        if lo > hi {
            continue;
        }
        let r = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { 0.5 * (lo + hi) };
        if families_hold(gap_ts, gap_st, a_t, a_s, b_ts, r, eps)
            && families_hold(gap_st, gap_ts, a_s, a_t, b_st, -r, eps)
        {
            return Some((b_ts, b_st, r));
        }
    }
    None
}

/// Observations placed so far, with prices as given and their wealth.
struct Placed {
    prices: Vec<Vec<f64>>,
    bundles: Vec<Vec<f64>>,
    wealth: Vec<f64>,
    big_m: Vec<f64>,
}

impl Placed {
    fn push(&mut self, price: Vec<f64>, bundle: Vec<f64>, big_m: f64) {
        self.wealth.push(dot(&price, &bundle));
        self.prices.push(price);
        self.bundles.push(bundle);
        self.big_m.push(big_m);
    }

    fn pop(&mut self) {
        self.prices.pop();
        self.bundles.pop();
        self.wealth.pop();
        self.big_m.pop();
    }

    /// Normalized `p^t·(x^t - x^s)`, snapped to zero within `tol` in the
    /// original units.
    fn gap(&self, t: usize, s: usize, tol: f64) -> f64 {
        let raw = self.wealth[t] - dot(&self.prices[t], &self.bundles[s]);
        if raw.abs() <= tol {
            0.0
        } else {
            raw / self.wealth[t]
        }
    }
}

/// Decides the binary system by depth-first search over slot candidates,
/// pruning as soon as an unordered pair admits no `(B, R)` choice. On fully
/// specified data (no slots) this is equivalent to WGARP.
pub fn milp_feasible(q: &CounterfactualQuery, opts: &MilpOptions) -> Result<MilpResult> {
    let goods = q.base.goods();
    for slot in &q.slots {
        if slot.candidates.is_empty() {
            return Err(Error::InvalidInput("slot without candidates".into()));
        }
        for c in &slot.candidates {
            validate_price(&c.price, goods).map_err(Error::InvalidInput)?;
            validate_bundle(&c.bundle, goods).map_err(Error::InvalidInput)?;
        }
    }
    // Every bundle that may appear, for the big-M constants.
    let all_bundles: Vec<&[f64]> = q
        .base
        .bundles()
        .iter()
        .map(Vec::as_slice)
        .chain(q.slots.iter().flat_map(|s| s.candidates.iter().map(|c| c.bundle.as_slice())))
        .collect();
    let big_m_for = |p: &[f64], x: &[f64]| {
        let w = dot(p, x);
        1.0 + all_bundles.iter().map(|b| dot(p, b) / w).fold(f64::NEG_INFINITY, f64::max) + 1.0
    };

    let n_total = q.base.len() + q.slots.len();
    let mut placed = Placed {
        prices: Vec::with_capacity(n_total),
        bundles: Vec::with_capacity(n_total),
        wealth: Vec::with_capacity(n_total),
        big_m: Vec::with_capacity(n_total),
    };
    let mut gaps = vec![vec![0.0; n_total]; n_total];
    let mut b = vec![vec![1u8; n_total]; n_total];
    let mut r = vec![vec![0.0; n_total]; n_total];

    // Tries the newest observation against all earlier ones.
    let place = |placed: &Placed, gaps: &mut Vec<Vec<f64>>, b: &mut Vec<Vec<u8>>, r: &mut Vec<Vec<f64>>| -> bool {
        let k = placed.prices.len() - 1;
        for j in 0..k {
            let (g_kj, g_jk) = (placed.gap(k, j, opts.tol), placed.gap(j, k, opts.tol));
            match pair_solution(g_kj, g_jk, placed.big_m[k], placed.big_m[j], opts.eps) {
                Some((bkj, bjk, rkj)) => {
                    gaps[k][j] = g_kj;
                    gaps[j][k] = g_jk;
                    b[k][j] = bkj;
                    b[j][k] = bjk;
                    r[k][j] = rkj;
                    r[j][k] = -rkj;
                }
                None => return false,
            }
        }
        true
    };
    let infeasible = |nodes| MilpResult {
        feasible: false,
        assignment: None,
        nodes,
    };

    let mut nodes = 0u64;
    for t in 0..q.base.len() {
        let (p, x) = (q.base.price(t), q.base.bundle(t));
        placed.push(p.to_vec(), x.to_vec(), big_m_for(p, x));
        if !place(&placed, &mut gaps, &mut b, &mut r) {
            return Ok(infeasible(nodes));
        }
    }

    // Iterative DFS: next[k] is the next candidate to try for slot k.
    let slots = &q.slots;
    let mut next = vec![0usize; slots.len()];
    let mut choices: Vec<usize> = Vec::new();
    loop {
        let depth = choices.len();
        if depth == slots.len() {
            let prices = (0..n_total)
                .map(|t| placed.prices[t].iter().map(|v| v / placed.wealth[t]).collect())
                .collect();
            let data = Dataset::new(prices, placed.bundles.clone())?;
            return Ok(MilpResult {
                feasible: true,
                assignment: Some(MilpAssignment {
                    choices,
                    data,
                    gaps,
                    big_m: placed.big_m,
                    b,
                    r,
                }),
                nodes,
            });
        }
        if next[depth] >= slots[depth].candidates.len() {
            if depth == 0 {
                return Ok(infeasible(nodes));
            }
            next[depth] = 0;
            choices.pop();
            placed.pop();
            continue;
        }
        let ci = next[depth];
        next[depth] += 1;
        nodes += 1;
        if nodes > opts.max_nodes {
            return Err(Error::SearchCap {
                nodes: nodes as u128,
                cap: opts.max_nodes as u128,
            });
        }
        let c = &slots[depth].candidates[ci];
        placed.push(c.price.clone(), c.bundle.clone(), big_m_for(&c.price, &c.bundle));
        if place(&placed, &mut gaps, &mut b, &mut r) {
            choices.push(ci);
        } else {
            placed.pop();
        }
    }
}
