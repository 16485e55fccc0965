//! Revealed-preference axioms with replayable witnesses.
//!
//! Every checker returns an [`AxiomReport`]. On failure the report carries
//! the first violating pair in lexicographic order, or for the transitive
//! axioms the shortest revealed-preference cycle found by breadth-first
//! search, together with the `slack` of the violation: how far the violated
//! inequality is past its tolerance boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{bundles_equal, Dataset, RelationMatrices};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Warp,
    Wgarp,
    Sarp,
    Garp,
    LawOfDemand,
    StrongLaw,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::Warp,
        Axiom::Wgarp,
        Axiom::Sarp,
        Axiom::Garp,
        Axiom::LawOfDemand,
        Axiom::StrongLaw,
    ];

    /// Short name as used on the command line.
    pub fn code(self) -> &'static str {
        match self {
            Axiom::Warp => "warp",
            Axiom::Wgarp => "wgarp",
            Axiom::Sarp => "sarp",
            Axiom::Garp => "garp",
            Axiom::LawOfDemand => "lod",
            Axiom::StrongLaw => "slod",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::Warp => "WARP",
            Axiom::Wgarp => "WGARP",
            Axiom::Sarp => "SARP",
            Axiom::Garp => "GARP",
            Axiom::LawOfDemand => "law of demand",
            Axiom::StrongLaw => "strong law of demand",
        };
        f.write_str(name)
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown axiom {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Pair(usize, usize),
    /// Observations `v0, v1, ..., vk`; the cycle closes with `vk -> v0`.
    Cycle(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Zero when the axiom holds.
    pub slack: f64,
}

impl AxiomReport {
    fn pass(axiom: Axiom) -> Self {
        Self {
            axiom,
            holds: true,
            witness: None,
            slack: 0.0,
        }
    }

    fn fail(axiom: Axiom, witness: Witness, slack: f64) -> Self {
        Self {
            axiom,
            holds: false,
            witness: Some(witness),
            slack,
        }
    }

    /// `Ok(())` when the axiom holds, otherwise the matching violation error.
    pub fn into_result(self) -> Result<()> {
        match self.witness {
            None => Ok(()),
            Some(Witness::Pair(t, s)) => Err(match self.axiom {
                Axiom::Warp => Error::WarpViolation { pair: (t, s) },
                Axiom::Wgarp => Error::WgarpViolation { pair: (t, s) },
                Axiom::LawOfDemand => Error::LawOfDemandViolation { pair: (t, s) },
                other => unreachable!("{other} reports cycles"),
            }),
            Some(Witness::Cycle(cycle)) => Err(match self.axiom {
                Axiom::Garp => Error::GarpViolation { cycle },
                Axiom::Sarp => Error::SarpViolation { cycle },
                Axiom::StrongLaw => Error::StrongLawViolation { cycle },
                other => unreachable!("{other} reports pairs"),
            }),
        }
    }

    /// Recomputes the violation named by the witness directly from the data
    /// and returns its slack, or `None` if the witness does not describe a
    /// violation at tolerance `tol`.
    pub fn replay(&self, d: &Dataset, tol: f64) -> Option<f64> {
        let witness = self.witness.as_ref()?;
        let e = d.expenditure_matrix();
        let weak = |t: usize, s: usize| e.gap(t, s) + tol;
        let strict = |t: usize, s: usize| e.gap(t, s) - tol;
        let slack = match (self.axiom, witness) {
            (Axiom::Warp, Witness::Pair(t, s)) => {
                if t == s || d.same_bundle(*t, *s, tol) {
                    return None;
                }
                weak(*t, *s).min(weak(*s, *t))
            }
            (Axiom::Wgarp, Witness::Pair(t, s)) => weak(*t, *s).min(strict(*s, *t)),
            (Axiom::LawOfDemand, Witness::Pair(t, s)) => lod_value(d, *t, *s) - tol,
            (Axiom::Garp | Axiom::Sarp, Witness::Cycle(c)) => {
                if c.len() < 2 {
                    return None;
                }
                let last = c[c.len() - 1];
                if self.axiom == Axiom::Sarp && d.same_bundle(c[0], last, tol) {
                    return None;
                }
                let chain = c.windows(2).map(|w| weak(w[0], w[1])).fold(f64::INFINITY, f64::min);
                let closing = if self.axiom == Axiom::Garp {
                    strict(last, c[0])
                } else {
                    weak(last, c[0])
                };
                chain.min(closing)
            }
            (Axiom::StrongLaw, Witness::Cycle(c)) => {
                strong_law_cycle_sum(d, c) - tol / 2.0 * c.len() as f64
            }
            _ => return None,
        };
        (slack > 0.0).then_some(slack)
    }
}

/// `(p^t - p^s)·(x^t - x^s)`.
pub fn lod_value(d: &Dataset, t: usize, s: usize) -> f64 {
    let (pt, ps) = (d.price(t), d.price(s));
    let (xt, xs) = (d.bundle(t), d.bundle(s));
    (0..d.goods()).map(|l| (pt[l] - ps[l]) * (xt[l] - xs[l])).sum()
}

/// `Σ_i p^{c_i}·(x^{c_i} - x^{c_{i+1}})` around the closed cycle `c`.
pub fn strong_law_cycle_sum(d: &Dataset, c: &[usize]) -> f64 {
    let e = d.expenditure_matrix();
    (0..c.len()).map(|i| e.gap(c[i], c[(i + 1) % c.len()])).sum()
}

pub fn check(d: &Dataset, axiom: Axiom, tol: f64) -> AxiomReport {
    match axiom {
        Axiom::Warp => check_warp(d, tol),
        Axiom::Wgarp => check_wgarp(d, tol),
        Axiom::Sarp => check_sarp(d, tol),
        Axiom::Garp => check_garp(d, tol),
        Axiom::LawOfDemand => check_law_of_demand(d, tol),
        Axiom::StrongLaw => check_strong_law(d, tol),
    }
}

/// All six axioms, in [`Axiom::ALL`] order.
pub fn check_all(d: &Dataset, tol: f64) -> Vec<AxiomReport> {
    Axiom::ALL.iter().map(|&a| check(d, a, tol)).collect()
}

/// No two distinct bundles are each directly weakly revealed preferred to the
/// other.
pub fn check_warp(d: &Dataset, tol: f64) -> AxiomReport {
    let r = RelationMatrices::compute(d, tol);
    match warp_pair(&r, |t, s| d.same_bundle(t, s, tol)) {
        None => AxiomReport::pass(Axiom::Warp),
        Some((t, s)) => {
            let e = d.expenditure_matrix();
            let slack = (e.gap(t, s) + tol).min(e.gap(s, t) + tol);
            AxiomReport::fail(Axiom::Warp, Witness::Pair(t, s), slack)
        }
    }
}

/// No `x^t ⪰ x^s` directly together with `x^s ≻ x^t` directly.
pub fn check_wgarp(d: &Dataset, tol: f64) -> AxiomReport {
    let r = crate::dataset::direct_relations(d, tol);
    match wgarp_pair(&r) {
        None => AxiomReport::pass(Axiom::Wgarp),
        Some((t, s)) => {
            let e = d.expenditure_matrix();
            let slack = (e.gap(t, s) + tol).min(e.gap(s, t) - tol);
            AxiomReport::fail(Axiom::Wgarp, Witness::Pair(t, s), slack)
        }
    }
}

pub fn check_sarp(d: &Dataset, tol: f64) -> AxiomReport {
    let r = RelationMatrices::compute(d, tol);
    match sarp_cycle(&r, |t, s| d.same_bundle(t, s, tol)) {
        None => AxiomReport::pass(Axiom::Sarp),
        Some(cycle) => cycle_report(d, Axiom::Sarp, cycle, tol),
    }
}

pub fn check_garp(d: &Dataset, tol: f64) -> AxiomReport {
    let r = RelationMatrices::compute(d, tol);
    match garp_cycle(&r) {
        None => AxiomReport::pass(Axiom::Garp),
        Some(cycle) => cycle_report(d, Axiom::Garp, cycle, tol),
    }
}

fn cycle_report(d: &Dataset, axiom: Axiom, cycle: Vec<usize>, tol: f64) -> AxiomReport {
    let mut report = AxiomReport::fail(axiom, Witness::Cycle(cycle), 0.0);
    report.slack = report.replay(d, tol).unwrap_or(0.0);
    report
}

/// Pairwise law of demand: `(p^t - p^s)·(x^t - x^s) <= tol` for every pair.
pub fn check_law_of_demand(d: &Dataset, tol: f64) -> AxiomReport {
    for t in 0..d.len() {
        for s in t + 1..d.len() {
            let v = lod_value(d, t, s);
            if v > tol {
                return AxiomReport::fail(Axiom::LawOfDemand, Witness::Pair(t, s), v - tol);
            }
        }
    }
    AxiomReport::pass(Axiom::LawOfDemand)
}

/// Strong law of demand: no cycle with `Σ p^i·(x^i - x^{i+1}) > 0`.
///
/// Decided by Bellman–Ford negative-cycle detection on the weights
/// `c(t -> s) = p^t·(x^s - x^t)`. Each edge carries a tolerance of `tol / 2`,
/// so a cycle of `k` observations is a violation when its sum exceeds
/// `k·tol/2`; for two observations this is exactly the pairwise law of demand
/// at tolerance `tol`.
pub fn check_strong_law(d: &Dataset, tol: f64) -> AxiomReport {
    let e = d.expenditure_matrix();
    let n = d.len();
    let weights: Vec<Vec<f64>> = (0..n)
        .map(|t| (0..n).map(|s| -e.gap(t, s) + tol / 2.0).collect())
        .collect();
    match bellman_ford(&weights) {
        Ok(_) => AxiomReport::pass(Axiom::StrongLaw),
        Err(cycle) => {
            let sum = strong_law_cycle_sum(d, &cycle);
            let slack = sum - tol / 2.0 * cycle.len() as f64;
            AxiomReport::fail(Axiom::StrongLaw, Witness::Cycle(cycle), slack)
        }
    }
}

/// Shortest-path potentials from a virtual source joined to every vertex by
/// a zero-weight edge, or a negative cycle (rotated to start at its smallest
/// vertex).
pub(crate) fn bellman_ford(w: &[Vec<f64>]) -> std::result::Result<Vec<f64>, Vec<usize>> {
    let n = w.len();
    let mut dist = vec![0.0; n];
    let mut pred = vec![usize::MAX; n];
    let mut last = None;
    for _ in 0..=n {
        last = None;
        for u in 0..n {
            for v in 0..n {
                if u != v && dist[u] + w[u][v] < dist[v] {
                    dist[v] = dist[u] + w[u][v];
                    pred[v] = u;
                    last = Some(v);
                }
            }
        }
        if last.is_none() {
            return Ok(dist);
        }
    }
    // A relaxation in round n+1 means a negative cycle reachable through pred.
    let mut v = last.expect("relaxed vertex");
    for _ in 0..n {
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut u = pred[v];
    while u != v {
        cycle.push(u);
        u = pred[u];
    }
    // pred points backwards along edges; reverse to get edge order.
    cycle.reverse();
    let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap_or(0);
    cycle.rotate_left(start);
    Err(cycle)
}

pub(crate) fn warp_pair(
    r: &RelationMatrices,
    same: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    let n = r.len();
    (0..n)
        .flat_map(|t| (t + 1..n).map(move |s| (t, s)))
        .find(|&(t, s)| r.weak_direct[t][s] && r.weak_direct[s][t] && !same(t, s))
}

pub(crate) fn wgarp_pair(r: &RelationMatrices) -> Option<(usize, usize)> {
    let n = r.len();
    (0..n)
        .flat_map(|t| (0..n).map(move |s| (t, s)))
        .find(|&(t, s)| r.weak_direct[t][s] && r.strict_direct[s][t])
}

/// Closure must be filled.
pub(crate) fn garp_cycle(r: &RelationMatrices) -> Option<Vec<usize>> {
    let n = r.len();
    let wc = r.weak_closure();
    let (t, s) = (0..n)
        .flat_map(|t| (0..n).map(move |s| (t, s)))
        .find(|&(t, s)| wc[t][s] && r.strict_direct[s][t])?;
    r.shortest_weak_path(t, s)
}

/// Closure must be filled.
pub(crate) fn sarp_cycle(
    r: &RelationMatrices,
    same: impl Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let n = r.len();
    let wc = r.weak_closure();
    let (t, s) = (0..n)
        .flat_map(|t| (0..n).map(move |s| (t, s)))
        .find(|&(t, s)| t != s && wc[t][s] && r.weak_direct[s][t] && !same(t, s))?;
    r.shortest_weak_path(t, s)
}

/// Whether the relations (closure filled) satisfy a relation-based axiom.
/// `bundles` supplies the bundle of each observation for the equality tests
/// of WARP and SARP.
pub(crate) fn relations_satisfy(
    r: &RelationMatrices,
    axiom: Axiom,
    bundles: &[&[f64]],
    tol: f64,
) -> bool {
    let same = |t: usize, s: usize| bundles_equal(bundles[t], bundles[s], tol);
    match axiom {
        Axiom::Warp => warp_pair(r, same).is_none(),
        Axiom::Wgarp => wgarp_pair(r).is_none(),
        Axiom::Sarp => sarp_cycle(r, same).is_none(),
        Axiom::Garp => garp_cycle(r).is_none(),
        Axiom::LawOfDemand | Axiom::StrongLaw => {
            panic!("{axiom} is not determined by the revealed-preference relations")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::DEFAULT_TOL as TOL;

    fn single() -> Dataset {
        Dataset::new(vec![vec![1.0, 3.0]], vec![vec![2.0, 1.0]]).unwrap()
    }

    #[test]
    fn example1_reports() {
        let d = fixtures::example1();
        assert!(check_warp(&d, TOL).holds);
        assert!(check_wgarp(&d, TOL).holds);
        let garp = check_garp(&d, TOL);
        assert!(!garp.holds);
        assert_eq!(garp.witness, Some(Witness::Cycle(vec![0, 1, 2])));
        assert!(garp.replay(&d, TOL).unwrap() > 0.0);
        assert!(!check_sarp(&d, TOL).holds);
    }

    #[test]
    fn single_observation_satisfies_everything() {
        for r in check_all(&single(), TOL) {
            assert!(r.holds, "{r:?}");
            assert!(r.witness.is_none());
        }
    }

    #[test]
    fn warp_violation_pair() {
        let d = fixtures::warp_violation_pair();
        let r = check_warp(&d, TOL);
        assert_eq!(r.witness, Some(Witness::Pair(0, 1)));
        assert!(r.replay(&d, TOL).is_some());
        assert!(check_wgarp(&d, TOL).holds);
    }

    #[test]
    fn warp_ignores_duplicates() {
        let d = Dataset::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![vec![1.0, 1.0]; 2]).unwrap();
        assert!(check_warp(&d, TOL).holds);
        assert!(check_sarp(&d, TOL).holds);
    }

    #[test]
    fn extended_example1_fails_wgarp() {
        let d = fixtures::example1()
            .with_observation(vec![1.0 / 6.0; 3], vec![2.0, 2.0, 2.0])
            .unwrap();
        let r = check_wgarp(&d, TOL);
        assert!(!r.holds);
        assert!(r.replay(&d, TOL).is_some());
    }

    #[test]
    fn law_of_demand_examples() {
        let d = fixtures::law_of_demand_pair();
        assert_eq!(lod_value(&d, 0, 1), -2.0);
        assert!(check_law_of_demand(&d, TOL).holds);
        assert!(check_strong_law(&d, TOL).holds);

        let e1 = fixtures::example1();
        assert_eq!(lod_value(&e1, 0, 1), 6.0);
        let r = check_law_of_demand(&e1, TOL);
        assert_eq!(r.witness, Some(Witness::Pair(0, 1)));
        assert_eq!(r.slack, 6.0 - TOL);
        let s = check_strong_law(&e1, TOL);
        assert!(!s.holds);
        assert!(s.replay(&e1, TOL).unwrap() > 0.0);
    }

    #[test]
    fn strong_law_finds_three_cycles() {
        // Every pair satisfies the law of demand; the 3-cycle sums to 2.
        let d = Dataset::new(
            vec![vec![1.0, 5.0, 3.0], vec![4.0, 5.0, 5.0], vec![1.0, 2.0, 3.0]],
            vec![vec![5.0, 5.0, 5.0], vec![4.0, 2.0, 2.0], vec![4.0, 5.0, 1.0]],
        )
        .unwrap();
        assert!(check_law_of_demand(&d, TOL).holds);
        let r = check_strong_law(&d, TOL);
        assert!(!r.holds);
        let Some(Witness::Cycle(c)) = &r.witness else { panic!() };
        assert_eq!(c.len(), 3);
        assert_eq!(strong_law_cycle_sum(&d, c), 2.0);
        assert!(r.replay(&d, TOL).unwrap() > 0.0);
    }

    #[test]
    fn into_result_maps_errors() {
        let d = fixtures::example1();
        assert_eq!(
            check_garp(&d, TOL).into_result(),
            Err(Error::GarpViolation { cycle: vec![0, 1, 2] })
        );
        assert!(check_wgarp(&d, TOL).into_result().is_ok());
    }

    #[test]
    fn axiom_codes_round_trip() {
        for a in Axiom::ALL {
            assert_eq!(a.code().parse::<Axiom>().unwrap(), a);
        }
        assert!("foo".parse::<Axiom>().is_err());
    }
}
