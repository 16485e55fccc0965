//! Supporting sets and preference-recovery bounds.
//!
//! Appending a hypothetical observation `(p, x)` to the data fixes every
//! revealed-preference relation except those from the new observation to the
//! old ones, which depend only on the sign of `p·x^t - p·x` for each `t`.
//! The supporting set `S(x)` (prices keeping the extended data consistent) is
//! therefore a finite union of polyhedral cones, one per sign pattern, and
//! every membership question reduces to enumerating patterns, checking the
//! axiom combinatorially and solving one small linear feasibility problem.
//!
//! Price cones are homogeneous, so strict sign conditions are imposed with a
//! unit margin after normalizing `p >= 1` coordinatewise; no small epsilon is
//! involved.

use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::{check, check_wgarp, relations_satisfy, Axiom};
use crate::dataset::{
    bundles_equal, direct_relations, dot, transitive_closure, validate_bundle, Dataset,
    RelationMatrices, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Sign of `p·x^t - p·x` for the new bundle `x` at candidate prices `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceSign {
    /// `p·x < p·x^t`: the old bundle was not affordable.
    NewCheaper,
    Tie,
    /// `p·x > p·x^t`: the old bundle was strictly cheaper.
    NewDearer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PricePattern {
    pub signs: Vec<PriceSign>,
}

impl PricePattern {
    fn decode(mut index: u64, n: usize) -> Self {
        let signs = (0..n)
            .map(|_| {
                let s = match index % 3 {
                    0 => PriceSign::NewCheaper,
                    1 => PriceSign::Tie,
                    _ => PriceSign::NewDearer,
                };
                index /= 3;
                s
            })
            .collect();
        Self { signs }
    }

    /// Whether `p` realizes this pattern for bundle `x`, with strict signs
    /// required to clear `tol`.
    pub fn matches(&self, d: &Dataset, p: &[f64], x: &[f64], tol: f64) -> bool {
        let px = dot(p, x);
        self.signs.iter().enumerate().all(|(t, s)| {
            let diff = dot(p, d.bundle(t)) - px;
            match s {
                PriceSign::NewCheaper => diff > tol,
                PriceSign::Tie => diff.abs() <= tol,
                PriceSign::NewDearer => diff < -tol,
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoverOptions {
    /// Axiom defining the supporting set (GARP, WGARP, SARP or WARP).
    pub axiom: Axiom,
    pub tol: f64,
    /// Largest number of sign patterns (`3^T`) that may be enumerated.
    pub max_patterns: u64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self {
            axiom: Axiom::Wgarp,
            tol: DEFAULT_TOL,
            max_patterns: 3u64.pow(12),
        }
    }
}

impl RecoverOptions {
    pub fn with_axiom(axiom: Axiom) -> Self {
        Self {
            axiom,
            ..Self::default()
        }
    }
}

/// Outcome of a supporting-set search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Support {
    pub nonempty: bool,
    pub pattern: Option<PricePattern>,
    pub price: Option<Vec<f64>>,
    /// Number of sign patterns in the enumeration.
    pub patterns: u64,
}

struct Search {
    found: Option<(PricePattern, Vec<f64>)>,
    patterns: u64,
}

/// First feasible pattern (in base-3 order) for appending `x`, optionally
/// also requiring `p·extra <= 0`.
fn search(d: &Dataset, x: &[f64], extra: Option<&[f64]>, opts: &RecoverOptions) -> Result<Search> {
    if matches!(opts.axiom, Axiom::LawOfDemand | Axiom::StrongLaw) {
        return Err(Error::InvalidInput(format!(
            "supporting sets are defined for WARP, WGARP, SARP and GARP, not the {}",
            opts.axiom
        )));
    }
    validate_bundle(x, d.goods()).map_err(Error::InvalidInput)?;
    let n = d.len();
    let patterns = 3u64
        .checked_pow(n as u32)
        .filter(|&p| p <= opts.max_patterns)
        .ok_or(Error::PatternExplosion {
            patterns: 3u128.saturating_pow(n as u32),
            cap: opts.max_patterns as u128,
        })?;
    let tol = opts.tol;
    let base = direct_relations(d, tol);
    let mut weak = vec![vec![false; n + 1]; n + 1];
    let mut strict = vec![vec![false; n + 1]; n + 1];
    for t in 0..n {
        for s in 0..n {
            weak[t][s] = base.weak_direct[t][s];
            strict[t][s] = base.strict_direct[t][s];
        }
        let (own, new) = (d.wealth(t), d.cost(t, x));
        weak[t][n] = own >= new - tol;
        strict[t][n] = own > new + tol;
    }
    weak[n][n] = true;
    let bundles: Vec<&[f64]> = d.bundles().iter().map(Vec::as_slice).chain([x]).collect();

    let found = (0..patterns).into_par_iter().find_map_first(|index| {
        let pattern = PricePattern::decode(index, n);
        let mut w = weak.clone();
        let mut s = strict.clone();
        for (t, sign) in pattern.signs.iter().enumerate() {
            w[n][t] = *sign != PriceSign::NewCheaper;
            s[n][t] = *sign == PriceSign::NewDearer;
        }
        let r = transitive_closure(&RelationMatrices {
            weak_direct: w,
            strict_direct: s,
            weak_closure: None,
            strict_closure: None,
        });
        if !relations_satisfy(&r, opts.axiom, &bundles, tol) {
            return None;
        }
        pattern_price(d, x, &pattern, extra).map(|p| (pattern, p))
    });
    Ok(Search { found, patterns })
}

/// A price with `p >= 1` realizing `pattern` with unit margins (and
/// `p·extra <= 0` if requested), if one exists.
fn pattern_price(d: &Dataset, x: &[f64], pattern: &PricePattern, extra: Option<&[f64]>) -> Option<Vec<f64>> {
    let l = d.goods();
    let mut lp = LinearProgram::new(l);
    for k in 0..l {
        let mut row = vec![0.0; l];
        row[k] = 1.0;
        lp.add(row, Relation::Ge, 1.0);
    }
    for (t, sign) in pattern.signs.iter().enumerate() {
        let v: Vec<f64> = d.bundle(t).iter().zip(x).map(|(a, b)| a - b).collect();
        match sign {
            PriceSign::NewCheaper => lp.add(v, Relation::Ge, 1.0),
            PriceSign::Tie => lp.add(v, Relation::Eq, 0.0),
            PriceSign::NewDearer => lp.add(v, Relation::Le, -1.0),
        };
    }
    if let Some(e) = extra {
        lp.add(e.to_vec(), Relation::Le, 0.0);
    }
    match lp.solve() {
        Ok(LpOutcome::Optimal { x, .. }) => Some(x),
        _ => None,
    }
}

/// Whether some strictly positive price keeps `d ∪ {(p, x)}` consistent
/// with `opts.axiom`, with a certificate price when it does.
pub fn supporting_set_nonempty(d: &Dataset, x: &[f64], opts: &RecoverOptions) -> Result<Support> {
    let s = search(d, x, None, opts)?;
    Ok(match s.found {
        Some((pattern, price)) => Support {
            nonempty: true,
            pattern: Some(pattern),
            price: Some(price),
            patterns: s.patterns,
        },
        None => Support {
            nonempty: false,
            pattern: None,
            price: None,
            patterns: s.patterns,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSet {
    /// Revealed preferred set `RP(x)`.
    Rp,
    /// Nonrevealed worse set `NRW(x)`.
    Nrw,
    /// Robust revealed preferred set `RP^W(x)`.
    RpW,
    /// Robust nonrevealed worse set `NRW^W(x)`.
    NrwW,
}

impl std::str::FromStr for BoundSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rp" => Ok(BoundSet::Rp),
            "nrw" => Ok(BoundSet::Nrw),
            "rpw" => Ok(BoundSet::RpW),
            "nrww" => Ok(BoundSet::NrwW),
            other => Err(Error::InvalidInput(format!("unknown bound set {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub s: usize,
    pub t: usize,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// A price in the supporting set satisfying the membership-deciding
    /// inequality.
    Price { pattern: PricePattern, price: Vec<f64> },
    /// No pattern admits such a price; `support_price` shows the supporting
    /// set itself is nonempty.
    Exhausted { patterns: u64, support_price: Vec<f64> },
    /// The supporting set is empty.
    EmptySupport { patterns: u64 },
    /// Pairwise outcomes behind a robust set; `anchor` is the `s` that
    /// decided the outer union (for `RP^W`) or intersection (for `NRW^W`).
    Robust { anchor: Option<usize>, pairs: Vec<PairOutcome> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundMembership {
    pub set: BoundSet,
    /// Reference bundle `x` of the set.
    pub x: Vec<f64>,
    /// Candidate `y`.
    pub y: Vec<f64>,
    pub member: bool,
    pub certificate: Certificate,
}

impl BoundMembership {
    /// Re-validates a price certificate against the data: strictly positive,
    /// consistent with its pattern, keeps the extended data consistent with
    /// `axiom`, and satisfies the deciding inequality. Other certificates
    /// replay trivially.
    pub fn replay(&self, d: &Dataset, axiom: Axiom, tol: f64) -> bool {
        let Certificate::Price { pattern, price } = &self.certificate else {
            return true;
        };
        let (bundle, other) = match self.set {
            BoundSet::Rp => (&self.y, &self.x),
            BoundSet::Nrw => (&self.x, &self.y),
            _ => return false,
        };
        let Ok(ext) = d.with_observation(price.clone(), bundle.clone()) else {
            return false;
        };
        pattern.matches(d, price, bundle, tol)
            && check(&ext, axiom, tol).holds
            && dot(price, bundle) - dot(price, other) <= tol
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

/// `y ∈ RP(x)`: the supporting set `S(y)` is nonempty and every `p ∈ S(y)`
/// has `p·y > p·x`. An empty `S(y)` excludes `y`.
pub fn in_rp(d: &Dataset, y: &[f64], x: &[f64], opts: &RecoverOptions) -> Result<BoundMembership> {
    let make = |member, certificate| BoundMembership {
        set: BoundSet::Rp,
        x: x.to_vec(),
        y: y.to_vec(),
        member,
        certificate,
    };
    let support = search(d, y, None, opts)?;
    let Some((_, support_price)) = support.found else {
        return Ok(make(false, Certificate::EmptySupport { patterns: support.patterns }));
    };
    let counter = search(d, y, Some(&diff(y, x)), opts)?;
    Ok(match counter.found {
        Some((pattern, price)) => make(false, Certificate::Price { pattern, price }),
        None => make(
            true,
            Certificate::Exhausted {
                patterns: counter.patterns,
                support_price,
            },
        ),
    })
}

/// `y ∈ NRW(x)`: some `p ∈ S(x)` has `p·y >= p·x`. When `S(x)` is empty the
/// set is everything except `x` itself.
pub fn in_nrw(d: &Dataset, y: &[f64], x: &[f64], opts: &RecoverOptions) -> Result<BoundMembership> {
    let make = |member, certificate| BoundMembership {
        set: BoundSet::Nrw,
        x: x.to_vec(),
        y: y.to_vec(),
        member,
        certificate,
    };
    let support = search(d, x, None, opts)?;
    let Some((_, support_price)) = support.found else {
        let member = !bundles_equal(x, y, opts.tol);
        return Ok(make(member, Certificate::EmptySupport { patterns: support.patterns }));
    };
    let witness = search(d, x, Some(&diff(x, y)), opts)?;
    Ok(match witness.found {
        Some((pattern, price)) => make(true, Certificate::Price { pattern, price }),
        None => make(
            false,
            Certificate::Exhausted {
                patterns: witness.patterns,
                support_price,
            },
        ),
    })
}

/// Pairwise memberships on every `O²_{st}` (a single observation when
/// `s = t`) under GARP, indexed `[s][t]`.
fn pairwise(
    d: &Dataset,
    y: &[f64],
    x: &[f64],
    tol: f64,
    f: fn(&Dataset, &[f64], &[f64], &RecoverOptions) -> Result<BoundMembership>,
) -> Result<Vec<Vec<bool>>> {
    check_wgarp(d, tol).into_result()?;
    let n = d.len();
    let opts = RecoverOptions {
        axiom: Axiom::Garp,
        tol,
        ..RecoverOptions::default()
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (s..n).map(move |t| (s, t))).collect();
    let outcomes: Vec<Result<bool>> = pairs
        .par_iter()
        .map(|&(s, t)| {
            let sub = if s == t { d.subset(&[s]) } else { d.subset(&[s, t]) };
            f(&sub, y, x, &opts).map(|m| m.member)
        })
        .collect();
    let mut table = vec![vec![false; n]; n];
    for (&(s, t), m) in pairs.iter().zip(outcomes) {
        let m = m?;
        table[s][t] = m;
        table[t][s] = m;
    }
    Ok(table)
}

fn pair_list(table: &[Vec<bool>]) -> Vec<PairOutcome> {
    let n = table.len();
    (0..n)
        .flat_map(|s| (0..n).map(move |t| (s, t)))
        .map(|(s, t)| PairOutcome {
            s,
            t,
            member: table[s][t],
        })
        .collect()
}

/// `y ∈ RP^W(x) = ∪_s ∩_t RP_{st}(x)`. Requires WGARP.
pub fn in_rp_robust(d: &Dataset, y: &[f64], x: &[f64], tol: f64) -> Result<BoundMembership> {
    let table = pairwise(d, y, x, tol, in_rp)?;
    let anchor = (0..d.len()).find(|&s| table[s].iter().all(|&m| m));
    Ok(BoundMembership {
        set: BoundSet::RpW,
        x: x.to_vec(),
        y: y.to_vec(),
        member: anchor.is_some(),
        certificate: Certificate::Robust {
            anchor,
            pairs: pair_list(&table),
        },
    })
}

/// `y ∈ NRW^W(x) = ∩_s ∪_t NRW_{st}(x)`. Requires WGARP.
pub fn in_nrw_robust(d: &Dataset, y: &[f64], x: &[f64], tol: f64) -> Result<BoundMembership> {
    let table = pairwise(d, y, x, tol, in_nrw)?;
    // The first s whose row has no member refutes the intersection.
    let anchor = (0..d.len()).find(|&s| !table[s].iter().any(|&m| m));
    Ok(BoundMembership {
        set: BoundSet::NrwW,
        x: x.to_vec(),
        y: y.to_vec(),
        member: anchor.is_none(),
        certificate: Certificate::Robust {
            anchor,
            pairs: pair_list(&table),
        },
    })
}

/// Dispatches on `set`; the robust sets ignore `opts.axiom`.
pub fn membership(
    d: &Dataset,
    set: BoundSet,
    y: &[f64],
    x: &[f64],
    opts: &RecoverOptions,
) -> Result<BoundMembership> {
    match set {
        BoundSet::Rp => in_rp(d, y, x, opts),
        BoundSet::Nrw => in_nrw(d, y, x, opts),
        BoundSet::RpW => in_rp_robust(d, y, x, opts.tol),
        BoundSet::NrwW => in_nrw_robust(d, y, x, opts.tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const X_HIGH: [f64; 3] = [2.0, 2.0, 2.0];
    const X_LOW: [f64; 3] = [1.0, 1.0, 1.0];

    #[test]
    fn example1_support_is_empty() {
        let s = supporting_set_nonempty(&fixtures::example1(), &X_HIGH, &RecoverOptions::default()).unwrap();
        assert!(!s.nonempty);
        assert_eq!(s.patterns, 27);
    }

    #[test]
    fn observed_bundle_supported_by_its_price() {
        let d = fixtures::example1();
        let s = supporting_set_nonempty(&d, d.bundle(0), &RecoverOptions::default()).unwrap();
        assert!(s.nonempty);
        let p = s.price.unwrap();
        let ext = d.with_observation(p, d.bundle(0).to_vec()).unwrap();
        assert!(check_wgarp(&ext, DEFAULT_TOL).holds);
        // The observed price itself is in the set.
        let ext = d.with_observation(d.price(0).to_vec(), d.bundle(0).to_vec()).unwrap();
        assert!(check_wgarp(&ext, DEFAULT_TOL).holds);
    }

    #[test]
    fn single_observation_always_supported() {
        let d = Dataset::new(vec![vec![1.0, 2.0]], vec![vec![3.0, 1.0]]).unwrap();
        for x in [[0.1, 0.1], [3.0, 1.0], [10.0, 0.0], [0.0, 4.0]] {
            let s = supporting_set_nonempty(&d, &x, &RecoverOptions::with_axiom(Axiom::Garp)).unwrap();
            assert!(s.nonempty, "{x:?}");
        }
    }

    #[test]
    fn example1_bounds() {
        let d = fixtures::example1();
        let opts = RecoverOptions::default();
        let rp = in_rp(&d, &X_HIGH, &X_LOW, &opts).unwrap();
        assert!(!rp.member);
        assert!(matches!(rp.certificate, Certificate::EmptySupport { .. }));
        assert!(in_nrw(&d, &X_LOW, &X_HIGH, &opts).unwrap().member);
        assert!(in_rp_robust(&d, &X_HIGH, &X_LOW, DEFAULT_TOL).unwrap().member);
        assert!(!in_nrw_robust(&d, &X_LOW, &X_HIGH, DEFAULT_TOL).unwrap().member);
    }

    #[test]
    fn no_strict_self_preference() {
        let d = fixtures::example1();
        let x = [1.0, 2.0, 3.0];
        assert!(!in_rp(&d, &x, &x, &RecoverOptions::default()).unwrap().member);
        assert!(!in_rp_robust(&d, &x, &x, DEFAULT_TOL).unwrap().member);
    }

    #[test]
    fn price_certificates_replay() {
        let d = fixtures::law_of_demand_pair();
        let opts = RecoverOptions::with_axiom(Axiom::Garp);
        let m = in_nrw(&d, &[1.5, 1.5], &[1.0, 2.0], &opts).unwrap();
        assert!(m.member);
        assert!(m.replay(&d, Axiom::Garp, DEFAULT_TOL));
        let m = in_rp(&d, &[1.5, 1.5], &[2.0, 1.0], &opts).unwrap();
        assert!(m.replay(&d, Axiom::Garp, DEFAULT_TOL));
    }

    #[test]
    fn pattern_cap() {
        let d = fixtures::example1();
        let opts = RecoverOptions {
            max_patterns: 26,
            ..RecoverOptions::default()
        };
        assert!(matches!(
            supporting_set_nonempty(&d, &X_HIGH, &opts),
            Err(Error::PatternExplosion { patterns: 27, cap: 26 })
        ));
    }

    #[test]
    fn robust_requires_wgarp() {
        let d = fixtures::example1().with_observation(vec![1.0; 3], X_HIGH.to_vec()).unwrap();
        assert!(matches!(
            in_rp_robust(&d, &X_HIGH, &X_LOW, DEFAULT_TOL),
            Err(Error::WgarpViolation { .. })
        ));
    }
}
