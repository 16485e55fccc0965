//! Consumer-choice data, expenditure matrices and revealed-preference
//! relations.
//!
//! A [`Dataset`] holds `T` observations of a strictly positive price vector
//! `p^t` and a nonnegative, nonzero bundle `x^t` over `L` goods. Everything
//! else in the crate is computed from the expenditure matrix
//! `E[t][s] = p^t · x^s`: observation `t` *directly revealed prefers* `x^t`
//! to `x^s` when `x^s` was affordable at the prices and wealth of `t`.

use std::collections::VecDeque;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance, in expenditure units, used by every comparison unless
/// a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type BoolMatrix = Vec<Vec<bool>>;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A finite set of price/bundle observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    goods: usize,
    prices: Vec<Vec<f64>>,
    bundles: Vec<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset, validating dimensions, price positivity and that
    /// every bundle is nonnegative and nonzero.
    ///
    /// At least one observation is required, since the number of goods is
    /// read from the first row; use [`Dataset::empty`] for `T = 0`.
    pub fn new(prices: Vec<Vec<f64>>, bundles: Vec<Vec<f64>>) -> Result<Self> {
        let goods = prices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("dataset has no observations".into()))?;
        let mut d = Self::empty(goods)?;
        if prices.len() != bundles.len() {
            return Err(Error::InvalidInput(format!(
                "{} price vectors but {} bundles",
                prices.len(),
                bundles.len()
            )));
        }
        for (p, x) in prices.into_iter().zip(bundles) {
            d.push(p, x)?;
        }
        Ok(d)
    }

    /// A dataset over `goods` goods with no observations.
    pub fn empty(goods: usize) -> Result<Self> {
        if goods == 0 {
            return Err(Error::InvalidInput("number of goods must be positive".into()));
        }
        Ok(Self {
            goods,
            prices: Vec::new(),
            bundles: Vec::new(),
        })
    }

    /// Appends an observation after validating it.
    pub fn push(&mut self, price: Vec<f64>, bundle: Vec<f64>) -> Result<()> {
        let t = self.len();
        validate_price(&price, self.goods).map_err(|m| observation_error(t, m))?;
        validate_bundle(&bundle, self.goods).map_err(|m| observation_error(t, m))?;
        self.prices.push(price);
        self.bundles.push(bundle);
        Ok(())
    }

    /// Returns a copy of `self` extended by one observation.
    pub fn with_observation(&self, price: Vec<f64>, bundle: Vec<f64>) -> Result<Self> {
        let mut d = self.clone();
        d.push(price, bundle)?;
        Ok(d)
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Number of goods `L`.
    pub fn goods(&self) -> usize {
        self.goods
    }

    pub fn price(&self, t: usize) -> &[f64] {
        &self.prices[t]
    }

    pub fn bundle(&self, t: usize) -> &[f64] {
        &self.bundles[t]
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn bundles(&self) -> &[Vec<f64>] {
        &self.bundles
    }

    /// Walras wealth `p^t · x^t`.
    pub fn wealth(&self, t: usize) -> f64 {
        dot(&self.prices[t], &self.bundles[t])
    }

    /// `p^t · z` for an arbitrary bundle `z`.
    pub fn cost(&self, t: usize, z: &[f64]) -> f64 {
        dot(&self.prices[t], z)
    }

    /// Sub-dataset made of the listed observations, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            goods: self.goods,
            prices: indices.iter().map(|&t| self.prices[t].clone()).collect(),
            bundles: indices.iter().map(|&t| self.bundles[t].clone()).collect(),
        }
    }

    /// Rescales every price vector so that each observation spends exactly 1.
    /// Revealed-preference relations are unaffected.
    pub fn normalized(&self) -> Self {
        let prices = (0..self.len())
            .map(|t| {
                let w = self.wealth(t);
                self.prices[t].iter().map(|p| p / w).collect()
            })
            .collect();
        Self {
            goods: self.goods,
            prices,
            bundles: self.bundles.clone(),
        }
    }

    /// Whether `x^t` and `x^s` agree coordinatewise within `tol`.
    pub fn same_bundle(&self, t: usize, s: usize, tol: f64) -> bool {
        bundles_equal(&self.bundles[t], &self.bundles[s], tol)
    }

    pub fn expenditure_matrix(&self) -> ExpenditureMatrix {
        expenditure_matrix(self)
    }

    /// Parses the `p1,...,pL,x1,...,xL` CSV layout, one row per observation.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(csv_error)?.clone();
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Err(Error::Csv {
                line: 1,
                column: 1,
                message: "empty input: expected header p1,...,pL,x1,...,xL".into(),
            });
        }
        let goods = check_header(&headers)?;
        let mut d = Self::empty(goods)?;
        for record in rdr.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 * goods {
                return Err(Error::Csv {
                    line,
                    column: record.len().min(2 * goods) + 1,
                    message: format!("expected {} fields, found {}", 2 * goods, record.len()),
                });
            }
            let mut values = Vec::with_capacity(2 * goods);
            for (i, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Csv {
                    line,
                    column: i + 1,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                values.push(v);
            }
            let bundle = values.split_off(goods);
            d.push(values, bundle).map_err(|e| Error::Csv {
                line,
                column: 1,
                message: e.to_string(),
            })?;
        }
        if d.is_empty() {
            return Err(Error::Csv {
                line: 2,
                column: 1,
                message: "no observations after the header".into(),
            });
        }
        Ok(d)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| {
            Error::InvalidInput(format!("cannot open {}: {e}", path.as_ref().display()))
        })?;
        Self::from_csv_reader(file)
    }

    /// Writes the dataset back in the CSV layout accepted by
    /// [`Dataset::from_csv_reader`].
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let names: Vec<String> = (1..=self.goods)
            .map(|l| format!("p{l}"))
            .chain((1..=self.goods).map(|l| format!("x{l}")))
            .collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for t in 0..self.len() {
            let row: Vec<String> = self.prices[t]
                .iter()
                .chain(&self.bundles[t])
                .map(|v| v.to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn observation_error(t: usize, message: String) -> Error {
    Error::InvalidInput(format!("observation {t}: {message}"))
}

pub(crate) fn validate_price(p: &[f64], goods: usize) -> std::result::Result<(), String> {
    if p.len() != goods {
        return Err(format!("price has {} entries, expected {goods}", p.len()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v <= 0.0) {
        return Err(format!("price entry {v} is not strictly positive"));
    }
    Ok(())
}

pub(crate) fn validate_bundle(x: &[f64], goods: usize) -> std::result::Result<(), String> {
    if x.len() != goods {
        return Err(format!("bundle has {} entries, expected {goods}", x.len()));
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(format!("bundle entry {v} is negative or not finite"));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err("bundle is zero".into());
    }
    Ok(())
}

pub(crate) fn bundles_equal(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol)
}

fn check_header(headers: &csv::StringRecord) -> Result<usize> {
    let n = headers.len();
    if n % 2 != 0 {
        return Err(Error::Csv {
            line: 1,
            column: n,
            message: format!("header has {n} columns; expected p1..pL followed by x1..xL"),
        });
    }
    let goods = n / 2;
    for (i, name) in headers.iter().enumerate() {
        let expected = if i < goods {
            format!("p{}", i + 1)
        } else {
            format!("x{}", i - goods + 1)
        };
        if !name.eq_ignore_ascii_case(&expected) {
            return Err(Error::Csv {
                line: 1,
                column: i + 1,
                message: format!("header {name:?}; expected {expected:?}"),
            });
        }
    }
    Ok(goods)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv {
        line,
        column: 1,
        message: e.to_string(),
    }
}

/// `E[t][s] = p^t · x^s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpenditureMatrix {
    values: Vec<Vec<f64>>,
}

impl ExpenditureMatrix {
    pub fn get(&self, t: usize, s: usize) -> f64 {
        self.values[t][s]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `p^t (x^t - x^s) = E[t][t] - E[t][s]`: how much cheaper `x^s` was than
    /// the chosen bundle at observation `t`.
    pub fn gap(&self, t: usize, s: usize) -> f64 {
        self.values[t][t] - self.values[t][s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

pub fn expenditure_matrix(d: &Dataset) -> ExpenditureMatrix {
    let values = d
        .prices
        .iter()
        .map(|p| d.bundles.iter().map(|x| dot(p, x)).collect())
        .collect();
    ExpenditureMatrix { values }
}

/// Direct revealed-preference relations and, once closed, their transitive
/// closures.
///
/// `weak_direct[t][s]` encodes `x^t ⪰ x^s` (directly), `strict_direct[t][s]`
/// encodes `x^t ≻ x^s`. `strict_closure[t][s]` holds when some chain of weak
/// direct relations from `t` to `s` contains at least one strict link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationMatrices {
    pub weak_direct: BoolMatrix,
    pub strict_direct: BoolMatrix,
    pub weak_closure: Option<BoolMatrix>,
    pub strict_closure: Option<BoolMatrix>,
}

/// Direct relations with the asymmetric tolerance convention: weak when
/// `E[t][t] >= E[t][s] - tol`, strict when `E[t][t] > E[t][s] + tol`.
pub fn direct_relations(d: &Dataset, tol: f64) -> RelationMatrices {
    let e = d.expenditure_matrix();
    let n = d.len();
    let mut weak = vec![vec![false; n]; n];
    let mut strict = vec![vec![false; n]; n];
    for t in 0..n {
        for s in 0..n {
            weak[t][s] = e.get(t, t) >= e.get(t, s) - tol;
            strict[t][s] = e.get(t, t) > e.get(t, s) + tol;
        }
        // Own bundle is always affordable, even if rounding says otherwise.
        weak[t][t] = true;
        strict[t][t] = false;
    }
    RelationMatrices {
        weak_direct: weak,
        strict_direct: strict,
        weak_closure: None,
        strict_closure: None,
    }
}

/// Warshall closure over the (weak, strict) path algebra.
pub fn transitive_closure(r: &RelationMatrices) -> RelationMatrices {
    let n = r.weak_direct.len();
    // 0: unrelated, 1: weak chain, 2: chain with a strict link.
    let mut state: Vec<Vec<u8>> = (0..n)
        .map(|t| {
            (0..n)
                .map(|s| {
                    if r.strict_direct[t][s] {
                        2
                    } else if r.weak_direct[t][s] {
                        1
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            let ik = state[i][k];
            if ik == 0 {
                continue;
            }
            for j in 0..n {
                let kj = state[k][j];
                if kj != 0 {
                    let via = ik.max(kj);
                    if via > state[i][j] {
                        state[i][j] = via;
                    }
                }
            }
        }
    }
    let weak_closure: BoolMatrix = state
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, &v)| v > 0 || i == j).collect())
        .collect();
    // A strict chain may pass through a strict cycle, which Warshall's simple
    // paths miss: close it as weak* . strict . weak*.
    let mut strict_closure: BoolMatrix = state
        .iter()
        .map(|row| row.iter().map(|&v| v == 2).collect())
        .collect();
    for k in 0..n {
        for l in 0..n {
            if !r.strict_direct[k][l] {
                continue;
            }
            for i in (0..n).filter(|&i| weak_closure[i][k]) {
                for j in 0..n {
                    if weak_closure[l][j] {
                        strict_closure[i][j] = true;
                    }
                }
            }
        }
    }
    RelationMatrices {
        weak_direct: r.weak_direct.clone(),
        strict_direct: r.strict_direct.clone(),
        weak_closure: Some(weak_closure),
        strict_closure: Some(strict_closure),
    }
}

impl RelationMatrices {
    /// Direct relations followed by their closure.
    pub fn compute(d: &Dataset, tol: f64) -> Self {
        transitive_closure(&direct_relations(d, tol))
    }

    pub fn len(&self) -> usize {
        self.weak_direct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weak_direct.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.weak_closure.is_some()
    }

    /// Weak closure; panics if the closure has not been computed.
    pub fn weak_closure(&self) -> &BoolMatrix {
        self.weak_closure.as_ref().expect("relations not closed")
    }

    /// Strict closure; panics if the closure has not been computed.
    pub fn strict_closure(&self) -> &BoolMatrix {
        self.strict_closure.as_ref().expect("relations not closed")
    }

    /// Shortest chain `from = v0 ⪰ v1 ⪰ ... ⪰ vk = to` of weak direct links,
    /// found by breadth-first search with neighbours visited in index order.
    pub fn shortest_weak_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.len();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for w in 0..n {
                if !seen[w] && self.weak_direct[v][w] {
                    seen[w] = true;
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn expenditure_matrix_example1() {
        let e = fixtures::example1().expenditure_matrix();
        assert_eq!(e.get(0, 0), 22.0);
        assert_eq!(e.get(0, 1), 13.0);
        assert_eq!(e.get(0, 2), 25.0);
        assert_eq!(e.get(1, 2), 13.0);
        assert_eq!(e.get(2, 0), 13.0);
    }

    #[test]
    fn expenditure_matrix_single_observation() {
        let d = Dataset::new(vec![vec![1.0, 1.0]], vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(d.expenditure_matrix().rows(), &[vec![2.0]]);
    }

    #[test]
    fn rejects_bad_observations() {
        assert!(Dataset::new(vec![vec![1.0, 0.0]], vec![vec![1.0, 1.0]]).is_err());
        assert!(Dataset::new(vec![vec![1.0, 1.0]], vec![vec![0.0, 0.0]]).is_err());
        assert!(Dataset::new(vec![vec![1.0, 1.0]], vec![vec![1.0, -1.0]]).is_err());
        assert!(Dataset::new(vec![vec![1.0, 1.0]], vec![vec![1.0]]).is_err());
        assert!(Dataset::new(vec![vec![1.0, 1.0]], vec![]).is_err());
        assert!(Dataset::new(vec![vec![1.0, f64::NAN]], vec![vec![1.0, 1.0]]).is_err());
        assert!(Dataset::new(vec![], vec![]).is_err());
    }

    #[test]
    fn direct_relations_example1() {
        let d = fixtures::example1();
        let r = direct_relations(&d, DEFAULT_TOL);
        assert!(r.weak_direct[0][1]);
        assert!(!r.weak_direct[1][0]);
        for t in 0..3 {
            assert!(r.weak_direct[t][t]);
            assert!(!r.strict_direct[t][t]);
        }
        assert!(r.weak_closure.is_none());
    }

    #[test]
    fn appended_average_bundle_is_strictly_dominated() {
        let d = fixtures::example1()
            .with_observation(vec![3.0, 1.0, 2.0], vec![2.0, 2.0, 2.0])
            .unwrap();
        let r = direct_relations(&d, DEFAULT_TOL);
        for t in 0..3 {
            assert!(r.strict_direct[t][3]);
        }
    }

    #[test]
    fn closure_example1() {
        let r = RelationMatrices::compute(&fixtures::example1(), DEFAULT_TOL);
        assert!(r.weak_closure()[0][2]);
        assert!(r.strict_closure()[0][0]);
        assert_eq!(r.shortest_weak_path(0, 2), Some(vec![0, 1, 2]));
    }

    #[test]
    fn closure_without_edges_is_fixed_point() {
        let n = 4;
        let eye: BoolMatrix = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        let r = RelationMatrices {
            weak_direct: eye.clone(),
            strict_direct: vec![vec![false; n]; n],
            weak_closure: None,
            strict_closure: None,
        };
        let c = transitive_closure(&r);
        assert_eq!(c.weak_closure(), &eye);
        assert!(c.strict_closure().iter().flatten().all(|v| !v));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let d = fixtures::example1();
        let back = Dataset::from_csv_reader(d.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back, d);

        let err = Dataset::from_csv_reader("".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 1, .. }), "{err:?}");

        let err = Dataset::from_csv_reader("p1,p2,x1,x2\n1,2,3,abc\n".as_bytes()).unwrap_err();
        assert_eq!(
            err,
            Error::Csv {
                line: 2,
                column: 4,
                message: "cannot parse \"abc\" as a number".into()
            }
        );

        let err = Dataset::from_csv_reader("p1,q2,x1,x2\n1,2,3,4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 1, column: 2, .. }), "{err:?}");

        let err = Dataset::from_csv_reader("p1,p2,x1,x2\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn normalized_spends_one() {
        let d = fixtures::example1().normalized();
        for t in 0..d.len() {
            assert!((d.wealth(t) - 1.0).abs() < 1e-15);
        }
    }

    /// Reachability over (node, strict link seen) states, walks allowed.
    fn walk_closure(weak: &BoolMatrix, strict: &BoolMatrix) -> (BoolMatrix, BoolMatrix) {
        let n = weak.len();
        let mut w = vec![vec![false; n]; n];
        let mut st = vec![vec![false; n]; n];
        for src in 0..n {
            let mut seen = vec![[false; 2]; n];
            let mut stack = vec![(src, 0usize)];
            seen[src][0] = true;
            while let Some((u, f)) = stack.pop() {
                for v in 0..n {
                    if !weak[u][v] {
                        continue;
                    }
                    let g = f.max(usize::from(strict[u][v]));
                    if !seen[v][g] {
                        seen[v][g] = true;
                        stack.push((v, g));
                    }
                }
            }
            for v in 0..n {
                w[src][v] = seen[v][0] || seen[v][1];
                st[src][v] = seen[v][1];
            }
        }
        (w, st)
    }

    #[test]
    fn closure_matches_walks_on_all_three_node_patterns() {
        let pairs: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        for code in 0..3usize.pow(6) {
            let mut weak = vec![vec![false; 3]; 3];
            let mut strict = vec![vec![false; 3]; 3];
            for i in 0..3 {
                weak[i][i] = true;
            }
            let mut c = code;
            for &(i, j) in &pairs {
                weak[i][j] = c % 3 > 0;
                strict[i][j] = c % 3 == 2;
                c /= 3;
            }
            let r = RelationMatrices {
                weak_direct: weak.clone(),
                strict_direct: strict.clone(),
                weak_closure: None,
                strict_closure: None,
            };
            let closed = transitive_closure(&r);
            let (w, st) = walk_closure(&weak, &strict);
            assert_eq!(closed.weak_closure(), &w, "pattern {code}");
            assert_eq!(closed.strict_closure(), &st, "pattern {code}");
        }
    }
}
