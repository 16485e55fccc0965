//! Random dataset generators for property suites and demonstrations.
//!
//! Every generator takes the RNG by reference, so a seeded
//! [`rand_chacha::ChaCha8Rng`] reproduces a suite exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

/// Which generator a suite draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Family {
    /// Independent uniform prices and bundles; mostly violates the axioms
    /// once `T` grows.
    Uniform,
    /// Cobb-Douglas demand with a common preference; satisfies SARP.
    CobbDouglas,
    /// Cobb-Douglas demand with each quantity scaled by a factor in
    /// `[1 - noise, 1 + noise]`.
    Perturbed { noise: f64 },
    /// Small integer prices and bundles, which produce exact ties.
    Integer { max: u32 },
    /// Linear demand `x = b - A p` with `A` symmetric positive definite plus
    /// uniform noise; with `noise = 0` the strong law of demand holds.
    Linear { noise: f64 },
    /// Each dataset picks one of the families above at random.
    Mixed,
}

/// Parameters of a random suite, as stored in the fixture configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub goods: usize,
    pub min_observations: usize,
    pub max_observations: usize,
    pub datasets: usize,
    pub seed: u64,
    pub family: Family,
    /// Target share of datasets satisfying the suite's axiom under rejection
    /// sampling; `None` keeps whatever the generator produces.
    #[serde(default)]
    pub satisfying_share: Option<f64>,
}

impl SuiteConfig {
    /// Draws the suite from ChaCha8 stream `stream` of `seed`.
    pub fn draw(&self, stream: u64, pred: impl Fn(&Dataset) -> bool) -> Vec<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        suite(
            &mut rng,
            self.family,
            self.goods,
            (self.min_observations, self.max_observations),
            self.datasets,
            self.satisfying_share,
            pred,
        )
    }
}

/// Draws a dataset with `t` observations over `l` goods.
pub fn generate(rng: &mut impl Rng, family: Family, t: usize, l: usize) -> Dataset {
    match family {
        Family::Uniform => uniform(rng, t, l),
        Family::CobbDouglas => cobb_douglas(rng, t, l, 0.0),
        Family::Perturbed { noise } => cobb_douglas(rng, t, l, noise),
        Family::Integer { max } => integer(rng, t, l, max),
        Family::Linear { noise } => linear_demand(rng, t, l, noise),
        Family::Mixed => {
            let pick = match rng.gen_range(0..6) {
                0 => Family::Uniform,
                1 => Family::CobbDouglas,
                2 => Family::Perturbed { noise: 0.1 },
                3 => Family::Perturbed { noise: 0.4 },
                4 => Family::Integer { max: 4 },
                _ => Family::Linear { noise: 0.2 },
            };
            generate(rng, pick, t, l)
        }
    }
}

fn nonzero_bundle(rng: &mut impl Rng, l: usize, hi: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..l).map(|_| rng.gen_range(0.0..hi)).collect();
        if x.iter().any(|v| *v > 1e-6) {
            return x;
        }
    }
}

fn prices(rng: &mut impl Rng, l: usize) -> Vec<f64> {
    (0..l).map(|_| rng.gen_range(0.5..2.0)).collect()
}

pub fn uniform(rng: &mut impl Rng, t: usize, l: usize) -> Dataset {
    let mut d = Dataset::empty(l).expect("l > 0");
    for _ in 0..t {
        let p = prices(rng, l);
        let x = nonzero_bundle(rng, l, 2.0);
        d.push(p, x).expect("valid draw");
    }
    d
}

pub fn cobb_douglas(rng: &mut impl Rng, t: usize, l: usize, noise: f64) -> Dataset {
    let weights: Vec<f64> = (0..l).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut d = Dataset::empty(l).expect("l > 0");
    for _ in 0..t {
        let p = prices(rng, l);
        let w = rng.gen_range(1.0..3.0);
        let x: Vec<f64> = (0..l)
            .map(|k| {
                let scale = if noise > 0.0 { rng.gen_range(1.0 - noise..1.0 + noise) } else { 1.0 };
                weights[k] / total * w / p[k] * scale.max(0.0)
            })
            .collect();
        d.push(p, x).expect("valid draw");
    }
    d
}

pub fn integer(rng: &mut impl Rng, t: usize, l: usize, max: u32) -> Dataset {
    let max = max.max(1);
    let mut d = Dataset::empty(l).expect("l > 0");
    for _ in 0..t {
        let p: Vec<f64> = (0..l).map(|_| f64::from(rng.gen_range(1..=max))).collect();
        let x = loop {
            let x: Vec<f64> = (0..l).map(|_| f64::from(rng.gen_range(0..=max))).collect();
            if x.iter().any(|v| *v > 0.0) {
                break x;
            }
        };
        d.push(p, x).expect("valid draw");
    }
    d
}

pub fn linear_demand(rng: &mut impl Rng, t: usize, l: usize, noise: f64) -> Dataset {
    // A = B Bᵀ + I/2 is symmetric positive definite.
    let b: Vec<Vec<f64>> = (0..l).map(|_| (0..l).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect();
    let a: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| (0..l).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 })
                .collect()
        })
        .collect();
    let row_norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    // Intercept large enough that demand stays positive for prices below 2.
    let intercept: Vec<f64> = (0..l).map(|_| 2.0 * row_norm + rng.gen_range(0.5..1.5)).collect();
    let mut d = Dataset::empty(l).expect("l > 0");
    for _ in 0..t {
        let p = prices(rng, l);
        let x: Vec<f64> = (0..l)
            .map(|i| {
                let v = intercept[i] - (0..l).map(|j| a[i][j] * p[j]).sum::<f64>();
                let e = if noise > 0.0 { rng.gen_range(-noise..noise) } else { 0.0 };
                (v + e).max(0.0)
            })
            .collect();
        let x = if x.iter().all(|v| *v == 0.0) { vec![1.0; l] } else { x };
        d.push(p, x).expect("valid draw");
    }
    d
}

/// Draws `count` datasets with `T` uniform in `[min_t, max_t]`. When
/// `satisfying_share` is set, datasets are rejection-sampled so that the
/// first `round(share·count)` satisfy `pred` and the rest violate it; a draw
/// budget of `200·count` bounds the search, after which the remainder is
/// filled unconditionally.
pub fn suite(
    rng: &mut impl Rng,
    family: Family,
    goods: usize,
    (min_t, max_t): (usize, usize),
    count: usize,
    satisfying_share: Option<f64>,
    pred: impl Fn(&Dataset) -> bool,
) -> Vec<Dataset> {
    let draw = |rng: &mut _| {
        let t = if max_t > min_t { Rng::gen_range(rng, min_t..=max_t) } else { min_t };
        generate(rng, family, t, goods)
    };
    let Some(share) = satisfying_share else {
        return (0..count).map(|_| draw(rng)).collect();
    };
    let want_true = (share.clamp(0.0, 1.0) * count as f64).round() as usize;
    let mut out = Vec::with_capacity(count);
    let mut budget = 200 * count.max(1);
    for i in 0..count {
        let want = i < want_true;
        loop {
            let d = draw(rng);
            if budget == 0 || pred(&d) == want {
                out.push(d);
                break;
            }
            budget -= 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{check_garp, check_sarp, check_strong_law};

    #[test]
    fn cobb_douglas_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = cobb_douglas(&mut rng, 6, 3, 0.0);
            assert!(check_sarp(&d, 1e-9).holds);
        }
    }

    #[test]
    fn linear_demand_obeys_strong_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let d = linear_demand(&mut rng, 6, 3, 0.0);
            assert!(check_strong_law(&d, 1e-9).holds);
            assert!(d.bundles().iter().flatten().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn balanced_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pred = |d: &Dataset| check_garp(d, 1e-9).holds;
        let s = suite(&mut rng, Family::Mixed, 2, (2, 6), 40, Some(0.5), pred);
        assert_eq!(s.len(), 40);
        assert_eq!(s.iter().filter(|d| pred(d)).count(), 20);
    }

    #[test]
    fn config_roundtrip() {
        let c = SuiteConfig {
            goods: 2,
            min_observations: 2,
            max_observations: 6,
            datasets: 1000,
            seed: 7,
            family: Family::Perturbed { noise: 0.3 },
            satisfying_share: Some(0.5),
        };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SuiteConfig>(&s).unwrap(), c);
    }
}
