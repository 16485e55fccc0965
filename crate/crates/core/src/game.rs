//! Two-player zero-sum matrix games.
//!
//! Rows belong to the minimizing player, columns to the maximizing player:
//! the value is `max_μ min_λ λᵀ M μ` over mixed strategies, which by the
//! minimax theorem equals `min_λ max_μ λᵀ M μ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSolution {
    pub value: f64,
    /// Mixed strategy of the row (minimizing) player.
    pub row_strategy: Vec<f64>,
    /// Mixed strategy of the column (maximizing) player.
    pub col_strategy: Vec<f64>,
    /// `min_s (M μ)_s`: what the column strategy guarantees.
    pub lower: f64,
    /// `max_t (λᵀ M)_t`: what the row strategy concedes at most.
    pub upper: f64,
}

impl GameSolution {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Solves the game by the two dual linear programs, one per player, each
/// maximizing its guaranteed payoff over the simplex.
pub fn solve_matrix_game(m: &[Vec<f64>]) -> Result<GameSolution> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("payoff matrix must be nonempty and rectangular".into()));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("payoff matrix has non-finite entries".into()));
    }
    let min = m.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let max = m.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if min == max {
        return Ok(GameSolution {
            value: min,
            row_strategy: vec![1.0 / rows as f64; rows],
            col_strategy: vec![1.0 / cols as f64; cols],
            lower: min,
            upper: min,
        });
    }
    // Payoffs measured from the minimum keep the value variable nonnegative.
    let shifted: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v - min).collect()).collect();

    // Column player: max w subject to (M' μ)_s >= w for every row, Σ μ = 1.
    let mut col_lp = LinearProgram::new(cols + 1);
    let mut obj = vec![0.0; cols + 1];
    obj[cols] = 1.0;
    col_lp.maximize(obj.clone());
    for r in &shifted {
        let mut row = r.clone();
        row.push(-1.0);
        col_lp.add(row, Relation::Ge, 0.0);
    }
    let mut simplex = vec![1.0; cols + 1];
    simplex[cols] = 0.0;
    col_lp.add(simplex, Relation::Eq, 1.0);
    let y = optimal_point(col_lp.solve()?, "column player")?;

    // Row player: min w subject to (λᵀ M')_t <= w for every column, Σ λ = 1.
    let mut row_lp = LinearProgram::new(rows + 1);
    let mut obj = vec![0.0; rows + 1];
    obj[rows] = 1.0;
    row_lp.minimize(obj);
    for t in 0..cols {
        let mut row: Vec<f64> = (0..rows).map(|s| shifted[s][t]).collect();
        row.push(-1.0);
        row_lp.add(row, Relation::Le, 0.0);
    }
    let mut simplex = vec![1.0; rows + 1];
    simplex[rows] = 0.0;
    row_lp.add(simplex, Relation::Eq, 1.0);
    let z = optimal_point(row_lp.solve()?, "row player")?;

    let col_strategy = normalize(y[..cols].to_vec());
    let row_strategy = normalize(z[..rows].to_vec());
    let lower = (0..rows)
        .map(|s| (0..cols).map(|t| m[s][t] * col_strategy[t]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let upper = (0..cols)
        .map(|t| (0..rows).map(|s| m[s][t] * row_strategy[s]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = 1.0 + (max - min).abs() + max.abs().max(min.abs());
    let gap = upper - lower;
    if !(gap.abs() <= 1e-7 * scale) {
        return Err(Error::Solver {
            message: format!("strategy bounds disagree: lower {lower}, upper {upper}"),
            gap,
        });
    }
    Ok(GameSolution {
        value: 0.5 * (lower + upper),
        row_strategy,
        col_strategy,
        lower,
        upper,
    })
}

fn optimal_point(outcome: LpOutcome, who: &str) -> Result<Vec<f64>> {
    match outcome {
        LpOutcome::Optimal { x, .. } if x[..x.len() - 1].iter().sum::<f64>() > 0.0 => Ok(x),
        other => Err(Error::Solver {
            message: format!("{who} program ended as {other:?}"),
            gap: f64::NAN,
        }),
    }
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry() {
        let g = solve_matrix_game(&[vec![-3.5]]).unwrap();
        assert_eq!(g.value, -3.5);
        assert_eq!(g.row_strategy, vec![1.0]);
    }

    #[test]
    fn rock_paper_scissors() {
        let m = vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ];
        let g = solve_matrix_game(&m).unwrap();
        assert!(g.value.abs() <= 1e-12);
        for p in g.row_strategy.iter().chain(&g.col_strategy) {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matching_pennies_variant() {
        // Column player mixes (1/4, 3/4): value 1.5.
        let m = vec![vec![3.0, 1.0], vec![0.0, 2.0]];
        let g = solve_matrix_game(&m).unwrap();
        assert!((g.value - 1.5).abs() < 1e-12);
        assert!((g.col_strategy[0] - 0.25).abs() < 1e-12);
        assert!((g.row_strategy[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn saddle_point() {
        let m = vec![vec![4.0, 2.0, 3.0], vec![5.0, 1.0, 0.0]];
        // Column 0 dominates for the maximizer: min(4, 5) = 4.
        let g = solve_matrix_game(&m).unwrap();
        assert!((g.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_matrix_game(&[]).is_err());
        assert!(solve_matrix_game(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(solve_matrix_game(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn degenerate_payoffs_with_repeated_entries() {
        // Built from a pairwise family; tiny pivots once produced a wrong
        // column strategy here.
        let a = 0.6077366751157695;
        let b = 0.6773542883716361;
        let c = 0.6671509814057355;
        let d = 0.760851668357275;
        let e = 0.7564717526290721;
        let f = 0.77016040525545;
        let g = 0.7690787798405467;
        let m = vec![
            vec![a, b, c, d, e],
            vec![b, f, c, f, g],
            vec![c, c, c, d, g],
            vec![d, f, d, d, g],
            vec![e, g, g, g, g],
        ];
        let s = solve_matrix_game(&m).unwrap();
        assert!(s.gap().abs() < 1e-12);
    }
}
