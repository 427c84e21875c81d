//! Grid search over walk type and `α`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::metrics::F1Scores;
use super::EvalError;
use crate::walker::WalkType;

pub const DEFAULT_ALPHAS: [f64; 4] = [0.125, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub walk_type: WalkType,
    pub alpha: f64,
}

impl GridPoint {
    // BFS before DFS, then smaller alpha first.
    fn preference(&self, other: &GridPoint) -> Ordering {
        self.walk_type.cmp(&other.walk_type).then(self.alpha.total_cmp(&other.alpha))
    }
}

/// Non-empty list of grid points in preference order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    points: Vec<GridPoint>,
}

impl ParamGrid {
    pub fn new(walk_types: &[WalkType], alphas: &[f64]) -> Result<Self, EvalError> {
        let mut points: Vec<GridPoint> = walk_types
            .iter()
            .flat_map(|&walk_type| alphas.iter().map(move |&alpha| GridPoint { walk_type, alpha }))
            .collect();
        if points.is_empty() {
            return Err(EvalError::EmptyGrid);
        }
        points.sort_by(GridPoint::preference);
        points.dedup();
        Ok(ParamGrid { points })
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid::new(&[WalkType::Bfs, WalkType::Dfs], &DEFAULT_ALPHAS).expect("default grid is non-empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    pub fold: usize,
    pub scores: F1Scores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub best: GridPoint,
    pub best_scores: F1Scores,
    /// Mean fold scores per grid point, in grid order.
    pub means: Vec<(GridPoint, F1Scores)>,
    pub rows: Vec<SweepRow>,
}

/// Picks the point with the highest mean Macro-F1; exact ties go to BFS,
/// then to the smaller `α`.
pub fn summarize(grid: &ParamGrid, fold_scores: &[Vec<F1Scores>]) -> SweepReport {
    assert_eq!(grid.points.len(), fold_scores.len());
    let mut rows = Vec::new();
    let mut means = Vec::with_capacity(grid.points.len());
    for (&point, scores) in grid.points.iter().zip(fold_scores) {
        rows.extend(scores.iter().enumerate().map(|(fold, &scores)| SweepRow { point, fold, scores }));
        means.push((point, F1Scores::mean(scores)));
    }
    let (best, best_scores) = means.iter().fold(means[0], |acc, &(p, s)| {
        if s.macro_f1 > acc.1.macro_f1 {
            (p, s)
        } else {
            acc
        }
    });
    SweepReport { best, best_scores, means, rows }
}

/// Evaluates every grid point in order and summarises.
pub fn sweep<E, F>(grid: &ParamGrid, mut evaluate: F) -> Result<SweepReport, E>
where
    F: FnMut(GridPoint) -> Result<Vec<F1Scores>, E>,
{
    let scores = grid.points.iter().map(|&p| evaluate(p)).collect::<Result<Vec<_>, E>>()?;
    Ok(summarize(grid, &scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn s(m: f64) -> F1Scores {
        F1Scores { macro_f1: m, micro_f1: m }
    }

    #[test]
    fn default_grid_has_eight_points() {
        let g = ParamGrid::default();
        assert_eq!(g.points().len(), 8);
        assert_eq!(g.points()[0], GridPoint { walk_type: WalkType::Bfs, alpha: 0.125 });
        assert_eq!(g.points()[7], GridPoint { walk_type: WalkType::Dfs, alpha: 1.0 });
    }

    #[test]
    fn single_point() {
        let g = ParamGrid::new(&[WalkType::Dfs], &[0.5]).unwrap();
        let r = sweep::<(), _>(&g, |_| Ok(vec![s(0.2), s(0.4)])).unwrap();
        assert_eq!(r.best, GridPoint { walk_type: WalkType::Dfs, alpha: 0.5 });
        assert_eq!(r.rows.len(), 2);
        assert!((r.best_scores.macro_f1 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn best_and_ties() {
        let g = ParamGrid::new(&[WalkType::Dfs, WalkType::Bfs], &[1.0, 0.25]).unwrap();
        let r = sweep::<(), _>(&g, |p| Ok(vec![s(if p.alpha == 1.0 { 0.7 } else { 0.5 })])).unwrap();
        assert_eq!(r.best, GridPoint { walk_type: WalkType::Bfs, alpha: 1.0 });
        let r = sweep::<(), _>(&g, |_| Ok(vec![s(0.5)])).unwrap();
        assert_eq!(r.best, GridPoint { walk_type: WalkType::Bfs, alpha: 0.25 });
        let r = sweep::<(), _>(&g, |p| Ok(vec![s(if p.walk_type == WalkType::Dfs { 0.9 } else { 0.1 })])).unwrap();
        assert_eq!(r.best, GridPoint { walk_type: WalkType::Dfs, alpha: 0.25 });
    }

    #[test]
    fn empty_grid() {
        assert_eq!(ParamGrid::new(&[], &[0.5]), Err(EvalError::EmptyGrid));
    }
}
