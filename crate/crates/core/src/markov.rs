//! Nearest-neighbourhood predictor over a quantized velocity grid.
//!
//! Velocities are snapped to the closest grid point, transitions between
//! grid states are counted, and the maximum-likelihood transition matrix
//! `p_ij = N_ij / N_i` drives one-step and n-step predictions. Counts are
//! kept as exact integers; probabilities are always derived on demand.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Grid spacing shared with the fuzzy partition centers.
pub const DEFAULT_SPACING: f64 = 2.5;

/// Ordered discrete velocity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    grid: Vec<f64>,
}

impl StateSpace {
    pub fn from_grid(grid: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidRange("grid needs at least two states".into()));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidRange("grid values must be finite".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRange("grid must be strictly increasing".into()));
        }
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index of the nearest grid point; equidistant values go to the lower index.
    pub fn quantize(&self, y: f64) -> Result<usize> {
        if !y.is_finite() {
            return Err(Error::NonFiniteInput(y));
        }
        let hi = self.grid.partition_point(|&x| x < y);
        if hi == 0 {
            return Ok(0);
        }
        if hi == self.grid.len() {
            return Ok(hi - 1);
        }
        let lo = hi - 1;
        if (y - self.grid[lo]).abs() <= (self.grid[hi] - y).abs() {
            Ok(lo)
        } else {
            Ok(hi)
        }
    }
}

/// Arithmetic grid `v_min, v_min + spacing, ...` whose last point is at
/// least `v_max`.
pub fn build_state_space(v_min: f64, v_max: f64, spacing: f64) -> Result<StateSpace> {
    if !(v_min.is_finite() && v_max.is_finite()) || v_max <= v_min {
        return Err(Error::InvalidRange(format!("need v_max > v_min, got [{v_min}, {v_max}]")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidRange(format!("spacing must be positive, got {spacing}")));
    }
    let intervals = ((v_max - v_min) / spacing - 1e-9).ceil().max(1.0) as usize;
    let grid = (0..=intervals).map(|k| v_min + k as f64 * spacing).collect();
    StateSpace::from_grid(grid)
}

/// Convenience wrapper: [`quantize`](StateSpace::quantize) as a free function.
pub fn quantize(y: f64, space: &StateSpace) -> Result<usize> {
    space.quantize(y)
}

/// What an unvisited row of the transition matrix turns into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    /// All zeros, so predictions from an unseen state are 0.
    #[default]
    ZeroRow,
    /// Stay in the current state.
    Hold,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    state_space: StateSpace,
    /// Row-major `M x M` transition counts.
    counts: Vec<u64>,
    pub fallback: Fallback,
}

impl TransitionModel {
    pub fn new(state_space: StateSpace, fallback: Fallback) -> Self {
        let m = state_space.len();
        Self {
            state_space,
            counts: vec![0; m * m],
            fallback,
        }
    }

    pub fn from_counts(state_space: StateSpace, counts: Vec<u64>, fallback: Fallback) -> Result<Self> {
        let m = state_space.len();
        if counts.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} counts for {m} states, got {}",
                m * m,
                counts.len()
            )));
        }
        Ok(Self {
            state_space,
            counts,
            fallback,
        })
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn num_states(&self) -> usize {
        self.state_space.len()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.num_states() + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_total(&self, i: usize) -> u64 {
        let m = self.num_states();
        self.counts[i * m..(i + 1) * m].iter().sum()
    }

    pub fn total_transitions(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Record a single observed transition between two velocities.
    pub fn observe(&mut self, from: f64, to: f64) -> Result<()> {
        let i = self.state_space.quantize(from)?;
        let j = self.state_space.quantize(to)?;
        let m = self.num_states();
        self.counts[i * m + j] += 1;
        Ok(())
    }

    /// Accumulate every consecutive transition of `trajectory` into the counts.
    pub fn fit(&mut self, trajectory: &Trajectory) -> Result<()> {
        if trajectory.len() < 2 {
            return Err(Error::InsufficientData("need at least two samples to count transitions".into()));
        }
        let states = trajectory
            .samples
            .iter()
            .map(|&y| self.state_space.quantize(y))
            .collect::<Result<Vec<_>>>()?;
        let m = self.num_states();
        for w in states.windows(2) {
            self.counts[w[0] * m + w[1]] += 1;
        }
        Ok(())
    }

    /// Probability row `i`, applying the fallback when the row is unvisited.
    pub fn probability_row(&self, i: usize) -> Vec<f64> {
        let m = self.num_states();
        let row = &self.counts[i * m..(i + 1) * m];
        let total: u64 = row.iter().sum();
        if total > 0 {
            let total = total as f64;
            return row.iter().map(|&n| n as f64 / total).collect();
        }
        match self.fallback {
            Fallback::ZeroRow => vec![0.0; m],
            Fallback::Hold => (0..m).map(|k| if k == i { 1.0 } else { 0.0 }).collect(),
            Fallback::Uniform => vec![1.0 / m as f64; m],
        }
    }

    /// Full row-major `M x M` transition matrix.
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.num_states()).map(|i| self.probability_row(i)).collect()
    }

    /// Grid value of the most probable next state (lowest index on ties).
    /// An all-zero row yields 0.
    pub fn predict_argmax(&self, current: f64) -> Result<f64> {
        let i = self.state_space.quantize(current)?;
        let row = self.probability_row(i);
        let mut best: Option<(usize, f64)> = None;
        for (k, &p) in row.iter().enumerate() {
            if p > 0.0 && best.is_none_or(|(_, bp)| p > bp) {
                best = Some((k, p));
            }
        }
        Ok(best.map_or(0.0, |(k, _)| self.state_space.grid[k]))
    }

    /// Expected next grid value, `sum_k p_ik x_k`.
    pub fn predict_expectation(&self, current: f64) -> Result<f64> {
        let i = self.state_space.quantize(current)?;
        Ok(dot(&self.probability_row(i), &self.state_space.grid))
    }

    /// Expected values `n` steps ahead using the n-step transition matrix
    /// `P^m` for `m = 1..=n`.
    pub fn predict_multistep(&self, current: f64, n: usize) -> Result<Vec<f64>> {
        if n < 1 {
            return Err(Error::InvalidHorizon(n));
        }
        let i = self.state_space.quantize(current)?;
        let matrix = self.transition_matrix();
        let m = self.num_states();
        // Row i of P^m, propagated as a row vector: dist <- dist * P.
        let mut dist = vec![0.0; m];
        dist[i] = 1.0;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut next = vec![0.0; m];
            for (a, &w) in dist.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (b, p) in matrix[a].iter().enumerate() {
                    next[b] += w * p;
                }
            }
            dist = next;
            out.push(dot(&dist, &self.state_space.grid));
        }
        Ok(out)
    }

    /// CSV export: one `# x_i=<value>` comment per state followed by the
    /// integer count matrix, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, x) in self.state_space.grid.iter().enumerate() {
            let _ = writeln!(out, "# x_{}={x:?}", i + 1);
        }
        let m = self.num_states();
        for row in self.counts.chunks(m) {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, fallback: Fallback) -> Result<Self> {
        let mut grid = Vec::new();
        let mut counts = Vec::new();
        let mut width = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (_, value) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("line {}: expected '# x_i=<value>'", idx + 1)))?;
                grid.push(
                    value
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("line {}: bad grid value", idx + 1)))?,
                );
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Format(format!("line {}: counts must be non-negative integers", idx + 1)))?;
            if *width.get_or_insert(row.len()) != row.len() {
                return Err(Error::Format(format!("line {}: ragged count row", idx + 1)));
            }
            counts.extend(row);
        }
        let space = StateSpace::from_grid(grid).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_counts(space, counts, fallback)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(grid: &[f64]) -> StateSpace {
        StateSpace::from_grid(grid.to_vec()).unwrap()
    }

    /// Model whose counts are given directly, to pin probability rows.
    fn model_with_counts(grid: &[f64], counts: &[u64]) -> TransitionModel {
        TransitionModel::from_counts(space(grid), counts.to_vec(), Fallback::ZeroRow).unwrap()
    }

    #[test]
    fn exact_grid() {
        assert_eq!(build_state_space(0.0, 7.5, 2.5).unwrap().grid(), &[0.0, 2.5, 5.0, 7.5]);
    }

    #[test]
    fn grid_rounds_up_to_cover_max() {
        assert_eq!(build_state_space(0.0, 6.0, 2.5).unwrap().grid(), &[0.0, 2.5, 5.0, 7.5]);
    }

    #[test]
    fn degenerate_range() {
        assert!(matches!(build_state_space(5.0, 5.0, 1.0), Err(Error::InvalidRange(_))));
        assert!(matches!(build_state_space(0.0, 5.0, 0.0), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn quantize_nearest_and_ties() {
        let s = space(&[0.0, 2.5, 5.0]);
        assert_eq!(s.quantize(3.6).unwrap(), 1);
        assert_eq!(s.quantize(5.0).unwrap(), 2);
        assert_eq!(s.quantize(3.75).unwrap(), 1);
        assert_eq!(s.quantize(-10.0).unwrap(), 0);
        assert_eq!(s.quantize(99.0).unwrap(), 2);
        assert!(matches!(s.quantize(f64::NAN), Err(Error::NonFiniteInput(_))));
    }

    #[test]
    fn counts_from_index_sequence() {
        // States 1,1,2,1 (1-based) on grid [0, 2.5, 5.0].
        let mut model = TransitionModel::new(space(&[0.0, 2.5, 5.0]), Fallback::ZeroRow);
        model.fit(&Trajectory::from_samples(vec![0.0, 0.0, 2.5, 0.0]).unwrap()).unwrap();
        assert_eq!(model.count(0, 0), 1);
        assert_eq!(model.count(0, 1), 1);
        assert_eq!(model.count(1, 0), 1);
        let p = model.transition_matrix();
        assert_eq!(p[0], vec![0.5, 0.5, 0.0]);
        assert_eq!(p[1], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn self_loop_only() {
        let mut model = TransitionModel::new(space(&[0.0, 2.5, 5.0]), Fallback::ZeroRow);
        model.fit(&Trajectory::from_samples(vec![5.0, 5.0, 5.0]).unwrap()).unwrap();
        assert_eq!(model.count(2, 2), 2);
        assert_eq!(model.total_transitions(), 2);
        assert_eq!(model.transition_matrix()[2][2], 1.0);
    }

    #[test]
    fn refitting_doubles_counts_keeps_probabilities() {
        let traj = Trajectory::from_samples(vec![0.0, 2.4, 5.1, 2.6, 0.1, 0.2]).unwrap();
        let mut model = TransitionModel::new(space(&[0.0, 2.5, 5.0]), Fallback::ZeroRow);
        model.fit(&traj).unwrap();
        let once = model.clone();
        model.fit(&traj).unwrap();
        for (a, b) in model.counts().iter().zip(once.counts()) {
            assert_eq!(*a, 2 * b);
        }
        assert_eq!(model.transition_matrix(), once.transition_matrix());
    }

    #[test]
    fn fit_needs_two_samples() {
        let mut model = TransitionModel::new(space(&[0.0, 2.5]), Fallback::ZeroRow);
        assert!(model.fit(&Trajectory::from_samples(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn fallback_rows() {
        let m = model_with_counts(&[0.0, 2.5, 5.0], &[1, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(m.probability_row(0), vec![0.5, 0.5, 0.0]);
        assert_eq!(m.probability_row(1), vec![0.0, 0.0, 0.0]);

        let mut hold = TransitionModel::new(space(&[0.0, 2.5, 5.0]), Fallback::Hold);
        assert_eq!(hold.probability_row(1), vec![0.0, 1.0, 0.0]);
        hold.fallback = Fallback::Uniform;
        assert_eq!(hold.probability_row(1), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn zero_row_predicts_zero() {
        let m = TransitionModel::new(space(&[0.0, 2.5, 5.0]), Fallback::ZeroRow);
        assert_eq!(m.predict_expectation(4.0).unwrap(), 0.0);
        assert_eq!(m.predict_argmax(4.0).unwrap(), 0.0);
    }

    #[test]
    fn argmax_prediction() {
        // Row 0 = [0.2, 0.7, 0.1].
        let m = model_with_counts(&[0.0, 2.5, 5.0], &[2, 7, 1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(m.predict_argmax(0.3).unwrap(), 2.5);
        let tied = model_with_counts(&[0.0, 2.5, 5.0], &[1, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(tied.predict_argmax(0.0).unwrap(), 0.0);
        let hold = TransitionModel::new(space(&[0.0, 2.5, 5.0]), Fallback::Hold);
        assert_eq!(hold.predict_argmax(5.0).unwrap(), 5.0);
    }

    #[test]
    fn expectation_prediction() {
        let m = model_with_counts(&[0.0, 2.5], &[1, 1, 0, 0]);
        assert_eq!(m.predict_expectation(0.0).unwrap(), 1.25);
        let one_hot = model_with_counts(&[0.0, 2.5, 5.0], &[0, 0, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(one_hot.predict_expectation(2.5).unwrap(), 5.0);
    }

    #[test]
    fn multistep_identity_is_absorbing() {
        let m = model_with_counts(&[0.0, 2.5, 5.0], &[1, 0, 0, 0, 1, 0, 0, 0, 1]);
        assert_eq!(m.predict_multistep(2.5, 4).unwrap(), vec![2.5; 4]);
    }

    #[test]
    fn multistep_two_cycle() {
        let m = model_with_counts(&[0.0, 2.5], &[0, 1, 1, 0]);
        assert_eq!(m.predict_multistep(0.0, 2).unwrap(), vec![2.5, 0.0]);
    }

    #[test]
    fn multistep_rejects_zero_horizon() {
        let m = model_with_counts(&[0.0, 2.5], &[0, 1, 1, 0]);
        assert_eq!(m.predict_multistep(0.0, 0), Err(Error::InvalidHorizon(0)));
    }

    #[test]
    fn multistep_first_step_is_expectation() {
        let m = model_with_counts(&[0.0, 2.5, 5.0], &[3, 1, 0, 2, 2, 1, 0, 4, 4]);
        let ms = m.predict_multistep(2.4, 3).unwrap();
        assert_eq!(ms[0], m.predict_expectation(2.4).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let m = model_with_counts(&[1.25, 3.75, 6.25], &[3, 1, 0, 2, 2, 1, 0, 4, 4]);
        let text = m.to_csv();
        assert!(text.starts_with("# x_1=1.25\n# x_2=3.75\n# x_3=6.25\n3,1,0\n"));
        assert_eq!(TransitionModel::from_csv(&text, Fallback::ZeroRow).unwrap(), m);
    }

    #[test]
    fn csv_rejects_bad_counts() {
        assert!(TransitionModel::from_csv("# x_1=0\n# x_2=1\n1,-1\n0,0\n", Fallback::ZeroRow).is_err());
        assert!(TransitionModel::from_csv("# x_1=0\n# x_2=1\n1,1\n0\n", Fallback::ZeroRow).is_err());
        assert!(TransitionModel::from_csv("# x_1=0\n# x_2=1\n1,1\n", Fallback::ZeroRow).is_err());
    }
}
