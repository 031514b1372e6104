//! Fuzzy-coding predictor.
//!
//! Each velocity is encoded by its degree of membership in a family of
//! Gaussian fuzzy sets centered at `2.5 i - 1.25`. Memberships are normalized
//! into a probability vector θ, transitions are counted softly as the outer
//! product `θ(y_t) θ(y_{t+1})ᵀ`, and the next value is defuzzified as
//!
//! ```text
//!            Σ_i θ_i(y) Σ_j p_ij ∫ y μ_j(y) dy
//! y_next = ------------------------------------
//!            Σ_i θ_i(y) Σ_j p_ij ∫ μ_j(y) dy
//! ```
//!
//! The two integrals per set do not depend on the data, so they are computed
//! once per partition by trapezoid quadrature and cached.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;
use crate::util::fmt_sig12;

pub const CENTER_SPACING: f64 = 2.5;
pub const CENTER_OFFSET: f64 = 1.25;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_QUAD_STEP: f64 = 0.01;
/// Half-widths (in σ) by which the integration domain extends past the outer centers.
pub const DOMAIN_SIGMAS: f64 = 5.0;

/// Center of the `i`-th fuzzy set, 1-based.
pub fn standard_center(i: usize) -> f64 {
    CENTER_SPACING * i as f64 - CENTER_OFFSET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    centers: Vec<f64>,
    sigma: f64,
    domain: (f64, f64),
    quad_step: f64,
    /// Clamp out-of-domain queries to the nearest edge instead of failing.
    pub clamp: bool,
}

impl FuzzyPartition {
    /// `m` sets at the standard centers with the default domain and quadrature step.
    pub fn new(m: usize, sigma: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidConfig("a fuzzy partition needs at least one set".into()));
        }
        let centers: Vec<f64> = (1..=m).map(standard_center).collect();
        let domain = (
            centers[0] - DOMAIN_SIGMAS * sigma,
            centers[m - 1] + DOMAIN_SIGMAS * sigma,
        );
        Self::from_parts(centers, sigma, domain, DEFAULT_QUAD_STEP)
    }

    /// Smallest standard partition whose last center reaches `v_max`.
    pub fn covering(v_max: f64, sigma: f64) -> Result<Self> {
        if !v_max.is_finite() {
            return Err(Error::NonFiniteInput(v_max));
        }
        let m = ((v_max + CENTER_OFFSET) / CENTER_SPACING - 1e-9).ceil().max(2.0) as usize;
        Self::new(m, sigma)
    }

    pub fn from_parts(centers: Vec<f64>, sigma: f64, domain: (f64, f64), quad_step: f64) -> Result<Self> {
        if centers.is_empty() || centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("centers must be finite and non-empty".into()));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("centers must be strictly increasing".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {sigma}")));
        }
        if !(quad_step > 0.0 && quad_step.is_finite()) {
            return Err(Error::InvalidConfig(format!("quad_step must be positive, got {quad_step}")));
        }
        let (a, b) = domain;
        let reach = DOMAIN_SIGMAS * sigma * (1.0 - 1e-12);
        if !(a.is_finite() && b.is_finite())
            || a > centers[0] - reach
            || b < centers[centers.len() - 1] + reach
        {
            return Err(Error::InvalidConfig(format!(
                "domain [{a}, {b}] must extend {DOMAIN_SIGMAS} sigma beyond the outer centers"
            )));
        }
        Ok(Self {
            centers,
            sigma,
            domain,
            quad_step,
            clamp: false,
        })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn quad_step(&self) -> f64 {
        self.quad_step
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn with_quad_step(mut self, quad_step: f64) -> Result<Self> {
        if !(quad_step > 0.0 && quad_step.is_finite()) {
            return Err(Error::InvalidConfig(format!("quad_step must be positive, got {quad_step}")));
        }
        self.quad_step = quad_step;
        Ok(self)
    }

    /// Membership of `y` in set `j`.
    pub fn membership(&self, j: usize, y: f64) -> f64 {
        let d = y - self.centers[j];
        (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn admit(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::NonFiniteInput(y));
        }
        let (lo, hi) = self.domain;
        if (lo..=hi).contains(&y) {
            Ok(y)
        } else if self.clamp {
            Ok(y.clamp(lo, hi))
        } else {
            Err(Error::OutOfDomain { value: y, lo, hi })
        }
    }

    /// Raw membership degrees of `y` in every set. Need not sum to one.
    pub fn possibility_vector(&self, y: f64) -> Result<Vec<f64>> {
        let y = self.admit(y)?;
        Ok((0..self.len()).map(|j| self.membership(j, y)).collect())
    }

    /// Normalized membership vector θ(y).
    pub fn theta(&self, y: f64) -> Result<Vec<f64>> {
        probability_vector(&self.possibility_vector(y)?)
    }

    /// Trapezoid estimates of `∫ μ_j` and `∫ y μ_j` over the domain.
    pub fn compute_moments(&self) -> Vec<Moments> {
        let (a, b) = self.domain;
        let intervals = ((b - a) / self.quad_step).ceil().max(1.0) as usize;
        let h = (b - a) / intervals as f64;
        (0..self.len())
            .map(|j| {
                let mut s0 = 0.0;
                let mut s1 = 0.0;
                for k in 0..=intervals {
                    let y = if k == intervals { b } else { a + k as f64 * h };
                    let w = if k == 0 || k == intervals { 0.5 } else { 1.0 };
                    let mu = self.membership(j, y);
                    s0 += w * mu;
                    s1 += w * y * mu;
                }
                Moments {
                    zeroth: s0 * h,
                    first: s1 * h,
                }
            })
            .collect()
    }
}

/// Normalize a possibility vector to unit sum.
pub fn probability_vector(possibility: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = possibility.iter().sum();
    if total.is_nan() || total <= 0.0 || possibility.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::AllZeroPossibility);
    }
    Ok(possibility.iter().map(|p| p / total).collect())
}

/// Zeroth and first membership moments of one fuzzy set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub zeroth: f64,
    pub first: f64,
}

impl Moments {
    pub fn centroid(&self) -> f64 {
        self.first / self.zeroth
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyTransitionModel {
    partition: FuzzyPartition,
    /// Row-major `M x M` soft counts.
    counts: Vec<f64>,
    moments: Vec<Moments>,
}

impl FuzzyTransitionModel {
    pub fn new(partition: FuzzyPartition) -> Self {
        let m = partition.len();
        let moments = partition.compute_moments();
        Self {
            partition,
            counts: vec![0.0; m * m],
            moments,
        }
    }

    pub fn from_counts(partition: FuzzyPartition, counts: Vec<f64>) -> Result<Self> {
        let m = partition.len();
        if counts.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} fuzzy counts for {m} sets, got {}",
                m * m,
                counts.len()
            )));
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidConfig("fuzzy counts must be finite and non-negative".into()));
        }
        let mut model = Self::new(partition);
        model.counts = counts;
        Ok(model)
    }

    pub fn partition(&self) -> &FuzzyPartition {
        &self.partition
    }

    pub fn moments(&self) -> &[Moments] {
        &self.moments
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn num_sets(&self) -> usize {
        self.partition.len()
    }

    pub fn is_fitted(&self) -> bool {
        self.counts.iter().any(|&c| c > 0.0)
    }

    /// Add one soft transition: `counts_ij += θ_i(from) θ_j(to)`.
    pub fn observe(&mut self, from: f64, to: f64) -> Result<()> {
        let a = self.partition.theta(from)?;
        let b = self.partition.theta(to)?;
        self.add_outer(&a, &b);
        Ok(())
    }

    fn add_outer(&mut self, a: &[f64], b: &[f64]) {
        let m = self.num_sets();
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (c, &bj) in self.counts[i * m..(i + 1) * m].iter_mut().zip(b) {
                *c += ai * bj;
            }
        }
    }

    pub fn fit(&mut self, trajectory: &Trajectory) -> Result<()> {
        if trajectory.len() < 2 {
            return Err(Error::InsufficientData("need at least two samples to count transitions".into()));
        }
        let thetas = trajectory
            .samples
            .iter()
            .map(|&y| self.partition.theta(y))
            .collect::<Result<Vec<_>>>()?;
        for w in thetas.windows(2) {
            self.add_outer(&w[0], &w[1]);
        }
        Ok(())
    }

    fn probability_row(&self, i: usize) -> Vec<f64> {
        let m = self.num_sets();
        let row = &self.counts[i * m..(i + 1) * m];
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter().map(|c| c / total).collect()
        } else {
            vec![0.0; m]
        }
    }

    /// Row-normalized soft counts. Rows that never received mass stay zero.
    pub fn transition_matrix(&self) -> Result<Vec<Vec<f64>>> {
        if !self.is_fitted() {
            return Err(Error::UnfittedModel);
        }
        Ok((0..self.num_sets()).map(|i| self.probability_row(i)).collect())
    }

    /// Defuzzified next-step prediction.
    pub fn predict(&self, y: f64) -> Result<f64> {
        if !self.is_fitted() {
            return Err(Error::UnfittedModel);
        }
        let theta = self.partition.theta(y)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &t) in theta.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let (mut r1, mut r0) = (0.0, 0.0);
            for (p, mom) in self.probability_row(i).iter().zip(&self.moments) {
                r1 += p * mom.first;
                r0 += p * mom.zeroth;
            }
            num += t * r1;
            den += t * r0;
        }
        if den.is_nan() || den <= 0.0 {
            return Err(Error::UnfittedModel);
        }
        let (lo, hi) = self.partition.domain;
        // Rounding can push the ratio an ulp past the edge.
        Ok((num / den).clamp(lo, hi))
    }

    /// CSV export with the partition in header comments and soft counts at
    /// 12 significant digits.
    pub fn to_csv(&self) -> String {
        let p = &self.partition;
        let mut out = String::new();
        let _ = writeln!(out, "# M={}", p.len());
        let _ = writeln!(out, "# sigma={:?}", p.sigma);
        let centers: Vec<String> = p.centers.iter().map(|c| format!("{c:?}")).collect();
        let _ = writeln!(out, "# centers={}", centers.join(";"));
        let _ = writeln!(out, "# domain={:?},{:?}", p.domain.0, p.domain.1);
        let _ = writeln!(out, "# quad_step={:?}", p.quad_step);
        for row in self.counts.chunks(p.len()) {
            let cells: Vec<String> = row.iter().map(|&c| fmt_sig12(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut m = None;
        let mut sigma = None;
        let mut centers = None;
        let mut domain = None;
        let mut quad_step = None;
        let mut counts = Vec::new();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("bad number '{s}'")))
        };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Format(format!("bad header '{line}'")))?;
                match key.trim() {
                    "M" => m = Some(value.trim().parse::<usize>().map_err(|_| Error::Format("bad M".into()))?),
                    "sigma" => sigma = Some(num(value)?),
                    "centers" => centers = Some(value.split(';').map(num).collect::<Result<Vec<_>>>()?),
                    "domain" => {
                        let (a, b) = value
                            .split_once(',')
                            .ok_or_else(|| Error::Format("domain needs two values".into()))?;
                        domain = Some((num(a)?, num(b)?));
                    }
                    "quad_step" => quad_step = Some(num(value)?),
                    other => return Err(Error::Format(format!("unknown header key '{other}'"))),
                }
                continue;
            }
            for cell in line.split(',') {
                counts.push(num(cell)?);
            }
        }
        let missing = |k: &str| Error::Format(format!("missing header '{k}'"));
        let centers = centers.ok_or_else(|| missing("centers"))?;
        if m.ok_or_else(|| missing("M"))? != centers.len() {
            return Err(Error::Format("M disagrees with the number of centers".into()));
        }
        let partition = FuzzyPartition::from_parts(
            centers,
            sigma.ok_or_else(|| missing("sigma"))?,
            domain.ok_or_else(|| missing("domain"))?,
            quad_step.ok_or_else(|| missing("quad_step"))?,
        )
        .map_err(|e| Error::Format(e.to_string()))?;
        Self::from_counts(partition, counts).map_err(|e| Error::Format(e.to_string()))
    }
}
