//! Log-log least-squares fits over degree histograms.
//!
//! Fits use raw counts. Normalizing to fractions only shifts the intercept.

use crate::graph::DegreeDistribution;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Negated slope of log10(count) against log10(degree).
    pub exponent_k: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Inclusive degree interval spanned by the points actually used.
    pub fit_range: (usize, usize),
    pub points: usize,
    /// Sum of squared residuals in log10 space.
    pub residual: f64,
}

impl PowerLawFit {
    /// Fitted count at `degree`.
    pub fn predict(&self, degree: usize) -> f64 {
        10f64.powf(self.intercept - self.exponent_k * (degree as f64).log10())
    }
}

/// Fit over every nonzero bin with degree ≥ `min_degree`.
pub fn fit_power_law(dist: &DegreeDistribution, min_degree: usize) -> Result<PowerLawFit, AnalysisError> {
    fit_power_law_range(dist, min_degree, usize::MAX)
}

/// Fit over nonzero bins with `min_degree ≤ degree ≤ max_degree`. Degree 0 is
/// never used.
pub fn fit_power_law_range(
    dist: &DegreeDistribution,
    min_degree: usize,
    max_degree: usize,
) -> Result<PowerLawFit, AnalysisError> {
    let points: Vec<(usize, f64, f64)> = dist
        .iter()
        .filter(|&(d, c)| d >= min_degree.max(1) && d <= max_degree && c > 0)
        .map(|(d, c)| (d, (d as f64).log10(), (c as f64).log10()))
        .collect();
    if points.len() < 2 {
        return Err(AnalysisError::InsufficientPoints { needed: 2, found: points.len() });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.2).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.1 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.1 - mean_x) * (p.2 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.2 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual: f64 = points.iter().map(|p| (p.2 - (intercept + slope * p.1)).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - residual / syy).clamp(0.0, 1.0) };
    Ok(PowerLawFit {
        exponent_k: -slope,
        intercept,
        r_squared,
        fit_range: (points[0].0, points[points.len() - 1].0),
        points: points.len(),
        residual,
    })
}

/// Largest degree `d ≥ from` such that every degree in `from..=d` has a
/// nonzero count. Useful as the upper end of a fit window on sampled
/// histograms, whose sparse tails are dominated by count-1 bins.
pub fn contiguous_upper_degree(dist: &DegreeDistribution, from: usize) -> Option<usize> {
    if dist.count(from) == 0 {
        return None;
    }
    let mut d = from;
    while dist.count(d + 1) > 0 {
        d += 1;
    }
    Some(d)
}

pub const DEFAULT_KNEE_CANDIDATES: std::ops::RangeInclusive<usize> = 5..=20;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiModalFit {
    pub knee: usize,
    /// Mean count over the head degrees `[1, knee)`.
    pub head_level: f64,
    pub tail: PowerLawFit,
    /// max/min count ratio over the head.
    pub head_flatness: f64,
    /// Combined log-space residual at the chosen knee.
    pub residual: f64,
    /// Set when the smallest candidate won, i.e. no flat head is
    /// distinguishable and the histogram looks like a plain power law.
    pub degenerate_head: bool,
    /// Residual for every candidate that could be evaluated, ascending by knee.
    pub candidates: Vec<(usize, f64)>,
}

/// Choose the knee minimizing the combined residual of a constant head
/// (in log space) and a power-law tail. Ties go to the smaller knee.
pub fn fit_multimodal(
    dist: &DegreeDistribution,
    knee_candidates: impl IntoIterator<Item = usize>,
) -> Result<MultiModalFit, AnalysisError> {
    if dist.is_empty() {
        return Err(AnalysisError::EmptyHistogram);
    }
    let mut knees: Vec<usize> = knee_candidates.into_iter().filter(|&k| k >= 2).collect();
    knees.sort_unstable();
    knees.dedup();
    let smallest = *knees.first().ok_or(AnalysisError::NoValidKnee)?;

    let mut best: Option<MultiModalFit> = None;
    let mut evaluated = Vec::new();
    for knee in knees {
        let head: Vec<f64> = dist.iter().filter(|&(d, c)| d >= 1 && d < knee && c > 0).map(|(_, c)| c as f64).collect();
        if head.is_empty() {
            continue;
        }
        let Ok(tail) = fit_power_law(dist, knee) else { continue };
        let logs: Vec<f64> = head.iter().map(|c| c.log10()).collect();
        let mean_log = logs.iter().sum::<f64>() / logs.len() as f64;
        let head_residual: f64 = logs.iter().map(|l| (l - mean_log).powi(2)).sum();
        let residual = head_residual + tail.residual;
        evaluated.push((knee, residual));
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            let max = head.iter().copied().fold(f64::MIN, f64::max);
            let min = head.iter().copied().fold(f64::MAX, f64::min);
            best = Some(MultiModalFit {
                knee,
                head_level: head.iter().sum::<f64>() / head.len() as f64,
                tail,
                head_flatness: max / min,
                residual,
                degenerate_head: knee == smallest,
                candidates: Vec::new(),
            });
        }
    }
    let mut fit = best.ok_or(AnalysisError::NoValidKnee)?;
    fit.candidates = evaluated;
    Ok(fit)
}
