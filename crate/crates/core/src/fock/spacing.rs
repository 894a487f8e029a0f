//! Level-spacing statistics: unfolding, histograms and Kolmogorov-Smirnov
//! distances to the Poisson and Wigner surmise distributions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};

use super::spectrum::SpectrumResult;
use crate::error::{ensure, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingMode {
    /// Splittings inside each multiplet, unfolded by that multiplet's mean.
    IntraMultiplet,
    /// The whole sorted spectrum, unfolded by a polynomial staircase fit.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingOptions {
    pub mode: SpacingMode,
    pub staircase_degree: usize,
    pub bins: usize,
    pub histogram_max: f64,
    /// Multiplets smaller than this are skipped in intra mode.
    pub min_multiplet: usize,
}

impl SpacingOptions {
    pub fn new(mode: SpacingMode) -> Self {
        Self { mode, staircase_degree: 7, bins: 40, histogram_max: 4.0, min_multiplet: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins on `[0, max]`; samples past `max` land in the last bin.
    pub fn of(samples: &[f64], bins: usize, max: f64) -> Self {
        let bins = bins.max(1);
        let width = max / bins as f64;
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &s in samples {
            let b = ((s / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Self { edges, counts }
    }

    /// Counts normalized to a probability density.
    pub fn density(&self) -> Vec<f64> {
        let total: usize = self.counts.iter().sum();
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| if total == 0 { 0.0 } else { c as f64 / (total as f64 * (w[1] - w[0])) })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingStats {
    /// Mean 1, all non-negative.
    pub unfolded_spacings: Vec<f64>,
    pub histogram: Histogram,
    pub ks_poisson: f64,
    pub ks_wigner: f64,
    /// Labels of multiplets too small to contribute (intra mode).
    pub skipped: Vec<i64>,
    /// Spacings that came out negative from the staircase fit and were set to 0.
    pub clamped: usize,
}

impl SpacingStats {
    pub fn prefers_wigner(&self) -> bool {
        self.ks_wigner < self.ks_poisson
    }
}

pub fn poisson_cdf(s: f64) -> f64 {
    1.0 - (-s).exp()
}

pub fn wigner_cdf(s: f64) -> f64 {
    1.0 - (-std::f64::consts::PI * s * s / 4.0).exp()
}

pub fn poisson_density(s: f64) -> f64 {
    (-s).exp()
}

pub fn wigner_density(s: f64) -> f64 {
    let pi = std::f64::consts::PI;
    pi * s / 2.0 * (-pi * s * s / 4.0).exp()
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Summary statistics of spacings that are already unfolded.
pub fn summarize(unfolded: Vec<f64>, bins: usize, histogram_max: f64) -> SpacingStats {
    SpacingStats {
        histogram: Histogram::of(&unfolded, bins, histogram_max),
        ks_poisson: ks_distance(&unfolded, poisson_cdf),
        ks_wigner: ks_distance(&unfolded, wigner_cdf),
        unfolded_spacings: unfolded,
        skipped: vec![],
        clamped: 0,
    }
}

pub fn spacing_statistics<T: Real>(spectrum: &SpectrumResult<T>, opts: &SpacingOptions) -> Result<SpacingStats> {
    match opts.mode {
        SpacingMode::IntraMultiplet => {
            let mut pooled = Vec::new();
            let mut skipped = Vec::new();
            for (&label, gaps) in &spectrum.intra_splittings {
                if gaps.len() + 1 < opts.min_multiplet {
                    log::warn!("multiplet {label} has {} states, skipped", gaps.len() + 1);
                    skipped.push(label);
                    continue;
                }
                let mut g: Vec<f64> = gaps.iter().map(|v| v.as_f64().max(0.0)).collect();
                g.sort_by(f64::total_cmp);
                let mean = g.iter().sum::<f64>() / g.len() as f64;
                if mean <= 0.0 {
                    log::warn!("multiplet {label} is exactly degenerate, skipped");
                    skipped.push(label);
                    continue;
                }
                pooled.extend(g.iter().map(|v| v / mean));
            }
            ensure(!pooled.is_empty(), || "no multiplet contributed spacings".into())?;
            let mut stats = summarize(pooled, opts.bins, opts.histogram_max);
            stats.skipped = skipped;
            Ok(stats)
        }
        SpacingMode::Global => {
            let levels: Vec<f64> = spectrum.eigenvalues.iter().map(|v| v.as_f64()).collect();
            let (unfolded, clamped) = unfold_global(&levels, opts.staircase_degree)?;
            let mut stats = summarize(unfolded, opts.bins, opts.histogram_max);
            stats.clamped = clamped;
            Ok(stats)
        }
    }
}

/// Unfolds sorted `levels` through a least-squares Chebyshev fit of the
/// counting staircase. Returns spacings rescaled to mean 1 and the number of
/// negative spacings clamped to zero.
pub fn unfold_global(levels: &[f64], degree: usize) -> Result<(Vec<f64>, usize)> {
    let n = levels.len();
    ensure(n > degree + 2, || format!("{n} levels cannot support a degree-{degree} staircase"))?;
    ensure(levels.windows(2).all(|w| w[0] <= w[1]), || "levels must be sorted".into())?;
    let (lo, hi) = (levels[0], levels[n - 1]);
    ensure(hi > lo, || "levels are all equal".into())?;
    // Map onto [-1, 1] so the basis stays well conditioned.
    let z: Vec<f64> = levels.iter().map(|&e| (2.0 * e - lo - hi) / (hi - lo)).collect();
    let design: Vec<Vec<f64>> = z.iter().map(|&t| chebyshev_row(t, degree)).collect();
    let staircase: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let coef = least_squares(&design, &staircase)?;
    let smooth: Vec<f64> = design.iter().map(|row| row.iter().zip(&coef).map(|(a, c)| a * c).sum()).collect();

    let mut clamped = 0;
    let mut spacings: Vec<f64> = smooth
        .windows(2)
        .map(|w| {
            let s = w[1] - w[0];
            if s < 0.0 {
                clamped += 1;
                0.0
            } else {
                s
            }
        })
        .collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    ensure(mean > 0.0, || "staircase fit is nowhere increasing".into())?;
    spacings.iter_mut().for_each(|s| *s /= mean);
    Ok((spacings, clamped))
}

fn chebyshev_row(t: f64, degree: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(degree + 1);
    row.push(1.0);
    if degree >= 1 {
        row.push(t);
    }
    for k in 2..=degree {
        row.push(2.0 * t * row[k - 1] - row[k - 2]);
    }
    row
}

/// Householder QR least squares for a tall, full-rank design matrix.
fn least_squares(design: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = design.len();
    let n = design[0].len();
    let mut a: Vec<Vec<f64>> = design.to_vec();
    let mut b = rhs.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        ensure(norm > 0.0, || "rank-deficient staircase design".into())?;
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = 2.0 * dot / vv;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * b[i]).sum();
        let f = 2.0 * dot / vv;
        for i in k..m {
            b[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let tail: f64 = ((k + 1)..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - tail) / a[k][k];
    }
    Ok(x)
}

/// Levels with i.i.d. unit-mean exponential spacings.
pub fn synthetic_poisson_levels(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = 0.0;
    (0..count)
        .map(|_| {
            let level = e;
            let step: f64 = Exp1.sample(&mut rng);
            e += step;
            level
        })
        .collect()
}

/// Levels whose spacings are drawn from 2x2 GOE matrices, rescaled to unit
/// mean, so their distribution is exactly the Wigner surmise.
pub fn synthetic_goe_levels(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag = Normal::new(0.0, 1.0).expect("valid normal");
    let off = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let raw: Vec<f64> = (1..count.max(1))
        .map(|_| {
            let a = diag.sample(&mut rng);
            let c = diag.sample(&mut rng);
            let b = off.sample(&mut rng);
            ((a - c) * (a - c) + 4.0 * b * b).sqrt()
        })
        .collect();
    // mean of the surmise for this normalization is sqrt(pi)
    let scale = std::f64::consts::PI.sqrt();
    let mut e = 0.0;
    let mut out = Vec::with_capacity(count);
    out.push(0.0);
    for s in raw {
        e += s / scale;
        out.push(e);
    }
    out.truncate(count);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_of(levels: &[f64]) -> SpacingStats {
        let (s, _) = unfold_global(levels, 7).unwrap();
        summarize(s, 40, 4.0)
    }

    #[test]
    fn poisson_sample_classified() {
        let st = stats_of(&synthetic_poisson_levels(10_000, 11));
        assert!(st.ks_poisson < 0.02, "{}", st.ks_poisson);
        assert!(st.ks_wigner > 0.2, "{}", st.ks_wigner);
    }

    #[test]
    fn goe_sample_classified() {
        let st = stats_of(&synthetic_goe_levels(10_000, 11));
        assert!(st.ks_wigner < 0.05, "{}", st.ks_wigner);
        assert!(st.ks_poisson > 0.2, "{}", st.ks_poisson);
    }

    #[test]
    fn unfolded_mean_is_one() {
        let (s, clamped) = unfold_global(&synthetic_poisson_levels(2000, 3), 7).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12);
        assert!(s.iter().all(|&v| v >= 0.0));
        assert_eq!(clamped, 0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let q: Vec<f64> = (0..n).map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln()).collect();
        assert!(ks_distance(&q, poisson_cdf) <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let z: Vec<f64> = (0..50).map(|i| -1.0 + 2.0 * i as f64 / 49.0).collect();
        let design: Vec<Vec<f64>> = z.iter().map(|&t| chebyshev_row(t, 3)).collect();
        let y: Vec<f64> = z.iter().map(|&t| 1.0 - 2.0 * t + 0.5 * t * t * t).collect();
        let c = least_squares(&design, &y).unwrap();
        // t^3 = (T3 + 3 T1) / 4
        let expect = [1.0, -2.0 + 0.375, 0.0, 0.125];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn histogram_counts_everything() {
        let h = Histogram::of(&[0.0, 0.5, 3.99, 10.0], 4, 4.0);
        assert_eq!(h.counts, vec![2, 0, 0, 2]);
        assert_eq!(h.edges.len(), 5);
    }

    #[test]
    fn synthetic_generators_are_seeded() {
        assert_eq!(synthetic_goe_levels(100, 1), synthetic_goe_levels(100, 1));
        assert_ne!(synthetic_poisson_levels(100, 1), synthetic_poisson_levels(100, 2));
        assert_eq!(synthetic_goe_levels(100, 1).len(), 100);
    }
}
