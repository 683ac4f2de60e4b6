//! Statistical harnesses: the normal-moment constants kappa_p, Gaussian
//! moment targets, normalized-discrepancy sampling, moment and
//! Kolmogorov-Smirnov reports, scaling tables for the L_p norm of Halton
//! segments, and L_p/L_2 ratio tables for the Hammersley families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accum::{compensated_sum, Neumaier};
use crate::discrepancy::{l2_exact, local_discrepancy, lp_mc, DiscrepancyValue};
use crate::error::{Error, Result};
use crate::pointsets::{hammersley, hammersley_sym, hammersley_sym_dot, halton, PointSet, Variant};
use crate::radix::BaseSystem;
use crate::rng::sample_point;

/// Standard normal CDF through the C99 erf (abs error well below 1e-7).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// (h-1)!! = 1 * 3 * ... * (h-1) for even h; 1 for h = 0.
fn odd_double_factorial(h: u32) -> f64 {
    debug_assert!(h % 2 == 0);
    let mut acc = 1.0;
    let mut k = 1u64;
    while k < h as u64 {
        acc *= k as f64;
        k += 2;
    }
    acc
}

/// The h-th moment of a standard normal: h!/(2^{h/2} (h/2)!) for even h,
/// 0 for odd h.
pub fn gaussian_moment(h: u32) -> f64 {
    if h % 2 == 1 {
        0.0
    } else {
        odd_double_factorial(h)
    }
}

/// kappa_p = (2 pi)^{-1/2} integral |u|^p e^{-u^2/2} du, the p-th
/// absolute moment of a standard normal.
///
/// Even integer p uses the closed form (2r)!/(2^r r!) exactly; other p
/// go through adaptive quadrature of the defining integral.
pub fn kappa(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::invalid(format!("kappa order {p} must be positive")));
    }
    if p.fract() == 0.0 && (p as u64) % 2 == 0 && p <= 300.0 {
        return Ok(gaussian_moment(p as u32));
    }
    kappa_by_quadrature(p)
}

/// The quadrature route for kappa_p, kept independent of the closed form
/// so the two can be checked against each other at even integers.
pub fn kappa_by_quadrature(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 || p > 400.0 {
        return Err(Error::invalid(format!(
            "kappa quadrature supports orders in (0, 400], got {p}"
        )));
    }
    let integrand = |u: f64| u.powf(p) * (-u * u / 2.0).exp();
    // The integrand peaks at sqrt(p); beyond the upper limit the mass is
    // below e^{-400} of the total.
    let upper = (2.0 * p.sqrt() + 40.0).ceil();
    // Coarse scale estimate over unit panels, then adaptive refinement
    // with an absolute budget derived from the requested relative error.
    let panels = upper as usize;
    let mut scale = 0.0;
    for k in 0..panels {
        scale += simpson(&integrand, k as f64, k as f64 + 1.0);
    }
    let eps = scale.abs().max(f64::MIN_POSITIVE) * 1e-12;
    let mut total = Neumaier::default();
    for k in 0..panels {
        let (a, b) = (k as f64, k as f64 + 1.0);
        total.add(adaptive_simpson(
            &integrand,
            a,
            b,
            eps / panels as f64,
            simpson(&integrand, a, b),
            52,
        ));
    }
    Ok((2.0 / std::f64::consts::PI).sqrt() * total.total())
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
}

fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    eps: f64,
    whole: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let left = simpson(f, a, c);
    let right = simpson(f, c, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, c, eps / 2.0, left, depth - 1)
            + adaptive_simpson(f, c, b, eps / 2.0, right, depth - 1)
    }
}

/// Provenance of a CLT sample run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleProvenance {
    pub variant: Variant,
    pub bases: Vec<u64>,
    /// Variant count parameter N.
    pub count: u64,
    /// Number of Monte-Carlo evaluation points M.
    pub samples: u64,
    pub seed: u64,
}

/// Normalized local-discrepancy samples Y_j = D(x_j) / ||D||_2 with the
/// exact raw L2 norm used for the normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    /// Raw ||D||_2 from the exact pairwise engine.
    pub norm_raw: f64,
    pub provenance: SampleProvenance,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// Central moment of the given order about the sample mean.
    pub fn central_moment(&self, order: u32) -> f64 {
        let mean = self.mean();
        compensated_sum(self.values.iter().map(|&v| (v - mean).powi(order as i32)))
            / self.values.len() as f64
    }

    pub fn skewness(&self) -> f64 {
        self.central_moment(3) / self.central_moment(2).powf(1.5)
    }

    /// Raw kurtosis m4 / m2^2 (3 for a normal).
    pub fn kurtosis(&self) -> f64 {
        self.central_moment(4) / self.central_moment(2).powi(2)
    }
}

/// Builds the variant's point set once, takes its exact raw L2 norm, and
/// evaluates Y_j = D(x_j)/||D||_2 at M uniform points x_j in (0,1]^{s+1}
/// drawn from the substreams (seed, j).
pub fn clt_samples(
    variant: Variant,
    system: &BaseSystem,
    count: u64,
    samples: u64,
    seed: u64,
) -> Result<SampleSet> {
    let points = build_variant(variant, system, count)?;
    clt_samples_for_points(&points, variant, system, count, samples, seed)
}

fn build_variant(variant: Variant, system: &BaseSystem, count: u64) -> Result<PointSet> {
    match variant {
        Variant::Hammersley => hammersley(system, count),
        Variant::HammersleySym => hammersley_sym(system, count),
        Variant::HammersleySymDot => hammersley_sym_dot(system, count),
        other => Err(Error::invalid(format!(
            "CLT sampling needs a Hammersley family, got {other}"
        ))),
    }
}

fn clt_samples_for_points(
    points: &PointSet,
    variant: Variant,
    system: &BaseSystem,
    count: u64,
    samples: u64,
    seed: u64,
) -> Result<SampleSet> {
    if samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let norm_raw = l2_exact(points)?.raw;
    if norm_raw == 0.0 {
        return Err(Error::invalid("degenerate point set: zero L2 norm"));
    }
    let dim = points.dim();
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let x = sample_point(seed, j, dim);
            local_discrepancy(points, &x).map(|d| d / norm_raw)
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet {
        values,
        norm_raw,
        provenance: SampleProvenance {
            variant,
            bases: system.bases().to_vec(),
            count,
            samples,
            seed,
        },
    })
}

/// One moment comparison row: the empirical h-th moment of the samples
/// against the Gaussian target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentRow {
    pub order: u32,
    pub empirical: f64,
    pub target: f64,
    /// |empirical - target|.
    pub deviation: f64,
    /// Jackknife standard error of the empirical moment (equal to the
    /// classic s/sqrt(M) for a plain mean statistic).
    pub stderr: f64,
}

/// Moment table plus the summary shape statistics used by the CLT
/// acceptance checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Empirical moments (1/M) Sum Y^h for h = 1..=h_max against
/// [`gaussian_moment`] targets.
pub fn moment_report(samples: &SampleSet, h_max: u32) -> Result<MomentReport> {
    if h_max < 2 {
        return Err(Error::invalid("moment report needs h_max >= 2"));
    }
    if samples.len() < 2 {
        return Err(Error::invalid("moment report needs at least 2 samples"));
    }
    let m = samples.len() as f64;
    let rows = (1..=h_max)
        .map(|h| {
            let powers: Vec<f64> = samples
                .values
                .iter()
                .map(|&v| v.powi(h as i32))
                .collect();
            let empirical = compensated_sum(powers.iter().copied()) / m;
            // Leave-one-out jackknife of the mean statistic reduces to
            // sqrt(sum (v - mean)^2 / (M (M-1))).
            let ss = compensated_sum(powers.iter().map(|&v| (v - empirical) * (v - empirical)));
            let stderr = (ss / (m * (m - 1.0))).sqrt();
            let target = gaussian_moment(h);
            MomentRow {
                order: h,
                empirical,
                target,
                deviation: (empirical - target).abs(),
                stderr,
            }
        })
        .collect();
    Ok(MomentReport {
        rows,
        mean: samples.mean(),
        variance: samples.central_moment(2),
        skewness: samples.skewness(),
        kurtosis: samples.kurtosis(),
    })
}

/// Kolmogorov-Smirnov statistic sup_t |F_hat(t) - Phi(t)| of the samples
/// against the standard normal CDF.
pub fn ks_normal(samples: &SampleSet) -> Result<f64> {
    ks_statistic_normal(&samples.values)
}

pub fn ks_statistic_normal(values: &[f64]) -> Result<f64> {
    if values.len() < 10 {
        return Err(Error::invalid("KS statistic needs at least 10 samples"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        let cdf = normal_cdf(v);
        sup = sup.max(cdf - i as f64 / m);
        sup = sup.max((i + 1) as f64 / m - cdf);
    }
    Ok(sup)
}

/// One row of the Theorem-1-style scaling table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    /// Segment length N.
    pub count: u64,
    /// Truncation depth floor(log2 N) + 1.
    pub depth: u32,
    /// Raw ||D||_p of the segment.
    pub raw: f64,
    /// Raw norm divided by N.
    pub normalized: f64,
    /// The bounded statistic raw / (ln N)^{s/2}.
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
}

/// Monte-Carlo parameters for the norms that have no exact engine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McParams {
    pub samples: u64,
    pub seed: u64,
}

/// Raw L_p norms of the Halton segments (H(k))_{k=Q}^{Q+N-1} for each N,
/// with the normalized statistic raw/(ln N)^{s/2} (natural log).
///
/// p = 2 uses the exact pairwise engine, falling back to Monte-Carlo when
/// the pair budget is exceeded and parameters are provided; other p
/// require Monte-Carlo parameters.
pub fn scaling_table(
    system: &BaseSystem,
    p: f64,
    counts: &[u64],
    start: i64,
    mc: Option<McParams>,
) -> Result<Vec<ScalingRow>> {
    let s = system.dim() as f64;
    counts
        .iter()
        .map(|&count| {
            if count < 2 {
                return Err(Error::invalid("scaling rows need N >= 2"));
            }
            let points = halton(system, start, count)?;
            let value: DiscrepancyValue = if p == 2.0 {
                match l2_exact(&points) {
                    Ok(v) => v,
                    Err(Error::BudgetExceeded(_)) if mc.is_some() => {
                        let mc = mc.unwrap();
                        lp_mc(&points, p, mc.samples, mc.seed)?
                    }
                    Err(e) => return Err(e),
                }
            } else {
                let mc = mc.ok_or_else(|| {
                    Error::invalid("non-exact order needs Monte-Carlo parameters")
                })?;
                lp_mc(&points, p, mc.samples, mc.seed)?
            };
            let log_n = (count as f64).ln();
            Ok(ScalingRow {
                count,
                depth: count.ilog2() + 1,
                raw: value.raw,
                normalized: value.normalized,
                statistic: value.raw / log_n.powf(s / 2.0),
                stderr: value.stderr,
            })
        })
        .collect()
}

/// One row of the Theorem-3-style ratio table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRow {
    pub count: u64,
    pub p: f64,
    /// Estimated D_{s+1,p} / D_{s+1,2} (the normalization divides out).
    pub ratio: f64,
    /// kappa_p^{1/p}.
    pub target: f64,
    /// ratio - target.
    pub deviation: f64,
    /// Delta-method standard error of the ratio from the Monte-Carlo
    /// numerator (the denominator is exact).
    pub stderr: f64,
}

/// Ratios of the Monte-Carlo L_p norm to the exact L2 norm of the
/// variant's point set, against the limit kappa_p^{1/p}. The numerator
/// reuses the same sample stream (seed, j) as [`clt_samples`].
pub fn ratio_table(
    variant: Variant,
    system: &BaseSystem,
    p: f64,
    counts: &[u64],
    samples: u64,
    seed: u64,
) -> Result<Vec<RatioRow>> {
    let target = kappa(p)?.powf(1.0 / p);
    counts
        .iter()
        .map(|&count| {
            let points = build_variant(variant, system, count)?;
            let denominator = l2_exact(&points)?.raw;
            if denominator == 0.0 {
                return Err(Error::invalid("degenerate point set: zero L2 norm"));
            }
            let numerator = lp_mc(&points, p, samples, seed)?;
            let ratio = numerator.raw / denominator;
            Ok(RatioRow {
                count,
                p,
                ratio,
                target,
                deviation: ratio - target,
                stderr: numerator.stderr.unwrap_or(0.0) / denominator,
            })
        })
        .collect()
}
