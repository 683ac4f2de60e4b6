//! Local discrepancy and the three norm engines: exact L2 (pairwise
//! Warnock expansion), Monte-Carlo L_p, and exact L_infinity over the
//! critical coordinate grid.
//!
//! Box membership is strict `<` per coordinate (anchored half-open
//! boxes); a coordinate exactly equal to the box corner lies outside.
//! Comparisons are bit-exact, no epsilon. All engines are pure given
//! (points, parameters, seed) and their parallel reductions are
//! order-fixed, so results do not depend on thread count.

use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::accum::{compensated_sum, Neumaier};
use crate::error::{Error, Result};
use crate::pointsets::PointSet;
use crate::radix::truncate_fraction;
use crate::rng::sample_point;

/// Default cap on the point count of the O(N^2) exact-L2 engine.
pub const DEFAULT_PAIR_BUDGET: usize = 1 << 17;

/// Default cap on the candidate-grid size of the exact-L_infinity engine.
pub const DEFAULT_GRID_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// The norm order p, with infinity as its own case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormOrder {
    P(f64),
    Infinity,
}

impl Serialize for NormOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormOrder::P(p) => serializer.serialize_f64(*p),
            NormOrder::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormOrder {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct OrderVisitor;

        impl Visitor<'_> for OrderVisitor {
            type Value = NormOrder;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a positive number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<NormOrder, E> {
                Ok(NormOrder::P(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NormOrder, E> {
                Ok(NormOrder::P(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NormOrder, E> {
                match v {
                    "inf" | "infinity" => Ok(NormOrder::Infinity),
                    other => other
                        .parse::<f64>()
                        .map(NormOrder::P)
                        .map_err(|_| E::custom(format!("bad norm order '{other}'"))),
                }
            }
        }

        deserializer.deserialize_any(OrderVisitor)
    }
}

/// A computed discrepancy norm: both the raw norm ||D|| and the
/// count-normalized ||D|| / card(P) are reported, so callers pick the
/// convention (the /N convention is ambiguous for the symmetrized sets,
/// whose cardinality differs from their parameter N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyValue {
    pub raw: f64,
    pub normalized: f64,
    pub order: NormOrder,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
}

impl DiscrepancyValue {
    fn new(raw: f64, cardinality: usize, order: NormOrder, method: Method) -> Self {
        let normalized = if cardinality > 0 {
            raw / cardinality as f64
        } else {
            0.0
        };
        DiscrepancyValue {
            raw,
            normalized,
            order,
            method,
            stderr: None,
        }
    }
}

fn check_dim(points: &PointSet, x: &[f64]) -> Result<()> {
    if x.len() != points.dim() {
        return Err(Error::invalid(format!(
            "evaluation point has dimension {}, point set has {}",
            x.len(),
            points.dim()
        )));
    }
    Ok(())
}

/// Count of points strictly inside [0, x) minus card(P) times the box
/// volume; membership is strict `<` in every coordinate.
pub fn local_discrepancy(points: &PointSet, x: &[f64]) -> Result<f64> {
    check_dim(points, x)?;
    for &xi in x {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::invalid(format!("coordinate {xi} outside (0,1]")));
        }
    }
    Ok(local_discrepancy_unchecked(points, x))
}

/// As [`local_discrepancy`] but accepting corners with zero coordinates
/// (which arise from truncation); the box is then empty and both the
/// count and the volume vanish.
fn local_discrepancy_unchecked(points: &PointSet, x: &[f64]) -> f64 {
    let mut count = 0usize;
    'points: for point in points.iter() {
        for (c, xi) in point.iter().zip(x) {
            if !(c < xi) {
                continue 'points;
            }
        }
        count += 1;
    }
    let volume: f64 = x.iter().product();
    count as f64 - points.len() as f64 * volume
}

/// The truncation depth n = floor(log2 N) + 1 used throughout the block
/// decomposition.
pub fn default_truncation_depth(count: u64) -> u32 {
    debug_assert!(count >= 1);
    count.ilog2() + 1
}

/// Local discrepancy at the coordinatewise truncation [x]_n, each
/// coordinate truncated to `depth` digits in its own base.
///
/// The point set must be Halton-like (one base per coordinate, carried in
/// its provenance). At depth floor(log2 N) + 1 the result differs from
/// `local_discrepancy(points, x)` by at most the dimension s.
pub fn truncated_local_discrepancy(points: &PointSet, x: &[f64], depth: u32) -> Result<f64> {
    if depth == 0 {
        return Err(Error::invalid("truncation depth must be >= 1"));
    }
    check_dim(points, x)?;
    let bases = &points.provenance().bases;
    if bases.len() != points.dim() {
        return Err(Error::invalid(
            "truncated discrepancy needs one base per coordinate (Halton-like set)",
        ));
    }
    for &xi in x {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::invalid(format!("coordinate {xi} outside (0,1]")));
        }
    }
    let truncated: Vec<f64> = x
        .iter()
        .zip(bases)
        .map(|(&xi, &p)| truncate_fraction(xi, p, depth))
        .collect();
    Ok(local_discrepancy_unchecked(points, &truncated))
}

/// Exact L2 norm of the local discrepancy by the pairwise (Warnock)
/// expansion:
///
/// ||D||_2^2 = sum_{k,l} prod_i (1 - max(b_ki, b_li))
///           - 2 M sum_k prod_i (1 - b_ki^2)/2 + M^2 3^-d.
pub fn l2_exact(points: &PointSet) -> Result<DiscrepancyValue> {
    l2_exact_with_budget(points, DEFAULT_PAIR_BUDGET)
}

pub fn l2_exact_with_budget(points: &PointSet, pair_budget: usize) -> Result<DiscrepancyValue> {
    let m = points.len();
    if m > pair_budget {
        return Err(Error::budget(format!(
            "{m} points exceed the exact-L2 pair budget {pair_budget}"
        )));
    }
    if m == 0 {
        return Ok(DiscrepancyValue::new(
            0.0,
            0,
            NormOrder::P(2.0),
            Method::Exact,
        ));
    }
    let dim = points.dim();

    // Row sums of the pair kernel, k <= l, in fixed row order.
    let row_sums: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k| {
            let pk = points.point(k);
            let mut row = Neumaier::default();
            let mut diagonal = 1.0;
            for &c in pk {
                diagonal *= 1.0 - c;
            }
            row.add(diagonal);
            for l in k + 1..m {
                let pl = points.point(l);
                let mut prod = 1.0;
                for i in 0..dim {
                    prod *= 1.0 - pk[i].max(pl[i]);
                }
                row.add(2.0 * prod);
            }
            row.total()
        })
        .collect();
    let pair_term = compensated_sum(row_sums);

    let mid_term = compensated_sum(points.iter().map(|point| {
        let mut prod = 1.0;
        for &c in point {
            prod *= (1.0 - c * c) / 2.0;
        }
        prod
    }));

    let m_f = m as f64;
    let square = pair_term - 2.0 * m_f * mid_term + m_f * m_f * 3f64.powi(-(dim as i32));
    let raw = square.max(0.0).sqrt();
    Ok(DiscrepancyValue::new(
        raw,
        m,
        NormOrder::P(2.0),
        Method::Exact,
    ))
}

/// Monte-Carlo estimate of the raw L_p norm: the p-th root of the mean of
/// |D(U_j)|^p over `samples` uniform points U_j in (0,1]^d.
///
/// The returned stderr is the delta-method propagation of the standard
/// error of the p-th-power mean through the 1/p root; it is approximate.
/// Deterministic given the seed: sample j always comes from the
/// counter-based substream (seed, j).
pub fn lp_mc(points: &PointSet, p: f64, samples: u64, seed: u64) -> Result<DiscrepancyValue> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::invalid(format!(
            "norm order {p} must be in (0, inf)"
        )));
    }
    if samples < 2 {
        return Err(Error::invalid("monte-carlo needs at least 2 samples"));
    }
    let dim = points.dim();
    let powers: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let x = sample_point(seed, j, dim);
            local_discrepancy_unchecked(points, &x).abs().powf(p)
        })
        .collect();
    let m = samples as f64;
    let mean = compensated_sum(powers.iter().copied()) / m;
    let variance = compensated_sum(powers.iter().map(|v| (v - mean) * (v - mean))) / (m - 1.0);
    let se_mean = (variance / m).sqrt();
    let raw = mean.powf(1.0 / p);
    let stderr = if mean > 0.0 {
        se_mean * raw / (p * mean)
    } else {
        0.0
    };
    let mut value = DiscrepancyValue::new(raw, points.len(), NormOrder::P(p), Method::MonteCarlo);
    value.stderr = Some(stderr);
    Ok(value)
}

/// Exact L_infinity (star) discrepancy over the critical grid
/// Gamma = prod_i ({coordinates of P in dim i} union {1}).
///
/// At every grid corner both one-sided limits of D are inspected: the
/// open-box count (strict <) for the limit from below and the closed-box
/// count (<=) for the limit from above.
pub fn linf_exact(points: &PointSet) -> Result<DiscrepancyValue> {
    linf_exact_with_budget(points, DEFAULT_GRID_BUDGET)
}

pub fn linf_exact_with_budget(points: &PointSet, grid_budget: u64) -> Result<DiscrepancyValue> {
    let m = points.len();
    let dim = points.dim();
    if m == 0 {
        return Ok(DiscrepancyValue::new(
            0.0,
            0,
            NormOrder::Infinity,
            Method::Exact,
        ));
    }

    // Per-dimension candidate grids: the sorted distinct coordinates plus 1.
    let grids: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut g: Vec<f64> = points.iter().map(|point| point[i]).collect();
            g.push(1.0);
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            g.dedup();
            g
        })
        .collect();

    let candidates: u128 = grids.iter().map(|g| g.len() as u128).product();
    if candidates > grid_budget as u128 {
        return Err(Error::budget(format!(
            "{candidates} grid candidates exceed the L_inf budget {grid_budget}"
        )));
    }

    // Grid index of every point coordinate (each coordinate is in its grid).
    let index_of = |i: usize, c: f64| grids[i].partition_point(|&g| g < c);
    let point_indices: Vec<Vec<usize>> = points
        .iter()
        .map(|point| (0..dim).map(|i| index_of(i, point[i])).collect())
        .collect();

    // Prefix dims are swept by an odometer; the last dim is handled by
    // bucketing point counts over its grid and prefix-summing, which
    // turns the per-corner count into O(1).
    let last = dim - 1;
    let prefix_sizes: Vec<usize> = grids[..last].iter().map(|g| g.len()).collect();
    let prefix_total: usize = prefix_sizes.iter().product::<usize>().max(1);
    let m_f = m as f64;

    let sup = (0..prefix_total)
        .into_par_iter()
        .map(|flat| {
            let mut prefix = vec![0usize; last];
            let mut rest = flat;
            for (slot, &size) in prefix.iter_mut().zip(&prefix_sizes) {
                *slot = rest % size;
                rest /= size;
            }
            let mut open_hist = vec![0u32; grids[last].len()];
            let mut closed_hist = vec![0u32; grids[last].len()];
            'points: for idx in &point_indices {
                let mut strictly_inside = true;
                for i in 0..last {
                    if idx[i] > prefix[i] {
                        continue 'points; // outside even the closed box
                    }
                    if idx[i] == prefix[i] {
                        strictly_inside = false;
                    }
                }
                closed_hist[idx[last]] += 1;
                if strictly_inside {
                    open_hist[idx[last]] += 1;
                }
            }
            let prefix_volume: f64 = prefix
                .iter()
                .enumerate()
                .map(|(i, &g)| grids[i][g])
                .product();
            let mut best = 0.0f64;
            let mut open_below = 0u32; // strict count: points with idx < g
            let mut closed_upto = 0u32; // closed count: points with idx <= g
            for (g, &y) in grids[last].iter().enumerate() {
                closed_upto += closed_hist[g];
                let volume = prefix_volume * y;
                best = best.max(closed_upto as f64 - m_f * volume);
                best = best.max(m_f * volume - open_below as f64);
                open_below += open_hist[g];
            }
            best
        })
        .reduce(|| 0.0, f64::max);

    Ok(DiscrepancyValue::new(
        sup,
        m,
        NormOrder::Infinity,
        Method::Exact,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::{halton, hammersley, PointSet, Provenance, Variant};
    use crate::radix::BaseSystem;

    fn loose(dim: usize, data: Vec<f64>) -> PointSet {
        PointSet::from_parts(
            dim,
            data,
            Provenance {
                variant: Variant::Halton,
                bases: vec![],
                start: 0,
                count: 0,
                permutation: None,
                seed: None,
            },
        )
        .unwrap()
    }

    fn sys(bases: &[u64]) -> BaseSystem {
        BaseSystem::new(bases.to_vec()).unwrap()
    }

    #[test]
    fn local_discrepancy_examples() {
        let origin = loose(2, vec![0.0, 0.0]);
        assert_eq!(local_discrepancy(&origin, &[0.5, 0.5]).unwrap(), 0.75);

        // Full box: count equals cardinality, volume is 1.
        let ps = halton(&sys(&[2, 3]), 0, 9).unwrap();
        assert_eq!(local_discrepancy(&ps, &[1.0, 1.0]).unwrap(), 0.0);

        let two = halton(&sys(&[2, 3]), 0, 2).unwrap();
        let d = local_discrepancy(&two, &[0.6, 0.4]).unwrap();
        assert!((d - (2.0 - 2.0 * 0.6 * 0.4)).abs() < 1e-12);
    }

    #[test]
    fn local_discrepancy_validates_input() {
        let ps = halton(&sys(&[2, 3]), 0, 4).unwrap();
        assert!(local_discrepancy(&ps, &[0.5]).is_err());
        assert!(local_discrepancy(&ps, &[0.0, 0.5]).is_err());
        assert!(local_discrepancy(&ps, &[0.5, 1.1]).is_err());
    }

    #[test]
    fn membership_is_strict() {
        let ps = loose(1, vec![0.5]);
        // The point at exactly the corner is outside.
        assert_eq!(local_discrepancy(&ps, &[0.5]).unwrap(), -0.5);
        let above = f64::from_bits(0.5f64.to_bits() + 1);
        assert_eq!(local_discrepancy(&ps, &[above]).unwrap(), 1.0 - above);
    }

    #[test]
    fn truncated_matches_exact_on_truncated_corners() {
        let ps = halton(&sys(&[2, 3]), 0, 32).unwrap();
        // x already on the depth-n grid: truncation is the identity.
        let x = [0.375, 2.0 / 3.0 + 1.0 / 27.0];
        let n = default_truncation_depth(32);
        let a = truncated_local_discrepancy(&ps, &x, n).unwrap();
        let b = local_discrepancy(&ps, &x).unwrap();
        assert_eq!(a, b);
        assert!(truncated_local_discrepancy(&ps, &x, 0).is_err());
    }

    #[test]
    fn truncation_error_is_bounded_by_dimension() {
        let sys2 = sys(&[2, 3]);
        let mut worst = 0.0f64;
        for exp in 5..=9u32 {
            let n_points = 1u64 << exp;
            let ps = halton(&sys2, 0, n_points).unwrap();
            let depth = default_truncation_depth(n_points);
            for j in 0..40 {
                let x = crate::rng::sample_point(1000 + exp as u64, j, 2);
                let exact = local_discrepancy(&ps, &x).unwrap();
                let truncated = truncated_local_discrepancy(&ps, &x, depth).unwrap();
                worst = worst.max((exact - truncated).abs());
            }
        }
        assert!(worst <= 2.0, "truncation error {worst} exceeds s = 2");
    }

    #[test]
    fn l2_exact_examples() {
        // Single point at 0 in dim 1: integral of (1-x)^2 is 1/3.
        let ps = loose(1, vec![0.0]);
        let v = l2_exact(&ps).unwrap();
        assert!((v.raw - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(v.normalized, v.raw);

        let empty = loose(1, vec![]);
        assert_eq!(l2_exact(&empty).unwrap().raw, 0.0);

        // {0, 0.5} in dim 1: hand expansion gives 1/3 again.
        let two = loose(1, vec![0.0, 0.5]);
        let v2 = l2_exact(&two).unwrap();
        assert!((v2.raw * v2.raw - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn l2_budget_guard() {
        let ps = halton(&sys(&[2]), 0, 16).unwrap();
        assert!(matches!(
            l2_exact_with_budget(&ps, 8),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn lp_mc_agrees_with_l2_exact() {
        let ps = hammersley(&sys(&[2, 3]), 128).unwrap();
        let exact = l2_exact(&ps).unwrap();
        let mc = lp_mc(&ps, 2.0, 40_000, 11).unwrap();
        let se = mc.stderr.unwrap();
        assert!(
            (mc.raw - exact.raw).abs() <= 3.0 * se,
            "mc {} vs exact {} (se {se})",
            mc.raw,
            exact.raw
        );
    }

    #[test]
    fn lp_mc_matches_analytic_l1_for_origin_point() {
        // P = {0} in dim 1: D(x) = 1 - x, so the L1 norm is 1/2.
        let ps = loose(1, vec![0.0]);
        let mc = lp_mc(&ps, 1.0, 50_000, 3).unwrap();
        assert!((mc.raw - 0.5).abs() <= 3.0 * mc.stderr.unwrap());
    }

    #[test]
    fn lp_mc_is_deterministic() {
        let ps = halton(&sys(&[2, 3]), 0, 64).unwrap();
        let a = lp_mc(&ps, 1.5, 5_000, 7).unwrap();
        let b = lp_mc(&ps, 1.5, 5_000, 7).unwrap();
        assert_eq!(a.raw.to_bits(), b.raw.to_bits());
        assert_eq!(a.stderr.unwrap().to_bits(), b.stderr.unwrap().to_bits());
        assert!(lp_mc(&ps, 0.0, 100, 7).is_err());
        assert!(lp_mc(&ps, f64::INFINITY, 100, 7).is_err());
    }

    #[test]
    fn linf_exact_examples() {
        // {0} in dim 1: approaching 0 from above counts the point with
        // vanishing volume, so sup |D| = 1.
        let ps = loose(1, vec![0.0]);
        assert_eq!(linf_exact(&ps).unwrap().raw, 1.0);

        let half = loose(1, vec![0.5]);
        assert_eq!(linf_exact(&half).unwrap().raw, 0.5);

        let empty = loose(1, vec![]);
        assert_eq!(linf_exact(&empty).unwrap().raw, 0.0);
    }

    #[test]
    fn linf_matches_dense_scan_oracle() {
        let ps = halton(&sys(&[2, 3]), 0, 16).unwrap();
        let exact = linf_exact(&ps).unwrap().raw;
        // Dense two-sided scan: a lower bound that approaches the sup.
        let mut scanned = 0.0f64;
        let grid = 160;
        for a in 1..=grid {
            for b in 1..=grid {
                let x = [a as f64 / grid as f64, b as f64 / grid as f64];
                let open = local_discrepancy(&ps, &x).unwrap();
                scanned = scanned.max(open.abs());
                // Closed-side value at the same corner.
                let mut closed = 0.0;
                for point in ps.iter() {
                    if point[0] <= x[0] && point[1] <= x[1] {
                        closed += 1.0;
                    }
                }
                scanned = scanned.max((closed - 16.0 * x[0] * x[1]).abs());
            }
        }
        assert!(exact >= scanned - 1e-12);
        // Between scan corners the volume term moves by at most N*d/grid.
        let continuity = 16.0 * 2.0 / grid as f64;
        assert!(
            exact <= scanned + continuity,
            "exact {exact} vs scan {scanned}"
        );
    }

    #[test]
    fn linf_budget_guard() {
        let ps = halton(&sys(&[2, 3]), 0, 100).unwrap();
        assert!(matches!(
            linf_exact_with_budget(&ps, 50),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn norms_are_monotone_in_p() {
        let ps = hammersley(&sys(&[2]), 64).unwrap();
        let l1 = lp_mc(&ps, 1.0, 30_000, 5).unwrap();
        let l2 = lp_mc(&ps, 2.0, 30_000, 5).unwrap();
        let linf = linf_exact(&ps).unwrap();
        let slack = 3.0 * (l1.stderr.unwrap() + l2.stderr.unwrap());
        assert!(l1.raw <= l2.raw + slack);
        assert!(l2.raw <= linf.raw + slack);
    }

    #[test]
    fn norm_order_serializes_infinity_as_string() {
        let inf = serde_json::to_string(&NormOrder::Infinity).unwrap();
        assert_eq!(inf, "\"inf\"");
        let p: NormOrder = serde_json::from_str("2.0").unwrap();
        assert_eq!(p, NormOrder::P(2.0));
        let back: NormOrder = serde_json::from_str(&inf).unwrap();
        assert_eq!(back, NormOrder::Infinity);
    }
}
