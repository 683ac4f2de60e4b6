//! Exponential-sum apparatus for the truncated discrepancy of a Halton
//! segment: the delta_M Fourier identity, the per-block closed-form
//! Fourier series with its phi/psi factors, the integer-exact residue-
//! counting evaluation of the same block, and the reconstruction of the
//! truncated local discrepancy as a sum of blocks.
//!
//! `block_direct` is ground truth: it counts Halton indices per residue
//! class in plain integer arithmetic. `block_fourier` must reproduce it
//! through complex exponentials; the seeded [`self_check`] battery
//! measures the worst disagreement.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accum::Neumaier;
use crate::discrepancy::{default_truncation_depth, truncated_local_discrepancy};
use crate::error::{Error, Result};
use crate::pointsets::halton;
use crate::radix::{
    crt_weights, default_depth, fraction_digit, localize, localize_with_digits, radical_inverse,
    BaseSystem, MultiRadix,
};
use crate::rng::substream;

/// Default cap on the frequency count |I*_{P_r}| of one Fourier block.
pub const DEFAULT_FREQUENCY_BUDGET: u64 = 100_000;

/// Default cap on the number of blocks n^s of a reconstruction.
pub const DEFAULT_BLOCK_BUDGET: u64 = 1_000_000;

/// e(x) = exp(2 pi i x), with x reduced mod 1 before scaling so large
/// arguments lose no precision to the trig range reduction.
pub fn unit_circle(x: f64) -> Complex64 {
    let t = std::f64::consts::TAU * (x - x.round());
    Complex64::new(t.cos(), t.sin())
}

/// Distance from alpha to the nearest integer: min({a}, 1 - {a}).
pub fn nearest_int_distance(alpha: f64) -> f64 {
    let frac = alpha.rem_euclid(1.0);
    frac.min(1.0 - frac)
}

/// The symmetric residue interval I_M = [-floor((M-1)/2), floor(M/2)],
/// a complete residue system mod M; the starred version excludes 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    modulus: u64,
    star: bool,
}

impl IndexRange {
    pub fn full(modulus: u64) -> Self {
        debug_assert!(modulus >= 1);
        Self {
            modulus,
            star: false,
        }
    }

    pub fn star(modulus: u64) -> Self {
        debug_assert!(modulus >= 1);
        Self {
            modulus,
            star: true,
        }
    }

    pub fn lo(&self) -> i64 {
        -(((self.modulus - 1) / 2) as i64)
    }

    pub fn hi(&self) -> i64 {
        (self.modulus / 2) as i64
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        let star = self.star;
        (self.lo()..=self.hi()).filter(move |&m| !(star && m == 0))
    }
}

/// delta_M(a) as its Fourier average (1/M) Sum_{k in I_M} e(ak/M):
/// 1 when M | a, else 0 up to rounding.
pub fn delta_fourier(a: i64, modulus: u64) -> Complex64 {
    let m = modulus as i128;
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for k in IndexRange::full(modulus).iter() {
        // exact residue of a*k mod M keeps the exponential argument small
        let arg = (a as i128 * k as i128).rem_euclid(m) as f64 / modulus as f64;
        let z = unit_circle(arg);
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.total(), im.total()) / modulus as f64
}

/// The data of one discrepancy block: a Halton window [Q, Q+N), a depth
/// vector r (through its CRT data), and the evaluation point x.
#[derive(Debug, Clone)]
pub struct FourierBlock {
    start: i64,
    count: u64,
    mr: MultiRadix,
    x: Vec<f64>,
}

impl FourierBlock {
    /// Requires every depth r_i >= 1 and x inside [0,1]^s.
    pub fn new(start: i64, count: u64, mr: MultiRadix, x: Vec<f64>) -> Result<Self> {
        if x.len() != mr.system().dim() {
            return Err(Error::invalid("block point dimension mismatch"));
        }
        if mr.depths().iter().any(|&r| r == 0) {
            return Err(Error::invalid("block depths must all be >= 1"));
        }
        for &xi in &x {
            if !(0.0..=1.0).contains(&xi) {
                return Err(Error::invalid(format!("coordinate {xi} outside [0,1]")));
            }
        }
        Ok(Self {
            start,
            count,
            mr,
            x,
        })
    }

    pub fn multi_radix(&self) -> &MultiRadix {
        &self.mr
    }
}

/// phi_{r,Q,N,m} = (e(m(Q+N)/P_r) - e(mQ/P_r)) / (P_r (e(m/P_r) - 1)),
/// the normalized geometric sum (1/P_r) Sum_{k=Q}^{Q+N-1} e(mk/P_r).
///
/// Rejects m = 0 mod P_r (zero denominator); |phi| <= 1/max(1,|m|) on
/// the symmetric range.
pub fn varphi(mr: &MultiRadix, start: i64, count: u64, m: i64) -> Result<Complex64> {
    let p_r = mr.modulus();
    let p = p_r as i128;
    if (m as i128).rem_euclid(p) == 0 {
        return Err(Error::invalid(
            "varphi frequency must be nonzero mod P_r",
        ));
    }
    let m_i = m as i128;
    let hi = (m_i * (start as i128 + count as i128)).rem_euclid(p);
    let lo = (m_i * start as i128).rem_euclid(p);
    let numerator = unit_circle(hi as f64 / p_r as f64) - unit_circle(lo as f64 / p_r as f64);
    let step = m_i.rem_euclid(p);
    let denominator = (unit_circle(step as f64 / p_r as f64) - Complex64::new(1.0, 0.0))
        * p_r as f64;
    Ok(numerator / denominator)
}

/// psi_r(m, x) = prod_i psi_dot(i, {-m M_i / p_i} p_i, x_{i,r_i}) with
/// psi_dot(i, 0, d) = d and
/// psi_dot(i, m', d) = (1 - e(-m' d / p_i)) / (e(m'/p_i) - 1) otherwise;
/// d is the digit of x_i at position r_i. |psi| <= p_0.
pub fn psi(mr: &MultiRadix, m: i64, x: &[f64]) -> Result<Complex64> {
    if x.len() != mr.system().dim() {
        return Err(Error::invalid("psi point dimension mismatch"));
    }
    let mut product = Complex64::new(1.0, 0.0);
    for (i, &xi) in x.iter().enumerate() {
        let p = mr.system().bases()[i];
        let digit = fraction_digit(xi, p, mr.depths()[i])?;
        let reduced = (-(m as i128) * mr.weights()[i] as i128).rem_euclid(p as i128) as u64;
        let factor = if reduced == 0 {
            Complex64::new(digit as f64, 0.0)
        } else {
            let num_arg = (-(reduced as i128) * digit as i128).rem_euclid(p as i128);
            let numerator = Complex64::new(1.0, 0.0) - unit_circle(num_arg as f64 / p as f64);
            let denominator = unit_circle(reduced as f64 / p as f64) - Complex64::new(1.0, 0.0);
            numerator / denominator
        };
        product *= factor;
    }
    Ok(product)
}

/// Count of k in [start, start+count) with k = residue (mod modulus).
fn residue_count(start: i64, count: u64, residue: u64, modulus: u64) -> u64 {
    let offset = (residue as i128 - start as i128).rem_euclid(modulus as i128) as u64;
    if offset < count {
        1 + (count - 1 - offset) / modulus
    } else {
        0
    }
}

/// The block value by direct residue counting, exactly:
///
/// Sum over digit prefixes b_i < x_{i,r_i} of
/// Sum_{k=Q}^{Q+N-1} (delta_{P_r}(k - xhat_{r,b}) - 1/P_r),
///
/// evaluated as an integer-valued numerator over P_r. |result| < p_0.
pub fn block_direct(block: &FourierBlock) -> Result<f64> {
    let mr = &block.mr;
    let p_r = mr.modulus();
    let digits: Vec<u64> = block
        .x
        .iter()
        .enumerate()
        .map(|(i, &xi)| fraction_digit(xi, mr.system().bases()[i], mr.depths()[i]))
        .collect::<Result<_>>()?;
    if digits.iter().any(|&d| d == 0) {
        return Ok(0.0); // an empty b-range in any coordinate kills the sum
    }
    let mut overrides = vec![0u64; digits.len()];
    let mut combos: u128 = 0;
    let mut hits: u128 = 0;
    loop {
        let residue = localize_with_digits(&block.x, mr, &overrides)?;
        hits += residue_count(block.start, block.count, residue, p_r) as u128;
        combos += 1;
        // odometer over the digit prefix ranges
        let mut pos = 0;
        loop {
            if pos == overrides.len() {
                let numerator = p_r as i128 * hits as i128 - combos as i128 * block.count as i128;
                return Ok(numerator as f64 / p_r as f64);
            }
            overrides[pos] += 1;
            if overrides[pos] < digits[pos] {
                break;
            }
            overrides[pos] = 0;
            pos += 1;
        }
    }
}

/// The same block through Lemma-style Fourier series:
/// Sum_{m in I*_{P_r}} phi_{r,Q,N,m} psi_r(m,x) e(-m xhat_r / P_r).
///
/// Real-valued up to rounding; agrees with [`block_direct`] to about
/// P_r ulps (1e-9 at the default budget).
pub fn block_fourier(block: &FourierBlock) -> Result<Complex64> {
    block_fourier_with_budget(block, DEFAULT_FREQUENCY_BUDGET)
}

pub fn block_fourier_with_budget(block: &FourierBlock, budget: u64) -> Result<Complex64> {
    let mr = &block.mr;
    let p_r = mr.modulus();
    if p_r - 1 > budget {
        return Err(Error::budget(format!(
            "{} frequencies exceed the Fourier budget {budget}",
            p_r - 1
        )));
    }
    let xhat = localize(&block.x, mr)?;
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for m in IndexRange::star(p_r).iter() {
        let phase_arg = (-(m as i128) * xhat as i128).rem_euclid(p_r as i128);
        let term = varphi(mr, block.start, block.count, m)?
            * psi(mr, m, &block.x)?
            * unit_circle(phase_arg as f64 / p_r as f64);
        re.add(term.re);
        im.add(term.im);
    }
    Ok(Complex64::new(re.total(), im.total()))
}

/// The truncated local discrepancy D([x]_n, (H(k))_{k=Q}^{Q+N-1})
/// reconstructed as the sum of all blocks r in [1, n]^s.
pub fn truncated_discrepancy_via_blocks(
    system: &BaseSystem,
    start: i64,
    count: u64,
    x: &[f64],
    depth: u32,
) -> Result<f64> {
    truncated_discrepancy_via_blocks_with_budget(
        system,
        start,
        count,
        x,
        depth,
        DEFAULT_BLOCK_BUDGET,
    )
}

pub fn truncated_discrepancy_via_blocks_with_budget(
    system: &BaseSystem,
    start: i64,
    count: u64,
    x: &[f64],
    depth: u32,
    block_budget: u64,
) -> Result<f64> {
    if depth == 0 {
        return Err(Error::invalid("block reconstruction needs depth >= 1"));
    }
    if x.len() != system.dim() {
        return Err(Error::invalid("point dimension mismatch"));
    }
    let s = system.dim() as u32;
    let blocks = (depth as u64)
        .checked_pow(s)
        .filter(|&b| b <= block_budget)
        .ok_or_else(|| {
            Error::budget(format!("{depth}^{s} blocks exceed the budget {block_budget}"))
        })?;
    let _ = blocks;

    let mut depths = vec![1u32; system.dim()];
    let mut total = Neumaier::default();
    loop {
        let mr = crt_weights(system, &depths)?;
        let block = FourierBlock::new(start, count, mr, x.to_vec())?;
        total.add(block_direct(&block)?);
        let mut pos = 0;
        loop {
            if pos == depths.len() {
                return Ok(total.total());
            }
            depths[pos] += 1;
            if depths[pos] <= depth {
                break;
            }
            depths[pos] = 1;
            pos += 1;
        }
    }
}

/// Configuration of the seeded oracle battery.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelfCheckConfig {
    pub seed: u64,
    /// Random (Q, N, r, x) block-equivalence cases.
    pub block_cases: u32,
    /// Random block-sum reconstruction cases.
    pub reconstruction_cases: u32,
    /// Pass threshold for the block equivalence error.
    pub block_tolerance: f64,
    /// Pass threshold for the reconstruction error.
    pub reconstruction_tolerance: f64,
}

impl Default for SelfCheckConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            block_cases: 200,
            reconstruction_cases: 50,
            block_tolerance: 1e-9,
            reconstruction_tolerance: 1e-8,
        }
    }
}

/// Outcome of the seeded oracle battery over the fourier and radix
/// modules; serializes to the selftest JSON report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfCheckReport {
    pub config: SelfCheckConfig,
    /// Worst |block_fourier - block_direct| over the battery.
    pub max_block_error: f64,
    /// Worst |Im block_fourier| over the battery.
    pub max_block_imaginary: f64,
    /// Worst |block sum - truncated local discrepancy|.
    pub max_reconstruction_error: f64,
    /// Worst positive excess of |phi| over 1/max(1,|m|).
    pub max_varphi_bound_excess: f64,
    /// Worst positive excess of |psi| over p_0.
    pub max_psi_bound_excess: f64,
    /// CRT round-trip failures (exact test, must be 0).
    pub crt_failures: u64,
    /// CRT round-trip cases run.
    pub crt_cases: u64,
    pub pass: bool,
}

fn random_case(seed: u64, index: u64) -> (Vec<u32>, i64, u64, Vec<f64>) {
    let mut rng = substream(seed, index);
    // depth vectors for bases (2,3) with P_r <= 4096
    let (r1, r2) = loop {
        let r1 = rng.random_range(1..=8u32);
        let r2 = rng.random_range(1..=6u32);
        if 2u64.pow(r1) * 3u64.pow(r2) <= 4096 {
            break (r1, r2);
        }
    };
    let start = rng.random_range(-(1 << 20)..(1 << 20));
    let count = rng.random_range(0..=4096u64);
    let x = vec![1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()];
    (vec![r1, r2], start, count, x)
}

/// Runs the seeded oracle battery: block equivalence, block-sum
/// reconstruction, the phi/psi bounds, and the exact CRT round trip.
pub fn self_check(config: SelfCheckConfig) -> Result<SelfCheckReport> {
    let system = BaseSystem::new(vec![2, 3])?;

    // Block equivalence battery.
    let block_results: Vec<(f64, f64)> = (0..config.block_cases as u64)
        .into_par_iter()
        .map(|index| {
            let (depths, start, count, x) = random_case(config.seed, index);
            let mr = crt_weights(&system, &depths)?;
            let block = FourierBlock::new(start, count, mr, x)?;
            let direct = block_direct(&block)?;
            let fourier = block_fourier(&block)?;
            Ok(((fourier.re - direct).abs(), fourier.im.abs()))
        })
        .collect::<Result<_>>()?;
    let max_block_error = block_results.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_block_imaginary = block_results.iter().map(|r| r.1).fold(0.0, f64::max);

    // Reconstruction battery: block sums against the direct truncated count.
    let recon_errors: Vec<f64> = (0..config.reconstruction_cases as u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = substream(config.seed, 1 << 32 | case);
            let start = rng.random_range(-(1 << 16)..(1 << 16));
            let count = rng.random_range(1..=512u64);
            let x = vec![1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()];
            let depth = default_truncation_depth(count);
            let via_blocks =
                truncated_discrepancy_via_blocks(&system, start, count, &x, depth)?;
            let points = halton(&system, start, count)?;
            let direct = truncated_local_discrepancy(&points, &x, depth)?;
            Ok((via_blocks - direct).abs())
        })
        .collect::<Result<_>>()?;
    let max_reconstruction_error = recon_errors.into_iter().fold(0.0, f64::max);

    // phi and psi bounds, exhaustive in m for a few depth vectors.
    let mut max_varphi_bound_excess: f64 = 0.0;
    let mut max_psi_bound_excess: f64 = 0.0;
    let p0 = system.product() as f64;
    for depths in [[2u32, 1], [5, 2], [4, 4]] {
        let mr = crt_weights(&system, &depths)?;
        let mut rng = substream(config.seed, 1 << 33 | (depths[0] * 16 + depths[1]) as u64);
        let start = rng.random_range(-(1 << 20)..(1 << 20));
        let count = rng.random_range(0..=4096u64);
        let x = vec![1.0 - rng.random::<f64>(), 1.0 - rng.random::<f64>()];
        for m in IndexRange::star(mr.modulus()).iter() {
            let bound = 1.0 / (m.unsigned_abs().max(1)) as f64;
            let phi = varphi(&mr, start, count, m)?;
            max_varphi_bound_excess = max_varphi_bound_excess.max(phi.norm() - bound);
            let psi_value = psi(&mr, m, &x)?;
            max_psi_bound_excess = max_psi_bound_excess.max(psi_value.norm() - p0);
        }
    }

    // Exact CRT round trip: every depth vector with P_r <= 5000, every k.
    let mut crt_cases = 0u64;
    let mut crt_failures = 0u64;
    for r1 in 0..=12u32 {
        for r2 in 0..=7u32 {
            let p_r = 2u64.pow(r1) * 3u64.pow(r2);
            if p_r > 5000 {
                continue;
            }
            let mr = crt_weights(&system, &[r1, r2])?;
            for k in 0..p_r {
                let point: Vec<f64> = system
                    .bases()
                    .iter()
                    .map(|&p| radical_inverse(k as i64, p, default_depth(p)))
                    .collect();
                crt_cases += 1;
                if localize(&point, &mr)? != k {
                    crt_failures += 1;
                }
            }
        }
    }

    let slack = 1e-12;
    let pass = max_block_error < config.block_tolerance
        && max_block_imaginary < config.block_tolerance
        && max_reconstruction_error < config.reconstruction_tolerance
        && max_varphi_bound_excess < slack
        && max_psi_bound_excess < slack
        && crt_failures == 0;

    Ok(SelfCheckReport {
        config,
        max_block_error,
        max_block_imaginary,
        max_reconstruction_error,
        max_varphi_bound_excess,
        max_psi_bound_excess,
        crt_failures,
        crt_cases,
        pass,
    })
}
