//! Digit expansions in coprime bases, radical inverses, truncations, and
//! Chinese-remainder localization.
//!
//! Integer digit expansions are p-adic: for n < 0 the digits are those of
//! the nonnegative residue of n modulo every power of p, so e.g. -1 in
//! base 2 has all digits 1. Fraction-side digit extraction interprets an
//! `f64` as the depth-r value it most plausibly rounds from: the digit
//! threshold is biased upward by half an ulp, so a coordinate stored as
//! the nearest double below 2/3 still yields first base-3 digit 2. Local-
//! ization then runs on the extracted integer digits, never on the float.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest depth for exact fraction-side digit work: p^r must stay within
/// 2^53 so scaled prefixes and their quotients are exact in an `f64`.
const MAX_EXACT_SCALE: u64 = 1 << 53;

/// A system of pairwise-coprime bases `p_1..p_s` with their product `p_0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSystem {
    bases: Vec<u64>,
    product: u64,
}

impl BaseSystem {
    /// Validates s >= 1, every base >= 2, pairwise coprimality, and that
    /// the product fits the supported 2^63 width.
    pub fn new(bases: Vec<u64>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::invalid("base system needs at least one base"));
        }
        for &p in &bases {
            if p < 2 {
                return Err(Error::invalid(format!("base {p} must be >= 2")));
            }
        }
        for i in 0..bases.len() {
            for j in i + 1..bases.len() {
                if gcd(bases[i], bases[j]) != 1 {
                    return Err(Error::invalid(format!(
                        "bases {} and {} are not coprime",
                        bases[i], bases[j]
                    )));
                }
            }
        }
        let mut product: u64 = 1;
        for &p in &bases {
            product = product
                .checked_mul(p)
                .filter(|&v| v <= i64::MAX as u64)
                .ok_or_else(|| Error::overflow("base product exceeds 2^63"))?;
        }
        Ok(Self { bases, product })
    }

    pub fn bases(&self) -> &[u64] {
        &self.bases
    }

    /// Number of bases (the dimension s of the Halton sequence).
    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    /// p_0 = p_1 p_2 ... p_s.
    pub fn product(&self) -> u64 {
        self.product
    }
}

/// Default digit depth for a base: the largest K with p^K <= 2^53.
///
/// At this depth distinct depth-K values remain distinct (and ordered)
/// after rounding to `f64`, because the grid spacing p^-K is at least one
/// ulp everywhere in [0,1). Deeper grids alias under the 53-bit
/// significand, which would let two different radical inverses collide.
pub fn default_depth(base: u64) -> u32 {
    debug_assert!(base >= 2);
    let mut depth = 0u32;
    let mut power: u64 = 1;
    while power <= MAX_EXACT_SCALE / base {
        power *= base;
        depth += 1;
    }
    depth
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Modular inverse by extended Euclid; `a` and `modulus` must be coprime.
fn mod_inverse(a: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (modulus as i128, (a % modulus) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "mod_inverse of non-coprime arguments");
    if t < 0 {
        t += modulus as i128;
    }
    t as u64
}

/// The first K p-adic digits of an integer, least significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVector {
    pub base: u64,
    pub digits: Vec<u64>,
}

impl DigitVector {
    /// Value of the digits as an integer Sum_j e_j p^{j-1}, i.e. the
    /// residue of the expanded number modulo p^K.
    pub fn value(&self) -> u128 {
        let mut acc: u128 = 0;
        for &d in self.digits.iter().rev() {
            acc = acc * self.base as u128 + d as u128;
        }
        acc
    }
}

/// p-adic digit expansion of `n` (possibly negative) at depth `K`:
/// Sum_j e_j p^{j-1} = n (mod p^K), digits in [0, p).
///
/// Total function; for n >= 0 with n < p^K this is the ordinary base-p
/// expansion.
pub fn digits(n: i64, base: u64, depth: u32) -> DigitVector {
    debug_assert!(base >= 2);
    let p = base as i128;
    let mut rest = n as i128;
    let mut out = Vec::with_capacity(depth as usize);
    for _ in 0..depth {
        let e = rest.rem_euclid(p);
        out.push(e as u64);
        rest = (rest - e) / p;
    }
    DigitVector { base, digits: out }
}

/// Radical inverse phi_p(n) at depth K: the base-p digits of n mirrored
/// across the radix point, Sum_j e_j p^{-j}.
///
/// The result is the correctly rounded double of the exact rational,
/// except that values within half an ulp of 1 (all-max-digit expansions
/// of negative n at depths beyond the f64 grid) round down to the largest
/// double below 1, keeping the half-open range.
pub fn radical_inverse(n: i64, base: u64, depth: u32) -> f64 {
    radical_value(&digits(n, base, depth))
}

/// The value Sum_j e_j p^{-j} of a digit vector, rounded as in
/// [`radical_inverse`].
pub fn radical_value(dv: &DigitVector) -> f64 {
    let p = dv.base;
    // Greatest depth whose scale fits the exact 62-bit quotient path.
    let mut exact_depth = 0usize;
    let mut scale: u128 = 1;
    while exact_depth < dv.digits.len() && scale <= (1u128 << 62) / p as u128 {
        scale *= p as u128;
        exact_depth += 1;
    }
    // e_1 is the most significant digit of the scaled numerator
    // Sum_{j<=exact_depth} e_j p^{exact_depth-j}.
    let mut numerator: u128 = 0;
    for &d in dv.digits[..exact_depth].iter() {
        numerator = numerator * p as u128 + d as u128;
    }
    let dropped_nonzero = dv.digits[exact_depth..].iter().any(|&d| d != 0);
    if numerator == 0 {
        // Digits beyond the exact window alone are below its 2^-62
        // resolution and are dropped (unreachable at default depths).
        return 0.0;
    }
    // Correctly rounded numerator/scale: shift the numerator so the
    // quotient carries at least 62 significant bits, then fold the
    // remainder (and any dropped sub-resolution digits) into a sticky
    // bit that steers the final conversion's round-to-nearest-even.
    let shift = 62 + numerator.leading_zeros() - scale.leading_zeros();
    let wide = numerator << shift;
    let q = wide / scale;
    let rem = wide % scale;
    let sticky = (rem != 0 || dropped_nonzero) as u128;
    let value = ((q | sticky) as f64) * 2.0f64.powi(-(shift as i32));
    if value >= 1.0 {
        f64::from_bits(0x3FEF_FFFF_FFFF_FFFF) // largest double below 1
    } else {
        value
    }
}

/// Exact decomposition of a finite x in [0,1): x = m * 2^e2 with integer m.
fn decompose(x: f64) -> (u64, i32) {
    debug_assert!((0.0..1.0).contains(&x));
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    }
}

/// floor((x + ulp(x)/2) * scale) computed exactly in integers.
///
/// The half-ulp bias reads the float as the upper end of its rounding
/// interval: a depth-r lattice value that rounded down to x is recovered
/// with its intended digits. For base 2 the bias can never reach the next
/// lattice point (lattice values are themselves doubles), so the binary
/// case stays plain-exact.
fn scaled_prefix(x: f64, scale: u64) -> u64 {
    debug_assert!((0.0..1.0).contains(&x));
    if x == 0.0 {
        return 0;
    }
    let (m, e2) = decompose(x);
    // x + ulp/2 = (2m + 1) * 2^(e2 - 1)
    let shift = 1 - e2; // positive for x < 1
    let product = (2 * m as u128 + 1) * scale as u128;
    let a = if shift >= 128 {
        0
    } else {
        product >> shift as u32
    };
    debug_assert!(a < scale as u128);
    a as u64
}

/// First `depth` base-p digits of the fraction x, most significant first
/// (`result[j-1]` is the digit of weight p^-j).
///
/// x = 1.0 is read through its non-terminating expansion 0.(p-1)(p-1)...,
/// so every digit is p-1.
pub fn fraction_digits(x: f64, base: u64, depth: u32) -> Result<Vec<u64>> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("fraction {x} outside [0,1]")));
    }
    if x == 1.0 {
        return Ok(vec![base - 1; depth as usize]);
    }
    let scale = checked_pow(base, depth)?;
    let mut a = scaled_prefix(x, scale);
    let mut out = vec![0u64; depth as usize];
    for j in (0..depth as usize).rev() {
        out[j] = a % base;
        a /= base;
    }
    Ok(out)
}

/// One fraction digit x_{i,j} at position `position` (1-based); x = 1.0
/// reads as p-1 everywhere, as in [`fraction_digits`].
pub fn fraction_digit(x: f64, base: u64, position: u32) -> Result<u64> {
    debug_assert!(position >= 1);
    if x == 1.0 {
        return Ok(base - 1);
    }
    let scale = checked_pow(base, position)?;
    Ok(scaled_prefix(x, scale) % base)
}

/// The truncation [x]_r = Sum_{j<=r} x_j p^{-j} of a fraction to r digits.
///
/// Exact contract (result <= x, x - result < p^-r, idempotent bit-exactly,
/// zero digits beyond position r) holds whenever p^r <= 2^53. Beyond that
/// the truncation grid is finer than the f64 grid and x is returned
/// unchanged. x = 1.0 truncates through its all-(p-1) expansion to
/// 1 - p^-r.
pub fn truncate_fraction(x: f64, base: u64, depth: u32) -> f64 {
    debug_assert!(base >= 2);
    debug_assert!((0.0..=1.0).contains(&x));
    if depth == 0 {
        return 0.0;
    }
    let scale = match checked_pow(base, depth) {
        Ok(s) if s <= MAX_EXACT_SCALE => s,
        _ => return x,
    };
    let a = if x == 1.0 { scale - 1 } else { scaled_prefix(x, scale) };
    // a and scale are exact f64 integers; the quotient rounds to nearest,
    // which cannot cross x (see module tests for the boundary cases).
    (a as f64) / (scale as f64)
}

fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp)
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or_else(|| Error::overflow(format!("{base}^{exp} exceeds 2^63")))
}

/// A truncation-depth vector with its modulus P_r and CRT weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiRadix {
    system: BaseSystem,
    depths: Vec<u32>,
    /// p_i^{r_i} per coordinate.
    prime_powers: Vec<u64>,
    /// P_r = prod_i p_i^{r_i}.
    modulus: u64,
    /// M_i = (P_r / p_i^{r_i})^{-1} mod p_i^{r_i}; zero where r_i = 0.
    weights: Vec<u64>,
}

impl MultiRadix {
    pub fn system(&self) -> &BaseSystem {
        &self.system
    }

    pub fn depths(&self) -> &[u32] {
        &self.depths
    }

    pub fn prime_powers(&self) -> &[u64] {
        &self.prime_powers
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }
}

/// CRT weights for a depth vector: M_i * (P_r / p_i^{r_i}) = 1 mod p_i^{r_i}.
///
/// Guarded at 2^63: the modulus P_r must fit the supported integer width.
pub fn crt_weights(system: &BaseSystem, depths: &[u32]) -> Result<MultiRadix> {
    if depths.len() != system.dim() {
        return Err(Error::invalid(format!(
            "depth vector length {} != dimension {}",
            depths.len(),
            system.dim()
        )));
    }
    let mut prime_powers = Vec::with_capacity(depths.len());
    let mut modulus: u64 = 1;
    for (&p, &r) in system.bases().iter().zip(depths) {
        let q = checked_pow(p, r)?;
        modulus = modulus
            .checked_mul(q)
            .filter(|&v| v <= i64::MAX as u64)
            .ok_or_else(|| Error::overflow("modulus P_r exceeds 2^63"))?;
        prime_powers.push(q);
    }
    let weights = prime_powers
        .iter()
        .map(|&q| {
            if q == 1 {
                0
            } else {
                let cofactor = (modulus / q) % q;
                mod_inverse(cofactor, q)
            }
        })
        .collect();
    Ok(MultiRadix {
        system: system.clone(),
        depths: depths.to_vec(),
        prime_powers,
        modulus,
        weights,
    })
}

/// The residue class x_hat_r in [0, P_r) characterizing which Halton
/// indices k truncate to the same depth-r box as x:
/// [H_s(k)]_r = [x]_r  iff  k = x_hat_r (mod P_r).
pub fn localize(x: &[f64], mr: &MultiRadix) -> Result<u64> {
    if x.len() != mr.system.dim() {
        return Err(Error::invalid(format!(
            "point dimension {} != system dimension {}",
            x.len(),
            mr.system.dim()
        )));
    }
    for &xi in x {
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::invalid(format!("coordinate {xi} outside [0,1)")));
        }
    }
    let mut acc: u128 = 0;
    let modulus = mr.modulus as u128;
    for (i, &xi) in x.iter().enumerate() {
        let p = mr.system.bases()[i];
        let q = mr.prime_powers[i];
        if q == 1 {
            continue;
        }
        // x_hat_{r_i}: digits d_1..d_r of x_i read with weight p^{j-1}.
        let digits = fraction_digits(xi, p, mr.depths[i])?;
        let mut xhat: u128 = 0;
        for &d in digits.iter().rev() {
            xhat = xhat * p as u128 + d as u128;
        }
        let cofactor = (mr.modulus / q) as u128;
        let term = (mr.weights[i] as u128 % modulus) * (cofactor % modulus) % modulus;
        acc = (acc + term * (xhat % modulus)) % modulus;
    }
    Ok(acc as u64)
}

/// Localization with the depth-r_i digit of every coordinate overridden:
/// coordinate i contributes digits d_1..d_{r_i - 1} of x_i and then b_i.
///
/// Requires every r_i >= 1 and b_i in [0, p_i).
pub fn localize_with_digits(x: &[f64], mr: &MultiRadix, overrides: &[u64]) -> Result<u64> {
    if x.len() != mr.system.dim() || overrides.len() != mr.system.dim() {
        return Err(Error::invalid("dimension mismatch in digit override"));
    }
    let mut acc: u128 = 0;
    let modulus = mr.modulus as u128;
    for (i, (&xi, &b)) in x.iter().zip(overrides).enumerate() {
        let p = mr.system.bases()[i];
        let r = mr.depths[i];
        if r == 0 {
            return Err(Error::invalid("digit override requires depth >= 1"));
        }
        if b >= p {
            return Err(Error::invalid(format!(
                "digit override {b} out of range for base {p}"
            )));
        }
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::invalid(format!("coordinate {xi} outside [0,1)")));
        }
        let q = mr.prime_powers[i];
        let digits = fraction_digits(xi, p, r)?;
        let mut xhat: u128 = b as u128; // weight p^{r-1}
        for &d in digits[..(r - 1) as usize].iter().rev() {
            xhat = xhat * p as u128 + d as u128;
        }
        let cofactor = (mr.modulus / q) as u128;
        let term = (mr.weights[i] as u128 % modulus) * (cofactor % modulus) % modulus;
        acc = (acc + term * (xhat % modulus)) % modulus;
    }
    Ok(acc as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digit_examples() {
        assert_eq!(digits(3, 2, 3).digits, vec![1, 1, 0]);
        assert_eq!(digits(-1, 2, 4).digits, vec![1, 1, 1, 1]);
        assert_eq!(digits(5, 3, 2).digits, vec![2, 1]);
    }

    #[test]
    fn digits_of_negative_numbers_are_p_adic() {
        // -1 has all digits p-1 in every base.
        for p in [2u64, 3, 5, 7] {
            assert!(digits(-1, p, 10).digits.iter().all(|&d| d == p - 1));
        }
        // -6 = ...11010 in base 2 (two's-complement pattern).
        assert_eq!(digits(-6, 2, 5).digits, vec![0, 1, 0, 1, 1]);
    }

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(radical_inverse(3, 2, 8), 0.75);
        assert_eq!(radical_inverse(4, 3, 8), 4.0 / 9.0);
        // Derived oracle: digits(-1,2,4) = [1,1,1,1], value 15/16.
        assert_eq!(radical_inverse(-1, 2, 4), 0.9375);
    }

    #[test]
    fn radical_inverse_of_negative_one_stays_below_one() {
        for p in [2u64, 3, 5, 7, 11] {
            let k = default_depth(p);
            let v = radical_inverse(-1, p, k);
            assert!(v < 1.0, "phi_{p}(-1) = {v} must stay below 1");
            assert!(v > 1.0 - 1e-15);
        }
        assert_eq!(radical_inverse(-1, 2, 53), 1.0 - 2f64.powi(-53));
        // Deep user-chosen depth rounds down to the largest double below 1.
        assert_eq!(radical_inverse(-1, 2, 300), 1.0 - 2f64.powi(-53));
    }

    #[test]
    fn default_depth_is_max_power_within_2_53() {
        assert_eq!(default_depth(2), 53);
        assert_eq!(default_depth(3), 33);
        assert_eq!(default_depth(5), 22);
        assert_eq!(default_depth(7), 18);
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate_fraction(0.75, 2, 1), 0.5);
        assert_eq!(truncate_fraction(0.9999, 3, 0), 0.0);
        assert_eq!(truncate_fraction(0.123, 7, 0), 0.0);
        // 4/9 already has two base-3 digits: truncation is the identity
        // even though the double rounds below the exact rational.
        let x = 4.0 / 9.0;
        assert_eq!(truncate_fraction(x, 3, 2), x);
        let y = 2.0 / 3.0;
        assert_eq!(truncate_fraction(y, 3, 1), y);
    }

    #[test]
    fn truncation_respects_bounds() {
        let x = 0.437_219_118_4;
        for p in [2u64, 3, 5] {
            for r in 0..12 {
                let t = truncate_fraction(x, p, r);
                assert!(t <= x);
                assert!(x - t < (p as f64).powi(-(r as i32)));
            }
        }
    }

    #[test]
    fn fraction_digits_read_intended_digits_of_rounded_rationals() {
        // double(2/3) < 2/3 but its first base-3 digit must read as 2.
        assert_eq!(fraction_digits(2.0 / 3.0, 3, 2).unwrap(), vec![2, 0]);
        assert_eq!(fraction_digits(4.0 / 9.0, 3, 2).unwrap(), vec![1, 1]);
        assert_eq!(fraction_digits(0.75, 2, 3).unwrap(), vec![1, 1, 0]);
        assert_eq!(fraction_digit(2.0 / 3.0, 3, 1).unwrap(), 2);
        assert_eq!(fraction_digit(0.75, 2, 2).unwrap(), 1);
    }

    #[test]
    fn crt_weight_examples() {
        let sys = BaseSystem::new(vec![2, 3]).unwrap();
        let mr = crt_weights(&sys, &[1, 1]).unwrap();
        assert_eq!(mr.modulus(), 6);
        assert_eq!(mr.weights(), &[1, 2]);

        let sys3 = BaseSystem::new(vec![2, 3, 5]).unwrap();
        let mr3 = crt_weights(&sys3, &[1, 1, 1]).unwrap();
        assert_eq!(mr3.modulus(), 30);
        assert_eq!(mr3.weights(), &[1, 1, 1]);

        let mr0 = crt_weights(&sys, &[0, 2]).unwrap();
        assert_eq!(mr0.modulus(), 9);
        assert_eq!(mr0.weights(), &[0, 1]);
    }

    #[test]
    fn crt_weights_overflow_guard() {
        let sys = BaseSystem::new(vec![2, 3]).unwrap();
        assert!(matches!(
            crt_weights(&sys, &[62, 2]),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn weight_correctness_enumerated() {
        // M_i * (P_r / p_i^{r_i}) = 1 mod p_i^{r_i} for all P_r <= 10^6.
        let sys = BaseSystem::new(vec![2, 3]).unwrap();
        for r1 in 0..20u32 {
            for r2 in 0..13u32 {
                let p_r = 2u64.pow(r1).checked_mul(3u64.pow(r2));
                match p_r {
                    Some(v) if v <= 1_000_000 => {}
                    _ => continue,
                }
                let mr = crt_weights(&sys, &[r1, r2]).unwrap();
                for (i, &q) in mr.prime_powers().iter().enumerate() {
                    if mr.depths()[i] >= 1 {
                        let w = mr.weights()[i];
                        assert!(w < q);
                        assert_eq!(w as u128 * ((mr.modulus() / q) % q) as u128 % q as u128, 1);
                    } else {
                        assert_eq!(mr.weights()[i], 0);
                    }
                }
            }
        }
    }

    #[test]
    fn localize_examples() {
        let sys = BaseSystem::new(vec![2, 3]).unwrap();
        let mr = crt_weights(&sys, &[1, 1]).unwrap();
        // Derived: among k in [0,6), only k = 5 has (phi_2, phi_3)
        // truncating like (0.5, 2/3).
        assert_eq!(localize(&[0.5, 2.0 / 3.0], &mr).unwrap(), 5);
        assert_eq!(localize(&[0.0, 0.0], &mr).unwrap(), 0);
        let trivial = crt_weights(&sys, &[0, 0]).unwrap();
        assert_eq!(localize(&[0.73, 0.21], &trivial).unwrap(), 0);
    }

    #[test]
    fn localize_with_digits_examples() {
        let sys = BaseSystem::new(vec![2, 3]).unwrap();
        let mr = crt_weights(&sys, &[1, 1]).unwrap();
        let x = [0.5, 2.0 / 3.0];
        // Identity override: b_i = x_{i,r_i}.
        let b = [
            fraction_digit(x[0], 2, 1).unwrap(),
            fraction_digit(x[1], 3, 1).unwrap(),
        ];
        assert_eq!(
            localize_with_digits(&x, &mr, &b).unwrap(),
            localize(&x, &mr).unwrap()
        );
        // Overriding the origin with (1, 2) matches localize of (1/2, 2/3).
        assert_eq!(localize_with_digits(&[0.0, 0.0], &mr, &[1, 2]).unwrap(), 5);
        assert_eq!(localize_with_digits(&[0.0, 0.0], &mr, &[0, 0]).unwrap(), 0);
        assert!(localize_with_digits(&[0.0, 0.0], &mr, &[0, 3]).is_err());
    }

    #[test]
    fn crt_round_trip_small() {
        // localize(H(k)) = k mod P_r; the full battery is an acceptance
        // criterion, this covers a representative slice.
        let sys = BaseSystem::new(vec![2, 3]).unwrap();
        for depths in [[1u32, 1], [3, 2], [5, 3], [2, 4]] {
            let mr = crt_weights(&sys, &depths).unwrap();
            for k in 0..mr.modulus() {
                let point: Vec<f64> = sys
                    .bases()
                    .iter()
                    .map(|&p| radical_inverse(k as i64, p, default_depth(p)))
                    .collect();
                assert_eq!(localize(&point, &mr).unwrap(), k, "depths {depths:?}");
            }
        }
    }

    #[test]
    fn base_system_validation() {
        assert!(BaseSystem::new(vec![]).is_err());
        assert!(BaseSystem::new(vec![1, 3]).is_err());
        assert!(BaseSystem::new(vec![2, 4]).is_err());
        assert!(BaseSystem::new(vec![2, 3, 5]).is_ok());
        // 10 and 21 are coprime though composite.
        assert!(BaseSystem::new(vec![10, 21]).is_ok());
    }

    proptest! {
        #[test]
        fn digit_expansion_is_congruent(n in -1_000_000i64..1_000_000, p in 2u64..12, k in 0u32..20) {
            let dv = digits(n, p, k);
            prop_assert!(dv.digits.iter().all(|&d| d < p));
            let modulus = (p as u128).pow(k);
            if modulus > 1 {
                prop_assert_eq!(dv.value() % modulus, (n as i128).rem_euclid(modulus as i128) as u128);
            }
        }

        #[test]
        fn radical_inverse_is_periodic(n in -10_000i64..10_000, p in 2u64..8, k in 1u32..12) {
            let period = (p as i64).pow(k);
            prop_assert_eq!(
                radical_inverse(n, p, k).to_bits(),
                radical_inverse(n + period, p, k).to_bits()
            );
        }

        #[test]
        fn truncation_is_idempotent(x in 0.0f64..1.0, p in 2u64..12, r in 0u32..30) {
            let t = truncate_fraction(x, p, r);
            prop_assert!(t <= x);
            prop_assert_eq!(truncate_fraction(t, p, r).to_bits(), t.to_bits());
        }

        #[test]
        fn truncation_drops_less_than_grid_step(x in 0.0f64..1.0, p in 2u64..12, r in 0u32..18) {
            let t = truncate_fraction(x, p, r);
            prop_assert!(x - t < (p as f64).powi(-(r as i32)));
        }
    }
}
