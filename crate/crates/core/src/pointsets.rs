//! Point-set generators: Halton sequences (any start index, including
//! negative p-adic starts), Hammersley nets, two symmetrized Hammersley
//! variants, and permutation-generalized Halton.
//!
//! All coordinates lie in [0,1), with one documented exception: the
//! bit-reflected symmetrized variant produces the coordinate exactly 1.0
//! where a reflected radical inverse is 1 - 0. Such a point lies in no
//! anchored half-open box [0, x), x <= 1, so local discrepancy stays well
//! defined; the set's range invariant is the closed interval [0,1].

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::format_float;
use crate::radix::{self, BaseSystem};
use crate::rng::substream;

use rand::seq::SliceRandom;

/// Generator family of a point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Halton,
    Hammersley,
    HammersleySym,
    HammersleySymDot,
    GeneralizedHalton,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Halton => "halton",
            Variant::Hammersley => "hammersley",
            Variant::HammersleySym => "hammersley-sym",
            Variant::HammersleySymDot => "hammersley-sym-dot",
            Variant::GeneralizedHalton => "generalized-halton",
        };
        f.write_str(name)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "halton" => Ok(Variant::Halton),
            "hammersley" => Ok(Variant::Hammersley),
            "hammersley-sym" => Ok(Variant::HammersleySym),
            "hammersley-sym-dot" => Ok(Variant::HammersleySymDot),
            "generalized-halton" => Ok(Variant::GeneralizedHalton),
            other => Err(Error::invalid(format!("unknown variant '{other}'"))),
        }
    }
}

/// How a point set was produced; enough to regenerate it bit-exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub variant: Variant,
    pub bases: Vec<u64>,
    /// Start index Q (Halton families; 0 elsewhere).
    pub start: i64,
    /// Count parameter N of the variant (not necessarily the cardinality).
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub permutation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

/// A finite list of d-dimensional points with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
    provenance: Provenance,
}

impl PointSet {
    pub fn from_parts(dim: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::invalid("point data length not a multiple of dim"));
        }
        Ok(Self {
            dim,
            data,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// One point per row, 17 significant decimal digits per coordinate;
    /// round-trips bit-exactly through [`PointSet::read_csv`].
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for point in self.iter() {
            let row: Vec<String> = point.iter().map(|&c| format_float(c)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads a CSV written by [`PointSet::write_csv`] back into a point
    /// set with the given provenance.
    pub fn read_csv<R: BufRead>(r: R, provenance: Provenance) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::invalid("empty CSV"))??;
        let dim = header.split(',').count();
        let mut data = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim {
                return Err(Error::invalid(format!(
                    "row has {} fields, expected {dim}",
                    fields.len()
                )));
            }
            for field in fields {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| Error::invalid(format!("bad float '{field}': {e}")))?;
                data.push(v);
            }
        }
        PointSet::from_parts(dim, data, provenance)
    }
}

fn end_index(start: i64, count: u64) -> Result<i64> {
    let count = i64::try_from(count).map_err(|_| Error::overflow("count exceeds i64"))?;
    start
        .checked_add(count)
        .ok_or_else(|| Error::overflow("index range exceeds i64"))
}

/// The s-dimensional Halton segment (H_s(k))_{k=Q}^{Q+N-1} with
/// H_s(k) = (phi_1(k), ..., phi_s(k)) at per-base default depth.
pub fn halton(system: &BaseSystem, start: i64, count: u64) -> Result<PointSet> {
    end_index(start, count)?;
    let depths: Vec<u32> = system
        .bases()
        .iter()
        .map(|&p| radix::default_depth(p))
        .collect();
    let mut data = Vec::with_capacity(count as usize * system.dim());
    for k in 0..count as i64 {
        let n = start + k;
        for (&p, &depth) in system.bases().iter().zip(&depths) {
            data.push(radix::radical_inverse(n, p, depth));
        }
    }
    PointSet::from_parts(
        system.dim(),
        data,
        Provenance {
            variant: Variant::Halton,
            bases: system.bases().to_vec(),
            start,
            count,
            permutation: None,
            seed: None,
        },
    )
}

/// Streaming Halton generation: yields exactly the points of [`halton`]
/// in index order without materializing them.
pub fn halton_iter(system: &BaseSystem, start: i64) -> HaltonIter {
    HaltonIter {
        bases: system.bases().to_vec(),
        depths: system
            .bases()
            .iter()
            .map(|&p| radix::default_depth(p))
            .collect(),
        next: Some(start),
    }
}

pub struct HaltonIter {
    bases: Vec<u64>,
    depths: Vec<u32>,
    next: Option<i64>,
}

impl Iterator for HaltonIter {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next?;
        let point = self
            .bases
            .iter()
            .zip(&self.depths)
            .map(|(&p, &depth)| radix::radical_inverse(n, p, depth))
            .collect();
        self.next = n.checked_add(1);
        Some(point)
    }
}

/// The (s+1)-dimensional Hammersley net (H_s(n), n/N)_{n=0}^{N-1}.
pub fn hammersley(system: &BaseSystem, count: u64) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::invalid("hammersley requires N >= 1"));
    }
    let base_points = halton(system, 0, count)?;
    let dim = system.dim() + 1;
    let mut data = Vec::with_capacity(count as usize * dim);
    for (n, point) in base_points.iter().enumerate() {
        data.extend_from_slice(point);
        data.push(n as f64 / count as f64);
    }
    PointSet::from_parts(
        dim,
        data,
        Provenance {
            variant: Variant::Hammersley,
            bases: system.bases().to_vec(),
            start: 0,
            count,
            permutation: None,
            seed: None,
        },
    )
}

/// The symmetrized Hammersley set (H_s(n), |n|/N)_{-N < n < N} with
/// 2N - 1 points; negative indices use p-adic radical inverses.
pub fn hammersley_sym(system: &BaseSystem, count: u64) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::invalid("hammersley-sym requires N >= 1"));
    }
    let n = count as i64;
    let dim = system.dim() + 1;
    let depths: Vec<u32> = system
        .bases()
        .iter()
        .map(|&p| radix::default_depth(p))
        .collect();
    let mut data = Vec::with_capacity((2 * count as usize - 1) * dim);
    for k in -(n - 1)..n {
        for (&p, &depth) in system.bases().iter().zip(&depths) {
            data.push(radix::radical_inverse(k, p, depth));
        }
        data.push(k.unsigned_abs() as f64 / count as f64);
    }
    PointSet::from_parts(
        dim,
        data,
        Provenance {
            variant: Variant::HammersleySym,
            bases: system.bases().to_vec(),
            start: -(n - 1),
            count,
            permutation: None,
            seed: None,
        },
    )
}

/// The bit-reflected symmetrized Hammersley set with 2^s * N points:
/// index n splits as n = m_1 + 2 m_2 + ... + 2^{s-1} m_s + 2^s m_{s+1};
/// coordinate i is phi_i(m_{s+1}) when m_i = 0 and 1 - phi_i(m_{s+1})
/// when m_i = 1, and the last coordinate is n / (2^s N).
pub fn hammersley_sym_dot(system: &BaseSystem, count: u64) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::invalid("hammersley-sym-dot requires N >= 1"));
    }
    let s = system.dim();
    if s >= 32 {
        return Err(Error::overflow("sign-bit expansion limited to s < 32"));
    }
    let total = (1u64 << s)
        .checked_mul(count)
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or_else(|| Error::overflow("2^s * N exceeds 2^63"))?;
    let dim = s + 1;
    let depths: Vec<u32> = system
        .bases()
        .iter()
        .map(|&p| radix::default_depth(p))
        .collect();
    let mut data = Vec::with_capacity(total as usize * dim);
    for n in 0..total {
        let quotient = (n >> s) as i64;
        for (i, (&p, &depth)) in system.bases().iter().zip(&depths).enumerate() {
            let phi = radix::radical_inverse(quotient, p, depth);
            let sign_bit = (n >> i) & 1;
            data.push(if sign_bit == 0 { phi } else { 1.0 - phi });
        }
        data.push(n as f64 / total as f64);
    }
    PointSet::from_parts(
        dim,
        data,
        Provenance {
            variant: Variant::HammersleySymDot,
            bases: system.bases().to_vec(),
            start: 0,
            count,
            permutation: None,
            seed: None,
        },
    )
}

/// Per-base, per-digit-position bijections of [0, p_i).
///
/// Positions beyond the stored tables act as the identity, so the family
/// is finitely described while applying to every digit depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitPermutationFamily {
    tables: Vec<Vec<Vec<u64>>>,
    label: String,
    seed: Option<u64>,
}

impl DigitPermutationFamily {
    pub fn identity(system: &BaseSystem) -> Self {
        Self {
            tables: vec![Vec::new(); system.dim()],
            label: "identity".to_string(),
            seed: None,
        }
    }

    /// Builds a family from explicit tables; `tables[i][j]` permutes the
    /// digit at position j+1 of base i. Rejects non-bijective rows.
    pub fn from_tables(system: &BaseSystem, tables: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        if tables.len() != system.dim() {
            return Err(Error::invalid("one table list per base required"));
        }
        for (i, per_base) in tables.iter().enumerate() {
            let p = system.bases()[i];
            for (j, table) in per_base.iter().enumerate() {
                if table.len() != p as usize {
                    return Err(Error::invalid(format!(
                        "permutation at base {p}, position {} has {} entries",
                        j + 1,
                        table.len()
                    )));
                }
                let mut seen = vec![false; p as usize];
                for &v in table {
                    if v >= p || seen[v as usize] {
                        return Err(Error::invalid(format!(
                            "table at base {p}, position {} is not a bijection",
                            j + 1
                        )));
                    }
                    seen[v as usize] = true;
                }
            }
        }
        Ok(Self {
            tables,
            label: "custom".to_string(),
            seed: None,
        })
    }

    /// A seeded random family: independent uniform permutations for every
    /// digit position up to the base's default depth.
    pub fn seeded(system: &BaseSystem, seed: u64) -> Self {
        let tables = system
            .bases()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                (0..radix::default_depth(p))
                    .map(|j| {
                        let mut table: Vec<u64> = (0..p).collect();
                        let mut rng = substream(seed, ((i as u64) << 32) | j as u64);
                        table.shuffle(&mut rng);
                        table
                    })
                    .collect()
            })
            .collect();
        Self {
            tables,
            label: "seeded".to_string(),
            seed: Some(seed),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// The permuted digit pi_{i,j}(digit) for base index i (0-based) and
    /// digit position j (1-based).
    fn apply(&self, base_index: usize, position: u32, digit: u64) -> u64 {
        self.tables[base_index]
            .get(position as usize - 1)
            .map_or(digit, |table| table[digit as usize])
    }
}

/// Generalized Halton: coordinate i of point k is
/// Sum_j pi_{i,j}(e_{i,j}(Q + k)) p_i^{-j}.
pub fn generalized_halton(
    system: &BaseSystem,
    perms: &DigitPermutationFamily,
    start: i64,
    count: u64,
) -> Result<PointSet> {
    if perms.tables.len() != system.dim() {
        return Err(Error::invalid("permutation family does not match system"));
    }
    end_index(start, count)?;
    let depths: Vec<u32> = system
        .bases()
        .iter()
        .map(|&p| radix::default_depth(p))
        .collect();
    let mut data = Vec::with_capacity(count as usize * system.dim());
    for k in 0..count as i64 {
        let n = start + k;
        for (i, (&p, &depth)) in system.bases().iter().zip(&depths).enumerate() {
            let mut dv = radix::digits(n, p, depth);
            for (j, digit) in dv.digits.iter_mut().enumerate() {
                *digit = perms.apply(i, j as u32 + 1, *digit);
            }
            data.push(radix::radical_value(&dv));
        }
    }
    PointSet::from_parts(
        system.dim(),
        data,
        Provenance {
            variant: Variant::GeneralizedHalton,
            bases: system.bases().to_vec(),
            start,
            count,
            permutation: Some(perms.label.clone()),
            seed: perms.seed,
        },
    )
}

/// Builds the named variant from a provenance record; the inverse of
/// generation for everything except custom permutation tables.
pub fn regenerate(provenance: &Provenance) -> Result<PointSet> {
    let system = BaseSystem::new(provenance.bases.clone())?;
    match provenance.variant {
        Variant::Halton => halton(&system, provenance.start, provenance.count),
        Variant::Hammersley => hammersley(&system, provenance.count),
        Variant::HammersleySym => hammersley_sym(&system, provenance.count),
        Variant::HammersleySymDot => hammersley_sym_dot(&system, provenance.count),
        Variant::GeneralizedHalton => {
            let perms = match (provenance.permutation.as_deref(), provenance.seed) {
                (Some("identity") | None, _) => DigitPermutationFamily::identity(&system),
                (Some("seeded"), Some(seed)) => DigitPermutationFamily::seeded(&system, seed),
                _ => {
                    return Err(Error::invalid(
                        "cannot regenerate a custom permutation family from provenance",
                    ))
                }
            };
            generalized_halton(&system, &perms, provenance.start, provenance.count)
        }
    }
}
