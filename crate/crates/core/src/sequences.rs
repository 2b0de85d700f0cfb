//! Deterministic low-discrepancy point sets (Halton, Sobol) and the seeded
//! pseudo-random baseline.
//!
//! All generators start at index 1, so the origin is never emitted. Every
//! coordinate lies in `[0, 1)`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported dimension for the QMC generators.
pub const MAX_QMC_DIM: usize = 16;

/// Largest Sobol point count (indices `1..=2^31`).
pub const MAX_SOBOL_POINTS: usize = 1 << 31;

/// Bases used by the Halton generator, one prime per coordinate.
pub const HALTON_BASES: [u32; MAX_QMC_DIM] =
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Identifier of the embedded direction-number table.
pub const SOBOL_TABLE_ID: &str = "new-joe-kuo-6.21201 (d<=16)";

/// Name of the pseudo-random generator behind [`uniform_random`].
pub const PRNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

const SOBOL_TABLE: &str = include_str!("../data/new-joe-kuo-6.16.txt");
const SOBOL_BITS: usize = 32;

/// Where a point set came from, with the parameters needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    Halton { bases: Vec<u32> },
    Sobol { table: String },
    UniformPrng { seed: u64, generator: String },
    Explicit,
}

/// Generator family selectable from the command line and experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Halton,
    Sobol,
    Uniform,
}

impl SequenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SequenceKind::Halton => "halton",
            SequenceKind::Sobol => "sobol",
            SequenceKind::Uniform => "uniform",
        }
    }

    /// `true` for the deterministic low-discrepancy kinds.
    pub fn is_qmc(self) -> bool {
        !matches!(self, SequenceKind::Uniform)
    }

    /// Generates `n` points in dimension `dim`. `seed` is only used by
    /// [`SequenceKind::Uniform`].
    pub fn generate(self, n: usize, dim: usize, seed: u64) -> Result<PointSet> {
        match self {
            SequenceKind::Halton => halton(n, dim),
            SequenceKind::Sobol => sobol(n, dim),
            SequenceKind::Uniform => uniform_random(n, dim, seed),
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "halton" => Ok(SequenceKind::Halton),
            "sobol" => Ok(SequenceKind::Sobol),
            "uniform" => Ok(SequenceKind::Uniform),
            other => Err(Error::Parse(format!("unknown sequence kind `{other}`"))),
        }
    }
}

/// An immutable ordered set of `n` points in `[0,1)^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    source: Source,
}

impl PointSet {
    /// Wraps caller-supplied coordinates (row-major, `dim` per point).
    pub fn explicit(dim: usize, coords: Vec<f64>) -> Result<Self> {
        Self::checked(dim, coords, Source::Explicit)
    }

    /// Builds an explicit point set from a slice of points.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points
            .first()
            .map(|p| p.as_ref().len())
            .ok_or(Error::EmptyPointSet)?;
        let mut coords = Vec::with_capacity(dim * points.len());
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::InvalidPoints(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::explicit(dim, coords)
    }

    fn checked(dim: usize, coords: Vec<f64>, source: Source) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionOutOfRange {
                dim,
                max: usize::MAX,
            });
        }
        if coords.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidPoints(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !(0.0..1.0).contains(c)) {
            return Err(Error::InvalidPoints(format!(
                "coordinate {} of point {} is {}, outside [0,1)",
                pos % dim,
                pos / dim,
                coords[pos]
            )));
        }
        Ok(PointSet {
            dim,
            coords,
            source,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always `false`; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Row-major coordinate buffer.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Returns the points reordered by `perm` (`perm[i]` is the old index of
    /// the new `i`-th point). The source tag becomes explicit.
    pub fn permuted(&self, perm: &[usize]) -> Result<PointSet> {
        if perm.len() != self.len() {
            return Err(Error::InvalidParameter(
                "permutation length mismatch".into(),
            ));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in perm {
            coords.extend_from_slice(self.point(i));
        }
        Self::explicit(self.dim, coords)
    }

    /// Writes one CSV row per point with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = String::new();
        for p in self.iter() {
            line.clear();
            for (j, c) in p.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{c:.16e}"));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads points written by [`PointSet::write_csv`]. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<PointSet> {
        let mut dim = 0;
        let mut coords = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = parse_f64_list(line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if dim == 0 {
                dim = row.len();
            } else if row.len() != dim {
                return Err(Error::Parse(format!(
                    "line {}: {} columns, expected {dim}",
                    lineno + 1,
                    row.len()
                )));
            }
            coords.extend(row);
        }
        if coords.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        Self::explicit(dim, coords)
    }
}

pub(crate) fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("`{}`: {e}", t.trim()))
        })
        .collect()
}

fn check_qmc_args(n: usize, dim: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if dim == 0 || dim > MAX_QMC_DIM {
        return Err(Error::DimensionOutOfRange {
            dim,
            max: MAX_QMC_DIM,
        });
    }
    Ok(())
}

/// Radical inverse of `index` in `base`, computed by exact integer digit
/// reversal followed by a single division. Exact whenever `base^digits`
/// stays below `2^53`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let base = base as u128;
    let mut reversed = 0u128;
    let mut scale = 1u128;
    while index > 0 {
        let digit = index as u128 % base;
        reversed = reversed * base + digit;
        scale *= base;
        index /= base as u64;
    }
    // both conversions may round for huge indices; keep the result below 1
    (reversed as f64 / scale as f64).min(1.0 - f64::EPSILON / 2.0)
}

/// The first `n` Halton points `h_1, …, h_n` in dimension `dim`.
pub fn halton(n: usize, dim: usize) -> Result<PointSet> {
    check_qmc_args(n, dim)?;
    let bases = &HALTON_BASES[..dim];
    let mut coords = Vec::with_capacity(n * dim);
    for i in 1..=n as u64 {
        coords.extend(bases.iter().map(|&b| radical_inverse(i, b)));
    }
    Ok(PointSet {
        dim,
        coords,
        source: Source::Halton {
            bases: bases.to_vec(),
        },
    })
}

fn sobol_directions() -> &'static [[u32; SOBOL_BITS]] {
    static DIRECTIONS: OnceLock<Vec<[u32; SOBOL_BITS]>> = OnceLock::new();
    DIRECTIONS.get_or_init(|| {
        let mut dirs = Vec::with_capacity(MAX_QMC_DIM);
        let mut first = [0u32; SOBOL_BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (31 - k);
        }
        dirs.push(first);
        for line in SOBOL_TABLE.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().expect("malformed direction-number table"))
                .collect();
            let (s, a, m) = (fields[1] as usize, fields[2], &fields[3..]);
            assert_eq!(m.len(), s, "direction-number row has wrong arity");
            let mut v = [0u32; SOBOL_BITS];
            for k in 0..s {
                v[k] = m[k] << (31 - k);
            }
            for k in s..SOBOL_BITS {
                let mut val = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        val ^= v[k - j];
                    }
                }
                v[k] = val;
            }
            dirs.push(v);
        }
        dirs
    })
}

/// The first `n` points of the unscrambled Sobol sequence (Gray-code order,
/// starting at index 1).
pub fn sobol(n: usize, dim: usize) -> Result<PointSet> {
    check_qmc_args(n, dim)?;
    let dirs = sobol_directions();
    if dim > dirs.len() {
        return Err(Error::DimensionOutOfRange {
            dim,
            max: dirs.len(),
        });
    }
    if n > MAX_SOBOL_POINTS {
        return Err(Error::TooManyPoints {
            n,
            max: MAX_SOBOL_POINTS,
        });
    }
    const SCALE: f64 = 1.0 / 4_294_967_296.0;
    let mut state = vec![0u32; dim];
    let mut coords = Vec::with_capacity(n * dim);
    for i in 1..=n as u64 {
        let bit = i.trailing_zeros() as usize;
        for (x, dir) in state.iter_mut().zip(dirs) {
            *x ^= dir[bit];
            coords.push(*x as f64 * SCALE);
        }
    }
    Ok(PointSet {
        dim,
        coords,
        source: Source::Sobol {
            table: SOBOL_TABLE_ID.to_string(),
        },
    })
}

/// `n` pseudo-random points from a ChaCha8 stream seeded with `seed`.
pub fn uniform_random(n: usize, dim: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if dim == 0 {
        return Err(Error::DimensionOutOfRange {
            dim,
            max: usize::MAX,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    Ok(PointSet {
        dim,
        coords,
        source: Source::UniformPrng {
            seed,
            generator: PRNG_NAME.to_string(),
        },
    })
}
