//! Greedy randomized half-covers of the unit sphere and of its 2s-sparse
//! subset.

use std::io::{Read, Write};

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric::{rng_from_seed, Rng};

/// Radius every direction of the sphere must be within.
pub const COVER_RADIUS: f64 = 0.5;
/// Radius used while building. The gap to [`COVER_RADIUS`] keeps the
/// probe-certified cover valid at 1/2 with a wide margin.
pub const BUILD_RADIUS: f64 = 0.45;
/// Consecutive covered probes that end the greedy construction.
pub const STOP_PROBES: usize = 100_000;
/// Largest dimension for dense covers (|cover| grows like 5^p).
pub const MAX_DENSE_DIM: usize = 12;
/// Largest number of sparse supports, C(p, 2s).
pub const MAX_SPARSE_SUPPORTS: u128 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CoverSet {
    pub directions: Vec<Vec<f64>>,
    pub covering_radius: f64,
    /// Support size `2s` when the cover targets 2s-sparse unit vectors.
    pub sparsity: Option<usize>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl CoverSet {
    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    fn nearest_within(&self, probe: &[f64], radius: f64) -> bool {
        self.directions.iter().any(|d| linalg::distance(d, probe) <= radius)
    }

    /// Largest distance from `probes` random unit vectors (2s-sparse when the
    /// cover is sparse) to their nearest cover direction.
    pub fn probe_radius(&self, probes: usize, seed: u64) -> f64 {
        let p = self.dim();
        let mut rng = rng_from_seed(seed);
        (0..probes)
            .map(|_| {
                let probe = random_direction(p, self.sparsity, &mut rng);
                self.directions
                    .iter()
                    .map(|d| linalg::distance(d, &probe))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Unit norm, support size and probe coverage checks.
    pub fn certify(&self, probes: usize, seed: u64) -> Result<f64> {
        for d in &self.directions {
            if (linalg::norm(d) - 1.0).abs() > 1e-12 {
                return Err(Error::arg("cover direction is not unit norm"));
            }
            if let Some(k) = self.sparsity {
                if d.iter().filter(|&&x| x != 0.0).count() > k {
                    return Err(Error::arg(format!("cover direction has more than {k} nonzeros")));
                }
            }
        }
        let r = self.probe_radius(probes, seed);
        if r > self.covering_radius + 1e-9 {
            return Err(Error::arg(format!("probe at distance {r} from the cover")));
        }
        Ok(r)
    }

    /// One direction per row, no header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for d in &self.directions {
            w.write_record(d.iter().map(|x| format!("{x:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a cover written by [`CoverSet::write_csv`]; rows are renormalized.
    pub fn read_csv<R: Read>(input: R, sparsity: Option<usize>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
        let mut directions = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut d = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::arg(format!("bad cover entry {f:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if linalg::norm(&d) == 0.0 {
                return Err(Error::arg("zero direction in cover file"));
            }
            linalg::normalize(&mut d);
            directions.push(d);
        }
        if directions.is_empty() {
            return Err(Error::arg("empty cover file"));
        }
        let p = directions[0].len();
        if directions.iter().any(|d| d.len() != p) {
            return Err(Error::arg("cover rows have differing lengths"));
        }
        Ok(Self { directions, covering_radius: COVER_RADIUS, sparsity })
    }
}

fn random_direction(p: usize, support: Option<usize>, rng: &mut Rng) -> Vec<f64> {
    let mut v = vec![0.0; p];
    loop {
        match support {
            Some(k) if k < p => {
                for i in sample_indices(rng, p, k) {
                    v[i] = rng.sample(StandardNormal);
                }
            }
            _ => v.iter_mut().for_each(|x| *x = rng.sample(StandardNormal)),
        }
        let n = linalg::norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
        v.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Builds a half-cover of `S^{p−1}`, or of its 2s-sparse unit vectors when
/// `sparsity = Some(s)`.
///
/// Starts from the anchors `±e_i`, then repeatedly draws random (sparse) unit
/// probes and keeps any probe farther than [`BUILD_RADIUS`] from every kept
/// direction, until [`STOP_PROBES`] consecutive probes are covered.
pub fn build_half_cover(p: usize, sparsity: Option<usize>, seed: u64) -> Result<CoverSet> {
    if p == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    let support = match sparsity {
        Some(s) => {
            if s == 0 || 2 * s > p {
                return Err(Error::arg(format!("sparsity s = {s} must satisfy 1 ≤ s ≤ p/2 = {}", p / 2)));
            }
            if binomial(p, 2 * s) > MAX_SPARSE_SUPPORTS {
                return Err(Error::arg(format!(
                    "C({p}, {}) supports exceed the limit of {MAX_SPARSE_SUPPORTS}",
                    2 * s
                )));
            }
            Some(2 * s)
        }
        None => {
            if p > MAX_DENSE_DIM {
                return Err(Error::arg(format!("dense covers are limited to p ≤ {MAX_DENSE_DIM}, got {p}")));
            }
            None
        }
    };

    let mut cover = CoverSet { directions: Vec::new(), covering_radius: COVER_RADIUS, sparsity: support };
    for i in 0..p {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; p];
            e[i] = sign;
            cover.directions.push(e);
        }
    }
    if p == 1 {
        return Ok(cover);
    }

    let mut rng = rng_from_seed(seed);
    let mut streak = 0;
    while streak < STOP_PROBES {
        let probe = random_direction(p, support, &mut rng);
        if cover.nearest_within(&probe, BUILD_RADIUS) {
            streak += 1;
        } else {
            cover.directions.push(probe);
            streak = 0;
        }
    }
    Ok(cover)
}
