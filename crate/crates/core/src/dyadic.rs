//! Truncated dyadic group: points, dyadic intervals and binary expansions of
//! indices.
//!
//! A point at resolution `N` is a bit string `(x_0, …, x_{N-1})`. Cells are
//! numbered with `x_0` as the most significant bit, so the rank-`n`
//! interval containing a point is a contiguous slice of cells.

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{DslabError, Result};

/// Largest supported resolution. `2^30` cells is already far past what the
/// exact experiments can touch.
pub const MAX_RESOLUTION: u32 = 30;

pub(crate) fn check_resolution(n: u32) -> Result<()> {
    if n > MAX_RESOLUTION {
        return Err(DslabError::resolution(
            "sampling",
            n,
            MAX_RESOLUTION,
        ));
    }
    Ok(())
}

/// `|n| = max{j : n_j ≠ 0}`, so that `2^{|n|} ≤ n < 2^{|n|+1}`.
pub fn bit_length(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(DslabError::domain("|0| is undefined"));
    }
    Ok(63 - n.leading_zeros())
}

/// Point of `G` truncated to `resolution` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicPoint {
    resolution: u32,
    cell: u64,
}

impl DyadicPoint {
    pub fn from_cell(cell: u64, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        if cell >> resolution != 0 {
            return Err(DslabError::domain(format!(
                "cell {cell} out of range for resolution {resolution}"
            )));
        }
        Ok(DyadicPoint { resolution, cell })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let resolution = bits.len() as u32;
        check_resolution(resolution)?;
        let mut cell = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(DslabError::domain("coordinates must be 0 or 1"));
            }
            cell = (cell << 1) | b as u64;
        }
        Ok(DyadicPoint { resolution, cell })
    }

    /// The zero element of the group.
    pub fn zero(resolution: u32) -> Result<Self> {
        DyadicPoint::from_cell(0, resolution)
    }

    /// `e_k`: the point with a single 1 in coordinate `k`.
    pub fn unit(k: u32, resolution: u32) -> Result<Self> {
        if k >= resolution {
            return Err(DslabError::resolution(format!("e_{k}"), k + 1, resolution));
        }
        DyadicPoint::from_cell(1 << (resolution - 1 - k), resolution)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cell(&self) -> u64 {
        self.cell
    }

    /// Coordinate `x_k`, or `None` past the resolution.
    pub fn bit(&self, k: u32) -> Option<u8> {
        (k < self.resolution).then(|| ((self.cell >> (self.resolution - 1 - k)) & 1) as u8)
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.resolution).map(|k| self.bit(k).unwrap()).collect()
    }

    /// Group operation (coordinatewise addition mod 2).
    pub fn add(&self, other: &DyadicPoint) -> Result<DyadicPoint> {
        if self.resolution != other.resolution {
            return Err(DslabError::domain("points at different resolutions"));
        }
        Ok(DyadicPoint {
            resolution: self.resolution,
            cell: self.cell ^ other.cell,
        })
    }
}

/// `I_n(x)`: points sharing their first `rank` coordinates with the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    rank: u32,
    /// The prefix `(x_0, …, x_{rank-1})` read as an integer, `x_0` first.
    prefix: u64,
}

impl DyadicInterval {
    /// The whole group, `I_0`.
    pub fn whole() -> Self {
        DyadicInterval { rank: 0, prefix: 0 }
    }

    pub fn new(rank: u32, prefix: u64) -> Result<Self> {
        check_resolution(rank)?;
        if prefix >> rank != 0 {
            return Err(DslabError::domain(format!(
                "prefix {prefix} does not fit rank {rank}"
            )));
        }
        Ok(DyadicInterval { rank, prefix })
    }

    /// `I_rank(x)`.
    pub fn containing(x: &DyadicPoint, rank: u32) -> Result<Self> {
        if rank > x.resolution() {
            return Err(DslabError::resolution("interval rank", rank, x.resolution()));
        }
        Ok(DyadicInterval {
            rank,
            prefix: x.cell() >> (x.resolution() - rank),
        })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn prefix(&self) -> u64 {
        self.prefix
    }

    /// `μ(I) = 2^{-rank}`.
    pub fn measure(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.rank as usize)
    }

    /// The sub-interval of rank `rank + 1` selected by `bit`.
    pub fn child(&self, bit: u8) -> Result<Self> {
        DyadicInterval::new(self.rank + 1, (self.prefix << 1) | (bit as u64 & 1))
    }

    pub fn contains(&self, x: &DyadicPoint) -> bool {
        self.rank <= x.resolution() && x.cell() >> (x.resolution() - self.rank) == self.prefix
    }

    /// Cell indices at resolution `resolution` lying in the interval.
    pub fn cells(&self, resolution: u32) -> Result<Range<usize>> {
        if self.rank > resolution {
            return Err(DslabError::resolution("interval rank", self.rank, resolution));
        }
        check_resolution(resolution)?;
        let width = 1usize << (resolution - self.rank);
        let start = (self.prefix as usize) * width;
        Ok(start..start + width)
    }
}

/// `interval_cells`: contiguous cell range of `I` at resolution `n`.
pub fn interval_cells(interval: &DyadicInterval, resolution: u32) -> Result<Range<usize>> {
    interval.cells(resolution)
}

/// Binary expansion of a positive index together with the descending
/// power-of-two decomposition `n = 2^{n_1} + … + 2^{n_r}` and its tails
/// `n^{(k)} = 2^{n_{k+1}} + … + 2^{n_r}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexExpansion {
    pub n: u64,
    /// `n_i`, least significant first.
    pub digits: Vec<u8>,
    /// `|n|`.
    pub top: u32,
    /// `n_1 > n_2 > … > n_r`.
    pub exponents: Vec<u32>,
    /// `tails[k] = n^{(k)}` for `k = 0..=r`; `tails[0] = n`, `tails[r] = 0`.
    pub tails: Vec<u64>,
}

impl IndexExpansion {
    /// `n^{(k)}`.
    pub fn tail(&self, k: usize) -> Option<u64> {
        self.tails.get(k).copied()
    }
}

pub fn decompose(n: u64) -> Result<IndexExpansion> {
    let top = bit_length(n)?;
    let digits: Vec<u8> = (0..=top).map(|i| ((n >> i) & 1) as u8).collect();
    let exponents: Vec<u32> = (0..=top).rev().filter(|&i| (n >> i) & 1 == 1).collect();
    let mut tails = Vec::with_capacity(exponents.len() + 1);
    let mut rest = n;
    tails.push(rest);
    for &e in &exponents {
        rest -= 1 << e;
        tails.push(rest);
    }
    Ok(IndexExpansion {
        n,
        digits,
        top,
        exponents,
        tails,
    })
}
