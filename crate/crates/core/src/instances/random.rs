//! Randomized herringbones. The main path is steered by its offset
//! `x - y`, indexed by anti-diagonal `k = x + y`. Anti-diagonals are grouped
//! into regions of width `sqrt(N)`, each split into sub-regions of width
//! `2 N^(1/4)`. The path enters every region at a random offset in
//! `[-N^(1/4), N^(1/4)]`, holds it up to +-1 by alternating E,N steps, and
//! moves to the next region's offset inside one randomly chosen sub-region.

use num_integer::Roots;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::herringbone::HerringboneInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HerringboneDistributionParams {
    pub n: i64,
    pub seed: u64,
}

impl HerringboneDistributionParams {
    pub fn new(n: i64, seed: u64) -> Self {
        Self { n, seed }
    }

    pub fn band_halfwidth(&self) -> i64 {
        self.n.sqrt().sqrt()
    }

    pub fn region_width(&self) -> i64 {
        self.n.sqrt()
    }

    pub fn subregion_width(&self) -> i64 {
        2 * self.band_halfwidth()
    }
}

/// A half-open range of anti-diagonals `start..end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalRange {
    pub start: i64,
    pub end: i64,
}

impl DiagonalRange {
    pub fn contains(&self, k: i64) -> bool {
        (self.start..self.end).contains(&k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub diagonals: DiagonalRange,
    pub special: DiagonalRange,
    /// Nominal offset the path holds before the special sub-region.
    pub entry_offset: i64,
    /// Nominal offset after it (the next region's entry offset).
    pub exit_offset: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLayout {
    pub regions: Vec<Region>,
}

/// Splits `start..end` into `count` pieces of `width`, the last absorbing
/// the remainder.
fn partition(start: i64, end: i64, width: i64) -> Vec<DiagonalRange> {
    let count = ((end - start) / width).max(1);
    (0..count)
        .map(|i| DiagonalRange {
            start: start + i * width,
            end: if i == count - 1 { end } else { start + (i + 1) * width },
        })
        .collect()
}

pub fn herringbone_random(params: HerringboneDistributionParams) -> Result<HerringboneInstance> {
    herringbone_random_with_layout(params).map(|(inst, _)| inst)
}

pub fn herringbone_random_with_layout(
    params: HerringboneDistributionParams,
) -> Result<(HerringboneInstance, RegionLayout)> {
    let n = params.n;
    if n < 16 {
        return Err(Error::InvalidShape(format!("N = {n} is too small to form regions (need N >= 16)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let b = params.band_halfwidth();
    let (first, last) = (2, 2 * n + 1);
    let region_ranges = partition(first, last, params.region_width());

    let mut offsets = vec![0i64];
    offsets.extend((1..region_ranges.len()).map(|_| rng.gen_range(-b..=b)));
    offsets.push(0);

    let regions: Vec<Region> = region_ranges
        .iter()
        .enumerate()
        .map(|(r, range)| {
            let subs = partition(range.start, range.end, params.subregion_width());
            let special = subs[rng.gen_range(0..subs.len())];
            Region { diagonals: *range, special, entry_offset: offsets[r], exit_offset: offsets[r + 1] }
        })
        .collect();

    let nominal = |k: i64| -> i64 {
        let region = regions.iter().find(|r| r.diagonals.contains(k)).expect("k covered");
        if k < region.special.start {
            region.entry_offset
        } else {
            region.exit_offset
        }
    };

    let mut path = vec![[1, 1]];
    let mut delta = 0i64;
    for k in first + 1..last {
        let nom = nominal(k);
        // Offsets on diagonal k share its parity.
        let target = if (nom - k).rem_euclid(2) == 0 {
            nom
        } else if nom < b {
            nom + 1
        } else {
            nom - 1
        };
        let mut next = if delta < target { delta + 1 } else { delta - 1 };
        let bound = (k - 2).min(2 * n - k);
        if next.abs() > bound {
            next = if next > delta { delta - 1 } else { delta + 1 };
        }
        delta = next;
        path.push([(k + delta) / 2, (k - delta) / 2]);
    }

    let fixed_point = path[rng.gen_range(0..path.len())];
    let mut inst = HerringboneInstance::new(n, path, fixed_point)?;
    inst.seed = Some(params.seed);
    Ok((inst, RegionLayout { regions }))
}

/// A uniformly random monotone path with a uniform fixed point; works for
/// any `N >= 1` and serves grids too small for the region construction.
pub fn random_staircase_herringbone(n: i64, seed: u64) -> Result<HerringboneInstance> {
    if n < 1 {
        return Err(Error::InvalidShape(format!("side {n} < 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps: Vec<bool> = (0..2 * (n - 1)).map(|i| i < n - 1).collect();
    steps.shuffle(&mut rng);
    let mut path = vec![[1, 1]];
    let [mut x, mut y] = [1, 1];
    for east in steps {
        if east {
            x += 1;
        } else {
            y += 1;
        }
        path.push([x, y]);
    }
    let fixed_point = path[rng.gen_range(0..path.len())];
    let mut inst = HerringboneInstance::new(n, path, fixed_point)?;
    inst.seed = Some(seed);
    Ok(inst)
}

/// Draws from [`herringbone_random`] when `N >= 16`, else from
/// [`random_staircase_herringbone`].
pub fn random_herringbone_any(n: i64, seed: u64) -> Result<HerringboneInstance> {
    if n >= 16 {
        herringbone_random(HerringboneDistributionParams::new(n, seed))
    } else {
        random_staircase_herringbone(n, seed)
    }
}
