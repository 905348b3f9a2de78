//! Integer-scaled scan kernels.
//!
//! The pair and triple scans dominate the runtime of validation,
//! certification, and norm computation. Distances are rescaled once per
//! space by the least common multiple of their denominators (cached on
//! the space); function values are rescaled per call by their own lcm.
//! Every inequality the kernels decide is then a cross-multiplied integer
//! comparison in which the two lcms cancel or appear once per pair.
//!
//! When the lcms and every scaled magnitude stay below 2^50 (and the
//! family has at most 512 members) the scans run on native i64/i128
//! arithmetic, which is still exact: all products of the gated operands
//! fit i128 with room to spare. Otherwise the same scans run on BigInt.
//!
//! Each kernel has a sequential form and, with the `parallel` feature, a
//! rayon form with a deterministic reduction (first hit in canonical
//! order, or an order-insensitive maximum). The dispatchers pick the
//! parallel form when available.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::lip::LipschitzFunction;
use crate::metric::FiniteMetricSpace;
use crate::rat::{denominator_lcm, scale_to_int, Rat};

/// Magnitude gate for the native-integer path: scaled entries must leave
/// one bit of headroom so pairwise sums stay in i64; all larger products
/// are certified against i128 overflow before the path is taken.
pub(crate) const MAX_SMALL: i64 = (1 << 62) - 1;

#[inline]
fn fits(a: i128, b: i128) -> Option<i128> {
    a.checked_mul(b)
}

#[inline]
pub(crate) fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

/// A space's distance triangle on the integer lattice of its own lcm.
#[derive(Debug, Clone)]
pub(crate) enum SpaceScale {
    Small { denom: i64, tri: Arc<Vec<i64>>, max_entry: i64 },
    Big { denom: BigInt, tri: Arc<Vec<BigInt>> },
}

pub(crate) fn scale_space(space: &FiniteMetricSpace) -> SpaceScale {
    let lcm = denominator_lcm(space.tri_slice().iter());
    let big: Vec<BigInt> = space
        .tri_slice()
        .iter()
        .map(|x| scale_to_int(x, &lcm))
        .collect();
    let fits = lcm
        .to_i64()
        .filter(|d| *d <= MAX_SMALL)
        .and_then(|d| {
            big.iter()
                .map(|x| x.to_i64().filter(|v| v.abs() <= MAX_SMALL))
                .collect::<Option<Vec<i64>>>()
                .map(|tri| (d, tri))
        });
    match fits {
        Some((denom, tri)) => {
            let max_entry = tri.iter().copied().max().unwrap_or(0);
            SpaceScale::Small { denom, tri: Arc::new(tri), max_entry }
        }
        None => SpaceScale::Big { denom: lcm, tri: Arc::new(big) },
    }
}

/// Function values on the integer lattice of their own lcm, paired with
/// the space triangle. The two denominators appear explicitly in the
/// pairwise bound and cancel in cross-pair ratio comparisons.
pub(crate) enum ScanData {
    Small {
        tri: Arc<Vec<i64>>,
        dist_denom: i64,
        values: Vec<Vec<i64>>,
        val_denom: i64,
        n: usize,
    },
    Big {
        tri: Arc<Vec<BigInt>>,
        dist_denom: BigInt,
        values: Vec<Vec<BigInt>>,
        val_denom: BigInt,
        n: usize,
    },
}

impl ScanData {
    pub fn new(space: &FiniteMetricSpace, functions: &[&LipschitzFunction]) -> Self {
        let n = space.len();
        let val_lcm = denominator_lcm(functions.iter().flat_map(|f| f.values().iter()));
        let vals_big: Vec<Vec<BigInt>> = functions
            .iter()
            .map(|f| f.values().iter().map(|x| scale_to_int(x, &val_lcm)).collect())
            .collect();
        let vals_small = val_lcm.to_i64().filter(|d| *d <= MAX_SMALL).and_then(|d| {
            vals_big
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|x| x.to_i64().filter(|v| v.abs() <= MAX_SMALL))
                        .collect::<Option<Vec<i64>>>()
                })
                .collect::<Option<Vec<Vec<i64>>>>()
                .map(|values| (d, values))
        });
        match (space.space_scale(), vals_small) {
            (SpaceScale::Small { denom, tri, max_entry }, Some((val_denom, values)))
                if small_products_fit(
                    *max_entry,
                    *denom,
                    val_denom,
                    &values,
                    functions.len(),
                ) =>
            {
                ScanData::Small {
                    tri: Arc::clone(tri),
                    dist_denom: *denom,
                    values,
                    val_denom,
                    n,
                }
            }
            (SpaceScale::Big { denom, tri }, _) => ScanData::Big {
                tri: Arc::clone(tri),
                dist_denom: denom.clone(),
                values: vals_big,
                val_denom: val_lcm,
                n,
            },
            (SpaceScale::Small { denom, tri, .. }, _) => ScanData::Big {
                tri: Arc::new(tri.iter().map(|&x| BigInt::from(x)).collect()),
                dist_denom: BigInt::from(*denom),
                values: vals_big,
                val_denom: val_lcm,
                n,
            },
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ScanData::Small { n, .. } | ScanData::Big { n, .. } => *n,
        }
    }
}

/// Certifies every i128 product the small kernels form: pair-ratio cross
/// comparisons, member-summed oscillations against the distance bound,
/// and the two lcm cross terms.
fn small_products_fit(
    max_dist: i64,
    dist_denom: i64,
    val_denom: i64,
    values: &[Vec<i64>],
    members: usize,
) -> bool {
    let max_val: i128 = values
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| (*v as i128).abs())
        .max()
        .unwrap_or(0);
    let diff_cap = 2 * max_val + 1;
    let sum_cap = match fits(diff_cap, members.max(1) as i128) {
        Some(s) => s,
        None => return false,
    };
    fits(diff_cap, max_dist as i128).is_some()
        && fits(sum_cap, dist_denom as i128).is_some()
        && fits(max_dist as i128, val_denom as i128).is_some()
}

/// Maximum of |v[i] - v[j]| / d(i, j) over all pairs as an exact rational,
/// plus every attaining pair in canonical order. `None` on spaces with
/// fewer than two points.
pub(crate) fn max_ratio_with_witnesses(
    data: &ScanData,
    member: usize,
) -> Option<(Rat, Vec<(usize, usize)>)> {
    if data.n() < 2 {
        return None;
    }
    match data {
        ScanData::Small { tri, dist_denom, values, val_denom, n } => {
            let vals = &values[member];
            let best = {
                #[cfg(feature = "parallel")]
                {
                    kernels::max_ratio_par_i64(tri, vals, *n)
                }
                #[cfg(not(feature = "parallel"))]
                {
                    kernels::max_ratio_seq_i64(tri, vals, *n)
                }
            };
            let (bn, bd) = best;
            let mut witnesses = Vec::new();
            for i in 1..*n {
                for j in 0..i {
                    let diff = (vals[i] - vals[j]).abs() as i128;
                    let d = tri[tri_index(i, j)] as i128;
                    if diff * bd == bn * d {
                        witnesses.push((j, i));
                    }
                }
            }
            // ratio = (diff / val_denom) / (d / dist_denom)
            let ratio = Rat::new(
                BigInt::from(bn) * BigInt::from(*dist_denom),
                BigInt::from(bd) * BigInt::from(*val_denom),
            );
            Some((ratio, witnesses))
        }
        ScanData::Big { tri, dist_denom, values, val_denom, n } => {
            let vals = &values[member];
            let best = {
                #[cfg(feature = "parallel")]
                {
                    kernels::max_ratio_par(tri, vals, *n)
                }
                #[cfg(not(feature = "parallel"))]
                {
                    kernels::max_ratio_seq(tri, vals, *n)
                }
            };
            let (bn, bd) = best;
            let mut witnesses = Vec::new();
            for i in 1..*n {
                for j in 0..i {
                    let diff = (&vals[i] - &vals[j]).abs();
                    let d = &tri[tri_index(i, j)];
                    if diff * &bd == &bn * d {
                        witnesses.push((j, i));
                    }
                }
            }
            let ratio = Rat::new(bn * dist_denom, bd * val_denom);
            Some((ratio, witnesses))
        }
    }
}

/// Maximum pair ratio without witness collection.
pub(crate) fn max_ratio_only(data: &ScanData, member: usize) -> Option<Rat> {
    if data.n() < 2 {
        return None;
    }
    match data {
        ScanData::Small { tri, dist_denom, values, val_denom, n } => {
            let (bn, bd) = {
                #[cfg(feature = "parallel")]
                {
                    kernels::max_ratio_par_i64(tri, &values[member], *n)
                }
                #[cfg(not(feature = "parallel"))]
                {
                    kernels::max_ratio_seq_i64(tri, &values[member], *n)
                }
            };
            Some(Rat::new(
                BigInt::from(bn) * BigInt::from(*dist_denom),
                BigInt::from(bd) * BigInt::from(*val_denom),
            ))
        }
        ScanData::Big { tri, dist_denom, values, val_denom, n } => {
            let (bn, bd) = {
                #[cfg(feature = "parallel")]
                {
                    kernels::max_ratio_par(tri, &values[member], *n)
                }
                #[cfg(not(feature = "parallel"))]
                {
                    kernels::max_ratio_seq(tri, &values[member], *n)
                }
            };
            Some(Rat::new(bn * dist_denom, bd * val_denom))
        }
    }
}

/// First pair (canonical order) where sum_i |f_i(p) - f_i(q)| exceeds
/// d(p, q), with the exact rational excess. `None` when the pairwise
/// bound holds everywhere.
pub(crate) fn first_pairwise_excess(data: &ScanData) -> Option<((usize, usize), Rat)> {
    match data {
        ScanData::Small { tri, dist_denom, values, val_denom, n } => {
            let hit = {
                #[cfg(feature = "parallel")]
                {
                    kernels::pairwise_excess_par_i64(tri, values, *dist_denom, *val_denom, *n)
                }
                #[cfg(not(feature = "parallel"))]
                {
                    kernels::pairwise_excess_seq_i64(tri, values, *dist_denom, *val_denom, *n)
                }
            };
            hit.map(|((j, i), sum)| {
                // excess = sum/val_denom - d/dist_denom
                let d = tri[tri_index(i, j)] as i128;
                let num = BigInt::from(sum) * BigInt::from(*dist_denom)
                    - BigInt::from(d) * BigInt::from(*val_denom);
                let den = BigInt::from(*val_denom) * BigInt::from(*dist_denom);
                ((j, i), Rat::new(num, den))
            })
        }
        ScanData::Big { tri, dist_denom, values, val_denom, n } => {
            let hit = {
                #[cfg(feature = "parallel")]
                {
                    kernels::pairwise_excess_par(tri, values, dist_denom, val_denom, *n)
                }
                #[cfg(not(feature = "parallel"))]
                {
                    kernels::pairwise_excess_seq(tri, values, dist_denom, val_denom, *n)
                }
            };
            hit.map(|((j, i), sum)| {
                let d = &tri[tri_index(i, j)];
                let num = sum * dist_denom - d * val_denom;
                let den = val_denom * dist_denom;
                ((j, i), Rat::new(num, den))
            })
        }
    }
}

/// Scan kernels, exposed for the benchmark suite. The `_seq` and `_par`
/// forms compute identical results.
#[doc(hidden)]
pub mod kernels {
    use super::*;
    #[cfg(feature = "parallel")]
    use rayon::prelude::*;

    /// Sequential triangle scan on a full scaled matrix. Returns violating
    /// triples (i, j, k), i < k, j the middle point, canonical order.
    pub fn triangle_violations_seq(scaled: &[Vec<BigInt>]) -> Vec<(usize, usize, usize)> {
        if let Some(small) = small_matrix(scaled) {
            return triangle_seq_i64(&small);
        }
        let n = scaled.len();
        let mut out = Vec::new();
        let mut sum = BigInt::zero();
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in (i + 1)..n {
                    if k == j {
                        continue;
                    }
                    sum.clone_from(&scaled[i][j]);
                    sum += &scaled[j][k];
                    if scaled[i][k] > sum {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Parallel triangle scan; same output as the sequential form.
    #[cfg(feature = "parallel")]
    pub fn triangle_violations_par(scaled: &[Vec<BigInt>]) -> Vec<(usize, usize, usize)> {
        if let Some(small) = small_matrix(scaled) {
            let n = small.len();
            let mut out: Vec<(usize, usize, usize)> = (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let small = &small;
                    let mut local = Vec::new();
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        for k in (i + 1)..n {
                            if k == j {
                                continue;
                            }
                            if small[i][k] > small[i][j] + small[j][k] {
                                local.push((i, j, k));
                            }
                        }
                    }
                    local
                })
                .collect();
            out.sort_unstable();
            return out;
        }
        let n = scaled.len();
        let mut out: Vec<(usize, usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut local = Vec::new();
                let mut sum = BigInt::zero();
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    for k in (i + 1)..n {
                        if k == j {
                            continue;
                        }
                        sum.clone_from(&scaled[i][j]);
                        sum += &scaled[j][k];
                        if scaled[i][k] > sum {
                            local.push((i, j, k));
                        }
                    }
                }
                local
            })
            .collect();
        out.sort_unstable();
        out
    }

    fn small_matrix(scaled: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
        scaled
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| x.to_i64().filter(|v| v.abs() <= MAX_SMALL))
                    .collect::<Option<Vec<i64>>>()
            })
            .collect()
    }

    fn triangle_seq_i64(m: &[Vec<i64>]) -> Vec<(usize, usize, usize)> {
        let n = m.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                for k in (i + 1)..n {
                    if k == j {
                        continue;
                    }
                    if m[i][k] > m[i][j] + m[j][k] {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[inline]
    fn row_max(tri: &[BigInt], vals: &[BigInt], i: usize) -> (BigInt, BigInt) {
        let mut bn = BigInt::zero();
        let mut bd = BigInt::from(1u8);
        for j in 0..i {
            let diff = (&vals[i] - &vals[j]).abs();
            let d = &tri[tri_index(i, j)];
            if &diff * &bd > &bn * d {
                bn = diff;
                bd = d.clone();
            }
        }
        (bn, bd)
    }

    pub fn max_ratio_seq(tri: &[BigInt], vals: &[BigInt], n: usize) -> (BigInt, BigInt) {
        let mut best = (BigInt::zero(), BigInt::from(1u8));
        for i in 1..n {
            let (rn, rd) = row_max(tri, vals, i);
            if &rn * &best.1 > &best.0 * &rd {
                best = (rn, rd);
            }
        }
        best
    }

    #[cfg(feature = "parallel")]
    pub fn max_ratio_par(tri: &[BigInt], vals: &[BigInt], n: usize) -> (BigInt, BigInt) {
        (1..n)
            .into_par_iter()
            .map(|i| row_max(tri, vals, i))
            .reduce(
                || (BigInt::zero(), BigInt::from(1u8)),
                |a, b| {
                    if &b.0 * &a.1 > &a.0 * &b.1 {
                        b
                    } else {
                        a
                    }
                },
            )
    }

    #[inline]
    fn row_max_i64(tri: &[i64], vals: &[i64], i: usize) -> (i128, i128) {
        let mut bn: i128 = 0;
        let mut bd: i128 = 1;
        for j in 0..i {
            let diff = (vals[i] - vals[j]).abs() as i128;
            let d = tri[tri_index(i, j)] as i128;
            if diff * bd > bn * d {
                bn = diff;
                bd = d;
            }
        }
        (bn, bd)
    }

    pub fn max_ratio_seq_i64(tri: &[i64], vals: &[i64], n: usize) -> (i128, i128) {
        let mut best: (i128, i128) = (0, 1);
        for i in 1..n {
            let (rn, rd) = row_max_i64(tri, vals, i);
            if rn * best.1 > best.0 * rd {
                best = (rn, rd);
            }
        }
        best
    }

    #[cfg(feature = "parallel")]
    pub fn max_ratio_par_i64(tri: &[i64], vals: &[i64], n: usize) -> (i128, i128) {
        (1..n)
            .into_par_iter()
            .map(|i| row_max_i64(tri, vals, i))
            .reduce(|| (0, 1), |a, b| if b.0 * a.1 > a.0 * b.1 { b } else { a })
    }

    #[inline]
    fn row_excess(
        tri: &[BigInt],
        values: &[Vec<BigInt>],
        dist_denom: &BigInt,
        val_denom: &BigInt,
        i: usize,
    ) -> Option<((usize, usize), BigInt)> {
        let mut diff = BigInt::zero();
        for j in 0..i {
            let bound = &tri[tri_index(i, j)] * val_denom;
            let mut sum = BigInt::zero();
            let mut over = false;
            for vals in values {
                diff.clone_from(&vals[i]);
                diff -= &vals[j];
                if diff.is_negative() {
                    sum -= &diff;
                } else {
                    sum += &diff;
                }
                if &sum * dist_denom > bound {
                    over = true;
                    break;
                }
            }
            if over {
                let mut sum = BigInt::zero();
                for vals in values {
                    sum += (&vals[i] - &vals[j]).abs();
                }
                return Some(((j, i), sum));
            }
        }
        None
    }

    pub fn pairwise_excess_seq(
        tri: &[BigInt],
        values: &[Vec<BigInt>],
        dist_denom: &BigInt,
        val_denom: &BigInt,
        n: usize,
    ) -> Option<((usize, usize), BigInt)> {
        (1..n).find_map(|i| row_excess(tri, values, dist_denom, val_denom, i))
    }

    #[cfg(feature = "parallel")]
    pub fn pairwise_excess_par(
        tri: &[BigInt],
        values: &[Vec<BigInt>],
        dist_denom: &BigInt,
        val_denom: &BigInt,
        n: usize,
    ) -> Option<((usize, usize), BigInt)> {
        (1..n)
            .into_par_iter()
            .filter_map(|i| row_excess(tri, values, dist_denom, val_denom, i))
            .min_by_key(|&((j, i), _)| (i, j))
    }

    #[inline]
    fn row_excess_i64(
        tri: &[i64],
        values: &[Vec<i64>],
        dist_denom: i64,
        val_denom: i64,
        i: usize,
    ) -> Option<((usize, usize), i128)> {
        for j in 0..i {
            let bound = tri[tri_index(i, j)] as i128 * val_denom as i128;
            let mut sum: i128 = 0;
            for vals in values {
                sum += (vals[i] - vals[j]).abs() as i128;
            }
            if sum * dist_denom as i128 > bound {
                return Some(((j, i), sum));
            }
        }
        None
    }

    pub fn pairwise_excess_seq_i64(
        tri: &[i64],
        values: &[Vec<i64>],
        dist_denom: i64,
        val_denom: i64,
        n: usize,
    ) -> Option<((usize, usize), i128)> {
        (1..n).find_map(|i| row_excess_i64(tri, values, dist_denom, val_denom, i))
    }

    #[cfg(feature = "parallel")]
    pub fn pairwise_excess_par_i64(
        tri: &[i64],
        values: &[Vec<i64>],
        dist_denom: i64,
        val_denom: i64,
        n: usize,
    ) -> Option<((usize, usize), i128)> {
        (1..n)
            .into_par_iter()
            .filter_map(|i| row_excess_i64(tri, values, dist_denom, val_denom, i))
            .min_by_key(|&((j, i), _)| (i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::SpaceGenerator;
    use crate::rat::rat;

    #[test]
    fn scaled_view_preserves_ratios() {
        let space = SpaceGenerator::ud_counterexample().truncate(4).unwrap().arc();
        let f = LipschitzFunction::new(
            Arc::clone(&space),
            "f",
            vec![rat(0, 1), rat(3, 2), rat(3, 4), rat(3, 4)],
        )
        .unwrap();
        let data = ScanData::new(&space, &[&f]);
        assert!(matches!(data, ScanData::Small { .. }));
        let (ratio, wits) = max_ratio_with_witnesses(&data, 0).unwrap();
        assert_eq!(ratio, rat(1, 1));
        assert_eq!(wits, vec![(0, 1)]);
    }

    /// The deep triple-cluster truncation needs denominators around
    /// 16^-60: the big path must agree with the small path near the gate.
    #[test]
    fn big_path_matches_small_path() {
        let shallow = SpaceGenerator::triple_cluster().truncate(7).unwrap().arc();
        assert!(matches!(shallow.space_scale(), SpaceScale::Small { .. }));
        let deep = SpaceGenerator::triple_cluster().truncate(55).unwrap().arc();
        assert!(matches!(deep.space_scale(), SpaceScale::Big { .. }));
        for space in [shallow, deep] {
            let n = space.len();
            let mut vals = vec![Rat::zero(); n];
            vals[1] = space.dist(1, 2).clone();
            let f = LipschitzFunction::new(Arc::clone(&space), "f", vals).unwrap();
            let data = ScanData::new(&space, &[&f]);
            let (ratio, wits) = max_ratio_with_witnesses(&data, 0).unwrap();
            assert_eq!(ratio, rat(1, 1));
            assert_eq!(wits[0], (1, 2));
        }
    }

    #[test]
    fn seq_and_par_triangle_agree() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(12)
            .unwrap();
        let raw = space.to_raw();
        let lcm = crate::rat::denominator_lcm(raw.dist.iter().flatten());
        let scaled: Vec<Vec<BigInt>> = raw
            .dist
            .iter()
            .map(|r| r.iter().map(|x| crate::rat::scale_to_int(x, &lcm)).collect())
            .collect();
        let seq = kernels::triangle_violations_seq(&scaled);
        assert!(seq.is_empty());
        #[cfg(feature = "parallel")]
        assert_eq!(seq, kernels::triangle_violations_par(&scaled));
    }
}
