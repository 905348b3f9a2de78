//! Finite pointed metric spaces with exact rational distances.
//!
//! A [`RawSpace`] is an unvalidated distance matrix as it arrives from a
//! file; [`validate_metric`] checks the metric axioms exactly and reports
//! every violation with a witnessing pair or triple. A
//! [`FiniteMetricSpace`] is the validated, symmetric form used by all
//! other modules; it stores the lower triangle only and carries an
//! optional record of the generator it was truncated from.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{denominator_lcm, scale_to_int, Rat};

/// Distance matrix as parsed, before any axiom has been checked.
#[derive(Debug, Clone)]
pub struct RawSpace {
    pub points: Vec<String>,
    pub base: String,
    pub dist: Vec<Vec<Rat>>,
}

/// One exact violation of the metric axioms, with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    /// dist(p, p) != 0
    Diagonal { p: String, value: Rat },
    /// dist(p, q) = 0 for p != q
    Positivity { p: String, q: String },
    /// dist(p, q) != dist(q, p)
    Symmetry { p: String, q: String, pq: Rat, qp: Rat },
    /// dist(p, r) > dist(p, q) + dist(q, r); the witnessing triple is (p, q, r).
    Triangle { p: String, q: String, r: String, lhs: Rat, rhs: Rat },
}

impl MetricViolation {
    pub fn describe(&self) -> String {
        match self {
            MetricViolation::Diagonal { p, value } => {
                format!("d({p},{p}) = {value} != 0")
            }
            MetricViolation::Positivity { p, q } => format!("d({p},{q}) = 0 with {p} != {q}"),
            MetricViolation::Symmetry { p, q, pq, qp } => {
                format!("d({p},{q}) = {pq} != {qp} = d({q},{p})")
            }
            MetricViolation::Triangle { p, q, r, lhs, rhs } => {
                format!("d({p},{r}) = {lhs} > {rhs} = d({p},{q}) + d({q},{r})")
            }
        }
    }
}

/// Validates the four axiom families on a raw matrix. Returns the empty
/// list iff the matrix is an exact metric. Malformed input (non-square
/// matrix, negative entry, unknown base, duplicate labels) is an error,
/// not a violation.
pub fn validate_metric(raw: &RawSpace) -> Result<Vec<MetricViolation>> {
    let n = raw.points.len();
    if n == 0 {
        return Err(Error::Input("space has no points".into()));
    }
    {
        let mut seen = HashMap::new();
        for (i, p) in raw.points.iter().enumerate() {
            if seen.insert(p.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate point label `{p}`")));
            }
        }
        if !seen.contains_key(&raw.base) {
            return Err(Error::Input(format!("base `{}` is not a point", raw.base)));
        }
    }
    if raw.dist.len() != n {
        return Err(Error::Input(format!(
            "distance matrix has {} rows for {} points",
            raw.dist.len(),
            n
        )));
    }
    for (i, row) in raw.dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Input(format!(
                "distance matrix row {} has {} entries for {} points",
                i,
                row.len(),
                n
            )));
        }
        for x in row {
            if x.is_negative() {
                return Err(Error::Input(format!(
                    "negative distance {} at row {}",
                    x, i
                )));
            }
        }
    }

    let mut violations = Vec::new();
    for i in 0..n {
        if !raw.dist[i][i].is_zero() {
            violations.push(MetricViolation::Diagonal {
                p: raw.points[i].clone(),
                value: raw.dist[i][i].clone(),
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if raw.dist[i][j] != raw.dist[j][i] {
                violations.push(MetricViolation::Symmetry {
                    p: raw.points[i].clone(),
                    q: raw.points[j].clone(),
                    pq: raw.dist[i][j].clone(),
                    qp: raw.dist[j][i].clone(),
                });
            }
            if raw.dist[i][j].is_zero() && raw.dist[j][i].is_zero() {
                violations.push(MetricViolation::Positivity {
                    p: raw.points[i].clone(),
                    q: raw.points[j].clone(),
                });
            }
        }
    }
    // Triangle scan over ordered triples (p, q, r), q the middle point.
    // Scaled to a common denominator so the hot loop is integer-only.
    let lcm = denominator_lcm(raw.dist.iter().flatten());
    let scaled: Vec<Vec<BigInt>> = raw
        .dist
        .iter()
        .map(|row| row.iter().map(|x| scale_to_int(x, &lcm)).collect())
        .collect();
    let mut triangle = triangle_scan(&scaled);
    for (i, j, k) in triangle.drain(..) {
        violations.push(MetricViolation::Triangle {
            p: raw.points[i].clone(),
            q: raw.points[j].clone(),
            r: raw.points[k].clone(),
            lhs: raw.dist[i][k].clone(),
            rhs: &raw.dist[i][j] + &raw.dist[j][k],
        });
    }
    Ok(violations)
}

/// Triples (i, j, k), i < k, j the middle point, with d(i,k) > d(i,j) + d(j,k),
/// in canonical order. Input is the scaled integer matrix.
fn triangle_scan(scaled: &[Vec<BigInt>]) -> Vec<(usize, usize, usize)> {
    #[cfg(feature = "parallel")]
    {
        crate::scaled::kernels::triangle_violations_par(scaled)
    }
    #[cfg(not(feature = "parallel"))]
    {
        crate::scaled::kernels::triangle_violations_seq(scaled)
    }
}

/// Record of the generator a finite space was truncated from. Retained in
/// memory so proof-pattern refuters can recover the generator parameters;
/// explicit space files do not carry it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceOrigin {
    pub kind: crate::generator::SpaceGenerator,
    pub truncation: usize,
}

/// A validated finite pointed metric space. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    index: HashMap<String, usize>,
    base: usize,
    /// Lower triangle, row-major: entry (i, j) with j < i at i*(i-1)/2 + j.
    tri: Vec<Rat>,
    origin: Option<SpaceOrigin>,
    /// Integer-scaled triangle, built on first use by the scan kernels.
    scale: std::sync::OnceLock<crate::scaled::SpaceScale>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

impl FiniteMetricSpace {
    /// Validates `raw` and packs it. Any axiom violation is reported as a
    /// precondition error carrying the first violation's description.
    pub fn from_raw(raw: &RawSpace) -> Result<Self> {
        let violations = validate_metric(raw)?;
        if let Some(first) = violations.first() {
            return Err(Error::Precondition(format!(
                "not a metric space ({} violation{}): {}",
                violations.len(),
                if violations.len() == 1 { "" } else { "s" },
                first.describe()
            )));
        }
        Ok(Self::from_valid_parts(
            raw.points.clone(),
            &raw.base,
            |i, j| raw.dist[i][j].clone(),
            None,
        ))
    }

    /// Packs a matrix already known to satisfy the axioms. Internal
    /// constructors (generators, fixtures, sums) use this; they are
    /// responsible for validity.
    pub(crate) fn from_valid_parts(
        points: Vec<String>,
        base: &str,
        mut d: impl FnMut(usize, usize) -> Rat,
        origin: Option<SpaceOrigin>,
    ) -> Self {
        let index: HashMap<String, usize> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        let base = index[base];
        let n = points.len();
        let mut tri = Vec::with_capacity(n * (n - 1) / 2);
        for i in 1..n {
            for j in 0..i {
                tri.push(d(i, j));
            }
        }
        FiniteMetricSpace {
            points,
            index,
            base,
            tri,
            origin,
            scale: std::sync::OnceLock::new(),
        }
    }

    pub(crate) fn space_scale(&self) -> &crate::scaled::SpaceScale {
        self.scale.get_or_init(|| crate::scaled::scale_space(self))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn base_index(&self) -> usize {
        self.base
    }

    pub fn base_label(&self) -> &str {
        &self.points[self.base]
    }

    pub fn origin(&self) -> Option<&SpaceOrigin> {
        self.origin.as_ref()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown point `{label}`")))
    }

    /// Exact distance between points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> &Rat {
        use std::cmp::Ordering::*;
        static ZERO: std::sync::OnceLock<Rat> = std::sync::OnceLock::new();
        match i.cmp(&j) {
            Equal => ZERO.get_or_init(Rat::zero),
            Greater => &self.tri[tri_index(i, j)],
            Less => &self.tri[tri_index(j, i)],
        }
    }

    pub(crate) fn tri_slice(&self) -> &[Rat] {
        &self.tri
    }

    /// The distances expanded back to a full square matrix.
    pub fn full_matrix(&self) -> Vec<Vec<Rat>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.dist(i, j).clone()).collect())
            .collect()
    }

    pub fn to_raw(&self) -> RawSpace {
        RawSpace {
            points: self.points.clone(),
            base: self.base_label().to_string(),
            dist: self.full_matrix(),
        }
    }

    /// Re-checks positivity and the triangle inequality on the packed
    /// matrix (symmetry and the zero diagonal hold structurally).
    pub fn revalidate(&self) -> Vec<MetricViolation> {
        validate_metric(&self.to_raw()).expect("packed space is well-formed")
    }

    /// Exact diameter together with every attaining pair, canonical order.
    pub fn diameter(&self) -> Result<(Rat, Vec<(usize, usize)>)> {
        if self.len() < 2 {
            return Err(Error::Precondition(
                "diameter needs at least two points".into(),
            ));
        }
        let mut best: Option<Rat> = None;
        for i in 1..self.len() {
            for j in 0..i {
                let d = self.dist(i, j);
                if best.as_ref().map_or(true, |b| d > b) {
                    best = Some(d.clone());
                }
            }
        }
        let best = best.unwrap();
        let mut pairs = Vec::new();
        for i in 1..self.len() {
            for j in 0..i {
                if self.dist(i, j) == &best {
                    pairs.push((j, i));
                }
            }
        }
        Ok((best, pairs))
    }

    /// Minimum pairwise distance (the uniform discreteness infimum of a
    /// finite space).
    pub fn min_distance(&self) -> Result<Rat> {
        if self.len() < 2 {
            return Err(Error::Precondition(
                "minimum distance needs at least two points".into(),
            ));
        }
        Ok(self.tri.iter().min().cloned().unwrap())
    }

    pub fn arc(self) -> Arc<Self> {
        Arc::new(self)
    }
}

/// Separation radius of one point: the infimum of distances to the rest of
/// the space, with its attainment status and witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub point: String,
    pub radius: Rat,
    pub attained: bool,
    /// Every point achieving the radius, canonical order; empty iff not attained.
    pub witnesses: Vec<String>,
}

/// Separation radius on a finite space: the minimum over the other points,
/// always attained, with the full witness list.
pub fn separation_radius(space: &FiniteMetricSpace, label: &str) -> Result<SeparationReport> {
    let p = space.index_of(label)?;
    if space.len() < 2 {
        return Err(Error::Precondition(
            "separation radius needs at least two points".into(),
        ));
    }
    let mut radius: Option<Rat> = None;
    for q in 0..space.len() {
        if q == p {
            continue;
        }
        let d = space.dist(p, q);
        if radius.as_ref().map_or(true, |r| d < r) {
            radius = Some(d.clone());
        }
    }
    let radius = radius.unwrap();
    let witnesses = (0..space.len())
        .filter(|&q| q != p && space.dist(p, q) == &radius)
        .map(|q| space.label(q).to_string())
        .collect();
    Ok(SeparationReport {
        point: label.to_string(),
        radius,
        attained: true,
        witnesses,
    })
}

/// Uniform discreteness of a finite space: the minimum pairwise distance and
/// whether it is positive (always the case once the space validated).
pub fn is_uniformly_discrete(space: &FiniteMetricSpace) -> Result<(bool, Rat)> {
    let inf = space.min_distance()?;
    Ok((inf.is_positive(), inf))
}

/// Greedy maximal `r`-separated subset in canonical point order: a point is
/// kept iff it is at distance >= `r` from everything already kept. The
/// result is exactly `r`-separated and maximal by construction.
pub fn maximal_separated_subset(space: &FiniteMetricSpace, r: &Rat) -> Result<Vec<usize>> {
    if !r.is_positive() {
        return Err(Error::Precondition(format!(
            "separation radius must be positive, got {r}"
        )));
    }
    let mut kept: Vec<usize> = Vec::new();
    for p in 0..space.len() {
        if kept.iter().all(|&s| space.dist(p, s) >= r) {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// Glues `parts` at mutual distance `gap`: within-part distances are kept,
/// every cross-part distance equals `gap`, the base is the first part's
/// base. Requires `gap >= diameter(part)/2` for every part, which forces
/// the triangle inequality across parts. A single part is returned as-is.
pub fn disjoint_sum(parts: &[FiniteMetricSpace], gap: &Rat) -> Result<FiniteMetricSpace> {
    if parts.is_empty() {
        return Err(Error::Input("disjoint sum of no parts".into()));
    }
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    if !gap.is_positive() {
        return Err(Error::Precondition(format!("gap must be positive, got {gap}")));
    }
    for (c, part) in parts.iter().enumerate() {
        if part.len() >= 2 {
            let (diam, _) = part.diameter()?;
            if gap < &(&diam / crate::rat::rint(2)) {
                return Err(Error::Precondition(format!(
                    "gap {gap} below half the diameter {diam} of part {c}"
                )));
            }
        }
    }
    let mut points = Vec::new();
    let mut part_of = Vec::new();
    let mut local = Vec::new();
    for (c, part) in parts.iter().enumerate() {
        for (i, p) in part.points().iter().enumerate() {
            points.push(format!("{p}@{c}"));
            part_of.push(c);
            local.push(i);
        }
    }
    let base = format!("{}@0", parts[0].base_label());
    Ok(FiniteMetricSpace::from_valid_parts(
        points,
        &base,
        |i, j| {
            if part_of[i] == part_of[j] {
                parts[part_of[i]].dist(local[i], local[j]).clone()
            } else {
                gap.clone()
            }
        },
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::SpaceGenerator;
    use crate::rat::{rat, rint};

    fn raw(points: &[&str], base: &str, dist: &[&[i64]]) -> RawSpace {
        RawSpace {
            points: points.iter().map(|s| s.to_string()).collect(),
            base: base.to_string(),
            dist: dist
                .iter()
                .map(|row| row.iter().map(|&x| rint(x)).collect())
                .collect(),
        }
    }

    #[test]
    fn one_point_space_is_ok() {
        let r = raw(&["0"], "0", &[&[0]]);
        assert!(validate_metric(&r).unwrap().is_empty());
    }

    #[test]
    fn ud_truncation_validates() {
        let space = SpaceGenerator::ud_counterexample().truncate(4).unwrap();
        assert!(space.revalidate().is_empty());
    }

    #[test]
    fn triangle_violation_is_witnessed() {
        let r = raw(
            &["a", "c", "b"],
            "a",
            &[&[0, 1, 5], &[1, 0, 1], &[5, 1, 0]],
        );
        let v = validate_metric(&r).unwrap();
        assert_eq!(v.len(), 1);
        match &v[0] {
            MetricViolation::Triangle { p, q, r, lhs, rhs } => {
                assert_eq!((p.as_str(), q.as_str(), r.as_str()), ("a", "c", "b"));
                assert_eq!(lhs, &rint(5));
                assert_eq!(rhs, &rint(2));
            }
            other => panic!("expected triangle violation, got {other:?}"),
        }
    }

    #[test]
    fn malformed_matrices_are_input_errors() {
        let mut r = raw(&["a", "b"], "a", &[&[0, 1], &[1, 0]]);
        r.dist[0].pop();
        assert!(matches!(validate_metric(&r), Err(Error::Input(_))));

        let r = raw(&["a", "b"], "a", &[&[0, -1], &[-1, 0]]);
        assert!(matches!(validate_metric(&r), Err(Error::Input(_))));

        let r = raw(&["a", "b"], "c", &[&[0, 1], &[1, 0]]);
        assert!(matches!(validate_metric(&r), Err(Error::Input(_))));
    }

    #[test]
    fn symmetry_and_diagonal_and_positivity() {
        let r = RawSpace {
            points: vec!["a".into(), "b".into(), "c".into()],
            base: "a".into(),
            dist: vec![
                vec![rint(1), rint(1), rint(1)],
                vec![rint(2), rint(0), rint(0)],
                vec![rint(1), rint(0), rint(0)],
            ],
        };
        let v = validate_metric(&r).unwrap();
        assert!(v
            .iter()
            .any(|x| matches!(x, MetricViolation::Diagonal { p, .. } if p == "a")));
        assert!(v
            .iter()
            .any(|x| matches!(x, MetricViolation::Symmetry { p, q, .. } if p == "a" && q == "b")));
        assert!(v
            .iter()
            .any(|x| matches!(x, MetricViolation::Positivity { p, q } if p == "b" && q == "c")));
    }

    #[test]
    fn separation_radius_on_ud_truncation() {
        let space = SpaceGenerator::ud_counterexample().truncate(5).unwrap();
        let rep = separation_radius(&space, "p2").unwrap();
        assert_eq!(rep.radius, rat(6, 5));
        assert!(rep.attained);
        assert_eq!(rep.witnesses, vec!["p5".to_string()]);
        // the last point ties against everything
        let rep = separation_radius(&space, "p5").unwrap();
        assert_eq!(rep.radius, rat(6, 5));
        assert_eq!(rep.witnesses.len(), 4);
    }

    #[test]
    fn unknown_point_is_input_error() {
        let space = SpaceGenerator::ud_counterexample().truncate(3).unwrap();
        assert!(matches!(
            separation_radius(&space, "p9"),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn greedy_net_keeps_only_first_when_r_exceeds_diameter() {
        let space = SpaceGenerator::ud_counterexample().truncate(6).unwrap();
        let net = maximal_separated_subset(&space, &rint(2)).unwrap();
        assert_eq!(net, vec![0]);
        assert!(maximal_separated_subset(&space, &rint(0)).is_err());
    }

    #[test]
    fn greedy_net_keeps_everything_below_min_distance() {
        let space = SpaceGenerator::ud_counterexample().truncate(6).unwrap();
        let net = maximal_separated_subset(&space, &rint(1)).unwrap();
        assert_eq!(net.len(), 6);
    }

    #[test]
    fn triple_cluster_net_at_cluster_gap() {
        let space = SpaceGenerator::triple_cluster().truncate(7).unwrap();
        // gap between cluster 1 and cluster 2 = a1 - c2 = 1/2 - 261/1024
        let gap = rat(251, 1024);
        let net = maximal_separated_subset(&space, &gap).unwrap();
        let labels: Vec<_> = net.iter().map(|&i| space.label(i)).collect();
        assert_eq!(labels, vec!["p0", "a1", "a2"]);
        // exact separation and maximality
        for (a, &i) in net.iter().enumerate() {
            for &j in &net[a + 1..] {
                assert!(space.dist(i, j) >= &gap);
            }
        }
        for p in 0..space.len() {
            assert!(net.iter().any(|&s| s == p || space.dist(p, s) < &gap));
        }
    }

    #[test]
    fn disjoint_sum_of_two_segments() {
        let seg = |name: &str| {
            FiniteMetricSpace::from_raw(&RawSpace {
                points: vec![format!("{name}x"), format!("{name}y")],
                base: format!("{name}x"),
                dist: vec![vec![rint(0), rint(1)], vec![rint(1), rint(0)]],
            })
            .unwrap()
        };
        let sum = disjoint_sum(&[seg(""), seg("")], &rint(3)).unwrap();
        assert_eq!(sum.len(), 4);
        assert_eq!(sum.base_label(), "x@0");
        let mut cross = 0;
        for i in 0..4 {
            for j in 0..i {
                if sum.label(i).ends_with("@1") != sum.label(j).ends_with("@1") {
                    assert_eq!(sum.dist(i, j), &rint(3));
                    cross += 1;
                }
            }
        }
        assert_eq!(cross, 4);
        assert!(sum.revalidate().is_empty());
    }

    #[test]
    fn disjoint_sum_single_part_is_identity() {
        let space = SpaceGenerator::ud_counterexample().truncate(3).unwrap();
        let sum = disjoint_sum(std::slice::from_ref(&space), &rint(1)).unwrap();
        assert_eq!(sum.points(), space.points());
        assert_eq!(sum.full_matrix(), space.full_matrix());
    }

    #[test]
    fn disjoint_sum_rejects_small_gap() {
        let part = SpaceGenerator::ud_counterexample().truncate(4).unwrap();
        // diameter 3/2, so any gap below 3/4 must fail
        let err = disjoint_sum(&[part.clone(), part.clone()], &rat(1, 2)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(err.to_string().contains("part 0"));
        assert!(disjoint_sum(&[part.clone(), part], &rat(3, 4)).is_ok());
    }

    #[test]
    fn disjoint_sum_of_ud_truncations_validates() {
        let part = SpaceGenerator::ud_counterexample().truncate(4).unwrap();
        let sum = disjoint_sum(&[part.clone(), part], &rint(3)).unwrap();
        assert!(sum.revalidate().is_empty());
    }

    #[test]
    fn diameter_of_ud_truncations() {
        for n in 2..=20 {
            let space = SpaceGenerator::ud_counterexample().truncate(n).unwrap();
            let (diam, pairs) = space.diameter().unwrap();
            assert_eq!(diam, rat(3, 2));
            assert_eq!(pairs, vec![(0, 1)]);
        }
    }
}
