//! Lazy generators for the parametric infinite spaces the toolkit studies.
//!
//! A [`SpaceGenerator`] is a closed-form description of a countable pointed
//! metric space: it can be truncated to any finite prefix exactly, and it
//! answers separation-radius queries with full-space semantics (the
//! analytic infimum, which a truncation may not attain). The two views are
//! deliberately kept apart: `truncate(N)` followed by a finite radius scan
//! answers a different question than the generator's own profile.
//!
//! Kinds:
//! - `ud_counterexample`: points p1, p2, ... with d = 1 + 1/max{m,n}; bounded,
//!   uniformly discrete, no point attains its separation radius.
//! - `proper_counterexample`: points p0, p1, ... with d(pk, pj) = k + j - eps_max{k,j}
//!   off the base and d(p0, pj) = j; proper, uniformly discrete, every point
//!   attains its radius.
//! - `harmonic_sequence`: {0} with 1/n on the rational line.
//! - `triple_cluster`: shrinking three-point clusters at 2^-n with in-cluster
//!   scale 16^-n, on the rational line.
//! - `shrinking_satellites`: anchors sliding to the base with declared
//!   non-attained radii and on-demand satellite points.
//! - `disjoint_sum`: countably many copies of a finite part at a fixed
//!   mutual gap.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, SeparationReport, SpaceOrigin};
use crate::rat::{rat, rint, Rat};

/// Epsilon profile of the proper counterexample: must be strictly
/// increasing with every value in (0, 1/2).
#[derive(Debug, Clone, PartialEq)]
pub enum EpsProfile {
    /// eps_k = 1/2 - 1/(2(k+1)); satisfies the constraints for every k.
    Default,
    /// Explicit prefix eps_1, eps_2, ...; queries beyond the prefix fail.
    Explicit(Vec<Rat>),
}

impl EpsProfile {
    pub fn validate(&self) -> Result<()> {
        if let EpsProfile::Explicit(list) = self {
            if list.is_empty() {
                return Err(Error::Input("empty epsilon profile".into()));
            }
            let half = rat(1, 2);
            let mut prev: Option<&Rat> = None;
            for (i, e) in list.iter().enumerate() {
                if !e.is_positive() || e >= &half {
                    return Err(Error::Input(format!(
                        "eps_{} = {} outside (0, 1/2)",
                        i + 1,
                        e
                    )));
                }
                if let Some(p) = prev {
                    if e <= p {
                        return Err(Error::Input(format!(
                            "eps profile not strictly increasing at index {}",
                            i + 1
                        )));
                    }
                }
                prev = Some(e);
            }
        }
        Ok(())
    }

    /// eps_k for k >= 1, if the profile defines it.
    pub fn eps(&self, k: usize) -> Option<Rat> {
        if k == 0 {
            return None;
        }
        match self {
            EpsProfile::Default => {
                // 1/2 - 1/(2(k+1))
                Some(rat(1, 2) - Rat::new(BigInt::one(), BigInt::from(2 * (k as u64 + 1))))
            }
            EpsProfile::Explicit(list) => list.get(k - 1).cloned(),
        }
    }

    /// delta_k = eps_{k+1} - eps_k, if both are defined.
    pub fn delta(&self, k: usize) -> Option<Rat> {
        Some(self.eps(k + 1)? - self.eps(k)?)
    }
}

/// Parameters of the `shrinking_satellites` generator: anchor n sits at
/// coordinate `first * ratio^(n-1)` on the rational half-line and declares
/// the non-attained separation radius `radius_ratio *` its coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteParams {
    pub first: Rat,
    pub ratio: Rat,
    pub radius_ratio: Rat,
}

impl SatelliteParams {
    fn validate(&self) -> Result<()> {
        if !self.first.is_positive() {
            return Err(Error::Input("first anchor distance must be positive".into()));
        }
        if !self.ratio.is_positive() || self.ratio >= rint(1) {
            return Err(Error::Input("anchor decay ratio must lie in (0, 1)".into()));
        }
        if !self.radius_ratio.is_positive() {
            return Err(Error::Input("radius ratio must be positive".into()));
        }
        // declared radii must undercut the nearest-anchor distance s_n (1 - ratio)
        if self.radius_ratio >= &rint(1) - &self.ratio {
            return Err(Error::Input(
                "radius_ratio must be below 1 - ratio so declared radii are genuine infima".into(),
            ));
        }
        Ok(())
    }
}

/// A satellite point materialized from a `shrinking_satellites` generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Satellite {
    pub label: String,
    pub coordinate: Rat,
    pub anchor: usize,
    pub distance_to_anchor: Rat,
}

/// Closed-form description of a countable pointed metric space.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceGenerator {
    UdCounterexample,
    ProperCounterexample { eps: EpsProfile },
    HarmonicSequence,
    TripleCluster,
    ShrinkingSatellites(SatelliteParams),
    DisjointSum { part: Box<SpaceGenerator>, part_n: usize, gap: Rat },
}

fn pow2(n: usize) -> BigInt {
    BigInt::one() << n
}

impl SpaceGenerator {
    pub fn ud_counterexample() -> Self {
        SpaceGenerator::UdCounterexample
    }

    pub fn proper_counterexample_default() -> Self {
        SpaceGenerator::ProperCounterexample { eps: EpsProfile::Default }
    }

    pub fn proper_counterexample(eps: EpsProfile) -> Result<Self> {
        eps.validate()?;
        Ok(SpaceGenerator::ProperCounterexample { eps })
    }

    pub fn harmonic_sequence() -> Self {
        SpaceGenerator::HarmonicSequence
    }

    pub fn triple_cluster() -> Self {
        SpaceGenerator::TripleCluster
    }

    pub fn shrinking_satellites_default() -> Self {
        SpaceGenerator::ShrinkingSatellites(SatelliteParams {
            first: rat(1, 2),
            ratio: rat(1, 8),
            radius_ratio: rat(1, 2),
        })
    }

    pub fn shrinking_satellites(params: SatelliteParams) -> Result<Self> {
        params.validate()?;
        Ok(SpaceGenerator::ShrinkingSatellites(params))
    }

    pub fn disjoint_sum(part: SpaceGenerator, part_n: usize, gap: Rat) -> Result<Self> {
        if matches!(part, SpaceGenerator::DisjointSum { .. }) {
            return Err(Error::Input("disjoint_sum parts cannot be nested sums".into()));
        }
        if part_n < 2 {
            return Err(Error::Input("disjoint_sum part size must be at least 2".into()));
        }
        if !gap.is_positive() {
            return Err(Error::Input("disjoint_sum gap must be positive".into()));
        }
        let finite_part = part.truncate(part_n)?;
        let (diam, _) = finite_part.diameter()?;
        if gap < &diam / rint(2) {
            return Err(Error::Precondition(format!(
                "gap {gap} below half the part diameter {diam}"
            )));
        }
        Ok(SpaceGenerator::DisjointSum { part: Box::new(part), part_n, gap })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceGenerator::UdCounterexample => "ud_counterexample",
            SpaceGenerator::ProperCounterexample { .. } => "proper_counterexample",
            SpaceGenerator::HarmonicSequence => "harmonic_sequence",
            SpaceGenerator::TripleCluster => "triple_cluster",
            SpaceGenerator::ShrinkingSatellites(_) => "shrinking_satellites",
            SpaceGenerator::DisjointSum { .. } => "disjoint_sum",
        }
    }

    /// Label of the i-th point (0-based) in canonical enumeration.
    pub fn point_label(&self, i: usize) -> String {
        match self {
            SpaceGenerator::UdCounterexample => format!("p{}", i + 1),
            SpaceGenerator::ProperCounterexample { .. }
            | SpaceGenerator::HarmonicSequence => format!("p{i}"),
            SpaceGenerator::TripleCluster => {
                if i == 0 {
                    "p0".into()
                } else {
                    let n = (i - 1) / 3 + 1;
                    match (i - 1) % 3 {
                        0 => format!("a{n}"),
                        1 => format!("b{n}"),
                        _ => format!("c{n}"),
                    }
                }
            }
            SpaceGenerator::ShrinkingSatellites(_) => {
                if i == 0 {
                    "p0".into()
                } else {
                    format!("a{i}")
                }
            }
            SpaceGenerator::DisjointSum { part, part_n, .. } => {
                let copy = i / part_n;
                let local = i % part_n;
                format!("{}@{}", part.point_label(local), copy)
            }
        }
    }

    /// Coordinate on the rational line for the kinds defined there.
    fn coordinate(&self, i: usize) -> Rat {
        match self {
            SpaceGenerator::HarmonicSequence => {
                if i == 0 {
                    Rat::zero()
                } else {
                    Rat::new(BigInt::one(), BigInt::from(i as u64))
                }
            }
            SpaceGenerator::TripleCluster => {
                if i == 0 {
                    Rat::zero()
                } else {
                    let n = (i - 1) / 3 + 1;
                    let center = Rat::new(BigInt::one(), pow2(n));
                    let delta = Rat::new(BigInt::one(), pow2(4 * n));
                    match (i - 1) % 3 {
                        0 => center,
                        1 => center + delta,
                        _ => center + &delta + &delta / rint(4),
                    }
                }
            }
            SpaceGenerator::ShrinkingSatellites(p) => {
                if i == 0 {
                    Rat::zero()
                } else {
                    self.anchor_coordinate(i).unwrap_or_else(|_| p.first.clone())
                }
            }
            _ => unreachable!("coordinate() is only defined for line-based kinds"),
        }
    }

    fn distance(&self, i: usize, j: usize) -> Result<Rat> {
        if i == j {
            return Ok(Rat::zero());
        }
        match self {
            SpaceGenerator::UdCounterexample => {
                let m = (i.max(j) + 1) as u64;
                Ok(rint(1) + Rat::new(BigInt::one(), BigInt::from(m)))
            }
            SpaceGenerator::ProperCounterexample { eps } => {
                if i == 0 || j == 0 {
                    Ok(rint(i.max(j) as i64))
                } else {
                    let m = i.max(j);
                    let e = eps.eps(m).ok_or_else(|| {
                        Error::Input(format!("epsilon profile does not define eps_{m}"))
                    })?;
                    Ok(rint((i + j) as i64) - e)
                }
            }
            SpaceGenerator::HarmonicSequence
            | SpaceGenerator::TripleCluster
            | SpaceGenerator::ShrinkingSatellites(_) => {
                Ok((self.coordinate(i) - self.coordinate(j)).abs())
            }
            SpaceGenerator::DisjointSum { part, part_n, gap } => {
                if i / part_n == j / part_n {
                    part.distance(i % part_n, j % part_n)
                } else {
                    Ok(gap.clone())
                }
            }
        }
    }

    /// Coordinates of the first `n` points for the kinds defined on the
    /// rational line, computed in one forward pass.
    fn line_coordinates(&self, n: usize) -> Option<Vec<Rat>> {
        match self {
            SpaceGenerator::HarmonicSequence | SpaceGenerator::TripleCluster => {
                Some((0..n).map(|i| self.coordinate(i)).collect())
            }
            SpaceGenerator::ShrinkingSatellites(p) => {
                let mut coords = Vec::with_capacity(n);
                coords.push(Rat::zero());
                let mut s = p.first.clone();
                for _ in 1..n {
                    coords.push(s.clone());
                    s *= &p.ratio;
                }
                Some(coords)
            }
            _ => None,
        }
    }

    /// Materializes the first `n` points (n >= 2, counting the base) as a
    /// finite space. Distances come from the kind's closed form and the
    /// result carries its provenance.
    pub fn truncate(&self, n: usize) -> Result<FiniteMetricSpace> {
        if n < 2 {
            return Err(Error::Input(format!("truncation needs n >= 2, got {n}")));
        }
        let points: Vec<String> = (0..n).map(|i| self.point_label(i)).collect();
        let base = points[0].clone();
        let coords = self.line_coordinates(n);
        let mut dists: Vec<Rat> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 1..n {
            for j in 0..i {
                dists.push(match &coords {
                    Some(c) => (&c[i] - &c[j]).abs(),
                    None => self.distance(i, j)?,
                });
            }
        }
        let mut it = dists.into_iter();
        Ok(FiniteMetricSpace::from_valid_parts(
            points,
            &base,
            |_, _| it.next().unwrap(),
            Some(SpaceOrigin { kind: self.clone(), truncation: n }),
        ))
    }

    /// Full-space separation radius of a canonical point: the analytic
    /// infimum, its attainment status, and (when attained) the witnesses.
    /// For `disjoint_sum`, a radius attained across copies lists the first
    /// other-copy point as a representative witness.
    pub fn separation_radius(&self, label: &str) -> Result<SeparationReport> {
        let report = |radius: Rat, attained: bool, witnesses: Vec<String>| SeparationReport {
            point: label.to_string(),
            radius,
            attained,
            witnesses,
        };
        match self {
            SpaceGenerator::UdCounterexample => {
                let _ = self.parse_ud_index(label)?;
                Ok(report(rint(1), false, vec![]))
            }
            SpaceGenerator::ProperCounterexample { .. } => {
                let k = self.parse_p_index(label)?;
                if k == 0 {
                    Ok(report(rint(1), true, vec!["p1".into()]))
                } else {
                    Ok(report(rint(k as i64), true, vec!["p0".into()]))
                }
            }
            SpaceGenerator::HarmonicSequence => {
                let k = self.parse_p_index(label)?;
                if k == 0 {
                    Ok(report(Rat::zero(), false, vec![]))
                } else {
                    let r = Rat::new(BigInt::one(), BigInt::from((k * (k + 1)) as u64));
                    Ok(report(r, true, vec![format!("p{}", k + 1)]))
                }
            }
            SpaceGenerator::TripleCluster => {
                if label == "p0" {
                    return Ok(report(Rat::zero(), false, vec![]));
                }
                let (slot, n) = Self::parse_cluster_label(label)?;
                let delta = Rat::new(BigInt::one(), pow2(4 * n));
                match slot {
                    'a' => Ok(report(delta, true, vec![format!("b{n}")])),
                    'b' => Ok(report(&delta / rint(4), true, vec![format!("c{n}")])),
                    _ => Ok(report(&delta / rint(4), true, vec![format!("b{n}")])),
                }
            }
            SpaceGenerator::ShrinkingSatellites(_) => {
                if label == "p0" {
                    return Ok(report(Rat::zero(), false, vec![]));
                }
                let n = Self::parse_indexed(label, 'a')?;
                Ok(report(self.anchor_radius(n)?, false, vec![]))
            }
            SpaceGenerator::DisjointSum { part, part_n, gap } => {
                let (local, copy) = label
                    .rsplit_once('@')
                    .ok_or_else(|| Error::Input(format!("unknown point `{label}`")))?;
                let _: usize = copy
                    .parse()
                    .map_err(|_| Error::Input(format!("unknown point `{label}`")))?;
                let finite = part.truncate(*part_n)?;
                let inner = crate::metric::separation_radius(&finite, local)?;
                let other_copy = if copy == "0" { 1 } else { 0 };
                let rep_witness = format!("{}@{}", part.point_label(0), other_copy);
                if &inner.radius < gap {
                    Ok(report(
                        inner.radius,
                        true,
                        inner.witnesses.iter().map(|w| format!("{w}@{copy}")).collect(),
                    ))
                } else if &inner.radius == gap {
                    let mut w: Vec<String> =
                        inner.witnesses.iter().map(|x| format!("{x}@{copy}")).collect();
                    w.push(rep_witness);
                    Ok(report(inner.radius, true, w))
                } else {
                    Ok(report(gap.clone(), true, vec![rep_witness]))
                }
            }
        }
    }

    /// Uniform discreteness of the full space: (inf R > 0, inf R).
    pub fn uniform_discreteness(&self) -> (bool, Rat) {
        match self {
            SpaceGenerator::UdCounterexample => (true, rint(1)),
            SpaceGenerator::ProperCounterexample { .. } => (true, rint(1)),
            SpaceGenerator::HarmonicSequence
            | SpaceGenerator::TripleCluster
            | SpaceGenerator::ShrinkingSatellites(_) => (false, Rat::zero()),
            SpaceGenerator::DisjointSum { part, part_n, gap } => {
                let finite = part.truncate(*part_n).expect("validated at construction");
                let inner = finite.min_distance().expect("part has >= 2 points");
                let inf = inner.min(gap.clone());
                (inf.is_positive(), inf)
            }
        }
    }

    pub fn anchor_coordinate(&self, n: usize) -> Result<Rat> {
        match self {
            SpaceGenerator::ShrinkingSatellites(p) => {
                if n == 0 {
                    return Err(Error::Input("anchors are indexed from 1".into()));
                }
                let mut c = p.first.clone();
                for _ in 1..n {
                    c *= &p.ratio;
                }
                Ok(c)
            }
            _ => Err(Error::Input(format!(
                "{} has no anchor sequence",
                self.kind_name()
            ))),
        }
    }

    /// Declared (non-attained) separation radius of anchor `n`.
    pub fn anchor_radius(&self, n: usize) -> Result<Rat> {
        match self {
            SpaceGenerator::ShrinkingSatellites(p) => {
                Ok(self.anchor_coordinate(n)? * &p.radius_ratio)
            }
            _ => Err(Error::Input(format!(
                "{} has no anchor sequence",
                self.kind_name()
            ))),
        }
    }

    /// Materializes a satellite of anchor `n` at distance exactly
    /// `R(a_n) + delta`, for any rational `delta > 0`. The request is
    /// rejected if the new point would undercut another anchor's declared
    /// radius.
    pub fn satellite(&self, n: usize, delta: &Rat) -> Result<Satellite> {
        let SpaceGenerator::ShrinkingSatellites(p) = self else {
            return Err(Error::Input(format!(
                "{} does not materialize satellites",
                self.kind_name()
            )));
        };
        if !delta.is_positive() {
            return Err(Error::Precondition(format!(
                "satellite slack must be positive, got {delta}"
            )));
        }
        let s_n = self.anchor_coordinate(n)?;
        let r_n = &s_n * &p.radius_ratio;
        let dist = &r_n + delta;
        let coord = &s_n + &dist;
        // guard: no anchor may end up within its own declared radius
        let mut m = 1usize;
        loop {
            let s_m = self.anchor_coordinate(m)?;
            if &s_m * (rint(1) + &p.radius_ratio) < coord {
                break;
            }
            if m != n {
                let r_m = &s_m * &p.radius_ratio;
                if (&s_m - &coord).abs() <= r_m {
                    return Err(Error::Precondition(format!(
                        "satellite of a{n} with slack {delta} breaches the declared radius of a{m}"
                    )));
                }
            }
            m += 1;
        }
        Ok(Satellite {
            label: format!("b{n}"),
            coordinate: coord,
            anchor: n,
            distance_to_anchor: dist,
        })
    }

    fn parse_ud_index(&self, label: &str) -> Result<usize> {
        let k = Self::parse_indexed(label, 'p')?;
        if k == 0 {
            return Err(Error::Input(format!("unknown point `{label}`")));
        }
        Ok(k)
    }

    fn parse_p_index(&self, label: &str) -> Result<usize> {
        Self::parse_indexed(label, 'p')
    }

    fn parse_indexed(label: &str, prefix: char) -> Result<usize> {
        label
            .strip_prefix(prefix)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Input(format!("unknown point `{label}`")))
    }

    fn parse_cluster_label(label: &str) -> Result<(char, usize)> {
        let slot = label.chars().next().unwrap_or('?');
        if !"abc".contains(slot) {
            return Err(Error::Input(format!("unknown point `{label}`")));
        }
        let n: usize = label[1..]
            .parse()
            .map_err(|_| Error::Input(format!("unknown point `{label}`")))?;
        if n == 0 {
            return Err(Error::Input(format!("unknown point `{label}`")));
        }
        Ok((slot, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ud_two_points() {
        let space = SpaceGenerator::ud_counterexample().truncate(2).unwrap();
        assert_eq!(space.points(), &["p1".to_string(), "p2".to_string()]);
        assert_eq!(space.dist(0, 1), &rat(3, 2));
        assert_eq!(space.base_label(), "p1");
    }

    #[test]
    fn proper_small_truncation_distances() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(3)
            .unwrap();
        let p1 = space.index_of("p1").unwrap();
        let p2 = space.index_of("p2").unwrap();
        let p0 = space.index_of("p0").unwrap();
        assert_eq!(space.dist(p1, p2), &rat(8, 3)); // 3 - eps_2 = 3 - 1/3
        assert_eq!(space.dist(p0, p2), &rint(2));
    }

    #[test]
    fn every_kind_truncates_to_a_valid_two_point_space() {
        let gens = [
            SpaceGenerator::ud_counterexample(),
            SpaceGenerator::proper_counterexample_default(),
            SpaceGenerator::harmonic_sequence(),
            SpaceGenerator::triple_cluster(),
            SpaceGenerator::shrinking_satellites_default(),
            SpaceGenerator::disjoint_sum(SpaceGenerator::ud_counterexample(), 4, rint(3)).unwrap(),
        ];
        for g in gens {
            let space = g.truncate(2).unwrap();
            assert!(space.revalidate().is_empty(), "{} truncation invalid", g.kind_name());
            assert!(g.truncate(1).is_err());
        }
    }

    #[test]
    fn ud_profile_is_one_not_attained() {
        let g = SpaceGenerator::ud_counterexample();
        for n in 1..=40 {
            let rep = g.separation_radius(&format!("p{n}")).unwrap();
            assert_eq!(rep.radius, rint(1));
            assert!(!rep.attained);
            assert!(rep.witnesses.is_empty());
        }
        assert_eq!(g.uniform_discreteness(), (true, rint(1)));
    }

    #[test]
    fn proper_profile_attains_at_base() {
        let g = SpaceGenerator::proper_counterexample_default();
        let rep = g.separation_radius("p2").unwrap();
        assert_eq!(rep.radius, rint(2));
        assert!(rep.attained);
        assert_eq!(rep.witnesses, vec!["p0".to_string()]);
        assert_eq!(g.uniform_discreteness(), (true, rint(1)));
    }

    #[test]
    fn harmonic_and_cluster_profiles() {
        let h = SpaceGenerator::harmonic_sequence();
        assert_eq!(h.uniform_discreteness(), (false, Rat::zero()));
        let rep = h.separation_radius("p3").unwrap();
        assert_eq!(rep.radius, rat(1, 12));
        assert_eq!(rep.witnesses, vec!["p4".to_string()]);
        let rep = h.separation_radius("p0").unwrap();
        assert!(!rep.attained);

        let t = SpaceGenerator::triple_cluster();
        assert_eq!(t.uniform_discreteness(), (false, Rat::zero()));
        let rep = t.separation_radius("a2").unwrap();
        assert_eq!(rep.radius, rat(1, 256));
        assert_eq!(rep.witnesses, vec!["b2".to_string()]);
        let rep = t.separation_radius("b2").unwrap();
        assert_eq!(rep.radius, rat(1, 1024));
        assert_eq!(rep.witnesses, vec!["c2".to_string()]);
    }

    #[test]
    fn triple_cluster_radii_match_truncation_scan() {
        let g = SpaceGenerator::triple_cluster();
        let space = g.truncate(10).unwrap(); // base + 3 full clusters
        for label in ["a1", "b1", "c1", "a2", "b2", "c2"] {
            let analytic = g.separation_radius(label).unwrap();
            let finite = crate::metric::separation_radius(&space, label).unwrap();
            assert_eq!(analytic.radius, finite.radius, "at {label}");
            assert_eq!(analytic.witnesses, finite.witnesses, "at {label}");
        }
    }

    #[test]
    fn explicit_eps_profile_is_validated() {
        let bad = EpsProfile::Explicit(vec![rat(1, 4), rat(1, 4)]);
        assert!(SpaceGenerator::proper_counterexample(bad).is_err());
        let bad = EpsProfile::Explicit(vec![rat(1, 4), rat(1, 2)]);
        assert!(SpaceGenerator::proper_counterexample(bad).is_err());
        let good = EpsProfile::Explicit(vec![rat(1, 4), rat(1, 3), rat(3, 8)]);
        let g = SpaceGenerator::proper_counterexample(good).unwrap();
        assert!(g.truncate(4).is_ok());
        // truncation needing eps_4 exceeds the profile
        assert!(g.truncate(5).is_err());
    }

    #[test]
    fn satellites_materialize_at_requested_slack() {
        let g = SpaceGenerator::shrinking_satellites_default();
        let s = g.satellite(3, &rat(1, 1000)).unwrap();
        assert_eq!(s.label, "b3");
        let r3 = g.anchor_radius(3).unwrap();
        assert_eq!(s.distance_to_anchor, &r3 + rat(1, 1000));
        assert!(g.satellite(3, &Rat::zero()).is_err());
    }

    #[test]
    fn oversized_slack_is_rejected() {
        let g = SpaceGenerator::shrinking_satellites_default();
        // slack 1/2 lands the satellite of a2 at coordinate 19/32, inside
        // a1's declared radius ball [1/4, 3/4]
        let err = g.satellite(2, &rat(1, 2)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        // a slack overshooting far past every anchor stays consistent
        assert!(g.satellite(2, &rint(1)).is_ok());
    }

    #[test]
    fn disjoint_sum_generator_truncates_across_copies() {
        let g = SpaceGenerator::disjoint_sum(SpaceGenerator::ud_counterexample(), 4, rint(3))
            .unwrap();
        let space = g.truncate(10).unwrap();
        assert_eq!(space.label(0), "p1@0");
        assert_eq!(space.label(4), "p1@1");
        assert_eq!(space.label(9), "p2@2");
        let i = space.index_of("p2@0").unwrap();
        let j = space.index_of("p3@1").unwrap();
        assert_eq!(space.dist(i, j), &rint(3));
        assert!(space.revalidate().is_empty());
        let rep = g.separation_radius("p2@1").unwrap();
        assert_eq!(rep.radius, rat(5, 4));
        assert!(rep.attained);
        assert_eq!(g.uniform_discreteness(), (true, rat(5, 4)));
    }
}
