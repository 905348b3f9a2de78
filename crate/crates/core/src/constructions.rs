//! The positive constructions: tent families over separated pairs, spike
//! families over shrinking cluster pairs, the greedy selection of
//! base-convergent anchors with non-attained radii, and the composition of
//! net extraction with tents.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::generator::{Satellite, SpaceGenerator};
use crate::lip::{FunctionFamily, LipschitzFunction};
use crate::metric::{separation_radius, FiniteMetricSpace};
use crate::rat::{rint, Rat};

/// Pairs (x_g, y_g) with all x's distinct and the separation hypothesis
/// d(x_a, x_b) >= d(x_a, y_a) + d(x_b, y_b) for every a != b.
#[derive(Debug, Clone)]
pub struct TentSpec {
    pairs: Vec<(usize, usize)>,
}

impl TentSpec {
    pub fn new(space: &FiniteMetricSpace, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Input("tent spec has no pairs".into()));
        }
        for &(x, y) in &pairs {
            if x >= space.len() || y >= space.len() {
                return Err(Error::Input("tent pair index out of range".into()));
            }
            if x == y {
                return Err(Error::Input(format!(
                    "degenerate tent pair at `{}`",
                    space.label(x)
                )));
            }
        }
        for a in 0..pairs.len() {
            for b in 0..a {
                if pairs[a].0 == pairs[b].0 {
                    return Err(Error::Input(format!(
                        "tent centers must be distinct, `{}` repeats",
                        space.label(pairs[a].0)
                    )));
                }
            }
        }
        for a in 0..pairs.len() {
            for b in 0..a {
                let (xa, ya) = pairs[a];
                let (xb, yb) = pairs[b];
                let lhs = space.dist(xa, xb);
                let rhs = space.dist(xa, ya) + space.dist(xb, yb);
                if lhs < &rhs {
                    return Err(Error::Precondition(format!(
                        "tent hypothesis fails at ({}, {}): d({}, {}) = {} < {}",
                        b,
                        a,
                        space.label(xa),
                        space.label(xb),
                        lhs,
                        rhs
                    )));
                }
            }
        }
        Ok(TentSpec { pairs })
    }

    pub fn from_labels(space: &FiniteMetricSpace, pairs: &[(&str, &str)]) -> Result<Self> {
        let idx = pairs
            .iter()
            .map(|(x, y)| Ok((space.index_of(x)?, space.index_of(y)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, idx)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// One tent per pair: f_g(x) = max{0, d(x_g, y_g) - d(x, x_g)}, shifted to
/// vanish at the base. Each member has norm 1, attains at its own pair,
/// and the family certifies as an exact c0 copy.
pub fn tent_family(space: Arc<FiniteMetricSpace>, spec: &TentSpec) -> Result<FunctionFamily> {
    let mut members = Vec::with_capacity(spec.pairs.len());
    let mut witnesses = Vec::with_capacity(spec.pairs.len());
    for (g, &(x, y)) in spec.pairs.iter().enumerate() {
        let radius = space.dist(x, y).clone();
        let raw = |p: usize| {
            let v = &radius - space.dist(p, x);
            if v.is_positive() {
                v
            } else {
                Rat::zero()
            }
        };
        let offset = raw(space.base_index());
        let values: Vec<Rat> = (0..space.len()).map(|p| raw(p) - &offset).collect();
        members.push(LipschitzFunction::new(
            Arc::clone(&space),
            &format!("tent{}", g + 1),
            values,
        )?);
        witnesses.push(Some((x, y)));
    }
    FunctionFamily::new(space, members, witnesses)
}

/// Pairs (a_k, b_k) with their separation radii and the defect
/// eps_k = R(a_k) + R(b_k) - d(a_k, b_k), validated against the shrinking
/// conditions of the spike construction.
#[derive(Debug, Clone)]
pub struct SpikeSpec {
    pairs: Vec<(usize, usize)>,
    radii: Vec<(Rat, Rat)>,
    epsilons: Vec<Rat>,
}

impl SpikeSpec {
    /// Computes radii from the space and validates, per index k:
    /// eps_k > 0 (the pair is of "overlapping radius" type), condition (i)
    /// R(a_k) < eps_j / 2 for every j < k, and condition (ii)
    /// R(b_k) < R(a_k) / 2.
    pub fn new(space: &FiniteMetricSpace, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Input("spike spec has no pairs".into()));
        }
        let base = space.base_index();
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            if a >= space.len() || b >= space.len() {
                return Err(Error::Input("spike pair index out of range".into()));
            }
            if a == b {
                return Err(Error::Input("degenerate spike pair".into()));
            }
            if a == base || b == base {
                return Err(Error::Input(
                    "spike pairs may not contain the base point".into(),
                ));
            }
            if !seen.insert(a) || !seen.insert(b) {
                return Err(Error::Input("spike pair points must be distinct".into()));
            }
        }
        let radii: Vec<(Rat, Rat)> = pairs
            .iter()
            .map(|&(a, b)| {
                Ok((
                    separation_radius(space, space.label(a))?.radius,
                    separation_radius(space, space.label(b))?.radius,
                ))
            })
            .collect::<Result<_>>()?;
        let mut epsilons = Vec::with_capacity(pairs.len());
        for (k, (&(a, b), (ra, rb))) in pairs.iter().zip(&radii).enumerate() {
            let eps = ra + rb - space.dist(a, b);
            if !eps.is_positive() {
                return Err(Error::Precondition(format!(
                    "pair {} is not of overlapping-radius type: R(a)+R(b)-d = {eps} <= 0",
                    k + 1
                )));
            }
            epsilons.push(eps);
        }
        for k in 0..pairs.len() {
            for j in 0..k {
                if radii[k].0 >= &epsilons[j] / rint(2) {
                    return Err(Error::Precondition(format!(
                        "condition (i) fails at index {}: R(a) = {} >= eps_{}/2 = {}",
                        k + 1,
                        radii[k].0,
                        j + 1,
                        &epsilons[j] / rint(2)
                    )));
                }
            }
            if radii[k].1 >= &radii[k].0 / rint(2) {
                return Err(Error::Precondition(format!(
                    "condition (ii) fails at index {}: R(b) = {} >= R(a)/2 = {}",
                    k + 1,
                    radii[k].1,
                    &radii[k].0 / rint(2)
                )));
            }
        }
        Ok(SpikeSpec { pairs, radii, epsilons })
    }

    pub fn from_labels(space: &FiniteMetricSpace, pairendpoints: &[(&str, &str)]) -> Result<Self> {
        let idx = pairendpoints
            .iter()
            .map(|(a, b)| Ok((space.index_of(a)?, space.index_of(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, idx)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn radii(&self) -> &[(Rat, Rat)] {
        &self.radii
    }

    pub fn epsilons(&self) -> &[Rat] {
        &self.epsilons
    }
}

/// One two-point spike per pair: value R(a_k) - eps_k/2 at a_k,
/// -R(b_k) + eps_k/2 at b_k, zero elsewhere. Each member has norm 1
/// attaining exactly at (a_k, b_k).
pub fn spike_family(space: Arc<FiniteMetricSpace>, spec: &SpikeSpec) -> Result<FunctionFamily> {
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    for (k, (&(a, b), ((ra, rb), eps))) in spec
        .pairs
        .iter()
        .zip(spec.radii.iter().zip(&spec.epsilons))
        .enumerate()
    {
        let half = eps / rint(2);
        let mut values = vec![Rat::zero(); space.len()];
        values[a] = ra - &half;
        values[b] = &half - rb;
        members.push(LipschitzFunction::new(
            Arc::clone(&space),
            &format!("spike{}", k + 1),
            values,
        )?);
        witnesses.push(Some((a, b)));
    }
    FunctionFamily::new(space, members, witnesses)
}

/// One pick of the greedy anchor selection.
#[derive(Debug, Clone)]
pub struct Case1Pick {
    /// Candidate index in the generator's anchor enumeration.
    pub candidate: usize,
    pub anchor_label: String,
    pub satellite: Satellite,
    /// d(a_k, 0).
    pub base_distance: Rat,
    /// Declared separation radius R(a_k).
    pub radius: Rat,
    /// Margin Delta_k = (d(a_k, 0) - R(a_k)) / 4.
    pub margin: Rat,
}

/// Outcome of the greedy selection: the picks, and the finite space
/// (base + anchors + satellites) the tent family lives on.
#[derive(Debug, Clone)]
pub struct Case1Selection {
    pub picks: Vec<Case1Pick>,
    pub space: Arc<FiniteMetricSpace>,
}

/// Greedily selects `count` anchors a_1, a_2, ... from a
/// `shrinking_satellites` generator so that every later pick satisfies
/// d(a_k, 0) <= (d(a_j, 0) - R(a_j)) / 4 against all earlier picks,
/// materializes the satellite b_k within R(a_k) + Delta_k, checks the tent
/// hypothesis on the resulting pairs exactly, and returns the tents.
pub fn case1_select(
    gen: &SpaceGenerator,
    count: usize,
) -> Result<(Case1Selection, FunctionFamily)> {
    if !matches!(gen, SpaceGenerator::ShrinkingSatellites(_)) {
        return Err(Error::Input(format!(
            "{} does not expose a base-convergent candidate sequence with non-attained radii",
            gen.kind_name()
        )));
    }
    if count < 1 {
        return Err(Error::Input("count must be at least 1".into()));
    }
    let scan_cap = count.saturating_mul(64).max(1024);
    let mut picks: Vec<Case1Pick> = Vec::with_capacity(count);
    for candidate in 1..=scan_cap {
        if picks.len() == count {
            break;
        }
        let s = gen.anchor_coordinate(candidate)?;
        if !picks.iter().all(|p| s <= p.margin) {
            continue;
        }
        let r = gen.anchor_radius(candidate)?;
        let margin = (&s - &r) / rint(4);
        let satellite = gen.satellite(candidate, &margin)?;
        picks.push(Case1Pick {
            candidate,
            anchor_label: gen.point_label(candidate),
            satellite,
            base_distance: s,
            radius: r,
            margin,
        });
    }
    if picks.len() < count {
        return Err(Error::InsufficientSequence { found: picks.len(), requested: count });
    }

    // materialize base + anchors + satellites on the half-line
    let mut labels = vec!["p0".to_string()];
    let mut coords = vec![Rat::zero()];
    for p in &picks {
        labels.push(p.anchor_label.clone());
        coords.push(gen.anchor_coordinate(p.candidate)?);
        labels.push(p.satellite.label.clone());
        coords.push(p.satellite.coordinate.clone());
    }
    let raw = crate::metric::RawSpace {
        points: labels.clone(),
        base: "p0".into(),
        dist: (0..labels.len())
            .map(|i| {
                (0..labels.len())
                    .map(|j| (&coords[i] - &coords[j]).abs())
                    .collect()
            })
            .collect(),
    };
    let space = FiniteMetricSpace::from_raw(&raw)?.arc();

    let pairs: Vec<(usize, usize)> = picks
        .iter()
        .map(|p| {
            Ok((
                space.index_of(&p.anchor_label)?,
                space.index_of(&p.satellite.label)?,
            ))
        })
        .collect::<Result<_>>()?;
    let spec = TentSpec::new(&space, pairs)?;
    let family = tent_family(Arc::clone(&space), &spec)?;
    Ok((Case1Selection { picks, space }, family))
}

/// Pairs every mark with the first point (canonical order) within
/// `closeness` of it and builds the tents over those pairs. The tent
/// hypothesis is checked exactly after pairing.
pub fn gamma_compose(
    space: Arc<FiniteMetricSpace>,
    marks: &[usize],
    closeness: &Rat,
) -> Result<FunctionFamily> {
    if marks.is_empty() {
        return Err(Error::Input("no cluster marks given".into()));
    }
    if !closeness.is_positive() {
        return Err(Error::Input("closeness must be positive".into()));
    }
    {
        let mut seen = std::collections::HashSet::new();
        for &m in marks {
            if m >= space.len() {
                return Err(Error::Input("mark index out of range".into()));
            }
            if !seen.insert(m) {
                return Err(Error::Input(format!(
                    "duplicate mark `{}`",
                    space.label(m)
                )));
            }
        }
    }
    let mut pairs = Vec::with_capacity(marks.len());
    for &m in marks {
        let neighbor = (0..space.len())
            .find(|&q| q != m && space.dist(m, q) <= closeness)
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "no neighbor within {closeness} of mark `{}`",
                    space.label(m)
                ))
            })?;
        pairs.push((m, neighbor));
    }
    let spec = TentSpec::new(&space, pairs)?;
    tent_family(space, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_c0, CertifyOutcome};
    use crate::metric::{disjoint_sum, RawSpace};
    use crate::rat::rat;

    fn unit_segment() -> FiniteMetricSpace {
        FiniteMetricSpace::from_raw(&RawSpace {
            points: vec!["x".into(), "y".into()],
            base: "x".into(),
            dist: vec![vec![rint(0), rint(1)], vec![rint(1), rint(0)]],
        })
        .unwrap()
    }

    #[test]
    fn tent_pair_on_two_glued_segments_certifies() {
        let seg = unit_segment();
        let space = disjoint_sum(&[seg.clone(), seg], &rint(3)).unwrap().arc();
        let spec =
            TentSpec::from_labels(&space, &[("x@0", "y@0"), ("x@1", "y@1")]).unwrap();
        let fam = tent_family(Arc::clone(&space), &spec).unwrap();
        for i in 0..2 {
            assert_eq!(fam.member(i).lip_norm().unwrap(), rint(1));
        }
        match certify_c0(&fam).unwrap() {
            CertifyOutcome::Certified(c) => {
                let w: Vec<_> = (0..2).map(|i| fam.oriented_witness(i).unwrap()).collect();
                assert_eq!(c.attainment, w);
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn single_tent_normalizes_at_base() {
        // base inside the tent ball: the offset is the tent's base value
        let space = SpaceGenerator::ud_counterexample().truncate(3).unwrap().arc();
        let spec = TentSpec::from_labels(&space, &[("p2", "p3")]).unwrap();
        let fam = tent_family(Arc::clone(&space), &spec).unwrap();
        let f = fam.member(0);
        assert!(f.value(space.base_index()).is_zero());
        assert_eq!(f.lip_norm().unwrap(), rint(1));
        let (x, y) = fam.oriented_witness(0).unwrap();
        assert_eq!(f.pair_ratio(x, y).unwrap(), rint(1));
    }

    #[test]
    fn overlapping_tents_are_rejected() {
        // two unit-radius tents with centers at distance 1 < 1 + 1
        let raw = RawSpace {
            points: vec!["0".into(), "x1".into(), "y1".into(), "x2".into(), "y2".into()],
            base: "0".into(),
            dist: vec![
                vec![rint(0), rint(2), rint(2), rint(2), rint(2)],
                vec![rint(2), rint(0), rint(1), rint(1), rint(2)],
                vec![rint(2), rint(1), rint(0), rint(2), rint(2)],
                vec![rint(2), rint(1), rint(2), rint(0), rint(1)],
                vec![rint(2), rint(2), rint(2), rint(1), rint(0)],
            ],
        };
        let space = FiniteMetricSpace::from_raw(&raw).unwrap().arc();
        let err = TentSpec::from_labels(&space, &[("x1", "y1"), ("x2", "y2")]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = TentSpec::from_labels(&space, &[("x1", "y1"), ("x1", "y2")]).unwrap_err();
        assert!(err.to_string().contains("distinct"));
        assert!(TentSpec::from_labels(&space, &[("x1", "x1")]).is_err());
    }

    #[test]
    fn spikes_on_triple_cluster_match_the_closed_form() {
        let space = SpaceGenerator::triple_cluster().truncate(1 + 3 * 3).unwrap().arc();
        let pairs: Vec<(String, String)> =
            (1..=3).map(|n| (format!("a{n}"), format!("b{n}"))).collect();
        let pairs_ref: Vec<(&str, &str)> =
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let spec = SpikeSpec::from_labels(&space, &pairs_ref).unwrap();
        let fam = spike_family(Arc::clone(&space), &spec).unwrap();
        for (k, n) in (1..=3).enumerate() {
            let delta = Rat::new(1.into(), num_bigint::BigInt::from(1u8) << (4 * n));
            assert_eq!(spec.epsilons()[k], &delta / rint(4));
            let f = fam.member(k);
            let a = space.index_of(&format!("a{n}")).unwrap();
            let b = space.index_of(&format!("b{n}")).unwrap();
            assert_eq!(f.value(a), &(&delta * rat(7, 8)));
            assert_eq!(f.value(b), &(-&delta / rint(8)));
            assert!(f.value(a).is_positive() && f.value(b).is_negative());
            let wits = f.sna_witnesses().unwrap();
            assert_eq!(wits.len(), 1);
            assert_eq!((wits[0].p, wits[0].q), (a.min(b), a.max(b)));
        }
        assert!(matches!(
            certify_c0(&fam).unwrap(),
            CertifyOutcome::Certified(_)
        ));
    }

    #[test]
    fn mutual_nearest_pair_fails_condition_ii() {
        let raw = RawSpace {
            points: vec!["0".into(), "a".into(), "b".into()],
            base: "0".into(),
            dist: vec![
                vec![rint(0), rint(10), rint(10)],
                vec![rint(10), rint(0), rint(1)],
                vec![rint(10), rint(1), rint(0)],
            ],
        };
        let space = FiniteMetricSpace::from_raw(&raw).unwrap().arc();
        let err = SpikeSpec::from_labels(&space, &[("a", "b")]).unwrap_err();
        assert!(err.to_string().contains("condition (ii)"));
    }

    #[test]
    fn separated_pair_fails_the_overlap_requirement() {
        // R(a) + R(b) < d(a, b): the pair is not of case-B type
        let raw = RawSpace {
            points: vec![
                "0".into(),
                "a".into(),
                "a'".into(),
                "b".into(),
                "b'".into(),
            ],
            base: "0".into(),
            dist: vec![
                vec![rint(0), rint(40), rint(42), rint(80), rint(81)],
                vec![rint(40), rint(0), rint(2), rint(40), rint(41)],
                vec![rint(42), rint(2), rint(0), rint(38), rint(39)],
                vec![rint(80), rint(40), rint(38), rint(0), rint(1)],
                vec![rint(81), rint(41), rint(39), rint(1), rint(0)],
            ],
        };
        let space = FiniteMetricSpace::from_raw(&raw).unwrap().arc();
        let err = SpikeSpec::from_labels(&space, &[("a", "b")]).unwrap_err();
        assert!(err.to_string().contains("overlapping-radius"));
    }

    #[test]
    fn case1_single_pick_is_trivially_valid() {
        let gen = SpaceGenerator::shrinking_satellites_default();
        let (sel, fam) = case1_select(&gen, 1).unwrap();
        assert_eq!(sel.picks.len(), 1);
        assert_eq!(sel.picks[0].candidate, 1);
        assert_eq!(fam.len(), 1);
    }

    #[test]
    fn case1_ten_picks_satisfy_all_margins() {
        let gen = SpaceGenerator::shrinking_satellites_default();
        let (sel, fam) = case1_select(&gen, 10).unwrap();
        assert_eq!(sel.picks.len(), 10);
        // margins strictly decreasing
        for w in sel.picks.windows(2) {
            assert!(w[1].margin < w[0].margin);
        }
        // satellites within R + Delta
        for p in &sel.picks {
            assert!(p.satellite.distance_to_anchor <= &p.radius + &p.margin);
        }
        // all 45 tent inequalities, re-checked here against the space
        let space = &sel.space;
        for a in 0..10 {
            for b in 0..a {
                let (xa, ya) = fam.oriented_witness(a).unwrap();
                let (xb, yb) = fam.oriented_witness(b).unwrap();
                let xa = if space.label(xa).starts_with('a') { xa } else { ya };
                let xb = if space.label(xb).starts_with('a') { xb } else { yb };
                let (aa, sa) = fam.witness(a).unwrap();
                let (ab, sb) = fam.witness(b).unwrap();
                assert!(
                    space.dist(xa, xb)
                        >= &(space.dist(aa, sa) + space.dist(ab, sb))
                );
            }
        }
        assert!(matches!(
            certify_c0(&fam).unwrap(),
            CertifyOutcome::Certified(_)
        ));
    }

    /// Before the base shift, each tent vanishes outside its own ball
    /// B(x_g, d(x_g, y_g)); the shift is a constant, so the stored values
    /// equal -offset exactly there.
    #[test]
    fn tent_support_stays_inside_the_ball() {
        let space = SpaceGenerator::triple_cluster().truncate(10).unwrap().arc();
        let spec = TentSpec::from_labels(&space, &[("a1", "b1"), ("a2", "b2")]).unwrap();
        let fam = tent_family(Arc::clone(&space), &spec).unwrap();
        for g in 0..2 {
            let (x, y) = fam.witness(g).unwrap();
            let radius = space.dist(x, y);
            let raw_at_base = {
                let v = radius - space.dist(space.base_index(), x);
                if v.is_positive() { v } else { Rat::zero() }
            };
            for p in 0..space.len() {
                if space.dist(p, x) > radius {
                    assert_eq!(fam.member(g).value(p) + &raw_at_base, Rat::zero());
                }
            }
        }
    }

    /// The selection margins chain exactly:
    /// d(a_n, a_m) >= R(a_n) + 3*Delta_n >= d(a_n, b_n) + d(a_m, b_m).
    #[test]
    fn case1_margin_chain_holds_linkwise() {
        let gen = SpaceGenerator::shrinking_satellites_default();
        let (sel, fam) = case1_select(&gen, 6).unwrap();
        let space = &sel.space;
        for n in 0..6 {
            for m in (n + 1)..6 {
                let (an, bn) = fam.witness(n).unwrap();
                let (am, bm) = fam.witness(m).unwrap();
                let mid = &sel.picks[n].radius + &sel.picks[n].margin * rint(3);
                assert!(space.dist(an, am) >= &mid);
                assert!(mid >= space.dist(an, bn) + space.dist(am, bm));
            }
        }
    }

    #[test]
    fn case1_rejects_wrong_generator() {
        let gen = SpaceGenerator::harmonic_sequence();
        assert!(matches!(case1_select(&gen, 2), Err(Error::Input(_))));
    }

    #[test]
    fn gamma_on_a_single_mark() {
        let space = SpaceGenerator::triple_cluster().truncate(7).unwrap().arc();
        let a1 = space.index_of("a1").unwrap();
        let fam = gamma_compose(Arc::clone(&space), &[a1], &rat(1, 16)).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam.member(0).lip_norm().unwrap(), rint(1));
    }

    #[test]
    fn gamma_rejects_isolated_marks() {
        let space = SpaceGenerator::triple_cluster().truncate(7).unwrap().arc();
        let a1 = space.index_of("a1").unwrap();
        let err = gamma_compose(space, &[a1], &rat(1, 1024)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
