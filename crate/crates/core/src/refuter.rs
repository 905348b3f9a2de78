//! Refutation machinery: pair coloring by witness intersection,
//! monochromatic subset search, and the norm-inflation attacks that
//! exhibit a combination `f_n0 + delta * f_m0` of Lipschitz quotient
//! strictly above 1.
//!
//! The generic attack is a complete decision procedure (it repackages the
//! pairwise certificate's violation). The proof-pattern modes (`ud`,
//! `proper`) follow the structure of the counterexample arguments, whose
//! hypotheses quantify over infinite sequences; on finite data they either
//! find a trace or report honestly which precondition failed for every
//! candidate.

use num_traits::{Signed, Zero};

use crate::certify::{certify_c0, CertifyOutcome, ConstancyCounterexample};
use crate::error::{Error, Result};
use crate::generator::{EpsProfile, SpaceGenerator};
use crate::lip::{CoefficientVector, FunctionFamily, WitnessPair};
use crate::metric::FiniteMetricSpace;
use crate::rat::{rat, rint, Rat};

/// Colors of an index pair, by how the declared witness pairs intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Color {
    /// Disjoint witness pairs.
    A,
    /// Shared first point.
    B1,
    /// Shared second point.
    B2,
    /// Crossed: x_n = y_m or x_m = y_n.
    B3,
}

impl Color {
    pub fn name(self) -> &'static str {
        match self {
            Color::A => "A",
            Color::B1 => "B1",
            Color::B2 => "B2",
            Color::B3 => "B3",
        }
    }
}

/// Total coloring of the index pairs of a family, computed from witness
/// pairs in canonical orientation (smaller point index first).
#[derive(Debug, Clone)]
pub struct RamseyColoring {
    members: usize,
    /// Pair (i, j), i < j, at index j*(j-1)/2 + i.
    colors: Vec<Color>,
}

impl RamseyColoring {
    pub fn members(&self) -> usize {
        self.members
    }

    pub fn color(&self, i: usize, j: usize) -> Color {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.colors[j * (j - 1) / 2 + i]
    }
}

fn classify(a: (usize, usize), b: (usize, usize)) -> Color {
    let (xn, yn) = a;
    let (xm, ym) = b;
    let disjoint = xn != xm && xn != ym && yn != xm && yn != ym;
    if disjoint {
        Color::A
    } else if xn == xm {
        Color::B1
    } else if yn == ym {
        Color::B2
    } else {
        Color::B3
    }
}

fn declared_oriented(family: &FunctionFamily) -> Result<Vec<(usize, usize)>> {
    (0..family.len())
        .map(|i| {
            family.oriented_witness(i).ok_or_else(|| {
                Error::Input(format!(
                    "member `{}` has no declared witness pair",
                    family.member(i).name()
                ))
            })
        })
        .collect()
}

/// Colors every index pair of the family. Each member must carry a
/// declared witness pair.
pub fn color_pairs(family: &FunctionFamily) -> Result<RamseyColoring> {
    let pairs = declared_oriented(family)?;
    let k = pairs.len();
    let mut colors = Vec::with_capacity(k * (k - 1) / 2);
    for j in 0..k {
        for i in 0..j {
            colors.push(classify(pairs[i], pairs[j]));
        }
    }
    Ok(RamseyColoring { members: k, colors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Exhaustive maximum (families of at most 16 members).
    Exact,
    /// Maximal-by-inclusion greedy sweep.
    Greedy,
}

/// Finds a subset of member indices whose pairs all share one color.
/// Exact mode returns a maximum-size subset; ties break by color order
/// A < B1 < B2 < B3, then lexicographic subset order. Greedy mode returns
/// the best of the per-color greedy sweeps under the same tie-break.
pub fn monochromatic_subset(
    coloring: &RamseyColoring,
    mode: SearchMode,
) -> Result<(Color, Vec<usize>)> {
    let k = coloring.members();
    if k < 2 {
        return Err(Error::Input(
            "monochromatic subset needs at least 2 indices".into(),
        ));
    }
    let colors = [Color::A, Color::B1, Color::B2, Color::B3];
    match mode {
        SearchMode::Exact => {
            if k > 16 {
                return Err(Error::Size(format!(
                    "exact search supports at most 16 indices, got {k}; use greedy mode"
                )));
            }
            let mut best: Option<(Color, Vec<usize>)> = None;
            for mask in 1u32..(1 << k) {
                if mask.count_ones() < 2 {
                    continue;
                }
                let subset: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
                let c0 = coloring.color(subset[0], subset[1]);
                let mono = subset.iter().enumerate().all(|(a, &i)| {
                    subset[a + 1..].iter().all(|&j| coloring.color(i, j) == c0)
                });
                if !mono {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bc, bs)) => {
                        let key = (std::cmp::Reverse(subset.len()), c0, subset.clone());
                        let bkey = (std::cmp::Reverse(bs.len()), *bc, bs.clone());
                        key < bkey
                    }
                };
                if better {
                    best = Some((c0, subset));
                }
            }
            Ok(best.expect("any pair is monochromatic"))
        }
        SearchMode::Greedy => {
            let mut best: Option<(Color, Vec<usize>)> = None;
            for &c in &colors {
                let mut subset: Vec<usize> = Vec::new();
                for i in 0..k {
                    if subset.iter().all(|&j| coloring.color(i, j) == c) {
                        subset.push(i);
                    }
                }
                if subset.len() < 2 {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bc, bs)) => {
                        let key = (std::cmp::Reverse(subset.len()), c, subset.clone());
                        let bkey = (std::cmp::Reverse(bs.len()), *bc, bs.clone());
                        key < bkey
                    }
                };
                if better {
                    best = Some((c, subset));
                }
            }
            best.ok_or_else(|| Error::Internal("no monochromatic pair found".into()))
        }
    }
}

/// Which proof pattern produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    Case1,
    Case2,
    ProperA0B0,
    ProperA0B1,
    ProperA1B0,
    ProperA1B1,
    Generic,
}

impl AttackMode {
    pub fn name(self) -> &'static str {
        match self {
            AttackMode::Case1 => "case1",
            AttackMode::Case2 => "case2",
            AttackMode::ProperA0B0 => "proper-a0b0",
            AttackMode::ProperA0B1 => "proper-a0b1",
            AttackMode::ProperA1B0 => "proper-a1b0",
            AttackMode::ProperA1B1 => "proper-a1b1",
            AttackMode::Generic => "generic",
        }
    }
}

/// A self-verifying refutation: re-evaluating the recorded combination at
/// the evaluation pair reproduces `quotient` exactly, and it exceeds 1.
#[derive(Debug, Clone)]
pub struct RefutationTrace {
    pub mode: AttackMode,
    /// (n0, m0) member indices for the two-function patterns.
    pub indices: Option<(usize, usize)>,
    /// Sign of the m0 term in f_n0 + delta * f_m0.
    pub delta: Option<i8>,
    /// Full sign vector for generic traces with more than two members.
    pub sign_vector: Option<Vec<i8>>,
    /// Point indices the quotient is evaluated at.
    pub eval_pair: (usize, usize),
    pub quotient: Rat,
    /// The forced constant C_m0, where the pattern uses one.
    pub constant: Option<Rat>,
    /// The margin eps_n0 of the bounded counterexample's Case 1.
    pub margin: Option<Rat>,
}

/// One candidate the proof-pattern scan rejected, and why.
#[derive(Debug, Clone)]
pub struct CandidateFailure {
    pub n0: usize,
    pub m0: Option<usize>,
    pub reason: String,
}

/// Honest negative outcome: which precondition failed for every candidate.
#[derive(Debug, Clone)]
pub struct InconclusiveReport {
    pub message: String,
    pub failures: Vec<CandidateFailure>,
    pub constancy: Option<ConstancyCounterexample>,
}

#[derive(Debug, Clone)]
pub enum AttackOutcome {
    Trace(RefutationTrace),
    Inconclusive(InconclusiveReport),
}

/// Space kind a proof-pattern attack runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKindMode {
    Ud,
    Proper,
    Generic,
}

fn sign8(x: &Rat) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

fn require_unit_norms(family: &FunctionFamily) -> Result<()> {
    let one = rint(1);
    for m in family.members() {
        let norm = m.lip_norm()?;
        if norm != one {
            return Err(Error::NotNormalized {
                member: m.name().to_string(),
                norm: norm.to_string(),
            });
        }
    }
    Ok(())
}

fn spaces_equal(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> bool {
    a.points() == b.points()
        && a.base_index() == b.base_index()
        && a.tri_slice() == b.tri_slice()
}

fn check_ud_shape(space: &FiniteMetricSpace) -> Result<()> {
    let expected = SpaceGenerator::ud_counterexample().truncate(space.len())?;
    if !spaces_equal(space, &expected) {
        return Err(Error::Input(
            "space is not a ud_counterexample truncation".into(),
        ));
    }
    Ok(())
}

fn proper_profile(space: &FiniteMetricSpace) -> Result<EpsProfile> {
    if let Some(origin) = space.origin() {
        if let SpaceGenerator::ProperCounterexample { eps } = &origin.kind {
            return Ok(eps.clone());
        }
    }
    let expected = SpaceGenerator::proper_counterexample_default().truncate(space.len())?;
    if spaces_equal(space, &expected) {
        Ok(EpsProfile::Default)
    } else {
        Err(Error::Input(
            "space is not a proper_counterexample truncation".into(),
        ))
    }
}

/// Builds f_n0 + delta * f_m0 and evaluates its quotient across a pair.
fn two_term_quotient(
    family: &FunctionFamily,
    n0: usize,
    m0: usize,
    delta: i8,
    p: usize,
    q: usize,
) -> Result<Rat> {
    let mut lambda = vec![Rat::zero(); family.len()];
    lambda[n0] = rint(1);
    lambda[m0] = rint(delta as i64);
    let f = family.combine(&CoefficientVector(lambda))?;
    f.pair_ratio(p, q)
}

/// Re-evaluates a trace from raw values: the recorded combination must
/// reproduce the quotient exactly and exceed 1.
pub fn verify_trace(family: &FunctionFamily, trace: &RefutationTrace) -> Result<()> {
    let (p, q) = trace.eval_pair;
    let quotient = if let Some(signs) = &trace.sign_vector {
        let lambda =
            CoefficientVector(signs.iter().map(|&s| rint(s as i64)).collect());
        family.combine(&lambda)?.pair_ratio(p, q)?
    } else {
        let (n0, m0) = trace
            .indices
            .ok_or_else(|| Error::Internal("trace lacks both indices and sign vector".into()))?;
        let delta = trace
            .delta
            .ok_or_else(|| Error::Internal("two-term trace lacks delta".into()))?;
        two_term_quotient(family, n0, m0, delta, p, q)?
    };
    if quotient != trace.quotient {
        return Err(Error::Internal(format!(
            "trace quotient {} does not recompute ({} found)",
            trace.quotient, quotient
        )));
    }
    if quotient <= rint(1) {
        return Err(Error::Internal(format!(
            "trace quotient {quotient} does not exceed 1"
        )));
    }
    Ok(())
}

/// Runs the attack. Generic mode is decision-complete: it returns a trace
/// iff the pairwise certificate fails. The `ud` and `proper` modes replay
/// the corresponding counterexample proofs and may be inconclusive on
/// finite data.
pub fn attack(family: &FunctionFamily, kind: SpaceKindMode) -> Result<AttackOutcome> {
    match kind {
        SpaceKindMode::Generic => attack_generic(family),
        SpaceKindMode::Ud => attack_ud(family),
        SpaceKindMode::Proper => attack_proper(family),
    }
}

fn attack_generic(family: &FunctionFamily) -> Result<AttackOutcome> {
    match certify_c0(family)? {
        CertifyOutcome::Certified(_) => Ok(AttackOutcome::Inconclusive(InconclusiveReport {
            message: "certificate holds on this truncation".into(),
            failures: vec![],
            constancy: None,
        })),
        CertifyOutcome::Violated(v) => {
            let (p, q) = v.pair;
            let d = family.space().dist(p, q);
            let quotient = (d + &v.excess) / d;
            let (indices, delta) = if family.len() == 2 {
                ((Some((0usize, 1usize))), Some(v.signs[0] * v.signs[1]))
            } else {
                (None, None)
            };
            let trace = RefutationTrace {
                mode: AttackMode::Generic,
                indices,
                delta,
                sign_vector: Some(v.signs.clone()),
                eval_pair: v.pair,
                quotient,
                constant: None,
                margin: None,
            };
            verify_trace(family, &trace)?;
            Ok(AttackOutcome::Trace(trace))
        }
    }
}

fn subset_for(family: &FunctionFamily) -> Result<(Color, Vec<usize>)> {
    let coloring = color_pairs(family)?;
    let mode = if family.len() <= 16 {
        SearchMode::Exact
    } else {
        SearchMode::Greedy
    };
    monochromatic_subset(&coloring, mode)
}

fn attack_ud(family: &FunctionFamily) -> Result<AttackOutcome> {
    check_ud_shape(family.space())?;
    require_unit_norms(family)?;
    let pairs = declared_oriented(family)?;
    if family.len() < 2 {
        return Ok(AttackOutcome::Inconclusive(InconclusiveReport {
            message: "fewer than two members".into(),
            failures: vec![],
            constancy: None,
        }));
    }
    let (color, subset) = subset_for(family)?;
    match color {
        Color::A => ud_case1(family, &pairs, &subset),
        Color::B1 => ud_case2(family, &pairs, &subset),
        Color::B2 => {
            // relabel (x, y) -> (y, x): a shared second point becomes a shared first
            let swapped: Vec<(usize, usize)> = pairs.iter().map(|&(x, y)| (y, x)).collect();
            ud_case2(family, &swapped, &subset)
        }
        Color::B3 => Ok(AttackOutcome::Inconclusive(InconclusiveReport {
            message:
                "B3-monochromatic subset: the reduction to B1/B2 needs an infinite subsequence"
                    .into(),
            failures: vec![],
            constancy: None,
        })),
    }
}

/// Label index of a ud point: labels are p1, p2, ... in storage order.
fn ud_index(i: usize) -> usize {
    i + 1
}

fn ud_case1(
    family: &FunctionFamily,
    pairs: &[(usize, usize)],
    subset: &[usize],
) -> Result<AttackOutcome> {
    let space = family.space();
    let mut failures = Vec::new();
    for &n0 in subset {
        let (xn, yn) = pairs[n0];
        let k_n0 = ud_index(xn).max(ud_index(yn));
        let eps_n0 = Rat::new(1.into(), (2 * k_n0 as u64).into());
        let third = &eps_n0 / rint(3);
        let bound = rint(1) + &third;
        let fn0 = family.member(n0);
        for &m0 in subset {
            if m0 == n0 {
                continue;
            }
            let (xm, ym) = pairs[m0];
            let fm0 = family.member(m0);
            if !(fm0.value(xn).abs() <= third && fm0.value(yn).abs() <= third) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: format!("condition (i) fails: |f_m0| above eps/3 = {third} on n0's pair"),
                });
                continue;
            }
            let cross = [(xn, xm), (xn, ym), (yn, xm), (yn, ym)];
            if cross.iter().any(|&(p, q)| space.dist(p, q) > &bound) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: format!("condition (ii) fails: a cross distance exceeds 1 + eps/3 = {bound}"),
                });
                continue;
            }
            if fn0.value(xm) != fn0.value(ym) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "f_n0 is not constant on m0's attainment pair".into(),
                });
                continue;
            }
            let c = fn0.value(xm).clone();
            // checked assertions of the gap bound, from which the lower
            // bounds of the chain follow
            let wn = WitnessPair { p: xn, q: yn, ratio: rint(1) };
            let wm = WitnessPair { p: xm, q: ym, ratio: rint(1) };
            if !crate::lip::triangle_gap(fn0, &wn, &c)?
                || !crate::lip::triangle_gap(fm0, &wm, &Rat::zero())?
            {
                return Err(Error::Internal("gap bound failed on exact data".into()));
            }
            let (xn_o, _yn_o) = if (fn0.value(xn) - &c).abs() >= (fn0.value(yn) - &c).abs() {
                (xn, yn)
            } else {
                (yn, xn)
            };
            let xm_o = if fm0.value(xm).abs() >= fm0.value(ym).abs() { xm } else { ym };
            let delta = sign8(fm0.value(xm_o));
            debug_assert!(delta != 0);
            let eff = if fn0.value(xn_o) < &c { delta } else { -delta };
            let quotient = two_term_quotient(family, n0, m0, eff, xn_o, xm_o)?;
            if quotient <= rint(1) {
                return Err(Error::Internal(
                    "case-1 chain failed to exceed 1 on exact data".into(),
                ));
            }
            let trace = RefutationTrace {
                mode: AttackMode::Case1,
                indices: Some((n0, m0)),
                delta: Some(eff),
                sign_vector: None,
                eval_pair: (xn_o, xm_o),
                quotient,
                constant: Some(c),
                margin: Some(eps_n0),
            };
            verify_trace(family, &trace)?;
            return Ok(AttackOutcome::Trace(trace));
        }
    }
    Ok(AttackOutcome::Inconclusive(InconclusiveReport {
        message: "no candidate pair satisfies the case-1 preconditions".into(),
        failures,
        constancy: None,
    }))
}

fn ud_case2(
    family: &FunctionFamily,
    pairs: &[(usize, usize)],
    subset: &[usize],
) -> Result<AttackOutcome> {
    let z = pairs[subset[0]].0;
    if subset.iter().any(|&i| pairs[i].0 != z) {
        return Err(Error::Internal("B1 subset does not share its first point".into()));
    }
    let tenth = rat(1, 10);
    let mut failures = Vec::new();
    for (a, &n0) in subset.iter().enumerate() {
        let yn = pairs[n0].1;
        let fn0 = family.member(n0);
        for &m0 in &subset[a + 1..] {
            let ym = pairs[m0].1;
            let fm0 = family.member(m0);
            if yn == ym {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "witness pairs coincide".into(),
                });
                continue;
            }
            if !(fn0.value(z).abs() <= tenth && fm0.value(z).abs() <= tenth) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "shared-point bound fails: |f| above 1/10 at the shared point".into(),
                });
                continue;
            }
            if fm0.value(yn) != fm0.value(z) || fn0.value(ym) != fn0.value(z) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "constancy through the shared point fails".into(),
                });
                continue;
            }
            let sn = sign8(fn0.value(yn));
            let sm = sign8(fm0.value(ym));
            debug_assert!(sn != 0 && sm != 0);
            let delta = -(sn * sm);
            let quotient = two_term_quotient(family, n0, m0, delta, yn, ym)?;
            if quotient <= rint(1) {
                return Err(Error::Internal(
                    "case-2 chain failed to exceed 1 on exact data".into(),
                ));
            }
            let trace = RefutationTrace {
                mode: AttackMode::Case2,
                indices: Some((n0, m0)),
                delta: Some(delta),
                sign_vector: None,
                eval_pair: (yn, ym),
                quotient,
                constant: None,
                margin: None,
            };
            verify_trace(family, &trace)?;
            return Ok(AttackOutcome::Trace(trace));
        }
    }
    Ok(AttackOutcome::Inconclusive(InconclusiveReport {
        message: "no candidate pair satisfies the case-2 preconditions".into(),
        failures,
        constancy: None,
    }))
}

fn attack_proper(family: &FunctionFamily) -> Result<AttackOutcome> {
    let eps = proper_profile(family.space())?;
    require_unit_norms(family)?;
    let pairs = declared_oriented(family)?;
    if family.len() < 2 {
        return Ok(AttackOutcome::Inconclusive(InconclusiveReport {
            message: "fewer than two members".into(),
            failures: vec![],
            constancy: None,
        }));
    }
    let (color, subset) = subset_for(family)?;
    match color {
        Color::A => proper_case1(family, &eps, &pairs, &subset),
        Color::B1 => {
            let z = pairs[subset[0]].0;
            if z == 0 {
                shared_zero_scan(family, &eps, &pairs, &subset)
            } else {
                proper_case2_off_base(family, &pairs, &subset, z)
            }
        }
        Color::B2 => Ok(AttackOutcome::Inconclusive(InconclusiveReport {
            message: "B2 subset: shared second points force a certificate failure at the \
                      first points (the forced constancy rules it out); use generic mode"
                .into(),
            failures: vec![],
            constancy: None,
        })),
        Color::B3 => Ok(AttackOutcome::Inconclusive(InconclusiveReport {
            message:
                "B3-monochromatic subset: the reduction to B1/B2 needs an infinite subsequence"
                    .into(),
            failures: vec![],
            constancy: None,
        })),
    }
}

fn proper_case1(
    family: &FunctionFamily,
    eps: &EpsProfile,
    pairs: &[(usize, usize)],
    subset: &[usize],
) -> Result<AttackOutcome> {
    let mut failures = Vec::new();
    for &n0 in subset {
        let (k_n0, j_n0) = pairs[n0];
        if k_n0 == 0 {
            failures.push(CandidateFailure {
                n0,
                m0: None,
                reason: "witness pair touches the base point".into(),
            });
            continue;
        }
        let Some(delta_j) = eps.delta(j_n0) else {
            failures.push(CandidateFailure {
                n0,
                m0: None,
                reason: format!("epsilon profile does not define delta_{j_n0}"),
            });
            continue;
        };
        let eps_j = eps.eps(j_n0).expect("delta implies eps");
        let half_dj = &delta_j / rint(2);
        let half_ej = &eps_j / rint(2);
        let fn0 = family.member(n0);
        for &m0 in subset {
            if m0 == n0 {
                continue;
            }
            let (k_m0, j_m0) = pairs[m0];
            if k_m0 <= j_n0 {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: format!("needs k(m0) > j(n0) = {j_n0}, got {k_m0}"),
                });
                continue;
            }
            let fm0 = family.member(m0);
            if !(fm0.value(k_n0).abs() < half_dj && fm0.value(j_n0).abs() < half_dj) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: format!("decay bound fails: |f_m0| not below delta/2 = {half_dj} on n0's pair"),
                });
                continue;
            }
            if fn0.value(k_m0) != fn0.value(j_m0) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "f_n0 is not constant on m0's attainment pair".into(),
                });
                continue;
            }
            let c = fn0.value(k_m0).clone();
            let a0 = (fn0.value(k_n0) - &c).abs() >= rint(k_n0 as i64) - &half_ej;
            let a1 = (fn0.value(j_n0) - &c).abs() >= rint(j_n0 as i64) - &half_ej;
            if !a0 && !a1 {
                return Err(Error::Internal(
                    "gap bound split failed on exact data (a-side)".into(),
                ));
            }
            let eps_jm = eps
                .eps(j_m0)
                .ok_or_else(|| Error::Internal("profile must define eps within truncation".into()))?;
            let b0 = fm0.value(k_m0).abs() >= rint(k_m0 as i64) - &half_ej - &half_dj;
            let b1 =
                fm0.value(j_m0).abs() >= rint(j_m0 as i64) - &eps_jm + &half_ej + &half_dj;
            if !b0 && !b1 {
                return Err(Error::Internal(
                    "gap bound split failed on exact data (b-side)".into(),
                ));
            }
            let (x_n, a_is_0) = if a0 { (k_n0, true) } else { (j_n0, false) };
            let (x_m, b_is_0) = if b0 { (k_m0, true) } else { (j_m0, false) };
            let sn = sign8(&(fn0.value(x_n) - &c));
            let sm = sign8(fm0.value(x_m));
            debug_assert!(sn != 0 && sm != 0);
            // sigma_n * f_n0 - sigma_m * f_m0, expressed as f_n0 + delta * f_m0
            let delta = -(sn * sm);
            let quotient = two_term_quotient(family, n0, m0, delta, x_n, x_m)?;
            if quotient <= rint(1) {
                return Err(Error::Internal(
                    "proper case-1 chain failed to exceed 1 on exact data".into(),
                ));
            }
            let mode = match (a_is_0, b_is_0) {
                (true, true) => AttackMode::ProperA0B0,
                (true, false) => AttackMode::ProperA0B1,
                (false, true) => AttackMode::ProperA1B0,
                (false, false) => AttackMode::ProperA1B1,
            };
            let trace = RefutationTrace {
                mode,
                indices: Some((n0, m0)),
                delta: Some(delta),
                sign_vector: None,
                eval_pair: (x_n, x_m),
                quotient,
                constant: Some(c),
                margin: None,
            };
            verify_trace(family, &trace)?;
            return Ok(AttackOutcome::Trace(trace));
        }
    }
    Ok(AttackOutcome::Inconclusive(InconclusiveReport {
        message: "no candidate pair satisfies the proper case-1 preconditions".into(),
        failures,
        constancy: None,
    }))
}

fn proper_case2_off_base(
    family: &FunctionFamily,
    pairs: &[(usize, usize)],
    subset: &[usize],
    z: usize,
) -> Result<AttackOutcome> {
    let quarter = rat(1, 4);
    let mut failures = Vec::new();
    for &n0 in subset {
        let j_n0 = pairs[n0].1;
        if j_n0 <= z {
            failures.push(CandidateFailure {
                n0,
                m0: None,
                reason: format!("needs j(n0) > k* = {z}"),
            });
            continue;
        }
        let fn0 = family.member(n0);
        for &m0 in subset {
            if m0 == n0 {
                continue;
            }
            let j_m0 = pairs[m0].1;
            if j_m0 <= j_n0 {
                continue;
            }
            let fm0 = family.member(m0);
            if !(fn0.value(z).abs() < quarter && fm0.value(z).abs() < quarter) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "shared-point bound fails: |f| not below 1/4".into(),
                });
                continue;
            }
            if fn0.value(j_m0) != fn0.value(z) || fm0.value(j_n0) != fm0.value(z) {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "constancy through the shared point fails".into(),
                });
                continue;
            }
            let sn = sign8(fn0.value(j_n0));
            let sm = sign8(fm0.value(j_m0));
            debug_assert!(sn != 0 && sm != 0);
            let delta = -(sn * sm);
            let quotient = two_term_quotient(family, n0, m0, delta, j_n0, j_m0)?;
            if quotient <= rint(1) {
                return Err(Error::Internal(
                    "proper case-2 chain failed to exceed 1 on exact data".into(),
                ));
            }
            let trace = RefutationTrace {
                mode: AttackMode::Case2,
                indices: Some((n0, m0)),
                delta: Some(delta),
                sign_vector: None,
                eval_pair: (j_n0, j_m0),
                quotient,
                constant: None,
                margin: None,
            };
            verify_trace(family, &trace)?;
            return Ok(AttackOutcome::Trace(trace));
        }
    }
    Ok(AttackOutcome::Inconclusive(InconclusiveReport {
        message: "no candidate pair satisfies the proper case-2 preconditions".into(),
        failures,
        constancy: None,
    }))
}

fn shared_zero_scan(
    family: &FunctionFamily,
    _eps: &EpsProfile,
    pairs: &[(usize, usize)],
    subset: &[usize],
) -> Result<AttackOutcome> {
    let mut failures = Vec::new();
    let mut first_constancy: Option<ConstancyCounterexample> = None;
    for (a, &n0) in subset.iter().enumerate() {
        let yn = pairs[n0].1;
        let fn0 = family.member(n0);
        for &m0 in &subset[a + 1..] {
            let ym = pairs[m0].1;
            let fm0 = family.member(m0);
            if yn == ym {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "witness pairs coincide".into(),
                });
                continue;
            }
            // attainment through the base forces |f(y)| = d(0, y); the
            // other function must vanish there
            let mut bad = None;
            if !fn0.value(ym).is_zero() {
                bad = Some(ConstancyCounterexample {
                    member: n0,
                    owner: m0,
                    pair: (0, ym),
                    values: (fn0.value(0).clone(), fn0.value(ym).clone()),
                });
            } else if !fm0.value(yn).is_zero() {
                bad = Some(ConstancyCounterexample {
                    member: m0,
                    owner: n0,
                    pair: (0, yn),
                    values: (fm0.value(0).clone(), fm0.value(yn).clone()),
                });
            }
            if let Some(ce) = bad {
                failures.push(CandidateFailure {
                    n0,
                    m0: Some(m0),
                    reason: "a member does not vanish on the other's witness".into(),
                });
                first_constancy.get_or_insert(ce);
                continue;
            }
            let sn = sign8(fn0.value(yn));
            let sm = sign8(fm0.value(ym));
            debug_assert!(sn != 0 && sm != 0);
            let delta = -(sn * sm);
            let quotient = two_term_quotient(family, n0, m0, delta, yn, ym)?;
            if quotient <= rint(1) {
                return Err(Error::Internal(
                    "shared-zero chain failed to exceed 1 on exact data".into(),
                ));
            }
            let trace = RefutationTrace {
                mode: AttackMode::Case2,
                indices: Some((n0, m0)),
                delta: Some(delta),
                sign_vector: None,
                eval_pair: (yn, ym),
                quotient,
                constant: None,
                margin: None,
            };
            verify_trace(family, &trace)?;
            return Ok(AttackOutcome::Trace(trace));
        }
    }
    Ok(AttackOutcome::Inconclusive(InconclusiveReport {
        message: "no candidate pair yields the shared-zero trace".into(),
        failures,
        constancy: first_constancy,
    }))
}

/// The shared-base attack of the proper space's Case 2 with k* = 0: all
/// witness pairs attain through the base, where every member vanishes, so
/// |f_n(y_n)| = d(0, y_n) exactly and any two members give the quotient
/// (j(n0) + j(m0)) / (j(n0) + j(m0) - eps_max) > 1. A member that fails
/// to vanish on another's witness is reported as a constancy
/// counterexample instead.
pub fn shared_zero_attack(family: &FunctionFamily) -> Result<AttackOutcome> {
    let eps = proper_profile(family.space())?;
    require_unit_norms(family)?;
    let pairs = declared_oriented(family)?;
    if family.len() < 2 {
        return Err(Error::Input("shared-zero attack needs two members".into()));
    }
    for (i, &(x, _)) in pairs.iter().enumerate() {
        if x != 0 {
            return Err(Error::Input(format!(
                "member `{}` does not attain through the base point",
                family.member(i).name()
            )));
        }
    }
    let subset: Vec<usize> = (0..family.len()).collect();
    shared_zero_scan(family, &eps, &pairs, &subset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::SpaceGenerator;
    use crate::lip::{FunctionFamily, LipschitzFunction};
    use crate::rat::rat;
    use std::sync::Arc;

    fn coloring_of(pairs: &[(usize, usize)]) -> RamseyColoring {
        let k = pairs.len();
        let mut colors = Vec::new();
        for j in 0..k {
            for i in 0..j {
                colors.push(classify(pairs[i], pairs[j]));
            }
        }
        RamseyColoring { members: k, colors }
    }

    #[test]
    fn classify_matches_the_definitions() {
        assert_eq!(classify((0, 1), (2, 3)), Color::A);
        assert_eq!(classify((0, 1), (0, 2)), Color::B1);
        assert_eq!(classify((0, 1), (2, 1)), Color::B2);
        assert_eq!(classify((0, 1), (1, 2)), Color::B3);
        // shared both points is B1 by precedence
        assert_eq!(classify((0, 1), (0, 1)), Color::B1);
    }

    #[test]
    fn all_a_coloring_returns_everything() {
        let c = coloring_of(&[(0, 1), (2, 3), (4, 5), (6, 7)]);
        let (color, subset) = monochromatic_subset(&c, SearchMode::Exact).unwrap();
        assert_eq!(color, Color::A);
        assert_eq!(subset, vec![0, 1, 2, 3]);
        let (color, subset) = monochromatic_subset(&c, SearchMode::Greedy).unwrap();
        assert_eq!(color, Color::A);
        assert_eq!(subset, vec![0, 1, 2, 3]);
    }

    #[test]
    fn mixed_coloring_maximum_by_exhaustion() {
        // members 0,1 share an x; members 2,3 share an x; everything else disjoint.
        // any 3-subset contains a B1 pair and an A pair, so the maximum is 2.
        let c = coloring_of(&[(0, 1), (0, 2), (3, 4), (3, 5)]);
        let (color, subset) = monochromatic_subset(&c, SearchMode::Exact).unwrap();
        assert_eq!(color, Color::A);
        assert_eq!(subset, vec![0, 2]);
    }

    #[test]
    fn adversarial_coloring_with_known_maximum_three() {
        // two B1 triples through different shared points; cross pairs are
        // A but no A-clique beats size 2, so the maximum is 3.
        let pairs = [(0, 1), (0, 2), (0, 3), (10, 11), (10, 12), (10, 13)];
        let c = coloring_of(&pairs);
        let (color, subset) = monochromatic_subset(&c, SearchMode::Exact).unwrap();
        assert_eq!(subset.len(), 3);
        assert_eq!(color, Color::B1);
        assert_eq!(subset, vec![0, 1, 2]);
        // brute-force oracle over every subset confirms 3 is the maximum
        for mask in 0u32..64 {
            let s: Vec<usize> = (0..6).filter(|&i| mask & (1 << i) != 0).collect();
            if s.len() < 2 {
                continue;
            }
            let c0 = c.color(s[0], s[1]);
            let mono = s
                .iter()
                .enumerate()
                .all(|(a, &i)| s[a + 1..].iter().all(|&j| c.color(i, j) == c0));
            assert!(!(mono && s.len() > 3), "found larger subset {s:?}");
        }
    }

    #[test]
    fn exact_mode_rejects_large_families() {
        let pairs: Vec<(usize, usize)> = (0..17).map(|i| (2 * i, 2 * i + 1)).collect();
        let c = coloring_of(&pairs);
        assert!(matches!(
            monochromatic_subset(&c, SearchMode::Exact),
            Err(Error::Size(_))
        ));
        assert!(monochromatic_subset(&c, SearchMode::Greedy).is_ok());
    }

    /// The violating-spikes fixture in generic mode: trace at (p1, p3)
    /// with quotient 33/32.
    #[test]
    fn generic_attack_matches_certify() {
        let space = SpaceGenerator::ud_counterexample().truncate(4).unwrap().arc();
        let f1 = LipschitzFunction::new(
            Arc::clone(&space),
            "f1",
            vec![rat(0, 1), rat(3, 2), rat(3, 4), rat(3, 4)],
        )
        .unwrap();
        let f2 = LipschitzFunction::new(
            Arc::clone(&space),
            "f2",
            vec![rat(0, 1), rat(0, 1), rat(5, 8), rat(-5, 8)],
        )
        .unwrap();
        let fam =
            FunctionFamily::new(space, vec![f1, f2], vec![Some((0, 1)), Some((2, 3))]).unwrap();
        match attack(&fam, SpaceKindMode::Generic).unwrap() {
            AttackOutcome::Trace(t) => {
                assert_eq!(t.eval_pair, (0, 2));
                assert_eq!(t.quotient, rat(33, 32));
                assert_eq!(t.delta, Some(1)); // (-1) * (-1)
                verify_trace(&fam, &t).unwrap();
            }
            other => panic!("expected trace, got {other:?}"),
        }
    }

    #[test]
    fn generic_attack_is_inconclusive_on_certified_tents() {
        let seg = crate::metric::FiniteMetricSpace::from_raw(&crate::metric::RawSpace {
            points: vec!["x".into(), "y".into()],
            base: "x".into(),
            dist: vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        })
        .unwrap();
        let space = crate::metric::disjoint_sum(&[seg.clone(), seg], &rat(3, 1))
            .unwrap()
            .arc();
        let spec = crate::constructions::TentSpec::from_labels(
            &space,
            &[("x@0", "y@0"), ("x@1", "y@1")],
        )
        .unwrap();
        let fam = crate::constructions::tent_family(space, &spec).unwrap();
        match attack(&fam, SpaceKindMode::Generic).unwrap() {
            AttackOutcome::Inconclusive(r) => {
                assert!(r.message.contains("certificate holds"));
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }

    /// Hand-built fixture meeting the bounded counterexample's case-1
    /// preconditions on a ud truncation.
    #[test]
    fn ud_case1_trace_on_adversarial_fixture() {
        let space = SpaceGenerator::ud_counterexample().truncate(20).unwrap().arc();
        let n = space.len();
        // f1 attains at (p2, p3); f2 at (p18, p19); eps_{n0} = 1/6
        let mut v1 = vec![rat(0, 1); n];
        v1[1] = rat(2, 3);
        v1[2] = rat(-2, 3);
        let mut v2 = vec![rat(0, 1); n];
        v2[17] = rat(10, 19);
        v2[18] = rat(-10, 19);
        let f1 = LipschitzFunction::new(Arc::clone(&space), "f1", v1).unwrap();
        let f2 = LipschitzFunction::new(Arc::clone(&space), "f2", v2).unwrap();
        let fam = FunctionFamily::new(
            space,
            vec![f1, f2],
            vec![Some((1, 2)), Some((17, 18))],
        )
        .unwrap();
        match attack(&fam, SpaceKindMode::Ud).unwrap() {
            AttackOutcome::Trace(t) => {
                assert_eq!(t.mode, AttackMode::Case1);
                assert_eq!(t.indices, Some((0, 1)));
                assert_eq!(t.margin, Some(rat(1, 6)));
                assert_eq!(t.constant, Some(rat(0, 1)));
                assert_eq!(t.eval_pair, (1, 17));
                assert_eq!(t.quotient, rat(408, 361));
                verify_trace(&fam, &t).unwrap();
            }
            other => panic!("expected case-1 trace, got {other:?}"),
        }
    }

    #[test]
    fn ud_mode_rejects_foreign_spaces() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(4)
            .unwrap()
            .arc();
        let f = LipschitzFunction::new(
            Arc::clone(&space),
            "f",
            vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)],
        )
        .unwrap();
        let fam = FunctionFamily::new(space, vec![f.clone(), f], vec![Some((0, 1)), Some((0, 1))])
            .unwrap();
        assert!(matches!(
            attack(&fam, SpaceKindMode::Ud),
            Err(Error::Input(_))
        ));
    }

    /// The shared-zero example: f1 at (p0, p1) with value 1, f2 at
    /// (p0, p2) with value 2, default profile; quotient 9/8.
    #[test]
    fn shared_zero_quotient_is_exact() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(3)
            .unwrap()
            .arc();
        let f1 = LipschitzFunction::new(
            Arc::clone(&space),
            "f1",
            vec![rat(0, 1), rat(1, 1), rat(0, 1)],
        )
        .unwrap();
        let f2 = LipschitzFunction::new(
            Arc::clone(&space),
            "f2",
            vec![rat(0, 1), rat(0, 1), rat(2, 1)],
        )
        .unwrap();
        let fam = FunctionFamily::new(
            Arc::clone(&space),
            vec![f1.clone(), f2.clone()],
            vec![Some((0, 1)), Some((0, 2))],
        )
        .unwrap();
        match shared_zero_attack(&fam).unwrap() {
            AttackOutcome::Trace(t) => {
                assert_eq!(t.quotient, rat(9, 8));
                assert_eq!(t.mode, AttackMode::Case2);
                verify_trace(&fam, &t).unwrap();
            }
            other => panic!("expected trace, got {other:?}"),
        }
        // sign flip on f2 is normalized away
        let f2neg = f2.negated();
        let f2neg = LipschitzFunction::new(
            Arc::clone(&space),
            "f2n",
            f2neg.values().to_vec(),
        )
        .unwrap();
        let fam2 = FunctionFamily::new(
            Arc::clone(&space),
            vec![f1, f2neg],
            vec![Some((0, 1)), Some((0, 2))],
        )
        .unwrap();
        match shared_zero_attack(&fam2).unwrap() {
            AttackOutcome::Trace(t) => assert_eq!(t.quotient, rat(9, 8)),
            other => panic!("expected trace, got {other:?}"),
        }
    }

    /// Disjoint spikes on the proper space meeting the decay bound: the
    /// a0/b0 subcase evaluates at the two first points.
    #[test]
    fn proper_case1_a0b0_trace() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(12)
            .unwrap()
            .arc();
        let n = space.len();
        // f1 attains at (p1, p2) with f1(p1) = 1, f1(p2) = 1 - 8/3
        let mut v1 = vec![rat(0, 1); n];
        v1[1] = rat(1, 1);
        v1[2] = rat(-5, 3);
        // f2 attains at (p3, p4) with f2(p3) = 3, f2(p4) = 3 - 33/5
        let mut v2 = vec![rat(0, 1); n];
        v2[3] = rat(3, 1);
        v2[4] = rat(-18, 5);
        let f1 = LipschitzFunction::new(Arc::clone(&space), "f1", v1).unwrap();
        let f2 = LipschitzFunction::new(Arc::clone(&space), "f2", v2).unwrap();
        let fam = FunctionFamily::new(
            space,
            vec![f1, f2],
            vec![Some((1, 2)), Some((3, 4))],
        )
        .unwrap();
        match attack(&fam, SpaceKindMode::Proper).unwrap() {
            AttackOutcome::Trace(t) => {
                assert_eq!(t.mode, AttackMode::ProperA0B0);
                assert_eq!(t.eval_pair, (1, 3));
                assert_eq!(t.quotient, rat(32, 29));
                verify_trace(&fam, &t).unwrap();
            }
            other => panic!("expected a0b0 trace, got {other:?}"),
        }
    }

    /// Same setup with the second member attaining mostly at its far
    /// point: the a0/b1 subcase evaluates at (x_n0, y_m0).
    #[test]
    fn proper_case1_a0b1_trace() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(12)
            .unwrap()
            .arc();
        let n = space.len();
        let mut v1 = vec![rat(0, 1); n];
        v1[1] = rat(1, 1);
        v1[2] = rat(-5, 3);
        // f2(p3) = 13/5 stays below the b0 bound 45/16; f2(p4) = -4 meets b1
        let mut v2 = vec![rat(0, 1); n];
        v2[3] = rat(13, 5);
        v2[4] = rat(-4, 1);
        let f1 = LipschitzFunction::new(Arc::clone(&space), "f1", v1).unwrap();
        let f2 = LipschitzFunction::new(Arc::clone(&space), "f2", v2).unwrap();
        let fam = FunctionFamily::new(
            space,
            vec![f1, f2],
            vec![Some((1, 2)), Some((3, 4))],
        )
        .unwrap();
        match attack(&fam, SpaceKindMode::Proper).unwrap() {
            AttackOutcome::Trace(t) => {
                assert_eq!(t.mode, AttackMode::ProperA0B1);
                assert_eq!(t.eval_pair, (1, 4));
                assert_eq!(t.quotient, rat(25, 23));
                verify_trace(&fam, &t).unwrap();
            }
            other => panic!("expected a0b1 trace, got {other:?}"),
        }
    }

    /// Proper-mode case 2 with a shared non-base point. For exact
    /// unit-norm data the shared-point decay bound is infeasible off the
    /// base: attainment through (p_k*, y) forces
    /// |f(p_k*)| >= d(p_k*, y) - |f(y)| >= k* - eps > 1/2 when k* >= 1.
    /// The branch must report that unmet precondition, not a trace.
    #[test]
    fn proper_case2_off_base_reports_unmet_bound() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(8)
            .unwrap()
            .arc();
        let n = space.len();
        // shared x = p1; witnesses (p1, p3) and (p1, p5)
        let mut v1 = vec![rat(0, 1); n];
        v1[1] = rat(-5, 8);
        v1[3] = rat(3, 1); // oscillation 29/8 = d(p1, p3)
        let mut v2 = vec![rat(0, 1); n];
        v2[1] = rat(1, 1);
        v2[5] = rat(-55, 12); // oscillation 67/12 = d(p1, p5)
        let f1 = LipschitzFunction::new(Arc::clone(&space), "f1", v1).unwrap();
        let f2 = LipschitzFunction::new(Arc::clone(&space), "f2", v2).unwrap();
        let fam = FunctionFamily::new(
            space,
            vec![f1, f2],
            vec![Some((1, 3)), Some((1, 5))],
        )
        .unwrap();
        match attack(&fam, SpaceKindMode::Proper).unwrap() {
            AttackOutcome::Inconclusive(r) => {
                assert!(r
                    .failures
                    .iter()
                    .any(|f| f.reason.contains("shared-point bound")));
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }

    #[test]
    fn shared_zero_reports_constancy_failure() {
        let space = SpaceGenerator::proper_counterexample_default()
            .truncate(3)
            .unwrap()
            .arc();
        // f1 fails to vanish at p2 = f2's witness
        let f1 = LipschitzFunction::new(
            Arc::clone(&space),
            "f1",
            vec![rat(0, 1), rat(1, 1), rat(1, 2)],
        )
        .unwrap();
        let f2 = LipschitzFunction::new(
            Arc::clone(&space),
            "f2",
            vec![rat(0, 1), rat(0, 1), rat(2, 1)],
        )
        .unwrap();
        let fam = FunctionFamily::new(
            space,
            vec![f1, f2],
            vec![Some((0, 1)), Some((0, 2))],
        )
        .unwrap();
        match shared_zero_attack(&fam).unwrap() {
            AttackOutcome::Inconclusive(r) => {
                let ce = r.constancy.expect("constancy counterexample");
                assert_eq!(ce.member, 0);
                assert_eq!(ce.values.1, rat(1, 2));
            }
            other => panic!("expected inconclusive with counterexample, got {other:?}"),
        }
    }

}
