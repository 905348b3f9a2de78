//! Exact decision procedure for "this family is isometrically equivalent
//! to the canonical c0 basis inside the strongly norm-attaining set".
//!
//! The certificate is the pairwise bound
//! `sum_i |f_i(p) - f_i(q)| <= d(p, q)` over all point pairs. Because the
//! supremum of |sum_i s_i c_i| over the sup-norm ball is `sum_i |c_i|`,
//! the bound holds iff every real combination satisfies
//! `lip_norm(combine(lambda)) <= max_i |lambda_i|`; together with unit
//! member norms this is the exact isometric-c0 property on the finite
//! span, and on finite spaces every combination then strongly attains.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lip::{CoefficientVector, FunctionFamily};
use crate::rat::{Rat, rint};
use crate::scaled::{first_pairwise_excess, ScanData};

/// Successful outcome of [`certify_c0`]: unit member norms plus the
/// pairwise bound, with the forced constancy data of the family.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// One attainment pair per member: the declared witness when present,
    /// otherwise the first attaining pair in canonical order.
    pub attainment: Vec<(usize, usize)>,
    /// Number of unordered point pairs the bound was checked on.
    pub checked_pairs: usize,
    /// Constancy table: entry (i, j), i != j, is the common value of
    /// member i on member j's attainment pair.
    pub constancy: ConstancyTable,
}

/// Constructive witness that the pairwise bound fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// First violating pair in canonical order.
    pub pair: (usize, usize),
    /// Signs of f_i(p) - f_i(q) at the violating pair.
    pub signs: Vec<i8>,
    /// sum_i |f_i(p) - f_i(q)| - d(p, q), strictly positive.
    pub excess: Rat,
}

#[derive(Debug, Clone)]
pub enum CertifyOutcome {
    Certified(Certificate),
    Violated(Violation),
}

/// Table of common values C(i, j) = f_i(x_j) = f_i(y_j); `None` on the
/// diagonal.
#[derive(Debug, Clone)]
pub struct ConstancyTable(pub Vec<Vec<Option<Rat>>>);

/// A member taking different values at another member's attainment pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstancyCounterexample {
    /// Member evaluated.
    pub member: usize,
    /// Member whose attainment pair is violated.
    pub owner: usize,
    pub pair: (usize, usize),
    pub values: (Rat, Rat),
}

#[derive(Debug, Clone)]
pub enum ConstancyOutcome {
    Table(ConstancyTable),
    Counterexample(ConstancyCounterexample),
}

/// Checks that every member has Lipschitz norm exactly 1 and returns one
/// attainment pair per member (declared witness first, else the first
/// attaining pair in canonical order).
fn unit_norm_attainment(family: &FunctionFamily) -> Result<Vec<(usize, usize)>> {
    let one = rint(1);
    let mut out = Vec::with_capacity(family.len());
    for i in 0..family.len() {
        let m = family.member(i);
        let norm = m.lip_norm()?;
        if norm != one {
            return Err(Error::NotNormalized {
                member: m.name().to_string(),
                norm: norm.to_string(),
            });
        }
        if let Some(pair) = family.oriented_witness(i) {
            out.push(pair);
        } else {
            let wits = m.sna_witnesses()?;
            let w = &wits[0];
            out.push((w.p, w.q));
        }
    }
    Ok(out)
}

fn constancy_table(
    family: &FunctionFamily,
    attainment: &[(usize, usize)],
) -> std::result::Result<ConstancyTable, ConstancyCounterexample> {
    let k = family.len();
    let mut table = vec![vec![None; k]; k];
    for owner in 0..k {
        let (p, q) = attainment[owner];
        for member in 0..k {
            if member == owner {
                continue;
            }
            let f = family.member(member);
            if f.value(p) != f.value(q) {
                return Err(ConstancyCounterexample {
                    member,
                    owner,
                    pair: (p, q),
                    values: (f.value(p).clone(), f.value(q).clone()),
                });
            }
            table[member][owner] = Some(f.value(p).clone());
        }
    }
    Ok(ConstancyTable(table))
}

/// Certifies or refutes the family. Members must have norm exactly 1
/// (reported as a distinct error, not a violation). On success the
/// pairwise bound held on every pair; the forced constancy table is part
/// of the certificate, and its failure after a successful scan is an
/// internal error, since the scan makes it impossible.
pub fn certify_c0(family: &FunctionFamily) -> Result<CertifyOutcome> {
    if family.is_empty() {
        return Err(Error::Input("cannot certify an empty family".into()));
    }
    let attainment = unit_norm_attainment(family)?;
    let space = family.space();
    let members: Vec<_> = family.members().iter().collect();
    let data = ScanData::new(space, &members);
    if let Some(((p, q), excess)) = first_pairwise_excess(&data) {
        let signs = family
            .members()
            .iter()
            .map(|f| {
                let d = f.value(p) - f.value(q);
                if d.is_zero() {
                    0
                } else if d.is_positive() {
                    1
                } else {
                    -1
                }
            })
            .collect();
        return Ok(CertifyOutcome::Violated(Violation { pair: (p, q), signs, excess }));
    }
    let checked_pairs = space.len() * (space.len() - 1) / 2;
    match constancy_table(family, &attainment) {
        Ok(constancy) => Ok(CertifyOutcome::Certified(Certificate {
            attainment,
            checked_pairs,
            constancy,
        })),
        Err(ce) => Err(Error::Internal(format!(
            "pairwise bound held but member {} is not constant on member {}'s attainment pair",
            ce.member, ce.owner
        ))),
    }
}

/// Brute-force cross-check: the exact maximum over `grid` of
/// `lip_norm(combine(lambda)) / max_i |lambda_i|`.
pub fn grid_oracle(family: &FunctionFamily, grid: &[CoefficientVector]) -> Result<Rat> {
    if grid.is_empty() {
        return Err(Error::Input("empty coefficient grid".into()));
    }
    let mut best: Option<Rat> = None;
    for lambda in grid {
        if lambda.is_zero() {
            return Err(Error::Input("all-zero coefficient vector in grid".into()));
        }
        let f = family.combine(lambda)?;
        let ratio = f.lip_norm()? / lambda.max_abs().expect("nonempty");
        if best.as_ref().map_or(true, |b| &ratio > b) {
            best = Some(ratio);
        }
    }
    Ok(best.unwrap())
}

/// All sign vectors in {-1, 1}^k, or {-1, 0, 1}^k without the zero vector
/// when `with_zero` is set. Lexicographic order.
pub fn sign_grid(k: usize, with_zero: bool) -> Vec<CoefficientVector> {
    let digits: &[i64] = if with_zero { &[-1, 0, 1] } else { &[-1, 1] };
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        let v: Vec<Rat> = cur.iter().map(|&d| rint(digits[d])).collect();
        let cv = CoefficientVector(v);
        if !cv.is_zero() {
            out.push(cv);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < digits.len() {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Verifies the forced constancy of the family: every member must take a
/// single value on every other member's attainment pair. Each member needs
/// an attainment pair (declared, or recovered from its witnesses).
pub fn constancy_check(family: &FunctionFamily) -> Result<ConstancyOutcome> {
    let mut attainment = Vec::with_capacity(family.len());
    for i in 0..family.len() {
        match family.oriented_witness(i) {
            Some(pair) => attainment.push(pair),
            None => {
                return Err(Error::Input(format!(
                    "member `{}` has no declared attainment pair",
                    family.member(i).name()
                )))
            }
        }
    }
    match constancy_table(family, &attainment) {
        Ok(t) => Ok(ConstancyOutcome::Table(t)),
        Err(ce) => Ok(ConstancyOutcome::Counterexample(ce)),
    }
}

/// Oscillation of `f` across a pair divided by the distance, for trace
/// re-verification.
pub fn pair_quotient(f: &crate::lip::LipschitzFunction, p: usize, q: usize) -> Result<Rat> {
    f.pair_ratio(p, q)
}

/// Recomputes a violation from raw values: the combination with the
/// violation's signs must oscillate by d + excess across the pair.
pub fn verify_violation(family: &FunctionFamily, v: &Violation) -> Result<()> {
    let lambda = CoefficientVector(v.signs.iter().map(|&s| rint(s as i64)).collect());
    let f = family.combine(&lambda)?;
    let (p, q) = v.pair;
    let osc = (f.value(p) - f.value(q)).abs();
    let d = family.space().dist(p, q);
    if &osc != &(d + &v.excess) {
        return Err(Error::Internal(format!(
            "violation oscillation {osc} does not match d + excess = {}",
            d + &v.excess
        )));
    }
    if !v.excess.is_positive() {
        return Err(Error::Internal("violation excess is not positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::SpaceGenerator;
    use crate::lip::LipschitzFunction;
    use crate::metric::{disjoint_sum, FiniteMetricSpace, RawSpace};
    use crate::rat::rat;
    use std::sync::Arc;

    fn ud(n: usize) -> Arc<FiniteMetricSpace> {
        SpaceGenerator::ud_counterexample().truncate(n).unwrap().arc()
    }

    /// The pre-normalization picture "(+-3/4 on p1,p2)" shifted to vanish
    /// at the base p1; pairwise differences are unchanged.
    fn violating_spikes() -> FunctionFamily {
        let space = ud(4);
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
        FunctionFamily::new(space, vec![f1, f2], vec![Some((0, 1)), Some((2, 3))]).unwrap()
    }

    #[test]
    fn single_unit_function_certifies() {
        let space = ud(3);
        let f = LipschitzFunction::new(
            Arc::clone(&space),
            "f",
            vec![rat(0, 1), rat(3, 2), rat(3, 4)],
        )
        .unwrap();
        let fam = FunctionFamily::new(space, vec![f], vec![None]).unwrap();
        match certify_c0(&fam).unwrap() {
            CertifyOutcome::Certified(c) => {
                assert_eq!(c.attainment, vec![(0, 1)]);
                assert_eq!(c.checked_pairs, 3);
            }
            other => panic!("expected certificate, got {other:?}"),
        }
    }

    #[test]
    fn non_unit_member_is_a_distinct_error() {
        let space = ud(3);
        let f = LipschitzFunction::new(
            Arc::clone(&space),
            "weak",
            vec![rat(0, 1), rat(3, 4), rat(0, 1)],
        )
        .unwrap();
        let fam = FunctionFamily::new(space, vec![f], vec![None]).unwrap();
        assert!(matches!(
            certify_c0(&fam),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn spikes_violate_at_first_pair() {
        let fam = violating_spikes();
        match certify_c0(&fam).unwrap() {
            CertifyOutcome::Violated(v) => {
                assert_eq!(v.pair, (0, 2)); // (p1, p3)
                assert_eq!(v.excess, rat(1, 24)); // 11/8 - 4/3
                assert_eq!(v.signs, vec![-1, -1]);
                verify_violation(&fam, &v).unwrap();
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn grid_oracle_agrees_on_the_violation() {
        let fam = violating_spikes();
        let max = grid_oracle(&fam, &sign_grid(2, false)).unwrap();
        assert!(max >= rat(33, 32));
    }

    #[test]
    fn grid_oracle_on_certified_tents_is_exactly_one() {
        let seg = FiniteMetricSpace::from_raw(&RawSpace {
            points: vec!["x".into(), "y".into()],
            base: "x".into(),
            dist: vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        })
        .unwrap();
        let space = disjoint_sum(&[seg.clone(), seg], &rat(3, 1)).unwrap().arc();
        let spec = crate::constructions::TentSpec::from_labels(
            &space,
            &[("x@0", "y@0"), ("x@1", "y@1")],
        )
        .unwrap();
        let fam = crate::constructions::tent_family(space, &spec).unwrap();
        assert!(matches!(
            certify_c0(&fam).unwrap(),
            CertifyOutcome::Certified(_)
        ));
        let max = grid_oracle(&fam, &sign_grid(2, true)).unwrap();
        assert_eq!(max, rat(1, 1));
        // k = 1 grid {1}: the oracle is just the member norm
        let single = FunctionFamily::new(
            Arc::clone(fam.space()),
            vec![fam.member(0).clone()],
            vec![None],
        )
        .unwrap();
        let r = grid_oracle(&single, &[CoefficientVector(vec![rat(1, 1)])]).unwrap();
        assert_eq!(r, rat(1, 1));
    }

    #[test]
    fn grid_rejects_zero_vector() {
        let fam = violating_spikes();
        let z = CoefficientVector(vec![rat(0, 1), rat(0, 1)]);
        assert!(matches!(grid_oracle(&fam, &[z]), Err(Error::Input(_))));
        assert!(matches!(grid_oracle(&fam, &[]), Err(Error::Input(_))));
    }

    #[test]
    fn constancy_counterexample_on_shared_pair() {
        // 3-point space; two functions attaining on the same pair with
        // different slopes cannot be mutually constant.
        let raw = RawSpace {
            points: vec!["0".into(), "a".into(), "b".into()],
            base: "0".into(),
            dist: vec![
                vec![rat(0, 1), rat(1, 1), rat(1, 1)],
                vec![rat(1, 1), rat(0, 1), rat(1, 1)],
                vec![rat(1, 1), rat(1, 1), rat(0, 1)],
            ],
        };
        let space = FiniteMetricSpace::from_raw(&raw).unwrap().arc();
        let f1 = LipschitzFunction::new(
            Arc::clone(&space),
            "f1",
            vec![rat(0, 1), rat(1, 1), rat(0, 1)],
        )
        .unwrap();
        let f2 = LipschitzFunction::new(
            Arc::clone(&space),
            "f2",
            vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        )
        .unwrap();
        let fam = FunctionFamily::new(
            space,
            vec![f1, f2],
            vec![Some((1, 2)), Some((1, 2))],
        )
        .unwrap();
        match constancy_check(&fam).unwrap() {
            ConstancyOutcome::Counterexample(ce) => {
                assert_eq!(ce.pair, (1, 2));
                assert_ne!(ce.values.0, ce.values.1);
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn constancy_requires_attainment_pairs() {
        let fam = violating_spikes();
        let no_wit = FunctionFamily::new(
            Arc::clone(fam.space()),
            fam.members().to_vec(),
            vec![None, None],
        )
        .unwrap();
        assert!(matches!(constancy_check(&no_wit), Err(Error::Input(_))));
    }

    #[test]
    fn sign_grid_sizes() {
        assert_eq!(sign_grid(3, false).len(), 8);
        assert_eq!(sign_grid(3, true).len(), 26);
        assert!(sign_grid(2, true).iter().all(|v| !v.is_zero()));
    }
}
