//! The acceptance suite as a library: eleven independently checkable
//! criteria with their runtime budgets. The `acceptance` integration test
//! asserts each one; the CLI `selftest` subcommand prints them.
//!
//! Oracles here are deliberately primitive: plain nested loops and
//! cross-multiplied integer comparisons, sharing no code with the scan
//! kernels they check.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::certify::{
    certify_c0, constancy_check, grid_oracle, sign_grid, verify_violation, CertifyOutcome,
    ConstancyOutcome,
};
use crate::constructions::{case1_select, spike_family, tent_family, SpikeSpec, TentSpec};
use crate::error::{Error, Result};
use crate::fixtures::{concentration_hierarchy, uniform_hierarchy};
use crate::generator::SpaceGenerator;
use crate::io::{emit_json, parse_space_file, SpaceFile};
use crate::lip::{CoefficientVector, FunctionFamily, LipschitzFunction};
use crate::metric::{
    disjoint_sum, validate_metric, FiniteMetricSpace, MetricViolation, RawSpace,
};
use crate::petr::{discreteness_check, petr_extract};
use crate::rat::{rat, rint, Rat};
use crate::refuter::{attack, shared_zero_attack, AttackMode, AttackOutcome, SpaceKindMode};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let budget = match self.budget {
            Some(b) => format!(" [{:.2}s / {:.0}s budget]", self.elapsed.as_secs_f64(), b.as_secs_f64()),
            None => format!(" [{:.2}s]", self.elapsed.as_secs_f64()),
        };
        format!(
            "criterion {:>2} {:<22} {}{}: {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            budget,
            self.detail
        )
    }
}

const NAMES: [&str; 11] = [
    "metric-validation",
    "duality-equivalence",
    "constancy-forcing",
    "tent-reproduction",
    "counterexample-facts",
    "spike-reproduction",
    "case1-greedy",
    "refuter-generic",
    "proof-pattern-attack",
    "net-extraction",
    "serialization",
];

/// Runs one criterion (1-based id).
pub fn run(id: usize, seed: u64) -> Result<CriterionResult> {
    let f: fn(u64) -> Result<String> = match id {
        1 => c01_metric_validation,
        2 => c02_duality_equivalence,
        3 => c03_constancy_forcing,
        4 => c04_tent_reproduction,
        5 => c05_counterexample_facts,
        6 => c06_spike_reproduction,
        7 => c07_case1_greedy,
        8 => c08_refuter_generic,
        9 => c09_proof_pattern,
        10 => c10_net_extraction,
        11 => c11_serialization,
        _ => return Err(Error::Input(format!("no criterion {id}"))),
    };
    let budget = match id {
        1 => Some(Duration::from_secs(5)),
        2 => Some(Duration::from_secs(30)),
        4 | 10 => Some(Duration::from_secs(10)),
        _ => None,
    };
    let start = Instant::now();
    let outcome = f(seed);
    let elapsed = start.elapsed();
    let (mut passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(e) => (false, e.to_string()),
    };
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
        }
    }
    Ok(CriterionResult {
        id,
        name: NAMES[id - 1],
        passed,
        detail,
        elapsed,
        budget,
    })
}

/// Runs all eleven criteria.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    (1..=11)
        .map(|id| run(id, seed).expect("known criterion ids"))
        .collect()
}

fn rng_for(seed: u64, salt: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed ^ (salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn rand_rat(rng: &mut ChaCha20Rng, num_lo: i64, num_hi: i64, den_max: i64) -> Rat {
    let den = rng.gen_range(1..=den_max);
    let num = rng.gen_range(num_lo..=num_hi);
    rat(num, den)
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

/// Random matrix with entries in [1, 2]: always a metric.
fn random_valid_raw(rng: &mut ChaCha20Rng, n: usize) -> RawSpace {
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = rint(1) + rand_rat(rng, 0, 8, 8).abs() / rint(8);
            dist[i][j] = v.clone();
            dist[j][i] = v;
        }
    }
    RawSpace { points: labels(n), base: "q0".into(), dist }
}

/// Random symmetric nonnegative matrix; usually not a metric. Some calls
/// then break symmetry, a diagonal entry, or positivity.
fn random_messy_raw(rng: &mut ChaCha20Rng, n: usize) -> RawSpace {
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = rand_rat(rng, 1, 24, 8).abs();
            dist[i][j] = v.clone();
            dist[j][i] = v;
        }
    }
    let mut raw = RawSpace { points: labels(n), base: "q0".into(), dist };
    match rng.gen_range(0..4) {
        0 => {}
        1 => {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                raw.dist[i][j] += rat(1, 3);
            }
        }
        2 => {
            let i = rng.gen_range(0..n);
            raw.dist[i][i] = rat(1, 2);
        }
        _ => {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                raw.dist[i][j] = Rat::zero();
                raw.dist[j][i] = Rat::zero();
            }
        }
    }
    raw
}

/// Independent validation oracle: plain nested loops over the raw
/// fractions. Small fractions compare by i128 cross-multiplication;
/// otherwise the oracle folds its own common denominator and compares
/// scaled integers.
fn oracle_validate(raw: &RawSpace) -> Vec<MetricViolation> {
    let n = raw.points.len();
    let mut out = Vec::new();
    for i in 0..n {
        if !raw.dist[i][i].is_zero() {
            out.push(MetricViolation::Diagonal {
                p: raw.points[i].clone(),
                value: raw.dist[i][i].clone(),
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if raw.dist[i][j] != raw.dist[j][i] {
                out.push(MetricViolation::Symmetry {
                    p: raw.points[i].clone(),
                    q: raw.points[j].clone(),
                    pq: raw.dist[i][j].clone(),
                    qp: raw.dist[j][i].clone(),
                });
            }
            if raw.dist[i][j].is_zero() && raw.dist[j][i].is_zero() {
                out.push(MetricViolation::Positivity {
                    p: raw.points[i].clone(),
                    q: raw.points[j].clone(),
                });
            }
        }
    }
    // triangle scan on an i128 fraction view when the entries are small,
    // otherwise on integers over the oracle's own common denominator
    let frac: Option<Vec<Vec<(i128, i128)>>> = raw
        .dist
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let nm = x.numer().to_i64()?;
                    let dn = x.denom().to_i64()?;
                    (nm.unsigned_abs() <= 1 << 20 && dn.unsigned_abs() <= 1 << 20)
                        .then_some((nm as i128, dn as i128))
                })
                .collect()
        })
        .collect();
    let violates: Box<dyn Fn(usize, usize, usize) -> bool> = match &frac {
        Some(f) => Box::new(move |i: usize, j: usize, k: usize| {
            let (an, ad) = f[i][k];
            let (bn, bd) = f[i][j];
            let (cn, cd) = f[j][k];
            an * bd * cd > (bn * cd + cn * bd) * ad
        }),
        None => {
            let mut lcm = BigInt::from(1u8);
            for row in &raw.dist {
                for x in row {
                    lcm = num_integer::Integer::lcm(&lcm, x.denom());
                }
            }
            let scaled: Vec<Vec<BigInt>> = raw
                .dist
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|x| x.numer() * (&lcm / x.denom()))
                        .collect()
                })
                .collect();
            Box::new(move |i: usize, j: usize, k: usize| {
                scaled[i][k] > &scaled[i][j] + &scaled[j][k]
            })
        }
    };
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in (i + 1)..n {
                if k == j {
                    continue;
                }
                if violates(i, j, k) {
                    out.push(MetricViolation::Triangle {
                        p: raw.points[i].clone(),
                        q: raw.points[j].clone(),
                        r: raw.points[k].clone(),
                        lhs: raw.dist[i][k].clone(),
                        rhs: &raw.dist[i][j] + &raw.dist[j][k],
                    });
                }
            }
        }
    }
    out
}

fn violations_agree(a: &[MetricViolation], b: &[MetricViolation]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let key = |v: &MetricViolation| v.describe();
    let mut ka: Vec<String> = a.iter().map(key).collect();
    let mut kb: Vec<String> = b.iter().map(key).collect();
    ka.sort();
    kb.sort();
    ka == kb
}

fn all_generators() -> Vec<SpaceGenerator> {
    vec![
        SpaceGenerator::ud_counterexample(),
        SpaceGenerator::proper_counterexample_default(),
        SpaceGenerator::harmonic_sequence(),
        SpaceGenerator::triple_cluster(),
        SpaceGenerator::shrinking_satellites_default(),
        SpaceGenerator::disjoint_sum(SpaceGenerator::ud_counterexample(), 4, rint(3))
            .expect("default sum parameters are valid"),
    ]
}

fn c01_metric_validation(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 1);
    let mut checked = 0usize;
    for case in 0..200 {
        let n = rng.gen_range(2..=20);
        let raw = if case % 2 == 0 {
            random_valid_raw(&mut rng, n)
        } else {
            random_messy_raw(&mut rng, n)
        };
        let got = validate_metric(&raw)?;
        let want = oracle_validate(&raw);
        if !violations_agree(&got, &want) {
            return Err(Error::Internal(format!(
                "validator disagrees with the oracle on random matrix {case}"
            )));
        }
        checked += 1;
    }
    let mut sizes: Vec<usize> = (2..=16).collect();
    sizes.extend([32, 64, 128, 200]);
    for gen in all_generators() {
        for &n in &sizes {
            let space = gen.truncate(n)?;
            let raw = space.to_raw();
            let got = validate_metric(&raw)?;
            let want = oracle_validate(&raw);
            if !got.is_empty() || !want.is_empty() {
                return Err(Error::Internal(format!(
                    "{} truncation n={n} failed validation",
                    gen.kind_name()
                )));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} matrices agreed with the triple-scan oracle"))
}

/// Random unit-norm family on a random tight space.
fn random_unit_family(rng: &mut ChaCha20Rng, n: usize, k: usize) -> Result<FunctionFamily> {
    let space = FiniteMetricSpace::from_raw(&random_valid_raw(rng, n))?.arc();
    let mut members = Vec::new();
    while members.len() < k {
        let mut values: Vec<Rat> = (0..n).map(|_| rand_rat(rng, -8, 8, 8)).collect();
        values[space.base_index()] = Rat::zero();
        let f = LipschitzFunction::new(
            Arc::clone(&space),
            &format!("f{}", members.len() + 1),
            values,
        )?;
        let norm = f.lip_norm()?;
        if norm.is_zero() {
            continue;
        }
        let scaled: Vec<Rat> = f.values().iter().map(|v| v / &norm).collect();
        members.push(LipschitzFunction::new(
            Arc::clone(&space),
            &format!("f{}", members.len() + 1),
            scaled,
        )?);
    }
    let witnesses = vec![None; k];
    FunctionFamily::new(space, members, witnesses)
}

/// Random certified tent family on a random disjoint sum.
fn random_tent_family(rng: &mut ChaCha20Rng, parts: usize) -> Result<FunctionFamily> {
    let part_spaces: Vec<FiniteMetricSpace> = (0..parts)
        .map(|_| {
            let m = rng.gen_range(2..=4);
            FiniteMetricSpace::from_raw(&random_valid_raw(rng, m))
        })
        .collect::<Result<_>>()?;
    let space = disjoint_sum(&part_spaces, &rint(5))?.arc();
    let pairs: Vec<(usize, usize)> = {
        let mut out = Vec::new();
        let mut offset = 0usize;
        for p in &part_spaces {
            out.push((offset, offset + 1));
            offset += p.len();
        }
        out
    };
    let spec = TentSpec::new(&space, pairs)?;
    tent_family(space, &spec)
}

fn c02_duality_equivalence(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 2);
    let mut certified = 0usize;
    let mut violated = 0usize;
    for case in 0..500 {
        let family = if case % 3 == 0 {
            let parts = rng.gen_range(2..=3);
            random_tent_family(&mut rng, parts)?
        } else {
            let n = rng.gen_range(2..=12);
            let k = rng.gen_range(1..=3);
            random_unit_family(&mut rng, n, k)?
        };
        let grid = sign_grid(family.len(), false);
        let max_ratio = grid_oracle(&family, &grid)?;
        match certify_c0(&family)? {
            CertifyOutcome::Certified(_) => {
                certified += 1;
                if max_ratio > rint(1) {
                    return Err(Error::Internal(format!(
                        "case {case}: certified but the sign grid reaches {max_ratio}"
                    )));
                }
            }
            CertifyOutcome::Violated(v) => {
                violated += 1;
                if max_ratio <= rint(1) {
                    return Err(Error::Internal(format!(
                        "case {case}: violated but the sign grid stays at {max_ratio}"
                    )));
                }
                verify_violation(&family, &v)?;
            }
        }
    }
    Ok(format!(
        "500 families: {certified} certified, {violated} violated, verdicts match the sign grid"
    ))
}

/// Norm-preserving perturbation of member `i` at a point of member `j`'s
/// attainment pair: breaks constancy while keeping every declared witness
/// valid.
fn perturb_at_witness(
    family: &FunctionFamily,
    i: usize,
    j: usize,
) -> Result<Option<FunctionFamily>> {
    let space = family.space();
    let (xj, _yj) = family
        .oriented_witness(j)
        .ok_or_else(|| Error::Input("perturbation needs declared witnesses".into()))?;
    if xj == space.base_index() {
        return Ok(None);
    }
    let f = family.member(i);
    // slack of the Lipschitz condition on pairs through x_j
    let mut slack: Option<Rat> = None;
    for p in 0..space.len() {
        if p == xj {
            continue;
        }
        let s = space.dist(xj, p) - (f.value(xj) - f.value(p)).abs();
        if slack.as_ref().map_or(true, |b| &s < b) {
            slack = Some(s);
        }
    }
    let slack = slack.expect("at least two points");
    if !slack.is_positive() {
        return Ok(None);
    }
    let bump = slack / rint(2);
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    for m in 0..family.len() {
        let src = family.member(m);
        let mut values = src.values().to_vec();
        if m == i {
            values[xj] += &bump;
        }
        members.push(LipschitzFunction::new(
            Arc::clone(space),
            src.name(),
            values,
        )?);
        witnesses.push(family.witness(m));
    }
    Ok(Some(FunctionFamily::new(Arc::clone(space), members, witnesses)?))
}

fn c03_constancy_forcing(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 3);
    let mut clean = 0usize;
    let mut caught = 0usize;
    while clean < 100 {
        let family = if clean % 4 == 3 {
            let levels = rng.gen_range(2..=6);
            let space = SpaceGenerator::triple_cluster()
                .truncate(1 + 3 * levels)?
                .arc();
            let pairs: Vec<(usize, usize)> = (0..levels)
                .map(|c| (1 + 3 * c, 2 + 3 * c))
                .collect();
            let spec = SpikeSpec::new(&space, pairs)?;
            spike_family(space, &spec)?
        } else {
            let parts = rng.gen_range(2..=4);
            random_tent_family(&mut rng, parts)?
        };
        if !matches!(certify_c0(&family)?, CertifyOutcome::Certified(_)) {
            return Err(Error::Internal("construction failed to certify".into()));
        }
        match constancy_check(&family)? {
            ConstancyOutcome::Table(_) => clean += 1,
            ConstancyOutcome::Counterexample(ce) => {
                return Err(Error::Internal(format!(
                    "certified family produced a constancy counterexample at pair {:?}",
                    ce.pair
                )))
            }
        }
        // perturb a fresh copy until one admits a norm-preserving bump
        if caught < 100 {
            let k = family.len();
            let i = rng.gen_range(0..k);
            let j = (i + 1 + rng.gen_range(0..k - 1)) % k;
            if let Some(bad) = perturb_at_witness(&family, i, j)? {
                match constancy_check(&bad)? {
                    ConstancyOutcome::Counterexample(_) => {
                        if !matches!(certify_c0(&bad)?, CertifyOutcome::Violated(_)) {
                            return Err(Error::Internal(
                                "perturbed family still certifies".into(),
                            ));
                        }
                        caught += 1;
                    }
                    ConstancyOutcome::Table(_) => {
                        return Err(Error::Internal(
                            "perturbation failed to break constancy".into(),
                        ))
                    }
                }
            }
        }
    }
    if caught < 100 {
        // keep perturbing fresh families until the quota is met
        while caught < 100 {
            let parts = rng.gen_range(2..=4);
            let family = random_tent_family(&mut rng, parts)?;
            let k = family.len();
            let i = rng.gen_range(0..k);
            let j = (i + 1 + rng.gen_range(0..k - 1)) % k;
            if let Some(bad) = perturb_at_witness(&family, i, j)? {
                match constancy_check(&bad)? {
                    ConstancyOutcome::Counterexample(_) => caught += 1,
                    ConstancyOutcome::Table(_) => {
                        return Err(Error::Internal(
                            "perturbation failed to break constancy".into(),
                        ))
                    }
                }
            }
        }
    }
    Ok(format!(
        "{clean} certified families all constant; {caught} perturbed families all caught"
    ))
}

fn c04_tent_reproduction(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 4);
    let part = SpaceGenerator::ud_counterexample().truncate(31)?;
    let parts: Vec<FiniteMetricSpace> = (0..64).map(|_| part.clone()).collect();
    let space = disjoint_sum(&parts, &rint(3))?.arc();
    let n_points = space.len();
    let pairs: Vec<(usize, usize)> = (0..64).map(|c| (31 * c, 31 * c + 1)).collect();
    let spec = TentSpec::new(&space, pairs.clone())?;
    let family = tent_family(Arc::clone(&space), &spec)?;
    if !matches!(certify_c0(&family)?, CertifyOutcome::Certified(_)) {
        return Err(Error::Internal("64-tent family failed to certify".into()));
    }
    for trial in 0..100 {
        let lambda: Vec<Rat> = (0..64).map(|_| rand_rat(&mut rng, -12, 12, 6)).collect();
        let max = lambda.iter().map(|x| x.abs()).max().expect("64 entries");
        if max.is_zero() {
            continue;
        }
        let cv = CoefficientVector(lambda.clone());
        let f = family.combine(&cv)?;
        let norm = f.lip_norm()?;
        if norm != max {
            return Err(Error::Internal(format!(
                "trial {trial}: combined norm {norm} != max coefficient {max}"
            )));
        }
        let witnesses = f.sna_witnesses()?;
        for (g, l) in lambda.iter().enumerate() {
            if l.abs() == max {
                let (x, y) = pairs[g];
                if !witnesses.iter().any(|w| (w.p, w.q) == (x.min(y), x.max(y))) {
                    return Err(Error::Internal(format!(
                        "trial {trial}: argmax tent {g} missing from the witness list"
                    )));
                }
            }
        }
    }
    Ok(format!(
        "64 tents on {n_points} points certified; 100 combinations attained max|lambda| exactly"
    ))
}

fn c05_counterexample_facts(_seed: u64) -> Result<String> {
    let ud = SpaceGenerator::ud_counterexample();
    for n in 2..=200 {
        let space = ud.truncate(n)?;
        let (diam, pairs) = space.diameter()?;
        if diam != rat(3, 2) || !pairs.contains(&(0, 1)) {
            return Err(Error::Internal(format!("ud diameter wrong at n={n}")));
        }
    }
    for k in 1..=100 {
        let rep = ud.separation_radius(&format!("p{k}"))?;
        if rep.radius != rint(1) || rep.attained {
            return Err(Error::Internal(format!("ud radius wrong at p{k}")));
        }
    }
    let proper = SpaceGenerator::proper_counterexample_default();
    for k in 1..=100 {
        let rep = proper.separation_radius(&format!("p{k}"))?;
        if rep.radius != rint(k) || !rep.attained || rep.witnesses != ["p0".to_string()] {
            return Err(Error::Internal(format!("proper radius wrong at p{k}")));
        }
    }
    Ok("ud diameter 3/2 (n <= 200); ud radius 1 unattained; proper radius k at p0".into())
}

fn c06_spike_reproduction(_seed: u64) -> Result<String> {
    let space = SpaceGenerator::triple_cluster().truncate(1 + 3 * 8)?.arc();
    let pairs: Vec<(usize, usize)> = (0..8).map(|c| (1 + 3 * c, 2 + 3 * c)).collect();
    let spec = SpikeSpec::new(&space, pairs.clone())?;
    let family = spike_family(Arc::clone(&space), &spec)?;
    if !matches!(certify_c0(&family)?, CertifyOutcome::Certified(_)) {
        return Err(Error::Internal("spike family failed to certify".into()));
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let delta = Rat::new(BigInt::from(1u8), BigInt::from(1u8) << (4 * (k + 1)));
        let f = family.member(k);
        if f.value(a) != &(&delta * rat(7, 8)) {
            return Err(Error::Internal(format!("spike {k}: value at a is not 7*delta/8")));
        }
        if f.value(b) != &(-&delta / rint(8)) {
            return Err(Error::Internal(format!("spike {k}: value at b is not -delta/8")));
        }
        let wits = f.sna_witnesses()?;
        if wits.len() != 1 || (wits[0].p, wits[0].q) != (a, b) {
            return Err(Error::Internal(format!(
                "spike {k}: witnesses are not exactly its own pair"
            )));
        }
    }
    Ok("8 spike levels certified with exact values 7*delta/8 and -delta/8".into())
}

fn c07_case1_greedy(_seed: u64) -> Result<String> {
    let gen = SpaceGenerator::shrinking_satellites_default();
    let (sel, family) = case1_select(&gen, 10)?;
    let space = &sel.space;
    let mut checked = 0usize;
    for a in 0..10 {
        for b in 0..a {
            let (xa, ya) = family.witness(a).expect("tents declare witnesses");
            let (xb, yb) = family.witness(b).expect("tents declare witnesses");
            if space.dist(xa, xb) < &(space.dist(xa, ya) + space.dist(xb, yb)) {
                return Err(Error::Internal(format!(
                    "tent inequality fails between picks {b} and {a}"
                )));
            }
            checked += 1;
        }
    }
    for w in sel.picks.windows(2) {
        if w[1].margin >= w[0].margin {
            return Err(Error::Internal("margins are not strictly decreasing".into()));
        }
    }
    if !matches!(certify_c0(&family)?, CertifyOutcome::Certified(_)) {
        return Err(Error::Internal("case-1 tent family failed to certify".into()));
    }
    Ok(format!("{checked} pair inequalities hold exactly; margins strictly decrease"))
}

fn c08_refuter_generic(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 8);
    let mut traces = 0usize;
    let mut inconclusive = 0usize;
    for case in 0..200 {
        let family = if case % 4 == 0 {
            let parts = rng.gen_range(2..=3);
            random_tent_family(&mut rng, parts)?
        } else {
            let n = rng.gen_range(2..=12);
            let k = rng.gen_range(1..=3);
            random_unit_family(&mut rng, n, k)?
        };
        let certified = matches!(certify_c0(&family)?, CertifyOutcome::Certified(_));
        match attack(&family, SpaceKindMode::Generic)? {
            AttackOutcome::Trace(t) => {
                if certified {
                    return Err(Error::Internal(format!(
                        "case {case}: trace returned for a certified family"
                    )));
                }
                crate::refuter::verify_trace(&family, &t)?;
                traces += 1;
            }
            AttackOutcome::Inconclusive(_) => {
                if !certified {
                    return Err(Error::Internal(format!(
                        "case {case}: no trace for a violated family"
                    )));
                }
                inconclusive += 1;
            }
        }
    }
    for _ in 0..20 {
        let parts = rng.gen_range(2..=4);
        let family = random_tent_family(&mut rng, parts)?;
        if !matches!(
            attack(&family, SpaceKindMode::Generic)?,
            AttackOutcome::Inconclusive(_)
        ) {
            return Err(Error::Internal(
                "certified tent family was not inconclusive".into(),
            ));
        }
    }
    Ok(format!(
        "200 families: {traces} traces, {inconclusive} certificates, decisions agree; 20 tent families inconclusive"
    ))
}

/// Adversarial fixture meeting the bounded-space case-1 preconditions:
/// two disjoint spike pairs, the second far enough out that all cross
/// distances sit within 1 + eps/3.
fn ud_case1_fixture(rng: &mut ChaCha20Rng, space: &Arc<FiniteMetricSpace>) -> Result<FunctionFamily> {
    // label indices: n0's pair (u, u+1), m0's pair (v, v+1)
    let u = rng.gen_range(2..=4usize);
    let k_n0 = u + 1;
    let v_lo = 6 * k_n0;
    let v = rng.gen_range(v_lo..=60usize);
    let s1 = if rng.gen_bool(0.5) { 1i64 } else { -1 };
    let s2 = if rng.gen_bool(0.5) { 1i64 } else { -1 };
    let mk = |lo: usize, sign: i64| -> Result<LipschitzFunction> {
        let osc = rint(1) + Rat::new(BigInt::from(1u8), BigInt::from((lo + 1) as u64));
        let half = osc / rint(2);
        let mut values = vec![Rat::zero(); space.len()];
        values[lo - 1] = &half * rint(sign);
        values[lo] = -&half * rint(sign);
        LipschitzFunction::new(Arc::clone(space), &format!("s{lo}"), values)
    };
    let f1 = mk(u, s1)?;
    let f2 = mk(v, s2)?;
    FunctionFamily::new(
        Arc::clone(space),
        vec![f1, f2],
        vec![Some((u - 1, u)), Some((v - 1, v))],
    )
}

fn c09_proof_pattern(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 9);
    let space = SpaceGenerator::ud_counterexample().truncate(64)?.arc();
    for case in 0..50 {
        let family = ud_case1_fixture(&mut rng, &space)?;
        match attack(&family, SpaceKindMode::Ud)? {
            AttackOutcome::Trace(t) => {
                if t.mode != AttackMode::Case1 {
                    return Err(Error::Internal(format!(
                        "fixture {case}: expected a case-1 trace, got {}",
                        t.mode.name()
                    )));
                }
                crate::refuter::verify_trace(&family, &t)?;
            }
            AttackOutcome::Inconclusive(r) => {
                return Err(Error::Internal(format!(
                    "fixture {case}: inconclusive ({})",
                    r.message
                )))
            }
        }
    }
    let proper = SpaceGenerator::proper_counterexample_default();
    let eps = |k: usize| rat(1, 2) - Rat::new(BigInt::from(1u8), BigInt::from(2 * (k as u64 + 1)));
    for case in 0..50 {
        let n = rng.gen_range(3..=12usize);
        let space = proper.truncate(n)?.arc();
        let j1 = rng.gen_range(1..n - 1);
        let j2 = rng.gen_range(j1 + 1..n);
        let mk = |j: usize, sign: i64| -> Result<LipschitzFunction> {
            let mut values = vec![Rat::zero(); space.len()];
            values[j] = rint(j as i64) * rint(sign);
            LipschitzFunction::new(Arc::clone(&space), &format!("g{j}"), values)
        };
        let f1 = mk(j1, if rng.gen_bool(0.5) { 1 } else { -1 })?;
        let f2 = mk(j2, if rng.gen_bool(0.5) { 1 } else { -1 })?;
        let family = FunctionFamily::new(
            Arc::clone(&space),
            vec![f1, f2],
            vec![Some((0, j1)), Some((0, j2))],
        )?;
        let expected =
            rint((j1 + j2) as i64) / (rint((j1 + j2) as i64) - eps(j2));
        match shared_zero_attack(&family)? {
            AttackOutcome::Trace(t) => {
                if t.quotient != expected {
                    return Err(Error::Internal(format!(
                        "fixture {case}: quotient {} != expected {expected}",
                        t.quotient
                    )));
                }
            }
            AttackOutcome::Inconclusive(r) => {
                return Err(Error::Internal(format!(
                    "fixture {case}: inconclusive ({})",
                    r.message
                )))
            }
        }
    }
    Ok("50 case-1 fixtures refuted in ud mode; 50 shared-base fixtures hit the exact quotient"
        .into())
}

fn c10_net_extraction(_seed: u64) -> Result<String> {
    let tau = rat(1, 2);
    let space = uniform_hierarchy().arc();
    let (l, state) = petr_extract(&space, 3, &tau)?;
    // independent re-verification of the separation contract
    for n in 1..state.l_sets.len() {
        for j in 0..n {
            let bound = Rat::new(
                BigInt::from(1u8),
                BigInt::from(1u8) << (state.levels[j + 1].k as usize + 2),
            );
            for &p in &state.l_sets[n] {
                for &q in &state.l_sets[j] {
                    if state.n_sets[n].contains(&q) || p == q {
                        continue;
                    }
                    if space.dist(p, q) < &bound {
                        return Err(Error::Internal(format!(
                            "contract fails between levels {n} and {j}"
                        )));
                    }
                }
            }
        }
    }
    if !discreteness_check(&l, &state).ok {
        return Err(Error::Internal("uniform hierarchy failed discreteness".into()));
    }
    let uniform_l = l.len();

    let space = concentration_hierarchy().arc();
    let (l, state) = petr_extract(&space, 3, &tau)?;
    let fired = state.steps.iter().filter(|s| s.case_b.is_some()).count();
    if fired == 0 {
        return Err(Error::Internal("concentration fixture never fired case (b)".into()));
    }
    for (n, excl) in state.n_sets.iter().enumerate() {
        // at most one excluded point per earlier level
        for j in 0..n {
            let from_level = excl
                .iter()
                .filter(|p| state.l_sets[j].contains(p))
                .count();
            if from_level > 1 {
                return Err(Error::Internal(format!(
                    "level {j} lost {from_level} points to exclusion set {n}"
                )));
            }
        }
    }
    if state.n_sets.iter().map(|s| s.len()).sum::<usize>() == 0 {
        return Err(Error::Internal("case (b) produced no exclusions".into()));
    }
    if !discreteness_check(&l, &state).ok {
        return Err(Error::Internal("concentration fixture failed discreteness".into()));
    }
    Ok(format!(
        "contract verified on both fixtures; |L| = {uniform_l} and {} with case (b) fired {fired} time(s)",
        l.len()
    ))
}

fn c11_serialization(seed: u64) -> Result<String> {
    let mut rng = rng_for(seed, 11);
    let mut round_trips = 0usize;
    for gen in all_generators() {
        let file = SpaceFile::generated(&gen, 6);
        let text = emit_json(&file);
        if emit_json(&parse_space_file(&text)?) != text {
            return Err(Error::Internal(format!(
                "{} generator file round-trip not byte-identical",
                gen.kind_name()
            )));
        }
        let explicit = SpaceFile::explicit(&gen.truncate(6)?);
        let text = emit_json(&explicit);
        if emit_json(&parse_space_file(&text)?) != text {
            return Err(Error::Internal(format!(
                "{} explicit file round-trip not byte-identical",
                gen.kind_name()
            )));
        }
        round_trips += 2;
    }
    for _ in 0..50 {
        let n = rng.gen_range(2..=10);
        let space = FiniteMetricSpace::from_raw(&random_valid_raw(&mut rng, n))?;
        let text = emit_json(&SpaceFile::explicit(&space));
        let parsed = parse_space_file(&text)?;
        if emit_json(&parsed) != text {
            return Err(Error::Internal("random explicit round-trip differs".into()));
        }
        if parsed.realize()?.full_matrix() != space.full_matrix() {
            return Err(Error::Internal("random explicit matrix differs".into()));
        }
        round_trips += 1;
    }
    Ok(format!("{round_trips} file round-trips byte-identical"))
}
