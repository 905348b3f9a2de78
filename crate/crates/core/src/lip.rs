//! Lipschitz functions vanishing at the base point, their exact norms, and
//! strong-attainment witnesses.

use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::rat::Rat;
use crate::scaled::{max_ratio_only, max_ratio_with_witnesses, ScanData};

/// A function on a finite space with value 0 at the base point, stored as a
/// dense exact value vector. Immutable; the Lipschitz norm is computed on
/// first use and cached.
#[derive(Debug, Clone)]
pub struct LipschitzFunction {
    space: Arc<FiniteMetricSpace>,
    name: String,
    values: Vec<Rat>,
    norm: OnceLock<Rat>,
}

impl LipschitzFunction {
    pub fn new(space: Arc<FiniteMetricSpace>, name: &str, values: Vec<Rat>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Input(format!(
                "function `{name}` has {} values for {} points",
                values.len(),
                space.len()
            )));
        }
        if !values[space.base_index()].is_zero() {
            return Err(Error::Input(format!(
                "function `{name}` has value {} at the base point",
                values[space.base_index()]
            )));
        }
        Ok(LipschitzFunction {
            space,
            name: name.to_string(),
            values,
            norm: OnceLock::new(),
        })
    }

    /// Builds a function from sparse (label, value) pairs; unlisted points
    /// get value 0.
    pub fn from_pairs<'a, I>(space: Arc<FiniteMetricSpace>, name: &str, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Rat)>,
    {
        let mut values = vec![Rat::zero(); space.len()];
        for (label, v) in pairs {
            let i = space.index_of(label)?;
            values[i] = v;
        }
        Self::new(space, name, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &Rat {
        &self.values[i]
    }

    /// Exact Lipschitz norm: the maximum of |f(p) - f(q)| / d(p, q) over
    /// all pairs. Errors on a single-point space, where the supremum is
    /// over an empty set.
    pub fn lip_norm(&self) -> Result<Rat> {
        if self.space.len() < 2 {
            return Err(Error::UndefinedNorm);
        }
        if let Some(n) = self.norm.get() {
            return Ok(n.clone());
        }
        let data = ScanData::new(&self.space, &[self]);
        let norm = max_ratio_only(&data, 0).expect("two points checked");
        Ok(self.norm.get_or_init(|| norm).clone())
    }

    /// Every pair at which the norm is attained, in canonical pair order.
    /// Nonempty on finite spaces.
    pub fn sna_witnesses(&self) -> Result<Vec<WitnessPair>> {
        if self.space.len() < 2 {
            return Err(Error::UndefinedNorm);
        }
        let data = ScanData::new(&self.space, &[self]);
        let (norm, pairs) = max_ratio_with_witnesses(&data, 0).expect("two points checked");
        let _ = self.norm.get_or_init(|| norm.clone());
        Ok(pairs
            .into_iter()
            .map(|(p, q)| WitnessPair { p, q, ratio: norm.clone() })
            .collect())
    }

    /// |f(p) - f(q)| / d(p, q) for one pair of distinct points.
    pub fn pair_ratio(&self, p: usize, q: usize) -> Result<Rat> {
        if p == q {
            return Err(Error::Input("pair ratio needs two distinct points".into()));
        }
        Ok((&self.values[p] - &self.values[q]).abs() / self.space.dist(p, q))
    }

    /// Same function with every value negated.
    pub fn negated(&self) -> Self {
        LipschitzFunction {
            space: Arc::clone(&self.space),
            name: format!("-{}", self.name),
            values: self.values.iter().map(|v| -v).collect(),
            norm: self.norm.clone(),
        }
    }
}

/// A pair of distinct points with the oscillation ratio of some function
/// across it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPair {
    pub p: usize,
    pub q: usize,
    pub ratio: Rat,
}

/// Finite stand-in for a c0 coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(pub Vec<Rat>);

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> Option<Rat> {
        self.0.iter().map(|x| x.abs()).max()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }
}

/// An ordered family of functions over one shared space, each optionally
/// carrying a declared attainment pair. Declared pairs are verified at
/// construction: the ratio across the pair must equal the member's norm.
#[derive(Debug, Clone)]
pub struct FunctionFamily {
    space: Arc<FiniteMetricSpace>,
    members: Vec<LipschitzFunction>,
    witnesses: Vec<Option<(usize, usize)>>,
    /// Shared integer lattice for the members' values, built lazily;
    /// `None` inside when the values do not fit native integers.
    lattice: OnceLock<Option<FamilyLattice>>,
}

/// Member values scaled by their common denominator, for integer-lattice
/// combination.
#[derive(Debug, Clone)]
struct FamilyLattice {
    denom: i64,
    values: Vec<Vec<i64>>,
    max_abs: i128,
}

impl FunctionFamily {
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        members: Vec<LipschitzFunction>,
        witnesses: Vec<Option<(usize, usize)>>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Input("family has no members".into()));
        }
        if witnesses.len() != members.len() {
            return Err(Error::Input("one witness slot per member required".into()));
        }
        for m in &members {
            if !Arc::ptr_eq(m.space(), &space) {
                return Err(Error::Input(format!(
                    "member `{}` lives on a different space",
                    m.name()
                )));
            }
        }
        for (m, w) in members.iter().zip(&witnesses) {
            if let Some((p, q)) = w {
                if p == q {
                    return Err(Error::Input(format!(
                        "degenerate witness pair on `{}`",
                        m.name()
                    )));
                }
                let ratio = m.pair_ratio(*p, *q)?;
                let norm = m.lip_norm()?;
                if ratio != norm {
                    return Err(Error::Input(format!(
                        "declared witness of `{}` has ratio {ratio}, but the norm is {norm}",
                        m.name()
                    )));
                }
            }
        }
        Ok(FunctionFamily {
            space,
            members,
            witnesses,
            lattice: OnceLock::new(),
        })
    }

    fn lattice(&self) -> Option<&FamilyLattice> {
        self.lattice
            .get_or_init(|| {
                use num_traits::ToPrimitive;
                let lcm = crate::rat::denominator_lcm(
                    self.members.iter().flat_map(|m| m.values().iter()),
                );
                let denom = lcm.to_i64()?;
                let values: Option<Vec<Vec<i64>>> = self
                    .members
                    .iter()
                    .map(|m| {
                        m.values()
                            .iter()
                            .map(|v| crate::rat::scale_to_int(v, &lcm).to_i64())
                            .collect()
                    })
                    .collect();
                let values = values?;
                let max_abs = values
                    .iter()
                    .flat_map(|row| row.iter())
                    .map(|v| (*v as i128).abs())
                    .max()
                    .unwrap_or(0);
                Some(FamilyLattice { denom, values, max_abs })
            })
            .as_ref()
    }

    /// Integer-lattice combination when every product provably fits i128.
    fn combine_fast(&self, lambda: &CoefficientVector) -> Option<Vec<Rat>> {
        use num_traits::ToPrimitive;
        let lat = self.lattice()?;
        let lcm = crate::rat::denominator_lcm(lambda.0.iter());
        let ldenom = lcm.to_i64()?;
        let lam: Vec<i128> = lambda
            .0
            .iter()
            .map(|l| crate::rat::scale_to_int(l, &lcm).to_i64().map(|x| x as i128))
            .collect::<Option<_>>()?;
        let max_l = lam.iter().map(|x| x.abs()).max().unwrap_or(0);
        // sum of k products lambda_i * v_i must fit i128
        max_l
            .checked_mul(lat.max_abs)?
            .checked_mul(self.members.len() as i128)?;
        let denom = num_bigint::BigInt::from(lat.denom) * num_bigint::BigInt::from(ldenom);
        let at = |p: usize| {
            let acc: i128 = lam
                .iter()
                .zip(&lat.values)
                .map(|(l, row)| l * row[p] as i128)
                .sum();
            Rat::new(num_bigint::BigInt::from(acc), denom.clone())
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if self.space.len() >= 512 {
                return Some((0..self.space.len()).into_par_iter().map(at).collect());
            }
        }
        Some((0..self.space.len()).map(at).collect())
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &LipschitzFunction {
        &self.members[i]
    }

    pub fn members(&self) -> &[LipschitzFunction] {
        &self.members
    }

    pub fn witness(&self, i: usize) -> Option<(usize, usize)> {
        self.witnesses[i]
    }

    /// Declared witness pair oriented so the first point has the smaller
    /// canonical index.
    pub fn oriented_witness(&self, i: usize) -> Option<(usize, usize)> {
        self.witnesses[i].map(|(p, q)| if p < q { (p, q) } else { (q, p) })
    }

    /// Pointwise combination sum_i lambda_i * f_i.
    pub fn combine(&self, lambda: &CoefficientVector) -> Result<LipschitzFunction> {
        if lambda.len() != self.members.len() {
            return Err(Error::Input(format!(
                "{} coefficients for {} members",
                lambda.len(),
                self.members.len()
            )));
        }
        if let Some(values) = self.combine_fast(lambda) {
            return LipschitzFunction::new(Arc::clone(&self.space), "combined", values);
        }
        let at = |p: usize| {
            let mut acc = Rat::zero();
            for (l, m) in lambda.0.iter().zip(&self.members) {
                if !l.is_zero() && !m.values()[p].is_zero() {
                    acc += l * &m.values()[p];
                }
            }
            acc
        };
        #[cfg(feature = "parallel")]
        let values: Vec<Rat> = {
            use rayon::prelude::*;
            if self.space.len() >= 512 {
                (0..self.space.len()).into_par_iter().map(at).collect()
            } else {
                (0..self.space.len()).map(at).collect()
            }
        };
        #[cfg(not(feature = "parallel"))]
        let values: Vec<Rat> = (0..self.space.len()).map(at).collect();
        LipschitzFunction::new(Arc::clone(&self.space), "combined", values)
    }
}

/// Checked form of the elementary gap bound: for a norm-one function `f`
/// attaining at `pair`, |f(x) - C| + |f(y) - C| >= d(x, y) holds for every
/// real C. The preconditions are verified exactly (contract error
/// otherwise) and the inequality itself is evaluated and returned; the
/// refuters use it as a checked assertion when deriving lower bounds.
pub fn triangle_gap(f: &LipschitzFunction, pair: &WitnessPair, c: &Rat) -> Result<bool> {
    let norm = f.lip_norm()?;
    if !norm.is_one() {
        return Err(Error::Precondition(format!(
            "triangle_gap needs norm exactly 1, got {norm}"
        )));
    }
    let ratio = f.pair_ratio(pair.p, pair.q)?;
    if ratio != norm || pair.ratio != ratio {
        return Err(Error::Precondition(
            "triangle_gap needs an attainment pair of the function".into(),
        ));
    }
    let lhs = (f.value(pair.p) - c).abs() + (f.value(pair.q) - c).abs();
    Ok(&lhs >= f.space().dist(pair.p, pair.q))
}
