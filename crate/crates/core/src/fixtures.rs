//! Deterministic test fixtures: ultrametric cluster hierarchies used by
//! the net-extraction experiments and the composed-embedding examples.

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::rat::{rat, Rat};

/// Ultrametric over leaf paths: d(p, q) = `scales[c]` where `c` is the
/// length of the common prefix of the two paths. Requires strictly
/// decreasing positive scales, one per tree level.
pub fn ultrametric_from_paths(paths: &[Vec<usize>], scales: &[Rat]) -> Result<FiniteMetricSpace> {
    if paths.len() < 2 {
        return Err(Error::Input("hierarchy needs at least two leaves".into()));
    }
    let depth = scales.len();
    if depth == 0 {
        return Err(Error::Input("hierarchy needs at least one scale".into()));
    }
    for w in scales.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Input("scales must be strictly decreasing".into()));
        }
    }
    if !scales[depth - 1].is_positive() {
        return Err(Error::Input("scales must be positive".into()));
    }
    for p in paths {
        if p.len() != depth {
            return Err(Error::Input("every path must have one step per scale".into()));
        }
    }
    let labels: Vec<String> = paths
        .iter()
        .map(|p| {
            let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            format!("x{}", parts.join("."))
        })
        .collect();
    {
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(Error::Input(format!("duplicate leaf path `{l}`")));
            }
        }
    }
    let base = labels[0].clone();
    Ok(FiniteMetricSpace::from_valid_parts(
        labels,
        &base,
        |i, j| {
            let lcp = paths[i]
                .iter()
                .zip(&paths[j])
                .take_while(|(a, b)| a == b)
                .count();
            scales[lcp].clone()
        },
        None,
    ))
}

use num_traits::Signed;

/// The regular 8 x 8 x 8 hierarchy: 512 leaves, top clusters mutually at
/// 1/2, subclusters at 1/8, leaves at 1/32. Its maximal-net tower has
/// sizes 8, 64, 512 at radii 1/2, 1/8, 1/32.
pub fn uniform_hierarchy() -> FiniteMetricSpace {
    let mut paths = Vec::with_capacity(512);
    for t in 0..8 {
        for s in 0..8 {
            for l in 0..8 {
                paths.push(vec![t, s, l]);
            }
        }
    }
    ultrametric_from_paths(&paths, &[rat(1, 2), rat(1, 8), rat(1, 32)])
        .expect("static fixture is well-formed")
}

/// A deliberately skewed hierarchy: 4 top clusters, two subclusters each,
/// and one subcluster holding 40 of the 54 leaves. With tau = 1/2 the
/// extraction's concentration case fires on that subcluster.
pub fn concentration_hierarchy() -> FiniteMetricSpace {
    let mut paths = Vec::new();
    for t in 0..4 {
        for s in 0..2 {
            let leaves = if t == 0 && s == 0 { 40 } else { 2 };
            for l in 0..leaves {
                paths.push(vec![t, s, l]);
            }
        }
    }
    ultrametric_from_paths(&paths, &[rat(1, 2), rat(1, 8), rat(1, 32)])
        .expect("static fixture is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::maximal_separated_subset;

    #[test]
    fn uniform_hierarchy_net_tower() {
        let space = uniform_hierarchy();
        assert_eq!(space.len(), 512);
        assert!(space.revalidate().is_empty());
        for (r, expect) in [
            (rat(1, 2), 8),
            (rat(1, 4), 8),
            (rat(1, 8), 64),
            (rat(1, 16), 64),
            (rat(1, 32), 512),
        ] {
            assert_eq!(
                maximal_separated_subset(&space, &r).unwrap().len(),
                expect
            );
        }
    }

    #[test]
    fn concentration_hierarchy_shape() {
        let space = concentration_hierarchy();
        assert_eq!(space.len(), 54);
        assert!(space.revalidate().is_empty());
        assert_eq!(maximal_separated_subset(&space, &rat(1, 2)).unwrap().len(), 4);
        assert_eq!(maximal_separated_subset(&space, &rat(1, 8)).unwrap().len(), 8);
    }

    #[test]
    fn bad_hierarchies_are_rejected() {
        assert!(ultrametric_from_paths(&[vec![0], vec![0]], &[rat(1, 2)]).is_err());
        assert!(ultrametric_from_paths(
            &[vec![0], vec![1]],
            &[rat(1, 2), rat(1, 2)]
        )
        .is_err());
    }
}
