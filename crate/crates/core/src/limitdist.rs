//! Least-favorable-case limit law of the WMW statistic and the pointwise
//! variance of the limiting ordinal dominance process.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bootstrap::inf_quantile;
use crate::error::{domain, Result};
use crate::seed::{derive, rng_from_seed};

const BRIDGE_STREAM: u64 = 0xB41D_6E00;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgePathConfig {
    pub num_paths: usize,
    pub grid_size: usize,
    pub seed: u64,
}

impl Default for BridgePathConfig {
    fn default() -> Self {
        Self {
            num_paths: 100_000,
            grid_size: 1000,
            seed: 1,
        }
    }
}

/// One Brownian bridge on the grid k/m, k = 0..=m, built as
/// B(k/m) = W(k/m) − (k/m)·W(1).
pub fn bridge_path(grid_size: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let step = (grid_size as f64).recip().sqrt();
    let mut w = Vec::with_capacity(grid_size + 1);
    w.push(0.0);
    let mut acc = 0.0;
    for _ in 0..grid_size {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += step * z;
        w.push(acc);
    }
    let end = acc;
    let m = grid_size as f64;
    for (k, x) in w.iter_mut().enumerate() {
        *x -= (k as f64 / m) * end;
    }
    w[grid_size] = 0.0;
    w
}

/// Rectangle-rule value of ∫₀¹ max{B(u), 0} du along one bridge path.
fn positive_area(path: &[f64]) -> f64 {
    let m = (path.len() - 1) as f64;
    path[1..].iter().map(|&b| b.max(0.0)).sum::<f64>() / m
}

/// Samples of ∫₀¹ max{B(u), 0} du over independent bridge paths. Path p
/// draws from its own substream, so results do not depend on the rayon
/// thread count.
pub fn simulate_bridge_functional(config: &BridgePathConfig) -> Result<Vec<f64>> {
    if config.num_paths == 0 {
        return domain("need at least one path");
    }
    if config.grid_size < 2 {
        return domain("grid_size must be at least 2");
    }
    Ok((0..config.num_paths as u64)
        .into_par_iter()
        .map(|p| {
            let path = bridge_path(config.grid_size, derive(config.seed, BRIDGE_STREAM, p));
            positive_area(&path)
        })
        .collect())
}

/// Empirical inf-quantiles (the ⌈N·p⌉-th smallest sample) at each level.
pub fn limit_quantiles(samples: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return domain("no samples");
    }
    levels
        .iter()
        .map(|&p| {
            if p > 0.0 && p < 1.0 {
                Ok(inf_quantile(samples, p))
            } else {
                domain(format!("quantile level {p} outside (0, 1)"))
            }
        })
        .collect()
}

/// Inputs to the pointwise variance of the limiting ODC process at `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitVarianceInputs {
    pub u: f64,
    /// Limiting share n₂/(n₁+n₂).
    pub lambda: f64,
    /// R(u).
    pub r_u: f64,
    /// ODC density r(u).
    pub density: f64,
    /// C(R(u), u).
    pub c_ru_u: f64,
    /// C(u, u).
    pub c_uu: f64,
}

/// λ(R − R²) + (1−λ)r²(u − u²) − 2λ^{1/2}(1−λ)^{1/2} r (C(R, u) − R·u).
pub fn limit_variance(inp: &LimitVarianceInputs) -> Result<f64> {
    let LimitVarianceInputs {
        u,
        lambda,
        r_u,
        density,
        c_ru_u,
        c_uu,
    } = *inp;
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("u must lie in (0, 1), got {u}"));
    }
    if !(0.0..=1.0).contains(&lambda) || !(0.0..=1.0).contains(&r_u) {
        return domain("lambda and R(u) must lie in [0, 1]");
    }
    if !(density >= 0.0 && density.is_finite()) {
        return domain("density must be finite and nonnegative");
    }
    if !(0.0..=r_u.min(u)).contains(&c_ru_u) || !(0.0..=u).contains(&c_uu) {
        return domain("copula values violate the Frechet bounds");
    }
    let var = lambda * (r_u - r_u * r_u) + (1.0 - lambda) * density * density * (u - u * u)
        - 2.0 * (lambda * (1.0 - lambda)).sqrt() * density * (c_ru_u - r_u * u);
    Ok(var.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_is_pinned() {
        for seed in 0..20 {
            let p = bridge_path(50, seed);
            assert_eq!(p.len(), 51);
            assert_eq!(p[0], 0.0);
            assert_eq!(p[50], 0.0);
        }
    }

    #[test]
    fn functional_is_nonnegative_and_reproducible() {
        let cfg = BridgePathConfig {
            num_paths: 500,
            grid_size: 100,
            seed: 5,
        };
        let a = simulate_bridge_functional(&cfg).unwrap();
        assert!(a.iter().all(|&x| x >= 0.0));
        assert_eq!(a, simulate_bridge_functional(&cfg).unwrap());
        assert!(simulate_bridge_functional(&BridgePathConfig { grid_size: 1, ..cfg }).is_err());
    }

    #[test]
    fn quantile_examples() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(limit_quantiles(&s, &[0.9]).unwrap(), vec![90.0]);
        assert_eq!(limit_quantiles(&[0.3; 9], &[0.1, 0.5, 0.99]).unwrap(), vec![0.3; 3]);
        assert!(limit_quantiles(&[], &[0.5]).is_err());
        assert!(limit_quantiles(&s, &[1.0]).is_err());
        let q = limit_quantiles(&s, &[0.9, 0.95, 0.99]).unwrap();
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn variance_examples() {
        let u = 0.3;
        let product = LimitVarianceInputs {
            u,
            lambda: 0.5,
            r_u: u,
            density: 1.0,
            c_ru_u: u * u,
            c_uu: u * u,
        };
        assert!((limit_variance(&product).unwrap() - 0.21).abs() < 1e-15);

        let one_sample = LimitVarianceInputs {
            u,
            lambda: 1.0,
            r_u: 0.4,
            density: 0.0,
            c_ru_u: 0.12,
            c_uu: 0.09,
        };
        assert!((limit_variance(&one_sample).unwrap() - 0.24).abs() < 1e-15);

        for u in [0.1, 0.5, 0.8] {
            let comonotone = LimitVarianceInputs {
                u,
                lambda: 0.5,
                r_u: u,
                density: 1.0,
                c_ru_u: u,
                c_uu: u,
            };
            assert!(limit_variance(&comonotone).unwrap().abs() < 1e-15);
        }

        let bad = LimitVarianceInputs { c_ru_u: 0.5, ..product };
        assert!(limit_variance(&bad).is_err());
    }

    #[test]
    fn contact_set_variance_is_u_minus_c() {
        for &(u, c) in &[(0.2, 0.05), (0.5, 0.3), (0.7, 0.6)] {
            let v = limit_variance(&LimitVarianceInputs {
                u,
                lambda: 0.5,
                r_u: u,
                density: 1.0,
                c_ru_u: c,
                c_uu: c,
            })
            .unwrap();
            assert!((v - (u - c)).abs() < 1e-14);
        }
    }
}
