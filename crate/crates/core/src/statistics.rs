//! Test statistics built on the empirical ODC.
//!
//! All grid quantities are handled as integer numerators over a common
//! denominator before the single final scaling, so the WMW statistic and
//! the exact ODC area agree to within one rounding of each other.

use crate::error::{domain, Result};
use crate::odc::{sorted, OdcCurve, TwoSampleData};
use serde::{Deserialize, Serialize};

/// Tₙ = n₁n₂/(n₁+n₂) and λ̂ = n₂/(n₁+n₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSize {
    pub t_n: f64,
    pub lambda_hat: f64,
}

impl EffectiveSize {
    pub fn sqrt_t(&self) -> f64 {
        self.t_n.sqrt()
    }
}

pub fn effective_size(n1: usize, n2: usize) -> Result<EffectiveSize> {
    if n1 == 0 || n2 == 0 {
        return domain("sample sizes must be positive");
    }
    let (a, b) = (n1 as f64, n2 as f64);
    Ok(EffectiveSize {
        t_n: a * b / (a + b),
        lambda_hat: b / (a + b),
    })
}

pub(crate) fn sqrt_t(n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    (a * b / (a + b)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticKind {
    Wmw,
    Ks,
    OdcArea,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub value: f64,
    pub kind: StatisticKind,
}

fn counts_of(odc: &OdcCurve) -> impl Iterator<Item = i128> + '_ {
    let n1 = odc.n1() as f64;
    odc.values().iter().map(move |&v| (v * n1).round() as i128)
}

/// Ŝ = (Tₙ^{1/2}/n₂) Σᵢ max{R̂(i/n₂) − i/n₂, 0}.
pub fn wmw_statistic(odc: &OdcCurve) -> StatisticValue {
    let (n1, n2) = (odc.n1() as i128, odc.n2() as i128);
    // n₁n₂·(R̂(i/n₂) − i/n₂) = k·n₂ − i·n₁
    let excess: i128 = counts_of(odc)
        .zip(1..)
        .map(|(k, i)| (k * n2 - i * n1).max(0))
        .sum();
    let value = sqrt_t(odc.n1(), odc.n2()) * (excess as f64 / (n1 * n2 * n2) as f64);
    StatisticValue {
        value,
        kind: StatisticKind::Wmw,
    }
}

/// Tₙ^{1/2}·∫₀¹ max{R̂(u) − u, 0} du for the right-continuous step function
/// R̂, which is constant on each ((i−1)/n₂, i/n₂].
pub fn odc_area_functional(odc: &OdcCurve) -> StatisticValue {
    let (n1, n2) = (odc.n1() as i128, odc.n2() as i128);
    // Over the denominator 2·n₁²·n₂², interval i contributes 2·n₁·d + n₁²
    // when d = k·n₂ − i·n₁ ≥ 0, (d + n₁)² when −n₁ < d < 0, and 0 otherwise.
    // The 2·n₁·d parts add up to Ŝ; the rest is at most n₁² per interval,
    // so it is carried as a fraction of Tₙ^{1/2}/(2n₂). Adding a
    // nonnegative term to Ŝ keeps both sides of the bound intact in floating
    // point.
    let rest: i128 = counts_of(odc)
        .zip(1..)
        .map(|(k, i)| {
            let d = k * n2 - i * n1;
            if d >= 0 {
                n1 * n1
            } else if d > -n1 {
                (d + n1) * (d + n1)
            } else {
                0
            }
        })
        .sum();
    let half_step = sqrt_t(odc.n1(), odc.n2()) / (2.0 * odc.n2() as f64);
    let fraction = rest as f64 / (n1 * n1 * n2) as f64;
    let value = wmw_statistic(odc).value + half_step * fraction;
    StatisticValue {
        value,
        kind: StatisticKind::OdcArea,
    }
}

/// Tₙ^{1/2}·max{supₓ (F̂₁(x) − F̂₂(x)), 0}, evaluated at the pooled
/// observations where both step functions jump.
pub fn ks_statistic(data: &TwoSampleData) -> StatisticValue {
    let s1 = sorted(data.x1());
    let s2 = sorted(data.x2());
    let (n1, n2) = (s1.len() as i64, s2.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i64 = 0;
    while i < s1.len() || j < s2.len() {
        let x = match (s1.get(i), s2.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < s1.len() && s1[i] <= x {
            i += 1;
        }
        while j < s2.len() && s2[j] <= x {
            j += 1;
        }
        best = best.max(i as i64 * n2 - j as i64 * n1);
    }
    let value = sqrt_t(data.n1(), data.n2()) * (best as f64 / (n1 * n2) as f64);
    StatisticValue {
        value,
        kind: StatisticKind::Ks,
    }
}
