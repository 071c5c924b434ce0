//! Order-statistics layer: empirical CDFs, empirical quantiles, ranks and
//! the empirical ordinal dominance curve.

use crate::error::{domain, usage, Result};
use serde::{Deserialize, Serialize};

/// How the two samples were collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    Independent,
    Matched,
}

impl std::fmt::Display for Pairing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pairing::Independent => f.write_str("independent"),
            Pairing::Matched => f.write_str("matched"),
        }
    }
}

/// Two samples `x1` (from F₁) and `x2` (from F₂).
///
/// Under [`Pairing::Matched`] the i-th entries of `x1` and `x2` form a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleData {
    x1: Vec<f64>,
    x2: Vec<f64>,
    pairing: Pairing,
}

impl TwoSampleData {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>, pairing: Pairing) -> Result<Self> {
        if x1.is_empty() || x2.is_empty() {
            return domain("both samples must be nonempty");
        }
        if x1.iter().chain(&x2).any(|v| !v.is_finite()) {
            return domain("observations must be finite");
        }
        if pairing == Pairing::Matched && x1.len() != x2.len() {
            return domain(format!(
                "matched pairs need equal sample sizes, got {} and {}",
                x1.len(),
                x2.len()
            ));
        }
        Ok(Self { x1, x2, pairing })
    }

    pub fn independent(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        Self::new(x1, x2, Pairing::Independent)
    }

    pub fn matched(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        Self::new(x1, x2, Pairing::Matched)
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn n1(&self) -> usize {
        self.x1.len()
    }

    pub fn n2(&self) -> usize {
        self.x2.len()
    }

    /// Apply `g` to every observation of both samples.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.x1.iter().map(|&v| g(v)).collect(),
            self.x2.iter().map(|&v| g(v)).collect(),
            self.pairing,
        )
    }

    /// True when any value occurs more than once in the pooled sample.
    pub fn has_ties(&self) -> bool {
        let mut pooled: Vec<f64> = self.x1.iter().chain(&self.x2).copied().collect();
        pooled.sort_by(f64::total_cmp);
        pooled.windows(2).any(|w| w[0] == w[1])
    }
}

/// The empirical ODC evaluated on the grid u = i/n₂, i = 1..n₂.
#[derive(Debug, Clone, PartialEq)]
pub struct OdcCurve {
    values: Vec<f64>,
    n1: usize,
    n2: usize,
}

impl OdcCurve {
    /// Build a curve from explicit values, checking the grid invariants.
    pub fn new(values: Vec<f64>, n1: usize) -> Result<Self> {
        if n1 == 0 || values.is_empty() {
            return domain("ODC needs n1 >= 1 and at least one grid value");
        }
        let mut prev = 0.0;
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("ODC value {v} outside [0, 1]"));
            }
            let k = v * n1 as f64;
            if (k - k.round()).abs() > 1e-9 {
                return domain(format!("ODC value {v} is not a multiple of 1/{n1}"));
            }
            if v < prev {
                return domain("ODC values must be nondecreasing");
            }
            prev = v;
        }
        let n2 = values.len();
        Ok(Self { values, n1, n2 })
    }

    /// `counts[i]` is n₁·R̂((i+1)/n₂).
    pub(crate) fn from_counts(counts: impl IntoIterator<Item = usize>, n1: usize) -> Self {
        let values: Vec<f64> = counts.into_iter().map(|c| c as f64 / n1 as f64).collect();
        let n2 = values.len();
        Self { values, n1, n2 }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Grid abscissae i/n₂, i = 1..n₂.
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n2).map(move |i| i as f64 / self.n2 as f64)
    }

    pub(crate) fn check_same_grid(&self, other: &OdcCurve) -> Result<()> {
        if self.n1 != other.n1 || self.n2 != other.n2 {
            return usage(format!(
                "ODC grids differ: (n1={}, n2={}) vs (n1={}, n2={})",
                self.n1, self.n2, other.n1, other.n2
            ));
        }
        Ok(())
    }
}

/// Normalized within-sample ranks of matched pairs, the inputs to the
/// empirical copula.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub u_ranks: Vec<f64>,
    pub v_ranks: Vec<f64>,
}

impl RankProfile {
    pub fn len(&self) -> usize {
        self.u_ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_ranks.is_empty()
    }
}

pub(crate) fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Number of elements of the ascending slice `sorted` that are `<= x`.
#[inline]
pub(crate) fn count_le(sorted: &[f64], x: f64) -> usize {
    sorted.partition_point(|&v| v <= x)
}

/// F̂(x) = (1/n)·#{i : sampleᵢ ≤ x}.
pub fn ecdf_eval(sample: &[f64], x: f64) -> Result<f64> {
    if sample.is_empty() {
        return domain("ECDF of an empty sample");
    }
    if x.is_nan() {
        return domain("ECDF evaluated at NaN");
    }
    let count = sample.iter().filter(|&&v| v <= x).count();
    Ok(count as f64 / sample.len() as f64)
}

/// Q̂(u) = inf{x : F̂(x) ≥ u}, i.e. the ⌈n·u⌉-th order statistic.
///
/// Values of `n·u` within 1e-9 of an integer are snapped to it so that grid
/// points `u = i/n` land on the i-th order statistic despite rounding.
pub fn empirical_quantile(sample: &[f64], u: f64) -> Result<f64> {
    if sample.is_empty() {
        return domain("quantile of an empty sample");
    }
    if !(u > 0.0 && u <= 1.0) {
        return domain(format!("quantile level {u} outside (0, 1]"));
    }
    let n = sample.len();
    let nu = n as f64 * u;
    let k = if (nu - nu.round()).abs() < 1e-9 {
        nu.round() as usize
    } else {
        nu.ceil() as usize
    };
    let s = sorted(sample);
    Ok(s[k.clamp(1, n) - 1])
}

/// Integer form of the empirical ODC: entry i−1 is n₁·F̂₁(X²₍ᵢ₎).
pub(crate) fn odc_counts(data: &TwoSampleData) -> Vec<usize> {
    let s1 = sorted(data.x1());
    let s2 = sorted(data.x2());
    s2.iter().map(|&x| count_le(&s1, x)).collect()
}

/// R̂(i/n₂) = F̂₁(X²₍ᵢ₎) for i = 1..n₂.
pub fn empirical_odc(data: &TwoSampleData) -> OdcCurve {
    OdcCurve::from_counts(odc_counts(data), data.n1())
}

fn within_sample_ranks(sample: &[f64]) -> Vec<usize> {
    let s = sorted(sample);
    sample.iter().map(|&x| count_le(&s, x)).collect()
}

/// Integer within-sample ranks (n·F̂ⱼ(Xᵢʲ)) of matched pairs.
pub(crate) fn integer_ranks(data: &TwoSampleData) -> (Vec<usize>, Vec<usize>) {
    (within_sample_ranks(data.x1()), within_sample_ranks(data.x2()))
}

/// (F̂₁(Xᵢ¹), F̂₂(Xᵢ²)) for every matched pair.
pub fn rank_profile(data: &TwoSampleData) -> Result<RankProfile> {
    if data.pairing() != Pairing::Matched {
        return usage("rank profile requires matched pairs");
    }
    let n = data.n1() as f64;
    let (r1, r2) = integer_ranks(data);
    Ok(RankProfile {
        u_ranks: r1.into_iter().map(|r| r as f64 / n).collect(),
        v_ranks: r2.into_iter().map(|r| r as f64 / n).collect(),
    })
}
