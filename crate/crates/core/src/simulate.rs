//! Data-generating processes and the Monte Carlo rejection-rate driver.
//!
//! Data are generated with F₁ uniform on (0, 1) and Q₂ equal to a chosen
//! ODC R_γ, so the population ODC of every generated pair of samples is
//! exactly R_γ. Matched pairs get their dependence from a copula.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{run_test, BootstrapConfig, Tau};
use crate::error::{domain, usage, Result};
use crate::odc::{Pairing, TwoSampleData};
use crate::seed::{derive, fnv1a, rng_from_seed};

/// Standard normal CDF Φ.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile Φ⁻¹.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("normal quantile level {p} outside (0, 1)"));
    }
    Ok(-std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p))
}

const U_MIN: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

fn clamp_unit(u: f64) -> f64 {
    u.clamp(U_MIN, 1.0 - U_MIN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// R_γ(u) = u^{1+γ}: strictly inside the null for γ > 0.
    PowerNull,
    /// R_γ(u) = Φ(e^γ Φ⁻¹(u)) below 1/2 and u above: on the null boundary.
    PartialContactNull,
    /// R_γ(u) = u^{1−γ}: dominance fails for γ > 0.
    PowerAlt,
    /// R_γ(u) = Φ(e^γ Φ⁻¹(u)): crosses the diagonal at 1/2.
    NormalShiftAlt,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::PowerNull => "power-null",
            FamilyKind::PartialContactNull => "partial-null",
            FamilyKind::PowerAlt => "power-alt",
            FamilyKind::NormalShiftAlt => "normal-alt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdcFamily {
    pub kind: FamilyKind,
    pub gamma: f64,
}

impl OdcFamily {
    pub fn new(kind: FamilyKind, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return domain("gamma must be finite");
        }
        if kind != FamilyKind::NormalShiftAlt && gamma < 0.0 {
            return domain(format!("{} requires gamma >= 0", kind.name()));
        }
        if kind == FamilyKind::PowerAlt && gamma >= 1.0 {
            return domain("power-alt requires gamma < 1");
        }
        Ok(Self { kind, gamma })
    }

    fn shifted(&self, u: f64) -> f64 {
        // u is interior, so the quantile is finite
        let z = normal_quantile(u).unwrap_or(0.0);
        normal_cdf(self.gamma.exp() * z)
    }

    fn eval_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            FamilyKind::PowerNull => u.powf(1.0 + self.gamma),
            FamilyKind::PowerAlt => u.powf(1.0 - self.gamma),
            FamilyKind::PartialContactNull if u < 0.5 => self.shifted(u),
            FamilyKind::PartialContactNull => u,
            FamilyKind::NormalShiftAlt => self.shifted(u),
        }
    }
}

/// R_γ(u) for u in (0, 1).
pub fn odc_family_eval(family: &OdcFamily, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("u must lie in (0, 1), got {u}"));
    }
    Ok(family.eval_unchecked(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CopulaSpec {
    Product,
    Gaussian { rho: f64 },
}

impl CopulaSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            CopulaSpec::Gaussian { rho } if !(rho.abs() < 1.0) => {
                domain(format!("copula correlation must satisfy |rho| < 1, got {rho}"))
            }
            _ => Ok(()),
        }
    }

    fn rho(&self) -> f64 {
        match *self {
            CopulaSpec::Product => 0.0,
            CopulaSpec::Gaussian { rho } => rho,
        }
    }
}

/// (Φ(Z₁), Φ(ρZ₁ + √(1−ρ²)Z₂)) for independent standard normals.
pub fn gaussian_copula_pair<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(rho.abs() < 1.0) {
        return domain(format!("copula correlation must satisfy |rho| < 1, got {rho}"));
    }
    let (a, b) = correlated_normals(rho, rng);
    Ok((normal_cdf(a), normal_cdf(b)))
}

pub(crate) fn correlated_normals<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> (f64, f64) {
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub family: OdcFamily,
    pub n1: usize,
    pub n2: usize,
    pub copula: CopulaSpec,
    pub pairing: Pairing,
    pub mc_reps: usize,
    /// Test configuration; its seed is the master seed of the scenario.
    pub bootstrap: BootstrapConfig,
}

impl ScenarioSpec {
    /// Independent samples of size `n` each with the default replication counts
    /// shrunk to desk scale (5000 replications, 500 bootstrap draws).
    pub fn independent(family: OdcFamily, n: usize) -> Self {
        Self {
            family,
            n1: n,
            n2: n,
            copula: CopulaSpec::Product,
            pairing: Pairing::Independent,
            mc_reps: 5000,
            bootstrap: BootstrapConfig {
                num_reps: 500,
                ..Default::default()
            },
        }
    }

    pub fn matched(family: OdcFamily, n: usize, rho: f64) -> Self {
        Self {
            copula: CopulaSpec::Gaussian { rho },
            pairing: Pairing::Matched,
            ..Self::independent(family, n)
        }
    }

    pub fn with_tau(mut self, tau: Tau) -> Self {
        self.bootstrap.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<()> {
        OdcFamily::new(self.family.kind, self.family.gamma)?;
        self.copula.validate()?;
        self.bootstrap.validate()?;
        if self.n1 == 0 || self.n2 == 0 || self.mc_reps == 0 {
            return domain("sample sizes and replication count must be positive");
        }
        match self.pairing {
            Pairing::Matched if self.n1 != self.n2 => {
                domain("matched pairs require n1 == n2")
            }
            Pairing::Independent if self.copula != CopulaSpec::Product => {
                usage("independent sampling uses the product copula")
            }
            _ => Ok(()),
        }
    }

    /// Stream key of the data-generating process. The test configuration
    /// is deliberately excluded so scenarios that differ only in α, τ or N
    /// see the same data and bootstrap weights.
    fn stream_key(&self) -> u64 {
        let canon = format!(
            "{}|{:016x}|{}|{}|{}|{:016x}",
            self.family.kind.name(),
            self.family.gamma.to_bits(),
            self.n1,
            self.n2,
            self.pairing,
            self.copula.rho().to_bits(),
        );
        fnv1a(canon.as_bytes())
    }
}

/// One dataset: X¹ᵢ = Uᵢ and X²ᵢ = R_γ(Vᵢ), with (Uᵢ, Vᵢ) independent
/// uniforms or copula draws.
pub fn generate_dataset<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<TwoSampleData> {
    spec.validate()?;
    let family = spec.family;
    match spec.pairing {
        Pairing::Independent => {
            let x1 = (0..spec.n1).map(|_| clamp_unit(rng.random())).collect();
            let x2 = (0..spec.n2)
                .map(|_| family.eval_unchecked(clamp_unit(rng.random())))
                .collect();
            TwoSampleData::independent(x1, x2)
        }
        Pairing::Matched => {
            let mut x1 = Vec::with_capacity(spec.n1);
            let mut x2 = Vec::with_capacity(spec.n1);
            for _ in 0..spec.n1 {
                let (u, v) = match spec.copula {
                    CopulaSpec::Product => (rng.random(), rng.random()),
                    CopulaSpec::Gaussian { rho } => {
                        let (a, b) = correlated_normals(rho, rng);
                        (normal_cdf(a), normal_cdf(b))
                    }
                };
                x1.push(clamp_unit(u));
                x2.push(family.eval_unchecked(clamp_unit(v)));
            }
            TwoSampleData::matched(x1, x2)
        }
    }
}

/// Monte Carlo rejection frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub rejections: usize,
    pub reps: usize,
}

/// Fraction of `mc_reps` replications in which the test rejects.
///
/// Replication k draws its data and bootstrap weights from the substream
/// `(seed, scenario, k)`, so the result is identical for any thread count.
pub fn rejection_rate(spec: &ScenarioSpec) -> Result<RateEstimate> {
    spec.validate()?;
    let key = spec.stream_key();
    let master = spec.bootstrap.seed;
    let rejections = (0..spec.mc_reps as u64)
        .into_par_iter()
        .map(|k| -> Result<usize> {
            let mut rng = rng_from_seed(derive(master, key, k));
            let data = generate_dataset(spec, &mut rng)?;
            Ok(usize::from(run_test(&data, &spec.bootstrap, &mut rng)?.reject))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let reps = spec.mc_reps;
    let rate = rejections as f64 / reps as f64;
    Ok(RateEstimate {
        rate,
        std_error: (rate * (1.0 - rate) / reps as f64).sqrt(),
        rejections,
        reps,
    })
}

/// One output row of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub family: String,
    pub gamma: f64,
    pub n1: usize,
    pub n2: usize,
    pub pairing: Pairing,
    pub rho: f64,
    pub alpha: f64,
    pub tau: String,
    pub mc_reps: usize,
    pub num_bootstrap: usize,
    pub rate: f64,
    pub std_error: f64,
}

impl SimulationRow {
    pub fn new(spec: &ScenarioSpec, est: &RateEstimate) -> Self {
        Self {
            family: spec.family.kind.name().to_string(),
            gamma: spec.family.gamma,
            n1: spec.n1,
            n2: spec.n2,
            pairing: spec.pairing,
            rho: spec.copula.rho(),
            alpha: spec.bootstrap.alpha,
            tau: spec.bootstrap.tau.to_string(),
            mc_reps: spec.mc_reps,
            num_bootstrap: spec.bootstrap.num_reps,
            rate: est.rate,
            std_error: est.std_error,
        }
    }
}
