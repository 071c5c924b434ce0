//! Brute-force oracles. Nothing here calls into the library's statistic or
//! resampling code; inputs come in as plain slices.

#![allow(dead_code)]

/// All weight vectors of length `n` with nonnegative entries summing to `n`,
/// with their multinomial probabilities n!/(∏wᵢ!)·n⁻ⁿ.
pub fn multinomial_support(n: usize) -> Vec<(Vec<u32>, f64)> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    rec(n, n as u32, &mut Vec::new(), &mut all);
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let total = (n as f64).powi(n as i32);
    all.into_iter()
        .map(|w| {
            let p = fact(n as u32) / w.iter().map(|&k| fact(k)).product::<f64>() / total;
            (w, p)
        })
        .collect()
}

/// F̂*(x) numerator: Σ wᵢ·1(xᵢ ≤ x).
fn weighted_count(xs: &[f64], w: &[u32], x: f64) -> u32 {
    xs.iter().zip(w).filter(|(v, _)| **v <= x).map(|(_, k)| *k).sum()
}

/// R̂*(i/n₂), i = 1..n₂, straight from the weighted definitions.
pub fn odc_from_definition(x1: &[f64], x2: &[f64], w1: &[u32], w2: &[u32]) -> Vec<f64> {
    let (n1, n2) = (x1.len(), x2.len());
    (1..=n2)
        .map(|i| {
            // Q̂₂*(i/n₂) = inf{x : F̂₂*(x) ≥ i/n₂}, attained at a sample point
            let q = x2
                .iter()
                .copied()
                .filter(|&x| weighted_count(x2, w2, x) as usize >= i)
                .fold(f64::INFINITY, f64::min);
            weighted_count(x1, w1, q) as f64 / n1 as f64
        })
        .collect()
}

pub fn unit_weights(n: usize) -> Vec<u32> {
    vec![1; n]
}

/// V̂ᵢ from the variance formulas, with the copula counted pair by pair.
pub fn variance_from_definition(x1: &[f64], x2: &[f64], matched: bool) -> Vec<f64> {
    let n2 = x2.len();
    let nf = n2 as f64;
    if !matched {
        return (1..=n2).map(|i| i as f64 / nf - (i * i) as f64 / (nf * nf)).collect();
    }
    let n = x1.len();
    let ecdf = |xs: &[f64], x: f64| xs.iter().filter(|&&v| v <= x).count();
    (1..=n)
        .map(|i| {
            let c = (0..n)
                .filter(|&j| ecdf(x1, x1[j]) <= i && ecdf(x2, x2[j]) <= i)
                .count();
            i as f64 / nf - c as f64 / nf
        })
        .collect()
}

pub struct EnumeratedBootstrap {
    /// (w1, w2, probability, statistic)
    pub outcomes: Vec<(Vec<u32>, Vec<u32>, f64, f64)>,
}

impl EnumeratedBootstrap {
    /// Full conditional law of S̃* (Ŝ* when `tau` is infinite).
    pub fn new(x1: &[f64], x2: &[f64], matched: bool, tau: f64) -> Self {
        let (n1, n2) = (x1.len(), x2.len());
        assert!(n1 <= 4 && n2 <= 4, "enumeration oracle supports n <= 4 only");
        let sqrt_t = ((n1 * n2) as f64 / (n1 + n2) as f64).sqrt();
        let base = odc_from_definition(x1, x2, &unit_weights(n1), &unit_weights(n2));
        let v = variance_from_definition(x1, x2, matched);
        let keep: Vec<bool> = (0..n2)
            .map(|i| {
                if tau.is_infinite() {
                    return true;
                }
                let u = (i + 1) as f64 / n2 as f64;
                sqrt_t * (base[i] - u) >= -tau * v[i].sqrt()
            })
            .collect();
        let stat = |w1: &[u32], w2: &[u32]| {
            let star = odc_from_definition(x1, x2, w1, w2);
            let s: f64 = (0..n2)
                .filter(|&i| keep[i])
                .map(|i| (star[i] - base[i]).max(0.0))
                .sum();
            sqrt_t * s / n2 as f64
        };
        let mut outcomes = Vec::new();
        let s1 = multinomial_support(n1);
        if matched {
            for (w, p) in &s1 {
                outcomes.push((w.clone(), w.clone(), *p, stat(w, w)));
            }
        } else {
            for (w1, p1) in &s1 {
                for (w2, p2) in &multinomial_support(n2) {
                    outcomes.push((w1.clone(), w2.clone(), p1 * p2, stat(w1, w2)));
                }
            }
        }
        Self { outcomes }
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.2).sum()
    }

    /// Distinct statistic values (merged within 1e-12) with their masses,
    /// in increasing order.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.outcomes.iter().map(|o| (o.3, o.2)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for (s, p) in v {
            match atoms.last_mut() {
                Some(last) if (s - last.0).abs() < 1e-12 => last.1 += p,
                _ => atoms.push((s, p)),
            }
        }
        atoms
    }

    pub fn cdf_at(&self, c: f64) -> f64 {
        self.atoms().iter().filter(|a| a.0 <= c + 1e-12).map(|a| a.1).sum()
    }

    /// Exact inf{c : P(S* ≤ c) ≥ 1 − α}, and the distance of 1 − α from the
    /// two CDF values that bracket it.
    pub fn critical_value(&self, alpha: f64) -> (f64, f64) {
        let level = 1.0 - alpha;
        let mut cum = 0.0;
        for (s, p) in self.atoms() {
            let before = cum;
            cum += p;
            if cum >= level - 1e-12 {
                return (s, (level - before).min(cum - level));
            }
        }
        unreachable!("probabilities sum to one")
    }
}

/// Midpoint-rule Tₙ^{1/2}∫₀¹ max{R̂(u) − u, 0} du with R̂(u) = values[⌈n₂u⌉ − 1].
pub fn quadrature_area(values: &[f64], n1: usize, grid: usize) -> f64 {
    let n2 = values.len();
    let sqrt_t = ((n1 * n2) as f64 / (n1 + n2) as f64).sqrt();
    let h = 1.0 / grid as f64;
    let s: f64 = (0..grid)
        .map(|k| {
            let u = (k as f64 + 0.5) * h;
            let idx = ((u * n2 as f64).ceil() as usize).clamp(1, n2) - 1;
            (values[idx] - u).max(0.0)
        })
        .sum();
    sqrt_t * s * h
}

/// erfc via the Chebyshev fit of Numerical Recipes (`erfcc`), relative
/// error below 1.2e-7.
pub fn erfc_nr(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t * (-z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

pub fn phi_nr(x: f64) -> f64 {
    0.5 * erfc_nr(-x / std::f64::consts::SQRT_2)
}

/// P(Z₁ ≤ a, Z₂ ≤ a) for standard normals with correlation ρ, by Simpson's
/// rule on ∫_{−10}^{a} φ(z)·Φ((a − ρz)/√(1−ρ²)) dz.
pub fn bivariate_normal_diag(a: f64, rho: f64) -> f64 {
    let lo = -10.0;
    let m = 4000;
    let h = (a - lo) / m as f64;
    let s = (1.0 - rho * rho).sqrt();
    let f = |z: f64| {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() * phi_nr((a - rho * z) / s)
    };
    let mut acc = f(lo) + f(a);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}

/// A tiny deterministic generator for test data (xorshift64*), so data
/// construction does not depend on the library's RNG plumbing.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn sample(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| 6.0 * self.uniform() - 3.0).collect()
    }
}
