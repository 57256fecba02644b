//! Symmetric unit-variance laws and moment/cumulant machinery.
//!
//! Every law here is symmetric about zero with `mu_2 = 1`; that calibration
//! is what makes the expansion coefficients comparable across laws. The four
//! built-ins carry closed-form even moments through order 12, exact samplers,
//! and densities/CDFs; custom laws are moment-only.

use crate::special_math::{normal_cdf, normal_pdf};
use crate::{Error, Result};
use rand_distr::StandardNormal;

/// Half-width of the calibrated uniform law: Uniform[-sqrt(3), sqrt(3)] has
/// variance 1.
pub const UNIFORM_HALF_WIDTH: f64 = 1.7320508075688772;
/// Scale of the calibrated Laplace law: variance `2 b^2 = 1`.
pub const LAPLACE_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Component variances of the calibrated two-component gaussian mixture.
pub const GAUSS_MIX_VARIANCES: (f64, f64) = (0.5, 1.5);

/// Highest moment order the built-in catalog provides in closed form.
pub const CATALOG_MAX_MOMENT: usize = 12;

/// A symmetric law with unit variance.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetricLaw {
    /// Standard normal.
    Gaussian,
    /// Uniform on [-sqrt(3), sqrt(3)].
    Uniform,
    /// Laplace with scale 1/sqrt(2).
    Laplace,
    /// Equal mixture of N(0, 1/2) and N(0, 3/2).
    GaussMix,
    /// Moment-only law: `moments[k]` is `mu_k`. No sampler, density, or CDF.
    Custom { id: String, moments: Vec<f64> },
}

impl SymmetricLaw {
    /// Identifiers of the built-in laws, in catalog order.
    pub const BUILTIN_IDS: [&'static str; 4] = ["gaussian", "uniform", "laplace", "gauss_mix"];

    /// The four built-in laws.
    pub fn catalog() -> Vec<SymmetricLaw> {
        vec![
            SymmetricLaw::Gaussian,
            SymmetricLaw::Uniform,
            SymmetricLaw::Laplace,
            SymmetricLaw::GaussMix,
        ]
    }

    pub fn from_id(id: &str) -> Result<SymmetricLaw> {
        match id {
            "gaussian" => Ok(SymmetricLaw::Gaussian),
            "uniform" => Ok(SymmetricLaw::Uniform),
            "laplace" => Ok(SymmetricLaw::Laplace),
            "gauss_mix" => Ok(SymmetricLaw::GaussMix),
            _ => Err(Error::UnknownLaw { id: id.to_owned() }),
        }
    }

    /// Build a custom moment-only law. The moment sequence must start at
    /// `mu_0 = 1`, have `mu_2 = 1` (unit-variance calibration), vanish at odd
    /// orders, and be finite and positive at even orders.
    pub fn custom(id: impl Into<String>, moments: Vec<f64>) -> Result<SymmetricLaw> {
        let id = id.into();
        if moments.len() < 3 {
            return Err(Error::InvalidInput(
                "custom law needs moments at least through mu_2".into(),
            ));
        }
        for (k, &m) in moments.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::InvalidInput(format!("custom law: mu_{k} is not finite")));
            }
            if k % 2 == 1 {
                if m.abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "custom law: symmetric law requires mu_{k} = 0, got {m}"
                    )));
                }
            } else if m <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "custom law: even moment mu_{k} must be positive, got {m}"
                )));
            }
        }
        if (moments[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "custom law: mu_0 must be 1, got {}",
                moments[0]
            )));
        }
        if (moments[2] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "custom law: mu_2 must be 1 (unit variance), got {}",
                moments[2]
            )));
        }
        Ok(SymmetricLaw::Custom { id, moments })
    }

    pub fn id(&self) -> &str {
        match self {
            SymmetricLaw::Gaussian => "gaussian",
            SymmetricLaw::Uniform => "uniform",
            SymmetricLaw::Laplace => "laplace",
            SymmetricLaw::GaussMix => "gauss_mix",
            SymmetricLaw::Custom { id, .. } => id,
        }
    }

    /// Highest order for which [`moment`](Self::moment) is available.
    pub fn max_moment(&self) -> usize {
        match self {
            SymmetricLaw::Custom { moments, .. } => moments.len() - 1,
            _ => CATALOG_MAX_MOMENT,
        }
    }

    /// `mu_k = E X^k`. Odd orders are exactly zero by symmetry; even orders
    /// come from closed forms for the built-ins.
    pub fn moment(&self, k: usize) -> Result<f64> {
        if k > self.max_moment() {
            return Err(Error::MissingMoment { order: k, available: self.max_moment() });
        }
        if let SymmetricLaw::Custom { moments, .. } = self {
            return Ok(moments[k]);
        }
        if k % 2 == 1 {
            return Ok(0.0);
        }
        let half = k / 2;
        Ok(match self {
            // (2k-1)!!
            SymmetricLaw::Gaussian => double_factorial_odd(half),
            // 3^k / (2k+1)
            SymmetricLaw::Uniform => 3.0f64.powi(half as i32) / (2.0 * half as f64 + 1.0),
            // (2k)! / 2^k
            SymmetricLaw::Laplace => {
                (1..=k).map(|i| i as f64).product::<f64>() / 2.0f64.powi(half as i32)
            }
            // (2k-1)!! (s1^{2k} + s2^{2k}) / 2
            SymmetricLaw::GaussMix => {
                let (v1, v2) = GAUSS_MIX_VARIANCES;
                double_factorial_odd(half) * 0.5 * (v1.powi(half as i32) + v2.powi(half as i32))
            }
            SymmetricLaw::Custom { .. } => unreachable!(),
        })
    }

    /// Fourth cumulant `kappa_4 = mu_4 - 3`.
    pub fn kappa4(&self) -> Result<f64> {
        Ok(self.moment(4)? - 3.0)
    }

    /// Sixth cumulant `kappa_6 = mu_6 - 15 mu_4 + 30`.
    pub fn kappa6(&self) -> Result<f64> {
        Ok(self.moment(6)? - 15.0 * self.moment(4)? + 30.0)
    }

    /// Density, when the law has one in closed form.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            SymmetricLaw::Gaussian => Some(normal_pdf(x)),
            SymmetricLaw::Uniform => {
                Some(if x.abs() <= UNIFORM_HALF_WIDTH { 0.5 / UNIFORM_HALF_WIDTH } else { 0.0 })
            }
            SymmetricLaw::Laplace => Some((-x.abs() / LAPLACE_SCALE).exp() * 0.5 / LAPLACE_SCALE),
            SymmetricLaw::GaussMix => {
                let (v1, v2) = GAUSS_MIX_VARIANCES;
                let (s1, s2) = (v1.sqrt(), v2.sqrt());
                Some(0.5 * (normal_pdf(x / s1) / s1 + normal_pdf(x / s2) / s2))
            }
            SymmetricLaw::Custom { .. } => None,
        }
    }

    /// CDF, when the law has one in closed form.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match self {
            SymmetricLaw::Gaussian => Some(normal_cdf(x)),
            SymmetricLaw::Uniform => Some(if x <= -UNIFORM_HALF_WIDTH {
                0.0
            } else if x >= UNIFORM_HALF_WIDTH {
                1.0
            } else {
                0.5 + 0.5 * x / UNIFORM_HALF_WIDTH
            }),
            SymmetricLaw::Laplace => Some(if x <= 0.0 {
                0.5 * (x / LAPLACE_SCALE).exp()
            } else {
                1.0 - 0.5 * (-x / LAPLACE_SCALE).exp()
            }),
            SymmetricLaw::GaussMix => {
                let (v1, v2) = GAUSS_MIX_VARIANCES;
                Some(0.5 * (normal_cdf(x / v1.sqrt()) + normal_cdf(x / v2.sqrt())))
            }
            SymmetricLaw::Custom { .. } => None,
        }
    }

    pub fn has_sampler(&self) -> bool {
        !matches!(self, SymmetricLaw::Custom { .. })
    }

    /// Fill `out` with i.i.d. draws. Samplers are exactly symmetric in
    /// distribution (the Laplace one attaches an independent sign to an
    /// exponential draw rather than inverting the CDF).
    pub fn sample_into<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match self {
            SymmetricLaw::Gaussian => {
                for slot in out.iter_mut() {
                    *slot = rng.sample(StandardNormal);
                }
            }
            SymmetricLaw::Uniform => {
                for slot in out.iter_mut() {
                    *slot = (2.0 * rng.random::<f64>() - 1.0) * UNIFORM_HALF_WIDTH;
                }
            }
            SymmetricLaw::Laplace => {
                for slot in out.iter_mut() {
                    let e = -(1.0 - rng.random::<f64>()).ln();
                    let mag = LAPLACE_SCALE * e;
                    *slot = if rng.random::<bool>() { mag } else { -mag };
                }
            }
            SymmetricLaw::GaussMix => {
                let (v1, v2) = GAUSS_MIX_VARIANCES;
                let (s1, s2) = (v1.sqrt(), v2.sqrt());
                for slot in out.iter_mut() {
                    let s = if rng.random::<bool>() { s1 } else { s2 };
                    let z: f64 = rng.sample(StandardNormal);
                    *slot = s * z;
                }
            }
            SymmetricLaw::Custom { id, .. } => {
                return Err(Error::LawUnsupported { id: id.clone(), what: "sampling" });
            }
        }
        Ok(())
    }
}

/// (2k-1)!! = 1*3*...*(2k-1), the 2k-th gaussian moment.
fn double_factorial_odd(k: usize) -> f64 {
    (0..k).map(|i| (2 * i + 1) as f64).product()
}

/// Exact binomial coefficient as f64 (small arguments only).
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Cumulants `kappa_1..kappa_K` from raw moments `mu_0..mu_K`.
///
/// Input is indexed by order with `moments[0] = 1`; output is indexed the
/// same way with `kappa_0 = 0` by convention. Uses the standard recursion
/// `kappa_n = mu_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu_{n-k}`.
pub fn moments_to_cumulants(moments: &[f64]) -> Result<Vec<f64>> {
    if moments.is_empty() || (moments[0] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("moment sequence must start with mu_0 = 1".into()));
    }
    let mut kappa = vec![0.0; moments.len()];
    for n in 1..moments.len() {
        let mut s = moments[n];
        for k in 1..n {
            s -= binomial(n - 1, k - 1) * kappa[k] * moments[n - k];
        }
        kappa[n] = s;
    }
    Ok(kappa)
}

/// Raw moments `mu_0..mu_K` from cumulants indexed by order (`cumulants[0]`
/// is ignored). Inverse of [`moments_to_cumulants`].
pub fn cumulants_to_moments(cumulants: &[f64]) -> Vec<f64> {
    if cumulants.is_empty() {
        return vec![1.0];
    }
    let mut mu = vec![0.0; cumulants.len()];
    mu[0] = 1.0;
    for n in 1..cumulants.len() {
        let mut s = 0.0;
        for k in 1..=n {
            s += binomial(n - 1, k - 1) * cumulants[k] * mu[n - k];
        }
        mu[n] = s;
    }
    mu
}

/// Cumulant of order `l` of the two-point law `+-|x|` (each with probability
/// 1/2) — the conditional law of one summand given its magnitude.
///
/// Odd orders vanish; the low even orders are `kappa_2 = x^2`,
/// `kappa_4 = -2 x^4`, `kappa_6 = 16 x^6`.
pub fn conditional_cumulant(l: usize, x: f64) -> Result<f64> {
    if l == 0 || l > CATALOG_MAX_MOMENT {
        return Err(Error::UnsupportedOrder {
            what: "conditional cumulant",
            order: l,
            supported: "1..=12",
        });
    }
    if l % 2 == 1 {
        return Ok(0.0);
    }
    // Moments of the two-point law: mu_{2j} = x^{2j}. Run the generic
    // recursion on the *normalized* law (+-1) and scale by x^l at the end,
    // which keeps the integer coefficients exact.
    let mut moments = vec![0.0; l + 1];
    for j in 0..=(l / 2) {
        moments[2 * j] = 1.0;
    }
    let kappa = moments_to_cumulants(&moments)?;
    Ok(kappa[l] * x.powi(l as i32))
}
