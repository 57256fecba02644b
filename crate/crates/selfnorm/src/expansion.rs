//! Edgeworth expansions for the self-normalized sum, in two flavors.
//!
//! *Marginal*: `Phi(x) + sum_{r=1}^{m-2} Q_r(x) n^{-r/2}` (and the analogous
//! density form), where the `Q_r` are phi-times-polynomial corrections built
//! from the law's moments. Under symmetry every odd-`r` correction vanishes,
//! so only `r = 2` and `r = 4` appear through order `m = 6`.
//!
//! *Conditional*: given the magnitudes `|X_1|..|X_n|`, the signs are
//! independent fair coins and the normalized sum has a lattice-free,
//! symmetric conditional law. Its expansion uses the normalized conditional
//! cumulants `lambda_l = V^{-l} sum_j kappa_l(+-x_j)` in place of moment
//! coefficients; the `n`-decay is implicit in `lambda_l` rather than written
//! as explicit `n^{-r/2}` factors.

use crate::distributions::SymmetricLaw;
use crate::special_math::{hermite_eval, normal_cdf, normal_pdf};
use crate::{Error, Result};

/// Smallest supported expansion order (the plain normal limit).
pub const MIN_ORDER: usize = 2;
/// Largest supported expansion order.
pub const MAX_ORDER: usize = 6;

pub(crate) fn check_order(m: usize) -> Result<()> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&m) {
        return Err(Error::UnsupportedOrder {
            what: "expansion order m",
            order: m,
            supported: "2..=6",
        });
    }
    Ok(())
}

fn check_correction_order(r: usize) -> Result<()> {
    if !(1..=MAX_ORDER - 2).contains(&r) {
        return Err(Error::UnsupportedOrder {
            what: "correction term r",
            order: r,
            supported: "1..=4",
        });
    }
    Ok(())
}

fn h(k: usize, x: f64) -> f64 {
    hermite_eval(k, x).expect("degree within the supported range")
}

// ---------------------------------------------------------------------------
// Marginal corrections Q_r / q_r
// ---------------------------------------------------------------------------

/// Coefficients shared by the order-2 and order-4 marginal corrections.
/// `alpha` multiplies H_3/H_4 at order 2; `beta`, `gamma`, `delta` multiply
/// H_7/H_5/H_3 (CDF) or H_8/H_6/H_4 (density) at order 4.
fn marginal_coeffs(mu4: f64, mu6: f64) -> (f64, f64, f64, f64) {
    let alpha = -mu4 / 12.0;
    let beta = mu4 * mu4 / 288.0;
    let gamma = mu6 / 45.0;
    let delta = (2.0 * mu6 + mu4 - 3.0 * mu4 * mu4) / 12.0;
    (alpha, beta, gamma, delta)
}

/// CDF correction term `Q_r(x)` of the marginal expansion.
///
/// `mu6` is only read when `r = 4`. Odd `r` returns exactly zero (symmetric
/// laws have no odd-order corrections).
pub fn marginal_cdf_correction(r: usize, x: f64, mu4: f64, mu6: f64) -> Result<f64> {
    check_correction_order(r)?;
    if r % 2 == 1 {
        return Ok(0.0);
    }
    let (alpha, beta, gamma, delta) = marginal_coeffs(mu4, mu6);
    let phi = normal_pdf(x);
    Ok(match r {
        2 => -phi * h(3, x) * alpha,
        4 => -phi * (h(7, x) * beta + h(5, x) * gamma + h(3, x) * delta),
        _ => unreachable!(),
    })
}

/// Density correction term `q_r(x) = d/dx Q_r(x)`.
pub fn marginal_density_correction(r: usize, x: f64, mu4: f64, mu6: f64) -> Result<f64> {
    check_correction_order(r)?;
    if r % 2 == 1 {
        return Ok(0.0);
    }
    let (alpha, beta, gamma, delta) = marginal_coeffs(mu4, mu6);
    let phi = normal_pdf(x);
    Ok(match r {
        2 => phi * h(4, x) * alpha,
        4 => phi * (h(8, x) * beta + h(6, x) * gamma + h(4, x) * delta),
        _ => unreachable!(),
    })
}

/// Which function the expansion approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    Cdf,
    Density,
}

/// A fully specified marginal expansion: evaluate with [`eval`](Self::eval).
#[derive(Debug, Clone)]
pub struct EdgeworthApprox {
    kind: ExpansionKind,
    m: usize,
    n: u64,
    mu4: f64,
    mu6: f64,
}

impl EdgeworthApprox {
    /// Build from raw moments. `mu4` is read for `m >= 4`, `mu6` for
    /// `m >= 6`; unused moments may be passed as anything.
    pub fn from_moments(kind: ExpansionKind, m: usize, n: u64, mu4: f64, mu6: f64) -> Result<Self> {
        check_order(m)?;
        if n == 0 {
            return Err(Error::InvalidInput("sample size n must be >= 1".into()));
        }
        Ok(EdgeworthApprox { kind, m, n, mu4, mu6 })
    }

    /// Build from a law, pulling exactly the moments the order needs.
    pub fn new(kind: ExpansionKind, m: usize, n: u64, law: &SymmetricLaw) -> Result<Self> {
        check_order(m)?;
        let mu4 = if m >= 4 { law.moment(4)? } else { 0.0 };
        let mu6 = if m >= 6 { law.moment(6)? } else { 0.0 };
        Self::from_moments(kind, m, n, mu4, mu6)
    }

    pub fn kind(&self) -> ExpansionKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mu4(&self) -> f64 {
        self.mu4
    }

    pub fn mu6(&self) -> f64 {
        self.mu6
    }

    /// Evaluate the expansion at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let inv_n = 1.0 / self.n as f64;
        let (base, t2, t4) = match self.kind {
            ExpansionKind::Cdf => (
                normal_cdf(x),
                marginal_cdf_correction(2, x, self.mu4, self.mu6),
                marginal_cdf_correction(4, x, self.mu4, self.mu6),
            ),
            ExpansionKind::Density => (
                normal_pdf(x),
                marginal_density_correction(2, x, self.mu4, self.mu6),
                marginal_density_correction(4, x, self.mu4, self.mu6),
            ),
        };
        let mut acc = base;
        if self.m >= 4 {
            acc += t2.expect("r = 2 is in range") * inv_n;
        }
        if self.m >= 6 {
            acc += t4.expect("r = 4 is in range") * inv_n * inv_n;
        }
        acc
    }
}

/// Marginal CDF expansion of order `m` at sample size `n`.
pub fn edgeworth_cdf(m: usize, n: u64, law: &SymmetricLaw) -> Result<EdgeworthApprox> {
    EdgeworthApprox::new(ExpansionKind::Cdf, m, n, law)
}

/// Marginal density expansion of order `m` at sample size `n`.
pub fn edgeworth_pdf(m: usize, n: u64, law: &SymmetricLaw) -> Result<EdgeworthApprox> {
    EdgeworthApprox::new(ExpansionKind::Density, m, n, law)
}

// ---------------------------------------------------------------------------
// Conditional corrections
// ---------------------------------------------------------------------------

/// Conditional cumulants of the two-point law +-1, at even orders 2..=12.
/// These are the `ln cosh` Taylor coefficients times `l!`; cross-checked in
/// tests against the generic moment-to-cumulant recursion.
const UNIT_COND_CUMULANTS: [f64; 6] = [1.0, -2.0, 16.0, -272.0, 7936.0, -353792.0];

/// CDF correction of the conditional expansion, given the normalized
/// conditional cumulants `lambda4` and `lambda6` (raw, not divided by
/// factorials). `lambda6` is only read when `r = 4`.
pub fn conditional_cdf_correction(r: usize, x: f64, lambda4: f64, lambda6: f64) -> Result<f64> {
    check_correction_order(r)?;
    if r % 2 == 1 {
        return Ok(0.0);
    }
    let a = lambda4 / 24.0;
    let phi = normal_pdf(x);
    Ok(match r {
        2 => -phi * h(3, x) * a,
        4 => -phi * (h(7, x) * 0.5 * a * a + h(5, x) * lambda6 / 720.0),
        _ => unreachable!(),
    })
}

/// Density correction of the conditional expansion (the x-derivative of the
/// CDF correction).
pub fn conditional_density_correction(r: usize, x: f64, lambda4: f64, lambda6: f64) -> Result<f64> {
    check_correction_order(r)?;
    if r % 2 == 1 {
        return Ok(0.0);
    }
    let a = lambda4 / 24.0;
    let phi = normal_pdf(x);
    Ok(match r {
        2 => phi * h(4, x) * a,
        4 => phi * (h(8, x) * 0.5 * a * a + h(6, x) * lambda6 / 720.0),
        _ => unreachable!(),
    })
}

/// A conditioning configuration: the magnitudes `|X_1|..|X_n|` together with
/// an expansion order. All conditional quantities — normalized cumulants,
/// normalized absolute moments, both characteristic functions, and the
/// expansion itself — hang off this.
#[derive(Debug, Clone)]
pub struct ConditionalConfig {
    xs: Vec<f64>,
    sum_sq: f64,
    v: f64,
    m: usize,
}

impl ConditionalConfig {
    /// `xs` are the summand values; only their magnitudes matter. Must be
    /// non-empty and finite.
    pub fn new(xs: &[f64], m: usize) -> Result<Self> {
        check_order(m)?;
        if xs.is_empty() {
            return Err(Error::InvalidInput("configuration must be non-empty".into()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("configuration values must be finite".into()));
        }
        let xs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let sum_sq: f64 = xs.iter().map(|x| x * x).sum();
        if !sum_sq.is_finite() {
            return Err(Error::InvalidInput("configuration magnitudes overflow".into()));
        }
        let v = sum_sq.sqrt();
        Ok(ConditionalConfig { xs, sum_sq, v, m })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// The normalizer `V = sqrt(sum x_j^2)`.
    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    pub fn abs_values(&self) -> &[f64] {
        &self.xs
    }

    pub fn max_abs(&self) -> f64 {
        self.xs.iter().cloned().fold(0.0, f64::max)
    }

    /// `B = V / max_j |x_j|`, the flatness ratio of the configuration; lies
    /// in `[1, sqrt(n)]`, and is 1 by convention for the zero configuration.
    pub fn b_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            1.0
        } else {
            self.v / m
        }
    }

    /// Normalized conditional cumulant
    /// `lambda_l = V^{-l} sum_j kappa_l(+-x_j)`.
    ///
    /// Odd orders vanish; `lambda_2 = 1` exactly whenever `V > 0`; the zero
    /// configuration yields 0 by convention. Computed from normalized
    /// magnitudes `x_j / V`, which keeps single-summand configurations exact.
    pub fn lambda_tilde(&self, l: usize) -> Result<f64> {
        if l == 0 || l > 12 {
            return Err(Error::UnsupportedOrder {
                what: "normalized conditional cumulant",
                order: l,
                supported: "1..=12",
            });
        }
        if l % 2 == 1 {
            return Ok(0.0);
        }
        if self.v == 0.0 {
            return Ok(0.0);
        }
        if l == 2 {
            return Ok(1.0);
        }
        let unit = UNIT_COND_CUMULANTS[l / 2 - 1];
        let power_sum: f64 = self.xs.iter().map(|&x| (x / self.v).powi(l as i32)).sum();
        Ok(unit * power_sum)
    }

    /// Normalized absolute-moment sum `L_k = V^{-k} sum_j |x_j|^k`, which
    /// lies in `[0, 1]` for `k >= 2` (zero configuration gives 0).
    pub fn l_tilde(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::UnsupportedOrder {
                what: "normalized absolute moment",
                order: k,
                supported: "1..",
            });
        }
        if self.v == 0.0 {
            return Ok(0.0);
        }
        Ok(self.xs.iter().map(|&x| (x / self.v).powi(k as i32)).sum())
    }

    /// Conditional CDF expansion `Phi(x) + sum_r P_r(x)` at this
    /// configuration's order.
    pub fn cond_cdf(&self, x: f64) -> Result<f64> {
        let l4 = self.lambda_tilde(4)?;
        let l6 = self.lambda_tilde(6)?;
        let mut acc = normal_cdf(x);
        if self.m >= 4 {
            acc += conditional_cdf_correction(2, x, l4, l6)?;
        }
        if self.m >= 6 {
            acc += conditional_cdf_correction(4, x, l4, l6)?;
        }
        Ok(acc)
    }

    /// Conditional density expansion `phi(x) + sum_r p_r(x)`.
    pub fn cond_density(&self, x: f64) -> Result<f64> {
        let l4 = self.lambda_tilde(4)?;
        let l6 = self.lambda_tilde(6)?;
        let mut acc = normal_pdf(x);
        if self.m >= 4 {
            acc += conditional_density_correction(2, x, l4, l6)?;
        }
        if self.m >= 6 {
            acc += conditional_density_correction(4, x, l4, l6)?;
        }
        Ok(acc)
    }

    /// Exact conditional characteristic function
    /// `E[exp(it T) | magnitudes] = prod_j cos(t x_j / V)` — real because the
    /// conditional law is symmetric. Undefined for the zero configuration.
    pub fn cond_charfn(&self, t: f64) -> Result<f64> {
        if self.v == 0.0 {
            return Err(Error::InvalidInput(
                "characteristic function undefined for the zero configuration".into(),
            ));
        }
        Ok(self.xs.iter().map(|&x| (t * x / self.v).cos()).product())
    }

    /// Characteristic function of the conditional expansion at this order:
    /// `exp(-t^2/2) (1 + t^4 lambda4/24 [+ t^8 (lambda4/24)^2/2
    /// - t^6 lambda6/720])`. This is the exact Fourier transform of
    /// [`cond_density`](Self::cond_density).
    pub fn charfn_expansion(&self, t: f64) -> Result<f64> {
        let l4 = self.lambda_tilde(4)?;
        let l6 = self.lambda_tilde(6)?;
        let a = l4 / 24.0;
        let t2 = t * t;
        let mut poly = 1.0;
        if self.m >= 4 {
            poly += t2 * t2 * a;
        }
        if self.m >= 6 {
            poly += t2.powi(4) * 0.5 * a * a - t2.powi(3) * l6 / 720.0;
        }
        Ok((-0.5 * t2).exp() * poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::conditional_cumulant;
    use crate::special_math::{quad_integrate, QuadratureSpec, GAUSS_TRUNCATION};
    use approx::assert_relative_eq;

    #[test]
    fn unit_conditional_cumulant_table_matches_recursion() {
        for (i, &want) in UNIT_COND_CUMULANTS.iter().enumerate() {
            let l = 2 * (i + 1);
            assert_eq!(conditional_cumulant(l, 1.0).unwrap(), want, "order {l}");
        }
    }

    #[test]
    fn marginal_cdf_correction_frozen_value() {
        // mu4 = 3: Q_2(1) = phi(1) H_3(1) mu4/12 with H_3(1) = -2
        let got = marginal_cdf_correction(2, 1.0, 3.0, 0.0).unwrap();
        assert_relative_eq!(got, -0.120985362259571685, max_relative = 1e-14);
    }

    #[test]
    fn marginal_density_correction_frozen_value() {
        // mu4 = 3: q_2(0) = phi(0) H_4(0) (-mu4/12) with H_4(0) = 3
        let got = marginal_density_correction(2, 0.0, 3.0, 0.0).unwrap();
        assert_relative_eq!(got, -0.29920671030107453, max_relative = 1e-14);
    }

    #[test]
    fn odd_corrections_vanish_and_orders_are_capped() {
        for r in [1usize, 3] {
            assert_eq!(marginal_cdf_correction(r, 0.7, 3.0, 15.0).unwrap(), 0.0);
            assert_eq!(marginal_density_correction(r, 0.7, 3.0, 15.0).unwrap(), 0.0);
            assert_eq!(conditional_cdf_correction(r, 0.7, -0.5, 1.0).unwrap(), 0.0);
            assert_eq!(conditional_density_correction(r, 0.7, -0.5, 1.0).unwrap(), 0.0);
        }
        for r in [0usize, 5, 6] {
            assert!(marginal_cdf_correction(r, 0.0, 3.0, 15.0).is_err());
            assert!(conditional_density_correction(r, 0.0, 0.0, 0.0).is_err());
        }
    }

    #[test]
    fn density_correction_is_derivative_of_cdf_correction() {
        let h = 1e-5;
        for &(mu4, mu6) in &[(3.0, 15.0), (1.8, 27.0 / 7.0), (6.0, 90.0), (3.75, 26.25)] {
            for r in [2usize, 4] {
                for &x in &[-2.3, -0.9, 0.0, 0.4, 1.7, 3.1] {
                    let up = marginal_cdf_correction(r, x + h, mu4, mu6).unwrap();
                    let dn = marginal_cdf_correction(r, x - h, mu4, mu6).unwrap();
                    let num = (up - dn) / (2.0 * h);
                    let ana = marginal_density_correction(r, x, mu4, mu6).unwrap();
                    assert!(
                        (num - ana).abs() < 5e-7 * ana.abs().max(1.0),
                        "r={r} x={x} mu4={mu4}: numeric {num} vs analytic {ana}"
                    );
                }
            }
        }
        // same for the conditional pair
        for r in [2usize, 4] {
            for &x in &[-1.1, 0.3, 2.2] {
                let (l4, l6) = (-0.5, 1.0);
                let up = conditional_cdf_correction(r, x + h, l4, l6).unwrap();
                let dn = conditional_cdf_correction(r, x - h, l4, l6).unwrap();
                let num = (up - dn) / (2.0 * h);
                let ana = conditional_density_correction(r, x, l4, l6).unwrap();
                assert!((num - ana).abs() < 5e-7 * ana.abs().max(1.0));
            }
        }
    }

    #[test]
    fn density_corrections_integrate_to_zero() {
        for r in [2usize, 4] {
            let spec = QuadratureSpec::new(-GAUSS_TRUNCATION, GAUSS_TRUNCATION).with_tol(1e-11);
            let v =
                quad_integrate(|x| marginal_density_correction(r, x, 6.0, 90.0).unwrap(), &spec)
                    .unwrap();
            assert!(v.abs() < 1e-9, "int q_{r} = {v}");
        }
    }

    #[test]
    fn expansion_orders_nest() {
        let n = 64;
        let law = SymmetricLaw::Uniform;
        let c2 = edgeworth_cdf(2, n, &law).unwrap();
        let c3 = edgeworth_cdf(3, n, &law).unwrap();
        let c4 = edgeworth_cdf(4, n, &law).unwrap();
        let c5 = edgeworth_cdf(5, n, &law).unwrap();
        let c6 = edgeworth_cdf(6, n, &law).unwrap();
        let mu4 = law.moment(4).unwrap();
        let mu6 = law.moment(6).unwrap();
        for &x in &[-2.0, -0.5, 0.0, 1.25, 3.0] {
            assert_eq!(c2.eval(x), normal_cdf(x));
            assert_eq!(c3.eval(x), c2.eval(x), "odd order adds nothing");
            let want4 = normal_cdf(x) + marginal_cdf_correction(2, x, mu4, mu6).unwrap() / n as f64;
            assert_relative_eq!(c4.eval(x), want4, max_relative = 1e-15);
            assert_eq!(c5.eval(x), c4.eval(x));
            let want6 = want4 + marginal_cdf_correction(4, x, mu4, mu6).unwrap() / (n * n) as f64;
            assert_relative_eq!(c6.eval(x), want6, max_relative = 1e-15);
        }
    }

    #[test]
    fn expansion_limits_are_sane() {
        let law = SymmetricLaw::Laplace;
        let cdf = edgeworth_cdf(6, 32, &law).unwrap();
        assert!(cdf.eval(-GAUSS_TRUNCATION).abs() < 1e-12);
        assert!((cdf.eval(GAUSS_TRUNCATION) - 1.0).abs() < 1e-12);
        let pdf = edgeworth_pdf(6, 32, &law).unwrap();
        let spec = QuadratureSpec::new(-GAUSS_TRUNCATION, GAUSS_TRUNCATION).with_tol(1e-11);
        let mass = quad_integrate(|x| pdf.eval(x), &spec).unwrap();
        assert!((mass - 1.0).abs() < 1e-9, "density expansion mass {mass}");
    }

    #[test]
    fn expansion_rejects_bad_parameters() {
        let law = SymmetricLaw::Gaussian;
        assert!(edgeworth_cdf(1, 8, &law).is_err());
        assert!(edgeworth_cdf(7, 8, &law).is_err());
        assert!(edgeworth_cdf(4, 0, &law).is_err());
        // custom law with moments only through mu_4: fine at m = 4, not m = 6
        let custom = SymmetricLaw::custom("c", vec![1.0, 0.0, 1.0, 0.0, 2.5]).unwrap();
        assert!(edgeworth_cdf(4, 8, &custom).is_ok());
        assert!(matches!(edgeworth_cdf(6, 8, &custom), Err(Error::MissingMoment { order: 6, .. })));
    }

    #[test]
    fn conditional_correction_frozen_value() {
        let cfg = ConditionalConfig::new(&[1.0, 1.0, 1.0, 1.0], 4).unwrap();
        let l4 = cfg.lambda_tilde(4).unwrap();
        assert_eq!(l4, -0.5);
        // H_3(1) = -2, so the value reduces to -phi(1) * (-2) * (-0.5/24)
        // = -exp(-1/2) / (24 sqrt(2 pi)) = -0.01008211352163097290824...
        let got = conditional_cdf_correction(2, 1.0, l4, 0.0).unwrap();
        assert_relative_eq!(got, -0.010082113521630973, max_relative = 1e-14);
    }

    #[test]
    fn lambda_tilde_identities() {
        let cfg = ConditionalConfig::new(&[0.3, -1.1, 2.0, 0.05, 0.7], 6).unwrap();
        assert_eq!(cfg.lambda_tilde(2).unwrap(), 1.0, "lambda_2 is exactly 1");
        assert_eq!(cfg.lambda_tilde(3).unwrap(), 0.0);
        assert_eq!(cfg.lambda_tilde(5).unwrap(), 0.0);
        let l4 = cfg.lambda_tilde(4).unwrap();
        let l6 = cfg.lambda_tilde(6).unwrap();
        assert!((-2.0..=0.0).contains(&l4), "lambda_4 = {l4}");
        assert!((0.0..=16.0).contains(&l6), "lambda_6 = {l6}");
        assert!(cfg.lambda_tilde(0).is_err());
        assert!(cfg.lambda_tilde(14).is_err());

        // single summand: exact extremes
        let one = ConditionalConfig::new(&[3.7], 4).unwrap();
        assert_eq!(one.lambda_tilde(4).unwrap(), -2.0);
        assert_eq!(one.lambda_tilde(6).unwrap(), 16.0);

        // zero configuration: conventions
        let zero = ConditionalConfig::new(&[0.0, 0.0], 4).unwrap();
        assert_eq!(zero.lambda_tilde(2).unwrap(), 0.0);
        assert_eq!(zero.lambda_tilde(4).unwrap(), 0.0);
        assert_eq!(zero.b_ratio(), 1.0);
        assert!(zero.cond_charfn(1.0).is_err());
    }

    #[test]
    fn l_tilde_bounds_and_monotonicity() {
        let cfg = ConditionalConfig::new(&[0.9, 0.4, -1.6, 0.2, 1.0, 0.8], 4).unwrap();
        let l2 = cfg.l_tilde(2).unwrap();
        assert!((l2 - 1.0).abs() < 1e-12);
        let mut prev = l2;
        for k in 3..=8 {
            let lk = cfg.l_tilde(k).unwrap();
            assert!(lk <= prev + 1e-12, "L_{k} = {lk} > L_{} = {prev}", k - 1);
            assert!(lk >= 0.0);
            prev = lk;
        }
        assert!(cfg.l_tilde(0).is_err());
    }

    #[test]
    fn b_ratio_range() {
        let flat = ConditionalConfig::new(&[1.0; 16], 4).unwrap();
        assert_relative_eq!(flat.b_ratio(), 4.0, max_relative = 1e-15);
        let spike = ConditionalConfig::new(&[5.0, 0.0, 0.0], 4).unwrap();
        assert_eq!(spike.b_ratio(), 1.0);
        let mixed = ConditionalConfig::new(&[1.0, 2.0, 2.0], 4).unwrap();
        let b = mixed.b_ratio();
        assert!((1.0..=3.0f64.sqrt() + 1e-12).contains(&b));
    }

    #[test]
    fn charfns_agree_at_zero_and_are_bounded() {
        let cfg = ConditionalConfig::new(&[0.5, 1.2, 0.8, 1.0, 0.33, 0.9], 4).unwrap();
        assert_eq!(cfg.cond_charfn(0.0).unwrap(), 1.0);
        assert_eq!(cfg.charfn_expansion(0.0).unwrap(), 1.0);
        let mut t = -6.0;
        while t <= 6.0 {
            assert!(cfg.cond_charfn(t).unwrap().abs() <= 1.0 + 1e-15);
            t += 0.37;
        }
    }

    #[test]
    fn charfn_expansion_is_fourier_transform_of_density_expansion() {
        // int cos(tx) p(x) dx == charfn_expansion(t): ties the density-side
        // and frequency-side representations together through quadrature.
        for m in [2usize, 4, 6] {
            let cfg = ConditionalConfig::new(&[0.9, -0.4, 1.3, 0.6, 1.05, 0.2, 0.7], m).unwrap();
            for &t in &[0.0, 0.7, 1.3, 2.9] {
                let spec = QuadratureSpec::new(-GAUSS_TRUNCATION, GAUSS_TRUNCATION).with_tol(1e-11);
                let numeric =
                    quad_integrate(|x| (t * x).cos() * cfg.cond_density(x).unwrap(), &spec)
                        .unwrap();
                let analytic = cfg.charfn_expansion(t).unwrap();
                assert!(
                    (numeric - analytic).abs() < 1e-9,
                    "m={m} t={t}: quadrature {numeric} vs closed form {analytic}"
                );
            }
        }
    }

    #[test]
    fn cond_cdf_order_nesting() {
        let xs = [0.9, -0.4, 1.3, 0.6, 1.05];
        let c2 = ConditionalConfig::new(&xs, 2).unwrap();
        let c4 = ConditionalConfig::new(&xs, 4).unwrap();
        let c6 = ConditionalConfig::new(&xs, 6).unwrap();
        let l4 = c4.lambda_tilde(4).unwrap();
        let l6 = c4.lambda_tilde(6).unwrap();
        for &x in &[-1.7, 0.0, 0.8, 2.5] {
            assert_eq!(c2.cond_cdf(x).unwrap(), normal_cdf(x));
            let want4 = normal_cdf(x) + conditional_cdf_correction(2, x, l4, l6).unwrap();
            assert_relative_eq!(c4.cond_cdf(x).unwrap(), want4, max_relative = 1e-15);
            let want6 = want4 + conditional_cdf_correction(4, x, l4, l6).unwrap();
            assert_relative_eq!(c6.cond_cdf(x).unwrap(), want6, max_relative = 1e-15);
        }
    }

    #[test]
    fn conditional_config_validation() {
        assert!(ConditionalConfig::new(&[], 4).is_err());
        assert!(ConditionalConfig::new(&[1.0, f64::NAN], 4).is_err());
        assert!(ConditionalConfig::new(&[1.0], 7).is_err());
        let cfg = ConditionalConfig::new(&[-2.0, 1.0], 4).unwrap();
        assert_eq!(cfg.abs_values(), &[2.0, 1.0], "magnitudes are stored");
        assert_eq!(cfg.n(), 2);
        assert_relative_eq!(cfg.v(), 5.0f64.sqrt(), max_relative = 1e-15);
        assert_eq!(cfg.max_abs(), 2.0);
    }
}
