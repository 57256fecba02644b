//! Coefficients of the entropic expansion `D(T_n) ~ sum_l c_l n^-l`.
//!
//! Writing the density approximation as `phi (1 + u)` with
//! `u = sum_r q_r n^{-r/2} / phi`, the relative entropy integrand expands as
//! `phi (1+u) log(1+u) = phi u + phi sum_{k>=2} (-1)^k u^k / (k (k-1))`,
//! and `int phi u = 0` because every correction integrates to zero. Collecting
//! the coefficient of `n^-l` gives
//!
//! `c_l = sum_{k=2}^{2l} (-1)^k/(k(k-1)) sum_{r_1+..+r_k = 2l} int q_{r_1}..q_{r_k} / phi^{k-1}`.
//!
//! Under a symmetric law the odd-order corrections vanish identically, so
//! only compositions into even parts contribute; for `l <= 3` every surviving
//! part is 2 or 4, which is exactly the closed-form range of `q_r`.

use crate::distributions::SymmetricLaw;
use crate::expansion::marginal_density_correction;
use crate::special_math::{normal_pdf, quad_integrate, QuadratureSpec};
use crate::{Error, Result};
use serde::Serialize;

/// Largest supported coefficient index: beyond `l = 3` the inner sum reaches
/// parts `r >= 6`, whose corrections have no closed form here.
pub const MAX_ENTROPY_INDEX: u32 = 3;

/// Quadrature window: every integrand is `phi` times a polynomial, so the
/// tail beyond |x| = 12 is far below double precision.
const WINDOW: f64 = 12.0;

/// One coefficient of the entropy expansion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyCoeff {
    pub l: u32,
    pub value: f64,
    /// True if any term of the defining sum had to be dropped for lack of a
    /// closed-form correction. Never set for `l <= 3`: the only parts beyond
    /// the closed-form range that could appear there are odd, and odd
    /// corrections are identically zero under symmetry rather than unknown.
    pub partial: bool,
}

/// The expansion coefficients for one law.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyExpansion {
    pub mu4: f64,
    pub mu6: f64,
    pub coefficients: Vec<EntropyCoeff>,
}

impl EntropyExpansion {
    /// Coefficients `c_1 ..= c_lmax` for a law.
    pub fn for_law(law: &SymmetricLaw, lmax: u32) -> Result<EntropyExpansion> {
        let mu4 = law.moment(4)?;
        let mu6 = law.moment(6)?;
        let coefficients = (1..=lmax).map(|l| c_l(mu4, mu6, l)).collect::<Result<Vec<_>>>()?;
        Ok(EntropyExpansion { mu4, mu6, coefficients })
    }

    pub fn coefficient(&self, l: u32) -> Option<&EntropyCoeff> {
        self.coefficients.iter().find(|c| c.l == l)
    }
}

/// All compositions of `total` into `k` positive parts.
fn compositions(total: u32, k: u32) -> Vec<Vec<u32>> {
    fn rec(total: u32, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        // leave at least 1 for each remaining slot
        for first in 1..=(total - (k - 1)) {
            prefix.push(first);
            rec(total - first, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 && total >= k {
        rec(total, k, &mut Vec::new(), &mut out);
    }
    out
}

/// `c_l` by quadrature of the composition sum.
pub fn c_l(mu4: f64, mu6: f64, l: u32) -> Result<EntropyCoeff> {
    if l == 0 || l > MAX_ENTROPY_INDEX {
        return Err(Error::UnsupportedOrder {
            what: "entropy coefficient index",
            order: l as usize,
            supported: "1..=3",
        });
    }
    let two_l = 2 * l;
    let mut value = 0.0f64;
    let mut partial = false;
    for k in 2..=two_l {
        let weight = if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 * (k - 1) as f64);
        for parts in compositions(two_l, k) {
            if parts.iter().any(|&r| r % 2 == 1) {
                continue; // odd corrections vanish under symmetry
            }
            if parts.iter().any(|&r| r > 4) {
                partial = true; // no closed form for q_r, r >= 6
                continue;
            }
            // integrand = prod q_{r_i} / phi^{k-1} = phi * prod (q_{r_i}/phi)
            let spec = QuadratureSpec::new(-WINDOW, WINDOW);
            let integral = quad_integrate(
                |x| {
                    let phi = normal_pdf(x);
                    let mut prod = phi;
                    for &r in &parts {
                        let q = marginal_density_correction(r as usize, x, mu4, mu6)
                            .expect("parts are even and <= 4");
                        prod *= q / phi;
                    }
                    prod
                },
                &spec,
            )?;
            value += weight * integral;
        }
    }
    Ok(EntropyCoeff { l, value, partial })
}

/// Closed form of `c_2`: the only surviving term is `(1/2) int q_2^2 / phi`,
/// and `int phi H_4^2 = 4!` gives `12 (mu4/12)^2 = mu4^2 / 12`.
pub fn analytic_c2(mu4: f64) -> f64 {
    mu4 * mu4 / 12.0
}

/// Closed form of `c_3` via Hermite orthogonality: the surviving terms are
/// `int q_2 q_4 / phi` (only the `H_4 H_4` pairing survives) and
/// `-(1/6) int q_2^3 / phi^2` with `int phi H_4^3 = 4!^3 / 2!^3 = 1728`,
/// giving `24 alpha delta - 288 alpha^3 = (4 mu4^3 - mu4^2 - 2 mu4 mu6) / 6`.
pub fn analytic_c3(mu4: f64, mu6: f64) -> f64 {
    (4.0 * mu4.powi(3) - mu4 * mu4 - 2.0 * mu4 * mu6) / 6.0
}

/// The order-`m` entropy prediction `sum_{l=2}^{floor((m-2)/2)} c_l n^-l`;
/// for `m <= 5` the range is empty and the prediction is 0, for `m = 6` it
/// is the single term `c_2 / n^2`.
pub fn entropy_prediction(mu4: f64, _mu6: f64, m: usize, n: u64) -> Result<f64> {
    if !(4..=6).contains(&m) {
        return Err(Error::UnsupportedOrder {
            what: "entropy prediction order",
            order: m,
            supported: "4..=6",
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample size n must be >= 1".into()));
    }
    let lmax = (m - 2) / 2;
    let mut total = 0.0;
    if lmax >= 2 {
        let nf = n as f64;
        total += analytic_c2(mu4) / (nf * nf);
    }
    Ok(total)
}
