//! Expectations of the normalized-conditional-cumulant terms.
//!
//! The three random quantities `lambda_4/4!`, `lambda_6/6!`, and
//! `(lambda_4/4!)^2/2` are what the conditional expansion is built from;
//! their expectations under a law admit expansions in powers of `1/n` whose
//! leading coefficients are exactly the moment combinations appearing in the
//! marginal corrections. This module provides the two-term closed forms and
//! a deterministic Monte Carlo estimator to verify them.

use crate::distributions::SymmetricLaw;
use crate::expansion::ConditionalConfig;
use crate::simulate::{replication_rng, CHUNK};
use crate::{Error, Result};
use rayon::prelude::*;

/// The three lambda-based terms of the order-6 conditional expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaTerm {
    /// `lambda_4 / 4!`
    Lambda4Over24,
    /// `lambda_6 / 6!`
    Lambda6Over720,
    /// `(1/2) (lambda_4 / 4!)^2`
    HalfLambda4Over24Sq,
}

impl LambdaTerm {
    pub const ALL: [LambdaTerm; 3] =
        [LambdaTerm::Lambda4Over24, LambdaTerm::Lambda6Over720, LambdaTerm::HalfLambda4Over24Sq];

    pub fn id(&self) -> &'static str {
        match self {
            LambdaTerm::Lambda4Over24 => "lambda4_over_24",
            LambdaTerm::Lambda6Over720 => "lambda6_over_720",
            LambdaTerm::HalfLambda4Over24Sq => "half_lambda4_over_24_sq",
        }
    }

    pub fn from_id(id: &str) -> Result<LambdaTerm> {
        LambdaTerm::ALL
            .into_iter()
            .find(|t| t.id() == id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown lambda term {id:?}")))
    }

    /// Evaluate the term on one conditioning configuration.
    pub fn eval(&self, cfg: &ConditionalConfig) -> Result<f64> {
        match self {
            LambdaTerm::Lambda4Over24 => Ok(cfg.lambda_tilde(4)? / 24.0),
            LambdaTerm::Lambda6Over720 => Ok(cfg.lambda_tilde(6)? / 720.0),
            LambdaTerm::HalfLambda4Over24Sq => {
                let a = cfg.lambda_tilde(4)? / 24.0;
                Ok(0.5 * a * a)
            }
        }
    }
}

/// Two-term asymptotic expansion of `E[term]`:
/// `E ~ coefficients.0 * n^-orders.0 + coefficients.1 * n^-orders.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaExpansion {
    pub term: LambdaTerm,
    pub coefficients: (f64, f64),
    pub orders: (u32, u32),
}

impl LambdaExpansion {
    /// The two-term prediction at sample size `n`.
    pub fn predict(&self, n: u64) -> f64 {
        let nf = n as f64;
        self.coefficients.0 * nf.powi(-(self.orders.0 as i32))
            + self.coefficients.1 * nf.powi(-(self.orders.1 as i32))
    }
}

/// Closed-form two-term expansions of all three terms from the law's
/// moments. Derived by the delta method around `V^2/n -> 1`:
///
/// * `E[l4/24]   = -mu4/12 * n^-1 + (2 mu6 + mu4 - 3 mu4^2)/12 * n^-2`
/// * `E[l6/720]  =  mu6/45 * n^-2 - (3 mu8 + 3 mu6 - 6 mu4 mu6)/45 * n^-3`
/// * `E[half sq] =  mu4^2/288 * n^-2
///                + (mu8 - 3 mu4^2 - 8 mu4 mu6 + 10 mu4^3)/288 * n^-3`
///
/// The second-order coefficient of the squared term keeps the full
/// `(1+delta)^-4` expansion (the `+10 E[delta^2]` contribution included);
/// the tests pin every coefficient against exact integral representations
/// of the expectations, including closed rational forms in the gaussian
/// case.
pub fn expected_lambda_terms(mu4: f64, mu6: f64, mu8: f64) -> [LambdaExpansion; 3] {
    [
        LambdaExpansion {
            term: LambdaTerm::Lambda4Over24,
            coefficients: (-mu4 / 12.0, (2.0 * mu6 + mu4 - 3.0 * mu4 * mu4) / 12.0),
            orders: (1, 2),
        },
        LambdaExpansion {
            term: LambdaTerm::Lambda6Over720,
            coefficients: (mu6 / 45.0, -(3.0 * mu8 + 3.0 * mu6 - 6.0 * mu4 * mu6) / 45.0),
            orders: (2, 3),
        },
        LambdaExpansion {
            term: LambdaTerm::HalfLambda4Over24Sq,
            coefficients: (
                mu4 * mu4 / 288.0,
                (mu8 - 3.0 * mu4 * mu4 - 8.0 * mu4 * mu6 + 10.0 * mu4 * mu4 * mu4) / 288.0,
            ),
            orders: (2, 3),
        },
    ]
}

/// [`expected_lambda_terms`] with the moments pulled from a law.
pub fn expected_lambda_terms_for(law: &SymmetricLaw) -> Result<[LambdaExpansion; 3]> {
    Ok(expected_lambda_terms(law.moment(4)?, law.moment(6)?, law.moment(8)?))
}

/// Monte Carlo estimate of `E[term]` at sample size `n`: returns
/// `(estimate, standard_error)`.
///
/// Replications are keyed by `(seed, n, rep)`, so estimates at different `n`
/// under the same seed are statistically independent, and results are
/// bit-identical for any thread count (fixed chunking, single-pass variance
/// accumulation per chunk, chunks combined in index order).
pub fn mc_lambda_mean(
    law: &SymmetricLaw,
    n: u64,
    term: LambdaTerm,
    replications: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size n must be >= 1".into()));
    }
    if replications < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 replications for a standard error".into(),
        ));
    }
    if !law.has_sampler() {
        return Err(Error::LawUnsupported { id: law.id().to_owned(), what: "sampling" });
    }

    // Per-chunk single-pass mean/M2 accumulation; exact (0-variance) inputs
    // stay exact because identical values never move the running mean.
    struct Acc {
        count: u64,
        mean: f64,
        m2: f64,
    }
    let chunk_starts: Vec<u64> = (0..replications).step_by(CHUNK as usize).collect();
    let partials: Result<Vec<Acc>> = chunk_starts
        .into_par_iter()
        .map(|start| {
            let end = (start + CHUNK).min(replications);
            let mut scratch = vec![0.0; n as usize];
            let mut acc = Acc { count: 0, mean: 0.0, m2: 0.0 };
            for rep in start..end {
                let mut rng = replication_rng(seed, n, rep);
                law.sample_into(&mut rng, &mut scratch)?;
                let mut v2 = 0.0;
                let mut p4 = 0.0;
                let mut p6 = 0.0;
                for &x in &scratch {
                    let x2 = x * x;
                    let x4 = x2 * x2;
                    v2 += x2;
                    p4 += x4;
                    p6 += x4 * x2;
                }
                let value = if v2 == 0.0 {
                    0.0
                } else {
                    match term {
                        // lambda_4/24 = -2 (sum x^4) V^-4 / 24
                        LambdaTerm::Lambda4Over24 => {
                            let r4 = p4 / (v2 * v2);
                            -r4 / 12.0
                        }
                        // lambda_6/720 = 16 (sum x^6) V^-6 / 720
                        LambdaTerm::Lambda6Over720 => {
                            let r6 = p6 / ((v2 * v2) * v2);
                            r6 / 45.0
                        }
                        LambdaTerm::HalfLambda4Over24Sq => {
                            let r4 = p4 / (v2 * v2);
                            let a = -r4 / 12.0;
                            0.5 * a * a
                        }
                    }
                };
                acc.count += 1;
                let delta = value - acc.mean;
                acc.mean += delta / acc.count as f64;
                acc.m2 += delta * (value - acc.mean);
            }
            Ok(acc)
        })
        .collect();

    let mut count = 0u64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for p in partials? {
        if p.count == 0 {
            continue;
        }
        let total = count + p.count;
        let delta = p.mean - mean;
        mean += delta * p.count as f64 / total as f64;
        m2 += p.m2 + delta * delta * (count as f64 * p.count as f64) / total as f64;
        count = total;
    }
    let var = (m2 / (count - 1) as f64).max(0.0);
    Ok((mean, (var / count as f64).sqrt()))
}
