//! Monte Carlo simulation of the self-normalized sum `T = S / V`.
//!
//! Replications are keyed individually: replication `r` of logical stream
//! `s` under master seed `q` always consumes the same random bytes, no matter
//! how the work is chunked across threads. Results are accumulated into
//! exact integer counters (an ECDF on a fixed grid plus a histogram), which
//! makes partial runs mergeable without any floating-point order sensitivity.

use crate::distributions::SymmetricLaw;
use crate::special_math::ln_gamma_half;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Serialization format version for [`SimSummary`].
pub const SUMMARY_FORMAT_VERSION: u32 = 1;

/// Replications per work unit. Fixed (never derived from thread count) so
/// that chunk boundaries — and therefore results — are identical for any
/// parallelism level.
pub const CHUNK: u64 = 65_536;

/// Relative slack allowed on the hard bound |T| <= sqrt(n): the bound is
/// exact in real arithmetic, and float rounding of S and V cannot exceed a
/// few ulps of it.
const T_BOUND_SLACK: f64 = 1e-12;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(h: u64, v: u64) -> u64 {
    let mut state = h ^ v.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    splitmix64(&mut state)
}

/// Deterministic per-replication generator: a ChaCha8 stream keyed by
/// hashing `(seed, stream, rep)` through a splitmix64 chain.
pub fn replication_rng(seed: u64, stream: u64, rep: u64) -> ChaCha8Rng {
    let mut state = seed;
    let h0 = splitmix64(&mut state);
    let h2 = mix(mix(h0, stream), rep);
    let mut key = [0u8; 32];
    let mut s = h2;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Draw one value of `T = S / V` for `n` i.i.d. summands from `law`.
/// `scratch` is reused across calls to avoid per-replication allocation.
/// The zero-denominator event (probability zero for continuous laws) maps to
/// `T = 0`.
pub fn sample_tn<R: rand::Rng + ?Sized>(
    law: &SymmetricLaw,
    n: u64,
    rng: &mut R,
    scratch: &mut Vec<f64>,
) -> Result<f64> {
    scratch.resize(n as usize, 0.0);
    law.sample_into(rng, scratch)?;
    let mut s = 0.0;
    let mut v2 = 0.0;
    for &x in scratch.iter() {
        s += x;
        v2 += x * x;
    }
    if v2 == 0.0 {
        return Ok(0.0);
    }
    Ok(s / v2.sqrt())
}

// ---------------------------------------------------------------------------
// ECDF on a fixed grid
// ---------------------------------------------------------------------------

/// Empirical CDF accumulated on a fixed uniform grid.
///
/// `buckets[0]` counts samples `<= point(0)`, `buckets[i]` counts samples in
/// `(point(i-1), point(i)]`, and `buckets[len]` counts overflow beyond the
/// last grid point. All storage is exact `u64`, so merging is associative
/// and order-independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfGrid {
    lo: f64,
    step: f64,
    len: usize,
    buckets: Vec<u64>,
    total: u64,
}

impl EcdfGrid {
    pub fn new(lo: f64, step: f64, len: usize) -> Result<EcdfGrid> {
        if !lo.is_finite() || !(step > 0.0 && step.is_finite()) || len < 2 {
            return Err(Error::InvalidInput(
                "ECDF grid needs finite lo, positive step, len >= 2".into(),
            ));
        }
        Ok(EcdfGrid { lo, step, len, buckets: vec![0; len + 1], total: 0 })
    }

    /// The default evaluation grid for sample size `n`: step 0.01 over
    /// [-8, 8], shrunk to [-(sqrt(n)+1), sqrt(n)+1] when the support is
    /// smaller than that.
    pub fn default_for(n: u64) -> EcdfGrid {
        let half = (n as f64).sqrt() + 1.0;
        let half = if half < 8.0 { half } else { 8.0 };
        let step = 0.01;
        let len = (2.0 * half / step).round() as usize + 1;
        EcdfGrid::new(-half, step, len).expect("constants are valid")
    }

    /// Same shape, zero counts.
    pub fn clone_empty(&self) -> EcdfGrid {
        EcdfGrid {
            lo: self.lo,
            step: self.step,
            len: self.len,
            buckets: vec![0; self.len + 1],
            total: 0,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// First grid index `i` with `point(i) >= t` (== `len` when `t` lies
    /// beyond the grid). Binary search on the computed points, so bucketing
    /// is exactly consistent with `point()` at grid-value ties.
    fn bucket_index(&self, t: f64) -> usize {
        let (mut lo, mut hi) = (0usize, self.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.point(mid) < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub fn update(&mut self, t: f64) {
        let i = self.bucket_index(t);
        self.buckets[i] += 1;
        self.total += 1;
    }

    /// `counts[i]` = number of recorded samples `<= point(i)`.
    pub fn cumulative_counts(&self) -> Vec<u64> {
        let mut acc = 0u64;
        self.buckets[..self.len]
            .iter()
            .map(|&b| {
                acc += b;
                acc
            })
            .collect()
    }

    /// The empirical CDF evaluated at every grid point.
    pub fn ecdf_values(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.cumulative_counts().iter().map(|&c| c as f64 / t).collect()
    }

    /// Add another accumulation over the bitwise-identical grid.
    pub fn merge(&mut self, other: &EcdfGrid) -> Result<()> {
        if self.lo.to_bits() != other.lo.to_bits()
            || self.step.to_bits() != other.step.to_bits()
            || self.len != other.len
        {
            return Err(Error::InvalidInput("cannot merge ECDFs on different grids".into()));
        }
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Histogram density estimate
// ---------------------------------------------------------------------------

/// Uniform-bin histogram with explicit out-of-range counters; normalizing by
/// total count and bin width gives a density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDensity {
    lo: f64,
    hi: f64,
    bins: usize,
    counts: Vec<u64>,
    below: u64,
    above: u64,
    total: u64,
}

impl HistogramDensity {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<HistogramDensity> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || bins == 0 {
            return Err(Error::InvalidInput(
                "histogram needs finite lo < hi and at least one bin".into(),
            ));
        }
        Ok(HistogramDensity { lo, hi, bins, counts: vec![0; bins], below: 0, above: 0, total: 0 })
    }

    /// Default for sample size `n` and planned replication count: range
    /// min(sqrt(n), 8) on each side, `ceil(2 reps^{1/3})` bins capped at 400.
    pub fn default_for(n: u64, reps: u64) -> HistogramDensity {
        let half = (n as f64).sqrt().min(8.0);
        let bins = (2.0 * (reps as f64).powf(1.0 / 3.0)).ceil() as usize;
        let bins = bins.clamp(1, 400);
        HistogramDensity::new(-half, half, bins).expect("constants are valid")
    }

    pub fn clone_empty(&self) -> HistogramDensity {
        HistogramDensity {
            lo: self.lo,
            hi: self.hi,
            bins: self.bins,
            counts: vec![0; self.bins],
            below: 0,
            above: 0,
            total: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn out_of_range(&self) -> (u64, u64) {
        (self.below, self.above)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn update(&mut self, t: f64) {
        self.total += 1;
        if t < self.lo {
            self.below += 1;
        } else if t > self.hi {
            self.above += 1;
        } else {
            let raw = ((t - self.lo) / self.bin_width()) as usize;
            self.counts[raw.min(self.bins - 1)] += 1;
        }
    }

    /// Density estimate at the center of bin `i`.
    pub fn density_at(&self, i: usize) -> f64 {
        self.counts[i] as f64 / (self.total.max(1) as f64 * self.bin_width())
    }

    /// (center, density) pairs for all bins.
    pub fn density_points(&self) -> Vec<(f64, f64)> {
        (0..self.bins).map(|i| (self.bin_center(i), self.density_at(i))).collect()
    }

    pub fn merge(&mut self, other: &HistogramDensity) -> Result<()> {
        if self.lo.to_bits() != other.lo.to_bits()
            || self.hi.to_bits() != other.hi.to_bits()
            || self.bins != other.bins
        {
            return Err(Error::InvalidInput(
                "cannot merge histograms with different shapes".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.below += other.below;
        self.above += other.above;
        self.total += other.total;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Simulation driver
// ---------------------------------------------------------------------------

/// Parameters of one simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub law: SymmetricLaw,
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    /// Logical stream index; shards meant to be merged later should use the
    /// same seed and distinct streams.
    pub stream: u64,
}

impl SimConfig {
    pub fn new(law: SymmetricLaw, n: u64, reps: u64, seed: u64) -> SimConfig {
        SimConfig { law, n, reps, seed, stream: 0 }
    }

    pub fn with_stream(mut self, stream: u64) -> SimConfig {
        self.stream = stream;
        self
    }
}

/// Accumulated result of one or more (merged) simulation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub version: u32,
    pub law: String,
    pub n: u64,
    pub reps: u64,
    /// `(seed, stream)` pairs that produced the replications; kept to refuse
    /// merges that would double-count a stream.
    pub sources: Vec<(u64, u64)>,
    pub ecdf: EcdfGrid,
    pub hist: HistogramDensity,
}

impl SimSummary {
    /// Merge another run into this one. Both must describe the same law and
    /// sample size, share grid shapes, and come from distinct streams.
    pub fn merge(&mut self, other: &SimSummary) -> Result<()> {
        if self.version != other.version {
            return Err(Error::InvalidInput("summary format versions differ".into()));
        }
        if self.law != other.law || self.n != other.n {
            return Err(Error::InvalidInput(
                "cannot merge summaries of different experiments".into(),
            ));
        }
        if other.sources.iter().any(|s| self.sources.contains(s)) {
            return Err(Error::InvalidInput(
                "merging would double-count a (seed, stream) source".into(),
            ));
        }
        self.ecdf.merge(&other.ecdf)?;
        self.hist.merge(&other.hist)?;
        self.reps += other.reps;
        self.sources.extend(other.sources.iter().copied());
        self.sources.sort_unstable();
        Ok(())
    }
}

/// Run the Monte Carlo experiment described by `cfg`.
///
/// Work is split into fixed-size chunks of replication indices and processed
/// in parallel; every replication owns a keyed RNG, and per-chunk partial
/// accumulators are integer-merged in index order, so the output is
/// bit-identical for any thread count.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimSummary> {
    if cfg.n == 0 || cfg.reps == 0 {
        return Err(Error::InvalidInput("simulation needs n >= 1 and reps >= 1".into()));
    }
    if !cfg.law.has_sampler() {
        return Err(Error::LawUnsupported { id: cfg.law.id().to_owned(), what: "sampling" });
    }
    let ecdf_proto = EcdfGrid::default_for(cfg.n);
    let hist_proto = HistogramDensity::default_for(cfg.n, cfg.reps);
    let bound = (cfg.n as f64).sqrt() * (1.0 + T_BOUND_SLACK);

    let chunk_starts: Vec<u64> = (0..cfg.reps).step_by(CHUNK as usize).collect();
    let partials: Result<Vec<(EcdfGrid, HistogramDensity)>> = chunk_starts
        .into_par_iter()
        .map(|start| {
            let end = (start + CHUNK).min(cfg.reps);
            let mut ecdf = ecdf_proto.clone_empty();
            let mut hist = hist_proto.clone_empty();
            let mut scratch = Vec::with_capacity(cfg.n as usize);
            for rep in start..end {
                let mut rng = replication_rng(cfg.seed, cfg.stream, rep);
                let t = sample_tn(&cfg.law, cfg.n, &mut rng, &mut scratch)?;
                if t.abs() > bound {
                    return Err(Error::InvariantViolation(format!(
                        "|T| = {} exceeds sqrt(n) = {} at replication {rep}",
                        t.abs(),
                        (cfg.n as f64).sqrt()
                    )));
                }
                ecdf.update(t);
                hist.update(t);
            }
            Ok((ecdf, hist))
        })
        .collect();

    let mut ecdf = ecdf_proto.clone_empty();
    let mut hist = hist_proto.clone_empty();
    for (e, h) in partials? {
        ecdf.merge(&e)?;
        hist.merge(&h)?;
    }
    Ok(SimSummary {
        version: SUMMARY_FORMAT_VERSION,
        law: cfg.law.id().to_owned(),
        n: cfg.n,
        reps: cfg.reps,
        sources: vec![(cfg.seed, cfg.stream)],
        ecdf,
        hist,
    })
}

// ---------------------------------------------------------------------------
// Exact gaussian reference density
// ---------------------------------------------------------------------------

/// Natural log of the normalizing constant
/// `C_n = Gamma(n/2) / (Gamma((n-1)/2) sqrt(pi n))` of the exact density of
/// `T` under gaussian summands.
pub fn gaussian_exact_log_norm(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput("exact density requires n >= 2".into()));
    }
    Ok(ln_gamma_half(n)? - ln_gamma_half(n - 1)? - 0.5 * (std::f64::consts::PI * n as f64).ln())
}

/// Exact density of `T` for standard normal summands:
/// `f_n(t) = C_n (1 - t^2/n)^{(n-3)/2}` on `|t| < sqrt(n)`, 0 outside.
///
/// For `n = 2` the density blows up (integrably) at the support endpoints;
/// the exact value `+inf` is returned on the singular set.
pub fn gaussian_exact_density(n: u64, t: f64) -> Result<f64> {
    let ln_cn = gaussian_exact_log_norm(n)?;
    let nf = n as f64;
    let rn = nf.sqrt();
    if t.abs() > rn {
        return Ok(0.0);
    }
    let s = (nf - t * t) / nf;
    let expo = 0.5 * (nf - 3.0);
    if s <= 0.0 {
        // |t| is at the representable support boundary but t^2 rounded to
        // >= n. Continuity from inside: the density diverges there below
        // n = 3 (inverse-square-root blow-up), sits at the constant level
        // at n = 3, and vanishes above.
        return Ok(if expo < 0.0 {
            f64::INFINITY
        } else if expo == 0.0 {
            ln_cn.exp()
        } else {
            0.0
        });
    }
    Ok((ln_cn + expo * s.ln()).exp())
}
