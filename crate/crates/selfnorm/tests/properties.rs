//! Property-based tests: algebraic identities and structural invariants
//! checked on randomized inputs. Case counts are kept modest so the suite
//! stays fast on a single core; every failure shrinks to a minimal input.

use proptest::prelude::*;

use selfnorm::distributions::{cumulants_to_moments, moments_to_cumulants, SymmetricLaw};
use selfnorm::expansion::{
    edgeworth_cdf, edgeworth_pdf, marginal_cdf_correction, marginal_density_correction,
    ConditionalConfig, EdgeworthApprox, ExpansionKind,
};
use selfnorm::lambda_moments::LambdaTerm;
use selfnorm::metrics::{l1_distance, rate_fit, weighted_sup_error};
use selfnorm::simulate::{run_simulation, EcdfGrid, SimConfig};
use selfnorm::special_math::{
    hermite, hermite_eval, normal_cdf, normal_pdf, quad_integrate, QuadratureSpec,
};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

/// A strategy for finite, well-scaled sample values.
fn sample_values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..=max_len)
}

proptest! {
    #![proptest_config(cases(64))]

    // H_{k+1}(x) = x H_k(x) - k H_{k-1}(x): the recurrence evaluated from
    // the stored coefficient tables.
    #[test]
    fn hermite_recurrence_holds(x in -6.0f64..6.0) {
        for k in 1..=15usize {
            let hk1 = hermite_eval(k + 1, x).unwrap();
            let hk = hermite_eval(k, x).unwrap();
            let hkm = hermite_eval(k - 1, x).unwrap();
            let rhs = x * hk - k as f64 * hkm;
            let scale = hk1.abs().max(rhs.abs()).max(1.0);
            prop_assert!(
                (hk1 - rhs).abs() <= 1e-12 * scale,
                "k={k}, x={x}: {hk1} vs {rhs}"
            );
        }
    }

    // Parity: H_k(-x) = (-1)^k H_k(x).
    #[test]
    fn hermite_parity(x in -8.0f64..8.0) {
        for k in 0..=16usize {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(hermite_eval(k, -x).unwrap(), sign * hermite_eval(k, x).unwrap());
        }
    }

    // Leading coefficient of the monic polynomials is exactly 1.
    #[test]
    fn hermite_is_monic(k in 0usize..=16) {
        let poly = hermite(k).unwrap();
        prop_assert_eq!(*poly.coeffs().last().unwrap(), 1.0);
    }

    // Phi' = phi by symmetric difference.
    #[test]
    fn normal_cdf_derivative_is_density(x in -7.0f64..7.0) {
        let h = 1e-6;
        let num = (normal_cdf(x + h) - normal_cdf(x - h)) / (2.0 * h);
        prop_assert!((num - normal_pdf(x)).abs() <= 1e-9, "x={x}: {num}");
    }

    // Phi(x) + Phi(-x) = 1 and monotonicity on random pairs.
    #[test]
    fn normal_cdf_reflection_and_monotonicity(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        prop_assert!((normal_cdf(a) + normal_cdf(-a) - 1.0).abs() <= 1e-15);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(normal_cdf(lo) <= normal_cdf(hi));
    }
}

proptest! {
    #![proptest_config(cases(48))]

    // lambda_2 = 1, L_k in [0,1], and the Lyapunov-root chain
    // L_a^{1/(a-2)} <= L_b^{1/(b-2)} for a < b, on arbitrary configurations.
    #[test]
    fn config_lambda_and_lyapunov_invariants(xs in sample_values(48)) {
        prop_assume!(xs.iter().any(|v| v.abs() > 0.0));
        let cfg = ConditionalConfig::new(&xs, 4).unwrap();
        prop_assert_eq!(cfg.lambda_tilde(2).unwrap(), 1.0);
        let mut prev = 0.0f64;
        for k in [4usize, 6, 8, 10, 12] {
            let lk = cfg.l_tilde(k).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&lk), "L_{k} = {lk}");
            let root = lk.powf(1.0 / (k as f64 - 2.0));
            prop_assert!(root >= prev - 1e-12, "chain broke at k={k}");
            prev = root;
        }
        // B = V / max|x| stays inside [1, sqrt(n)].
        let b = cfg.b_ratio();
        prop_assert!(b >= 1.0 - 1e-12 && b <= (cfg.n() as f64).sqrt() * (1.0 + 1e-12));
    }

    // The lambda terms agree with their definitions on random configs.
    #[test]
    fn lambda_terms_match_definitions(xs in sample_values(32)) {
        prop_assume!(xs.iter().any(|v| v.abs() > 0.0));
        let cfg = ConditionalConfig::new(&xs, 6).unwrap();
        let a = cfg.lambda_tilde(4).unwrap() / 24.0;
        prop_assert_eq!(LambdaTerm::Lambda4Over24.eval(&cfg).unwrap(), a);
        prop_assert_eq!(
            LambdaTerm::Lambda6Over720.eval(&cfg).unwrap(),
            cfg.lambda_tilde(6).unwrap() / 720.0
        );
        prop_assert_eq!(LambdaTerm::HalfLambda4Over24Sq.eval(&cfg).unwrap(), 0.5 * a * a);
    }

    // Conditional CDF/density expansions: symmetry and derivative link.
    #[test]
    fn conditional_expansion_symmetry_and_derivative(
        xs in sample_values(24),
        x in 0.05f64..4.0,
    ) {
        prop_assume!(xs.iter().any(|v| v.abs() > 0.0));
        let cfg = ConditionalConfig::new(&xs, 4).unwrap();
        let f = cfg.cond_cdf(x).unwrap();
        let fm = cfg.cond_cdf(-x).unwrap();
        prop_assert!((f + fm - 1.0).abs() <= 1e-13, "G(x) + G(-x) = {} at x = {x}", f + fm);
        prop_assert_eq!(cfg.cond_density(x).unwrap(), cfg.cond_density(-x).unwrap());
        let h = 1e-5;
        let num = (cfg.cond_cdf(x + h).unwrap() - cfg.cond_cdf(x - h).unwrap()) / (2.0 * h);
        prop_assert!(
            (num - cfg.cond_density(x).unwrap()).abs() <= 5e-7,
            "dG/dx = {num} vs density {}",
            cfg.cond_density(x).unwrap()
        );
    }
}

/// Random valid symmetric moment sequences: moments of a random two-atom
/// scale mixture sum w_i s_i^k, positive-definite by construction.
fn mixture_moments() -> impl Strategy<Value = Vec<f64>> {
    ((0.2f64..0.8), (0.4f64..1.0), (1.0f64..2.0)).prop_map(|(w, s1, s2)| {
        // normalize to unit variance
        let var = w * s1 * s1 + (1.0 - w) * s2 * s2;
        let (s1, s2) = (s1 / var.sqrt(), s2 / var.sqrt());
        (0..=12usize)
            .map(|k| {
                if k % 2 == 1 {
                    0.0
                } else {
                    // E|Z|^k scale-mixture moments for Z standard normal:
                    // mu_k = (k-1)!! for the standard normal factor
                    let dfact: f64 = (1..k).step_by(2).map(|i| i as f64).product();
                    w * s1.powi(k as i32) * dfact + (1.0 - w) * s2.powi(k as i32) * dfact
                }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(cases(48))]

    // moments -> cumulants -> moments round-trips on valid sequences.
    #[test]
    fn moment_cumulant_roundtrip(moments in mixture_moments()) {
        let kappa = moments_to_cumulants(&moments).unwrap();
        let back = cumulants_to_moments(&kappa);
        for (k, (a, b)) in moments.iter().zip(&back).enumerate() {
            prop_assert!(
                (a - b).abs() <= 1e-10 * a.abs().max(1.0),
                "order {k}: {a} vs {b}"
            );
        }
        // kappa_2 = variance = 1 by construction
        prop_assert!((kappa[2] - 1.0).abs() <= 1e-12);
    }

    // The marginal corrections integrate to zero for any moment pair, and
    // the CDF corrections vanish at +-infinity (x = +-12 numerically).
    #[test]
    fn corrections_have_zero_mass(moments in mixture_moments()) {
        let (mu4, mu6) = (moments[4], moments[6]);
        for r in [2usize, 4] {
            let spec = QuadratureSpec::new(-12.0, 12.0).with_tol(1e-12);
            let mass = quad_integrate(
                |x| marginal_density_correction(r, x, mu4, mu6).unwrap(),
                &spec,
            )
            .unwrap();
            prop_assert!(mass.abs() <= 1e-9, "int q_{r} = {mass:.2e}");
            prop_assert!(marginal_cdf_correction(r, 12.0, mu4, mu6).unwrap().abs() <= 1e-14);
            prop_assert!(marginal_cdf_correction(r, -12.0, mu4, mu6).unwrap().abs() <= 1e-14);
        }
    }

    // d/dx of the CDF expansion is the density expansion, and the CDF
    // expansion respects the symmetry G(x) + G(-x) = 1.
    #[test]
    fn marginal_expansion_derivative_and_symmetry(
        moments in mixture_moments(),
        n in 4u64..4096,
        x in 0.0f64..5.0,
        m_idx in 0usize..3,
    ) {
        let m = [2usize, 4, 6][m_idx];
        let cdf = EdgeworthApprox::from_moments(ExpansionKind::Cdf, m, n, moments[4], moments[6]).unwrap();
        let pdf = EdgeworthApprox::from_moments(ExpansionKind::Density, m, n, moments[4], moments[6]).unwrap();
        let h = 1e-5;
        let num = (cdf.eval(x + h) - cdf.eval(x - h)) / (2.0 * h);
        prop_assert!((num - pdf.eval(x)).abs() <= 5e-7, "m={m} n={n} x={x}");
        prop_assert!((cdf.eval(x) + cdf.eval(-x) - 1.0).abs() <= 1e-13);
        prop_assert_eq!(pdf.eval(x), pdf.eval(-x));
    }
}

proptest! {
    #![proptest_config(cases(24))]

    // ECDF grids merge like counters: commutative, count-preserving, and
    // merging a zeroed grid is the identity.
    #[test]
    fn ecdf_merge_is_counter_arithmetic(
        a in prop::collection::vec(-6.0f64..6.0, 1..200),
        b in prop::collection::vec(-6.0f64..6.0, 1..200),
    ) {
        let mut ga = EcdfGrid::new(-6.0, 0.05, 241).unwrap();
        let mut gb = ga.clone_empty();
        for &t in &a { ga.update(t); }
        for &t in &b { gb.update(t); }

        let mut ab = ga.clone();
        ab.merge(&gb).unwrap();
        let mut ba = gb.clone();
        ba.merge(&ga).unwrap();
        prop_assert_eq!(&ab, &ba);
        prop_assert_eq!(ab.total(), (a.len() + b.len()) as u64);

        let mut id = ga.clone();
        id.merge(&ga.clone_empty()).unwrap();
        prop_assert_eq!(&id, &ga);

        // ECDF values are a monotone step function into [0,1].
        let vals = ab.ecdf_values();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    // Simulation summaries are bit-deterministic and merge counts add.
    #[test]
    fn simulation_determinism_and_merge(
        n in 2u64..32,
        reps in 64u64..512,
        seed in 0u64..1_000_000,
    ) {
        let cfg = SimConfig::new(SymmetricLaw::Uniform, n, reps, seed);
        let s1 = run_simulation(&cfg).unwrap();
        let s2 = run_simulation(&cfg).unwrap();
        prop_assert_eq!(&s1, &s2);

        let other = run_simulation(&cfg.clone().with_stream(1)).unwrap();
        let mut merged = s1.clone();
        merged.merge(&other).unwrap();
        prop_assert_eq!(merged.reps, 2 * reps);
        prop_assert_eq!(merged.ecdf.total(), 2 * reps);
        // double-merging the same stream must be refused
        prop_assert!(merged.merge(&other).is_err());
    }

    // rate_fit inverts synthetic power laws exactly.
    #[test]
    fn rate_fit_recovers_power_laws(
        c in 0.1f64..50.0,
        p in 0.25f64..3.5,
    ) {
        let pairs: Vec<(u64, f64)> =
            [8u64, 16, 32, 64, 128].iter().map(|&n| (n, c * (n as f64).powf(-p))).collect();
        let fit = rate_fit(&pairs).unwrap();
        prop_assert!((fit.slope + p).abs() <= 1e-9, "slope {} vs -{p}", fit.slope);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(cases(12))]

    // L1 distance is a metric on densities: symmetry, identity, and the
    // triangle inequality, here on normal densities with random shifts.
    #[test]
    fn l1_distance_is_a_metric(
        mu1 in -1.5f64..1.5,
        mu2 in -1.5f64..1.5,
        mu3 in -1.5f64..1.5,
    ) {
        let (a, b) = (-11.0, 11.0);
        let d = |p: f64, q: f64| {
            l1_distance(move |x| normal_pdf(x - p), move |x| normal_pdf(x - q), a, b).unwrap()
        };
        let d12 = d(mu1, mu2);
        let d21 = d(mu2, mu1);
        prop_assert!((d12 - d21).abs() <= 1e-10);
        prop_assert!(d(mu1, mu1) == 0.0);
        let d13 = d(mu1, mu3);
        let d32 = d(mu3, mu2);
        prop_assert!(d12 <= d13 + d32 + 1e-9, "triangle: {d12} > {d13} + {d32}");
        // closed form: |N(mu1) - N(mu2)|_1 = 2(2 Phi(|mu1-mu2|/2) - 1)
        let want = 2.0 * (2.0 * normal_cdf((mu1 - mu2).abs() / 2.0) - 1.0);
        prop_assert!((d12 - want).abs() <= 1e-8, "{d12} vs closed form {want}");
    }

    // Weighted sup error dominates: refining a grid never lowers the sup.
    #[test]
    fn weighted_sup_grid_monotonicity(
        shift in 0.01f64..0.5,
        m in 0u32..6,
    ) {
        // Multiples of 0.5 are exactly representable, so the fine grid is a
        // strict superset of the coarse one and the sup cannot decrease.
        let coarse: Vec<f64> = (-8..=8).map(|i| i as f64).collect();
        let fine: Vec<f64> = (-16..=16).map(|i| i as f64 * 0.5).collect();
        let approx = move |x: f64| normal_cdf(x - shift);
        let sup_c = weighted_sup_error(approx, normal_cdf, m, &coarse).unwrap();
        let sup_f = weighted_sup_error(approx, normal_cdf, m, &fine).unwrap();
        prop_assert!(sup_f >= sup_c, "fine {sup_f} < coarse {sup_c}");
        prop_assert!(sup_f > 0.0);
    }

    // Law-built expansions match moment-built ones bit for bit.
    #[test]
    fn law_and_moment_constructions_agree(
        n in 2u64..10_000,
        x in -6.0f64..6.0,
        law_idx in 0usize..4,
    ) {
        let law = &SymmetricLaw::catalog()[law_idx];
        let (mu4, mu6) = (law.moment(4).unwrap(), law.moment(6).unwrap());
        for m in [2usize, 4, 6] {
            let from_law = edgeworth_cdf(m, n, law).unwrap();
            let from_moments =
                EdgeworthApprox::from_moments(ExpansionKind::Cdf, m, n, mu4, mu6).unwrap();
            prop_assert_eq!(from_law.eval(x), from_moments.eval(x));
            let p_law = edgeworth_pdf(m, n, law).unwrap();
            prop_assert!(p_law.eval(x).is_finite());
        }
    }
}
