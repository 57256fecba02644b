//! The `check` subcommand: one line per invariant family, exit 0/1.
//!
//! These are fast smoke checks of the same invariants the test suite pins
//! down at scale; each family reports PASS with a short detail or FAIL with
//! the first violation found.

use rand::Rng;
use selfnorm::distributions::{
    conditional_cumulant, cumulants_to_moments, moments_to_cumulants, SymmetricLaw,
};
use selfnorm::entropy_coeffs::{analytic_c2, c_l};
use selfnorm::expansion::{edgeworth_cdf, edgeworth_pdf, ConditionalConfig};
use selfnorm::metrics::{l1_distance, rate_fit, relative_entropy, weighted_sup_error};
use selfnorm::simulate::{gaussian_exact_density, replication_rng, run_simulation, SimConfig};
use selfnorm::special_math::{
    gauss_hermite_inner, normal_cdf, normal_pdf, quad_integrate, QuadratureSpec,
};

type Check = (&'static str, fn() -> Result<String, String>);

pub const FAMILIES: &[Check] = &[
    ("hermite-orthogonality", hermite_orthogonality),
    ("normal-cdf", normal_cdf_values),
    ("quadrature-lemmas", quadrature_lemmas),
    ("moment-cumulant-roundtrip", moment_cumulant_roundtrip),
    ("conditional-cumulants", conditional_cumulants),
    ("expansion-consistency", expansion_consistency),
    ("lambda-invariants", lambda_invariants),
    ("simulation-determinism", simulation_determinism),
    ("entropy-invariants", entropy_invariants),
    ("metrics-sanity", metrics_sanity),
];

/// Run every family; returns true when all pass. Prints one line each.
pub fn run_all() -> bool {
    let mut all_ok = true;
    for (name, f) in FAMILIES {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                all_ok = false;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    all_ok
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn hermite_orthogonality() -> Result<String, String> {
    let mut worst = 0.0f64;
    for j in 0..=8usize {
        for k in 0..=8usize {
            let got = gauss_hermite_inner(j, k).map_err(|e| e.to_string())?;
            let want = if j == k { factorial(j) } else { 0.0 };
            let scale = (factorial(j) * factorial(k)).sqrt().max(1.0);
            let err = (got - want).abs() / scale;
            worst = worst.max(err);
            if err > 1e-8 {
                return Err(format!("<H_{j}, H_{k}> = {got}, want {want}"));
            }
        }
    }
    Ok(format!("j,k <= 8, worst scaled error {worst:.2e}"))
}

// The oracle spot value keeps its full 22-digit precision.
#[allow(clippy::excessive_precision)]
fn normal_cdf_values() -> Result<String, String> {
    let spots = [
        (0.0, 0.5),
        (1.0, 0.8413447460685429),
        (1.959964, 0.9750000009035575956975),
        (-3.0, 0.0013498980316300933),
    ];
    for (x, want) in spots {
        let got = normal_cdf(x);
        if (got - want).abs() > 1e-12 {
            return Err(format!("Phi({x}) = {got}, want {want}"));
        }
    }
    let mut x = -8.0;
    while x <= 8.0 {
        if (normal_cdf(x) + normal_cdf(-x) - 1.0).abs() > 1e-15 {
            return Err(format!("Phi(x) + Phi(-x) != 1 at x = {x}"));
        }
        x += 0.25;
    }
    Ok("4 spot values and reflection on [-8, 8]".into())
}

fn quadrature_lemmas() -> Result<String, String> {
    // int_0^l (a t^2 + b)^{-3/2} dt = l / (b sqrt(a l^2 + b))
    for (a, b, l) in [(1.0, 1.0, 2.0), (0.5, 2.0, 1.0), (3.0, 0.25, 5.0), (2.2, 1.7, 0.8)] {
        let spec = QuadratureSpec::new(0.0, l);
        let got =
            quad_integrate(|t| (a * t * t + b).powf(-1.5), &spec).map_err(|e| e.to_string())?;
        let want = l / (b * (a * l * l + b).sqrt());
        if (got - want).abs() > 1e-8 {
            return Err(format!("(a,b,l)=({a},{b},{l}): {got} vs {want}"));
        }
    }
    // int over the support of (a - w^2)^{-1/2} = pi, singular endpoints
    for a in [4.0f64, 0.31] {
        let sa = a.sqrt();
        let spec = QuadratureSpec::new(-sa, sa);
        let got = quad_integrate(
            |w| {
                if w.abs() < sa {
                    ((sa - w) * (sa + w)).powf(-0.5)
                } else {
                    f64::INFINITY
                }
            },
            &spec,
        )
        .map_err(|e| e.to_string())?;
        if (got - std::f64::consts::PI).abs() > 1e-8 {
            return Err(format!("a={a}: {got} vs pi"));
        }
    }
    Ok("6 closed-form identities within 1e-8".into())
}

fn moment_cumulant_roundtrip() -> Result<String, String> {
    for law in SymmetricLaw::catalog() {
        let moments: Vec<f64> = (0..=12).map(|k| law.moment(k).unwrap()).collect();
        let kappa = moments_to_cumulants(&moments).map_err(|e| e.to_string())?;
        let back = cumulants_to_moments(&kappa);
        for (k, (a, b)) in moments.iter().zip(&back).enumerate() {
            if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                return Err(format!("{} order {k}: {a} vs {b}", law.id()));
            }
        }
    }
    Ok("catalog laws to order 12".into())
}

fn conditional_cumulants() -> Result<String, String> {
    // Independent route: partition recursion on the two-point +-x moment
    // sequence must reproduce the closed-form table.
    let mut rng = replication_rng(20240, 0, 0);
    for _ in 0..100 {
        let x: f64 = 0.05 + 3.0 * rng.random::<f64>();
        let moments: Vec<f64> = (0..=6).map(|k| if k % 2 == 0 { x.powi(k) } else { 0.0 }).collect();
        let kappa = moments_to_cumulants(&moments).map_err(|e| e.to_string())?;
        for l in [2usize, 4, 6] {
            let want = conditional_cumulant(l, x).map_err(|e| e.to_string())?;
            let got = kappa[l];
            if (got - want).abs() > 1e-12 * want.abs().max(1.0) {
                return Err(format!("x={x}, l={l}: recursion {got} vs table {want}"));
            }
        }
        // closed forms for two-point sign sums
        let k4 = conditional_cumulant(4, x).unwrap();
        let k6 = conditional_cumulant(6, x).unwrap();
        if (k4 + 2.0 * x.powi(4)).abs() > 1e-12 * x.powi(4)
            || (k6 - 16.0 * x.powi(6)).abs() > 1e-12 * 16.0 * x.powi(6)
        {
            return Err(format!("closed forms -2x^4 / 16x^6 violated at x={x}"));
        }
    }
    Ok("100 random two-point laws, orders 2/4/6".into())
}

fn expansion_consistency() -> Result<String, String> {
    let law = SymmetricLaw::GaussMix;
    for (m, n) in [(2usize, 50u64), (4, 50), (6, 200)] {
        let cdf = edgeworth_cdf(m, n, &law).map_err(|e| e.to_string())?;
        let pdf = edgeworth_pdf(m, n, &law).map_err(|e| e.to_string())?;
        let h = 1e-5;
        for &x in &[-2.7, -0.4, 0.0, 1.1, 3.3] {
            let num = (cdf.eval(x + h) - cdf.eval(x - h)) / (2.0 * h);
            if (num - pdf.eval(x)).abs() > 5e-7 {
                return Err(format!("m={m}, n={n}, x={x}: dF = {num} vs f = {}", pdf.eval(x)));
            }
            if (cdf.eval(x) + cdf.eval(-x) - 1.0).abs() > 1e-13 {
                return Err(format!("m={m}: symmetry broken at x={x}"));
            }
        }
    }
    // corrections integrate to zero
    let mu4 = law.moment(4).unwrap();
    let mu6 = law.moment(6).unwrap();
    for r in [2usize, 4] {
        let spec = QuadratureSpec::new(-12.0, 12.0);
        let v = quad_integrate(
            |x| {
                selfnorm::expansion::marginal_density_correction(r, x, mu4, mu6)
                    .expect("supported order")
            },
            &spec,
        )
        .map_err(|e| e.to_string())?;
        if v.abs() > 1e-9 {
            return Err(format!("int q_{r} = {v}"));
        }
    }
    Ok("derivative link, symmetry, zero-mass corrections".into())
}

fn lambda_invariants() -> Result<String, String> {
    let mut rng = replication_rng(7, 1, 0);
    for i in 0..1000u64 {
        let n = 1 + (i % 40) as usize;
        let mut xs = vec![0.0f64; n];
        SymmetricLaw::Laplace.sample_into(&mut rng, &mut xs).unwrap();
        let cfg = ConditionalConfig::new(&xs, 6).map_err(|e| e.to_string())?;
        if cfg.lambda_tilde(2).unwrap() != 1.0 {
            return Err(format!("lambda_2 != 1 on config {i}"));
        }
        let mut prev: Option<f64> = None;
        for k in [4usize, 6, 8, 10, 12] {
            let lk = cfg.l_tilde(k).unwrap();
            if !(0.0..=1.0 + 1e-15).contains(&lk) {
                return Err(format!("L_{k} = {lk} outside [0,1]"));
            }
            let root = lk.powf(1.0 / (k as f64 - 2.0));
            if let Some(p) = prev {
                if root < p - 1e-12 {
                    return Err(format!("L-root decreased at k={k}: {root} < {p}"));
                }
            }
            prev = Some(root);
        }
    }
    Ok("1000 random configs: lambda_2 = 1, L in [0,1], L-roots monotone".into())
}

fn simulation_determinism() -> Result<String, String> {
    let cfg = SimConfig::new(SymmetricLaw::Uniform, 16, 20_000, 11);
    let a = run_simulation(&cfg).map_err(|e| e.to_string())?;
    let b = run_simulation(&cfg).map_err(|e| e.to_string())?;
    let ja = serde_json::to_string(&a).map_err(|e| e.to_string())?;
    let jb = serde_json::to_string(&b).map_err(|e| e.to_string())?;
    if ja != jb {
        return Err("rerun with same seed differs".into());
    }
    let vals = a.ecdf.ecdf_values();
    if vals.windows(2).any(|w| w[1] < w[0]) || vals.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err("ECDF not monotone in [0,1]".into());
    }
    let mut merged = run_simulation(&cfg.clone().with_stream(1)).map_err(|e| e.to_string())?;
    merged.merge(&a).map_err(|e| e.to_string())?;
    if merged.reps != 2 * cfg.reps {
        return Err("merge lost replications".into());
    }
    Ok(format!("20k replications, bit-identical rerun, merge total {}", merged.reps))
}

fn entropy_invariants() -> Result<String, String> {
    if c_l(3.0, 15.0, 1).map_err(|e| e.to_string())?.value != 0.0 {
        return Err("c_1 != 0".into());
    }
    for law in SymmetricLaw::catalog() {
        let mu4 = law.moment(4).unwrap();
        let mu6 = law.moment(6).unwrap();
        let c2 = c_l(mu4, mu6, 2).map_err(|e| e.to_string())?.value;
        if (c2 - analytic_c2(mu4)).abs() > 1e-6 * analytic_c2(mu4) {
            return Err(format!("{}: c_2 {c2} vs {}", law.id(), analytic_c2(mu4)));
        }
    }
    let d = relative_entropy(normal_pdf, -12.0, 12.0).map_err(|e| e.to_string())?;
    if d.abs() > 1e-12 {
        return Err(format!("D(phi || phi) = {d}"));
    }
    let root = 32f64.sqrt();
    let d32 = relative_entropy(|x| gaussian_exact_density(32, x).unwrap(), -root, root)
        .map_err(|e| e.to_string())?;
    if !(0.0..1e-2).contains(&d32) {
        return Err(format!("D(T_32) = {d32} out of range"));
    }
    Ok("c_1 = 0, c_2 analytic match, D >= 0 on oracle".into())
}

fn metrics_sanity() -> Result<String, String> {
    let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
    let z = weighted_sup_error(normal_cdf, normal_cdf, 4, &grid).map_err(|e| e.to_string())?;
    if z != 0.0 {
        return Err("sup distance of identical functions != 0".into());
    }
    let d1 =
        l1_distance(normal_pdf, |x| normal_pdf(x - 0.5), -9.0, 9.5).map_err(|e| e.to_string())?;
    let want = 2.0 * (2.0 * normal_cdf(0.25) - 1.0);
    if (d1 - want).abs() > 1e-8 {
        return Err(format!("shifted-normal L1 {d1} vs {want}"));
    }
    let pairs: Vec<(u64, f64)> =
        [8u64, 16, 32, 64].iter().map(|&n| (n, 3.0 * (n as f64).powf(-1.5))).collect();
    let fit = rate_fit(&pairs).map_err(|e| e.to_string())?;
    if (fit.slope + 1.5).abs() > 1e-10 {
        return Err(format!("exact power-law slope {}", fit.slope));
    }
    Ok("sup/L1/rate-fit closed-form checks".into())
}
