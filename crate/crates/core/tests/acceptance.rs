//! End-to-end acceptance checks, one printed line per criterion.
//!
//! Runs without the libtest harness so the summary is always shown; the
//! process exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;
use triadne::arcs::{major_arc_sweep, minor_arc_scan, sixth_moment_quadrature, ArcSystem};
use triadne::gauss::{verify_gauss_bound, verify_weight_moment};
use triadne::grid::GridFunction;
use triadne::lattice::{count_triangle_pairs, count_triangle_pairs_dp, triangles_in_box, triangles_in_box_direct};
use triadne::moments::{loglog_slope, sixth_moment_count, vinogradov_count};
use triadne::operators::{
    check_domination, linearized_t, main_term_discrepancy, multiplier_t_hat, random_function, triangle_average_t,
};
use triadne::oscillatory::{check_sphere_identity, compute_c_d, singular_integral_i, IdentityTolerances, QuadratureSpec};
use triadne::rng::stream;
use triadne::singular::{check_orthogonality, singular_series_euler};
use triadne::{Result, VerificationReport, C64};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn failed_hard(r: &VerificationReport) -> usize {
    r.checks.iter().filter(|c| c.hard && !c.pass).count()
}

fn max_lhs(r: &VerificationReport, label_prefix: &str) -> f64 {
    r.checks.iter().filter(|c| c.label.starts_with(label_prefix)).fold(f64::NEG_INFINITY, |m, c| m.max(c.lhs))
}

/// Exact counts by orbit enumeration against the coordinate DP.
fn exact_counts() -> Result<Outcome> {
    let start = Instant::now();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    let grid = (2..=40).step_by(2).map(|l| (l, 7)).chain((1..=5).flat_map(|d| (1..=60).map(move |l| (l, d))));
    for (lambda, d) in grid {
        let a = count_triangle_pairs(lambda, d, false)?.count;
        let b = count_triangle_pairs_dp(lambda, d);
        cases += 1;
        if a != b {
            mismatches.push(format!("(λ={lambda}, d={d}): {a} vs {b}"));
        }
    }
    let elapsed = start.elapsed();
    let in_time = elapsed < Duration::from_secs(600);
    outcome(
        mismatches.is_empty() && in_time,
        format!("{cases} cases, {} mismatches {:?}, {:.1}s", mismatches.len(), mismatches, elapsed.as_secs_f64()),
    )
}

/// p^{t(2d−3)}Σ_{j≤t}G_λ(p^j) against the counted local solutions.
fn orthogonality() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut cases = 0;
    for p in [2, 3, 5] {
        for t in [1, 2] {
            for lambda in (2..=12).step_by(2) {
                let r = check_orthogonality(p, t, lambda, 7)?;
                let c = &r.checks[0];
                worst = worst.max((c.lhs - c.rhs).abs() / c.rhs.max(1.0));
                failures += failed_hard(&r);
                cases += 1;
            }
        }
    }
    outcome(failures == 0 && worst <= 1e-6, format!("{cases} cases, worst relative gap {worst:.2e} (tolerance 1e-6)"))
}

fn gauss_square_bound() -> Result<Outcome> {
    let mut violations = 0;
    let mut checks = 0;
    for q in 1..=50 {
        let r = verify_gauss_bound(q, usize::MAX, SEED);
        violations += failed_hard(&r);
        checks += r.checks.len();
    }
    outcome(violations == 0, format!("q ≤ 50, all primitive a, 5 (m,n) each: {violations} violations over {checks} checks"))
}

fn weight_moment() -> Result<Outcome> {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for q in 1..=300 {
        for s in [2.0, 4.0] {
            let r = verify_weight_moment(q, s);
            violations += failed_hard(&r);
            for c in &r.checks {
                if c.rhs > 0.0 {
                    worst = worst.max(c.lhs / c.rhs);
                }
            }
        }
    }
    outcome(violations == 0, format!("q ≤ 300, s ∈ {{2,4}}: {violations} violations, max lhs/rhs {worst:.3}"))
}

/// Sphere-transform identity, N-independence, and the four-dimensional constant.
fn sphere_identity() -> Result<Outcome> {
    let spec = QuadratureSpec::default();
    let tols = IdentityTolerances::default();
    let mut e1 = [0.0; 7];
    e1[0] = 0.25;
    let mut identity_ok = true;
    let mut scale_free_ok = true;
    let mut parts = Vec::new();
    for (name, xi) in [("0", [0.0; 7]), ("0.25e1", e1), ("0.1·1", [0.1; 7])] {
        let r = check_sphere_identity(1.0, 1.0, &xi, &spec, tols);
        let identity = max_lhs(&r, "|I_N - c_d");
        let scale = max_lhs(&r, "|I_N - I_2N|");
        identity_ok &= identity <= 0.05;
        scale_free_ok &= scale <= 1e-6;
        parts.push(format!("ξ={name}: identity {identity:.2e}, N vs 2N {scale:.2e}"));
    }
    let c4 = compute_c_d(4)?;
    let c4_gap = (c4 - PI / 4.0).abs();
    let c4_ok = c4_gap <= 1e-8;
    parts.push(format!("c_4 = {c4:.10} vs π/4, gap {c4_gap:.2e}"));
    outcome(identity_ok && scale_free_ok && c4_ok, parts.join("; "))
}

/// λ^{3−d}#V_λ against 𝔖(λ)·I_λ(0,0) in dimension 7.
fn zero_frequency_main_term() -> Result<Outcome> {
    let spec = QuadratureSpec::default();
    let integral = singular_integral_i(1.0, &[0.0; 7], &[0.0; 7], &spec)?.value.re;
    let mut ratios = Vec::new();
    for lambda in (20..=40).step_by(2) {
        let count = count_triangle_pairs(lambda, 7, false)?.count as f64;
        let sigma = singular_series_euler(lambda, 7, 97, 1e-3)?.value;
        ratios.push(count / (lambda as f64).powi(4) / (sigma * integral));
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median = (sorted[sorted.len() / 2] + sorted[(sorted.len() - 1) / 2]) / 2.0;
    let band = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let rs: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    outcome(band && (0.8..=1.25).contains(&median), format!("I(0) = {integral:.4}, ratios [{}], median {median:.4}", rs.join(", ")))
}

fn moment_growth() -> Result<Outcome> {
    let j1_ok = (1..=8u32).all(|n| vinogradov_count(1, n).ok() == Some(((2 * n + 1) as u128).pow(2)));
    let ns = [2u32, 4, 6, 8];
    let j4: Vec<f64> = ns.iter().map(|&n| vinogradov_count(4, n).map(|v| v as f64)).collect::<Result<_>>()?;
    let slope_j = loglog_slope(&ns.map(f64::from), &j4);
    let tn: Vec<u32> = (2..=8).collect();
    let t: Vec<f64> = tn.iter().map(|&n| sixth_moment_count(n).map(|v| v as f64)).collect::<Result<_>>()?;
    let slope_t = loglog_slope(&tn.iter().map(|&n| n as f64).collect::<Vec<_>>(), &t);
    let mut quad_gap = 0.0f64;
    for n in 1..=4u32 {
        let exact = sixth_moment_count(n)? as f64;
        quad_gap = quad_gap.max((sixth_moment_quadrature(n as u64)? - exact).abs() / exact);
    }
    let pass = j1_ok && (7.2..=8.8).contains(&slope_j) && slope_t <= 6.8 && quad_gap <= 0.01;
    outcome(
        pass,
        format!("J_1 exact: {j1_ok}; slope J_4 {slope_j:.3} (want [7.2, 8.8]); slope T {slope_t:.3} (want ≤ 6.8); quadrature gap {quad_gap:.2e}"),
    )
}

fn minor_arcs() -> Result<Outcome> {
    let start = Instant::now();
    let n = 256u64;
    let p = (n as f64).powf(2.0 / 7.0).floor() as u64;
    let r = minor_arc_scan(n, p, 10_000, SEED, false, ArcSystem::M)?;
    let max = max_lhs(&r, "max |S_N|");
    let guard = 10.0 * (n as f64).ln();
    let elapsed = start.elapsed();
    outcome(
        r.pass && elapsed < Duration::from_secs(300),
        format!("N = {n}, P = {p}, 10^4 samples: max ratio {max:.3} vs 10 log N = {guard:.2}, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn major_arcs() -> Result<Outcome> {
    let r = major_arc_sweep(300, 8, &[16, 32, 64], SEED, 8.0, &QuadratureSpec::default());
    let ratio = r
        .checks
        .iter()
        .find(|c| c.label.starts_with("max residual"))
        .map(|c| c.lhs / c.rhs)
        .unwrap_or(f64::NAN);
    let exact = r.checks.iter().filter(|c| c.label.starts_with("q=1, beta=0")).count();
    outcome(
        r.pass,
        format!(
            "300 centers, q ≤ 8, N ∈ {{16,32,64}}: max residual / qN(1+N²|β|) = {:.3} of guard 8 ({ratio:.3}); {exact} exact β=0 cases; {} hard failures",
            max_lhs(&r, "max residual"),
            failed_hard(&r)
        ),
    )
}

fn close(a: &GridFunction, b: &GridFunction, tol: f64) -> bool {
    a.iter().chain(b.iter()).all(|(k, _)| (a.get(k) - b.get(k)).norm() <= tol)
}

fn operator_identities() -> Result<Outcome> {
    let mut parseval = 0.0f64;
    for (lambda, d) in [(2u64, 3usize), (4, 4), (8, 5), (12, 7), (20, 7)] {
        let t = multiplier_t_hat(lambda, &vec![0.0; d], &vec![0.0; d])?;
        let count = count_triangle_pairs_dp(lambda, d) as f64;
        parseval = parseval.max((t.re * (lambda as f64).powi(d as i32 - 3) - count).abs() / count);
    }

    let mut algebra = true;
    for i in 0..10u64 {
        let mut rng = stream(SEED, i);
        let d = 4;
        let f1 = random_function(&mut rng, d, 2, 6, false);
        let f2 = random_function(&mut rng, d, 2, 6, false);
        let g = random_function(&mut rng, d, 2, 6, false);
        let (a, b) = (C64::new(rng.gen(), rng.gen()), C64::new(rng.gen(), rng.gen()));
        let lhs = triangle_average_t(4, &f1.scale(a).add(&f2.scale(b))?, &g)?;
        let rhs = triangle_average_t(4, &f1, &g)?.scale(a).add(&triangle_average_t(4, &f2, &g)?.scale(b))?;
        algebra &= close(&lhs, &rhs, 1e-12);
        let lhs = triangle_average_t(4, &g, &f1.scale(a).add(&f2.scale(b))?)?;
        let rhs = triangle_average_t(4, &g, &f1)?.scale(a).add(&triangle_average_t(4, &g, &f2)?.scale(b))?;
        algebra &= close(&lhs, &rhs, 1e-12);
        let w: Vec<i64> = (0..d).map(|_| rng.gen_range(-5..=5)).collect();
        let moved = triangle_average_t(4, &f1.translate(&w), &g.translate(&w))?;
        algebra &= close(&moved, &triangle_average_t(4, &f1, &g)?.translate(&w), 1e-12);
    }

    let f = GridFunction::delta(&[0; 5]);
    let odd = (1..=15).step_by(2).all(|l| {
        triangle_average_t(l, &f, &f).map(|t| t.is_empty()).unwrap_or(false)
            && linearized_t(l, &f).map(|t| t.is_empty()).unwrap_or(false)
            && multiplier_t_hat(l, &[0.1; 5], &[0.2; 5]).ok() == Some(C64::new(0.0, 0.0))
    });

    let dom = check_domination(10, 4, 100, SEED)?;
    let pass = parseval <= 1e-9 && algebra && odd && dom.pass;
    outcome(
        pass,
        format!("Parseval gap {parseval:.2e}; bilinearity/translation {algebra}; odd λ annihilated {odd}; domination on 100 pairs {}", dom.pass),
    )
}

/// Finite, reported discrepancies; the λ-trend is printed but not asserted.
fn main_term_shadow() -> Result<Outcome> {
    let lambdas = [12u64, 16, 20];
    let mut rel = Vec::new();
    let mut finite = true;
    for &lambda in &lambdas {
        let r = main_term_discrepancy(lambda, 7, 64, 32, 4000, SEED)?;
        let v = r.data["relative_discrepancy"].as_f64().unwrap_or(f64::NAN);
        finite &= v.is_finite() && r.pass;
        rel.push((v, r.data["standard_error"].as_f64().unwrap_or(f64::NAN)));
    }
    let xs: Vec<f64> = lambdas.iter().map(|&l| l as f64).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = rel.iter().map(|r| r.0).sum::<f64>() / rel.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = xs.iter().zip(&rel).map(|(x, r)| (x - mx) * (r.0 - my)).sum::<f64>() / sxx;
    let slope_err = xs.iter().zip(&rel).map(|(x, r)| ((x - mx) * r.1).powi(2)).sum::<f64>().sqrt() / sxx;
    let shown: Vec<String> = lambdas.iter().zip(&rel).map(|(l, (v, e))| format!("λ={l}: {v:.4} ± {e:.4}")).collect();
    outcome(
        finite,
        format!(
            "{}; trend {slope:+.2e} ± {slope_err:.1e} per unit λ, nonincreasing on average: {} (report-only)",
            shown.join(", "),
            if slope <= 0.0 { "yes" } else { "no" }
        ),
    )
}

fn box_tables() -> Result<Outcome> {
    let plane: Vec<u128> = (0..=6).map(|n| triangles_in_box(n, 2)).collect::<Result<_>>()?;
    let plane_ok = plane.iter().all(|&c| c == 0);
    let mut space = Vec::new();
    for n in 0..=2 {
        space.push((triangles_in_box(n, 3)?, triangles_in_box_direct(n, 3)));
    }
    let space_ok = space.iter().all(|(a, b)| a == b);
    outcome(plane_ok && space_ok, format!("plane counts {plane:?}; [0,n]^3 pinned vs direct {space:?}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Result<Outcome>)> = vec![
        ("exact pair counts: orbit enumeration = coordinate DP", exact_counts),
        ("local densities = p-power Gauss-sum series", orthogonality),
        ("|g|^2 <= q^-2 nu(q; 2a)", gauss_square_bound),
        ("weight moments <= tau(q)^2 q^(s/2+2)", weight_moment),
        ("singular integral: sphere identity, N-independence, c_4", sphere_identity),
        ("zero frequency: count vs singular series x integral", zero_frequency_main_term),
        ("moment growth: J_1, J_4 slope, T slope, sixth-moment quadrature", moment_growth),
        ("minor-arc scan at N = 256", minor_arcs),
        ("major-arc residual guard", major_arcs),
        ("operator identities", operator_identities),
        ("main-term shadow at d = 7, L = 64", main_term_shadow),
        ("triangles in boxes", box_tables),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {detail} ({:.1}s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
