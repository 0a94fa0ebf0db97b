use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use triadne::arcs::{major_arc_sweep, minor_arc_scan, ArcSystem};
use triadne::gauss::{verify_gauss_bound, verify_weight_moment};
use triadne::grid::GridFunction;
use triadne::lattice::{count_triangle_pairs, triangles_in_box};
use triadne::moments::{sixth_moment_count, vinogradov_count};
use triadne::operators::{dyadic_maximal, linearized_t, main_term_discrepancy, multiplier_t_hat, MainTermMultiplier};
use triadne::oscillatory::{check_sphere_identity, IdentityTolerances, QuadratureSpec};
use triadne::singular::{
    check_multiplicativity, check_orthogonality, hensel_lower_bound_check, singular_series_euler, singular_series_sigma,
};
use triadne::{Error, VerificationReport};

use crate::checkpoint::Checkpoint;
use crate::output::{big, Format, Output, Table};
use crate::{Cli, Command, Common, System};

/// Parses `7`, `2,4,8` or the inclusive range `2..40` (mixable: `1..3,8`).
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().with_context(|| format!("bad range start in {part:?}"))?;
                let b: u64 = b.trim().trim_start_matches('=').parse().with_context(|| format!("bad range end in {part:?}"))?;
                if a > b {
                    bail!("empty range {part:?}");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad integer {part:?}"))?),
        }
    }
    if out.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(out)
}

fn list_or(arg: &Option<String>, default: &str) -> Result<Vec<u64>> {
    parse_list(arg.as_deref().unwrap_or(default))
}

fn spec(c: &Common) -> Result<QuadratureSpec> {
    let mut spec = QuadratureSpec::default();
    if let Some(t) = c.tol {
        spec.tol = t;
    }
    spec.validate()?;
    Ok(spec)
}

fn frequency(v: &[f64], d: usize, what: &str) -> Result<Vec<f64>> {
    match v.len() {
        0 => Ok(vec![0.0; d]),
        n if n == d => Ok(v.to_vec()),
        n => bail!("{what} has {n} components but d = {d}"),
    }
}

pub fn run(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    let output = match &cli.command {
        Command::Count => count(c)?,
        Command::TrianglesBox => triangles_box(c)?,
        Command::GaussVerify { s, samples } => gauss_verify(c, s, *samples)?,
        Command::ArcsScan { samples, system, eta_zero, points } => arcs_scan(c, *samples, *system, *eta_zero, *points)?,
        Command::Lemma9 { xi } => lemma9(c, xi)?,
        Command::Singular => singular(c)?,
        Command::Multiplier { box_side: Some(l), samples, .. } => shadow(c, *l, *samples)?,
        Command::Multiplier { xi, eta, .. } => multiplier(c, xi, eta)?,
        Command::Operator { input, maximal, norms, dump } => operator(c, input.as_deref(), *maximal, norms, dump.as_deref())?,
        Command::Moments { s } => moments(c, *s)?,
    };
    let default_format = match output {
        Output::Report(_) => Format::Json,
        Output::Table(_) => Format::Csv,
    };
    let text = output.render(c.format.unwrap_or(default_format));
    match &c.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(output.pass())
}

/// Runs `row` for each item, resuming from and checkpointing to `<out>.ckpt`.
fn sweep(c: &Common, mut table: Table, items: &[u64], row: impl Fn(u64) -> Result<Vec<Value>>) -> Result<Output> {
    let key = format!("{} {} {:?}", table.name, table.inputs, items);
    let mut ckpt = Checkpoint::open(c.out.as_deref(), key, Duration::from_secs(c.checkpoint_secs))?;
    for &item in items {
        if let Some(saved) = ckpt.done(&json!(item)) {
            table.rows.push(saved.clone());
            continue;
        }
        let r = row(item)?;
        table.rows.push(r.clone());
        ckpt.push(r)?;
    }
    ckpt.finish()?;
    Ok(Output::Table(table))
}

fn count(c: &Common) -> Result<Output> {
    let lambdas = list_or(&c.lambda, "2..40")?;
    let d = c.d;
    let table = Table::new("count", json!({"d": d}), &["lambda", "count", "normalized"]);
    sweep(c, table, &lambdas, |lambda| {
        let n = count_triangle_pairs(lambda, d, false)?.count;
        let norm = if lambda == 0 { Value::Null } else { json!(n as f64 * (lambda as f64).powi(3 - d as i32)) };
        Ok(vec![json!(lambda), big(n), norm])
    })
}

fn triangles_box(c: &Common) -> Result<Output> {
    let sides = list_or(&c.range, "1..4")?;
    let d = c.d;
    let table = Table::new("triangles-box", json!({"d": d}), &["n", "triangles"]);
    sweep(c, table, &sides, |n| Ok(vec![json!(n), big(triangles_in_box(n, d)?)]))
}

fn moments(c: &Common, s: u32) -> Result<Output> {
    let ns = list_or(&c.range, "1..8")?;
    let js = format!("J_{s}");
    let table = Table::new("moments", json!({"s": s}), &["N", "J_1", &js, "T"]);
    sweep(c, table, &ns, |n| {
        let n32 = u32::try_from(n).map_err(|_| anyhow!("N = {n} is too large"))?;
        Ok(vec![
            json!(n),
            big(vinogradov_count(1, n32)?),
            big(vinogradov_count(s, n32)?),
            big(sixth_moment_count(n32)?),
        ])
    })
}

fn gauss_verify(c: &Common, s: &[f64], samples: usize) -> Result<Output> {
    let qs = list_or(&c.range, "1..50")?;
    let mut report = VerificationReport::new("gauss-verify", json!({"q": qs, "s": s, "samples": samples, "seed": c.seed}));
    for &q in &qs {
        report.merge(verify_gauss_bound(q, samples, c.seed));
        for &e in s {
            report.merge(verify_weight_moment(q, e));
        }
    }
    Ok(Output::Report(report))
}

fn arcs_scan(c: &Common, samples: usize, system: System, eta_zero: bool, points: usize) -> Result<Output> {
    let n = c.n.unwrap_or(256.0);
    if n < 1.0 || n.fract() != 0.0 {
        bail!("--N must be a positive integer for the arc scans");
    }
    let n = n as u64;
    let p = c.p.unwrap_or_else(|| (n as f64).powf(2.0 / 7.0).floor() as u64);
    let system = match system {
        System::M => ArcSystem::M,
        System::N => ArcSystem::N,
    };
    let ns = list_or(&c.range, "16,32,64")?;
    let qmax = c.qmax.unwrap_or(8);
    let mut report = VerificationReport::new(
        "arcs-scan",
        json!({"N": n, "P": p, "samples": samples, "system": system, "eta_zero": eta_zero,
               "major_points": points, "major_N": ns, "qmax": qmax, "seed": c.seed}),
    );
    let minor = minor_arc_scan(n, p, samples, c.seed, eta_zero, system)?;
    let minor_data = minor.data.clone();
    report.merge(minor);
    let mut major_data = Value::Null;
    if points > 0 {
        let major = major_arc_sweep(points, qmax, &ns, c.seed, 8.0, &spec(c)?);
        major_data = major.data.clone();
        report.merge(major);
    }
    report.data = json!({"minor": minor_data, "major": major_data});
    Ok(Output::Report(report))
}

fn lemma9(c: &Common, xi: &[f64]) -> Result<Output> {
    let lambda: f64 = match &c.lambda {
        Some(s) => s.trim().parse().with_context(|| format!("--lambda must be a single number here, got {s:?}"))?,
        None => 1.0,
    };
    let xi = frequency(xi, c.d, "--xi")?;
    let n = c.n.unwrap_or_else(|| lambda.sqrt().max(1.0));
    Ok(Output::Report(check_sphere_identity(n, lambda, &xi, &spec(c)?, IdentityTolerances::default())))
}

fn singular(c: &Common) -> Result<Output> {
    let lambdas = list_or(&c.lambda, "6")?;
    let d = u32::try_from(c.d)?;
    let q_max = c.qmax.unwrap_or(32);
    let p_max = c.p.unwrap_or(97);
    let tol = c.tol.unwrap_or(1e-3);
    let mut report = VerificationReport::new("singular", json!({"lambda": lambdas, "d": d, "q_max": q_max, "P": p_max, "tol": tol}));
    let mut data = Vec::new();
    for &lambda in &lambdas {
        let series = singular_series_sigma(lambda, d, q_max)?;
        let euler = singular_series_euler(lambda, d, p_max, tol)?;
        let gap = (series.sigma - euler.value).abs();
        report
            .soft(&format!("lambda={lambda}: |series - product|"), "series-equals-euler-product", gap, 0.0, series.tail_bound, gap <= series.tail_bound)
            .with_note(format!("series {:.9}, product {:.9}", series.sigma, euler.value));
        report.merge(check_multiplicativity(lambda, 4, 3, d)?);
        for p in [2, 3, 5] {
            for t in [1, 2] {
                report.merge(check_orthogonality(p, t, lambda, d)?);
            }
            match hensel_lower_bound_check(p, 3, lambda, d) {
                Ok(r) => report.merge(r),
                Err(Error::Hypothesis(msg)) => {
                    report.soft(&format!("lambda={lambda}: Hensel bound at p={p}"), "hensel-lower-bound", f64::NAN, f64::NAN, 0.0, true).with_note(msg);
                }
                Err(e) => return Err(e.into()),
            }
        }
        let factors: Vec<Value> = euler
            .factors
            .iter()
            .map(|f| json!({"p": f.p, "t_max": f.t_max, "value": f.value, "stabilized": f.stabilized}))
            .collect();
        data.push(json!({
            "lambda": lambda,
            "d": d,
            "q_max": q_max,
            "sigma": series.sigma,
            "tail_bound": series.tail_bound,
            "euler_product": euler.value,
            "factors": factors,
        }));
    }
    report.data = if data.len() == 1 { data.pop().unwrap() } else { Value::Array(data) };
    Ok(Output::Report(report))
}

fn multiplier(c: &Common, xi: &[f64], eta: &[f64]) -> Result<Output> {
    let lambdas = list_or(&c.lambda, "2..20")?;
    let xi = frequency(xi, c.d, "--xi")?;
    let eta = frequency(eta, c.d, "--eta")?;
    let q_max = c.qmax.unwrap_or(32);
    let mut table = Table::new(
        "multiplier",
        json!({"d": c.d, "xi": xi, "eta": eta, "q_max": q_max}),
        &["lambda", "t_hat_re", "t_hat_im", "m_hat_re", "m_hat_im", "abs_gap"],
    );
    for lambda in lambdas {
        let t = multiplier_t_hat(lambda, &xi, &eta)?;
        let m = MainTermMultiplier::new(lambda, c.d, q_max)?.value(&xi)?;
        table.rows.push(vec![json!(lambda), json!(t.re), json!(t.im), json!(m.re), json!(m.im), json!((t - m).norm())]);
    }
    Ok(Output::Table(table))
}

fn shadow(c: &Common, l: u64, samples: usize) -> Result<Output> {
    let lambdas = list_or(&c.lambda, "12,16,20")?;
    let q_max = c.qmax.unwrap_or(32);
    let mut report = VerificationReport::new(
        "main-term-shadow",
        json!({"lambda": lambdas, "d": c.d, "L": l, "q_max": q_max, "samples": samples, "seed": c.seed}),
    );
    let mut data = Vec::new();
    for &lambda in &lambdas {
        let r = main_term_discrepancy(lambda, c.d, l, q_max, samples, c.seed)?;
        let mut row = r.data.clone();
        row["lambda"] = json!(lambda);
        data.push(row);
        report.merge(r);
    }
    report.data = Value::Array(data);
    Ok(Output::Report(report))
}

fn operator(c: &Common, input: Option<&std::path::Path>, maximal: bool, ps: &[String], dump: Option<&std::path::Path>) -> Result<Output> {
    let f = match input {
        Some(path) => GridFunction::from_json(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?,
        None => GridFunction::delta(&vec![0; c.d]),
    };
    let lambda = match &c.lambda {
        Some(s) => s.trim().parse().with_context(|| format!("--lambda must be a single integer here, got {s:?}"))?,
        None => 4,
    };
    let out = if maximal { dyadic_maximal(lambda, &f, None)? } else { linearized_t(lambda, &f)? };
    if let Some(path) = dump {
        std::fs::write(path, out.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut table = Table::new(
        "operator",
        json!({"d": f.dim(), "lambda": lambda, "maximal": maximal, "support_in": f.len(), "support_out": out.len()}),
        &["p", "norm_in", "norm_out", "ratio"],
    );
    for p in ps {
        let pv: f64 = match p.trim() {
            "inf" | "infinity" => f64::INFINITY,
            s => s.parse().with_context(|| format!("bad exponent {s:?}"))?,
        };
        let (a, b) = (f.lp_norm(pv)?, out.lp_norm(pv)?);
        let ratio = if a > 0.0 { json!(b / a) } else { Value::Null };
        table.rows.push(vec![json!(p.trim()), json!(a), json!(b), ratio]);
    }
    Ok(Output::Table(table))
}

#[cfg(test)]
mod tests {
    use super::parse_list;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_list("1..2, 8").unwrap(), vec![1, 2, 8]);
        assert_eq!(parse_list("6").unwrap(), vec![6]);
        assert!(parse_list("5..2").is_err());
        assert!(parse_list("x").is_err());
    }
}
