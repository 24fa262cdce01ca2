use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use kpzlab::airy_process::{sample_airy_edge, Truncation};
use kpzlab::fredholm::{
    laplace_rhs_beta1_mc, laplace_rhs_beta2_with_order, tracy_widom_f2_moments, tracy_widom_f2_with_order,
    AirySamplerParams, LAPLACE_ORDER, TW_ORDER,
};
use kpzlab::matrix::Ensemble;
use kpzlab::replicas::try_run_replicas;
use kpzlab::stats::{
    empirical_laplace, generate, ks_against_cdf, ks_report, laplace_beta1_report, mean_and_se,
    moment_check_with_slack, ComparisonReport, Generator,
};
use kpzlab::{heat_kernel_mean, Beta, SeedSpec};
use serde::Serialize;

use crate::config::{usage, Grid, Resolver};
use crate::io::{dat, emit, fmt, table, SampleFile};
use crate::Common;

const DEFAULT_U_GRID: &str = "0.1,0.25,0.5,1,2,4,8";

fn positive(name: &str, x: f64) -> anyhow::Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("{name} must be positive, got {x}")))
    }
}

fn resolver(common: &Common) -> anyhow::Result<Resolver> {
    Resolver::new(common.config.as_deref())
}

/// Seed, replica count and workers; workers and the output path are not
/// echoed so that files do not depend on them.
fn run_shape(r: &mut Resolver, c: &Common) -> anyhow::Result<(u64, usize, usize, Option<PathBuf>)> {
    let seed = r.require("seed", c.seed, Some(0))?;
    let reps = r.require("reps", c.reps, Some(100))?;
    let workers = r.get_quiet("workers", c.workers, Some(0))?.unwrap_or(0);
    let out = r.get_quiet("out", c.out.as_ref().map(|p| p.display().to_string()), None)?;
    Ok((seed, reps, workers, out.map(PathBuf::from)))
}

fn write_sample(
    command: &str,
    r: &Resolver,
    generator: &Generator,
    reps: usize,
    seed: u64,
    workers: usize,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let s = generate(generator, reps, seed, workers)?;
    let mut record = r.record.clone();
    record.extend(generator.parameters());
    let mut cols = vec!["replica", "value"];
    cols.extend(generator.aux_names());
    let rows: Vec<Vec<String>> = s
        .sample
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = vec![i.to_string(), fmt(*v)];
            row.extend(s.aux.iter().map(|col| fmt(col[i])));
            row
        })
        .collect();
    emit(out, &table(command, &record, &cols, &rows))?;
    Ok(0)
}

pub fn sample_matrix(c: &Common, ensemble: Option<String>) -> anyhow::Result<u8> {
    let mut r = resolver(c)?;
    let ensemble: Ensemble = r
        .require("ensemble", ensemble, Some("tridiagonal".to_string()))?
        .parse()
        .map_err(|e: kpzlab::Error| usage(e.to_string()))?;
    let beta = positive("beta", r.require("beta", c.beta, Some(2.0))?)?;
    if ensemble != Ensemble::Tridiagonal && Beta::from_f64(beta).is_err() {
        return Err(usage(format!(
            "the {ensemble} ensemble is defined for beta 1 or 2 only (got {beta}); the tridiagonal ensemble accepts any beta > 0"
        )));
    }
    let alpha = positive("alpha", r.require("alpha", c.alpha, Some(1.0))?)?;
    let n = r.require("n", c.n, Some(1000))?;
    let (seed, reps, workers, out) = run_shape(&mut r, c)?;
    r.finish()?;
    let g = Generator::Matrix {
        ensemble,
        beta,
        alpha,
        n,
    };
    write_sample("sample-matrix", &r, &g, reps, seed, workers, out.as_deref())
}

pub fn sample_airy(c: &Common) -> anyhow::Result<u8> {
    let mut r = resolver(c)?;
    let beta = positive("beta", r.require("beta", c.beta, Some(2.0))?)?;
    let n_sim = r.require("n_sim", c.n_sim, Some(4000))?;
    let k = r.get("k", c.k, None)?;
    match k {
        Some(k) => {
            let (seed, reps, workers, out) = run_shape(&mut r, c)?;
            r.finish()?;
            if k == 0 {
                return Err(usage("k must be positive"));
            }
            let base = SeedSpec::new(seed, 0);
            let rows = try_run_replicas(reps, workers, |i| {
                sample_airy_edge(beta, k, n_sim, &mut base.with_stream(i).stream()).map(|s| s.points)
            })?;
            let mut cols = vec!["replica".to_string(), "value".to_string()];
            cols.extend((2..=k).map(|j| format!("lambda_{j}")));
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = rows
                .iter()
                .enumerate()
                .map(|(i, pts)| std::iter::once(i.to_string()).chain(pts.iter().map(|x| fmt(*x))).collect())
                .collect();
            let mut record = r.record.clone();
            record.insert("generator".into(), "airy-edge".into());
            emit(out.as_deref(), &table("sample-airy", &record, &cols, &rows))?;
            Ok(0)
        }
        None => {
            let beta = Beta::from_f64(beta).map_err(|_| {
                usage(format!("decorated-Airy sums are defined for beta 1 or 2 (got {beta}); use --k for edge points"))
            })?;
            let alpha = positive("alpha", r.require("alpha", c.alpha, Some(1.0))?)?;
            let (seed, reps, workers, out) = run_shape(&mut r, c)?;
            r.finish()?;
            let g = Generator::Kpz { beta, alpha, n_sim };
            write_sample("sample-airy", &r, &g, reps, seed, workers, out.as_deref())
        }
    }
}

pub fn sample_excursion(
    c: &Common,
    noise_seed: Option<u64>,
    n_excursions: Option<usize>,
    n_steps: Option<usize>,
) -> anyhow::Result<u8> {
    let mut r = resolver(c)?;
    let beta = positive("beta", r.require("beta", c.beta, Some(2.0))?)?;
    let alpha = positive("alpha", r.require("alpha", c.alpha, Some(1.0))?)?;
    let n_excursions = r.require("n_excursions", n_excursions, Some(2000))?;
    let n_steps = r.require("n_steps", n_steps, Some(256))?;
    let (seed, reps, workers, out) = run_shape(&mut r, c)?;
    let default_noise = SeedSpec::new(seed, 0).derive(0x006e_6f69_7365).master_seed;
    let noise_seed = r.require("noise_seed", noise_seed, Some(default_noise))?;
    r.finish()?;
    let g = Generator::Excursion {
        beta,
        alpha,
        n_excursions,
        n_steps,
        noise_seed,
    };
    write_sample("sample-excursion", &r, &g, reps, seed, workers, out.as_deref())
}

pub fn eval_laplace(c: &Common, u_grid: Option<String>, order: Option<usize>) -> anyhow::Result<u8> {
    let mut r = resolver(c)?;
    let beta = r.require("beta", c.beta, Some(2.0))?;
    let beta = Beta::from_f64(beta).map_err(|_| usage(format!("beta must be 1 or 2, got {beta}")))?;
    let alpha = positive("alpha", r.require("alpha", c.alpha, Some(1.0))?)?;
    let grid = parse_grid(&mut r, u_grid)?;
    let text = match beta {
        Beta::Two => {
            let order = r.require("order", order, Some(LAPLACE_ORDER))?;
            let out = r.get_quiet("out", c.out.as_ref().map(|p| p.display().to_string()), None)?;
            r.finish()?;
            let rows = grid
                .0
                .iter()
                .map(|&u| Ok(vec![fmt(u), fmt(laplace_rhs_beta2_with_order(u, alpha, order)?)]))
                .collect::<anyhow::Result<Vec<_>>>()?;
            (table("eval-laplace", &r.record, &["u", "value"], &rows), out)
        }
        Beta::One => {
            let n_sim = r.require("n_sim", c.n_sim, Some(4000))?;
            let (seed, reps, workers, out) = run_shape(&mut r, c)?;
            r.finish()?;
            let sampler = AirySamplerParams {
                n_sim,
                truncation: Truncation::default_for(alpha),
            };
            let est = laplace_rhs_beta1_mc(&grid.0, alpha, sampler, reps, SeedSpec::new(seed, 0), workers)?;
            let rows: Vec<Vec<String>> = est
                .iter()
                .map(|e| vec![fmt(e.u), fmt(e.mean), fmt(e.se), fmt(e.corrected_lower)])
                .collect();
            (
                table("eval-laplace", &r.record, &["u", "value", "se", "corrected_lower"], &rows),
                out.map(|p| p.display().to_string()),
            )
        }
    };
    emit(text.1.as_deref().map(Path::new), &text.0)?;
    Ok(0)
}

fn parse_grid(r: &mut Resolver, flag: Option<String>) -> anyhow::Result<Grid> {
    let grid: Grid = match flag {
        Some(s) => s.parse().map_err(|e| usage(format!("u-grid: {e}")))?,
        None => DEFAULT_U_GRID.parse().expect("default grid parses"),
    };
    let grid = r.require("u_grid", Some(grid), None)?;
    if let Some(u) = grid.0.iter().find(|u| !(**u >= 0.0)) {
        return Err(usage(format!("u-grid entries must be nonnegative, got {u}")));
    }
    Ok(grid)
}

pub struct CompareArgs {
    pub left: Option<PathBuf>,
    pub right: Option<PathBuf>,
    pub test: Option<String>,
    pub p_threshold: Option<f64>,
    pub se_multiplier: Option<f64>,
    pub slack: Option<f64>,
    pub u_grid: Option<String>,
    pub n_bootstrap: Option<usize>,
    pub level: Option<f64>,
    pub mc_reps: Option<usize>,
    pub log_scale: bool,
    pub max_distance: Option<f64>,
    pub dat: Option<PathBuf>,
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    command: &'static str,
    config: &'a BTreeMap<String, String>,
    left: &'a BTreeMap<String, String>,
    right: Option<&'a BTreeMap<String, String>>,
    reports: &'a [ComparisonReport],
    passed: bool,
}

fn param_f64(f: &SampleFile, key: &str) -> anyhow::Result<f64> {
    let raw = f.params.get(key).with_context(|| format!("sample file lacks `{key}`"))?;
    raw.parse().with_context(|| format!("sample file `{key}`: bad value `{raw}`"))
}

fn check_compatible(a: &SampleFile, b: &SampleFile) -> anyhow::Result<()> {
    for key in ["alpha", "beta"] {
        let (x, y) = (param_f64(a, key)?, param_f64(b, key)?);
        if x != y {
            return Err(usage(format!("parameter mismatch: {key} = {x} in the left file, {y} in the right file")));
        }
    }
    Ok(())
}

fn ecdf(xs: &[f64]) -> Vec<(f64, f64)> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().map(|(i, &x)| (x, (i + 1) as f64 / n)).collect()
}

fn write_dat(dir: Option<&Path>, name: &str, pts: &[(f64, f64)]) -> anyhow::Result<()> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        let p = d.join(name);
        std::fs::write(&p, dat(pts)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn compare(c: &Common, a: CompareArgs) -> anyhow::Result<u8> {
    let mut r = resolver(c)?;
    let left_path = r.require("left", a.left.map(|p| p.display().to_string()), None)?;
    let right_path = r.get("right", a.right.map(|p| p.display().to_string()), None)?;
    let default_test = if right_path.is_some() { "ks" } else { "moment" };
    let test = r.require("test", a.test, Some(default_test.to_string()))?;
    let seed = r.require("seed", c.seed, Some(0))?;
    let workers = r.get_quiet("workers", c.workers, Some(0))?.unwrap_or(0);
    let out = r.get_quiet("out", c.out.as_ref().map(|p| p.display().to_string()), None)?;
    let dat_dir = r.get_quiet("dat", a.dat.map(|p| p.display().to_string()), None)?.map(PathBuf::from);

    let left = SampleFile::read(Path::new(&left_path))?;
    let right = match &right_path {
        Some(p) => Some(SampleFile::read(Path::new(p))?),
        None => None,
    };
    if let Some(rf) = &right {
        check_compatible(&left, rf)?;
    }
    let alpha = param_f64(&left, "alpha")?;
    let beta = param_f64(&left, "beta")?;
    let x = left.column("value")?;
    let need_right = || right.as_ref().ok_or_else(|| usage(format!("test `{test}` needs --right")));

    let report = match test.as_str() {
        "ks" => {
            let p = r.require("p_threshold", a.p_threshold, Some(0.01))?;
            r.finish()?;
            let y = need_right()?.column("value")?;
            write_dat(dat_dir.as_deref(), "left_cdf.dat", &ecdf(&x))?;
            write_dat(dat_dir.as_deref(), "right_cdf.dat", &ecdf(&y))?;
            ks_report("ks", &x, &y, p)?
        }
        "moment" => {
            if beta != 2.0 {
                return Err(usage("the moment target is known for beta = 2 only"));
            }
            let k = r.require("se_multiplier", a.se_multiplier, Some(3.0))?;
            let default_slack = if left.params.get("generator").map(String::as_str) == Some("matrix") { 0.1 } else { 0.0 };
            let slack = r.require("slack", a.slack, Some(default_slack))?;
            r.finish()?;
            let target = heat_kernel_mean(alpha);
            moment_check_with_slack(&x, target, k, slack * target)?
        }
        "laplace-beta2" => {
            if beta != 2.0 {
                return Err(usage("laplace-beta2 needs a beta = 2 sample"));
            }
            let grid = parse_grid(&mut r, a.u_grid)?;
            let nb = r.require("n_bootstrap", a.n_bootstrap, Some(1000))?;
            let level = r.require("level", a.level, Some(0.99))?;
            r.finish()?;
            let band = empirical_laplace(&x, &grid.0, nb, level, SeedSpec::new(seed, 0), workers)?;
            let mut rep = ComparisonReport::new("laplace_beta2", 0.0, None, true);
            let mut exact_curve = Vec::new();
            for p in &band {
                let exact = laplace_rhs_beta2_with_order(p.u, alpha, LAPLACE_ORDER)?;
                exact_curve.push((p.u, exact));
                let inside = p.lower <= exact && exact <= p.upper;
                rep.passed &= inside;
                let half = 0.5 * (p.upper - p.lower);
                if half > 0.0 {
                    rep.statistic = rep.statistic.max((exact - p.mean).abs() / half);
                }
                rep = rep
                    .with_value(&format!("u={}:empirical", p.u), p.mean)
                    .with_value(&format!("u={}:lower", p.u), p.lower)
                    .with_value(&format!("u={}:upper", p.u), p.upper)
                    .with_value(&format!("u={}:fredholm", p.u), exact);
            }
            write_dat(dat_dir.as_deref(), "empirical.dat", &band.iter().map(|p| (p.u, p.mean)).collect::<Vec<_>>())?;
            write_dat(dat_dir.as_deref(), "fredholm.dat", &exact_curve)?;
            rep
        }
        "laplace-beta1" => {
            if beta != 1.0 {
                return Err(usage("laplace-beta1 needs a beta = 1 sample"));
            }
            let grid = parse_grid(&mut r, a.u_grid)?;
            let mc_reps = r.require("mc_reps", a.mc_reps, Some(x.len().max(1)))?;
            let level = r.require("level", a.level, Some(0.99))?;
            let n_sim = r.require("n_sim", c.n_sim, Some(param_f64(&left, "n_sim").unwrap_or(4000.0) as usize))?;
            r.finish()?;
            let sampler = AirySamplerParams {
                n_sim,
                truncation: Truncation::default_for(alpha),
            };
            let mc = laplace_rhs_beta1_mc(&grid.0, alpha, sampler, mc_reps, SeedSpec::new(seed, 0), workers)?;
            let emp: Vec<(f64, f64)> = grid
                .0
                .iter()
                .map(|&u| {
                    let col: Vec<f64> = x.iter().map(|v| (-u * v).exp()).collect();
                    (u, mean_and_se(&col).map(|m| m.0).unwrap_or(f64::NAN))
                })
                .collect();
            write_dat(dat_dir.as_deref(), "empirical.dat", &emp)?;
            write_dat(dat_dir.as_deref(), "airy1.dat", &mc.iter().map(|e| (e.u, e.mean)).collect::<Vec<_>>())?;
            laplace_beta1_report(&x, &mc, level)?
        }
        "tw2" => {
            let max_d = r.require("max_distance", a.max_distance, Some(0.05))?;
            let log_scale = r.require("log_scale", Some(a.log_scale), None)?;
            r.finish()?;
            let vals: Vec<f64> = if log_scale { x.iter().map(|v| v.ln() / alpha).collect() } else { x.clone() };
            let tw = |s: f64| -> kpzlab::Result<f64> {
                // F₂ is 0 / 1 to double precision outside its tabulated range
                if s < -10.0 {
                    Ok(0.0)
                } else if s > 6.0 {
                    Ok(1.0)
                } else {
                    tracy_widom_f2_with_order(s, TW_ORDER)
                }
            };
            let ks = ks_against_cdf(&vals, tw)?;
            let curve = ecdf(&vals);
            write_dat(dat_dir.as_deref(), "empirical_cdf.dat", &curve)?;
            let f2: Vec<(f64, f64)> = (0..=140)
                .map(|i| {
                    let s = -8.0 + 0.1 * i as f64;
                    Ok((s, tw(s)?))
                })
                .collect::<kpzlab::Result<_>>()?;
            write_dat(dat_dir.as_deref(), "f2.dat", &f2)?;
            ComparisonReport::new("tw2_distance", ks.d, Some(ks.p), ks.d <= max_d).with_value("max_distance", max_d)
        }
        other => {
            return Err(usage(format!(
                "unknown test `{other}`; expected ks, moment, laplace-beta2, laplace-beta1 or tw2"
            )))
        }
    };
    let reports = vec![report];
    let passed = reports.iter().all(|r| r.passed);
    let body = CompareOutput {
        command: "compare",
        config: &r.record,
        left: &left.params,
        right: right.as_ref().map(|f| &f.params),
        reports: &reports,
        passed,
    };
    let mut text = serde_json::to_string_pretty(&body)?;
    text.push('\n');
    emit(out.as_deref().map(Path::new), &text)?;
    Ok(if passed { 0 } else { 3 })
}

pub fn tw2(
    c: &Common,
    s_min: Option<f64>,
    s_max: Option<f64>,
    points: Option<usize>,
    order: Option<usize>,
    moments: bool,
) -> anyhow::Result<u8> {
    let mut r = resolver(c)?;
    let lo = r.require("s_min", s_min, Some(-8.0))?;
    let hi = r.require("s_max", s_max, Some(6.0))?;
    let points = r.require("points", points, Some(141))?;
    let order = r.require("order", order, Some(TW_ORDER))?;
    let moments = r.require("moments", Some(moments), None)?;
    let out = r.get_quiet("out", c.out.as_ref().map(|p| p.display().to_string()), None)?;
    r.finish()?;
    if !(lo < hi) || points < 2 {
        return Err(usage("need s-min < s-max and at least two points"));
    }
    let rows = (0..points)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            Ok(vec![fmt(s), fmt(tracy_widom_f2_with_order(s, order)?)])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut record = r.record.clone();
    if moments {
        let (m, v) = tracy_widom_f2_moments(32, 16, order)?;
        record.insert("mean".into(), fmt(m));
        record.insert("variance".into(), fmt(v));
    }
    emit(out.as_deref().map(Path::new), &table("tw2", &record, &["s", "f2"], &rows))?;
    Ok(0)
}
