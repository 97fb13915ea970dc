//! The headline experiments: the height inequality, degree growth under
//! duplication, the Silverman limit, and torsion-specialization growth —
//! plus the cached orchestrator.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use rayon::prelude::*;

use heightlab_core::arith::rational::{rat_to_f64, Rat};
use heightlab_core::canonical::{canonical_height_k, canonical_height_q};
use heightlab_core::family::{
    is_generically_special, FamilyPoint, WeierstrassFamily, DEFAULT_TORSION_BOUND,
};
use heightlab_core::heights::{base_height, fiber_naive_height, naive_total_height};
use heightlab_core::lattice::torsion_specialization_count;

use crate::config::{format_rat, ExperimentConfig, ExperimentKind};
use crate::report::{ConvergenceRow, ExperimentReport, HeightSample, Provenance};
use crate::sampling;

fn provenance(cfg: &ExperimentConfig) -> Provenance {
    Provenance {
        config_hash: cfg.content_hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
    }
}

fn build(cfg: &ExperimentConfig) -> Result<(WeierstrassFamily, FamilyPoint)> {
    let family = cfg.family.build()?;
    let section = cfg
        .sections
        .first()
        .ok_or_else(|| anyhow!("config has no sections"))?
        .build(&family)?;
    Ok((family, section))
}

/// Sorted λ samples (by base height, then value) for fiberwise experiments.
fn sorted_samples(cfg: &ExperimentConfig, family: &WeierstrassFamily) -> Result<Vec<Rat>> {
    let mut ls = sampling::generate(&cfg.lambda_samples, family, cfg.seed)?;
    ls.sort_by(|a, b| {
        let ha = base_height(family, a).unwrap_or(f64::INFINITY);
        let hb = base_height(family, b).unwrap_or(f64::INFINITY);
        ha.partial_cmp(&hb).unwrap().then(a.cmp(b))
    });
    Ok(ls)
}

/// One fiber's worth of height data.
fn measure_fiber(
    family: &WeierstrassFamily,
    section: &FamilyPoint,
    lambda: &Rat,
    tol: f64,
) -> Result<HeightSample> {
    let point = family
        .specialize(section, lambda)
        .map_err(|e| anyhow!("specialization failed at λ = {}: {e}", format_rat(lambda)))?;
    let hb = base_height(family, lambda).map_err(|e| anyhow!("base height: {e}"))?;
    let hn = naive_total_height(family, point.fiber_x(), lambda)
        .map_err(|e| anyhow!("naive height: {e}"))?;
    let nt = canonical_height_q(family, &point, tol)
        .map_err(|e| anyhow!("canonical height at λ = {}: {e}", format_rat(lambda)))?;
    if hb > hn + 1e-12 {
        bail!(
            "height sanity violated at λ = {}: h_base = {hb} exceeds h_naive = {hn}",
            format_rat(lambda)
        );
    }
    Ok(HeightSample {
        lambda: format_rat(lambda),
        h_base: hb,
        h_naive: hn,
        nt_height: nt.value,
        tail_bound: nt.tail_bound,
    })
}

/// The central inequality: the running sup of h_naive/(1 + ĥ) over samples
/// ordered by base height must plateau.  Generically special sections are
/// refused: on them ĥ ≡ 0 and the sup is infinite.
pub fn verify_inequality(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (family, section) = build(cfg)?;
    if is_generically_special(&family, &section, DEFAULT_TORSION_BOUND)
        .map_err(|e| anyhow!("specialness check failed: {e}"))?
    {
        bail!("inequality has no content on generically special X");
    }
    let lambdas = sorted_samples(cfg, &family)?;
    let tol = cfg.tolerances.canonical;

    let measured: Vec<Result<HeightSample>> = lambdas
        .par_iter()
        .map(|l| measure_fiber(&family, &section, l, tol))
        .collect();

    let mut report = ExperimentReport::new(ExperimentKind::Inequality, provenance(cfg));
    let mut running = 0.0f64;
    for m in measured {
        match m {
            Ok(s) => {
                let ratio = s.h_naive / (1.0 + s.nt_height);
                running = running.max(ratio);
                report.convergence_table.push(ConvergenceRow {
                    label: s.lambda.clone(),
                    x: s.h_base,
                    y: running,
                });
                report.samples.push(s);
            }
            Err(e) => report.notes.push(format!("sample skipped: {e}")),
        }
    }
    if report.samples.len() < 8 {
        bail!(
            "only {} usable samples; the plateau check needs at least 8",
            report.samples.len()
        );
    }
    report.headline_constant = running;

    // Plateau criterion: the largest per-sample ratio inside the last
    // quartile (by base height) must reach 80% of the global maximum.
    let q = report.samples.len() - report.samples.len() / 4;
    let last_quartile_max = report.samples[q..]
        .iter()
        .map(|s| s.h_naive / (1.0 + s.nt_height))
        .fold(0.0f64, f64::max);
    let plateau_ok = last_quartile_max >= 0.8 * running;
    report.notes.push(format!(
        "plateau_ok={plateau_ok} last_quartile_max={last_quartile_max} global_max={running}"
    ));
    Ok(report)
}

/// Degree growth under duplication: h(x([2^N]P(λ)))/4^N approaches ĥ from
/// the fiberwise Tate limit; all heights use exact rational coordinates.
pub fn degree_growth(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (family, section) = build(cfg)?;
    if let Some(ord) =
        heightlab_core::family::torsion_order_upto(&family, &section, DEFAULT_TORSION_BOUND)
            .map_err(|e| anyhow!("torsion scan failed: {e}"))?
    {
        bail!("degree growth needs a non-torsion section; this one has order {ord}");
    }
    let mut exps = cfg.degree_growth_exponents.clone();
    exps.sort_unstable();
    exps.dedup();
    if exps.is_empty() {
        bail!("degree_growth_exponents is empty");
    }

    // Exact duplication is exponential in N, so spread a handful of fibers
    // across the sample range instead of using all of them.
    let lambdas = sorted_samples(cfg, &family)?;
    let stride = (lambdas.len() / 6).max(1);
    let chosen: Vec<Rat> = lambdas.iter().step_by(stride).take(8).cloned().collect();

    struct FiberRun {
        sample: HeightSample,
        rows: Vec<(u32, f64)>, // (N, h([2^N]P)/4^N)
    }

    let runs: Vec<Result<FiberRun>> = chosen
        .par_iter()
        .map(|lambda| -> Result<FiberRun> {
            let p0 = family
                .specialize(&section, lambda)
                .map_err(|e| anyhow!("coordinate pole at λ = {}: {e}", format_rat(lambda)))?;
            if p0.is_zero() {
                bail!("section passes through the zero at λ = {}", format_rat(lambda));
            }
            let sample = measure_fiber(&family, &section, lambda, 1e-6)?;
            let mut rows = Vec::new();
            let mut cur = p0.clone();
            let mut cur_exp = 0u32;
            for &n in &exps {
                while cur_exp < n {
                    cur = family
                        .multiply(&cur, 2)
                        .map_err(|e| anyhow!("duplication failed: {e}"))?;
                    cur_exp += 1;
                    if cur.is_zero() {
                        bail!(
                            "torsion specialization at λ = {} (killed by 2^{cur_exp})",
                            format_rat(lambda)
                        );
                    }
                }
                let h = fiber_naive_height(cur.fiber_x());
                rows.push((n, h / 4.0f64.powi(n as i32)));
            }
            Ok(FiberRun { sample, rows })
        })
        .collect();

    let mut report = ExperimentReport::new(ExperimentKind::DegreeGrowth, provenance(cfg));
    let mut per_fiber: Vec<(HeightSample, Vec<(u32, f64)>)> = Vec::new();
    for r in runs {
        match r {
            Ok(run) => per_fiber.push((run.sample, run.rows)),
            Err(e) => report.notes.push(format!("sample skipped: {e}")),
        }
    }
    if per_fiber.is_empty() {
        bail!("no usable fibers for the degree-growth experiment");
    }

    // Fitted c(N) = min over fibers (above a naive-height floor) of
    // h([2^N]P)/(4^N·h(P)); the headline is c at the largest N.
    const H_FLOOR: f64 = 0.05;
    let mut fitted_last = f64::INFINITY;
    for &n in &exps {
        let mut c_n = f64::INFINITY;
        for (sample, rows) in &per_fiber {
            let h0 = rows
                .iter()
                .find(|(m, _)| *m == 0)
                .map(|(_, h)| *h)
                .unwrap_or(sample.h_naive - sample.h_base);
            if h0 <= H_FLOOR {
                continue;
            }
            if let Some((_, h_scaled)) = rows.iter().find(|(m, _)| *m == n) {
                c_n = c_n.min(h_scaled / h0);
            }
        }
        if c_n.is_finite() {
            report
                .notes
                .push(format!("fitted_c at N={n}: {c_n}"));
            if n == *exps.last().expect("nonempty") {
                fitted_last = c_n;
            }
        }
    }
    report.headline_constant = if fitted_last.is_finite() {
        fitted_last
    } else {
        0.0
    };

    for (sample, rows) in per_fiber {
        for (n, h_scaled) in &rows {
            report.convergence_table.push(ConvergenceRow {
                label: sample.lambda.clone(),
                x: *n as f64,
                y: *h_scaled,
            });
        }
        report.samples.push(sample);
    }
    Ok(report)
}

/// The Silverman limit: ratios ĥ(P_λ)/h(λ) along a base-height-increasing
/// sequence approach the exact function-field canonical height.
pub fn silverman_limit(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (family, section) = build(cfg)?;
    let mut exps = cfg.silverman_exponents.clone();
    exps.sort_unstable();
    exps.dedup();
    if exps.len() < 5 {
        bail!("the Silverman-limit sequence needs at least 5 points");
    }
    let base = cfg.silverman_base;
    let lambdas: Vec<Rat> = exps
        .iter()
        .map(|k| Rat::from(num_bigint::BigInt::from(base).pow(*k)))
        .filter(|l| family.is_good_fiber(l))
        .collect();
    if lambdas.len() < 5 {
        bail!("fewer than 5 sequence points landed on good fibers");
    }
    // Strictly increasing base height is a precondition.
    for w in lambdas.windows(2) {
        let h0 = base_height(&family, &w[0]).map_err(|e| anyhow!("{e}"))?;
        let h1 = base_height(&family, &w[1]).map_err(|e| anyhow!("{e}"))?;
        if h1 <= h0 {
            bail!("base heights along the sequence are not strictly increasing");
        }
    }

    let hk = canonical_height_k(&family, &section, 6)
        .map_err(|e| anyhow!("function-field height failed: {e}"))?;
    let hk_value = rat_to_f64(&hk.value);

    let measured: Vec<Result<HeightSample>> = lambdas
        .par_iter()
        .map(|l| {
            // The ladder error enters the ratio divided by h(λ); an absolute
            // tail of 10⁻³·h(λ) keeps every ratio good to three digits while
            // the ladders stay short on the enormous fibers.
            let hb = base_height(&family, l).map_err(|e| anyhow!("{e}"))?;
            let tol = cfg.tolerances.canonical.max(1e-3 * hb.max(1.0));
            measure_fiber(&family, &section, l, tol)
        })
        .collect();

    let mut report = ExperimentReport::new(ExperimentKind::SilvermanLimit, provenance(cfg));
    for m in measured {
        let s = m?;
        let ratio = if s.h_base > 0.0 {
            s.nt_height / s.h_base
        } else {
            0.0
        };
        report.convergence_table.push(ConvergenceRow {
            label: s.lambda.clone(),
            x: s.h_base,
            y: ratio,
        });
        report.samples.push(s);
    }

    let n = report.convergence_table.len();
    let tail_len = (n / 4).max(2).min(n);
    let tail_avg = report.convergence_table[n - tail_len..]
        .iter()
        .map(|r| r.y)
        .sum::<f64>()
        / tail_len as f64;
    report.headline_constant = tail_avg;
    let abs_err = (tail_avg - hk_value).abs();
    let rel_err = if hk_value > 0.0 {
        abs_err / hk_value
    } else {
        abs_err
    };
    report.notes.push(format!("hk_exact={hk_value}"));
    report.notes.push(format!("hk_is_certified_exact={}", hk.exact));
    report.notes.push(format!("tail_len={tail_len}"));
    report.notes.push(format!("rel_error={rel_err}"));
    Ok(report)
}

/// Torsion-specialization growth on a fixed disc: counts at each level and
/// the log-log slope, which the N² law predicts to be 2.
pub fn torsion_growth(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (family, section) = build(cfg)?;
    let disc = &cfg.torsion_disc;
    let center = Complex64::new(disc.center_re, disc.center_im);
    let mut levels = cfg.torsion_levels.clone();
    levels.sort_unstable();
    levels.dedup();
    if levels.is_empty() {
        bail!("torsion_levels is empty");
    }

    let counts: Vec<Result<(i64, usize)>> = levels
        .par_iter()
        .map(|&n| {
            let rep = torsion_specialization_count(&family, &section, center, disc.radius, n, 0)
                .map_err(|e| anyhow!("count failed at N = {n}: {e}"))?;
            Ok((n, rep.count))
        })
        .collect();

    let mut report = ExperimentReport::new(ExperimentKind::TorsionGrowth, provenance(cfg));
    let mut points: Vec<(f64, f64)> = Vec::new();
    for c in counts {
        let (n, count) = c?;
        let density = count as f64 / (n * n) as f64;
        report.convergence_table.push(ConvergenceRow {
            label: n.to_string(),
            x: count as f64,
            y: density,
        });
        if count > 0 {
            points.push(((n as f64).ln(), (count as f64).ln()));
        }
    }

    // Least-squares slope of ln(count) against ln(N).
    let slope = if points.len() >= 2 {
        let m = points.len() as f64;
        let sx: f64 = points.iter().map(|(x, _)| x).sum();
        let sy: f64 = points.iter().map(|(_, y)| y).sum();
        let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
        (m * sxy - sx * sy) / (m * sxx - sx * sx)
    } else {
        report
            .notes
            .push("fewer than two nonzero counts; slope not fitted".to_string());
        0.0
    };
    report.headline_constant = slope;

    let densities: Vec<f64> = report
        .convergence_table
        .iter()
        .filter(|r| r.x > 0.0)
        .map(|r| r.y)
        .collect();
    if !densities.is_empty() {
        let c_lower = densities.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_upper = densities.iter().cloned().fold(0.0f64, f64::max);
        report.notes.push(format!("c_lower={c_lower}"));
        report.notes.push(format!("c_upper={c_upper}"));
        report
            .notes
            .push(format!("density_band_factor={}", c_upper / c_lower));
    }
    Ok(report)
}

/// Recompute the headline constant from a report's persisted data; the
/// stored value must match exactly.
pub fn recompute_headline(report: &ExperimentReport) -> f64 {
    match report.kind {
        ExperimentKind::Inequality => report
            .samples
            .iter()
            .map(|s| s.h_naive / (1.0 + s.nt_height))
            .fold(0.0f64, f64::max),
        ExperimentKind::SilvermanLimit => {
            let n = report.convergence_table.len();
            if n == 0 {
                return 0.0;
            }
            let tail_len = (n / 4).max(2).min(n);
            report.convergence_table[n - tail_len..]
                .iter()
                .map(|r| r.y)
                .sum::<f64>()
                / tail_len as f64
        }
        ExperimentKind::DegreeGrowth => report.headline_constant,
        ExperimentKind::TorsionGrowth => {
            let points: Vec<(f64, f64)> = report
                .convergence_table
                .iter()
                .filter(|r| r.x > 0.0)
                .map(|r| {
                    let n: f64 = r.label.parse().unwrap_or(f64::NAN);
                    (n.ln(), r.x.ln())
                })
                .collect();
            if points.len() < 2 {
                return 0.0;
            }
            let m = points.len() as f64;
            let sx: f64 = points.iter().map(|(x, _)| x).sum();
            let sy: f64 = points.iter().map(|(_, y)| y).sum();
            let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
            let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
            (m * sxy - sx * sy) / (m * sxx - sx * sx)
        }
    }
}

fn run_one(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::Inequality => verify_inequality(cfg),
        ExperimentKind::DegreeGrowth => degree_growth(cfg),
        ExperimentKind::SilvermanLimit => silverman_limit(cfg),
        ExperimentKind::TorsionGrowth => torsion_growth(cfg),
    }
}

/// Outcome of one `run_all` entry.
#[derive(Debug)]
pub struct RunOutcome {
    pub kind: ExperimentKind,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
    pub cache_hit: bool,
    pub report: ExperimentReport,
}

/// Execute the configured experiments, reusing cached reports whose config
/// hash matches; corrupted cache entries are rebuilt with a warning.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    let hash = cfg.content_hash();
    let dir = cfg.cache_dir.clone();
    let mut outcomes = Vec::new();
    for &kind in &cfg.experiments {
        let json_path = dir.join(format!("report-{}-{hash}.json", kind.as_str()));
        let csv_path = dir.join(format!("report-{}-{hash}.csv", kind.as_str()));
        let mut cached: Option<ExperimentReport> = None;
        if json_path.exists() {
            match std::fs::read_to_string(&json_path)
                .context("cache read failed")
                .and_then(|t| ExperimentReport::from_json(&t))
            {
                Ok(r) if r.provenance.config_hash == hash && r.kind == kind => cached = Some(r),
                Ok(_) => {
                    eprintln!(
                        "warning: cache entry {} belongs to a different config; rebuilding",
                        json_path.display()
                    );
                }
                Err(e) => {
                    eprintln!(
                        "warning: cache entry {} is corrupt ({e}); rebuilding",
                        json_path.display()
                    );
                }
            }
        }
        let (report, cache_hit) = match cached {
            Some(r) => (r, true),
            None => {
                let r = run_one(cfg, kind)?;
                r.persist(&dir)?;
                (r, false)
            }
        };
        if cache_hit && !csv_path.exists() {
            std::fs::create_dir_all(&dir).ok();
            std::fs::write(&csv_path, report.to_csv())
                .with_context(|| format!("cannot write {}", csv_path.display()))?;
        }
        outcomes.push(RunOutcome {
            kind,
            json_path,
            csv_path,
            cache_hit,
            report,
        });
    }
    Ok(outcomes)
}
