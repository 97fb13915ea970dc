//! `heightlab` — heights, Betti coordinates, monodromy, torsion counts, and
//! the cached experiment suite, from the command line.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;

use heightlab_cli::config::{parse_rat, DiscSpec, ExperimentConfig};
use heightlab_cli::experiments;
use heightlab_cli::report::ExperimentReport;
use heightlab_core::betti::{
    betti_of_section, circle_loop, continue_basis, degeneracy_rank, elliptic_log, fiber_curve,
    frame_at, monodromy, section_at_complex,
};
use heightlab_core::canonical::{canonical_height_k, canonical_height_q};
use heightlab_core::family::WeierstrassFamily;
use heightlab_core::heights::{base_height, fiber_naive_height, naive_total_height};
use heightlab_core::lattice::{
    count_lattice_points, torsion_specialization_count, volume_growth, SmoothMap,
};

fn parse_c64(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => re
            .trim()
            .parse::<f64>()
            .map(|r| Complex64::new(r, 0.0))
            .map_err(|e| e.to_string()),
        [re, im] => {
            let r: f64 = re.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
            let i: f64 = im.trim().parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
            Ok(Complex64::new(r, i))
        }
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

fn parse_disc(s: &str) -> Result<DiscSpec, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected `cx,cy,r`, got {s:?}"));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| e.to_string())?;
    if !(nums[2] > 0.0) {
        return Err("disc radius must be positive".to_string());
    }
    Ok(DiscSpec {
        center_re: nums[0],
        center_im: nums[1],
        radius: nums[2],
    })
}

#[derive(Parser)]
#[command(
    name = "heightlab",
    version,
    about = "Heights, Betti coordinates, and torsion counting on elliptic pencils over the λ-line"
)]
struct Cli {
    /// JSON experiment configuration (defaults are built in).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports (overrides the config's cache_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 means one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact naive heights of the configured section at one base point.
    Heights {
        /// Base point λ as `p` or `p/q`.
        #[arg(long)]
        lambda: String,
    },
    /// Canonical heights: the fiberwise Tate ladder at λ, and the exact
    /// height of the section over ℚ(λ).
    Canonical {
        /// Base point λ as `p` or `p/q`.
        #[arg(long)]
        lambda: String,
        /// Tail bound for the Tate ladder.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Betti coordinates of the section at a complex base point.
    Betti {
        /// Base point as `re,im`.
        #[arg(long, value_parser = parse_c64, default_value = "0.31,0.17")]
        lambda: Complex64,
    },
    /// Integer monodromy matrices around the finite singular fibers.
    Monodromy {
        /// Loop radius around each singular value.
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
        /// Polygonal segments per loop.
        #[arg(long, default_value_t = 96)]
        segments: usize,
    },
    /// Rank of the Betti map of the section at a complex base point.
    Degeneracy {
        /// Base point as `re,im`.
        #[arg(long, value_parser = parse_c64, default_value = "0.31,0.17")]
        lambda: Complex64,
    },
    /// Count fibers in a disc where the section becomes N-torsion.
    CountTorsion {
        /// Torsion level N.
        #[arg(long = "N", default_value_t = 10)]
        n: i64,
        /// Disc `cx,cy,r`; defaults to the config's torsion disc.
        #[arg(long, value_parser = parse_disc)]
        disc: Option<DiscSpec>,
        /// Seed grid points per axis (0 = automatic).
        #[arg(long, default_value_t = 0)]
        grid: usize,
    },
    /// Certified count of solutions of N·φ₁(z) − φ₂(z) ∈ ℤ² on a box.
    LatticeCount {
        /// Level N.
        #[arg(long = "N", default_value_t = 10.0)]
        n: f64,
        /// Base level N₀ (counts are reported for N/N₀ scaling).
        #[arg(long = "N0", default_value_t = 1)]
        n0: u32,
        /// Disc `cx,cy,r` for the betti map mode.
        #[arg(long, value_parser = parse_disc)]
        disc: Option<DiscSpec>,
        /// Seed grid points per axis (0 = automatic).
        #[arg(long, default_value_t = 0)]
        grid: usize,
        /// Certification tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Map pair: `identity`, `doubling`, or `betti`.
        #[arg(long, default_value = "identity")]
        mode: String,
        /// Write a CSV row to this file (header added when new).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Height inequality: running sup of h_naive/(1+ĥ) must plateau.
    VerifyInequality,
    /// Degree growth of naive heights under repeated duplication.
    DegreeGrowth,
    /// Silverman limit of ĥ(P_λ)/h(λ) along a base-height-increasing sequence.
    SilvermanLimit,
    /// Run every configured experiment, reusing cached reports.
    RunAll,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.cache_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn print_report(r: &ExperimentReport) {
    println!("experiment: {}", r.kind.as_str());
    println!("headline constant: {:.10}", r.headline_constant);
    println!("samples: {}", r.samples.len());
    for note in &r.notes {
        println!("note: {note}");
    }
    for row in r.convergence_table.iter().take(12) {
        println!("  {:>14}  x = {:<12.6} y = {:.8}", row.label, row.x, row.y);
    }
    if r.convergence_table.len() > 12 {
        println!("  … {} more rows", r.convergence_table.len() - 12);
    }
}

fn persist_single(cfg: &ExperimentConfig, r: &ExperimentReport) -> Result<()> {
    let (json, csv) = r.persist(&cfg.cache_dir)?;
    println!("wrote {}", json.display());
    println!("wrote {}", csv.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .ok();
    }
    let family = cfg.family.build()?;
    let section = cfg
        .sections
        .first()
        .ok_or_else(|| anyhow!("config has no sections"))?
        .build(&family)?;

    match &cli.cmd {
        Cmd::Heights { lambda } => {
            let l = parse_rat(lambda)?;
            let p = family
                .specialize(&section, &l)
                .map_err(|e| anyhow!("specialization failed: {e}"))?;
            let hb = base_height(&family, &l).map_err(|e| anyhow!("{e}"))?;
            let hf = fiber_naive_height(p.fiber_x());
            let hn = naive_total_height(&family, p.fiber_x(), &l).map_err(|e| anyhow!("{e}"))?;
            println!("lambda: {lambda}");
            match p.fiber_x() {
                Some(x) => println!("section value x: {x}"),
                None => println!("section value: zero of the group"),
            }
            println!("h_base:        {hb:.12}");
            println!("h_fiber_naive: {hf:.12}");
            println!("h_naive_total: {hn:.12}");
        }
        Cmd::Canonical { lambda, tol } => {
            let l = parse_rat(lambda)?;
            let p = family
                .specialize(&section, &l)
                .map_err(|e| anyhow!("specialization failed: {e}"))?;
            let nt = canonical_height_q(&family, &p, *tol).map_err(|e| anyhow!("{e}"))?;
            println!("lambda: {lambda}");
            println!(
                "canonical height (fiberwise): {:.12}  (tail ≤ {:.3e}, {} doublings)",
                nt.value, nt.tail_bound, nt.iterations
            );
            match canonical_height_k(&family, &section, 6) {
                Ok(hk) => println!(
                    "canonical height over ℚ(λ): {} ({})",
                    hk.value,
                    if hk.exact { "exact" } else { "estimate" }
                ),
                Err(e) => println!("canonical height over ℚ(λ): unavailable ({e})"),
            }
        }
        Cmd::Betti { lambda } => {
            let frame = frame_at(&family, *lambda).map_err(|e| anyhow!("{e}"))?;
            let b = betti_of_section(&family, &frame.basis, &section, *lambda)
                .map_err(|e| anyhow!("{e}"))?;
            println!("lambda: {} + {}i", lambda.re, lambda.im);
            println!("betti coordinates: ({:.10}, {:.10})", b.coords[0], b.coords[1]);
            println!("certified error: {:.3e}", b.error);
            println!(
                "periods: ω₁ = {:.8} + {:.8}i, ω₂ = {:.8} + {:.8}i",
                frame.basis.omega1.re,
                frame.basis.omega1.im,
                frame.basis.omega2.re,
                frame.basis.omega2.im
            );
        }
        Cmd::Monodromy { radius, segments } => {
            let singular = family.singular_values();
            if singular.finite.is_empty() {
                println!("no finite singular values: monodromy is trivial");
            }
            for ball in &singular.finite {
                let loop_path = circle_loop(ball.center, *radius, *segments);
                match monodromy(&family, &loop_path) {
                    Ok(m) => {
                        println!(
                            "singular value ≈ {:.6} + {:.6}i:",
                            ball.center.re, ball.center.im
                        );
                        println!(
                            "  [[{}, {}], [{}, {}]]  det = {}  unipotent = {}  residual = {:.3e}",
                            m.entries[0][0],
                            m.entries[0][1],
                            m.entries[1][0],
                            m.entries[1][1],
                            m.det(),
                            m.is_unipotent(),
                            m.residual
                        );
                    }
                    Err(e) => println!(
                        "singular value ≈ {:.6} + {:.6}i: loop failed ({e})",
                        ball.center.re, ball.center.im
                    ),
                }
            }
        }
        Cmd::Degeneracy { lambda } => {
            let rep = degeneracy_rank(&family, &section, *lambda).map_err(|e| anyhow!("{e}"))?;
            println!("lambda: {} + {}i", lambda.re, lambda.im);
            println!("betti map rank: {}", rep.rank);
            println!(
                "singular values: {:.6e}, {:.6e}  (step {:.2e})",
                rep.singular_values[0], rep.singular_values[1], rep.step
            );
            println!(
                "verdict: {}",
                match rep.rank {
                    2 => "non-degenerate (locally open Betti image)",
                    0 => "degenerate everywhere (torsion-like section)",
                    _ => "degenerate direction present",
                }
            );
        }
        Cmd::CountTorsion { n, disc, grid } => {
            let d = disc.clone().unwrap_or_else(|| cfg.torsion_disc.clone());
            let center = Complex64::new(d.center_re, d.center_im);
            let rep = torsion_specialization_count(&family, &section, center, d.radius, *n, *grid)
                .map_err(|e| anyhow!("{e}"))?;
            println!(
                "disc: center {} + {}i, radius {}",
                d.center_re, d.center_im, d.radius
            );
            println!("torsion level N = {}: {} specializations", rep.n, rep.count);
            for hit in &rep.points {
                println!(
                    "  λ* ≈ {:.10} + {:.10}i   q = ({}, {})   residual {:.2e}",
                    hit.lambda.re, hit.lambda.im, hit.q[0], hit.q[1], hit.residual
                );
            }
            for w in &rep.warnings {
                println!("warning: {w}");
            }
        }
        Cmd::LatticeCount {
            n,
            n0,
            disc,
            grid,
            tol,
            mode,
            csv,
        } => {
            let started = Instant::now();
            let (phi1, phi2) = build_lattice_maps(&family, &cfg, mode, disc)?;
            let report =
                count_lattice_points(&phi1, &phi2, *n, *n0, *grid, *tol).map_err(|e| anyhow!("{e}"))?;
            let vol = volume_growth(&phi1, &phi2, *n, 20_000, cfg.seed).map_err(|e| anyhow!("{e}"))?;
            let wall_ms = started.elapsed().as_millis();
            let nn = (*n / *n0 as f64).powi(2);
            let (c_lower, c_upper) = density_band(report.count, nn, vol.value, vol.std_error);
            println!("mode: {mode}");
            println!("N = {n}, N0 = {n0}: count = {}", report.count);
            println!(
                "volume estimate: {:.6} ± {:.6} ({} samples)",
                vol.value, vol.std_error, vol.samples
            );
            println!("density band: [{c_lower:.6}, {c_upper:.6}]");
            println!("wall time: {wall_ms} ms");
            for w in &report.warnings {
                println!("warning: {w}");
            }
            if let Some(path) = csv {
                let header = "N,N0,count,volume_estimate,c_lower,c_upper,wall_time_ms";
                let mut text = String::new();
                let fresh = !path.exists();
                if fresh {
                    text.push_str(header);
                    text.push('\n');
                }
                text.push_str(&format!(
                    "{n},{n0},{},{:.9},{c_lower:.9},{c_upper:.9},{wall_ms}\n",
                    report.count, vol.value
                ));
                let mut existing = if fresh {
                    String::new()
                } else {
                    std::fs::read_to_string(path)
                        .with_context(|| format!("cannot read {}", path.display()))?
                };
                existing.push_str(&text);
                std::fs::write(path, existing)
                    .with_context(|| format!("cannot write {}", path.display()))?;
                println!("appended to {}", path.display());
            }
        }
        Cmd::VerifyInequality => {
            let r = experiments::verify_inequality(&cfg)?;
            print_report(&r);
            persist_single(&cfg, &r)?;
        }
        Cmd::DegreeGrowth => {
            let r = experiments::degree_growth(&cfg)?;
            print_report(&r);
            persist_single(&cfg, &r)?;
        }
        Cmd::SilvermanLimit => {
            let r = experiments::silverman_limit(&cfg)?;
            print_report(&r);
            persist_single(&cfg, &r)?;
        }
        Cmd::RunAll => {
            let outcomes = experiments::run_all(&cfg)?;
            if outcomes.is_empty() {
                println!("no experiments configured; nothing to do");
            }
            for o in &outcomes {
                println!(
                    "{}: headline {:.10} ({}) → {}",
                    o.kind.as_str(),
                    o.report.headline_constant,
                    if o.cache_hit { "cached" } else { "computed" },
                    o.json_path.display()
                );
            }
        }
    }
    Ok(())
}

/// Density band count/(N/N₀)² normalized by a Monte-Carlo volume with a
/// 2σ buffer.
fn density_band(count: usize, nn: f64, vol: f64, sigma: f64) -> (f64, f64) {
    let hi_vol = vol + 2.0 * sigma;
    let lo_vol = (vol - 2.0 * sigma).max(1e-12);
    if vol <= 0.0 {
        let c = count as f64 / nn;
        return (c, c);
    }
    (count as f64 / (nn * hi_vol), count as f64 / (nn * lo_vol))
}

/// The three bundled map pairs for `lattice-count`.
fn build_lattice_maps(
    family: &WeierstrassFamily,
    cfg: &ExperimentConfig,
    mode: &str,
    disc: &Option<DiscSpec>,
) -> Result<(SmoothMap, SmoothMap)> {
    match mode {
        "identity" => Ok((
            SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 1.0, |z| vec![z[0], z[1]]),
            SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 1.0, |z| vec![z[0], z[1]]),
        )),
        "doubling" => Ok((
            SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 2.0, |z| {
                vec![2.0 * z[0], 2.0 * z[1]]
            }),
            SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 1.0, |z| vec![z[0], z[1]]),
        )),
        "betti" => {
            let d = disc.clone().unwrap_or_else(|| cfg.torsion_disc.clone());
            let center = Complex64::new(d.center_re, d.center_im);
            let anchor = frame_at(family, center).map_err(|e| anyhow!("{e}"))?;
            let side = d.radius / std::f64::consts::SQRT_2;
            let box2 = vec![
                (d.center_re - side, d.center_re + side),
                (d.center_im - side, d.center_im + side),
            ];
            let fam1 = family.clone();
            let sec1 = cfg
                .sections
                .first()
                .ok_or_else(|| anyhow!("config has no sections"))?
                .build(family)?;
            let basis0 = anchor.basis;
            // Unwrapped Betti coordinates in the frame continued from the
            // disc center.  |Db| stays modest on discs clear of the
            // singular locus; 64 is a generous Lipschitz bound for the
            // bundled disc.
            let eval = move |z: &[f64]| -> Vec<f64> {
                let lambda = Complex64::new(z[0], z[1]);
                let basis = continue_basis(&fam1, &basis0, &[center, lambda]);
                let basis = match basis {
                    Ok(b) => b,
                    Err(_) => return vec![f64::NAN, f64::NAN],
                };
                let curve = match fiber_curve(&fam1, lambda) {
                    Ok(c) => c,
                    Err(_) => return vec![f64::NAN, f64::NAN],
                };
                let p = match section_at_complex(&fam1, &sec1, lambda) {
                    Ok(p) => p,
                    Err(_) => return vec![f64::NAN, f64::NAN],
                };
                let zlog = match elliptic_log(&curve, &p) {
                    Ok(z) => z,
                    Err(_) => return vec![f64::NAN, f64::NAN],
                };
                let (a, b) = basis.coords(zlog.center);
                vec![a, b]
            };
            let phi1 = SmoothMap::new(box2.clone(), 64.0, eval);
            let phi2 = SmoothMap::new(box2, 0.0, |_z| vec![0.0, 0.0]);
            Ok((phi1, phi2))
        }
        other => bail!("unknown lattice-count mode {other:?} (use identity, doubling, or betti)"),
    }
}
