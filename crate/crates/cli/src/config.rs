//! Experiment configuration: family and section specifications, λ-sampling
//! rules, tolerances, and the content hash that keys the report cache.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use heightlab_core::arith::poly::Polynomial;
use heightlab_core::arith::ratfunc::RationalFunction;
use heightlab_core::arith::rational::Rat;
use heightlab_core::family::{FamilyPoint, WeierstrassFamily};

/// Parse an exact rational written as `p`, `p/q`, or a decimal-free string.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).with_context(|| format!("bad numerator in {t:?}"))?;
        let d = BigInt::from_str(den.trim()).with_context(|| format!("bad denominator in {t:?}"))?;
        if d == BigInt::from(0) {
            bail!("zero denominator in {t:?}");
        }
        Ok(Rat::new(n, d))
    } else {
        let n = BigInt::from_str(t).with_context(|| format!("bad integer in {t:?}"))?;
        Ok(Rat::from(n))
    }
}

/// Render a rational back to the `p/q` form used in configs and reports.
pub fn format_rat(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn poly_from_strs(coeffs: &[String]) -> Result<Polynomial> {
    let cs: Result<Vec<Rat>> = coeffs.iter().map(|s| parse_rat(s)).collect();
    Ok(Polynomial::new(cs?))
}

fn ratfunc_from_strs(num: &[String], den: &[String]) -> Result<RationalFunction> {
    let n = poly_from_strs(num)?;
    let d = if den.is_empty() {
        Polynomial::from_i64(&[1])
    } else {
        poly_from_strs(den)?
    };
    RationalFunction::new(n, d).map_err(|e| anyhow!("bad rational function: {e}"))
}

/// Which Weierstrass family the experiments run on.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// The Legendre pencil y² = x(x−1)(x−λ) in depressed form.
    Legendre,
    /// The bundled quartic pencil y² = x³ + λ⁴ − λ³.
    Quartic,
    /// The pencil y² = x³ − λx + λ: non-constant j, so the specialness
    /// test (and with it the inequality experiment) applies.
    Pivot,
    /// Arbitrary a₄(λ), a₆(λ) with ascending rational coefficients.
    Custom { a4: Vec<String>, a6: Vec<String> },
}

impl FamilySpec {
    pub fn build(&self) -> Result<WeierstrassFamily> {
        match self {
            FamilySpec::Legendre => Ok(WeierstrassFamily::legendre()),
            FamilySpec::Quartic => WeierstrassFamily::from_polys(
                "quartic",
                Polynomial::zero(),
                Polynomial::from_i64(&[0, 0, 0, -1, 1]),
            )
            .map_err(|e| anyhow!("quartic family construction failed: {e}")),
            FamilySpec::Pivot => WeierstrassFamily::from_polys(
                "pivot",
                Polynomial::from_i64(&[0, -1]),
                Polynomial::from_i64(&[0, 1]),
            )
            .map_err(|e| anyhow!("pivot family construction failed: {e}")),
            FamilySpec::Custom { a4, a6 } => WeierstrassFamily::from_polys(
                "custom",
                poly_from_strs(a4)?,
                poly_from_strs(a6)?,
            )
            .map_err(|e| anyhow!("custom family construction failed: {e}")),
        }
    }
}

/// A section of the family, as exact rational functions of λ.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionSpec {
    /// The zero section.
    Zero,
    /// The bundled non-torsion section (λ, λ²) of the quartic pencil.
    QuarticPoint,
    /// The constant non-torsion section (1, 1) of the pivot pencil.
    PivotPoint,
    /// The 2-torsion section x = −(λ+1)/3, y = 0 of the Legendre pencil.
    LegendreTwoTorsion,
    /// Arbitrary (x(λ), y(λ)); denominators default to 1 when empty.
    Custom {
        x_num: Vec<String>,
        #[serde(default)]
        x_den: Vec<String>,
        y_num: Vec<String>,
        #[serde(default)]
        y_den: Vec<String>,
    },
}

impl SectionSpec {
    pub fn build(&self, family: &WeierstrassFamily) -> Result<FamilyPoint> {
        match self {
            SectionSpec::Zero => Ok(FamilyPoint::zero_section()),
            SectionSpec::QuarticPoint => {
                let x = RationalFunction::from_poly(Polynomial::from_i64(&[0, 1]));
                let y = RationalFunction::from_poly(Polynomial::from_i64(&[0, 0, 1]));
                family
                    .section(x, y)
                    .map_err(|e| anyhow!("bundled section does not lie on this family: {e}"))
            }
            SectionSpec::PivotPoint => {
                let one = RationalFunction::from_poly(Polynomial::from_i64(&[1]));
                family
                    .section(one.clone(), one)
                    .map_err(|e| anyhow!("bundled section does not lie on this family: {e}"))
            }
            SectionSpec::LegendreTwoTorsion => {
                let x = RationalFunction::from_poly(poly_from_strs(&[
                    "-1/3".to_string(),
                    "-1/3".to_string(),
                ])?);
                family
                    .section(x, RationalFunction::zero())
                    .map_err(|e| anyhow!("2-torsion section does not lie on this family: {e}"))
            }
            SectionSpec::Custom {
                x_num,
                x_den,
                y_num,
                y_den,
            } => {
                let x = ratfunc_from_strs(x_num, x_den)?;
                let y = ratfunc_from_strs(y_num, y_den)?;
                family
                    .section(x, y)
                    .map_err(|e| anyhow!("custom section does not lie on this family: {e}"))
            }
        }
    }
}

/// How base points λ are drawn.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SamplingRule {
    /// An explicit list of rationals.
    List { values: Vec<String> },
    /// All Farey fractions p/q with max(|p|, q) ≤ max_height inside
    /// [lo, hi], in increasing order.
    Farey {
        max_height: u64,
        lo: String,
        hi: String,
    },
    /// Seeded random rationals with bounded numerator and denominator.
    Random {
        count: usize,
        num_bound: i64,
        den_bound: i64,
    },
}

impl Default for SamplingRule {
    fn default() -> Self {
        SamplingRule::Farey {
            max_height: 40,
            lo: "2".to_string(),
            hi: "40".to_string(),
        }
    }
}

/// Positive tolerances for the numeric pieces of each experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    /// Tate-ladder tail bound for ĥ over ℚ.
    pub canonical: f64,
    /// Betti-coordinate certification tolerance.
    pub betti: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            canonical: 1e-4,
            betti: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("canonical", self.canonical), ("betti", self.betti)] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("tolerance {name} must be positive and finite, got {v}");
            }
        }
        Ok(())
    }
}

/// Requested experiments, in execution order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Inequality,
    DegreeGrowth,
    SilvermanLimit,
    TorsionGrowth,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Inequality => "inequality",
            ExperimentKind::DegreeGrowth => "degree_growth",
            ExperimentKind::SilvermanLimit => "silverman_limit",
            ExperimentKind::TorsionGrowth => "torsion_growth",
        }
    }
}

/// Disc in the λ-plane for the torsion-growth experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiscSpec {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
}

impl Default for DiscSpec {
    fn default() -> Self {
        // A disc on which the bundled quartic section's Betti image is wide
        // enough to collect torsion fibers at moderate levels.
        DiscSpec {
            center_re: 1.8,
            center_im: 0.5,
            radius: 0.6,
        }
    }
}

/// Full experiment configuration.  The content hash of the serialized form
/// keys the report cache, so any change reruns the affected experiments.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub sections: Vec<SectionSpec>,
    pub lambda_samples: SamplingRule,
    pub tolerances: Tolerances,
    pub cache_dir: PathBuf,
    pub experiments: Vec<ExperimentKind>,
    pub seed: u64,
    pub threads: usize,
    /// Doubling exponents for the degree-growth experiment.
    pub degree_growth_exponents: Vec<u32>,
    /// λ = base^k sequence for the Silverman-limit experiment.
    pub silverman_exponents: Vec<u32>,
    pub silverman_base: i64,
    /// Torsion levels for the growth experiment.
    pub torsion_levels: Vec<i64>,
    pub torsion_disc: DiscSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: FamilySpec::Quartic,
            sections: vec![SectionSpec::QuarticPoint],
            lambda_samples: SamplingRule::default(),
            tolerances: Tolerances::default(),
            cache_dir: PathBuf::from("reports"),
            // The quartic pencil has constant j-invariant, so the
            // inequality experiment (which needs the specialness test)
            // is not in the default list; see the pivot config for it.
            experiments: vec![
                ExperimentKind::DegreeGrowth,
                ExperimentKind::SilvermanLimit,
                ExperimentKind::TorsionGrowth,
            ],
            seed: 7,
            threads: 0,
            degree_growth_exponents: vec![0, 1, 2, 3, 4, 5, 6],
            silverman_exponents: vec![2, 4, 6, 8, 10, 12, 13],
            silverman_base: 10,
            torsion_levels: vec![20, 30, 40, 60],
            torsion_disc: DiscSpec::default(),
        }
    }
}

impl ExperimentConfig {
    /// Preset for the inequality experiment: the pivot pencil (non-constant
    /// j-invariant) with its constant section and a ladder tail that is
    /// cheap but far below the plateau test's resolution.
    pub fn pivot_inequality() -> Self {
        ExperimentConfig {
            family: FamilySpec::Pivot,
            sections: vec![SectionSpec::PivotPoint],
            tolerances: Tolerances {
                canonical: 1e-3,
                betti: 1e-7,
            },
            experiments: vec![ExperimentKind::Inequality],
            ..ExperimentConfig::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("configuration JSON did not parse")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.sections.is_empty() {
            bail!("config needs at least one section");
        }
        if self.silverman_base.abs() < 2 {
            bail!("silverman_base must have absolute value at least 2");
        }
        if self.torsion_disc.radius <= 0.0 {
            bail!("torsion disc radius must be positive");
        }
        for n in &self.torsion_levels {
            if *n < 1 {
                bail!("torsion levels must be at least 1");
            }
        }
        // The family and the first section must actually build.
        let fam = self.family.build()?;
        for s in &self.sections {
            s.build(&fam)?;
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON serialization: the cache key.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(&bytes);
        let digest = h.finalize();
        let mut out = String::with_capacity(16);
        for b in digest.iter().take(8) {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}
