//! Report types and serialization: versioned JSON documents plus fixed
//! per-kind CSV tables, both deterministic for a fixed seed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentKind;

/// Schema identifier embedded in every report file.
pub const SCHEMA_ID: &str = "heightlab-report-v1";

/// One fiberwise height measurement.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HeightSample {
    /// Exact base point, as `p/q`.
    pub lambda: String,
    /// Weil height of [λ : 1] on the base, in nats.
    pub h_base: f64,
    /// Naive total height: fiber part plus base part.
    pub h_naive: f64,
    /// Néron–Tate height of the specialized point.
    pub nt_height: f64,
    /// Certified tail bound on the Tate limit.
    pub tail_bound: f64,
}

/// One row of an experiment's convergence table; the meaning of `x` and `y`
/// is fixed per kind and named by `label`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConvergenceRow {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

/// Where a report came from: enough to reproduce it bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
}

/// A finished experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub schema: String,
    pub kind: ExperimentKind,
    pub samples: Vec<HeightSample>,
    pub headline_constant: f64,
    pub convergence_table: Vec<ConvergenceRow>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(kind: ExperimentKind, provenance: Provenance) -> Self {
        ExperimentReport {
            schema: SCHEMA_ID.to_string(),
            kind,
            samples: Vec::new(),
            headline_constant: 0.0,
            convergence_table: Vec::new(),
            notes: Vec::new(),
            provenance,
        }
    }

    pub fn json_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!(
            "report-{}-{}.json",
            self.kind.as_str(),
            self.provenance.config_hash
        ))
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!(
            "report-{}-{}.csv",
            self.kind.as_str(),
            self.provenance.config_hash
        ))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: ExperimentReport = serde_json::from_str(text).context("report JSON invalid")?;
        if r.schema != SCHEMA_ID {
            anyhow::bail!("unknown report schema {:?}", r.schema);
        }
        Ok(r)
    }

    /// Fixed header row per kind; the CSV carries the convergence table
    /// with the per-sample columns inlined where the kind calls for them.
    pub fn csv_header(kind: ExperimentKind) -> &'static str {
        match kind {
            ExperimentKind::Inequality => {
                "lambda,h_base,h_naive,nt_height,tail_bound,running_sup"
            }
            ExperimentKind::DegreeGrowth => "lambda,n_doublings,h_scaled,nt_height,ratio",
            ExperimentKind::SilvermanLimit => "lambda,h_base,nt_height,ratio,hk_exact,abs_error",
            ExperimentKind::TorsionGrowth => "n,count,count_over_n2,fit_slope",
        }
    }

    /// Render the CSV body for this report (header + rows, `\n` separated).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::csv_header(self.kind));
        out.push('\n');
        match self.kind {
            ExperimentKind::Inequality => {
                // convergence_table carries (h_base, running_sup) per sample,
                // in sample order.
                for (s, c) in self.samples.iter().zip(&self.convergence_table) {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        s.lambda, s.h_base, s.h_naive, s.nt_height, s.tail_bound, c.y
                    ));
                }
            }
            ExperimentKind::SilvermanLimit => {
                for (s, c) in self.samples.iter().zip(&self.convergence_table) {
                    let ratio = c.y;
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        s.lambda,
                        s.h_base,
                        s.nt_height,
                        ratio,
                        self.headline_reference(),
                        (ratio - self.headline_reference()).abs()
                    ));
                }
            }
            ExperimentKind::DegreeGrowth | ExperimentKind::TorsionGrowth => {
                for c in &self.convergence_table {
                    out.push_str(&format!("{},{},{},{}\n", c.label, c.x, c.y, self.headline_constant));
                }
            }
        }
        out
    }

    /// For the Silverman kind the exact ĥ_K is stored in the first note as
    /// `hk_exact=<value>`; parse it back for the CSV.
    fn headline_reference(&self) -> f64 {
        for n in &self.notes {
            if let Some(v) = n.strip_prefix("hk_exact=") {
                if let Ok(x) = v.parse::<f64>() {
                    return x;
                }
            }
        }
        0.0
    }

    /// Persist JSON and CSV side by side; creates the directory.
    pub fn persist(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create report dir {}", dir.display()))?;
        let jp = self.json_path(dir);
        let cp = self.csv_path(dir);
        fs::write(&jp, self.to_json())
            .with_context(|| format!("cannot write {}", jp.display()))?;
        fs::write(&cp, self.to_csv())
            .with_context(|| format!("cannot write {}", cp.display()))?;
        Ok((jp, cp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let mut r = ExperimentReport::new(
            ExperimentKind::Inequality,
            Provenance {
                config_hash: "deadbeef00000000".into(),
                code_version: "0.1.0".into(),
                seed: 7,
            },
        );
        r.samples.push(HeightSample {
            lambda: "5/2".into(),
            h_base: 0.916,
            h_naive: 1.374,
            nt_height: 0.41,
            tail_bound: 1e-5,
        });
        r.convergence_table.push(ConvergenceRow {
            label: "5/2".into(),
            x: 0.916,
            y: 0.974,
        });
        r.headline_constant = 0.974;
        r
    }

    #[test]
    fn json_round_trip_preserves_the_report() {
        let r = sample_report();
        let back = ExperimentReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn serialization_is_deterministic() {
        let r = sample_report();
        assert_eq!(r.to_json(), r.to_json());
        assert_eq!(r.to_csv(), r.to_csv());
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let mut r = sample_report();
        r.schema = "mystery-v9".into();
        let text = serde_json::to_string(&r).unwrap();
        assert!(ExperimentReport::from_json(&text).is_err());
    }

    #[test]
    fn csv_has_fixed_header_and_one_row_per_sample() {
        let r = sample_report();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "lambda,h_base,h_naive,nt_height,tail_bound,running_sup"
        );
        assert_eq!(lines.count(), 1);
    }
}
