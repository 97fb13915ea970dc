//! Counting lattice values of the one-parameter family of maps
//! `ψ_N(w, x, y) = N·φ₁(w, x) − φ₂(w, y)`.
//!
//! Both φ maps share the first two coordinates w (the base chart), carry
//! `m₁` resp. `m₂` private coordinates, and take values in ℝ^d with
//! d = 2 + m₁ + m₂, so ψ_N is a square system and its lattice preimages are
//! generically isolated.  The counting convention is half-open: a solution
//! on the upper face of the domain box belongs to the next cell and is not
//! counted (with a 10⁻⁹ relative tolerance band).
//!
//! The N → ∞ density of solutions is governed by
//! δ₀ = det(∂φ₁/∂w | ∂φ₁/∂x | −∂φ₂/∂y); a sign change of δ₀ across the
//! region makes the leading term of the volume integral cancel instead of
//! accumulate, so volume estimation refuses such regions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

type EvalFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacFn = Box<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

/// A C¹ map on a box, given by callbacks.  `c1_bound` is a caller-supplied
/// bound on the operator norm of the Jacobian over the box; it sizes search
/// grids.
pub struct SmoothMap {
    pub domain_box: Vec<(f64, f64)>,
    evaluator: EvalFn,
    jacobian: Option<JacFn>,
    pub c1_bound: f64,
    out_dim: usize,
}

impl SmoothMap {
    pub fn new(
        domain_box: Vec<(f64, f64)>,
        c1_bound: f64,
        evaluator: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let center: Vec<f64> = domain_box.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let out_dim = evaluator(&center).len();
        SmoothMap {
            domain_box,
            evaluator: Box::new(evaluator),
            jacobian: None,
            c1_bound,
            out_dim,
        }
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    pub fn dim(&self) -> usize {
        self.domain_box.len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// True if the point lies in the half-open box (tolerance-banded).
    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.dim()
            && z.iter().zip(&self.domain_box).all(|(v, (lo, hi))| {
                let band = 1e-9 * (hi - lo).abs().max(1e-9);
                *v >= lo - band && *v < hi - band
            })
    }

    /// Evaluate inside the domain (points outside are a caller error).
    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        if !self.contains(z) {
            return Err(CoreError::domain(format!(
                "evaluation point {z:?} lies outside the domain box"
            )));
        }
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: &[f64]) -> Vec<f64> {
        (self.evaluator)(z)
    }

    /// Jacobian rows (out_dim × dim): provided callback or central
    /// differences with a scale-aware step.
    pub fn jac(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        if let Some(j) = &self.jacobian {
            return Ok(j(z));
        }
        let mut rows = vec![vec![0.0; self.dim()]; self.out_dim];
        let mut zp = z.to_vec();
        for col in 0..self.dim() {
            let h = 1e-6 * z[col].abs().max(1.0);
            zp[col] = z[col] + h;
            let up = self.eval_unchecked(&zp);
            zp[col] = z[col] - h;
            let dn = self.eval_unchecked(&zp);
            zp[col] = z[col];
            for r in 0..self.out_dim {
                let d = (up[r] - dn[r]) / (2.0 * h);
                if !d.is_finite() {
                    return Err(CoreError::domain(format!(
                        "NaN while differencing jacobian column {col}"
                    )));
                }
                rows[r][col] = d;
            }
        }
        Ok(rows)
    }
}

/// Split z = (w, x, y) according to the two maps' dimensions.
fn split_dims(phi1: &SmoothMap, phi2: &SmoothMap) -> Result<(usize, usize, usize)> {
    if phi1.dim() < 2 || phi2.dim() < 2 {
        return Err(CoreError::domain(
            "maps must share a 2-dimensional base chart".to_string(),
        ));
    }
    let m1 = phi1.dim() - 2;
    let m2 = phi2.dim() - 2;
    let d = 2 + m1 + m2;
    if phi1.out_dim() != d || phi2.out_dim() != d {
        return Err(CoreError::domain(format!(
            "maps must take values in ℝ^{d} (= 2 + m₁ + m₂); got {} and {}",
            phi1.out_dim(),
            phi2.out_dim()
        )));
    }
    Ok((m1, m2, d))
}

fn arg1(z: &[f64], m1: usize) -> Vec<f64> {
    z[..2 + m1].to_vec()
}

fn arg2(z: &[f64], m1: usize, m2: usize) -> Vec<f64> {
    let mut v = z[..2].to_vec();
    v.extend_from_slice(&z[2 + m1..2 + m1 + m2]);
    v
}

/// Whole-system domain box for z = (w, x, y): w ranges over the
/// intersection of the two base charts.
fn joint_box(phi1: &SmoothMap, phi2: &SmoothMap) -> Result<Vec<(f64, f64)>> {
    let (m1, m2, _) = split_dims(phi1, phi2)?;
    let mut out = Vec::with_capacity(2 + m1 + m2);
    for k in 0..2 {
        let (a1, b1) = phi1.domain_box[k];
        let (a2, b2) = phi2.domain_box[k];
        let lo = a1.max(a2);
        let hi = b1.min(b2);
        if !(lo < hi) {
            return Err(CoreError::domain(
                "the two base charts do not overlap".to_string(),
            ));
        }
        out.push((lo, hi));
    }
    out.extend_from_slice(&phi1.domain_box[2..]);
    out.extend_from_slice(&phi2.domain_box[2..]);
    Ok(out)
}

fn in_box(z: &[f64], bbox: &[(f64, f64)]) -> bool {
    z.iter().zip(bbox).all(|(v, (lo, hi))| {
        let band = 1e-9 * (hi - lo).abs().max(1e-9);
        *v >= lo - band && *v < hi - band
    })
}

/// ψ_N(z) = N·φ₁(w, x) − φ₂(w, y) for real N.
pub fn psi_eval(phi1: &SmoothMap, phi2: &SmoothMap, n: f64, z: &[f64]) -> Result<Vec<f64>> {
    let (m1, m2, d) = split_dims(phi1, phi2)?;
    if z.len() != 2 + m1 + m2 {
        return Err(CoreError::domain(format!(
            "psi_eval expects {} coordinates, got {}",
            2 + m1 + m2,
            z.len()
        )));
    }
    let v1 = phi1.eval(&arg1(z, m1))?;
    let v2 = phi2.eval(&arg2(z, m1, m2))?;
    Ok((0..d).map(|k| n * v1[k] - v2[k]).collect())
}

fn psi_eval_unchecked(phi1: &SmoothMap, phi2: &SmoothMap, n: f64, z: &[f64]) -> Vec<f64> {
    let m1 = phi1.dim() - 2;
    let m2 = phi2.dim() - 2;
    let v1 = phi1.eval_unchecked(&arg1(z, m1));
    let v2 = phi2.eval_unchecked(&arg2(z, m1, m2));
    (0..v1.len()).map(|k| n * v1[k] - v2[k]).collect()
}

/// Jacobian of ψ_N at z (d × d).
fn psi_jacobian(
    phi1: &SmoothMap,
    phi2: &SmoothMap,
    n: f64,
    z: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let (m1, m2, d) = split_dims(phi1, phi2)?;
    let j1 = phi1.jac(&arg1(z, m1))?;
    let j2 = phi2.jac(&arg2(z, m1, m2))?;
    let mut rows = vec![vec![0.0; d]; d];
    for r in 0..d {
        for c in 0..2 {
            rows[r][c] = n * j1[r][c] - j2[r][c];
        }
        for c in 0..m1 {
            rows[r][2 + c] = n * j1[r][2 + c];
        }
        for c in 0..m2 {
            rows[r][2 + m1 + c] = -j2[r][2 + c];
        }
    }
    Ok(rows)
}

/// The N-free density determinant δ₀ = det(∂φ₁/∂w | ∂φ₁/∂x | −∂φ₂/∂y).
pub fn delta0(phi1: &SmoothMap, phi2: &SmoothMap, z: &[f64]) -> Result<f64> {
    let (m1, m2, d) = split_dims(phi1, phi2)?;
    let j1 = phi1.jac(&arg1(z, m1))?;
    let j2 = phi2.jac(&arg2(z, m1, m2))?;
    let mut m = vec![vec![0.0; d]; d];
    for r in 0..d {
        for c in 0..(2 + m1) {
            m[r][c] = j1[r][c];
        }
        for c in 0..m2 {
            m[r][2 + m1 + c] = -j2[r][2 + c];
        }
    }
    let det = det_f64(&mut m);
    if !det.is_finite() {
        return Err(CoreError::domain(
            "NaN while differencing delta0".to_string(),
        ));
    }
    Ok(det)
}

fn det_f64(m: &mut [Vec<f64>]) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("nonempty");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        let inv = 1.0 / m[col][col];
        for r in (col + 1)..n {
            let f = m[r][col] * inv;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

fn solve_f64(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(pivot, col);
        rhs.swap(pivot, col);
        let inv = 1.0 / m[col][col];
        for r in (col + 1)..n {
            let f = m[r][col] * inv;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in (r + 1)..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

/// Monte-Carlo estimate of ∫ |det Dψ_N| over the joint domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub fn volume_growth(
    phi1: &SmoothMap,
    phi2: &SmoothMap,
    n: f64,
    samples: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    let bbox = joint_box(phi1, phi2)?;
    let vol: f64 = bbox.iter().map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut delta_pos = false;
    let mut delta_neg = false;
    let mut delta_scale = 0.0f64;
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z: Vec<f64> = bbox
            .iter()
            .map(|(a, b)| rng.gen_range(*a..*b))
            .collect();
        draws.push(z);
    }
    // Deterministic parallel map, sequential reduction in draw order.
    let evals: Vec<Result<(f64, f64)>> = draws
        .par_iter()
        .map(|z| {
            let mut jac = psi_jacobian(phi1, phi2, n, z)?;
            let dpsi = det_f64(&mut jac).abs();
            let d0 = delta0(phi1, phi2, z)?;
            Ok((dpsi, d0))
        })
        .collect();
    for e in evals {
        let (dpsi, d0) = e?;
        sum += dpsi;
        sum_sq += dpsi * dpsi;
        delta_scale = delta_scale.max(d0.abs());
        if d0 > 0.0 {
            delta_pos = true;
        }
        if d0 < 0.0 {
            delta_neg = true;
        }
    }
    if delta_pos && delta_neg && delta_scale > 0.0 {
        return Err(CoreError::ShrinkRegion);
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    Ok(VolumeEstimate {
        value: mean * vol,
        std_error: vol * (var / samples as f64).sqrt(),
        samples,
    })
}

/// A verified lattice solution: ψ_N(preimage) = target ∈ (1/N₀)ℤ^d.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedPoint {
    pub target: Vec<f64>,
    pub preimage: Vec<f64>,
    pub residual: f64,
}

/// Result of a lattice-point count at parameter N against the lattice
/// (1/N₀)ℤ^d.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountReport {
    pub n: f64,
    pub n0: u32,
    pub count: usize,
    pub volume_estimate: Option<f64>,
    pub certified_points: Vec<CertifiedPoint>,
    pub warnings: Vec<String>,
}

/// Distance used to merge Newton endpoints that represent one solution.
const MERGE_RADIUS: f64 = 1e-6;

/// Count solutions of ψ_N(z) ∈ (1/N₀)ℤ^d in the joint domain box.
///
/// Every grid sample launches a Newton iteration toward its nearest lattice
/// target; converged, in-domain, re-verified solutions are deduplicated by
/// preimage.  A diverging Newton run is not an error — it only means that
/// sample found nothing.
pub fn count_lattice_points(
    phi1: &SmoothMap,
    phi2: &SmoothMap,
    n: f64,
    n0: u32,
    grid: usize,
    tol: f64,
) -> Result<CountReport> {
    if n0 == 0 {
        return Err(CoreError::domain("N₀ must be positive".to_string()));
    }
    let bbox = joint_box(phi1, phi2)?;
    let d = bbox.len();
    let k = if grid > 0 {
        grid
    } else {
        // Cell size small enough that ψ_N moves by well under half a lattice
        // spacing across one cell.
        let slope = n * phi1.c1_bound + phi2.c1_bound;
        let span = bbox
            .iter()
            .map(|(a, b)| b - a)
            .fold(0.0f64, f64::max);
        ((span * slope * n0 as f64 * 2.5).ceil() as usize).clamp(4, 220)
    };
    let total: usize = k.pow(d as u32);
    if total > 30_000_000 {
        return Err(CoreError::domain(format!(
            "search grid of {total} samples is too large; lower --grid or shrink the box"
        )));
    }

    let starts: Vec<Vec<f64>> = (0..total)
        .map(|idx| {
            let mut rem = idx;
            bbox.iter()
                .map(|(a, b)| {
                    let i = rem % k;
                    rem /= k;
                    a + (b - a) * ((i as f64 + 0.5) / k as f64)
                })
                .collect()
        })
        .collect();

    let found: Vec<Option<(Vec<f64>, Vec<f64>, f64)>> = starts
        .par_iter()
        .map(|start| newton_to_lattice(phi1, phi2, n, n0, start, &bbox, tol))
        .collect();

    let mut accepted: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut warnings: Vec<Vec<f64>> = Vec::new();
    'cand: for cand in found.into_iter().flatten() {
        for (_, z, _) in &accepted {
            let dist = z
                .iter()
                .zip(&cand.1)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist <= MERGE_RADIUS {
                continue 'cand;
            }
            if dist <= 10.0 * MERGE_RADIUS {
                warnings.push(cand.1.clone());
            }
        }
        accepted.push(cand);
    }

    let volume_estimate = volume_growth(phi1, phi2, n, 4096, 0)
        .ok()
        .map(|v| v.value);

    let mut certified: Vec<CertifiedPoint> = accepted
        .into_iter()
        .map(|(target, preimage, residual)| CertifiedPoint {
            target,
            preimage,
            residual,
        })
        .collect();
    certified.sort_by(|a, b| a.preimage.partial_cmp(&b.preimage).expect("finite coords"));

    Ok(CountReport {
        n,
        n0,
        count: certified.len(),
        volume_estimate,
        certified_points: certified,
        warnings: warnings
            .into_iter()
            .map(|z| {
                format!(
                    "preimage {z:?} sits within 10× the merge radius of another solution; \
                     counts near this point may be sensitive to the merge radius"
                )
            })
            .collect(),
    })
}

/// One Newton run: lock onto the nearest lattice target of the start point
/// and iterate; re-locking per step keeps targets consistent when ψ moves.
fn newton_to_lattice(
    phi1: &SmoothMap,
    phi2: &SmoothMap,
    n: f64,
    n0: u32,
    start: &[f64],
    bbox: &[(f64, f64)],
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let n0f = n0 as f64;
    let mut z = start.to_vec();
    let mut target: Vec<f64> = psi_eval_unchecked(phi1, phi2, n, &z)
        .iter()
        .map(|v| (v * n0f).round() / n0f)
        .collect();
    let span: f64 = bbox
        .iter()
        .map(|(a, b)| (b - a).abs())
        .fold(0.0, f64::max);
    for iter in 0..40 {
        let val = psi_eval_unchecked(phi1, phi2, n, &z);
        if iter < 3 {
            // Early re-lock: follow the target the iterate actually chases.
            target = val.iter().map(|v| (v * n0f).round() / n0f).collect();
        }
        let res: Vec<f64> = val.iter().zip(&target).map(|(v, t)| v - t).collect();
        let rnorm = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if rnorm <= tol {
            if !in_box(&z, bbox) {
                return None;
            }
            // Independent recheck on a fresh evaluation.
            let fresh = psi_eval_unchecked(phi1, phi2, n, &z);
            let fresh_res = fresh
                .iter()
                .zip(&target)
                .map(|(v, t)| (v - t).abs())
                .fold(0.0, f64::max);
            if fresh_res > 10.0 * tol {
                return None;
            }
            return Some((target, z, fresh_res));
        }
        let jac = psi_jacobian(phi1, phi2, n, &z).ok()?;
        let step = solve_f64(jac, res)?;
        let snorm = step.iter().map(|s| s.abs()).fold(0.0, f64::max);
        if !snorm.is_finite() || snorm > span {
            return None; // diverging: this sample found nothing
        }
        for (zi, si) in z.iter_mut().zip(&step) {
            *zi -= si;
        }
        // Abandon iterates that leave a doubled box.
        if !z.iter().zip(bbox).all(|(v, (a, b))| {
            let pad = b - a;
            *v >= a - pad && *v <= b + pad
        }) {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id_map(scale: f64) -> SmoothMap {
        SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], scale.abs(), move |z| {
            vec![scale * z[0], scale * z[1]]
        })
    }

    #[test]
    fn closed_form_counts_for_identity_and_doubling() {
        for n in [3.0, 7.0, 10.0] {
            let phi1 = id_map(1.0);
            let phi2 = id_map(1.0);
            let report = count_lattice_points(&phi1, &phi2, n, 1, 0, 1e-9).unwrap();
            let expected = ((n - 1.0) * (n - 1.0)).round() as usize;
            assert_eq!(report.count, expected, "identity at N = {n}");

            let phi1 = id_map(2.0);
            let report = count_lattice_points(&phi1, &phi2, n, 1, 0, 1e-9).unwrap();
            let expected = ((2.0 * n - 1.0) * (2.0 * n - 1.0)).round() as usize;
            assert_eq!(report.count, expected, "doubling at N = {n}");
        }
    }

    #[test]
    fn shear_map_matches_brute_force() {
        let phi1 = SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 1.3, |z| {
            vec![z[0] + 0.3 * z[1], z[1]]
        });
        let phi2 = id_map(1.0);
        let n = 6.0;
        let report = count_lattice_points(&phi1, &phi2, n, 1, 0, 1e-9).unwrap();
        // Brute force: ψ = ((N−1)w₀ + 0.3N w₁, (N−1)w₁) ∈ ℤ², half-open box.
        let mut expected = 0usize;
        let m = (n - 1.0) as i64;
        for j in 0..m {
            let w1 = j as f64 / (n - 1.0);
            let off = 0.3 * n * w1;
            // w0 = (k − off)/(N−1) ∈ [0, 1)
            let kmin = off.ceil() as i64;
            let kmax = (off + (n - 1.0)).ceil() as i64 - 1;
            for _k in kmin..=kmax {
                expected += 1;
            }
        }
        assert_eq!(report.count, expected);
    }

    #[test]
    fn linearity_in_n() {
        let phi1 = SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 2.0, |z| {
            vec![z[0] * z[0] + 0.5 * z[1], z[1] * 0.7 - 0.2 * z[0]]
        });
        let phi2 = id_map(1.0);
        let z = [0.37, 0.61];
        let a = psi_eval(&phi1, &phi2, 5.0, &z).unwrap();
        let b = psi_eval(&phi1, &phi2, 4.0, &z).unwrap();
        let f = phi1.eval(&z).unwrap();
        for k in 0..2 {
            assert!((a[k] - b[k] - f[k]).abs() < 1e-12);
        }
        // Real (non-integer) N is accepted.
        assert!(psi_eval(&phi1, &phi2, 4.5, &z).is_ok());
        // Outside the domain is an error.
        assert!(psi_eval(&phi1, &phi2, 4.0, &[1.5, 0.2]).is_err());
    }

    #[test]
    fn delta0_linear_oracle_and_constant_degeneracy() {
        // φ₁ = A·w with A = [[2, 1], [0, 3]] ⇒ δ₀ = det A = 6.
        let phi1 = SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 3.0, |z| {
            vec![2.0 * z[0] + z[1], 3.0 * z[1]]
        });
        let phi2 = id_map(1.0);
        let d = delta0(&phi1, &phi2, &[0.4, 0.4]).unwrap();
        assert!((d - 6.0).abs() < 1e-6);

        // φ₂ constant in its private coordinate (m₂ = 1) ⇒ δ₀ = 0.
        let phi1 = SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 1.0, |z| {
            vec![z[0], z[1], z[0] + z[1]]
        });
        let phi2 = SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], 1.0, |z| {
            vec![z[0], z[1], 1.25 * z[0]] // ignores its y-coordinate
        });
        let d = delta0(&phi1, &phi2, &[0.3, 0.3, 0.5]).unwrap();
        assert!(d.abs() < 1e-6, "delta0 = {d}");
    }

    #[test]
    fn volume_of_linear_system_is_det_times_box() {
        let phi1 = SmoothMap::new(vec![(0.0, 1.0), (0.0, 1.0)], 3.0, |z| {
            vec![2.0 * z[0] + z[1], 3.0 * z[1]]
        });
        let phi2 = id_map(1.0);
        let n = 7.0;
        // Dψ = N·A − I = [[13, 7], [0, 20]]: |det| = 260 over the unit box.
        let v = volume_growth(&phi1, &phi2, n, 2000, 42).unwrap();
        assert!((v.value - 260.0).abs() < 1e-5, "value {}", v.value);
        // MC of a constant has (numerically) zero variance.
        assert!(v.std_error < 1e-6);
    }

    #[test]
    fn delta0_sign_change_demands_shrinking() {
        // φ₁ = (w₀², w₁) over w₀ ∈ [−1, 1]: δ₀ = 2w₀ changes sign.
        let phi1 = SmoothMap::new(vec![(-1.0, 1.0), (0.0, 1.0)], 2.0, |z| {
            vec![z[0] * z[0], z[1]]
        });
        let phi2 = SmoothMap::new(vec![(-1.0, 1.0), (0.0, 1.0)], 1.0, |z| {
            vec![z[0], z[1]]
        });
        let err = volume_growth(&phi1, &phi2, 5.0, 500, 7).unwrap_err();
        assert_eq!(err.to_string(), "delta0 changes sign: shrink U''");
    }

    #[test]
    fn lattice_refinement_multiplies_counts() {
        // ψ = (N−1)w against (1/2)ℤ²: spacing halves, count ≈ quadruples.
        let phi1 = id_map(1.0);
        let phi2 = id_map(1.0);
        let n = 5.0;
        let coarse = count_lattice_points(&phi1, &phi2, n, 1, 0, 1e-9).unwrap();
        let fine = count_lattice_points(&phi1, &phi2, n, 2, 0, 1e-9).unwrap();
        assert_eq!(coarse.count, 16);
        assert_eq!(fine.count, 64); // (2(N−1))² solutions at half-integer targets
    }
}
