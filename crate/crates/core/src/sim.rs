//! RK4 trajectories and Monte Carlo reachable clouds from the origin.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{norm, singular_values, Vector};
use crate::system::QuadraticSystem;

/// Samples are abandoned once the state norm exceeds this.
pub const BLOW_UP_NORM: f64 = 1e6;

/// Relative singular-value threshold behind `CloudStats::empirical_rank`.
pub const EMPIRICAL_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("state became non-finite or exceeded norm {BLOW_UP_NORM:e} at t = {t}")]
    NonFinite { t: f64 },
    #[error("step {dt} does not divide the segment duration {duration}")]
    BadStep { dt: f64, duration: f64 },
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("empty cloud")]
    EmptyCloud,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Piecewise-constant controls in the box `[−bound, bound]^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    segment_duration: f64,
    values: Vec<Vec<f64>>,
    bound: f64,
}

impl ControlSchedule {
    pub fn new(segment_duration: f64, values: Vec<Vec<f64>>, bound: f64) -> Result<Self, SimError> {
        if !(segment_duration > 0.0 && segment_duration.is_finite()) {
            return Err(SimError::BadSchedule(format!("segment duration {segment_duration} must be positive")));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(SimError::BadSchedule(format!("bound {bound} must be positive")));
        }
        if values.iter().flatten().any(|u| !(u.abs() <= bound)) {
            return Err(SimError::BadSchedule(format!("control values must lie in [-{bound}, {bound}]")));
        }
        Ok(ControlSchedule { segment_duration, values, bound })
    }

    /// Zero control over `[0, t]` as a single segment.
    pub fn zero(m: usize, t: f64) -> Result<Self, SimError> {
        Self::new(t, vec![vec![0.0; m]], 1.0)
    }

    pub fn segment_duration(&self) -> f64 {
        self.segment_duration
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn total_time(&self) -> f64 {
        self.segment_duration * self.values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector<f64>>,
}

impl Trajectory {
    pub fn endpoint(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn rk4_step(sys: &QuadraticSystem<f64>, x: &[f64], u: &[f64], dt: f64) -> Vector<f64> {
    let f = |y: &[f64]| sys.field(y, u).expect("validated dimensions");
    let axpy = |a: f64, v: &[f64]| -> Vector<f64> { x.iter().zip(v).map(|(xi, vi)| xi + a * vi).collect() };
    let k1 = f(x);
    let k2 = f(&axpy(dt / 2.0, &k1));
    let k3 = f(&axpy(dt / 2.0, &k2));
    let k4 = f(&axpy(dt, &k3));
    (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Classical RK4 with fixed step `dt`, which must divide the segment duration.
pub fn integrate(sys: &QuadraticSystem<f64>, x0: &[f64], schedule: &ControlSchedule, dt: f64) -> Result<Trajectory, SimError> {
    if x0.len() != sys.n() {
        return Err(SimError::DimensionMismatch { expected: sys.n(), found: x0.len() });
    }
    if let Some(u) = schedule.values.iter().find(|u| u.len() != sys.num_controls()) {
        return Err(SimError::DimensionMismatch { expected: sys.num_controls(), found: u.len() });
    }
    let duration = schedule.segment_duration;
    let steps = (duration / dt).round();
    if !(dt > 0.0) || steps < 1.0 || (steps * dt - duration).abs() > 1e-12 {
        return Err(SimError::BadStep { dt, duration });
    }
    let steps = steps as usize;
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for (s, u) in schedule.values.iter().enumerate() {
        let t0 = s as f64 * duration;
        for i in 1..=steps {
            x = rk4_step(sys, &x, u, dt);
            let t = t0 + i as f64 * dt;
            if x.iter().any(|v| !v.is_finite()) || norm(&x) > BLOW_UP_NORM {
                return Err(SimError::NonFinite { t });
            }
            times.push(t);
            states.push(x.clone());
        }
    }
    Ok(Trajectory { times, states })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudOptions {
    pub horizon: f64,
    pub samples: usize,
    pub bound: f64,
    pub segments: usize,
    pub steps_per_segment: usize,
    pub seed: u64,
}

impl Default for CloudOptions {
    fn default() -> Self {
        CloudOptions { horizon: 0.5, samples: 2000, bound: 1.0, segments: 4, steps_per_segment: 25, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudStats {
    #[serde(skip)]
    pub endpoints: Vec<Vector<f64>>,
    pub samples: usize,
    pub dropped: usize,
    pub empirical_rank: usize,
    pub singular_values: Vec<f64>,
    /// Fraction of sign patterns realized in orthonormal coordinates of `S_k`.
    pub orthant_coverage: Option<f64>,
}

impl CloudStats {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.endpoints.first().map_or(0, Vec::len);
        let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for e in &self.endpoints {
            let row: Vec<String> = e.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Number of singular values of the centered endpoint matrix above `rel_tol · σ_max`.
pub fn empirical_rank(cloud: &[Vector<f64>], rel_tol: f64) -> Result<usize, SimError> {
    Ok(rank_of(&centered_singular_values(cloud)?, rel_tol))
}

fn rank_of(singular_values: &[f64], rel_tol: f64) -> usize {
    let smax = singular_values.iter().copied().fold(0.0, f64::max);
    singular_values.iter().filter(|&&s| s > 0.0 && s > rel_tol * smax).count()
}

fn centered_singular_values(cloud: &[Vector<f64>]) -> Result<Vec<f64>, SimError> {
    let first = cloud.first().ok_or(SimError::EmptyCloud)?;
    let n = first.len();
    let count = cloud.len() as f64;
    let mean: Vec<f64> = (0..n).map(|i| cloud.iter().map(|e| e[i]).sum::<f64>() / count).collect();
    let centered: Vec<Vec<f64>> = cloud.iter().map(|e| e.iter().zip(&mean).map(|(a, b)| a - b).collect()).collect();
    Ok(singular_values(&centered))
}

// Orthonormalize by modified Gram-Schmidt; the input is already independent.
fn orthonormal(basis: &[Vector<f64>]) -> Vec<Vector<f64>> {
    let mut out: Vec<Vector<f64>> = Vec::new();
    for b in basis {
        let mut r = b.clone();
        for q in &out {
            let c: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let nr = norm(&r);
        if nr > 0.0 {
            out.push(r.into_iter().map(|x| x / nr).collect());
        }
    }
    out
}

/// Random piecewise-constant controls, one RNG stream per sample so results do
/// not depend on scheduling. `sk_basis` enables the orthant statistic.
pub fn reachable_cloud(
    sys: &QuadraticSystem<f64>,
    opts: &CloudOptions,
    sk_basis: Option<&[Vector<f64>]>,
) -> Result<CloudStats, SimError> {
    if !(opts.horizon > 0.0) || opts.samples == 0 || opts.segments == 0 || opts.steps_per_segment == 0 {
        return Err(SimError::BadSchedule("horizon, samples, segments and steps must be positive".into()));
    }
    let m = sys.num_controls();
    let seg = opts.horizon / opts.segments as f64;
    let dt = seg / opts.steps_per_segment as f64;
    let x0 = vec![0.0; sys.n()];
    let results: Vec<Result<Vector<f64>, SimError>> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let values = (0..opts.segments).map(|_| (0..m).map(|_| rng.random_range(-opts.bound..=opts.bound)).collect()).collect();
            let schedule = ControlSchedule::new(seg, values, opts.bound)?;
            Ok(integrate(sys, &x0, &schedule, dt)?.endpoint().to_vec())
        })
        .collect();
    let mut endpoints = Vec::with_capacity(results.len());
    let mut dropped = 0;
    for r in results {
        match r {
            Ok(e) => endpoints.push(e),
            Err(SimError::NonFinite { .. }) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    let singular_values = centered_singular_values(&endpoints)?;
    let empirical_rank = rank_of(&singular_values, EMPIRICAL_RANK_TOL);
    let orthant_coverage = sk_basis.map(|basis| {
        let q = orthonormal(basis);
        let patterns: std::collections::BTreeSet<Vec<bool>> = endpoints
            .iter()
            .map(|e| q.iter().map(|qi| qi.iter().zip(e).map(|(a, b)| a * b).sum::<f64>() >= 0.0).collect())
            .collect();
        patterns.len() as f64 / 2f64.powi(q.len() as i32)
    });
    Ok(CloudStats { endpoints, samples: opts.samples, dropped, empirical_rank, singular_values, orthant_coverage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_mul, Matrix};
    use crate::models::{paper_example, rigid_body, sprott};

    // exp(A) by scaling and squaring of a truncated Taylor series.
    fn expm(a: &Matrix<f64>) -> Matrix<f64> {
        let n = a.len();
        let nrm = a.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
        let s = (nrm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scaled: Matrix<f64> = a.iter().map(|r| r.iter().map(|x| x / 2f64.powi(s)).collect()).collect();
        let mut result = crate::linalg::identity::<f64>(n);
        let mut term = crate::linalg::identity::<f64>(n);
        for k in 1..20 {
            term = mat_mul(&term, &scaled).into_iter().map(|r| r.into_iter().map(|x| x / k as f64).collect()).collect();
            result = result.iter().zip(&term).map(|(r, t)| r.iter().zip(t).map(|(a, b)| a + b).collect()).collect();
        }
        for _ in 0..s {
            result = mat_mul(&result, &result);
        }
        result
    }

    #[test]
    fn zero_control_from_origin_stays_put() {
        let sys = sprott(1.0, vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let tr = integrate(&sys, &[0.0; 3], &ControlSchedule::zero(1, 1.0).unwrap(), 0.01).unwrap();
        assert!(tr.states.iter().all(|x| x.iter().all(|&v| v == 0.0)));
        assert_eq!(tr.times.len(), 101);
    }

    #[test]
    fn rigid_body_energy_is_conserved() {
        let xi = [1.0, 2.0, 3.0];
        let sys = rigid_body(&xi, vec![vec![1.0, 0.0, 0.0]], false).unwrap();
        let x0 = [0.3, -0.7, 0.5];
        let energy = |x: &[f64]| x.iter().zip(&xi).map(|(a, b)| b * a * a).sum::<f64>();
        let tr = integrate(&sys, &x0, &ControlSchedule::zero(1, 1.0).unwrap(), 1e-3).unwrap();
        let drift = (energy(tr.endpoint()) - energy(&x0)).abs() / energy(&x0);
        assert!(drift <= 1e-8, "{drift}");
    }

    #[test]
    fn linear_system_matches_matrix_exponential() {
        let l = vec![vec![0.0, 1.0, 0.0], vec![-2.0, -0.5, 0.0], vec![0.3, 0.0, -1.0]];
        let z = vec![0.0; 3];
        let f = vec![0.0, 1.0, 0.5];
        let sys = QuadraticSystem::new(l.clone(), z.clone(), z.clone(), z, vec![f.clone()]).unwrap();
        let u = 0.7;
        let t = 1.3;
        let tr = integrate(&sys, &[0.0; 3], &ControlSchedule::new(t, vec![vec![u]], 1.0).unwrap(), 1e-3).unwrap();
        // x(T) is the last column of exp(T [[L, Fu], [0, 0]]) above the corner.
        let mut aug = vec![vec![0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                aug[i][j] = t * l[i][j];
            }
            aug[i][3] = t * f[i] * u;
        }
        let e = expm(&aug);
        let exact: Vec<f64> = (0..3).map(|i| e[i][3]).collect();
        let err = norm(&tr.endpoint().iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let sys = sprott(1.0, vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let sched = ControlSchedule::new(1.0, vec![vec![0.5]], 1.0).unwrap();
        let x0 = [0.2, -0.1, 0.3];
        let end = |dt: f64| integrate(&sys, &x0, &sched, dt).unwrap().endpoint().to_vec();
        let reference = end(0.1 / 8.0);
        let err = |dt: f64| norm(&end(dt).iter().zip(&reference).map(|(a, b)| a - b).collect::<Vec<_>>());
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn step_must_divide_segment() {
        let sys = sprott(1.0, vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let sched = ControlSchedule::new(1.0, vec![vec![0.0]], 1.0).unwrap();
        assert!(matches!(integrate(&sys, &[0.0; 3], &sched, 0.3), Err(SimError::BadStep { .. })));
        assert!(ControlSchedule::new(1.0, vec![vec![2.0]], 1.0).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        // ẋ = x² escapes at t = 1/x₀.
        let sys = QuadraticSystem::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0], vec![vec![0.0, 1.0]]).unwrap();
        let r = integrate(&sys, &[10.0, 0.0], &ControlSchedule::zero(1, 1.0).unwrap(), 1e-3);
        assert!(matches!(r, Err(SimError::NonFinite { .. })));
    }

    #[test]
    fn empirical_rank_examples() {
        assert_eq!(empirical_rank(&[vec![1.0, 2.0], vec![1.0, 2.0]], 1e-6).unwrap(), 0);
        let line: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, 0.0]).collect();
        assert_eq!(empirical_rank(&line, 1e-6).unwrap(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let full: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        assert_eq!(empirical_rank(&full, 1e-6).unwrap(), 3);
        assert_eq!(empirical_rank(&[], 1e-6), Err(SimError::EmptyCloud));
    }

    #[test]
    fn clouds_are_deterministic() {
        let sys = paper_example("sprott-counterexample-flow").unwrap().system.convert::<f64>();
        let opts = CloudOptions { samples: 64, seed: 9, ..CloudOptions::default() };
        let a = reachable_cloud(&sys, &opts, None).unwrap();
        let b = reachable_cloud(&sys, &opts, None).unwrap();
        assert_eq!(a.endpoints, b.endpoints);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 65);
    }
}
