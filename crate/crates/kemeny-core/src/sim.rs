//! Seeded Monte Carlo oracles: path simulation and hitting-time
//! estimation for all three model classes, plus the occupation-time
//! checks that tie sample paths back to the linear-algebra answers.
//!
//! Randomness comes from a counter-based splittable generator keyed by
//! (seed, stream_id): output k is a SplitMix64-style hash of a
//! per-stream affine counter, so identical keys reproduce identical
//! draws bitwise and distinct stream ids give statistically independent
//! streams. Estimators assign sample index i to the fixed substream
//! derived from i, which makes pooled estimates independent of how the
//! work is partitioned across threads.

use crate::chain::{self, StationaryDistribution, TransitionMatrix};
use crate::ctmc::{self, GeneratorMatrix};
use crate::diffusion::{Boundary, DiffusionAnalysis};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-trajectory step cap; a.s.-finite but heavy-tailed runs become
/// hard errors instead of hangs.
pub const TRAJECTORY_STEP_CAP: f64 = 1e9;

/// Time cap for one diffusion trajectory.
pub const DIFFUSION_TIME_CAP: f64 = 1e6;

/// z-scores are capped here when the sample variance vanishes.
pub const Z_CAP: f64 = 1e9;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based splittable stream: draw k is mix64(base + k * gamma)
/// with base and (odd) gamma derived from the key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    base: u64,
    gamma: u64,
    counter: u64,
    cached_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> RngStream {
        RngStream {
            seed,
            stream_id,
            base: mix64(seed ^ mix64(stream_id)),
            gamma: mix64(stream_id ^ GOLDEN) | 1,
            counter: 0,
            cached_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fixed derived stream for sample `index`.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, mix64(self.stream_id ^ GOLDEN).wrapping_add(index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.base.wrapping_add(self.counter.wrapping_mul(self.gamma)))
    }

    /// Uniform on [0, 1), 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform on (0, 1]; safe under log.
    fn next_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    /// Inverse-CDF exponential with the given rate.
    pub fn next_exponential(&mut self, rate: f64) -> f64 {
        -self.next_open().ln() / rate
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.cached_normal.take() {
            return v;
        }
        let r = (-2.0 * self.next_open().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.next_f64();
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Sample mean, standard error, and optional z-score against an exact
/// target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub target_exact: Option<f64>,
    pub z_score: Option<f64>,
}

impl McEstimate {
    pub fn from_samples(values: &[f64], target_exact: Option<f64>) -> McEstimate {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        let z_score = target_exact.map(|t| zscore(mean, t, std_error));
        McEstimate { mean, std_error, n_samples: n, target_exact, z_score }
    }
}

fn zscore(mean: f64, exact: f64, se: f64) -> f64 {
    let diff = mean - exact;
    if se > 0.0 {
        (diff / se).clamp(-Z_CAP, Z_CAP)
    } else if diff == 0.0 {
        0.0
    } else {
        Z_CAP.copysign(diff)
    }
}

fn categorical_index(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Inverse-CDF draw from a stationary distribution.
pub fn sample_stationary_chain(pi: &StationaryDistribution, rng: &mut RngStream) -> usize {
    categorical_index(pi.probs(), rng.next_f64())
}

/// Draw from a diffusion's stationary law by bisecting its CDF.
pub fn sample_stationary_diffusion(a: &DiffusionAnalysis, rng: &mut RngStream) -> Result<f64> {
    a.quantile(rng.next_f64())
}

fn step_chain(p: &TransitionMatrix, state: usize, rng: &mut RngStream) -> usize {
    categorical_index(p.row(state), rng.next_f64())
}

fn entry_steps(p: &TransitionMatrix, from: usize, target: usize, rng: &mut RngStream) -> Result<f64> {
    let mut state = from;
    let mut steps = 0.0;
    while state != target {
        state = step_chain(p, state, rng);
        steps += 1.0;
        if steps > TRAJECTORY_STEP_CAP {
            return Err(Error::RunawayTrajectory { cap: TRAJECTORY_STEP_CAP });
        }
    }
    Ok(steps)
}

/// Estimate K(x) for a discrete chain: draw Z from pi, walk from x until
/// entry, record the step count; z-scored against the exact value.
pub fn estimate_kemeny_dtmc(
    p: &TransitionMatrix,
    x: usize,
    n_samples: usize,
    rng: &RngStream,
) -> Result<McEstimate> {
    if x >= p.n() {
        return Err(Error::StateOutOfRange { state: x, n: p.n() });
    }
    let (pi, k) = chain::kemeny_vector(p)?;
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i);
            let z = sample_stationary_chain(&pi, &mut r);
            entry_steps(p, x, z, &mut r)
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&values, Some(k[x])))
}

/// Estimate K(x) for a continuous-time chain by simulating the jump
/// chain with exponential holding times.
pub fn estimate_kemeny_ctmc(
    q: &GeneratorMatrix,
    x: usize,
    n_samples: usize,
    rng: &RngStream,
) -> Result<McEstimate> {
    if x >= q.n() {
        return Err(Error::StateOutOfRange { state: x, n: q.n() });
    }
    let (pi, k) = ctmc::kemeny_vector_ct(q)?;
    let n = q.n();
    let jump: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let exit = -q.rate(s, s);
            (0..n).map(|y| if y == s { 0.0 } else { q.rate(s, y) / exit }).collect()
        })
        .collect();
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i);
            let z = sample_stationary_chain(&pi, &mut r);
            let mut state = x;
            let mut t = 0.0;
            let mut steps = 0.0;
            while state != z {
                let exit = -q.rate(state, state);
                t += r.next_exponential(exit);
                state = categorical_index(&jump[state], r.next_f64());
                steps += 1.0;
                if steps > TRAJECTORY_STEP_CAP {
                    return Err(Error::RunawayTrajectory { cap: TRAJECTORY_STEP_CAP });
                }
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&values, Some(k[x])))
}

fn occupation_run(
    p: &TransitionMatrix,
    from: usize,
    target: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let mut visits = vec![0.0; p.n()];
    let mut state = from;
    let mut steps = 0.0;
    while state != target {
        visits[state] += 1.0;
        state = step_chain(p, state, rng);
        steps += 1.0;
        if steps > TRAJECTORY_STEP_CAP {
            return Err(Error::RunawayTrajectory { cap: TRAJECTORY_STEP_CAP });
        }
    }
    Ok(visits)
}

fn occupation_zscores(
    p: &TransitionMatrix,
    start: Option<usize>,
    target: Option<usize>,
    n_samples: usize,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    let (pi, k) = chain::kemeny_vector(p)?;
    let n = p.n();
    // claimed identity: E[N_S(y)] = pi_y E[S]
    let expected_s = match (start, target) {
        (None, None) => pi.probs().iter().zip(&k).map(|(w, v)| w * v).sum::<f64>(),
        (s, t) => {
            let table = chain::mean_entry_times(p, t.expect("fixed target required"))?;
            match s {
                Some(s) => table.mean[s],
                None => pi.probs().iter().zip(&table.mean).map(|(w, v)| w * v).sum(),
            }
        }
    };
    let runs: Vec<Vec<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i);
            let from = match start {
                Some(s) => s,
                None => sample_stationary_chain(&pi, &mut r),
            };
            let tgt = match target {
                Some(t) => t,
                None => sample_stationary_chain(&pi, &mut r),
            };
            occupation_run(p, from, tgt, &mut r)
        })
        .collect::<Result<_>>()?;
    let mut zs = Vec::with_capacity(n);
    for y in 0..n {
        let samples: Vec<f64> = runs.iter().map(|v| v[y]).collect();
        let est = McEstimate::from_samples(&samples, Some(pi.prob(y) * expected_s));
        zs.push(est.z_score.expect("target provided"));
    }
    Ok(zs)
}

/// Occupation-time check with mu = pi and S the entry time of a
/// pi-random target: the law of X_S is pi, so `E[N_S(y)] = pi_y E[S]` must
/// hold; returns the per-state z-scores.
pub fn verify_occupation_lemma_dtmc(
    p: &TransitionMatrix,
    n_samples: usize,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    occupation_zscores(p, None, None, n_samples, rng)
}

/// Continuous-time occupation check with mu = pi and S the hitting time
/// of a pi-random target: expected time spent in y before S must equal
/// `pi_y E[S]`; returns the per-state z-scores.
pub fn verify_occupation_lemma_ctmc(
    q: &GeneratorMatrix,
    n_samples: usize,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    let (pi, k) = ctmc::kemeny_vector_ct(q)?;
    let n = q.n();
    let kappa: f64 = pi.probs().iter().zip(&k).map(|(w, v)| w * v).sum();
    let jump: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let exit = -q.rate(s, s);
            (0..n).map(|y| if y == s { 0.0 } else { q.rate(s, y) / exit }).collect()
        })
        .collect();
    let runs: Vec<Vec<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i);
            let from = sample_stationary_chain(&pi, &mut r);
            let target = sample_stationary_chain(&pi, &mut r);
            let mut occupation = vec![0.0; n];
            let mut state = from;
            let mut steps = 0.0;
            while state != target {
                let exit = -q.rate(state, state);
                occupation[state] += r.next_exponential(exit);
                state = categorical_index(&jump[state], r.next_f64());
                steps += 1.0;
                if steps > TRAJECTORY_STEP_CAP {
                    return Err(Error::RunawayTrajectory { cap: TRAJECTORY_STEP_CAP });
                }
            }
            Ok(occupation)
        })
        .collect::<Result<_>>()?;
    let mut zs = Vec::with_capacity(n);
    for y in 0..n {
        let samples: Vec<f64> = runs.iter().map(|v| v[y]).collect();
        let est = McEstimate::from_samples(&samples, Some(pi.prob(y) * kappa));
        zs.push(est.z_score.expect("target provided"));
    }
    Ok(zs)
}

/// Negative control: a fixed start and fixed target violate the
/// X_S-law hypothesis, so `E[N_S(y)] = pi_y E[S]` should fail for some y
/// (the returned z-scores blow up).
pub fn occupation_control_fixed_target(
    p: &TransitionMatrix,
    start: usize,
    target: usize,
    n_samples: usize,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    if start >= p.n() {
        return Err(Error::StateOutOfRange { state: start, n: p.n() });
    }
    if target >= p.n() {
        return Err(Error::StateOutOfRange { state: target, n: p.n() });
    }
    occupation_zscores(p, Some(start), Some(target), n_samples, rng)
}

/// Euler-Maruyama estimate of `E^x[T_z]` for a diffusion, with mirror
/// reflection at reflecting endpoints and absorption once the path is
/// within `band` of z. The estimate carries O(sqrt(step)) + O(band)
/// discretization bias, so acceptance tolerances are percentages rather
/// than z-scores; the z-score against the quadrature value is still
/// reported.
pub fn estimate_hitting_diffusion(
    a: &DiffusionAnalysis,
    x: f64,
    z: f64,
    step: f64,
    band: f64,
    n_samples: usize,
    rng: &RngStream,
) -> Result<McEstimate> {
    let (left, right) = a.spec().interval();
    let (lb, rb) = a.spec().boundaries();
    if step.is_nan() || step <= 0.0 || band.is_nan() || band <= 0.0 {
        return Err(Error::InvalidGrid { reason: "step and band must be positive" });
    }
    if left.is_finite() && right.is_finite() {
        let max_step = (right - left) * (right - left) / 100.0;
        if step > max_step {
            return Err(Error::StepTooLarge { step, max: max_step });
        }
    }
    let exact = crate::diffusion::expected_hitting(a, x, z)?;
    let drift = a.spec().drift();
    let sigma = a.spec().sigma();
    let sqrt_h = step.sqrt();
    let floor = if left.is_finite() { left + 1e-12 } else { f64::NEG_INFINITY };
    let ceil = if right.is_finite() { right - 1e-12 } else { f64::INFINITY };
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i);
            let mut pos = x;
            let mut t = 0.0;
            loop {
                if (pos - z).abs() <= band {
                    return Ok(t);
                }
                let mut next =
                    pos + drift.eval(pos)? * step + sigma.eval(pos)? * sqrt_h * r.next_normal();
                // mirror at reflecting endpoints until back inside
                for _ in 0..64 {
                    if next < left && lb == Boundary::Reflecting {
                        next = 2.0 * left - next;
                    } else if next > right && rb == Boundary::Reflecting {
                        next = 2.0 * right - next;
                    } else {
                        break;
                    }
                }
                // entrance sides: the drift repels, a floor guards the
                // expression domain
                pos = next.clamp(floor, ceil);
                debug_assert!(pos >= left && pos <= right);
                t += step;
                if t > DIFFUSION_TIME_CAP {
                    return Err(Error::RunawayTrajectory { cap: DIFFUSION_TIME_CAP });
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&values, Some(exact)))
}

/// Random irreducible chain: a full cycle guaranteeing strong
/// connectivity plus density-controlled extra edges, rows normalized.
pub fn random_transition_matrix(
    n: usize,
    density: f64,
    rng: &mut RngStream,
) -> Result<TransitionMatrix> {
    let rows = random_weight_rows(n, density, rng);
    TransitionMatrix::validate(&normalize_rows(rows))
}

/// Random irreducible generator: cycle plus extra rates, diagonal set to
/// minus the off-diagonal sum.
pub fn random_generator_matrix(
    n: usize,
    density: f64,
    rng: &mut RngStream,
) -> Result<GeneratorMatrix> {
    let mut rows = random_weight_rows(n, density, rng);
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 0.0;
        let off: f64 = row.iter().sum();
        row[i] = -off;
    }
    GeneratorMatrix::validate(&rows)
}

fn random_weight_rows(n: usize, density: f64, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[(i + 1) % n] = 0.1 + rng.next_f64();
        for (j, w) in row.iter_mut().enumerate() {
            if j != (i + 1) % n && rng.next_f64() < density {
                *w = 0.1 + rng.next_f64();
            }
        }
    }
    rows
}

fn normalize_rows(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= s;
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::diffusion::DiffusionSpec;

    fn two_state() -> TransitionMatrix {
        TransitionMatrix::validate(&[vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap()
    }

    fn cycle3() -> TransitionMatrix {
        TransitionMatrix::validate(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(42, 8);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn uniforms_cover_unit_interval() {
        let mut r = RngStream::new(1, 0);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| r.next_f64()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut r = RngStream::new(3, 1);
        let n = 40_000;
        let xs: Vec<f64> = (0..n).map(|_| r.next_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn categorical_inverse_cdf() {
        assert_eq!(categorical_index(&[0.4, 0.6], 0.3), 0);
        assert_eq!(categorical_index(&[0.4, 0.6], 0.95), 1);
        assert_eq!(categorical_index(&[0.4, 0.6], 0.4), 1);
    }

    #[test]
    fn kemeny_estimate_matches_exact_dtmc() {
        let p = two_state();
        let est = estimate_kemeny_dtmc(&p, 0, 20_000, &RngStream::new(42, 0)).unwrap();
        assert_eq!(est.target_exact, Some(2.0));
        assert!(est.z_score.unwrap().abs() <= 4.0, "{est:?}");

        let est2 = estimate_kemeny_dtmc(&p, 0, 20_000, &RngStream::new(42, 0)).unwrap();
        assert_eq!(est.mean.to_bits(), est2.mean.to_bits(), "not reproducible");
    }

    #[test]
    fn single_sample_with_matching_target_is_zero() {
        // flip chain: D is 0 when Z equals the start, else exactly 1
        let p = TransitionMatrix::validate(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let base = RngStream::new(7, 0);
        let first_draw = base.substream(0).next_f64();
        let est = estimate_kemeny_dtmc(&p, 0, 1, &base).unwrap();
        if first_draw < 0.5 {
            assert_eq!(est.mean, 0.0);
        } else {
            assert_eq!(est.mean, 1.0);
        }
    }

    #[test]
    fn kemeny_estimate_matches_exact_ctmc() {
        let q = GeneratorMatrix::validate(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        let est = estimate_kemeny_ctmc(&q, 0, 20_000, &RngStream::new(11, 0)).unwrap();
        let exact = 1.0 / 3.0;
        assert!((est.target_exact.unwrap() - exact).abs() < 1e-12);
        assert!(est.z_score.unwrap().abs() <= 4.0, "{est:?}");
    }

    #[test]
    fn occupation_lemma_holds_with_pi_start_and_target() {
        let p = TransitionMatrix::validate(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let zs = verify_occupation_lemma_dtmc(&p, 20_000, &RngStream::new(42, 0)).unwrap();
        for z in zs {
            assert!(z.abs() <= 4.0, "{z}");
        }
    }

    #[test]
    fn occupation_lemma_holds_in_continuous_time() {
        let q = GeneratorMatrix::validate(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        let zs = verify_occupation_lemma_ctmc(&q, 20_000, &RngStream::new(42, 0)).unwrap();
        for z in zs {
            assert!(z.abs() <= 4.0, "{z}");
        }
    }

    #[test]
    fn occupation_control_breaks_with_fixed_target() {
        // start 1, target 3 on the deterministic 3-cycle:
        // E[N(2)] = 1 but pi_2 E[S] = 2/3
        let p = cycle3();
        let zs = occupation_control_fixed_target(&p, 0, 2, 5_000, &RngStream::new(42, 0)).unwrap();
        assert!(zs.iter().any(|z| z.abs() > 4.0), "{zs:?}");
    }

    #[test]
    fn diffusion_hitting_estimate_is_in_range() {
        let spec = DiffusionSpec::new(
            Expr::parse("1/x").unwrap(),
            Expr::parse("1").unwrap(),
            (0.0, 1.0),
            Boundary::Entrance,
            Boundary::Reflecting,
            None,
        )
        .unwrap();
        let a = DiffusionAnalysis::build(spec).unwrap();
        let est =
            estimate_hitting_diffusion(&a, 1.0, 0.5, 1e-3, 0.04, 800, &RngStream::new(42, 0))
                .unwrap();
        let exact = 5.0 / 12.0;
        assert!((est.mean - exact).abs() / exact < 0.25, "{est:?}");

        // immediate absorption inside the band
        let est0 =
            estimate_hitting_diffusion(&a, 0.51, 0.5, 1e-3, 0.04, 10, &RngStream::new(1, 0))
                .unwrap();
        assert_eq!(est0.mean, 0.0);

        assert!(matches!(
            estimate_hitting_diffusion(&a, 1.0, 0.5, 0.5, 0.04, 10, &RngStream::new(1, 0)),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn disjoint_stream_ids_give_different_estimates() {
        let p = two_state();
        let a = estimate_kemeny_dtmc(&p, 0, 2_000, &RngStream::new(42, 0)).unwrap();
        let b = estimate_kemeny_dtmc(&p, 0, 2_000, &RngStream::new(42, 5)).unwrap();
        assert_ne!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.target_exact, b.target_exact);
    }

    #[test]
    fn pooled_error_tightens_with_more_samples() {
        let p = two_state();
        let small = estimate_kemeny_dtmc(&p, 0, 2_000, &RngStream::new(5, 0)).unwrap();
        let large = estimate_kemeny_dtmc(&p, 0, 8_000, &RngStream::new(5, 0)).unwrap();
        assert!(large.std_error < 0.7 * small.std_error, "{small:?} {large:?}");
    }

    #[test]
    fn random_ensembles_are_valid() {
        let mut rng = RngStream::new(99, 0);
        for &density in &[0.1, 0.9] {
            for &n in &[2usize, 5, 17] {
                assert_eq!(random_transition_matrix(n, density, &mut rng).unwrap().n(), n);
                assert_eq!(random_generator_matrix(n, density, &mut rng).unwrap().n(), n);
            }
        }
    }
}
