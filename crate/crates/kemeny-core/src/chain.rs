//! Finite discrete-time Markov chains: stationary distribution, time
//! reversal, entry times and their moments, occupation matrices, and the
//! Kemeny function
//!
//! ```text
//! K(x) = sum_z pi_z E^x[D_z],    D_z = min{ n >= 0 : X_n = z },
//! ```
//!
//! which is constant in x for every irreducible chain. The common value
//! kappa is Kemeny's constant. Everything is computed from dense LU
//! solves: one (n-1)-dimensional system per target state, so the full
//! Kemeny function costs O(n^4). That is deliberate desk-scale
//! arithmetic; state counts are capped at `MAX_STATES`. (On an infinite
//! state space Kemeny's constant is always infinite, so nothing here
//! tries to approximate that case.)
//!
//! Cross-checks carried in the report: the time-reversal identity
//! K(x) = dual kappa, the fundamental-matrix trace identity
//! kappa = tr((I - P + 1 pi)^{-1}) - 1, occupation-measure duality
//! pi_x g_z(x, y) = pi_y g-hat_z(y, x), the return-time shift
//! K_T = 1 + K, and Hunter's lower bound kappa >= (n-1)/2.

use crate::error::{Error, Result};
use crate::linalg::{strongly_connected, Lu, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Hard cap on the state count; the O(n^4) full analysis is tolerable
/// below this at desk scale and painful above it.
pub const MAX_STATES: usize = 2000;

/// Row-sum slack within which rows are renormalized instead of rejected.
pub const ROW_SUM_SLACK: f64 = 1e-9;

/// Validated row-stochastic transition matrix of an irreducible chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    p: Mat,
}

impl TransitionMatrix {
    /// Validate a raw square matrix: entries in [0, 1], rows summing to 1
    /// within `ROW_SUM_SLACK` (then renormalized), and a strongly
    /// connected positive-entry digraph.
    pub fn validate(rows: &[Vec<f64>]) -> Result<TransitionMatrix> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewStates { n });
        }
        if n > MAX_STATES {
            return Err(Error::TooManyStates { n, max: MAX_STATES });
        }
        let mut p = Mat::from_rows(rows)?;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = p[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_SLACK {
                return Err(Error::RowSumViolation { row: i, sum, slack: ROW_SUM_SLACK });
            }
            for j in 0..n {
                p[(i, j)] /= sum;
            }
        }
        if !strongly_connected(n, |x, y| p[(x, y)] > 0.0) {
            return Err(Error::NotIrreducible);
        }
        Ok(TransitionMatrix { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.p[(x, y)]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        self.p.row(x)
    }

    fn check_state(&self, z: usize) -> Result<()> {
        if z >= self.n {
            return Err(Error::StateOutOfRange { state: z, n: self.n });
        }
        Ok(())
    }
}

/// Stationary distribution pi with pi P = pi and sum(pi) = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pi: Vec<f64>,
}

impl StationaryDistribution {
    pub(crate) fn from_checked(pi: Vec<f64>) -> StationaryDistribution {
        StationaryDistribution { pi }
    }

    pub fn probs(&self) -> &[f64] {
        &self.pi
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.pi[x]
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

/// Mean (and optionally second-moment) entry times into one target.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimeTable {
    pub target: usize,
    pub mean: Vec<f64>,
    pub second_moment: Option<Vec<f64>>,
}

/// Expected visit counts `g[x][y] = E^x[N_{D_z}(y)]` before the target.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationMatrix {
    pub target: usize,
    n: usize,
    g: Vec<f64>,
}

impl OccupationMatrix {
    pub fn visits(&self, x: usize, y: usize) -> f64 {
        self.g[x * self.n + y]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|x| self.g[x * self.n..(x + 1) * self.n].iter().sum()).collect()
    }
}

/// Kemeny function values plus the identity-check residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KemenyReport {
    pub k_values: Vec<f64>,
    pub kappa: f64,
    pub spread: f64,
    pub residuals: BTreeMap<String, f64>,
}

/// Solve pi P = pi, sum(pi) = 1 by replacing one equation of the
/// transposed fixed-point system with the normalization row.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<StationaryDistribution> {
    let n = p.n;
    let mut a = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = p.p[(j, i)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = Lu::factor(&a)?.solve(&b);
    // invariants: strictly positive, normalized, residual small
    let mut resid: f64 = 0.0;
    for (j, &pj) in pi.iter().enumerate() {
        if pj.is_nan() || pj <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let col: f64 = pi.iter().enumerate().map(|(i, v)| v * p.p[(i, j)]).sum();
        resid = resid.max((col - pj).abs());
    }
    if resid > 1e-10 {
        return Err(Error::SingularSystem);
    }
    Ok(StationaryDistribution::from_checked(pi))
}

/// Time-reversed (pi-dual) chain: `P-hat[x][y] = P[y][x] pi_y / pi_x`.
pub fn dual_chain(p: &TransitionMatrix, pi: &StationaryDistribution) -> TransitionMatrix {
    let n = p.n;
    let mut q = Mat::zeros(n);
    for x in 0..n {
        for y in 0..n {
            q[(x, y)] = p.p[(y, x)] * pi.prob(y) / pi.prob(x);
        }
    }
    TransitionMatrix { n, p: q }
}

fn restricted_system(p: &TransitionMatrix, z: usize) -> (Vec<usize>, Lu) {
    let n = p.n;
    let keep: Vec<usize> = (0..n).filter(|&x| x != z).collect();
    let m = keep.len();
    let mut a = Mat::zeros(m);
    for (i, &x) in keep.iter().enumerate() {
        for (j, &y) in keep.iter().enumerate() {
            a[(i, j)] = if i == j { 1.0 } else { 0.0 } - p.p[(x, y)];
        }
    }
    // irreducible substochastic restriction is nonsingular
    let lu = Lu::factor(&a).expect("restricted entry-time system must be nonsingular");
    (keep, lu)
}

/// Mean entry times `E^x[D_z]`: solve (I - P restricted to E \ {z}) m = 1.
pub fn mean_entry_times(p: &TransitionMatrix, z: usize) -> Result<HittingTimeTable> {
    p.check_state(z)?;
    let (keep, lu) = restricted_system(p, z);
    let rhs = vec![1.0; keep.len()];
    let sol = lu.solve(&rhs);
    let mut mean = vec![0.0; p.n];
    for (i, &x) in keep.iter().enumerate() {
        if !sol[i].is_finite() || sol[i] < 0.0 {
            return Err(Error::SingularSystem);
        }
        mean[x] = sol[i];
    }
    Ok(HittingTimeTable { target: z, mean, second_moment: None })
}

/// Second moments `E^x[D_z^2]` via the one-step recursion
/// `m2(x) = sum_y P[x][y] (1 + 2 m1(y) + m2(y))`.
pub fn entry_time_second_moments(
    p: &TransitionMatrix,
    z: usize,
    m1: &HittingTimeTable,
) -> Result<HittingTimeTable> {
    p.check_state(z)?;
    assert_eq!(m1.target, z, "first-moment table targets a different state");
    let (keep, lu) = restricted_system(p, z);
    let rhs: Vec<f64> = keep
        .iter()
        .map(|&x| {
            let mut r = 1.0;
            for y in 0..p.n {
                r += 2.0 * p.p[(x, y)] * m1.mean[y];
            }
            r
        })
        .collect();
    let sol = lu.solve(&rhs);
    let mut m2 = vec![0.0; p.n];
    for (i, &x) in keep.iter().enumerate() {
        if !sol[i].is_finite() || sol[i] < 0.0 {
            return Err(Error::SingularSystem);
        }
        m2[x] = sol[i];
    }
    Ok(HittingTimeTable { target: z, mean: m1.mean.clone(), second_moment: Some(m2) })
}

/// Expected visits before hitting z: the inverse of the restricted
/// (I - P), embedded with zero row and column at z. The diagonal counts
/// the visit at time 0.
pub fn occupation_matrix(p: &TransitionMatrix, z: usize) -> Result<OccupationMatrix> {
    p.check_state(z)?;
    let n = p.n;
    let (keep, lu) = restricted_system(p, z);
    let m = keep.len();
    let mut g = vec![0.0; n * n];
    let mut e = vec![0.0; m];
    for (j, &y) in keep.iter().enumerate() {
        e[j] = 1.0;
        let col = lu.solve(&e);
        e[j] = 0.0;
        for (i, &x) in keep.iter().enumerate() {
            g[x * n + y] = col[i];
        }
    }
    Ok(OccupationMatrix { target: z, n, g })
}

/// Max over (x, y) of `|pi_x g[x][y] - pi_y g-hat[y][x]|` for target z,
/// where g-hat is the occupation matrix of the dual chain.
pub fn occupation_duality_residual(
    p: &TransitionMatrix,
    pi: &StationaryDistribution,
    z: usize,
) -> Result<f64> {
    let g = occupation_matrix(p, z)?;
    let dual = dual_chain(p, pi);
    let gh = occupation_matrix(&dual, z)?;
    let n = p.n;
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            let lhs = pi.prob(x) * g.visits(x, y);
            let rhs = pi.prob(y) * gh.visits(y, x);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

fn entry_time_tables(p: &TransitionMatrix) -> Result<Vec<HittingTimeTable>> {
    (0..p.n).into_par_iter().map(|z| mean_entry_times(p, z)).collect()
}

/// K alone, without the identity residuals; used as the exact target by
/// the Monte Carlo oracles.
pub(crate) fn kemeny_vector(p: &TransitionMatrix) -> Result<(StationaryDistribution, Vec<f64>)> {
    let pi = stationary_distribution(p)?;
    let k = kemeny_from_tables(&entry_time_tables(p)?, &pi);
    Ok((pi, k))
}

// fixed-order reduction: K(x) = sum_z pi_z m_z(x)
fn kemeny_from_tables(tables: &[HittingTimeTable], pi: &StationaryDistribution) -> Vec<f64> {
    let n = tables.len();
    let mut k = vec![0.0; n];
    for (z, table) in tables.iter().enumerate() {
        let w = pi.prob(z);
        for (acc, m) in k.iter_mut().zip(&table.mean) {
            *acc += w * m;
        }
    }
    k
}

/// Full Kemeny analysis: per-target entry-time solves for K, the
/// pi-average kappa, the spread, and the identity residuals.
pub fn kemeny_function(p: &TransitionMatrix) -> Result<KemenyReport> {
    let n = p.n;
    let pi = stationary_distribution(p)?;
    let tables = entry_time_tables(p)?;
    let k = kemeny_from_tables(&tables, &pi);
    let kappa: f64 = (0..n).map(|x| pi.prob(x) * k[x]).sum();
    let spread = k.iter().cloned().fold(f64::MIN, f64::max)
        - k.iter().cloned().fold(f64::MAX, f64::min);

    let dual = dual_chain(p, &pi);
    let k_dual = kemeny_from_tables(&entry_time_tables(&dual)?, &pi);
    let kappa_dual: f64 = (0..n).map(|x| pi.prob(x) * k_dual[x]).sum();
    let dual_identity =
        k.iter().map(|&v| (v - kappa_dual).abs()).fold(0.0, f64::max);

    // independent oracle: kappa = tr((I - P + 1 pi)^{-1}) - 1
    let mut a = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = if i == j { 1.0 } else { 0.0 } - p.p[(i, j)] + pi.prob(j);
        }
    }
    let trace = Lu::factor(&a)?.inverse_trace();
    let trace_identity = (kappa - (trace - 1.0)).abs();

    // return times: E^z[T_z] recomputed one-step, must equal 1/pi_z,
    // giving K_T(x) = 1 + K(x)
    let mut return_time_identity: f64 = 0.0;
    let expected_return: Vec<f64> = (0..n)
        .map(|z| 1.0 + (0..n).map(|y| p.p[(z, y)] * tables[z].mean[y]).sum::<f64>())
        .collect();
    for x in 0..n {
        let mut k_t = pi.prob(x) * expected_return[x];
        for (z, table) in tables.iter().enumerate() {
            if z != x {
                k_t += pi.prob(z) * table.mean[x];
            }
        }
        return_time_identity = return_time_identity.max((k_t - (1.0 + k[x])).abs());
    }

    let occupation_duality = (0..n)
        .into_par_iter()
        .map(|z| occupation_duality_residual(p, &pi, z))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let hunter_margin = kappa - (n as f64 - 1.0) / 2.0;

    let mut residuals = BTreeMap::new();
    residuals.insert("dual_identity".into(), dual_identity);
    residuals.insert("trace_identity".into(), trace_identity);
    residuals.insert("occupation_duality".into(), occupation_duality);
    residuals.insert("return_time_identity".into(), return_time_identity);
    residuals.insert("hunter_margin".into(), hunter_margin);

    Ok(KemenyReport { k_values: k, kappa, spread, residuals })
}
