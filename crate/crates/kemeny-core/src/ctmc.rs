//! Finite continuous-time Markov chains given by a conservative rate
//! matrix Q: stationary distribution (pi Q = 0), the dual generator,
//! mean hitting times from linear solves, and the Kemeny function in
//! real time units. No matrix exponentials anywhere; every quantity is
//! a linear solve against Q.
//!
//! Uniformization is kept as a cross-check oracle: with lambda at least
//! the largest exit rate, P = I + Q/lambda is a valid discrete chain and
//! `E^x[T_z] = E^x[D_z] / lambda` must hold for every pair, tying the
//! continuous-time answers back to the discrete-time solver.

use crate::chain::{
    self, HittingTimeTable, KemenyReport, StationaryDistribution, TransitionMatrix, MAX_STATES,
};
use crate::error::{Error, Result};
use crate::linalg::{strongly_connected, Lu, Mat};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Same shape as the discrete-time report; `k_values` and `kappa` are in
/// real time units rather than steps.
pub type CtKemenyReport = KemenyReport;

/// Factor applied to the max exit rate when no uniformization rate is
/// given: strictly admissible with margin.
pub const DEFAULT_UNIFORMIZATION_MARGIN: f64 = 1.1;

/// Validated conservative generator of an irreducible chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    n: usize,
    q: Mat,
}

impl GeneratorMatrix {
    /// Validate a raw square rate matrix: nonnegative off-diagonal, rows
    /// summing to zero (within 1e-12 relative to the row scale, after
    /// which the diagonal is pinned to minus the off-diagonal sum), and
    /// a strongly connected positive-rate digraph.
    pub fn validate(rows: &[Vec<f64>]) -> Result<GeneratorMatrix> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewStates { n });
        }
        if n > MAX_STATES {
            return Err(Error::TooManyStates { n, max: MAX_STATES });
        }
        let mut q = Mat::from_rows(rows)?;
        for i in 0..n {
            let mut scale: f64 = 1.0;
            let mut sum = 0.0;
            for j in 0..n {
                let v = q[(i, j)];
                if !v.is_finite() || (i != j && v < 0.0) {
                    return Err(Error::NegativeOffDiagonal { row: i, col: j, value: v });
                }
                scale = scale.max(v.abs());
                sum += v;
            }
            let slack = 1e-12 * scale;
            if sum.abs() > slack {
                return Err(Error::RowSumViolation { row: i, sum, slack });
            }
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
            q[(i, i)] = -off;
        }
        if !strongly_connected(n, |x, y| x != y && q[(x, y)] > 0.0) {
            return Err(Error::NotIrreducible);
        }
        Ok(GeneratorMatrix { n, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.q[(x, y)]
    }

    /// Largest exit rate `max_x |q[x][x]|`.
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.n).map(|x| self.q[(x, x)].abs()).fold(0.0, f64::max)
    }

    fn check_state(&self, z: usize) -> Result<()> {
        if z >= self.n {
            return Err(Error::StateOutOfRange { state: z, n: self.n });
        }
        Ok(())
    }
}

/// Solve pi Q = 0, sum(pi) = 1. The system is scaled by the max exit
/// rate first so that pi(cQ) is bitwise identical to pi(Q) whenever the
/// entrywise quotients are exact (in particular for c a power of two).
pub fn stationary_ct(q: &GeneratorMatrix) -> Result<StationaryDistribution> {
    let n = q.n;
    let lambda = q.max_exit_rate();
    if lambda <= 0.0 {
        return Err(Error::SingularSystem);
    }
    let mut a = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = q.q[(j, i)] / lambda;
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let pi = Lu::factor(&a)?.solve(&b);
    let mut resid: f64 = 0.0;
    for (j, &pj) in pi.iter().enumerate() {
        if pj.is_nan() || pj <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let col: f64 = pi.iter().enumerate().map(|(i, v)| v * q.q[(i, j)] / lambda).sum();
        resid = resid.max(col.abs());
    }
    if resid > 1e-10 {
        return Err(Error::SingularSystem);
    }
    Ok(StationaryDistribution::from_checked(pi))
}

/// Dual generator `Q-hat[x][y] = Q[y][x] pi_y / pi_x`; satisfies
/// `diag(pi) Q = Q-hat^T diag(pi)`.
pub fn dual_generator(q: &GeneratorMatrix, pi: &StationaryDistribution) -> GeneratorMatrix {
    let n = q.n;
    let mut d = Mat::zeros(n);
    for x in 0..n {
        for y in 0..n {
            d[(x, y)] = q.q[(y, x)] * pi.prob(y) / pi.prob(x);
        }
    }
    GeneratorMatrix { n, q: d }
}

/// Mean hitting times `E^x[T_z]`: solve (-Q restricted to E \ {z}) m = 1.
pub fn mean_hitting_times_ct(q: &GeneratorMatrix, z: usize) -> Result<HittingTimeTable> {
    q.check_state(z)?;
    let n = q.n;
    let keep: Vec<usize> = (0..n).filter(|&x| x != z).collect();
    let m = keep.len();
    let mut a = Mat::zeros(m);
    for (i, &x) in keep.iter().enumerate() {
        for (j, &y) in keep.iter().enumerate() {
            a[(i, j)] = -q.q[(x, y)];
        }
    }
    let sol = Lu::factor(&a)?.solve(&vec![1.0; m]);
    let mut mean = vec![0.0; n];
    for (i, &x) in keep.iter().enumerate() {
        if !sol[i].is_finite() || sol[i] < 0.0 {
            return Err(Error::SingularSystem);
        }
        mean[x] = sol[i];
    }
    Ok(HittingTimeTable { target: z, mean, second_moment: None })
}

fn kemeny_values_ct(q: &GeneratorMatrix, pi: &StationaryDistribution) -> Result<Vec<f64>> {
    let n = q.n;
    let tables: Vec<HittingTimeTable> =
        (0..n).into_par_iter().map(|z| mean_hitting_times_ct(q, z)).collect::<Result<_>>()?;
    let mut k = vec![0.0; n];
    for (z, table) in tables.iter().enumerate() {
        let w = pi.prob(z);
        for (acc, m) in k.iter_mut().zip(&table.mean) {
            *acc += w * m;
        }
    }
    Ok(k)
}

/// K alone, used as the exact target by the Monte Carlo oracles.
pub(crate) fn kemeny_vector_ct(
    q: &GeneratorMatrix,
) -> Result<(StationaryDistribution, Vec<f64>)> {
    let pi = stationary_ct(q)?;
    let k = kemeny_values_ct(q, &pi)?;
    Ok((pi, k))
}

/// Kemeny function in real time, with the dual-kappa and uniformization
/// residuals attached.
pub fn kemeny_function_ct(q: &GeneratorMatrix) -> Result<CtKemenyReport> {
    let n = q.n;
    let pi = stationary_ct(q)?;
    let k = kemeny_values_ct(q, &pi)?;
    let kappa: f64 = (0..n).map(|x| pi.prob(x) * k[x]).sum();
    let spread = k.iter().cloned().fold(f64::MIN, f64::max)
        - k.iter().cloned().fold(f64::MAX, f64::min);

    let dual = dual_generator(q, &pi);
    let k_dual = kemeny_values_ct(&dual, &pi)?;
    let kappa_dual: f64 = (0..n).map(|x| pi.prob(x) * k_dual[x]).sum();

    let lambda = DEFAULT_UNIFORMIZATION_MARGIN * q.max_exit_rate();
    let uniformization = uniformization_crosscheck(q, lambda)?;

    let mut residuals = BTreeMap::new();
    residuals.insert("dual_kappa".into(), (kappa - kappa_dual).abs());
    residuals.insert("uniformization".into(), uniformization);

    Ok(CtKemenyReport { k_values: k, kappa, spread, residuals })
}

/// Uniformization oracle: build P = I + Q/lambda, compare
/// `E^x[D_z]/lambda` under P against `E^x[T_z]` under Q for every pair, and
/// the two Kemeny functions likewise. Returns the max discrepancy.
pub fn uniformization_crosscheck(q: &GeneratorMatrix, lambda: f64) -> Result<f64> {
    let required = q.max_exit_rate();
    if lambda.is_nan() || lambda <= 0.0 || lambda < required {
        return Err(Error::RateTooSmall { rate: lambda, required });
    }
    let n = q.n;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| {
                    let jump = q.q[(x, y)] / lambda;
                    if x == y {
                        1.0 + jump
                    } else {
                        jump
                    }
                })
                .collect()
        })
        .collect();
    let p = TransitionMatrix::validate(&rows)?;

    let mut worst: f64 = 0.0;
    for z in 0..n {
        let ct = mean_hitting_times_ct(q, z)?;
        let dt = chain::mean_entry_times(&p, z)?;
        for x in 0..n {
            worst = worst.max((ct.mean[x] - dt.mean[x] / lambda).abs());
        }
    }

    let pi = stationary_ct(q)?;
    let k_ct = kemeny_values_ct(q, &pi)?;
    let tables: Vec<HittingTimeTable> =
        (0..n).map(|z| chain::mean_entry_times(&p, z)).collect::<Result<_>>()?;
    for (x, kc) in k_ct.iter().enumerate() {
        let k_dt: f64 = (0..n).map(|z| pi.prob(z) * tables[z].mean[x]).sum();
        worst = worst.max((kc - k_dt / lambda).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> GeneratorMatrix {
        GeneratorMatrix::validate(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap()
    }

    fn cycle3() -> GeneratorMatrix {
        GeneratorMatrix::validate(&[
            vec![-1.0, 1.0, 0.0],
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
        ])
        .unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(GeneratorMatrix::validate(&[vec![-1.0, 1.0], vec![2.0, -2.0]]).is_ok());
        assert_eq!(
            GeneratorMatrix::validate(&[vec![-1.0, 1.0], vec![0.0, 0.0]]).unwrap_err(),
            Error::NotIrreducible
        );
        assert!(matches!(
            GeneratorMatrix::validate(&[vec![-1.0, 0.5], vec![2.0, -2.0]]).unwrap_err(),
            Error::RowSumViolation { row: 0, .. }
        ));
        assert!(matches!(
            GeneratorMatrix::validate(&[vec![1.0, -1.0], vec![2.0, -2.0]]).unwrap_err(),
            Error::NegativeOffDiagonal { .. }
        ));
    }

    #[test]
    fn stationary_closed_forms() {
        let pi = stationary_ct(&two_state()).unwrap();
        assert!((pi.prob(0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((pi.prob(1) - 1.0 / 3.0).abs() < 1e-14);

        let pi = stationary_ct(&cycle3()).unwrap();
        for x in 0..3 {
            assert!((pi.prob(x) - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dual_generator_properties() {
        let q = cycle3();
        let pi = stationary_ct(&q).unwrap();
        let d = dual_generator(&q, &pi);
        // reversed cycle
        assert!((d.rate(0, 2) - 1.0).abs() < 1e-14);
        assert!((d.rate(2, 1) - 1.0).abs() < 1e-14);
        assert!((d.rate(1, 0) - 1.0).abs() < 1e-14);

        // detailed-balance form diag(pi) Q = Q-hat^T diag(pi), involution
        let dd = dual_generator(&d, &pi);
        for x in 0..3 {
            for y in 0..3 {
                let lhs = pi.prob(x) * q.rate(x, y);
                let rhs = d.rate(y, x) * pi.prob(y);
                assert!((lhs - rhs).abs() < 1e-14);
                assert!((dd.rate(x, y) - q.rate(x, y)).abs() < 1e-14);
            }
        }

        let q2 = two_state();
        let pi2 = stationary_ct(&q2).unwrap();
        let d2 = dual_generator(&q2, &pi2);
        for x in 0..2 {
            for y in 0..2 {
                assert!((d2.rate(x, y) - q2.rate(x, y)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hitting_times_closed_forms() {
        let q = two_state();
        let t = mean_hitting_times_ct(&q, 1).unwrap();
        assert!((t.mean[0] - 1.0).abs() < 1e-14);
        assert_eq!(t.mean[1], 0.0);
        let t = mean_hitting_times_ct(&q, 0).unwrap();
        assert!((t.mean[1] - 0.5).abs() < 1e-14);

        let t = mean_hitting_times_ct(&cycle3(), 2).unwrap();
        assert!((t.mean[0] - 2.0).abs() < 1e-13);
        assert!((t.mean[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn kemeny_closed_forms() {
        let r = kemeny_function_ct(&two_state()).unwrap();
        for &k in &r.k_values {
            assert!((k - 1.0 / 3.0).abs() < 1e-13);
        }
        assert!(r.spread <= 1e-13);
        assert!(r.residuals["dual_kappa"] <= 1e-13);
        assert!(r.residuals["uniformization"] <= 1e-12);

        let r = kemeny_function_ct(&cycle3()).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-13);
    }

    #[test]
    fn time_scaling_is_exact_for_powers_of_two() {
        let q = two_state();
        let q2 = GeneratorMatrix::validate(&[vec![-2.0, 2.0], vec![4.0, -4.0]]).unwrap();
        let r = kemeny_function_ct(&q).unwrap();
        let r2 = kemeny_function_ct(&q2).unwrap();
        for x in 0..2 {
            assert_eq!(r2.k_values[x], r.k_values[x] / 2.0);
        }
        assert_eq!(r2.kappa, r.kappa / 2.0);
    }

    #[test]
    fn uniformization_examples() {
        let q = two_state();
        // lambda = 2: P = [[0.5, 0.5], [1, 0]], E^0[D_1] = 2 steps -> 1 time unit
        let resid = uniformization_crosscheck(&q, 2.0).unwrap();
        assert!(resid <= 1e-12, "{resid}");
        // a larger rate gives the same continuous-time answers
        let resid = uniformization_crosscheck(&q, 4.0).unwrap();
        assert!(resid <= 1e-12);

        assert!(matches!(
            uniformization_crosscheck(&q, 1.5),
            Err(Error::RateTooSmall { .. })
        ));
    }
}
