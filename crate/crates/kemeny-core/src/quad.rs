//! Adaptive Simpson quadrature and cumulative-integral tables.
//!
//! The adaptive rule is the classic two-panel Richardson scheme: a
//! subinterval is accepted when the one-panel and two-panel estimates
//! agree, with the absolute budget shared between halves on each split.
//! Integrands with known kinks pass them as mandatory split points so
//! the rule never straddles a corner.
//!
//! `CumTable` turns an integrand into an evaluable antiderivative
//! x -> int_anchor^x f. Building it refines the interval into segments
//! that each pass the Richardson test, then stores cumulative values at
//! the segment boundaries, accumulated outward from the anchor so that
//! values near the anchor stay free of cancellation. A query integrates
//! only the short stretch between the nearest checkpoint and the query
//! point, which keeps repeated evaluation cheap and order-independent.

use crate::error::{Error, Result};

/// Recursion depth cap for one adaptive integral.
pub const MAX_DEPTH: usize = 40;

/// Mixed absolute/relative tolerance for one integral.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub const fn new(abs: f64, rel: f64) -> Tol {
        Tol { abs, rel }
    }
}

fn eval_finite<F: FnMut(f64) -> Result<f64>>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteIntegrand { x })
    }
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    abs_tol: f64,
    rel_tol: f64,
    depth: usize,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval_finite(f, lm)?;
    let frm = eval_finite(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let two = left + right;
    let delta = two - whole;
    if delta.abs() <= 15.0 * abs_tol.max(rel_tol * two.abs()) {
        return Ok(two + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure {
            context: format!("depth cap reached on [{a}, {b}]"),
        });
    }
    let half_tol = 0.5 * abs_tol;
    let l = adapt(f, a, fa, m, fm, lm, flm, left, half_tol, rel_tol, depth - 1)?;
    let r = adapt(f, m, fm, b, fb, rm, frm, right, half_tol, rel_tol, depth - 1)?;
    Ok(l + r)
}

fn integrate_piece<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tol,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = eval_finite(f, a)?;
    let fb = eval_finite(f, b)?;
    let m = 0.5 * (a + b);
    let fm = eval_finite(f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adapt(f, a, fa, b, fb, m, fm, whole, tol.abs, tol.rel, MAX_DEPTH)
}

/// Integral of `f` over [a, b] (sign-flipped if a > b), subdividing at
/// the interior `splits` first.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tol,
    splits: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = splits.iter().copied().filter(|&s| s > lo && s < hi).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(lo);
    bounds.extend_from_slice(&cuts);
    bounds.push(hi);
    let span = hi - lo;
    let mut total = 0.0;
    for w in bounds.windows(2) {
        let piece_tol = Tol::new(tol.abs * (w[1] - w[0]) / span, tol.rel);
        total += integrate_piece(&mut f, w[0], w[1], piece_tol)?;
    }
    Ok(sign * total)
}

fn fixed_simpson<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    let mut fa = eval_finite(f, a)?;
    for k in 0..panels {
        let right = if k + 1 == panels { b } else { a + (k + 1) as f64 * h };
        let left = a + k as f64 * h;
        let fm = eval_finite(f, 0.5 * (left + right))?;
        let fb = eval_finite(f, right)?;
        acc += (right - left) / 6.0 * (fa + 4.0 * fm + fb);
        fa = fb;
    }
    Ok(acc)
}

/// Adaptive integral targeting relative accuracy of the whole value: a
/// crude fixed-panel pass sizes the absolute budget first, so small
/// corners of a large integral are not refined down to the rounding
/// floor of the integrand.
pub fn integrate_scaled<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    rel: f64,
    abs_floor: f64,
    splits: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut cuts: Vec<f64> = splits.iter().copied().filter(|&s| s > lo && s < hi).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut crude = 0.0;
    let mut start = lo;
    for &cut in cuts.iter().chain(std::iter::once(&hi)) {
        crude += fixed_simpson(&mut f, start, cut, 16)?.abs();
        start = cut;
    }
    let tol = Tol::new(abs_floor.max(rel * crude), rel);
    integrate(f, a, b, tol, splits)
}

/// Checkpointed antiderivative of a fixed integrand on [lo, hi],
/// anchored so that eval(anchor) = 0.
#[derive(Debug, Clone)]
pub struct CumTable {
    nodes: Vec<f64>,
    cum: Vec<f64>,
    tol: Tol,
    span: f64,
}

struct Builder<'a, F> {
    f: &'a mut F,
    rel: f64,
    segments: Vec<(f64, f64)>, // (right endpoint, integral over segment)
    max_nodes: usize,
    context: &'static str,
}

impl<F: FnMut(f64) -> Result<f64>> Builder<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        abs_tol: f64,
        depth: usize,
    ) -> Result<()> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = eval_finite(self.f, lm)?;
        let frm = eval_finite(self.f, rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let two = left + right;
        let delta = two - whole;
        if delta.abs() <= 15.0 * abs_tol.max(self.rel * two.abs()) {
            if self.segments.len() + 2 > self.max_nodes {
                return Err(Error::QuadratureFailure {
                    context: format!("{}: node budget exhausted", self.context),
                });
            }
            self.segments.push((m, left));
            self.segments.push((b, right));
            return Ok(());
        }
        if depth == 0 {
            return Err(Error::QuadratureFailure {
                context: format!("{}: depth cap reached near {m}", self.context),
            });
        }
        self.refine(a, fa, m, fm, lm, flm, left, 0.5 * abs_tol, depth - 1)?;
        self.refine(m, fm, b, fb, rm, frm, right, 0.5 * abs_tol, depth - 1)
    }

    fn run_piece(&mut self, a: f64, b: f64, abs_tol: f64) -> Result<()> {
        if a == b {
            return Ok(());
        }
        let fa = eval_finite(self.f, a)?;
        let fb = eval_finite(self.f, b)?;
        let m = 0.5 * (a + b);
        let fm = eval_finite(self.f, m)?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.refine(a, fa, b, fb, m, fm, whole, abs_tol, 48)
    }
}

impl CumTable {
    /// Build by refining [lo, hi] until every segment passes the
    /// Richardson test. `anchor` must lie in [lo, hi]; cumulative values
    /// are accumulated outward from it.
    pub fn build<F: FnMut(f64) -> Result<f64>>(
        mut f: F,
        lo: f64,
        anchor: f64,
        hi: f64,
        tol: Tol,
        max_nodes: usize,
        context: &'static str,
    ) -> Result<CumTable> {
        assert!(lo <= anchor && anchor <= hi, "anchor outside table range");
        let span = hi - lo;
        let mut b = Builder { f: &mut f, rel: tol.rel, segments: Vec::new(), max_nodes, context };
        // seed with moderate pieces so refinement starts local
        let seed = 16usize;
        let run_side = |b: &mut Builder<'_, F>, from: f64, to: f64| -> Result<()> {
            if from == to {
                return Ok(());
            }
            for k in 0..seed {
                let a = from + (to - from) * (k as f64) / (seed as f64);
                let c = from + (to - from) * ((k + 1) as f64) / (seed as f64);
                b.run_piece(a, c, tol.abs * (c - a).abs() / span)?;
            }
            Ok(())
        };
        run_side(&mut b, lo, anchor)?;
        let left_segments = b.segments.len();
        run_side(&mut b, anchor, hi)?;

        let mut nodes = Vec::with_capacity(b.segments.len() + 1);
        let mut vals = Vec::with_capacity(b.segments.len());
        nodes.push(lo);
        for &(end, v) in &b.segments {
            nodes.push(end);
            vals.push(v);
        }
        // anchor index: left side contributed `left_segments` segments
        let ai = left_segments;
        debug_assert!((nodes[ai] - anchor).abs() <= span * 1e-15);
        nodes[ai] = anchor;
        let mut cum = vec![0.0; nodes.len()];
        for k in ai..vals.len() {
            cum[k + 1] = cum[k] + vals[k];
        }
        for k in (0..ai).rev() {
            cum[k] = cum[k + 1] - vals[k];
        }
        Ok(CumTable { nodes, cum, tol, span })
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Cumulative value at the right edge minus the left edge.
    pub fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1] - self.cum[0]
    }

    pub fn value_at_hi(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn value_at_lo(&self) -> f64 {
        self.cum[0]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cum_values(&self) -> &[f64] {
        &self.cum
    }

    fn segment_of(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|n| n.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }

    /// Antiderivative at `x` in [lo, hi]: nearest checkpoint plus a short
    /// local integral of `f` (which must be the build integrand).
    pub fn eval<F: FnMut(f64) -> Result<f64>>(&self, f: F, x: f64) -> Result<f64> {
        if x < self.lo() || x > self.hi() {
            return Err(Error::PointOutsideInterval { x });
        }
        let k = self.segment_of(x);
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        // integrate from the nearer endpoint
        let (from, base) = if x - a <= b - x { (a, self.cum[k]) } else { (b, self.cum[k + 1]) };
        if x == from {
            return Ok(base);
        }
        let tol = Tol::new(self.tol.abs * (x - from).abs() / self.span, self.tol.rel);
        let part = integrate(f, from, x, tol, &[])?;
        Ok(base + part)
    }

    /// Like `eval`, but integrates outward from the table edge when `x`
    /// falls outside [lo, hi].
    pub fn eval_extending<F: FnMut(f64) -> Result<f64>>(&self, f: F, x: f64) -> Result<f64> {
        if x < self.lo() {
            let part = integrate(f, self.lo(), x, self.tol, &[])?;
            Ok(self.cum[0] + part)
        } else if x > self.hi() {
            let part = integrate(f, self.hi(), x, self.tol, &[])?;
            Ok(self.cum[self.cum.len() - 1] + part)
        } else {
            self.eval(f, x)
        }
    }
}

/// `n` Chebyshev points of the first kind on (lo, hi), increasing;
/// never touches the endpoints.
pub fn chebyshev_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..n)
        .rev()
        .map(|i| {
            let theta = std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64);
            mid + half * theta.cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(ok(|x| x * x * x - 2.0 * x + 1.0), 0.0, 2.0, Tol::new(1e-12, 0.0), &[])
            .unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_split() {
        // |x - 0.3| over [0, 1] = 0.3^2/2 + 0.7^2/2
        let exact = 0.5 * (0.09 + 0.49);
        let v =
            integrate(ok(|x| (x - 0.3f64).abs()), 0.0, 1.0, Tol::new(1e-12, 0.0), &[0.3]).unwrap();
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(ok(|x| x), 0.0, 1.0, Tol::new(1e-12, 0.0), &[]).unwrap();
        let b = integrate(ok(|x| x), 1.0, 0.0, Tol::new(1e-12, 0.0), &[]).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(ok(|x| 1.0 / x), -1.0, 1.0, Tol::new(1e-10, 0.0), &[]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn near_singular_endpoint_converges() {
        // int 1/sqrt(x) dx with an integrable endpoint singularity kept
        // off the boundary by a cutoff; the cumulative tables (seeded and
        // deeper) own the harder 1e-12 cutoffs.
        let v = integrate(ok(|x| 1.0 / x.sqrt()), 1e-6, 1.0, Tol::new(1e-9, 1e-12), &[]).unwrap();
        assert!((v - (2.0 - 2e-3)).abs() < 1e-8, "{v}");
        let mut f = ok(|x: f64| 1.0 / x.sqrt());
        let t = CumTable::build(&mut f, 1e-12, 0.5, 1.0, Tol::new(1e-11, 1e-11), 400_000, "rsqrt")
            .unwrap();
        let whole = t.total();
        assert!((whole - (2.0 - 2e-6)).abs() < 1e-8, "{whole}");
    }

    #[test]
    fn cumulative_table_matches_closed_form() {
        let mut f = ok(|x: f64| x.cos());
        let t = CumTable::build(&mut f, -2.0, 0.0, 3.0, Tol::new(1e-12, 1e-13), 100_000, "cos")
            .unwrap();
        for &x in &[-2.0, -1.3, -0.001, 0.0, 0.4, 1.0, 2.7, 3.0] {
            let got = t.eval(&mut f, x).unwrap();
            assert!((got - x.sin()).abs() < 1e-11, "x={x} got={got}");
        }
        assert!((t.total() - (3f64.sin() - (-2f64).sin())).abs() < 1e-11);
    }

    #[test]
    fn cumulative_table_handles_singular_edge() {
        // 1/u on [1e-10, 1], anchored at 0.5: values are ln(u/0.5)
        let mut f = ok(|u: f64| 1.0 / u);
        let t = CumTable::build(&mut f, 1e-10, 0.5, 1.0, Tol::new(1e-12, 1e-12), 400_000, "1/u")
            .unwrap();
        for &u in &[1e-10, 3e-8, 1e-4, 0.02, 0.5, 0.77, 1.0] {
            let got = t.eval(&mut f, u).unwrap();
            let want = (u / 0.5f64).ln();
            assert!(
                (got - want).abs() < 1e-9 * want.abs().max(1.0),
                "u={u} got={got} want={want}"
            );
        }
    }

    #[test]
    fn table_extension_beyond_edges() {
        let mut f = ok(|_| 1.0);
        let t =
            CumTable::build(&mut f, 0.0, 0.0, 1.0, Tol::new(1e-12, 1e-13), 10_000, "1").unwrap();
        assert!((t.eval_extending(&mut f, 2.5).unwrap() - 2.5).abs() < 1e-12);
        assert!((t.eval_extending(&mut f, -1.0).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(t.eval(&mut f, 2.5), Err(Error::PointOutsideInterval { .. })));
    }

    #[test]
    fn chebyshev_points_avoid_endpoints() {
        let pts = chebyshev_points(21, 0.0, 1.0);
        assert_eq!(pts.len(), 21);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts[0] > 0.0 && pts[20] < 1.0);
    }
}
