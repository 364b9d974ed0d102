//! One-dimensional regular diffusions dX = drift(X) dt + sigma(X) dW on
//! an interval, with reflecting or entrance boundaries.
//!
//! The analysis is built entirely from the scale function and the speed
//! measure. With an anchor point x0 inside the interval,
//!
//! ```text
//! s'(u)  = exp(-int_{x0}^u 2 drift / sigma^2),
//! m'(u)  = 2 / (sigma(u)^2 s'(u)),      M = int m',
//! S(x)   = M * int_{x0}^x s'(u) du,     pi = m' / M.
//! ```
//!
//! The normalization (pi a probability, S premultiplied by the total
//! speed mass M) makes the local time at y before hitting z an
//! occupation density with respect to pi, so the Green function is a
//! plain min/max of scale differences:
//!
//! ```text
//! v_z(x, y) = min(S(x), S(y)) - S(z)   for x, y >= z,
//! v_z(x, y) = S(z) - max(S(x), S(y))   for x, y <= z,
//! v_z(x, y) = 0                        when x, y straddle z,
//! ```
//!
//! giving `E^x[T_z] = int v_z(x, y) pi(dy)`, the Kemeny profile
//! `K(x) = int E^x[T_z] pi(dz)`, the metric `h(x, y) = |S(x) - S(y)|`
//! (h = d^2), and gamma = double pi-integral of h with the identity
//! kappa = gamma / 2 for these reversible processes.
//!
//! Unbounded intervals are compactified through rational maps and all
//! antiderivatives live in the compact coordinate; infinite endpoints
//! and finite entrance endpoints are cut at 1e-12 of the (compact) span
//! so no expression is ever evaluated at a singular boundary point.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::{chebyshev_points, integrate, integrate_scaled, CumTable, Tol};
use serde::{Deserialize, Serialize};

/// Relative cutoff keeping integrals away from non-reflecting endpoints.
pub const EDGE_CUT: f64 = 1e-12;

/// Points probed when validating coefficient expressions.
pub const PROBE_POINTS: usize = 1001;

/// Default number of Kemeny-profile grid points.
pub const DEFAULT_GRID_POINTS: usize = 21;

/// Overflow guard for gamma; anything past this reports as divergent.
const GAMMA_GUARD: f64 = 1e15;

const TABLE_TOL: Tol = Tol::new(1e-13, 5e-13);
const MAX_TABLE_NODES: usize = 600_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Reflecting,
    Entrance,
}

/// User-declared diffusion: coefficients, interval, boundary behavior,
/// and the anchor x0 normalizing the scale function. Validated at
/// construction; `left`/`right` may be infinite (never with a
/// reflecting boundary on that side).
#[derive(Debug, Clone)]
pub struct DiffusionSpec {
    drift: Expr,
    sigma: Expr,
    left: f64,
    right: f64,
    left_boundary: Boundary,
    right_boundary: Boundary,
    anchor: f64,
    sigma_probe: SigmaProbe,
}

/// Extremes of sigma over the validation grid; a tiny minimum near an
/// endpoint is legal but worth a caller-side warning.
#[derive(Debug, Clone, Copy)]
pub struct SigmaProbe {
    pub min_x: f64,
    pub min_value: f64,
    pub max_value: f64,
}

impl DiffusionSpec {
    /// Validate and resolve the anchor (default: interval midpoint; half
    /// a unit inward from the finite end when one side is infinite; 0
    /// when both are).
    pub fn new(
        drift: Expr,
        sigma: Expr,
        interval: (f64, f64),
        left_boundary: Boundary,
        right_boundary: Boundary,
        anchor: Option<f64>,
    ) -> Result<DiffusionSpec> {
        let (left, right) = interval;
        if left.is_nan() || right.is_nan() || left >= right {
            return Err(Error::InvalidGrid { reason: "interval must satisfy left < right" });
        }
        if (left.is_infinite() && left_boundary == Boundary::Reflecting)
            || (right.is_infinite() && right_boundary == Boundary::Reflecting)
        {
            return Err(Error::ReflectingAtInfinity);
        }
        let anchor = anchor.unwrap_or(match (left.is_finite(), right.is_finite()) {
            (true, true) => 0.5 * (left + right),
            (true, false) => left + 0.5,
            (false, true) => right - 0.5,
            (false, false) => 0.0,
        });
        if !anchor.is_finite() || !(left < anchor && anchor < right) {
            return Err(Error::InvalidAnchor { anchor });
        }
        let mut spec = DiffusionSpec {
            drift,
            sigma,
            left,
            right,
            left_boundary,
            right_boundary,
            anchor,
            sigma_probe: SigmaProbe { min_x: anchor, min_value: f64::MAX, max_value: 0.0 },
        };
        // probe the coefficients across the (compactified) interval
        let map = spec.map();
        let (t_lo, t_hi) = map.raw_range();
        for t in chebyshev_points(PROBE_POINTS, t_lo, t_hi) {
            let x = map.x_of(t);
            spec.drift.eval(x)?;
            let s = spec.sigma.eval(x)?;
            if s <= 0.0 {
                return Err(Error::SigmaVanishes { x, value: s });
            }
            if s < spec.sigma_probe.min_value {
                spec.sigma_probe = SigmaProbe { min_x: x, min_value: s, ..spec.sigma_probe };
            }
            spec.sigma_probe.max_value = spec.sigma_probe.max_value.max(s);
        }
        Ok(spec)
    }

    /// Extremes of sigma over the validation grid.
    pub fn sigma_probe(&self) -> SigmaProbe {
        self.sigma_probe
    }

    pub fn drift(&self) -> &Expr {
        &self.drift
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.left, self.right)
    }

    pub fn boundaries(&self) -> (Boundary, Boundary) {
        (self.left_boundary, self.right_boundary)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn is_bounded(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }

    fn map(&self) -> DomainMap {
        match (self.left.is_finite(), self.right.is_finite()) {
            (true, true) => DomainMap::Bounded { lo: self.left, hi: self.right },
            (true, false) => DomainMap::LeftBounded { lo: self.left },
            (false, true) => DomainMap::RightBounded { hi: self.right },
            (false, false) => DomainMap::Unbounded { center: self.anchor },
        }
    }

    /// Interval truncated to [-r, r] on infinite sides, which become
    /// reflecting; the anchor is kept when it stays interior.
    pub fn truncated(&self, r: f64) -> Result<DiffusionSpec> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidGrid { reason: "truncation radius must be positive" });
        }
        let (left, lb) = if self.left.is_infinite() {
            (-r, Boundary::Reflecting)
        } else {
            (self.left, self.left_boundary)
        };
        let (right, rb) = if self.right.is_infinite() {
            (r, Boundary::Reflecting)
        } else {
            (self.right, self.right_boundary)
        };
        let anchor = if left < self.anchor && self.anchor < right { Some(self.anchor) } else { None };
        DiffusionSpec::new(self.drift.clone(), self.sigma.clone(), (left, right), lb, rb, anchor)
    }
}

/// Compactification of the state interval. All antiderivative tables
/// live in the t coordinate; for bounded intervals t is x itself.
#[derive(Debug, Clone, Copy)]
enum DomainMap {
    Bounded { lo: f64, hi: f64 },
    LeftBounded { lo: f64 },   // x = lo + t/(1-t),        t in (0, 1)
    RightBounded { hi: f64 },  // x = hi - (1-t)/t,        t in (0, 1)
    Unbounded { center: f64 }, // x = center + t/(1-t^2),  t in (-1, 1)
}

impl DomainMap {
    fn raw_range(&self) -> (f64, f64) {
        match self {
            DomainMap::Bounded { lo, hi } => (*lo, *hi),
            DomainMap::LeftBounded { .. } | DomainMap::RightBounded { .. } => (0.0, 1.0),
            DomainMap::Unbounded { .. } => (-1.0, 1.0),
        }
    }

    fn x_of(&self, t: f64) -> f64 {
        match self {
            DomainMap::Bounded { .. } => t,
            DomainMap::LeftBounded { lo } => lo + t / (1.0 - t),
            DomainMap::RightBounded { hi } => hi - (1.0 - t) / t,
            DomainMap::Unbounded { center } => center + t / ((1.0 - t) * (1.0 + t)),
        }
    }

    fn dx_dt(&self, t: f64) -> f64 {
        match self {
            DomainMap::Bounded { .. } => 1.0,
            DomainMap::LeftBounded { .. } => {
                let d = 1.0 - t;
                1.0 / (d * d)
            }
            DomainMap::RightBounded { .. } => 1.0 / (t * t),
            DomainMap::Unbounded { .. } => {
                // (1-t)(1+t) instead of 1-t^2: exact near both edges
                let d = (1.0 - t) * (1.0 + t);
                (1.0 + t * t) / (d * d)
            }
        }
    }

    fn t_of(&self, x: f64) -> f64 {
        match self {
            DomainMap::Bounded { .. } => x,
            DomainMap::LeftBounded { lo } => {
                let w = x - lo;
                w / (1.0 + w)
            }
            DomainMap::RightBounded { hi } => 1.0 / (1.0 + (hi - x)),
            DomainMap::Unbounded { center } => {
                let w = x - center;
                2.0 * w / (1.0 + (1.0 + 4.0 * w * w).sqrt())
            }
        }
    }
}

/// Derived diffusion quantities: total speed mass, scale function,
/// stationary density and CDF, all evaluable on the interval. Immutable
/// after construction and safe to share.
#[derive(Debug, Clone)]
pub struct DiffusionAnalysis {
    spec: DiffusionSpec,
    map: DomainMap,
    t_lo: f64,
    t_hi: f64,
    log_scale: CumTable, // B(t) = int 2 drift/sigma^2 dx, in t coordinates
    mass_cum: CumTable,  // speed mass from the left edge
    scale_cum: CumTable, // raw scale int s' dx over the working window
    mass: f64,
    window: (f64, f64), // x range on which S is evaluable
}

/// Kemeny profile over a grid plus the gamma identity diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionKemenyReport {
    pub grid: Vec<f64>,
    pub k_values: Vec<f64>,
    pub kappa: f64,
    pub gamma: f64,
    pub spread: f64,
    pub residual_gamma: f64,
}

impl DiffusionAnalysis {
    /// Derive s', m', M, S, pi by adaptive quadrature. Fails with
    /// `NotPositiveRecurrent` when the speed mass diverges.
    pub fn build(spec: DiffusionSpec) -> Result<DiffusionAnalysis> {
        let map = spec.map();
        let (raw_lo, raw_hi) = map.raw_range();
        let cut = EDGE_CUT * (raw_hi - raw_lo);
        let t_lo = if spec.left.is_finite() && spec.left_boundary == Boundary::Reflecting {
            raw_lo
        } else {
            raw_lo + cut
        };
        let t_hi = if spec.right.is_finite() && spec.right_boundary == Boundary::Reflecting {
            raw_hi
        } else {
            raw_hi - cut
        };
        let t_anchor = map.t_of(spec.anchor);

        let drift = spec.drift.clone();
        let sigma = spec.sigma.clone();
        let g = move |t: f64| -> Result<f64> {
            let x = map.x_of(t);
            let s = sigma.eval(x)?;
            Ok(2.0 * drift.eval(x)? / (s * s) * map.dx_dt(t))
        };
        let log_scale =
            CumTable::build(&g, t_lo, t_anchor, t_hi, TABLE_TOL, MAX_TABLE_NODES, "log-scale")?;

        let sigma = spec.sigma.clone();
        let ls = log_scale.clone();
        let g2 = g.clone();
        let speed = move |t: f64| -> Result<f64> {
            let x = map.x_of(t);
            let b = ls.eval(&g2, t)?;
            let sp = (-b).exp(); // s'(x)
            if sp.is_infinite() {
                return Ok(0.0); // scale explodes, speed density vanishes
            }
            let s = sigma.eval(x)?;
            Ok(2.0 / (s * s * sp) * map.dx_dt(t))
        };
        let mass_cum = CumTable::build(
            &speed,
            t_lo,
            t_lo,
            t_hi,
            TABLE_TOL,
            MAX_TABLE_NODES,
            "speed-mass",
        )
        .map_err(|e| match e {
            Error::NonFiniteIntegrand { .. } => Error::NotPositiveRecurrent,
            Error::QuadratureFailure { context } if context.contains("node budget") => {
                Error::NotPositiveRecurrent
            }
            other => other,
        })?;
        let mass = mass_cum.total();
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::NotPositiveRecurrent);
        }
        // speed mass must not concentrate against a non-reflecting edge:
        // compare the mass caught between the cutoff and ten cutoffs
        // against the total.
        let edge_fraction = |inner_t: f64, edge_cum: f64| -> Result<f64> {
            let v = mass_cum.eval(&speed, inner_t)?;
            Ok(((v - edge_cum) / mass).abs())
        };
        if t_lo > raw_lo {
            let frac = edge_fraction(raw_lo + 10.0 * cut, mass_cum.value_at_lo())?;
            if frac > 1e-6 {
                return Err(Error::NotPositiveRecurrent);
            }
        }
        if t_hi < raw_hi {
            let frac = edge_fraction(raw_hi - 10.0 * cut, mass_cum.value_at_hi())?;
            if frac > 1e-6 {
                return Err(Error::NotPositiveRecurrent);
            }
        }

        // working window for the scale table: everything but a 1e-13
        // mass sliver on infinite sides (widened to anchor +- 1)
        let t_of_anchor_pad = |x: f64| -> f64 { map.t_of(x).clamp(t_lo, t_hi) };
        let mut t_wl = t_lo;
        let mut t_wr = t_hi;
        let tail = 1e-13 * mass;
        if spec.left.is_infinite() {
            let lo_cum = mass_cum.value_at_lo();
            let nodes = mass_cum.nodes();
            let cums = mass_cum.cum_values();
            let mut k = 0;
            while k + 1 < nodes.len() && cums[k + 1] - lo_cum < tail {
                k += 1;
            }
            t_wl = nodes[k].min(t_of_anchor_pad(spec.anchor - 1.0));
        }
        if spec.right.is_infinite() {
            let hi_cum = mass_cum.value_at_hi();
            let nodes = mass_cum.nodes();
            let cums = mass_cum.cum_values();
            let mut k = nodes.len() - 1;
            while k > 0 && hi_cum - cums[k - 1] < tail {
                k -= 1;
            }
            t_wr = nodes[k].max(t_of_anchor_pad(spec.anchor + 1.0));
        }

        let ls = log_scale.clone();
        let g2 = g.clone();
        let scale_integrand = move |t: f64| -> Result<f64> {
            let b = ls.eval(&g2, t)?;
            Ok((-b).exp() * map.dx_dt(t))
        };
        let scale_cum = CumTable::build(
            &scale_integrand,
            t_wl,
            t_anchor,
            t_wr,
            TABLE_TOL,
            MAX_TABLE_NODES,
            "scale",
        )?;

        let window = (map.x_of(t_wl), map.x_of(t_wr));
        Ok(DiffusionAnalysis {
            spec,
            map,
            t_lo,
            t_hi,
            log_scale,
            mass_cum,
            scale_cum,
            mass,
            window,
        })
    }

    pub fn spec(&self) -> &DiffusionSpec {
        &self.spec
    }

    /// Total speed mass M.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// x range on which the scale function is tabulated (the full
    /// interval up to the edge cutoffs, except for far tails of an
    /// unbounded interval).
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    fn g_closure(&self) -> impl FnMut(f64) -> Result<f64> + Clone + '_ {
        let map = self.map;
        move |t: f64| -> Result<f64> {
            let x = map.x_of(t);
            let s = self.spec.sigma.eval(x)?;
            Ok(2.0 * self.spec.drift.eval(x)? / (s * s) * map.dx_dt(t))
        }
    }

    fn speed_closure(&self) -> impl FnMut(f64) -> Result<f64> + Clone + '_ {
        let map = self.map;
        move |t: f64| -> Result<f64> {
            let x = map.x_of(t);
            let b = self.log_scale.eval(self.g_closure(), t)?;
            let sp = (-b).exp();
            if sp.is_infinite() {
                return Ok(0.0);
            }
            let s = self.spec.sigma.eval(x)?;
            Ok(2.0 / (s * s * sp) * map.dx_dt(t))
        }
    }

    fn scale_closure(&self) -> impl FnMut(f64) -> Result<f64> + Clone + '_ {
        let map = self.map;
        move |t: f64| -> Result<f64> {
            let b = self.log_scale.eval(self.g_closure(), t)?;
            Ok((-b).exp() * map.dx_dt(t))
        }
    }

    /// Scale-function derivative s'(x) = exp(-int 2 drift/sigma^2);
    /// S'(x) = M s'(x).
    pub fn scale_deriv(&self, x: f64) -> Result<f64> {
        let t = self.map.t_of(x).clamp(self.t_lo, self.t_hi);
        let b = self.log_scale.eval(self.g_closure(), t)?;
        Ok((-b).exp())
    }

    /// Scale function S(x) = M int_{anchor}^x s'. Strictly increasing;
    /// S(anchor) = 0.
    pub fn scale(&self, x: f64) -> Result<f64> {
        let t = self.map.t_of(x);
        let raw = self.scale_cum.eval(self.scale_closure(), t)?;
        Ok(self.mass * raw)
    }

    /// Stationary density pi(x) = m'(x) / M.
    pub fn pi_density(&self, x: f64) -> Result<f64> {
        let s = self.spec.sigma.eval(x)?;
        let sp = self.scale_deriv(x)?;
        if sp.is_infinite() {
            return Ok(0.0);
        }
        Ok(2.0 / (s * s * sp) / self.mass)
    }

    /// Stationary CDF F(x), clamped to [0, 1].
    pub fn pi_cdf(&self, x: f64) -> Result<f64> {
        let t = self.map.t_of(x).clamp(self.t_lo, self.t_hi);
        let v = self.mass_cum.eval(self.speed_closure(), t)?;
        Ok(((v - self.mass_cum.value_at_lo()) / self.mass).clamp(0.0, 1.0))
    }

    /// Inverse CDF by bisection in the compact coordinate.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidGrid { reason: "quantile argument must lie in [0, 1]" });
        }
        let mut lo = self.t_lo;
        let mut hi = self.t_hi;
        let tol = EDGE_CUT * (hi - lo);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.pi_cdf(self.map.x_of(mid))? < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.map.x_of(0.5 * (lo + hi)))
    }

    /// S(to) - S(from). Nearby points integrate s' directly so the
    /// difference never cancels large cumulative values; this keeps the
    /// Green function accurate down to v -> 0.
    pub fn scale_diff(&self, from: f64, to: f64) -> Result<f64> {
        let tf = self.map.t_of(from);
        let tt = self.map.t_of(to);
        let near = (tt - tf).abs() <= 1e-5 * (self.t_hi - self.t_lo);
        let raw = if near {
            integrate(self.scale_closure(), tf, tt, Tol::new(f64::MIN_POSITIVE, 5e-13), &[])?
        } else {
            self.scale_cum.eval(self.scale_closure(), tt)?
                - self.scale_cum.eval(self.scale_closure(), tf)?
        };
        Ok(self.mass * raw)
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x < self.spec.left || x > self.spec.right {
            return Err(Error::PointOutsideInterval { x });
        }
        Ok(())
    }
}

/// Green function v_z(x, y): expected local time at y before hitting z,
/// as a min/max of scale differences. Zero when x and y straddle z;
/// symmetric and nonnegative everywhere.
pub fn green_function(a: &DiffusionAnalysis, z: f64, x: f64, y: f64) -> Result<f64> {
    a.check_point(z)?;
    a.check_point(x)?;
    a.check_point(y)?;
    // S is strictly increasing, so min/max of scale values is the scale
    // of min/max and every case is one difference
    let v = if x >= z && y >= z {
        a.scale_diff(z, x.min(y))?
    } else if x <= z && y <= z {
        a.scale_diff(x.max(y), z)?
    } else {
        0.0
    };
    Ok(v.max(0.0))
}

/// Mean hitting time `E^x[T_z] = int v_z(x, y) pi(dy)`.
///
/// Only the stretch between x and z needs quadrature: past x the Green
/// function is constant in y, so that side contributes
/// (S(x) - S(z)) * pi-mass exactly.
pub fn expected_hitting(a: &DiffusionAnalysis, x: f64, z: f64) -> Result<f64> {
    a.check_point(x)?;
    a.check_point(z)?;
    if x == z {
        return Ok(0.0);
    }
    let tx = a.map.t_of(x);
    let tz = a.map.t_of(z);
    let map = a.map;
    let (lo, hi) = if x > z { (tz, tx) } else { (tx, tz) };
    let integrand = |t: f64| -> Result<f64> {
        let y = map.x_of(t);
        let v = if x > z { a.scale_diff(z, y)? } else { a.scale_diff(y, z)? };
        Ok(v.max(0.0) * a.pi_density(y)? * map.dx_dt(t))
    };
    let near = integrate_scaled(integrand, lo, hi, 1e-11, 1e-13, &[])?;
    let gap = a.scale_diff(z.min(x), z.max(x))?;
    let far = if x > z { gap * (1.0 - a.pi_cdf(x)?) } else { gap * a.pi_cdf(x)? };
    Ok((near + far).max(0.0))
}

/// Squared Eisenbaum–Kaspi distance `h(x, y) = v_y(x, x) = |S(x) - S(y)|`.
pub fn h_metric(a: &DiffusionAnalysis, x: f64, y: f64) -> Result<f64> {
    a.check_point(x)?;
    a.check_point(y)?;
    Ok(a.scale_diff(x, y)?.abs())
}

/// gamma = int int h(x, y) pi(dx) pi(dy), reduced to one dimension:
/// E|S(X) - S(Y)| = 2 M int s'(y) F(y) (1 - F(y)) dy.
///
/// On an unbounded interval pass a truncation radius to study gamma on
/// [-r, r] with reflecting truncation; without one the full integral is
/// attempted and reports `Divergent` when it blows past the overflow
/// guard (which it does whenever the scale function explodes toward an
/// infinite boundary, e.g. any non-entrance boundary at infinity).
pub fn gamma(a: &DiffusionAnalysis, truncation: Option<f64>) -> Result<f64> {
    if let Some(r) = truncation {
        if !a.spec.is_bounded() {
            let truncated = DiffusionAnalysis::build(a.spec.truncated(r)?)?;
            return gamma_value(&truncated);
        }
    }
    gamma_value(a)
}

fn gamma_value(a: &DiffusionAnalysis) -> Result<f64> {
    let map = a.map;
    let integrand = |t: f64| -> Result<f64> {
        let sp_dx = {
            let b = a.log_scale.eval(a.g_closure(), t)?;
            (-b).exp() * map.dx_dt(t)
        };
        let f = {
            let v = a.mass_cum.eval(a.speed_closure(), t)?;
            ((v - a.mass_cum.value_at_lo()) / a.mass).clamp(0.0, 1.0)
        };
        Ok(sp_dx * f * (1.0 - f))
    };
    let unbounded = !a.spec.is_bounded();
    match integrate_scaled(integrand, a.t_lo, a.t_hi, 1e-12, 1e-12, &[]) {
        Ok(v) => {
            let g = 2.0 * a.mass * v;
            if !g.is_finite() || g > GAMMA_GUARD {
                Err(Error::Divergent { context: "gamma exceeds the overflow guard".into() })
            } else {
                Ok(g)
            }
        }
        Err(Error::NonFiniteIntegrand { x }) if unbounded => Err(Error::Divergent {
            context: format!("gamma integrand overflows near t = {x}"),
        }),
        Err(e) => Err(e),
    }
}

/// Chebyshev grid of `n` interior points for a bounded interval.
pub fn default_grid(a: &DiffusionAnalysis, n: usize) -> Result<Vec<f64>> {
    if !a.spec.is_bounded() {
        return Err(Error::UnboundedDomain { operation: "kemeny profile grid" });
    }
    if n == 0 {
        return Err(Error::InvalidGrid { reason: "grid needs at least one point" });
    }
    let (l, r) = a.spec.interval();
    Ok(chebyshev_points(n, l, r))
}

/// Kemeny profile `K(x) = int E^x[T_z] pi(dz)` on a grid, with kappa from
/// a pi-weighted average over grid cells, and the kappa = gamma/2
/// residual.
pub fn kemeny_profile(a: &DiffusionAnalysis, grid: &[f64]) -> Result<DiffusionKemenyReport> {
    if !a.spec.is_bounded() {
        return Err(Error::UnboundedDomain { operation: "kemeny_profile" });
    }
    if grid.is_empty() {
        return Err(Error::InvalidGrid { reason: "grid needs at least one point" });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidGrid { reason: "grid must be strictly increasing" });
    }
    for &x in grid {
        a.check_point(x)?;
    }
    let map = a.map;
    let mut k_values = Vec::with_capacity(grid.len());
    for &x in grid {
        let tx = map.t_of(x);
        let integrand = |t: f64| -> Result<f64> {
            let z = map.x_of(t);
            Ok(expected_hitting(a, x, z)? * a.pi_density(z)? * map.dx_dt(t))
        };
        // the outer relative tolerance sits well above the inner
        // quadrature's own error, so refinement tracks the integrand
        // rather than the noise floor of expected_hitting
        let k = integrate_scaled(integrand, a.t_lo, a.t_hi, 1e-9, 1e-10, &[tx])?;
        k_values.push(k);
    }

    // kappa: pi-mass of the Voronoi cell around each grid point
    let mut kappa = 0.0;
    let mut weight = 0.0;
    let mut lo_t = a.t_lo;
    for (i, &x) in grid.iter().enumerate() {
        let hi_t = if i + 1 < grid.len() {
            0.5 * (map.t_of(x) + map.t_of(grid[i + 1]))
        } else {
            a.t_hi
        };
        let w = a.pi_cdf(map.x_of(hi_t))? - a.pi_cdf(map.x_of(lo_t))?;
        kappa += w * k_values[i];
        weight += w;
        lo_t = hi_t;
    }
    kappa /= weight;

    let spread = k_values.iter().cloned().fold(f64::MIN, f64::max)
        - k_values.iter().cloned().fold(f64::MAX, f64::min);
    let g = gamma_value(a)?;
    Ok(DiffusionKemenyReport {
        grid: grid.to_vec(),
        k_values,
        kappa,
        gamma: g,
        spread,
        residual_gamma: (kappa - 0.5 * g).abs(),
    })
}
